//! Command-line driver: training runs, oracle checks, spectra, circuit
//! samples, symmetry and coupling reports, and exports.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use circuitlab::circuits::{sample_circuits, write_circuits_csv, PerturbationSpec};
use circuitlab::diagnostics::symmetry_report;
use circuitlab::harness::rundir::{
    self, bootstrap_and_coupling, export_run, ExportFormat, SpectrumMeta, SymmetryTraceEntry,
};
use circuitlab::harness::{make_dataset, oracle_check, run_experiment, BootstrapCfg, TrainConfig};
use circuitlab::nn::Network;
use circuitlab::spectral::{
    lanczos_density, spectrum_symmetry_score, write_density_csv, HessianOp,
};
use circuitlab::Result;

#[derive(Parser)]
#[command(
    name = "circuitlab",
    version,
    about = "Circuit decompositions, Hessian spectra, and symmetry statistics of bias-free ReLU networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network per a JSON config and write a run directory.
    Train {
        /// Path to the JSON config file.
        config: PathBuf,
        /// Output run directory (default: `run/` next to the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact circuit/gradient/Hessian identities and the gate
    /// degeneration checks on seeded tiny networks; exit 0 iff all pass.
    OracleCheck,
    /// Estimate the Hessian spectral density at a checkpoint.
    Spectrum {
        /// Path to a `checkpoints/epoch_<k>.bin` inside a run directory.
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 8)]
        probes: usize,
        #[arg(long, default_value_t = 80)]
        steps: usize,
        /// Gaussian smoothing width (default: Ritz range / 100).
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Sample basis or perturbation circuits at a checkpoint.
    Circuits {
        /// Path to a `checkpoints/epoch_<k>.bin` inside a run directory.
        checkpoint: PathBuf,
        /// Perturbation order: 0 (basis), 1, or 2.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
        order: u8,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Gradient symmetry reports over the checkpoints of a run.
    Symmetry { run_dir: PathBuf },
    /// Bootstrap Hessian-entry statistics and the coupling report at the
    /// final checkpoint of a run.
    Coupling {
        run_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        entries: usize,
        #[arg(long, default_value_t = 64)]
        resamples: usize,
        #[arg(long, default_value_t = 100)]
        null_resamples: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
    },
    /// Export the run's scalar records as flat (epoch, metric, value) rows.
    Export {
        run_dir: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train { config, out } => {
            let text = fs::read_to_string(&config)?;
            let cfg: TrainConfig = serde_json::from_str(&text)?;
            let dir = out.unwrap_or_else(|| {
                config
                    .parent()
                    .map(|p| p.to_path_buf())
                    .unwrap_or_default()
                    .join("run")
            });
            let result = run_experiment::<f64>(&cfg, &dir)?;
            let last = result.log.final_row();
            println!(
                "run written to {}; final epoch {}: risk {:.4e}, accuracy {:.4}, OP {:.4e}",
                dir.display(),
                last.epoch,
                last.risk,
                last.accuracy,
                last.op
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck => {
            let ok = oracle_check(&mut std::io::stdout())?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Spectrum {
            checkpoint,
            probes,
            steps,
            sigma,
            seed,
        } => {
            let (run_dir, epoch) = rundir::locate_run(&checkpoint)?;
            let manifest = rundir::load_manifest(&run_dir)?;
            let net: Network<f64> = Network::load(&checkpoint)?;
            let data = make_dataset::<f64>(&manifest.config.dataset)?;
            let op = HessianOp {
                net: &net,
                batch: &data,
            };
            let density = lanczos_density(&op, probes, steps, sigma, seed)?;
            fs::create_dir_all(run_dir.join("spectra"))?;
            let csv_path = run_dir.join(format!("spectra/epoch_{epoch}.csv"));
            let mut f = fs::File::create(&csv_path)?;
            write_density_csv(&mut f, &density)?;
            let meta = SpectrumMeta {
                epoch,
                probes,
                steps,
                sigma: density.sigma,
                seed,
                symmetry_score: spectrum_symmetry_score(&density)?,
                second_moment: density.moment(2),
            };
            rundir::write_json(&run_dir.join(format!("spectra/epoch_{epoch}.json")), &meta)?;
            println!(
                "spectrum written to {}; symmetry score {:.4}, second moment {:.4e}",
                csv_path.display(),
                meta.symmetry_score,
                meta.second_moment
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Circuits {
            checkpoint,
            order,
            count,
            seed,
        } => {
            let (run_dir, epoch) = rundir::locate_run(&checkpoint)?;
            let manifest = rundir::load_manifest(&run_dir)?;
            let net: Network<f64> = Network::load(&checkpoint)?;
            let data = make_dataset::<f64>(&manifest.config.dataset)?;
            let ex = &data[0];
            let spec = match order {
                0 => PerturbationSpec::Basis,
                1 => PerturbationSpec::FirstOrder(None),
                _ => PerturbationSpec::SecondOrder(None),
            };
            let samples = sample_circuits(&net, &ex.x, ex.y, count, seed, spec)?;
            fs::create_dir_all(run_dir.join("circuits"))?;
            let path = run_dir.join(format!("circuits/epoch_{epoch}.csv"));
            let mut f = fs::File::create(&path)?;
            write_circuits_csv(&mut f, &samples, net.depth())?;
            println!(
                "{count} order-{order} circuit samples written to {}",
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Symmetry { run_dir } => {
            let epochs = rundir::checkpoint_epochs(&run_dir)?;
            let mut trace = Vec::new();
            println!("epoch  divergence  sign_balance  samples");
            for epoch in epochs {
                let path = run_dir.join(format!("reports/gradient_epoch_{epoch}.json"));
                let grad: Vec<f64> = serde_json::from_str(&fs::read_to_string(&path)?)?;
                let report = symmetry_report(&grad);
                println!(
                    "{epoch:5}  {:.4}      {:.4}        {}{}",
                    report.symmetry_divergence,
                    report.sign_balance,
                    report.sample_count,
                    if report.all_zero { "  (all zero)" } else { "" }
                );
                trace.push(SymmetryTraceEntry { epoch, report });
            }
            rundir::write_json(&run_dir.join("reports/symmetry.json"), &trace)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Coupling {
            run_dir,
            entries,
            resamples,
            null_resamples,
            seed,
        } => {
            let manifest = rundir::load_manifest(&run_dir)?;
            let epochs = rundir::checkpoint_epochs(&run_dir)?;
            let last = *epochs
                .last()
                .ok_or_else(|| circuitlab::Error::Config("run has no checkpoints".into()))?;
            let net: Network<f64> =
                Network::load(&run_dir.join(format!("checkpoints/epoch_{last}.bin")))?;
            let data = make_dataset::<f64>(&manifest.config.dataset)?;
            let defaults = BootstrapCfg {
                entries,
                resamples,
                null_resamples,
                seed,
            };
            let (stats, coupling) = bootstrap_and_coupling(
                &net,
                &data,
                defaults.entries,
                defaults.resamples,
                defaults.null_resamples,
                defaults.seed,
            )?;
            rundir::write_json(
                &run_dir.join(format!("reports/entry_stats_epoch_{last}.json")),
                &stats,
            )?;
            rundir::write_json(
                &run_dir.join(format!("reports/coupling_epoch_{last}.json")),
                &coupling,
            )?;
            let mut f = fs::File::create(
                run_dir.join(format!("reports/coupling_cc_epoch_{last}.csv")),
            )?;
            rundir::write_cc_csv(&mut f, &coupling)?;
            println!(
                "epoch {last}: {} tracked entries, null threshold {:.3}, avg coupling size {:.2}, coupling fraction {:.4}",
                coupling.tracked,
                coupling.null_threshold,
                coupling.avg_coupling_size,
                coupling.coupling_fraction
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { run_dir, format } => {
            let fmt = match format {
                Format::Csv => ExportFormat::Csv,
                Format::Json => ExportFormat::Json,
            };
            let path = export_run(&run_dir, fmt)?;
            println!("exported to {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

//! Run directories: manifest, scalar log, checkpoints, spectra, circuit
//! samples, and reports.
//!
//! Layout under the run directory:
//!
//! ```text
//! manifest.json                      config + crate version
//! log.csv                            epoch,risk,accuracy,op,op_scaled
//! checkpoints/epoch_<k>.bin          weight snapshots
//! spectra/epoch_<k>.csv|.json        Lanczos densities + sidecar
//! circuits/epoch_<k>.csv             sampled circuits, orders 0/1/2
//! reports/gradient_epoch_<k>.json    full-batch gradient snapshots
//! reports/symmetry.json              per-checkpoint gradient symmetry
//! reports/entry_stats_epoch_<k>.json bootstrap entry moments
//! reports/coupling_epoch_<k>.json    correlation/coupling reports
//! ```
//!
//! Scalar CSV floats carry 17 significant digits.

use std::fs;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuits::{sample_circuits, write_circuits_csv, PerturbationSpec};
use crate::diagnostics::{
    bootstrap_entry_stats, coupling_report, select_tracked_entries, symmetry_report,
    CouplingReport, EntryStats, SymmetryReport,
};
use crate::error::{Error, Result};
use crate::harness::{make_dataset, train, TrainConfig, TrainOutput};
use crate::nn::{Example, Network};
use crate::scalar::Real;
use crate::spectral::{
    lanczos_density, spectrum_symmetry_score, write_density_csv, HessianOp, SpectralDensity,
};

/// Run manifest: the full config plus the producing crate version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: TrainConfig,
}

/// Sidecar metadata for a spectrum CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub epoch: usize,
    pub probes: usize,
    pub steps: usize,
    pub sigma: f64,
    pub seed: u64,
    pub symmetry_score: f64,
    pub second_moment: f64,
}

/// One entry of the gradient-symmetry trace report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryTraceEntry {
    pub epoch: usize,
    pub report: SymmetryReport,
}

/// Trains per the config and writes the full run directory.
pub fn run_experiment<F: Real>(config: &TrainConfig, dir: &Path) -> Result<TrainOutput<F>> {
    fs::create_dir_all(dir)?;
    fs::create_dir_all(dir.join("checkpoints"))?;
    fs::create_dir_all(dir.join("reports"))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;

    let data: Vec<Example<F>> = make_dataset(&config.dataset)?;
    let out = train::<F>(config)?;
    write_log_csv(&dir.join("log.csv"), &out)?;

    let mut symmetry_trace = Vec::new();
    for ck in &out.checkpoints {
        ck.net
            .save(&dir.join(format!("checkpoints/epoch_{}.bin", ck.epoch)))?;
        let grad64: Vec<f64> = ck.gradient.iter().map(|g| g.to_f64_lossy()).collect();
        write_json(
            &dir.join(format!("reports/gradient_epoch_{}.json", ck.epoch)),
            &grad64,
        )?;
        symmetry_trace.push(SymmetryTraceEntry {
            epoch: ck.epoch,
            report: symmetry_report(&grad64),
        });

        if let Some(spec) = &config.diagnostics.spectrum {
            fs::create_dir_all(dir.join("spectra"))?;
            let op = HessianOp {
                net: &ck.net,
                batch: &data,
            };
            let density = lanczos_density(
                &op,
                spec.probes,
                spec.steps,
                spec.sigma.map(F::of),
                spec.seed,
            )?;
            write_spectrum(dir, ck.epoch, &density, spec.seed)?;
        }

        if let Some(cs) = &config.diagnostics.circuit_samples {
            fs::create_dir_all(dir.join("circuits"))?;
            let ex = &data[0];
            let mut samples = Vec::new();
            for (i, spec_kind) in [
                PerturbationSpec::Basis,
                PerturbationSpec::FirstOrder(None),
                PerturbationSpec::SecondOrder(None),
            ]
            .into_iter()
            .enumerate()
            {
                samples.extend(sample_circuits(
                    &ck.net,
                    &ex.x,
                    ex.y,
                    cs.count,
                    cs.seed.wrapping_add(i as u64),
                    spec_kind,
                )?);
            }
            let mut f = fs::File::create(dir.join(format!("circuits/epoch_{}.csv", ck.epoch)))?;
            write_circuits_csv(&mut f, &samples, ck.net.depth())?;
        }
    }
    write_json(&dir.join("reports/symmetry.json"), &symmetry_trace)?;

    if let Some(bs) = &config.diagnostics.bootstrap {
        let first = out.checkpoints.first().expect("init checkpoint");
        let last = out.checkpoints.last().expect("final checkpoint");
        for ck in [first, last] {
            let (stats, coupling) = bootstrap_and_coupling(
                &ck.net,
                &data,
                bs.entries,
                bs.resamples,
                bs.null_resamples,
                bs.seed,
            )?;
            write_json(
                &dir.join(format!("reports/entry_stats_epoch_{}.json", ck.epoch)),
                &stats,
            )?;
            write_json(
                &dir.join(format!("reports/coupling_epoch_{}.json", ck.epoch)),
                &coupling,
            )?;
            let mut f =
                fs::File::create(dir.join(format!("reports/coupling_cc_epoch_{}.csv", ck.epoch)))?;
            write_cc_csv(&mut f, &coupling)?;
        }
    }
    Ok(out)
}

/// Bootstrap entry statistics plus the coupling report for one checkpoint.
pub fn bootstrap_and_coupling<F: Real>(
    net: &Network<F>,
    data: &[Example<F>],
    entries: usize,
    resamples: usize,
    null_resamples: usize,
    seed: u64,
) -> Result<(Vec<EntryStats>, CouplingReport)> {
    let tracked = select_tracked_entries(net, entries, seed);
    let run = bootstrap_entry_stats(net, data, &tracked, resamples, seed.wrapping_add(1))?;
    let coupling = coupling_report(&run.table, null_resamples, seed.wrapping_add(2))?;
    Ok((run.stats, coupling))
}

/// Writes the correlation matrix of a coupling report as dense CSV, one row
/// per tracked entry.
pub fn write_cc_csv<W: IoWrite>(w: &mut W, report: &CouplingReport) -> Result<()> {
    for row in &report.cc {
        let line = row
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn write_spectrum<F: Real>(
    dir: &Path,
    epoch: usize,
    density: &SpectralDensity<F>,
    seed: u64,
) -> Result<()> {
    let mut f = fs::File::create(dir.join(format!("spectra/epoch_{epoch}.csv")))?;
    write_density_csv(&mut f, density)?;
    let meta = SpectrumMeta {
        epoch,
        probes: density.probes,
        steps: density.steps,
        sigma: density.sigma.to_f64_lossy(),
        seed,
        symmetry_score: spectrum_symmetry_score(density)?.to_f64_lossy(),
        second_moment: density.moment(2).to_f64_lossy(),
    };
    write_json(&dir.join(format!("spectra/epoch_{epoch}.json")), &meta)?;
    Ok(())
}

fn write_log_csv<F: Real>(path: &Path, out: &TrainOutput<F>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "epoch,risk,accuracy,op,op_scaled")?;
    for r in &out.log.rows {
        writeln!(
            f,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.epoch, r.risk, r.accuracy, r.op, r.op_scaled
        )?;
    }
    Ok(())
}

/// Parses a `log.csv` written by [`run_experiment`].
pub fn load_log_csv(path: &Path) -> Result<crate::harness::TrainLog> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Csv {
                line: lineno + 1,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|e| Error::Csv {
                line: lineno + 1,
                message: format!("bad float {s:?}: {e}"),
            })
        };
        rows.push(crate::harness::EpochRow {
            epoch: fields[0].parse().map_err(|e| Error::Csv {
                line: lineno + 1,
                message: format!("bad epoch: {e}"),
            })?,
            risk: parse(fields[1])?,
            accuracy: parse(fields[2])?,
            op: parse(fields[3])?,
            op_scaled: parse(fields[4])?,
        });
    }
    Ok(crate::harness::TrainLog { rows })
}

/// Reads the manifest of a run directory.
pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Checkpoint epochs present in a run directory, ascending.
pub fn checkpoint_epochs(dir: &Path) -> Result<Vec<usize>> {
    let mut epochs = Vec::new();
    for entry in fs::read_dir(dir.join("checkpoints"))? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(num) = name
            .strip_prefix("epoch_")
            .and_then(|s| s.strip_suffix(".bin"))
        {
            if let Ok(e) = num.parse() {
                epochs.push(e);
            }
        }
    }
    epochs.sort_unstable();
    Ok(epochs)
}

/// Walks from a checkpoint path up to the run directory containing
/// `manifest.json`, and extracts the checkpoint epoch from the file name.
pub fn locate_run(checkpoint: &Path) -> Result<(PathBuf, usize)> {
    let name = checkpoint
        .file_name()
        .ok_or_else(|| Error::Config("checkpoint path has no file name".into()))?
        .to_string_lossy()
        .into_owned();
    let epoch: usize = name
        .strip_prefix("epoch_")
        .and_then(|s| s.strip_suffix(".bin"))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config(format!("checkpoint {name:?} is not named epoch_<k>.bin")))?;
    let mut dir = checkpoint.parent();
    while let Some(d) = dir {
        if d.join("manifest.json").exists() {
            return Ok((d.to_path_buf(), epoch));
        }
        dir = d.parent();
    }
    Err(Error::Config(format!(
        "no manifest.json above {}",
        checkpoint.display()
    )))
}

/// Export format for [`export_run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Flattened metric record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRow {
    pub epoch: usize,
    pub metric: String,
    pub value: f64,
}

/// Quotes one CSV field per RFC 4180.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Exports the run's scalar records into `export/` as flat
/// `(epoch, metric, value)` rows, either CSV (RFC 4180) or JSON.
pub fn export_run(dir: &Path, format: ExportFormat) -> Result<PathBuf> {
    let log = load_log_csv(&dir.join("log.csv"))?;
    let mut rows: Vec<MetricRow> = Vec::new();
    for r in &log.rows {
        for (name, value) in [
            ("risk", r.risk),
            ("accuracy", r.accuracy),
            ("op", r.op),
            ("op_scaled", r.op_scaled),
        ] {
            rows.push(MetricRow {
                epoch: r.epoch,
                metric: name.to_string(),
                value,
            });
        }
    }
    let symmetry_path = dir.join("reports/symmetry.json");
    if symmetry_path.exists() {
        let trace: Vec<SymmetryTraceEntry> =
            serde_json::from_str(&fs::read_to_string(&symmetry_path)?)?;
        for e in &trace {
            rows.push(MetricRow {
                epoch: e.epoch,
                metric: "gradient_symmetry_divergence".into(),
                value: e.report.symmetry_divergence,
            });
            rows.push(MetricRow {
                epoch: e.epoch,
                metric: "gradient_sign_balance".into(),
                value: e.report.sign_balance,
            });
        }
    }
    for epoch in checkpoint_epochs(dir).unwrap_or_default() {
        let meta_path = dir.join(format!("spectra/epoch_{epoch}.json"));
        if meta_path.exists() {
            let meta: SpectrumMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
            rows.push(MetricRow {
                epoch,
                metric: "spectrum_symmetry_score".into(),
                value: meta.symmetry_score,
            });
            rows.push(MetricRow {
                epoch,
                metric: "spectrum_second_moment".into(),
                value: meta.second_moment,
            });
        }
        let coupling_path = dir.join(format!("reports/coupling_epoch_{epoch}.json"));
        if coupling_path.exists() {
            let rep: CouplingReport = serde_json::from_str(&fs::read_to_string(&coupling_path)?)?;
            rows.push(MetricRow {
                epoch,
                metric: "coupling_fraction".into(),
                value: rep.coupling_fraction,
            });
        }
    }

    let out_dir = dir.join("export");
    fs::create_dir_all(&out_dir)?;
    let path = match format {
        ExportFormat::Csv => {
            let path = out_dir.join("metrics.csv");
            let mut f = fs::File::create(&path)?;
            writeln!(f, "epoch,metric,value")?;
            for r in &rows {
                writeln!(f, "{},{},{:.16e}", r.epoch, csv_field(&r.metric), r.value)?;
            }
            path
        }
        ExportFormat::Json => {
            let path = out_dir.join("metrics.json");
            write_json(&path, &rows)?;
            path
        }
    };
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

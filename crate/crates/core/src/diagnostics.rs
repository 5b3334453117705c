//! Symmetry and concentration statistics: histogram symmetry reports, the
//! plasticity order parameter, bootstrap Hessian-entry statistics, and
//! correlation/coupling reports.
//!
//! All reports are plain `f64` structures (serde-friendly); the numeric core
//! they summarize stays generic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Example, Network};
use crate::scalar::Real;
use crate::stats;

/// Number of histogram bins used by symmetry reports.
pub const SYMMETRY_BINS: usize = 64;

/// Sign balance, skewness, and mirror divergence of a sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub sample_count: usize,
    /// Fraction of positive values among nonzero values.
    pub sign_balance: f64,
    /// Exact 99% binomial interval for the sign balance.
    pub sign_ci: (f64, f64),
    pub skewness: f64,
    /// Total-variation distance between the 64-bin histogram spanning
    /// `[-max|v|, +max|v|]` and its mirror image.
    pub symmetry_divergence: f64,
    /// Every value was exactly zero; the sign test is skipped and the
    /// divergence is zero by convention.
    pub all_zero: bool,
}

/// Symmetry statistics of a sample of values.
pub fn symmetry_report(samples: &[f64]) -> SymmetryReport {
    assert!(samples.len() >= 2, "need at least two samples");
    let nonzero: Vec<f64> = samples.iter().copied().filter(|&v| v != 0.0).collect();
    if nonzero.is_empty() {
        return SymmetryReport {
            sample_count: samples.len(),
            sign_balance: 0.5,
            sign_ci: (0.0, 1.0),
            skewness: 0.0,
            symmetry_divergence: 0.0,
            all_zero: true,
        };
    }
    let positives = nonzero.iter().filter(|&&v| v > 0.0).count();
    let sign_balance = positives as f64 / nonzero.len() as f64;
    let sign_ci = stats::binomial_ci(positives, nonzero.len(), 0.99);
    let skewness = stats::moments(samples).skewness;
    let divergence = stats::symmetric_histogram(samples, SYMMETRY_BINS)
        .map(|h| stats::mirror_divergence(&h))
        .unwrap_or(0.0);
    SymmetryReport {
        sample_count: samples.len(),
        sign_balance,
        sign_ci,
        skewness,
        symmetry_divergence: divergence,
        all_zero: false,
    }
}

/// The plasticity order parameter: squared 2-norm of the batch risk
/// gradient. Zero exactly when every per-example loss is inert.
pub fn order_parameter<F: Real>(net: &Network<F>, batch: &[Example<F>]) -> Result<F> {
    crate::nn::grad_norm_squared(net, batch)
}

/// One tracked cross-layer Hessian coordinate: row weight `(l, a, b)` and
/// column weight `(lp, c, d)`, layers 1-based, units 0-based, `l != lp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackedEntry {
    pub row: (usize, usize, usize),
    pub col: (usize, usize, usize),
}

/// Bootstrap moments of one tracked Hessian entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryStats {
    pub entry: TrackedEntry,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `mean / std` over bootstrap resamples; 0 when the entry is constant
    /// across resamples (`degenerate`).
    pub normalized_mean: f64,
    pub degenerate: bool,
}

/// Bootstrap run over tracked entries: per-entry moments plus the raw
/// entry-by-resample table that coupling analysis consumes.
#[derive(Debug, Clone)]
pub struct BootstrapRun {
    pub stats: Vec<EntryStats>,
    /// `table[entry][resample]`.
    pub table: Vec<Vec<f64>>,
    pub resamples: usize,
}

/// Draws `count` distinct tracked cross-layer Hessian coordinates uniformly
/// at random (seeded).
pub fn select_tracked_entries<F: Real>(
    net: &Network<F>,
    count: usize,
    seed: u64,
) -> Vec<TrackedEntry> {
    assert!(
        net.depth() >= 2,
        "cross-layer entries need at least two layers"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths = net.widths();
    let mut out: Vec<TrackedEntry> = Vec::with_capacity(count);
    while out.len() < count {
        let l = rng.random_range(1..=net.depth());
        let lp = rng.random_range(1..=net.depth());
        if l == lp {
            continue;
        }
        let (l, lp) = if l < lp { (l, lp) } else { (lp, l) };
        let entry = TrackedEntry {
            row: (
                l,
                rng.random_range(0..widths[l - 1]),
                rng.random_range(0..widths[l]),
            ),
            col: (
                lp,
                rng.random_range(0..widths[lp - 1]),
                rng.random_range(0..widths[lp]),
            ),
        };
        if !out.contains(&entry) {
            out.push(entry);
        }
    }
    out
}

/// Bootstrap statistics of tracked Hessian entries over a dataset.
///
/// Each resample draws `m` examples with replacement (`m` = dataset size) and
/// evaluates every tracked entry on the resampled batch. Because each entry
/// is a batch mean of per-example values, per-example values are computed
/// once (via `hvp` against basis vectors of the column coordinates) and the
/// resampled entry is their weighted mean. Deterministic given the seed.
pub fn bootstrap_entry_stats<F: Real>(
    net: &Network<F>,
    dataset: &[Example<F>],
    tracked: &[TrackedEntry],
    resamples: usize,
    seed: u64,
) -> Result<BootstrapRun> {
    if dataset.is_empty() {
        return Err(Error::Config("bootstrap over an empty dataset".into()));
    }
    if resamples < 30 {
        return Err(Error::Config(format!(
            "need at least 30 bootstrap resamples, got {resamples}"
        )));
    }
    for t in tracked {
        if t.row.0 == t.col.0 {
            return Err(Error::WithinLayer { layer: t.row.0 });
        }
    }
    let m = dataset.len();

    // Per-example entry values, grouped by distinct column coordinate.
    let mut columns: Vec<(usize, usize, usize)> = Vec::new();
    for t in tracked {
        if !columns.contains(&t.col) {
            columns.push(t.col);
        }
    }
    let n = net.param_count();
    // values[c][j] = column c of the Hessian of example j, restricted later.
    let mut per_example: Vec<Vec<Vec<F>>> = Vec::with_capacity(columns.len());
    for &(lp, c, d) in &columns {
        let mut e = vec![F::zero(); n];
        e[net.flat_index(lp, c, d)?] = F::one();
        let mut cols_j = Vec::with_capacity(m);
        for ex in dataset {
            cols_j.push(net.hvp(std::slice::from_ref(ex), &e)?);
        }
        per_example.push(cols_j);
    }
    // value of tracked entry t on example j
    let mut entry_values: Vec<Vec<f64>> = Vec::with_capacity(tracked.len());
    for t in tracked {
        let ci = columns.iter().position(|c| *c == t.col).unwrap();
        let ri = net.flat_index(t.row.0, t.row.1, t.row.2)?;
        entry_values.push(
            (0..m)
                .map(|j| per_example[ci][j][ri].to_f64_lossy())
                .collect(),
        );
    }

    // Resample example indices with replacement, identically for all entries.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = vec![vec![0.0f64; resamples]; tracked.len()];
    for b in 0..resamples {
        let mut counts = vec![0u32; m];
        for _ in 0..m {
            counts[rng.random_range(0..m)] += 1;
        }
        for (t, values) in entry_values.iter().enumerate() {
            let mut acc = 0.0;
            for (j, &cnt) in counts.iter().enumerate() {
                if cnt > 0 {
                    acc += cnt as f64 * values[j];
                }
            }
            table[t][b] = acc / m as f64;
        }
    }

    let stats: Vec<EntryStats> = tracked
        .iter()
        .zip(&table)
        .map(|(t, row)| {
            let mom = stats::moments(row);
            let degenerate = mom.std == 0.0;
            EntryStats {
                entry: *t,
                mean: mom.mean,
                std: mom.std,
                skewness: mom.skewness,
                excess_kurtosis: mom.excess_kurtosis,
                normalized_mean: if degenerate { 0.0 } else { mom.mean / mom.std },
                degenerate,
            }
        })
        .collect();

    Ok(BootstrapRun {
        stats,
        table,
        resamples,
    })
}

/// Correlation structure of tracked entries and the coupling-set statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingReport {
    pub tracked: usize,
    pub resamples: usize,
    /// Pearson correlation matrix; diagonal 1, constant columns zeroed.
    pub cc: Vec<Vec<f64>>,
    /// 99th percentile of `|CC|` under the permutation null.
    pub null_threshold: f64,
    /// Mean over entries of the number of other entries with `|CC| > tau`.
    pub avg_coupling_size: f64,
    /// `avg_coupling_size / (M - 1)`.
    pub coupling_fraction: f64,
    /// Indices of entries constant across resamples (correlations zeroed).
    pub constant_entries: Vec<usize>,
}

/// Pearson correlations between tracked entries across bootstrap resamples,
/// with a permutation-calibrated threshold for "nonzero" correlation.
///
/// The null shuffles each entry's resample series independently
/// `null_resamples` times and pools the off-diagonal `|CC|`; the threshold
/// is the pooled 99th percentile.
pub fn coupling_report(
    table: &[Vec<f64>],
    null_resamples: usize,
    seed: u64,
) -> Result<CouplingReport> {
    let m = table.len();
    if m < 2 {
        return Err(Error::Config("need at least two tracked entries".into()));
    }
    let b = table[0].len();
    if b < 30 {
        return Err(Error::Config(format!(
            "need at least 30 resamples, got {b}"
        )));
    }
    if table.iter().any(|row| row.len() != b) {
        return Err(Error::Config("ragged resample table".into()));
    }
    if null_resamples < 1 {
        return Err(Error::Config("need at least one null resample".into()));
    }
    let constant: Vec<bool> = table
        .iter()
        .map(|row| row.iter().all(|&v| v == row[0]))
        .collect();
    let mut cc = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        cc[i][i] = 1.0;
        for j in 0..i {
            let r = if constant[i] || constant[j] {
                0.0
            } else {
                stats::pearson(&table[i], &table[j])
            };
            cc[i][j] = r;
            cc[j][i] = r;
        }
    }

    // Permutation null over the non-constant rows.
    let live: Vec<usize> = (0..m).filter(|&i| !constant[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::new();
    for _ in 0..null_resamples {
        let shuffled: Vec<Vec<f64>> = live
            .iter()
            .map(|&i| {
                let mut row = table[i].clone();
                for k in (1..row.len()).rev() {
                    let j = rng.random_range(0..=k);
                    row.swap(k, j);
                }
                row
            })
            .collect();
        for i in 0..shuffled.len() {
            for j in 0..i {
                pool.push(stats::pearson(&shuffled[i], &shuffled[j]).abs());
            }
        }
    }
    let null_threshold = if pool.is_empty() {
        1.0
    } else {
        stats::quantile(&pool, 0.99)
    };

    let mut total = 0usize;
    for i in 0..m {
        for j in 0..m {
            if i != j && cc[i][j].abs() > null_threshold {
                total += 1;
            }
        }
    }
    let avg_coupling_size = total as f64 / m as f64;
    let coupling_fraction = avg_coupling_size / (m - 1) as f64;
    Ok(CouplingReport {
        tracked: m,
        resamples: b,
        cc,
        null_threshold,
        avg_coupling_size,
        coupling_fraction,
        constant_entries: (0..m).filter(|&i| constant[i]).collect(),
    })
}

/// Fraction of entries with `|normalized_mean| < threshold`.
pub fn mean_concentration_fraction(stats: &[EntryStats], threshold: f64) -> f64 {
    assert!(threshold > 0.0);
    if stats.is_empty() {
        return 0.0;
    }
    let hits = stats
        .iter()
        .filter(|s| s.normalized_mean.abs() < threshold)
        .count();
    hits as f64 / stats.len() as f64
}

/// Fraction of entries whose bootstrap mean lies within `threshold` standard
/// deviations of the population of means (one scale per report), the
/// alternative normalization in which the concentration is measured against
/// the spread of the means themselves rather than each entry's resampling
/// noise. Returns 1 when every mean is identical.
pub fn mean_concentration_fraction_population(stats: &[EntryStats], threshold: f64) -> f64 {
    assert!(threshold > 0.0);
    if stats.is_empty() {
        return 0.0;
    }
    let means: Vec<f64> = stats.iter().map(|s| s.mean).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
        / (means.len().saturating_sub(1)).max(1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return 1.0;
    }
    means.iter().filter(|v| v.abs() < threshold * sd).count() as f64 / means.len() as f64
}

/// Per-checkpoint symmetry reports over gradient coordinates.
pub fn gradient_symmetry_trace(checkpoints: &[(usize, Vec<f64>)]) -> Vec<(usize, SymmetryReport)> {
    checkpoints
        .iter()
        .map(|(epoch, grad)| (*epoch, symmetry_report(grad)))
        .collect()
}

/// Batch-mean values of the tracked Hessian entries at one checkpoint (the
/// quantity whose bootstrap mean [`bootstrap_entry_stats`] estimates).
pub fn entry_means<F: Real>(
    net: &Network<F>,
    data: &[Example<F>],
    tracked: &[TrackedEntry],
) -> Result<Vec<f64>> {
    let n = net.param_count();
    let mut columns: Vec<(usize, usize, usize)> = Vec::new();
    for t in tracked {
        if t.row.0 == t.col.0 {
            return Err(Error::WithinLayer { layer: t.row.0 });
        }
        if !columns.contains(&t.col) {
            columns.push(t.col);
        }
    }
    let mut col_values = Vec::with_capacity(columns.len());
    for &(lp, c, d) in &columns {
        let mut e = vec![F::zero(); n];
        e[net.flat_index(lp, c, d)?] = F::one();
        col_values.push(net.hvp(data, &e)?);
    }
    tracked
        .iter()
        .map(|t| {
            let ci = columns.iter().position(|c| *c == t.col).unwrap();
            let ri = net.flat_index(t.row.0, t.row.1, t.row.2)?;
            Ok(col_values[ci][ri].to_f64_lossy())
        })
        .collect()
}

/// Fraction of entries whose final mean lies within `threshold` standard
/// deviations of that entry's own trajectory of means across checkpoints.
///
/// This is the training-time normalization of the entry means: each entry's
/// mean is measured against the scale of its fluctuations over the run. An
/// entry that never moved (zero trajectory std) counts as concentrated.
pub fn trajectory_concentration(trajectories: &[Vec<f64>], threshold: f64) -> f64 {
    assert!(threshold > 0.0);
    assert!(!trajectories.is_empty());
    let hits = trajectories
        .iter()
        .filter(|series| {
            assert!(series.len() >= 2, "need at least two checkpoints");
            let k = series.len() as f64;
            let m = series.iter().sum::<f64>() / k;
            let sd = (series.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (k - 1.0)).sqrt();
            let last = *series.last().unwrap();
            sd == 0.0 || last.abs() < threshold * sd
        })
        .count();
    hits as f64 / trajectories.len() as f64
}

/// One row of the order-parameter trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OpPoint {
    pub epoch: usize,
    /// `||grad R||^2`.
    pub op: f64,
    /// `eta * op`.
    pub op_scaled: f64,
    pub risk: f64,
    pub accuracy: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::InitScheme;

    #[test]
    fn mirror_pair_sample_is_symmetric() {
        let mut samples = Vec::new();
        for _ in 0..100 {
            samples.push(-1.0);
            samples.push(1.0);
        }
        let rep = symmetry_report(&samples);
        assert_eq!(rep.sign_balance, 0.5);
        assert_eq!(rep.symmetry_divergence, 0.0);
        assert!(!rep.all_zero);
    }

    #[test]
    fn one_sided_sample_is_maximally_asymmetric() {
        let samples = vec![1.0; 200];
        let rep = symmetry_report(&samples);
        assert_eq!(rep.sign_balance, 1.0);
        assert!((rep.symmetry_divergence - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_sample_is_flagged() {
        let rep = symmetry_report(&vec![0.0; 150]);
        assert!(rep.all_zero);
        assert_eq!(rep.symmetry_divergence, 0.0);
    }

    #[test]
    fn he_init_weights_have_low_divergence() {
        let mut pool = Vec::new();
        let mut seed = 0;
        while pool.len() < 10_000 {
            let net = Network::<f64>::init(&[8, 8, 1], seed, InitScheme::GaussianHe).unwrap();
            pool.extend(net.to_flat().iter().map(|v| v.to_f64_lossy()));
            seed += 1;
        }
        let rep = symmetry_report(&pool);
        assert!(
            rep.symmetry_divergence < 0.05,
            "divergence {}",
            rep.symmetry_divergence
        );
        assert!(rep.sign_ci.0 <= 0.5 && 0.5 <= rep.sign_ci.1);
    }

    #[test]
    fn negation_closed_sample_has_zero_divergence() {
        let mut vals: Vec<f64> = (1..=500)
            .map(|i| (i as f64 * 0.013).sin() * i as f64)
            .collect();
        let negs: Vec<f64> = vals.iter().map(|v| -v).collect();
        vals.extend(negs);
        vals.push(0.0);
        vals.push(0.0);
        let rep = symmetry_report(&vals);
        assert_eq!(rep.symmetry_divergence, 0.0);
        assert_eq!(rep.sign_balance, 0.5);
    }

    #[test]
    fn order_parameter_hand_case() {
        // gradient (3, 2) -> OP = 13
        let net = Network::from_weights(&[1, 1, 1], vec![vec![2.0], vec![3.0]]).unwrap();
        let batch = [Example::new(vec![1.0], -1.0)];
        assert_eq!(order_parameter(&net, &batch).unwrap(), 13.0);
        // zero loss -> 0
        let inert = [Example::new(vec![1.0], 1.0)];
        assert_eq!(order_parameter(&net, &inert).unwrap(), 0.0);
    }

    fn desk_net_and_data() -> (Network<f64>, Vec<Example<f64>>) {
        let net = Network::<f64>::init(&[3, 6, 6, 1], 23, InitScheme::GaussianHe).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let data: Vec<Example<f64>> = (0..40)
            .map(|i| {
                Example::new(
                    (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    if i % 2 == 0 { 1.0 } else { -1.0 },
                )
            })
            .collect();
        (net, data)
    }

    #[test]
    fn bootstrap_entries_match_dense_hessian_on_full_sample_mean() {
        let (net, data) = desk_net_and_data();
        let tracked = select_tracked_entries(&net, 12, 7);
        let run = bootstrap_entry_stats(&net, &data, &tracked, 64, 5).unwrap();
        // The bootstrap mean estimates the full-batch entry; with 64
        // resamples it should sit within a few standard errors.
        let h = crate::spectral::dense_hessian(&net, &data).unwrap();
        for (t, s) in tracked.iter().zip(&run.stats) {
            let ri = net.flat_index(t.row.0, t.row.1, t.row.2).unwrap();
            let ci = net.flat_index(t.col.0, t.col.1, t.col.2).unwrap();
            let exact = h[ri][ci];
            let tol = 5.0 * s.std + 1e-12;
            assert!(
                (s.mean - exact).abs() <= tol,
                "entry {t:?}: bootstrap mean {} vs exact {exact}",
                s.mean
            );
        }
    }

    #[test]
    fn bootstrap_of_singleton_dataset_is_degenerate() {
        let (net, data) = desk_net_and_data();
        let tracked = select_tracked_entries(&net, 6, 3);
        let run = bootstrap_entry_stats(&net, &data[..1], &tracked, 32, 1).unwrap();
        for s in &run.stats {
            assert_eq!(s.std, 0.0);
            assert_eq!(s.normalized_mean, 0.0);
            assert!(s.degenerate);
        }
    }

    #[test]
    fn bootstrap_of_inert_dataset_is_zero() {
        let net = Network::from_weights(&[1, 1, 1], vec![vec![2.0], vec![3.0]]).unwrap();
        let data = vec![Example::new(vec![1.0], 1.0); 10];
        let tracked = vec![TrackedEntry {
            row: (1, 0, 0),
            col: (2, 0, 0),
        }];
        let run = bootstrap_entry_stats(&net, &data, &tracked, 30, 2).unwrap();
        assert_eq!(run.stats[0].mean, 0.0);
        assert_eq!(run.stats[0].std, 0.0);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let (net, data) = desk_net_and_data();
        let tracked = select_tracked_entries(&net, 5, 11);
        let a = bootstrap_entry_stats(&net, &data, &tracked, 32, 17).unwrap();
        let b = bootstrap_entry_stats(&net, &data, &tracked, 32, 17).unwrap();
        assert_eq!(a.table, b.table);
    }

    #[test]
    fn identical_series_are_coupled() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let table = vec![
            base.clone(),
            base.clone(),
            (0..40).map(|_| rng.random_range(-1.0..1.0)).collect(),
        ];
        let rep = coupling_report(&table, 200, 9).unwrap();
        assert_eq!(rep.cc[0][1], 1.0);
        assert!(rep.avg_coupling_size > 0.0);
    }

    #[test]
    fn independent_series_have_low_coupling() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let table: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..60).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let rep = coupling_report(&table, 100, 2).unwrap();
        assert!(
            rep.coupling_fraction < 0.02,
            "fraction {}",
            rep.coupling_fraction
        );
    }

    #[test]
    fn constant_series_is_flagged_and_zeroed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = vec![
            vec![2.5f64; 40],
            (0..40).map(|_| rng.random_range(-1.0..1.0)).collect(),
            (0..40).map(|_| rng.random_range(-1.0..1.0)).collect(),
        ];
        let rep = coupling_report(&table, 50, 3).unwrap();
        assert_eq!(rep.constant_entries, vec![0]);
        assert_eq!(rep.cc[0][1], 0.0);
        assert_eq!(rep.cc[0][0], 1.0);
    }

    #[test]
    fn concentration_fraction_hand_cases_and_monotonicity() {
        let mk = |nm: f64| EntryStats {
            entry: TrackedEntry {
                row: (1, 0, 0),
                col: (2, 0, 0),
            },
            mean: 0.0,
            std: 1.0,
            skewness: 0.0,
            excess_kurtosis: 0.0,
            normalized_mean: nm,
            degenerate: false,
        };
        let all_zero: Vec<EntryStats> = (0..10).map(|_| mk(0.0)).collect();
        assert_eq!(mean_concentration_fraction(&all_zero, 0.15), 1.0);
        let half: Vec<EntryStats> = (0..10).map(|i| mk(if i < 5 { 0.1 } else { 0.5 })).collect();
        assert_eq!(mean_concentration_fraction(&half, 0.15), 0.5);
        // nondecreasing in the threshold
        let mut prev = 0.0;
        for t in [0.05, 0.15, 0.3, 0.6, 1.0] {
            let f = mean_concentration_fraction(&half, t);
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn gradient_trace_flags_zero_loss_checkpoint() {
        let trace = gradient_symmetry_trace(&[
            (0, vec![0.5, -0.5, 0.2, -0.2]),
            (10, vec![0.0, 0.0, 0.0, 0.0]),
        ]);
        assert!(!trace[0].1.all_zero);
        assert!(trace[1].1.all_zero);
    }

    #[test]
    fn entry_means_match_dense_hessian() {
        let (net, data) = desk_net_and_data();
        let tracked = select_tracked_entries(&net, 10, 2);
        let means = entry_means(&net, &data, &tracked).unwrap();
        let h = crate::spectral::dense_hessian(&net, &data).unwrap();
        for (t, m) in tracked.iter().zip(&means) {
            let ri = net.flat_index(t.row.0, t.row.1, t.row.2).unwrap();
            let ci = net.flat_index(t.col.0, t.col.1, t.col.2).unwrap();
            assert!((m - h[ri][ci]).abs() < 1e-12, "{m} vs {}", h[ri][ci]);
        }
    }

    #[test]
    fn trajectory_concentration_cases() {
        // never moved: concentrated; decayed to tiny: concentrated;
        // ends at its own scale: not concentrated
        let trajs = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.5, 0.1, 0.001],
            vec![0.2, 0.5, 0.4, 0.6],
        ];
        let f = trajectory_concentration(&trajs, 0.15);
        assert!((f - 2.0 / 3.0).abs() < 1e-12, "fraction {f}");
        // monotone in the threshold
        assert!(trajectory_concentration(&trajs, 5.0) >= f);
    }
}

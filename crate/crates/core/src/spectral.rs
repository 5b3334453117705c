//! Hessian spectral analysis.
//!
//! Small parameter counts get the dense route: assemble the Hessian column
//! by column from Hessian-vector products and diagonalize it exactly (the
//! oracle). Larger operators get stochastic Lanczos quadrature: random unit
//! probes, a Lanczos recursion with full reorthogonalization, Ritz
//! values/weights from the tridiagonal matrix, and Gaussian smoothing of the
//! averaged Ritz measure onto a grid symmetric about zero.
//!
//! The symmetry score of a density is the total-variation distance between
//! the density and its mirror image; zero means perfectly symmetric.

use std::io::Write as IoWrite;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::nn::{Example, Network};
use crate::scalar::Real;

/// Default dense-Hessian size cap.
pub const DENSE_CAP: usize = 4000;

/// Grid resolution for smoothed densities.
pub const GRID_POINTS: usize = 2048;

/// A linear operator given by matrix-vector products.
pub trait LinOp<F: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[F]) -> Vec<F>;
}

/// The frozen-gate batch-risk Hessian as an operator.
pub struct HessianOp<'a, F: Real> {
    pub net: &'a Network<F>,
    pub batch: &'a [Example<F>],
}

impl<F: Real> LinOp<F> for HessianOp<'_, F> {
    fn dim(&self) -> usize {
        self.net.param_count()
    }

    fn apply(&self, v: &[F]) -> Vec<F> {
        self.net
            .hvp(self.batch, v)
            .expect("hvp on validated inputs")
    }
}

/// Dense matrix operator (row-major `Vec<Vec<F>>`).
pub struct DenseOp<'a, F: Real>(pub &'a [Vec<F>]);

impl<F: Real> LinOp<F> for DenseOp<'_, F> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, v: &[F]) -> Vec<F> {
        self.0
            .iter()
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// Diagonal operator, handy as a synthetic test case.
pub struct DiagOp<'a, F: Real>(pub &'a [F]);

impl<F: Real> LinOp<F> for DiagOp<'_, F> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, v: &[F]) -> Vec<F> {
        self.0.iter().zip(v).map(|(&d, &x)| d * x).collect()
    }
}

/// Probe distribution for stochastic Lanczos quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    /// Entries `+-1/sqrt(N)`; the default (lower variance for trace-like
    /// quantities).
    Rademacher,
    Gaussian,
}

/// Smoothed eigenvalue density on a grid symmetric about zero.
#[derive(Debug, Clone)]
pub struct SpectralDensity<F: Real> {
    /// Ascending grid, symmetric about zero: `grid[i] = -grid[n-1-i]`.
    pub grid: Vec<F>,
    /// Nonnegative density values; integrates to one by the trapezoid rule.
    pub density: Vec<F>,
    pub sigma: F,
    pub probes: usize,
    pub steps: usize,
}

/// Pooled Ritz pairs `(value, weight)` of a quadrature run; weights sum to
/// one up to breakdown truncation.
#[derive(Debug, Clone)]
pub struct RitzSummary<F: Real> {
    pub pairs: Vec<(F, F)>,
    pub probes: usize,
    pub steps: usize,
}

impl<F: Real> RitzSummary<F> {
    /// `k`-th spectral moment of the quadrature measure.
    pub fn moment(&self, k: u32) -> F {
        self.pairs.iter().map(|&(v, w)| w * v.powi(k as i32)).sum()
    }

    pub fn max_abs(&self) -> F {
        self.pairs
            .iter()
            .fold(F::zero(), |m, &(v, _)| m.max(v.abs()))
    }
}

/// Assembles the dense risk Hessian (size `N <= DENSE_CAP`) by applying
/// [`Network::hvp`] to basis vectors. The result is symmetric with zero
/// within-layer blocks and exactly zero trace.
pub fn dense_hessian<F: Real>(net: &Network<F>, batch: &[Example<F>]) -> Result<Vec<Vec<F>>> {
    dense_hessian_capped(net, batch, DENSE_CAP)
}

pub fn dense_hessian_capped<F: Real>(
    net: &Network<F>,
    batch: &[Example<F>],
    cap: usize,
) -> Result<Vec<Vec<F>>> {
    let n = net.param_count();
    if n > cap {
        return Err(Error::Config(format!(
            "parameter count {n} exceeds dense-Hessian cap {cap}"
        )));
    }
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![F::zero(); n];
    for j in 0..n {
        e[j] = F::one();
        cols.push(net.hvp(batch, &e)?);
        e[j] = F::zero();
    }
    // columns to rows; H is symmetric so this is mostly a transpose-copy
    let mut h = vec![vec![F::zero(); n]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            h[i][j] = col[i];
        }
    }
    Ok(h)
}

/// All eigenvalues of a dense symmetric matrix, ascending (oracle route).
pub fn exact_spectrum<F: Real>(h: &[Vec<F>]) -> Result<Vec<F>> {
    crate::eigen::symmetric_eigenvalues(h)
}

/// Stochastic Lanczos quadrature: runs `probes` independent Lanczos
/// recursions of `steps` iterations with full reorthogonalization and pools
/// the per-probe Ritz measures with equal probe weight.
///
/// A recursion that breaks down (`beta < 1e-12`) is truncated and its
/// accumulated Ritz pairs are kept.
pub fn lanczos_quadrature<F: Real>(
    op: &impl LinOp<F>,
    probes: usize,
    steps: usize,
    kind: ProbeKind,
    seed: u64,
) -> Result<RitzSummary<F>> {
    let n = op.dim();
    if probes < 1 {
        return Err(Error::Config("need at least one probe".into()));
    }
    if steps < 2 {
        return Err(Error::Config("need at least two Lanczos steps".into()));
    }
    if steps > n {
        return Err(Error::Config(format!(
            "steps {steps} exceeds operator dimension {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe_w = F::of(1.0 / probes as f64);
    let mut pairs = Vec::new();
    for _ in 0..probes {
        let v0 = draw_probe::<F>(&mut rng, n, kind);
        let (alphas, betas) = lanczos_recursion(op, v0, steps);
        let local = crate::eigen::tridiagonal_eigen_weights(&alphas, &betas)?;
        for (value, weight) in local {
            pairs.push((value, weight * probe_w));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(RitzSummary {
        pairs,
        probes,
        steps,
    })
}

fn draw_probe<F: Real>(rng: &mut ChaCha8Rng, n: usize, kind: ProbeKind) -> Vec<F> {
    let mut v: Vec<F> = match kind {
        ProbeKind::Rademacher => (0..n)
            .map(|_| {
                if rng.random::<bool>() {
                    F::one()
                } else {
                    -F::one()
                }
            })
            .collect(),
        ProbeKind::Gaussian => (0..n)
            .map(|_| {
                F::of(<StandardNormal as Distribution<f64>>::sample(
                    &StandardNormal,
                    rng,
                ))
            })
            .collect(),
    };
    let norm = v.iter().map(|&x| x * x).sum::<F>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Lanczos recursion with full one-pass reorthogonalization against all
/// stored basis vectors. Returns `(alphas, betas)` with
/// `betas.len() = alphas.len() - 1`.
fn lanczos_recursion<F: Real>(op: &impl LinOp<F>, v0: Vec<F>, steps: usize) -> (Vec<F>, Vec<F>) {
    let breakdown = F::of(1e-12);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps.saturating_sub(1));
    let mut basis: Vec<Vec<F>> = vec![v0];
    let mut beta_prev = F::zero();
    for j in 0..steps {
        let v = basis[j].clone();
        let mut w = op.apply(&v);
        let alpha: F = dot(&w, &v);
        for (wi, &vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        if j > 0 {
            let vp = &basis[j - 1];
            for (wi, &vi) in w.iter_mut().zip(vp) {
                *wi -= beta_prev * vi;
            }
        }
        for q in &basis {
            let c = dot(&w, q);
            for (wi, &qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        alphas.push(alpha);
        if j + 1 == steps {
            break;
        }
        let beta = w.iter().map(|&x| x * x).sum::<F>().sqrt();
        if beta < breakdown {
            break; // invariant subspace found; keep what we have
        }
        for x in &mut w {
            *x /= beta;
        }
        betas.push(beta);
        beta_prev = beta;
        basis.push(w);
    }
    (alphas, betas)
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Ascending grid of `points` values on `[-bound, bound]`, symmetric about
/// zero: `grid[i] = -grid[points-1-i]`.
pub fn symmetric_grid<F: Real>(bound: F, points: usize) -> Vec<F> {
    assert!(points >= 2);
    let b = bound.to_f64_lossy();
    let step = 2.0 * b / (points as f64 - 1.0);
    (0..points).map(|i| F::of(-b + step * i as f64)).collect()
}

/// Gaussian-smooths weighted spectral points onto a grid and normalizes to
/// unit trapezoid integral.
pub fn smooth_onto_grid<F: Real>(pairs: &[(F, F)], grid: &[F], sigma: F) -> Vec<F> {
    let inv = F::one() / (sigma * F::of((2.0 * std::f64::consts::PI).sqrt()));
    let half = F::of(0.5);
    let mut density: Vec<F> = grid
        .iter()
        .map(|&g| {
            let mut acc = F::zero();
            for &(v, w) in pairs {
                let z = (g - v) / sigma;
                acc += w * inv * (-half * z * z).exp();
            }
            acc
        })
        .collect();
    let total = trapezoid(grid, &density);
    if total > F::zero() {
        for d in &mut density {
            *d /= total;
        }
    }
    density
}

/// Trapezoid-rule integral of `values` over `grid`.
pub fn trapezoid<F: Real>(grid: &[F], values: &[F]) -> F {
    let half = F::of(0.5);
    let mut acc = F::zero();
    for i in 1..grid.len() {
        acc += half * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    acc
}

/// Builds a [`SpectralDensity`] from quadrature output. `sigma = None` picks
/// `(ritz_max - ritz_min) / 100` with a small floor.
pub fn density_from_ritz<F: Real>(
    ritz: &RitzSummary<F>,
    sigma: Option<F>,
    points: usize,
) -> SpectralDensity<F> {
    let (lo, hi) = ritz
        .pairs
        .iter()
        .fold((F::infinity(), -F::infinity()), |(lo, hi), &(v, _)| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    let sigma = sigma.unwrap_or_else(|| {
        let auto = range / F::of(100.0);
        auto.max(F::of(1e-3) * ritz.max_abs().max(F::one()))
    });
    let bound = ritz.max_abs() + F::of(4.0) * sigma;
    let grid = symmetric_grid(bound, points);
    let density = smooth_onto_grid(&ritz.pairs, &grid, sigma);
    SpectralDensity {
        grid,
        density,
        sigma,
        probes: ritz.probes,
        steps: ritz.steps,
    }
}

/// Stochastic Lanczos spectral density with Rademacher probes.
pub fn lanczos_density<F: Real>(
    op: &impl LinOp<F>,
    probes: usize,
    steps: usize,
    sigma: Option<F>,
    seed: u64,
) -> Result<SpectralDensity<F>> {
    let ritz = lanczos_quadrature(op, probes, steps, ProbeKind::Rademacher, seed)?;
    Ok(density_from_ritz(&ritz, sigma, GRID_POINTS))
}

/// Smoothed density of an explicit spectrum (each eigenvalue carries weight
/// `1/n`), on the same grid convention as [`lanczos_density`].
pub fn density_of_spectrum<F: Real>(
    eigenvalues: &[F],
    sigma: Option<F>,
    points: usize,
) -> SpectralDensity<F> {
    let w = F::of(1.0 / eigenvalues.len() as f64);
    let pairs: Vec<(F, F)> = eigenvalues.iter().map(|&v| (v, w)).collect();
    let ritz = RitzSummary {
        pairs,
        probes: 0,
        steps: 0,
    };
    density_from_ritz(&ritz, sigma, points)
}

/// Re-smooths spectral points onto the grid of an existing density so two
/// densities can be compared bin by bin.
pub fn density_on_grid<F: Real>(
    pairs: &[(F, F)],
    reference: &SpectralDensity<F>,
) -> SpectralDensity<F> {
    SpectralDensity {
        grid: reference.grid.clone(),
        density: smooth_onto_grid(pairs, &reference.grid, reference.sigma),
        sigma: reference.sigma,
        probes: 0,
        steps: 0,
    }
}

/// `L1` distance between two densities on the same grid.
pub fn l1_distance<F: Real>(a: &SpectralDensity<F>, b: &SpectralDensity<F>) -> F {
    assert_eq!(a.grid.len(), b.grid.len(), "densities on different grids");
    let diff: Vec<F> = a
        .density
        .iter()
        .zip(&b.density)
        .map(|(&x, &y)| (x - y).abs())
        .collect();
    trapezoid(&a.grid, &diff)
}

impl<F: Real> SpectralDensity<F> {
    /// `k`-th moment of the density by the trapezoid rule.
    pub fn moment(&self, k: u32) -> F {
        let weighted: Vec<F> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(&g, &d)| g.powi(k as i32) * d)
            .collect();
        trapezoid(&self.grid, &weighted)
    }

    fn check_symmetric_grid(&self) -> Result<()> {
        let n = self.grid.len();
        let tol = F::of(1e-9) * self.grid[n - 1].abs().max(F::one());
        for i in 0..n {
            if (self.grid[i] + self.grid[n - 1 - i]).abs() > tol {
                return Err(Error::AsymmetricGrid);
            }
        }
        Ok(())
    }
}

/// Total-variation distance between a density and its mirror image:
/// `0.5 * sum |rho(l) - rho(-l)| dl`, in `[0, 1]`. Zero for a perfectly
/// symmetric spectrum.
pub fn spectrum_symmetry_score<F: Real>(density: &SpectralDensity<F>) -> Result<F> {
    density.check_symmetric_grid()?;
    let n = density.grid.len();
    let step = density.grid[1] - density.grid[0];
    let half = F::of(0.5);
    let mut acc = F::zero();
    for i in 0..n {
        acc += (density.density[i] - density.density[n - 1 - i]).abs() * step;
    }
    Ok(acc * half)
}

/// Writes a density as CSV: `lambda,density` with 17 significant digits.
pub fn write_density_csv<F: Real, W: IoWrite>(w: &mut W, d: &SpectralDensity<F>) -> Result<()> {
    writeln!(w, "lambda,density")?;
    for (g, v) in d.grid.iter().zip(&d.density) {
        writeln!(w, "{:.16e},{:.16e}", g.to_f64_lossy(), v.to_f64_lossy())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::InitScheme;

    #[test]
    fn dense_hessian_hand_case() {
        let net = Network::from_weights(&[1, 1, 1], vec![vec![2.0], vec![3.0]]).unwrap();
        let batch = [Example::new(vec![1.0], -1.0)];
        let h = dense_hessian(&net, &batch).unwrap();
        assert_eq!(h, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let eig: Vec<f64> = exact_spectrum(&h).unwrap();
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_hessian_zero_on_inert_batch() {
        let net = Network::from_weights(&[1, 1, 1], vec![vec![2.0], vec![3.0]]).unwrap();
        let batch = [Example::new(vec![1.0], 1.0)];
        let h = dense_hessian(&net, &batch).unwrap();
        assert!(h.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn breakdown_truncates_and_keeps_ritz_pairs() {
        // rank-2 operator: the Krylov space is exhausted after three steps,
        // the recursion truncates, and the quadrature still reproduces the
        // low moments exactly.
        let mut d = vec![0.0f64; 40];
        d[0] = 2.0;
        d[1] = -2.0;
        let op = DiagOp(&d);
        let ritz = lanczos_quadrature(&op, 4, 20, ProbeKind::Rademacher, 9).unwrap();
        // weights still sum to one per probe
        let total: f64 = ritz.pairs.iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-10, "weight sum {total}");
        // second moment matches tr(D^2)/N = 8/40 (diagonal operator:
        // Rademacher probes have zero estimator variance)
        let m2 = ritz.moment(2);
        assert!((m2 - 0.2).abs() < 1e-10, "m2 {m2}");
    }

    #[test]
    fn dense_hessian_structure_on_random_net() {
        let net = Network::<f64>::init(&[2, 3, 1], 3, InitScheme::GaussianHe).unwrap();
        let batch = [
            Example::new(vec![0.9, -0.2], -1.0),
            Example::new(vec![-0.4, 0.7], 1.0),
        ];
        let h = dense_hessian(&net, &batch).unwrap();
        let n = h.len();
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                max_asym = max_asym.max((h[i][j] - h[j][i]).abs());
            }
        }
        assert!(max_asym < 1e-12, "asymmetry {max_asym}");
        let trace: f64 = (0..n).map(|i| h[i][i]).sum();
        assert!(trace.abs() < 1e-10, "trace {trace}");
        // within-layer blocks exactly zero: layer 1 covers flat indices 0..6
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h[i][j], 0.0);
            }
        }
        for i in 6..9 {
            for j in 6..9 {
                assert_eq!(h[i][j], 0.0);
            }
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let net = Network::<f64>::init(&[2, 3, 1], 3, InitScheme::GaussianHe).unwrap();
        let batch = [Example::new(vec![0.9, -0.2], -1.0)];
        assert!(dense_hessian_capped(&net, &batch, 4).is_err());
    }

    #[test]
    fn lanczos_recovers_three_point_spectrum() {
        // diag with eigenvalues {-1, 0, 1}, 100 each.
        let mut d = Vec::new();
        for _ in 0..100 {
            d.push(-1.0);
        }
        for _ in 0..100 {
            d.push(0.0);
        }
        for _ in 0..100 {
            d.push(1.0);
        }
        let op = DiagOp(&d);
        let ritz = lanczos_quadrature(&op, 8, 60, ProbeKind::Rademacher, 41).unwrap();
        let sigma = Some(0.05);
        let approx = density_from_ritz(&ritz, sigma, GRID_POINTS);
        let exact_pairs: Vec<(f64, f64)> = d.iter().map(|&v| (v, 1.0 / d.len() as f64)).collect();
        let exact = density_on_grid(&exact_pairs, &approx);
        let dist = l1_distance(&approx, &exact);
        assert!(dist < 0.05, "L1 distance {dist}");
    }

    #[test]
    fn zero_operator_is_a_single_gaussian_at_zero() {
        let d = vec![0.0f64; 50];
        let op = DiagOp(&d);
        let density = lanczos_density(&op, 4, 10, None, 7).unwrap();
        // peak at the center, symmetric
        let score = spectrum_symmetry_score(&density).unwrap();
        assert!(score < 1e-10, "score {score}");
        let n = density.grid.len();
        let mid = n / 2;
        assert!(density.density[mid] > density.density[0]);
        // integrates to one
        let total = trapezoid(&density.grid, &density.density);
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn l2_net_hessian_density_is_symmetric() {
        // Two-layer Hessian is block anti-diagonal: exact +- pairing.
        let net = Network::<f64>::init(&[4, 6, 1], 11, InitScheme::GaussianHe).unwrap();
        let batch: Vec<Example<f64>> = (0..8)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + i);
                Example::new(
                    (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    if i % 2 == 0 { 1.0 } else { -1.0 },
                )
            })
            .collect();
        let h = dense_hessian(&net, &batch).unwrap();
        let eig = exact_spectrum(&h).unwrap();
        let n = eig.len();
        for i in 0..n {
            assert!(
                (eig[i] + eig[n - 1 - i]).abs() < 1e-8,
                "pairing failure at {i}: {} vs {}",
                eig[i],
                eig[n - 1 - i]
            );
        }
        let density = density_of_spectrum(&eig, None, GRID_POINTS);
        let score = spectrum_symmetry_score(&density).unwrap();
        assert!(score < 1e-3, "score {score}");
    }

    #[test]
    fn symmetry_score_extremes() {
        // {-1, +1}: mirror-exact.
        let d = density_of_spectrum(&[-1.0, 1.0], Some(0.05), 512);
        assert!(spectrum_symmetry_score(&d).unwrap() < 1e-12);
        // all at +1 with small sigma: nearly maximal.
        let d = density_of_spectrum(&[1.0, 1.0], Some(0.01), 4096);
        let score = spectrum_symmetry_score(&d).unwrap();
        assert!(score > 0.99, "score {score}");
    }

    #[test]
    fn asymmetric_grid_rejected() {
        let d = SpectralDensity {
            grid: vec![0.0, 1.0, 2.0],
            density: vec![0.3, 0.3, 0.3],
            sigma: 0.1,
            probes: 1,
            steps: 2,
        };
        assert!(matches!(
            spectrum_symmetry_score(&d),
            Err(Error::AsymmetricGrid)
        ));
    }

    #[test]
    fn quadrature_parameter_validation() {
        let d = vec![1.0f64; 10];
        let op = DiagOp(&d);
        assert!(lanczos_quadrature(&op, 0, 5, ProbeKind::Rademacher, 0).is_err());
        assert!(lanczos_quadrature(&op, 1, 1, ProbeKind::Rademacher, 0).is_err());
        assert!(lanczos_quadrature(&op, 1, 11, ProbeKind::Rademacher, 0).is_err());
    }

    #[test]
    fn hvp_operator_matches_dense_route() {
        let net = Network::<f64>::init(&[3, 4, 1], 5, InitScheme::GaussianHe).unwrap();
        let batch = [
            Example::new(vec![0.4, 0.2, -0.7], -1.0),
            Example::new(vec![-0.8, 0.1, 0.3], 1.0),
        ];
        let h = dense_hessian(&net, &batch).unwrap();
        let op = HessianOp {
            net: &net,
            batch: &batch,
        };
        let n = op.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hv_op = op.apply(&v);
        let hv_dense = DenseOp(&h).apply(&v);
        for (a, b) in hv_op.iter().zip(&hv_dense) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_probes_also_work() {
        let d: Vec<f64> = (0..200).map(|i| (i as f64) / 100.0 - 1.0).collect();
        let op = DiagOp(&d);
        let ritz = lanczos_quadrature(&op, 8, 40, ProbeKind::Gaussian, 3).unwrap();
        let m2 = ritz.moment(2);
        let exact: f64 = d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64;
        assert!((m2 - exact).abs() / exact < 0.2, "m2 {m2} vs {exact}");
    }
}

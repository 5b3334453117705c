//! Finite-temperature gate sampling.
//!
//! Each neuronal gate is a two-state random variable with energies `{0, z/T}`
//! for its pre-activation `z`, so `P(h = 1) = 1 / (1 + exp(-z/T))`. Sampling
//! proceeds layer by layer conditioned on the realized gates of the previous
//! layers (ancestral sampling); the per-layer law factorizes over units
//! because the energy is additive in the gate bits given the previous layers.
//!
//! As `T -> 0` the sampler degenerates to the deterministic sign rule of
//! ReLU. The partition function is never needed; only the two-state ratio.
//!
//! Gate draws come from a counter-based stream keyed on
//! `(seed, sample, layer, unit)`, so individual gates are reproducible
//! independently of evaluation order.

use crate::error::{Error, Result};
use crate::nn::{GatePattern, Network};
use crate::scalar::Real;

/// Temperature, seed, and sample count for stochastic-gate experiments.
#[derive(Debug, Clone, Copy)]
pub struct TemperatureConfig {
    /// Temperature `T > 0`.
    pub t: f64,
    pub seed: u64,
    /// Sample count for aggregate statistics (`>= 1`).
    pub samples: usize,
}

impl TemperatureConfig {
    pub fn new(t: f64, seed: u64, samples: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Config(format!(
                "temperature must be positive, got {t}"
            )));
        }
        if samples < 1 {
            return Err(Error::Config("need at least one sample".into()));
        }
        Ok(Self { t, seed, samples })
    }
}

/// `P(h = 1) = sigmoid(z / T)`, evaluated stably; saturates to 0/1 in
/// floating point for large `|z| / T`.
pub fn gate_probability<F: Real>(z: F, t: F) -> F {
    let w = z / t;
    if w >= F::zero() {
        F::one() / (F::one() + (-w).exp())
    } else {
        let e = w.exp();
        e / (F::one() + e)
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` from the counter `(seed, sample, layer, unit)`.
#[inline]
pub fn counter_uniform(seed: u64, sample: u64, layer: u64, unit: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(sample ^ splitmix64(layer ^ splitmix64(unit))));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One stochastic forward pass (sample index 0). Deterministic given the
/// seed in `cfg`.
pub fn stochastic_forward<F: Real>(
    net: &Network<F>,
    x: &[F],
    cfg: &TemperatureConfig,
) -> Result<(F, GatePattern)> {
    stochastic_forward_indexed(net, x, cfg, 0)
}

/// Stochastic forward pass for a specific sample index of the counter
/// stream.
///
/// Gates are sampled per unit from [`gate_probability`] of the running
/// pre-activation and the gated values are propagated. The top layer's gate
/// is sampled and recorded, but the returned output is the top
/// pre-activation, exactly as in the deterministic forward pass.
pub fn stochastic_forward_indexed<F: Real>(
    net: &Network<F>,
    x: &[F],
    cfg: &TemperatureConfig,
    sample: u64,
) -> Result<(F, GatePattern)> {
    if x.len() != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: x.len(),
        });
    }
    let t = F::of(cfg.t);
    let depth = net.depth();
    let widths = net.widths();
    let mut layers = Vec::with_capacity(depth);
    let mut cur: Vec<F> = x.to_vec();
    for l in 1..=depth {
        let n_in = widths[l - 1];
        let n_out = widths[l];
        let w = net.layer(l);
        let mut z = vec![F::zero(); n_out];
        for a in 0..n_in {
            let xa = cur[a];
            if xa == F::zero() {
                continue;
            }
            let row = &w[a * n_out..(a + 1) * n_out];
            for (zb, &wab) in z.iter_mut().zip(row) {
                *zb += xa * wab;
            }
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: l });
        }
        let mut h = vec![0u8; n_out];
        for b in 0..n_out {
            let p = gate_probability(z[b], t);
            let u = counter_uniform(cfg.seed, sample, l as u64, b as u64);
            h[b] = u8::from(F::of(u) < p);
        }
        if l < depth {
            cur = z
                .iter()
                .zip(&h)
                .map(|(&v, &g)| if g == 1 { v } else { F::zero() })
                .collect();
        } else {
            cur = z;
        }
        layers.push(h);
    }
    Ok((cur[0], GatePattern { layers }))
}

/// Agreement between sampled gates and the deterministic gate pattern.
#[derive(Debug, Clone, Copy)]
pub struct AgreementReport {
    /// Fraction of compared gate bits that agree, in `[0, 1]`.
    pub agreement: f64,
    /// Gate bits compared across all samples.
    pub compared: usize,
    /// Bits excluded because the deterministic pre-activation is exactly
    /// zero (the sign rule is degenerate there).
    pub excluded: usize,
}

/// Samples `cfg.samples` stochastic passes and reports the fraction of gate
/// bits agreeing with the deterministic forward pattern.
///
/// Units whose deterministic pre-activation is exactly zero are reported and
/// excluded from the fraction.
pub fn degeneration_agreement<F: Real>(
    net: &Network<F>,
    x: &[F],
    cfg: &TemperatureConfig,
) -> Result<AgreementReport> {
    let trace = net.forward_trace(x)?;
    let mut degenerate = vec![Vec::new(); net.depth()];
    let mut excluded_per_sample = 0usize;
    for (l, pre) in trace.pre.iter().enumerate() {
        for (b, &z) in pre.iter().enumerate() {
            if z == F::zero() {
                degenerate[l].push(b);
                excluded_per_sample += 1;
            }
        }
    }
    let mut agree = 0usize;
    let mut compared = 0usize;
    for s in 0..cfg.samples {
        let (_, gates) = stochastic_forward_indexed(net, x, cfg, s as u64)?;
        for l in 0..net.depth() {
            let det = &trace.gates.layers[l];
            let sto = &gates.layers[l];
            for b in 0..det.len() {
                if degenerate[l].contains(&b) {
                    continue;
                }
                compared += 1;
                if det[b] == sto[b] {
                    agree += 1;
                }
            }
        }
    }
    Ok(AgreementReport {
        agreement: if compared == 0 {
            0.0
        } else {
            agree as f64 / compared as f64
        },
        compared,
        excluded: excluded_per_sample * cfg.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::InitScheme;
    use crate::stats::binomial_ci;
    use crate::Example;

    #[test]
    fn probability_half_at_zero() {
        for t in [0.01, 1.0, 100.0] {
            assert_eq!(gate_probability(0.0f64, t), 0.5);
        }
    }

    #[test]
    fn probability_saturates() {
        assert_eq!(gate_probability(1e6f64, 1.0), 1.0);
        assert_eq!(gate_probability(-1e6f64, 1.0), 0.0);
    }

    #[test]
    fn probability_closed_form() {
        // z = ln 3, T = 1: p = 3/4.
        let p = gate_probability(3.0f64.ln(), 1.0);
        assert!((p - 0.75).abs() < 1e-15);
    }

    #[test]
    fn degeneration_limit_matches_deterministic() {
        let net = crate::Network::from_weights(&[1, 1, 1], vec![vec![2.0], vec![3.0]]).unwrap();
        let cfg = TemperatureConfig::new(1e-9, 7, 1).unwrap();
        let (out, gates) = stochastic_forward(&net, &[1.0], &cfg).unwrap();
        assert_eq!(out, 6.0);
        let (dout, dgates) = net.forward(&[1.0]).unwrap();
        assert_eq!(out, dout);
        assert_eq!(gates.layers, dgates.layers);

        let report = degeneration_agreement(&net, &[1.0], &cfg).unwrap();
        assert_eq!(report.agreement, 1.0);
        assert_eq!(report.excluded, 0);
    }

    #[test]
    fn zero_preactivation_gate_frequency_is_half() {
        // Single unit with z = 0: empirical frequency within the binomial CI
        // around 1/2.
        let n = 10_000;
        let mut ones = 0usize;
        for s in 0..n {
            let u = counter_uniform(3, s as u64, 1, 0);
            if u < 0.5 {
                ones += 1;
            }
        }
        let (lo, hi) = binomial_ci(ones, n, 0.99);
        assert!(lo <= 0.5 && 0.5 <= hi, "freq {}", ones as f64 / n as f64);
    }

    #[test]
    fn marginal_frequency_matches_gate_probability() {
        // Net with a single weight dialed so z = ln 3 at x = 1, T = 1.
        let net =
            crate::Network::from_weights(&[1, 1, 1], vec![vec![3.0f64.ln()], vec![1.0]]).unwrap();
        let cfg = TemperatureConfig::new(1.0, 21, 10_000).unwrap();
        let mut ones = 0usize;
        for s in 0..cfg.samples {
            let (_, gates) = stochastic_forward_indexed(&net, &[1.0], &cfg, s as u64).unwrap();
            ones += gates.layers[0][0] as usize;
        }
        let (lo, hi) = binomial_ci(ones, cfg.samples, 0.99);
        assert!(
            lo <= 0.75 && 0.75 <= hi,
            "freq {}",
            ones as f64 / cfg.samples as f64
        );
    }

    #[test]
    fn agreement_monotone_in_inverse_temperature() {
        let net = crate::Network::<f64>::init(&[3, 4, 4, 1], 17, InitScheme::GaussianHe).unwrap();
        let x = Example::new(vec![0.6, -0.4, 0.8], 1.0).x;
        let mut last = -1.0f64;
        for (i, t) in [10.0, 1.0, 0.1, 0.01].into_iter().enumerate() {
            let cfg = TemperatureConfig::new(t, 5 + i as u64, 10_000).unwrap();
            let rep = degeneration_agreement(&net, &x, &cfg).unwrap();
            // Allow a one-sigma-ish Monte Carlo slack in the monotonicity.
            let slack = 1.5 / (rep.compared as f64).sqrt();
            assert!(
                rep.agreement >= last - slack,
                "agreement not nondecreasing: {} after {}",
                rep.agreement,
                last
            );
            last = rep.agreement;
        }
        assert!(last > 0.99, "cold limit agreement {last}");
    }

    #[test]
    fn hot_limit_agreement_is_coin_flipping() {
        // T -> infinity: every gate is an independent fair coin, so the
        // agreement with the deterministic pattern tends to 0.5 per bit.
        let net = crate::Network::<f64>::init(&[3, 6, 6, 1], 2, InitScheme::GaussianHe).unwrap();
        let cfg = TemperatureConfig::new(1e9, 77, 10_000).unwrap();
        let rep = degeneration_agreement(&net, &[0.4, -0.9, 0.7], &cfg).unwrap();
        let se = 0.5 / (rep.compared as f64).sqrt();
        assert!(
            (rep.agreement - 0.5).abs() < 4.0 * se,
            "hot-limit agreement {}",
            rep.agreement
        );
    }

    #[test]
    fn a_degeneration_threshold_exists_for_every_input() {
        // For any x with nonzero pre-activations there is a T* below which
        // the sampler agrees with the sign rule on every bit: any
        // temperature well below the smallest pre-activation magnitude
        // saturates the gate probabilities to exactly 0 or 1.
        for seed in [3u64, 14, 25] {
            let net =
                crate::Network::<f64>::init(&[3, 5, 5, 1], seed, InitScheme::GaussianHe).unwrap();
            let x = [0.8, -0.3, 0.55];
            let trace = net.forward_trace(&x).unwrap();
            let min_abs = trace
                .pre
                .iter()
                .flatten()
                .fold(f64::INFINITY, |m, z| m.min(z.abs()));
            if min_abs == 0.0 {
                continue; // fully dead layer; the invariant requires nonzero
            }
            let t_star = min_abs / 50.0;
            let cfg = TemperatureConfig::new(t_star / 2.0, 40 + seed, 1000).unwrap();
            let rep = degeneration_agreement(&net, &x, &cfg).unwrap();
            assert_eq!(rep.agreement, 1.0, "seed {seed}: T* {t_star}");
        }
    }

    #[test]
    fn sample_stream_is_deterministic() {
        let net = crate::Network::<f64>::init(&[2, 3, 1], 8, InitScheme::GaussianHe).unwrap();
        let cfg = TemperatureConfig::new(0.5, 123, 4).unwrap();
        let a = stochastic_forward_indexed(&net, &[0.2, -0.9], &cfg, 2).unwrap();
        let b = stochastic_forward_indexed(&net, &[0.2, -0.9], &cfg, 2).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.layers, b.1.layers);
    }

    #[test]
    fn degenerate_preactivations_are_excluded() {
        // W_1 = 0 forces z_1 = 0 exactly.
        let net = crate::Network::from_weights(&[1, 1, 1], vec![vec![0.0], vec![3.0]]).unwrap();
        let cfg = TemperatureConfig::new(1e-9, 1, 10).unwrap();
        let rep = degeneration_agreement(&net, &[1.0], &cfg).unwrap();
        // Layer 1 excluded; layer 2 (z = 0 as well, since the dead gate
        // zeroes everything) also excluded.
        assert_eq!(rep.compared, 0);
        assert_eq!(rep.excluded, 20);
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        assert!(TemperatureConfig::new(0.0, 0, 1).is_err());
        assert!(TemperatureConfig::new(-1.0, 0, 1).is_err());
        assert!(TemperatureConfig::new(1.0, 0, 0).is_err());
    }
}

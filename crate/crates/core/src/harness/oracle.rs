//! Seeded oracle suite: exact circuit/gradient/Hessian identities and gate
//! degeneration checks on tiny networks. The `oracle-check` CLI subcommand
//! runs this and exits nonzero on any failure; the acceptance suite runs the
//! same checks as its first three criteria.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits;
use crate::error::Result;
use crate::gates::{self, TemperatureConfig};
use crate::nn::{Example, InitScheme, Network};
use crate::spectral;
use crate::stats;

const SUM_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-9;
const HESS_TOL: f64 = 1e-8;
const ZERO_TOL: f64 = 1e-10;

/// Circuit-sum identity on 50 seeded random nets (depth 2-4, widths up to
/// 6): the enumerated circuit sum equals the forward output to relative
/// tolerance 1e-10.
pub fn check_circuit_sum() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1C0);
    let mut worst = 0.0f64;
    let mut pass = true;
    for case in 0..50u64 {
        let depth = 2 + (case % 3) as usize;
        let mut widths: Vec<usize> = Vec::with_capacity(depth + 1);
        widths.push(rng.random_range(2..=6));
        for _ in 1..depth {
            widths.push(rng.random_range(2..=6));
        }
        widths.push(1);
        let net = Network::<f64>::init(&widths, 1000 + case, InitScheme::GaussianHe)?;
        let x: Vec<f64> = (0..widths[0])
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let (fwd, _) = net.forward(&x)?;
        let sum = circuits::sum_all_circuits(&net, &x)?;
        let err = (sum - fwd).abs() / fwd.abs().max(sum.abs()).max(1e-12);
        worst = worst.max(err);
        if err > SUM_TOL {
            pass = false;
        }
    }
    Ok((
        pass,
        format!("worst relative error {worst:.3e} over 50 nets, tolerance {SUM_TOL:.0e}"),
    ))
}

/// Gradient and Hessian identities on a [2,3,3,1] net: every gradient
/// coordinate matches its constrained circuit sum (rel 1e-9), every
/// cross-layer Hessian coordinate matches the dense Hessian (rel 1e-8), and
/// the within-layer blocks and trace vanish (abs 1e-10).
pub fn check_assembly_identities() -> Result<(bool, String)> {
    let net = Network::<f64>::init(&[2, 3, 3, 1], 424242, InitScheme::GaussianHe)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let batch: Vec<Example<f64>> = (0..6)
        .map(|i| {
            Example::new(
                (0..2).map(|_| rng.random_range(-1.0..1.0)).collect(),
                if i % 2 == 0 { 1.0 } else { -1.0 },
            )
        })
        .collect();
    let mut pass = true;

    let grad = net.gradient(&batch)?;
    let gscale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-12);
    let mut worst_grad = 0.0f64;
    let mut coords = Vec::new();
    for l in 1..=net.depth() {
        for a in 0..net.widths()[l - 1] {
            for b in 0..net.widths()[l] {
                coords.push((l, a, b));
            }
        }
    }
    for &(l, a, b) in &coords {
        let idx = net.flat_index(l, a, b)?;
        let entry = circuits::assembly_gradient_entry(&net, &batch, l, a, b)?;
        let err = (entry - grad[idx]).abs();
        worst_grad = worst_grad.max(err / gscale);
        if err > GRAD_TOL * grad[idx].abs().max(entry.abs()).max(1e-3 * gscale) {
            pass = false;
        }
    }

    let h = spectral::dense_hessian(&net, &batch)?;
    let n = net.param_count();
    let hscale = h
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-12);
    let mut worst_hess = 0.0f64;
    for &ca in &coords {
        for &cb in &coords {
            if ca.0 == cb.0 {
                continue;
            }
            let entry = circuits::assembly_hessian_entry(&net, &batch, ca, cb)?;
            let i = net.flat_index(ca.0, ca.1, ca.2)?;
            let j = net.flat_index(cb.0, cb.1, cb.2)?;
            let err = (entry - h[i][j]).abs();
            worst_hess = worst_hess.max(err / hscale);
            if err > HESS_TOL * entry.abs().max(h[i][j].abs()).max(1e-3 * hscale) {
                pass = false;
            }
        }
    }
    let mut max_within = 0.0f64;
    for &(l, a, b) in &coords {
        for &(lp, c, d) in &coords {
            if l == lp {
                let i = net.flat_index(l, a, b)?;
                let j = net.flat_index(lp, c, d)?;
                max_within = max_within.max(h[i][j].abs());
            }
        }
    }
    let trace: f64 = (0..n).map(|i| h[i][i]).sum();
    if max_within > ZERO_TOL || trace.abs() > ZERO_TOL {
        pass = false;
    }
    Ok((
        pass,
        format!(
            "worst scaled errors: gradient {worst_grad:.3e}, Hessian {worst_hess:.3e}; max within-layer {max_within:.1e}, |trace| {:.1e}",
            trace.abs()
        ),
    ))
}

/// Gate degeneration at `T = 1e-9` on 20 random nets with nonzero
/// pre-activations (agreement exactly 1), plus marginal-law coverage: the
/// empirical gate frequency at 1e4 samples sits inside the exact binomial
/// 99% interval around `sigmoid(z/T)`.
pub fn check_degeneration() -> Result<(bool, String)> {
    let mut pass = true;
    let mut min_agree = 1.0f64;
    let mut checked = 0usize;
    let mut case = 0u64;
    while checked < 20 {
        case += 1;
        let net = Network::<f64>::init(&[3, 5, 5, 1], 9000 + case, InitScheme::GaussianHe)?;
        let mut xr = ChaCha8Rng::seed_from_u64(70 + case);
        let x: Vec<f64> = (0..3).map(|_| xr.random_range(-1.0..1.0)).collect();
        let trace = net.forward_trace(&x)?;
        // a fully dead layer zeroes everything downstream; the check wants
        // nonzero pre-activations, so draw another net
        if trace.pre.iter().flatten().any(|&z| z == 0.0) {
            continue;
        }
        checked += 1;
        let cfg = TemperatureConfig::new(1e-9, 300 + case, 50)?;
        let rep = gates::degeneration_agreement(&net, &x, &cfg)?;
        min_agree = min_agree.min(rep.agreement);
        if rep.agreement != 1.0 {
            pass = false;
        }
    }
    let mut marginal_ok = true;
    for (i, (z, t)) in [(0.3, 1.0), (-0.4, 0.7), (1.2, 2.0), (0.05, 0.1)]
        .into_iter()
        .enumerate()
    {
        let p = gates::gate_probability(z, t);
        let n = 10_000;
        let mut ones = 0usize;
        for s in 0..n {
            if gates::counter_uniform(555 + i as u64, s as u64, 1, 0) < p {
                ones += 1;
            }
        }
        let (lo, hi) = stats::binomial_ci(ones, n, 0.99);
        if !(lo <= p && p <= hi) {
            marginal_ok = false;
        }
    }
    pass &= marginal_ok;
    Ok((
        pass,
        format!(
            "agreement 1.0 on {checked}/20 nets (min {min_agree}); marginals inside exact 99% CI: {marginal_ok}"
        ),
    ))
}

/// Runs the oracle suite, writing one line per check. Returns `true` iff
/// every check passed.
pub fn oracle_check<W: Write>(out: &mut W) -> Result<bool> {
    let mut all = true;
    for (name, result) in [
        ("circuit-sum identity", check_circuit_sum()?),
        (
            "gradient/Hessian assembly identities",
            check_assembly_identities()?,
        ),
        ("gate degeneration and marginal law", check_degeneration()?),
    ] {
        let (pass, detail) = result;
        writeln!(
            out,
            "[{}] {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        )
        .ok();
        all &= pass;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_suite_passes() {
        let mut buf = Vec::new();
        let ok = oracle_check(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(ok, "oracle suite failed:\n{text}");
        assert_eq!(text.matches("[PASS]").count(), 3);
    }
}

//! Basis-circuit decomposition of the network output, gradient, and Hessian.
//!
//! A basis circuit is one multiplicative path through the network, indexed by
//! `(i_0, i_1, ..., i_L)`:
//!
//! ```text
//! psi_i = x[i_0] * prod_{l=1}^{L-1} W_l[i_{l-1}, i_l] h_l[i_l] * W_L[i_{L-1}, i_L]
//! ```
//!
//! Gates multiply on the intermediate layers only; the top layer output is a
//! pre-activation. The network output is the sum of all basis circuits, the
//! gradient entry at weight `(l, a, b)` is the sum over circuits through that
//! edge with `W_l` differentiated out (an order-1 perturbation circuit), and
//! the Hessian entry at a cross-layer pair of edges is the constrained sum
//! with both weights removed (order 2). The hinge loss is linear in the
//! output on its active branch, so perturbation circuits carry a single
//! `L'` factor and no second loss-derivative term appears.
//!
//! Exact enumeration is a desk-scale oracle and refuses above a configurable
//! circuit-count cap; uniform sampling covers everything larger.
//! Accumulation is pairwise in a fixed tree order.

use std::io::Write as IoWrite;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::hinge_deriv;
use crate::nn::{Example, GatePattern, Network};
use crate::scalar::{PairwiseAccumulator, Real};

/// Default exact-enumeration cap (total circuit count).
pub const DEFAULT_ENUM_CAP: u128 = 10_000_000;

/// A path `(i_0, ..., i_L)` through the network; unit indices are 0-based
/// and `i_L = 0` (single output).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitIndex(pub Vec<usize>);

impl CircuitIndex {
    fn validate<F: Real>(&self, net: &Network<F>) -> Result<()> {
        let widths = net.widths();
        if self.0.len() != widths.len() {
            return Err(Error::IndexOutOfRange(format!(
                "path length {} for {} index positions",
                self.0.len(),
                widths.len()
            )));
        }
        for (p, (&i, &n)) in self.0.iter().zip(widths).enumerate() {
            if i >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "i_{p} = {i} out of range [0, {n})"
                )));
            }
        }
        Ok(())
    }
}

/// A sampled circuit (or perturbation circuit) and its value. The value
/// includes the input factor `x[i_0]` and, for perturbation circuits, the
/// loss-derivative factor.
#[derive(Debug, Clone)]
pub struct CircuitValue<F: Real> {
    pub index: CircuitIndex,
    pub value: F,
    /// Layers differentiated out: empty for a basis circuit, `{l}` for order
    /// one, `{l, l'}` for order two. 1-based.
    pub removed_layers: Vec<usize>,
}

impl<F: Real> CircuitValue<F> {
    /// Perturbation order: the number of removed layers.
    pub fn order(&self) -> usize {
        self.removed_layers.len()
    }
}

/// Which circuits to sample: basis circuits, or perturbation circuits of
/// order one or two. `None` layer choices are drawn uniformly per sample.
#[derive(Debug, Clone, Copy)]
pub enum PerturbationSpec {
    Basis,
    FirstOrder(Option<usize>),
    SecondOrder(Option<(usize, usize)>),
}

/// Total number of basis circuits, `n_0 * prod_l n_l`.
pub fn circuit_count<F: Real>(net: &Network<F>) -> u128 {
    net.widths().iter().map(|&n| n as u128).product()
}

/// Value of one basis circuit given a recorded gate pattern.
pub fn circuit_value<F: Real>(
    net: &Network<F>,
    gates: &GatePattern,
    x: &[F],
    index: &CircuitIndex,
) -> Result<F> {
    index.validate(net)?;
    Ok(path_product(net, gates, x, &index.0, &[]))
}

/// Order-1 perturbation circuit: the basis-circuit product with `W_l`
/// removed and the loss derivative appended. All intermediate gates stay.
pub fn perturbation1_value<F: Real>(
    net: &Network<F>,
    gates: &GatePattern,
    x: &[F],
    index: &CircuitIndex,
    l: usize,
    loss_deriv: F,
) -> Result<F> {
    index.validate(net)?;
    check_layer(net, l)?;
    Ok(path_product(net, gates, x, &index.0, &[l]) * loss_deriv)
}

/// Order-2 perturbation circuit: both `W_l` and `W_lp` removed, times the
/// loss derivative. `l = lp` is rejected; the within-layer second derivative
/// is identically zero and must not be requested.
pub fn perturbation2_value<F: Real>(
    net: &Network<F>,
    gates: &GatePattern,
    x: &[F],
    index: &CircuitIndex,
    l: usize,
    lp: usize,
    loss_deriv: F,
) -> Result<F> {
    index.validate(net)?;
    check_layer(net, l)?;
    check_layer(net, lp)?;
    if l == lp {
        return Err(Error::WithinLayer { layer: l });
    }
    Ok(path_product(net, gates, x, &index.0, &[l, lp]) * loss_deriv)
}

/// `x[i_0] * prod of gates on layers 1..L-1 * prod of weights not removed`.
fn path_product<F: Real>(
    net: &Network<F>,
    gates: &GatePattern,
    x: &[F],
    path: &[usize],
    removed: &[usize],
) -> F {
    let depth = net.depth();
    let mut v = x[path[0]];
    for l in 1..=depth {
        if v == F::zero() {
            return F::zero();
        }
        if !removed.contains(&l) {
            v = v * net.weight(l, path[l - 1], path[l]);
        }
        if l < depth && gates.gate(l, path[l]) == 0 {
            return F::zero();
        }
    }
    v
}

fn check_layer<F: Real>(net: &Network<F>, l: usize) -> Result<()> {
    if l < 1 || l > net.depth() {
        return Err(Error::IndexOutOfRange(format!(
            "layer {l} out of range [1, {}]",
            net.depth()
        )));
    }
    Ok(())
}

/// Count of paths compatible with the slot constraints; zero when two
/// constraints on one slot conflict.
fn constrained_count(widths: &[usize], fixed: &[(usize, usize)]) -> u128 {
    let mut dims: Vec<u128> = widths.iter().map(|&n| n as u128).collect();
    let mut assigned: Vec<Option<usize>> = vec![None; widths.len()];
    for &(slot, val) in fixed {
        match assigned[slot] {
            Some(prev) if prev != val => return 0,
            _ => {
                assigned[slot] = Some(val);
                dims[slot] = 1;
            }
        }
    }
    dims.iter().product()
}

/// Enumerates all paths satisfying `fixed` slot constraints, in ascending
/// odometer order, invoking `f` with each full path.
fn for_each_path(widths: &[usize], fixed: &[(usize, usize)], mut f: impl FnMut(&[usize])) {
    let slots = widths.len();
    let mut path = vec![0usize; slots];
    let mut is_fixed = vec![false; slots];
    for &(slot, val) in fixed {
        if is_fixed[slot] && path[slot] != val {
            return; // conflicting constraints: empty enumeration
        }
        path[slot] = val;
        is_fixed[slot] = true;
    }
    let free: Vec<usize> = (0..slots).filter(|&s| !is_fixed[s]).collect();
    loop {
        f(&path);
        // advance the odometer over free slots, last slot fastest
        let mut pos = free.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            let s = free[pos];
            path[s] += 1;
            if path[s] < widths[s] {
                break;
            }
            path[s] = 0;
        }
    }
}

/// Sum of every basis circuit; equals the forward output exactly (up to
/// roundoff). Refuses when the circuit count exceeds [`DEFAULT_ENUM_CAP`].
pub fn sum_all_circuits<F: Real>(net: &Network<F>, x: &[F]) -> Result<F> {
    sum_all_circuits_capped(net, x, DEFAULT_ENUM_CAP)
}

/// [`sum_all_circuits`] with an explicit enumeration cap.
pub fn sum_all_circuits_capped<F: Real>(net: &Network<F>, x: &[F], cap: u128) -> Result<F> {
    let count = circuit_count(net);
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let (_, gates) = net.forward(x)?;
    let mut acc = PairwiseAccumulator::new();
    for_each_path(net.widths(), &[], |path| {
        acc.push(path_product(net, &gates, x, path, &[]));
    });
    Ok(acc.total())
}

/// Gradient entry `(l, a, b)` as a constrained circuit sum, averaged over
/// the batch. Equals the backprop gradient at that coordinate.
///
/// `l` is 1-based; `a`, `b` are 0-based unit indices.
pub fn assembly_gradient_entry<F: Real>(
    net: &Network<F>,
    batch: &[Example<F>],
    l: usize,
    a: usize,
    b: usize,
) -> Result<F> {
    assembly_gradient_entry_capped(net, batch, l, a, b, DEFAULT_ENUM_CAP)
}

pub fn assembly_gradient_entry_capped<F: Real>(
    net: &Network<F>,
    batch: &[Example<F>],
    l: usize,
    a: usize,
    b: usize,
    cap: u128,
) -> Result<F> {
    assert!(!batch.is_empty(), "assembly entry of an empty batch");
    check_layer(net, l)?;
    check_unit(net, l - 1, a)?;
    check_unit(net, l, b)?;
    let fixed = [(l - 1, a), (l, b)];
    let count = constrained_count(net.widths(), &fixed);
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let mut acc = PairwiseAccumulator::new();
    for ex in batch {
        let trace = net.forward_trace(&ex.x)?;
        let ld = hinge_deriv(trace.output, ex.y);
        if ld == F::zero() {
            continue;
        }
        for_each_path(net.widths(), &fixed, |path| {
            acc.push(path_product(net, &trace.gates, &ex.x, path, &[l]) * ld);
        });
    }
    Ok(acc.total() / F::of(batch.len() as f64))
}

/// Cross-layer Hessian entry `((l, a, b), (lp, c, d))` as a constrained
/// circuit sum, averaged over the batch. Equals the dense-Hessian entry.
///
/// Requesting `l = lp` is an error (the within-layer block is identically
/// zero). If the two fixed edges are path-incompatible the sum is empty and
/// the entry is zero.
pub fn assembly_hessian_entry<F: Real>(
    net: &Network<F>,
    batch: &[Example<F>],
    first: (usize, usize, usize),
    second: (usize, usize, usize),
) -> Result<F> {
    assembly_hessian_entry_capped(net, batch, first, second, DEFAULT_ENUM_CAP)
}

pub fn assembly_hessian_entry_capped<F: Real>(
    net: &Network<F>,
    batch: &[Example<F>],
    first: (usize, usize, usize),
    second: (usize, usize, usize),
    cap: u128,
) -> Result<F> {
    assert!(!batch.is_empty(), "assembly entry of an empty batch");
    let (l, a, b) = first;
    let (lp, c, d) = second;
    check_layer(net, l)?;
    check_layer(net, lp)?;
    if l == lp {
        return Err(Error::WithinLayer { layer: l });
    }
    check_unit(net, l - 1, a)?;
    check_unit(net, l, b)?;
    check_unit(net, lp - 1, c)?;
    check_unit(net, lp, d)?;
    let fixed = [(l - 1, a), (l, b), (lp - 1, c), (lp, d)];
    let count = constrained_count(net.widths(), &fixed);
    if count == 0 {
        return Ok(F::zero()); // path-incompatible edges: empty sum
    }
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let mut acc = PairwiseAccumulator::new();
    for ex in batch {
        let trace = net.forward_trace(&ex.x)?;
        let ld = hinge_deriv(trace.output, ex.y);
        if ld == F::zero() {
            continue;
        }
        for_each_path(net.widths(), &fixed, |path| {
            acc.push(path_product(net, &trace.gates, &ex.x, path, &[l, lp]) * ld);
        });
    }
    Ok(acc.total() / F::of(batch.len() as f64))
}

/// Plasticity order parameter through the circuit route: the sum over all
/// weight coordinates of the squared constrained circuit sums.
///
/// Matches [`crate::grad_norm_squared`] on every net under the cap; the two
/// are independent code paths.
pub fn order_parameter_circuit_form<F: Real>(net: &Network<F>, batch: &[Example<F>]) -> Result<F> {
    let mut acc = PairwiseAccumulator::new();
    for l in 1..=net.depth() {
        for a in 0..net.widths()[l - 1] {
            for b in 0..net.widths()[l] {
                let g = assembly_gradient_entry(net, batch, l, a, b)?;
                acc.push(g * g);
            }
        }
    }
    Ok(acc.total())
}

fn check_unit<F: Real>(net: &Network<F>, position: usize, unit: usize) -> Result<()> {
    let n = net.widths()[position];
    if unit >= n {
        return Err(Error::IndexOutOfRange(format!(
            "unit {unit} at index position {position} (width {n})"
        )));
    }
    Ok(())
}

/// Uniform i.i.d. circuit samples and their values for one example.
///
/// Paths are drawn uniformly over the full index set, dead paths included
/// (their value is zero). For perturbation orders the removed layers are
/// either fixed by `spec` or drawn uniformly per sample. Deterministic given
/// the seed.
pub fn sample_circuits<F: Real>(
    net: &Network<F>,
    x: &[F],
    y: F,
    count: usize,
    seed: u64,
    spec: PerturbationSpec,
) -> Result<Vec<CircuitValue<F>>> {
    assert!(count >= 1, "need at least one sample");
    match spec {
        PerturbationSpec::Basis => {}
        PerturbationSpec::FirstOrder(Some(l)) => check_layer(net, l)?,
        PerturbationSpec::FirstOrder(None) => {}
        PerturbationSpec::SecondOrder(fixed) => {
            if net.depth() < 2 {
                return Err(Error::Config(
                    "second-order circuits need at least two layers".into(),
                ));
            }
            if let Some((l, lp)) = fixed {
                check_layer(net, l)?;
                check_layer(net, lp)?;
                if l == lp {
                    return Err(Error::WithinLayer { layer: l });
                }
            }
        }
    }
    let trace = net.forward_trace(x)?;
    let ld = hinge_deriv(trace.output, y);
    let widths = net.widths();
    let depth = net.depth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut path = Vec::with_capacity(widths.len());
        for &n in widths.iter().take(widths.len() - 1) {
            path.push(rng.random_range(0..n));
        }
        path.push(0);
        let removed: Vec<usize> = match spec {
            PerturbationSpec::Basis => Vec::new(),
            PerturbationSpec::FirstOrder(fixed) => {
                vec![fixed.unwrap_or_else(|| rng.random_range(1..=depth))]
            }
            PerturbationSpec::SecondOrder(fixed) => {
                let (l, lp) = fixed.unwrap_or_else(|| {
                    let l = rng.random_range(1..depth);
                    let lp = rng.random_range(l + 1..=depth);
                    (l, lp)
                });
                vec![l, lp]
            }
        };
        let base = path_product(net, &trace.gates, x, &path, &removed);
        let value = if removed.is_empty() { base } else { base * ld };
        out.push(CircuitValue {
            index: CircuitIndex(path),
            value,
            removed_layers: removed,
        });
    }
    Ok(out)
}

/// Writes circuit samples as CSV: `order,removed_layers,i_0,...,i_L,value`.
/// Removed layers are joined with `|`; floats carry 17 significant digits.
pub fn write_circuits_csv<F: Real, W: IoWrite>(
    w: &mut W,
    samples: &[CircuitValue<F>],
    depth: usize,
) -> Result<()> {
    write!(w, "order,removed_layers")?;
    for p in 0..=depth {
        write!(w, ",i_{p}")?;
    }
    writeln!(w, ",value")?;
    for s in samples {
        let removed = s
            .removed_layers
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("|");
        write!(w, "{},{}", s.order(), removed)?;
        for &i in &s.index.0 {
            write!(w, ",{i}")?;
        }
        writeln!(w, ",{:.16e}", s.value.to_f64_lossy())?;
    }
    Ok(())
}

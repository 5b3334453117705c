//! Bias-free feedforward ReLU networks: forward pass with gate recording,
//! hinge risk, backprop gradient, and Hessian-vector products with frozen
//! gates.
//!
//! A network with layer widths `n_0, ..., n_L` (with `n_L = 1`) computes
//!
//! ```text
//! T(x) = x^T W_1 dg(h_1) W_2 dg(h_2) ... W_{L-1} dg(h_{L-1}) W_L
//! ```
//!
//! where `h_l = [z_l > 0]` are the ReLU gate patterns of the pre-activations
//! `z_l`. The output is the final pre-activation; no gate is applied on top.
//!
//! The gradient and the Hessian-vector product freeze both the gates and the
//! hinge active set at their forward values, so they are the almost-everywhere
//! derivatives of the batch risk. With frozen gates `T` is multilinear in the
//! per-layer weight matrices, which makes every within-layer Hessian block
//! identically zero and the Hessian trace exactly zero.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{hinge_deriv, hinge_loss};
use crate::scalar::Real;

/// Weight initialization scheme. Both draw i.i.d. from a distribution that is
/// symmetric about zero with variance `2 / fan_in`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Gaussian, `N(0, 2/fan_in)`.
    GaussianHe,
    /// Uniform on `[-sqrt(6/fan_in), +sqrt(6/fan_in)]` (same second moment).
    UniformSymmetric,
}

impl InitScheme {
    pub fn name(self) -> &'static str {
        match self {
            InitScheme::GaussianHe => "gaussian-he",
            InitScheme::UniformSymmetric => "uniform-symmetric",
        }
    }
}

/// A labelled example: features `x` of length `n_0`, label in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example<F: Real> {
    pub x: Vec<F>,
    pub y: F,
}

impl<F: Real> Example<F> {
    pub fn new(x: Vec<F>, y: F) -> Self {
        Self { x, y }
    }
}

/// Per-layer binary gate vectors recorded by a forward pass.
///
/// `gates[l-1]` holds `h_l` for layers `l = 1..=L`. The top layer's gate is
/// recorded (the sign of the output) but the output itself is the
/// pre-activation; nothing is gated at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatePattern {
    pub layers: Vec<Vec<u8>>,
}

impl GatePattern {
    /// Gate of unit `unit` (0-based) at layer `layer` (1-based).
    #[inline]
    pub fn gate(&self, layer: usize, unit: usize) -> u8 {
        self.layers[layer - 1][unit]
    }
}

/// Feedforward ReLU network without biases.
///
/// `weights[l-1]` is `W_l` stored row-major with shape `n_{l-1} x n_l`:
/// entry `(a, b)` sits at `a * n_l + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<F: Real> {
    widths: Vec<usize>,
    weights: Vec<Vec<F>>,
    seed: u64,
    scheme: InitScheme,
}

/// Full forward record of one example: pre-activations, gated activations,
/// gates, and the scalar output.
#[derive(Debug, Clone)]
pub struct ForwardTrace<F: Real> {
    /// `pre[l-1]` = pre-activation vector `z_l`, length `n_l`.
    pub pre: Vec<Vec<F>>,
    /// `act[l-1]` = gated activation `dg(h_l) z_l` (except the top layer,
    /// where the activation equals the pre-activation).
    pub act: Vec<Vec<F>>,
    pub gates: GatePattern,
    pub output: F,
}

impl<F: Real> Network<F> {
    /// Builds a network with the given widths, drawing weights from `scheme`.
    ///
    /// Deterministic for a given `(widths, seed, scheme)`.
    pub fn init(widths: &[usize], seed: u64, scheme: InitScheme) -> Result<Self> {
        validate_widths(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(widths.len() - 1);
        for l in 1..widths.len() {
            let fan_in = widths[l - 1];
            let n = fan_in * widths[l];
            let mut w = Vec::with_capacity(n);
            match scheme {
                InitScheme::GaussianHe => {
                    let dist =
                        Normal::new(0.0f64, (2.0 / fan_in as f64).sqrt()).expect("valid std dev");
                    for _ in 0..n {
                        w.push(F::of(dist.sample(&mut rng)));
                    }
                }
                InitScheme::UniformSymmetric => {
                    let bound = (6.0 / fan_in as f64).sqrt();
                    for _ in 0..n {
                        w.push(F::of(rng.random_range(-bound..bound)));
                    }
                }
            }
            weights.push(w);
        }
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            seed,
            scheme,
        })
    }

    /// Builds a network from explicit weight matrices (row-major per layer).
    pub fn from_weights(widths: &[usize], weights: Vec<Vec<F>>) -> Result<Self> {
        validate_widths(widths)?;
        if weights.len() != widths.len() - 1 {
            return Err(Error::Config(format!(
                "expected {} weight matrices, got {}",
                widths.len() - 1,
                weights.len()
            )));
        }
        for (l, w) in weights.iter().enumerate() {
            let want = widths[l] * widths[l + 1];
            if w.len() != want {
                return Err(Error::Dimension {
                    expected: want,
                    got: w.len(),
                });
            }
        }
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            seed: 0,
            scheme: InitScheme::GaussianHe,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    /// Number of layers `L` (weight matrices).
    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> InitScheme {
        self.scheme
    }

    /// Total parameter count `N = sum_l n_{l-1} n_l`.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    /// Weight `W_l[a, b]`, `l` 1-based, `a`/`b` 0-based.
    #[inline]
    pub fn weight(&self, layer: usize, a: usize, b: usize) -> F {
        self.weights[layer - 1][a * self.widths[layer] + b]
    }

    /// Row-major weight matrix of layer `l` (1-based).
    pub fn layer(&self, layer: usize) -> &[F] {
        &self.weights[layer - 1]
    }

    pub fn layer_mut(&mut self, layer: usize) -> &mut [F] {
        &mut self.weights[layer - 1]
    }

    /// Flattens all weights: layers ascending, row-major within a layer.
    pub fn to_flat(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.param_count());
        for w in &self.weights {
            out.extend_from_slice(w);
        }
        out
    }

    /// Inverse of [`Network::to_flat`].
    pub fn set_from_flat(&mut self, flat: &[F]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Dimension {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut off = 0;
        for w in &mut self.weights {
            let n = w.len();
            w.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }

    /// Flat index of weight `(l, a, b)`; `l` 1-based, `a`/`b` 0-based.
    pub fn flat_index(&self, layer: usize, a: usize, b: usize) -> Result<usize> {
        if layer < 1 || layer > self.depth() {
            return Err(Error::IndexOutOfRange(format!("layer {layer}")));
        }
        if a >= self.widths[layer - 1] || b >= self.widths[layer] {
            return Err(Error::IndexOutOfRange(format!(
                "weight ({layer}, {a}, {b})"
            )));
        }
        let mut off = 0;
        for l in 1..layer {
            off += self.widths[l - 1] * self.widths[l];
        }
        Ok(off + a * self.widths[layer] + b)
    }

    /// In-place gradient step `W -= eta * g`.
    pub fn step(&mut self, grad: &[F], eta: F) {
        debug_assert_eq!(grad.len(), self.param_count());
        let mut off = 0;
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v = *v - eta * grad[off];
                off += 1;
            }
        }
    }

    /// Full forward pass recording pre-activations, activations, and gates.
    ///
    /// Gates follow the strict-sign rule `h = [z > 0]`; a pre-activation of
    /// exactly zero yields gate 0.
    pub fn forward_trace(&self, x: &[F]) -> Result<ForwardTrace<F>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let depth = self.depth();
        let mut pre = Vec::with_capacity(depth);
        let mut act = Vec::with_capacity(depth);
        let mut gates = Vec::with_capacity(depth);

        let mut cur: &[F] = x;
        for l in 1..=depth {
            let n_in = self.widths[l - 1];
            let n_out = self.widths[l];
            let w = &self.weights[l - 1];
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
            let h: Vec<u8> = z.iter().map(|&v| u8::from(v > F::zero())).collect();
            let a_l: Vec<F> = if l < depth {
                z.iter()
                    .zip(&h)
                    .map(|(&v, &g)| if g == 1 { v } else { F::zero() })
                    .collect()
            } else {
                z.clone()
            };
            pre.push(z);
            gates.push(h);
            act.push(a_l);
            cur = act.last().unwrap();
        }
        let output = pre[depth - 1][0];
        Ok(ForwardTrace {
            pre,
            act,
            gates: GatePattern { layers: gates },
            output,
        })
    }

    /// Forward pass returning the scalar output and the gate pattern.
    pub fn forward(&self, x: &[F]) -> Result<(F, GatePattern)> {
        let t = self.forward_trace(x)?;
        Ok((t.output, t.gates))
    }

    /// Mean hinge-risk gradient over a batch, as a flat parameter vector.
    ///
    /// Backpropagation with gates frozen at their forward values; examples
    /// are reduced in ascending index order.
    pub fn gradient(&self, batch: &[Example<F>]) -> Result<Vec<F>> {
        assert!(!batch.is_empty(), "gradient of an empty batch");
        let mut grad = vec![F::zero(); self.param_count()];
        for ex in batch {
            self.accumulate_example_gradient(ex, &mut grad)?;
        }
        let scale = F::of(1.0 / batch.len() as f64);
        for g in &mut grad {
            *g *= scale;
        }
        Ok(grad)
    }

    fn accumulate_example_gradient(&self, ex: &Example<F>, grad: &mut [F]) -> Result<()> {
        let trace = self.forward_trace(&ex.x)?;
        let ld = hinge_deriv(trace.output, ex.y);
        if ld == F::zero() {
            return Ok(());
        }
        let depth = self.depth();
        // delta_l = dR/dz_l, starting from the scalar top layer.
        let mut delta = vec![ld];
        let mut off = self.param_count();
        for l in (1..=depth).rev() {
            let n_in = self.widths[l - 1];
            let n_out = self.widths[l];
            off -= n_in * n_out;
            let input: &[F] = if l == 1 { &ex.x } else { &trace.act[l - 2] };
            let block = &mut grad[off..off + n_in * n_out];
            for a in 0..n_in {
                let xa = input[a];
                if xa != F::zero() {
                    let row = &mut block[a * n_out..(a + 1) * n_out];
                    for (g, &d) in row.iter_mut().zip(&delta) {
                        *g += xa * d;
                    }
                }
            }
            if l > 1 {
                let w = &self.weights[l - 1];
                let h = &trace.gates.layers[l - 2];
                let mut prev = vec![F::zero(); n_in];
                for a in 0..n_in {
                    if h[a] == 1 {
                        let row = &w[a * n_out..(a + 1) * n_out];
                        let mut s = F::zero();
                        for (&wab, &d) in row.iter().zip(&delta) {
                            s += wab * d;
                        }
                        prev[a] = s;
                    }
                }
                delta = prev;
            }
        }
        Ok(())
    }

    /// Hessian-vector product `H v` of the mean batch risk.
    ///
    /// Gate patterns and hinge active indicators are frozen at their forward
    /// values (the almost-everywhere Hessian). Computed with a
    /// forward-over-reverse tangent sweep; exactly linear in `v`.
    pub fn hvp(&self, batch: &[Example<F>], v: &[F]) -> Result<Vec<F>> {
        assert!(!batch.is_empty(), "hvp of an empty batch");
        if v.len() != self.param_count() {
            return Err(Error::Dimension {
                expected: self.param_count(),
                got: v.len(),
            });
        }
        let mut out = vec![F::zero(); self.param_count()];
        for ex in batch {
            self.accumulate_example_hvp(ex, v, &mut out)?;
        }
        let scale = F::of(1.0 / batch.len() as f64);
        for g in &mut out {
            *g *= scale;
        }
        Ok(out)
    }

    fn accumulate_example_hvp(&self, ex: &Example<F>, v: &[F], out: &mut [F]) -> Result<()> {
        let trace = self.forward_trace(&ex.x)?;
        let ld = hinge_deriv(trace.output, ex.y);
        if ld == F::zero() {
            // Frozen active set: an inert example contributes nothing.
            return Ok(());
        }
        let depth = self.depth();

        // Layer offsets into the flat parameter vector.
        let mut offsets = Vec::with_capacity(depth);
        let mut off = 0;
        for l in 1..=depth {
            offsets.push(off);
            off += self.widths[l - 1] * self.widths[l];
        }

        // Tangent forward: xdot_l = dg(h_l) (W_l^T xdot_{l-1} + V_l^T x_{l-1}).
        let mut xdot: Vec<Vec<F>> = Vec::with_capacity(depth);
        let mut cur_dot = vec![F::zero(); self.input_dim()];
        for l in 1..=depth {
            let n_in = self.widths[l - 1];
            let n_out = self.widths[l];
            let w = &self.weights[l - 1];
            let vl = &v[offsets[l - 1]..offsets[l - 1] + n_in * n_out];
            let input: &[F] = if l == 1 { &ex.x } else { &trace.act[l - 2] };
            let mut zdot = vec![F::zero(); n_out];
            for a in 0..n_in {
                let xd = cur_dot[a];
                let xa = input[a];
                let wrow = &w[a * n_out..(a + 1) * n_out];
                let vrow = &vl[a * n_out..(a + 1) * n_out];
                for b in 0..n_out {
                    zdot[b] += xd * wrow[b] + xa * vrow[b];
                }
            }
            if l < depth {
                let h = &trace.gates.layers[l - 1];
                for (zd, &g) in zdot.iter_mut().zip(h) {
                    if g == 0 {
                        *zd = F::zero();
                    }
                }
            }
            xdot.push(zdot);
            cur_dot = xdot.last().unwrap().clone();
        }

        // Reverse sweep. The hinge is linear on its active branch, so
        // delta_L = L' and deltadot_L = 0.
        let mut delta = vec![ld];
        let mut deltadot = vec![F::zero()];
        for l in (1..=depth).rev() {
            let n_in = self.widths[l - 1];
            let n_out = self.widths[l];
            let input: &[F] = if l == 1 { &ex.x } else { &trace.act[l - 2] };
            let zeros;
            let input_dot: &[F] = if l == 1 {
                zeros = vec![F::zero(); n_in];
                &zeros
            } else {
                &xdot[l - 2]
            };
            // d(grad W_l) = xdot_{l-1} delta_l^T + x_{l-1} deltadot_l^T
            let block = &mut out[offsets[l - 1]..offsets[l - 1] + n_in * n_out];
            for a in 0..n_in {
                let xa = input[a];
                let xd = input_dot[a];
                let row = &mut block[a * n_out..(a + 1) * n_out];
                for b in 0..n_out {
                    row[b] += xd * delta[b] + xa * deltadot[b];
                }
            }
            if l > 1 {
                let w = &self.weights[l - 1];
                let vl = &v[offsets[l - 1]..offsets[l - 1] + n_in * n_out];
                let h = &trace.gates.layers[l - 2];
                let mut prev = vec![F::zero(); n_in];
                let mut prev_dot = vec![F::zero(); n_in];
                for a in 0..n_in {
                    if h[a] == 1 {
                        let wrow = &w[a * n_out..(a + 1) * n_out];
                        let vrow = &vl[a * n_out..(a + 1) * n_out];
                        let mut s = F::zero();
                        let mut sd = F::zero();
                        for b in 0..n_out {
                            s += wrow[b] * delta[b];
                            sd += vrow[b] * delta[b] + wrow[b] * deltadot[b];
                        }
                        prev[a] = s;
                        prev_dot[a] = sd;
                    }
                }
                delta = prev;
                deltadot = prev_dot;
            }
        }
        Ok(())
    }

    /// Writes a versioned binary checkpoint.
    ///
    /// Layout: magic `RNET`, u32 version, u8 scheme, u64 seed, u32 layer
    /// count `L+1`, u32 widths, then per layer the row-major weights as
    /// little-endian f64.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(b"RNET")?;
        f.write_all(&1u32.to_le_bytes())?;
        f.write_all(&[match self.scheme {
            InitScheme::GaussianHe => 0u8,
            InitScheme::UniformSymmetric => 1u8,
        }])?;
        f.write_all(&self.seed.to_le_bytes())?;
        f.write_all(&(self.widths.len() as u32).to_le_bytes())?;
        for &w in &self.widths {
            f.write_all(&(w as u32).to_le_bytes())?;
        }
        for layer in &self.weights {
            for &v in layer {
                f.write_all(&v.to_f64_lossy().to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a checkpoint written by [`Network::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::fs::File::open(path)?;
        let mut buf = Vec::new();
        f.read_to_end(&mut buf)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > buf.len() {
                return Err(Error::BadCheckpoint("truncated file".into()));
            }
            let s = &buf[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 4)? != b"RNET" {
            return Err(Error::BadCheckpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != 1 {
            return Err(Error::BadCheckpoint(format!(
                "unsupported version {version}"
            )));
        }
        let scheme = match take(&mut pos, 1)?[0] {
            0 => InitScheme::GaussianHe,
            1 => InitScheme::UniformSymmetric,
            s => return Err(Error::BadCheckpoint(format!("unknown scheme {s}"))),
        };
        let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let nw = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let mut widths = Vec::with_capacity(nw);
        for _ in 0..nw {
            widths.push(u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize);
        }
        validate_widths(&widths)?;
        let mut weights = Vec::with_capacity(nw - 1);
        for l in 1..nw {
            let n = widths[l - 1] * widths[l];
            let mut w = Vec::with_capacity(n);
            for _ in 0..n {
                let v = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
                w.push(F::of(v));
            }
            weights.push(w);
        }
        if pos != buf.len() {
            return Err(Error::BadCheckpoint("trailing bytes".into()));
        }
        Ok(Self {
            widths,
            weights,
            seed,
            scheme,
        })
    }
}

fn validate_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::Config(format!(
            "need at least input and output widths, got {widths:?}"
        )));
    }
    if widths.iter().any(|&n| n < 1) {
        return Err(Error::Config(format!("zero width in {widths:?}")));
    }
    if *widths.last().unwrap() != 1 {
        return Err(Error::Config(format!(
            "output width must be 1, got {widths:?}"
        )));
    }
    Ok(())
}

/// Mean hinge risk and sign accuracy over a dataset. An output of exactly
/// zero counts as incorrect.
pub fn evaluate<F: Real>(net: &Network<F>, data: &[Example<F>]) -> Result<(F, F)> {
    assert!(!data.is_empty(), "evaluate on an empty dataset");
    let mut risk = F::zero();
    let mut correct = 0usize;
    for ex in data {
        let (out, _) = net.forward(&ex.x)?;
        risk += hinge_loss(out, ex.y);
        let sign = if out > F::zero() {
            F::one()
        } else if out < F::zero() {
            -F::one()
        } else {
            F::zero()
        };
        if sign == ex.y {
            correct += 1;
        }
    }
    let m = F::of(data.len() as f64);
    Ok((risk / m, F::of(correct as f64) / m))
}

/// Squared 2-norm of the batch risk gradient (the plasticity order
/// parameter).
pub fn grad_norm_squared<F: Real>(net: &Network<F>, batch: &[Example<F>]) -> Result<F> {
    let g = net.gradient(batch)?;
    Ok(g.iter().map(|&v| v * v).sum())
}

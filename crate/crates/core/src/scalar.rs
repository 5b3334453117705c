//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is generic over [`Real`], a thin bundle of
//! `num-traits` bounds satisfied by `f32` and `f64`. Concrete aliases for the
//! common types live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the numeric core.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or intermediate.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts into every Real")
    }

    /// Conversion to `f64` for I/O and reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("every Real converts into f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Sums a slice pairwise in a fixed tree order.
///
/// Deterministic for a given input and considerably more accurate than a
/// left-to-right fold when the terms cancel, which circuit sums do heavily.
pub fn pairwise_sum<F: Real>(values: &[F]) -> F {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = F::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Streaming pairwise accumulator for sums too large to materialize.
///
/// Values are buffered in blocks; block partial sums are themselves reduced
/// pairwise. The reduction tree depends only on the number of pushed values,
/// so results are deterministic for a fixed evaluation order.
pub struct PairwiseAccumulator<F: Real> {
    block: Vec<F>,
    partials: Vec<F>,
}

impl<F: Real> Default for PairwiseAccumulator<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> PairwiseAccumulator<F> {
    const BLOCK: usize = 4096;

    pub fn new() -> Self {
        Self {
            block: Vec::with_capacity(Self::BLOCK),
            partials: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, v: F) {
        self.block.push(v);
        if self.block.len() == Self::BLOCK {
            let s = pairwise_sum(&self.block);
            self.block.clear();
            self.partials.push(s);
        }
    }

    pub fn total(mut self) -> F {
        if !self.block.is_empty() {
            let s = pairwise_sum(&self.block);
            self.partials.push(s);
        }
        pairwise_sum(&self.partials)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..97).map(|i| (i as f64) * 0.25 - 12.0).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn accumulator_matches_pairwise() {
        let xs: Vec<f64> = (0..10_000)
            .map(|i| ((i * 2654435761_usize) % 1000) as f64 - 499.5)
            .collect();
        let mut acc = PairwiseAccumulator::new();
        for &x in &xs {
            acc.push(x);
        }
        let direct = pairwise_sum(&xs);
        assert!((acc.total() - direct).abs() < 1e-9);
    }

    #[test]
    fn generic_over_f32() {
        let xs: Vec<f32> = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(pairwise_sum(&xs), 10.0);
    }
}

//! Margin losses for binary classification.
//!
//! The crate trains against the hinge loss `max(0, 1 - y*t)`. Other margin
//! losses can be added behind [`MarginLoss`], but everything downstream
//! (circuit perturbations in particular) assumes a loss that is piecewise
//! linear in the network output, so that the risk Hessian carries no
//! `(dT)(dT)^T` outer-product term.

use crate::scalar::Real;

/// A loss on (network output, label in {-1, +1}).
pub trait MarginLoss<F: Real> {
    fn loss(&self, output: F, label: F) -> F;
    /// Derivative with respect to the output.
    fn deriv(&self, output: F, label: F) -> F;
}

/// Hinge loss `max(0, 1 - y*t)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hinge;

impl<F: Real> MarginLoss<F> for Hinge {
    #[inline]
    fn loss(&self, output: F, label: F) -> F {
        hinge_loss(output, label)
    }

    #[inline]
    fn deriv(&self, output: F, label: F) -> F {
        hinge_deriv(output, label)
    }
}

/// `max(0, 1 - y*t)`.
#[inline]
pub fn hinge_loss<F: Real>(output: F, label: F) -> F {
    let margin = F::one() - label * output;
    if margin > F::zero() {
        margin
    } else {
        F::zero()
    }
}

/// Subgradient of the hinge with respect to the output.
///
/// `-y` while the margin is strictly violated, `0` otherwise. The kink at
/// `1 - y*t = 0` maps to `0`, so examples sitting exactly on the margin are
/// inert.
#[inline]
pub fn hinge_deriv<F: Real>(output: F, label: F) -> F {
    let margin = F::one() - label * output;
    if margin > F::zero() {
        -label
    } else {
        F::zero()
    }
}

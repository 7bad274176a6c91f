//! Numerical checks of the order conditions on denominator and perturbation
//! functions, including the baseline schemes' conditions that break down
//! wherever a right-hand side component vanishes.

use crate::denominator::{DenominatorFunction, PerturbationFunction};
use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::system::{directional_derivative, DecomposedSystem, DEFAULT_FD_STEP};

/// Base step of the 5-point stencils in `Δt`.
pub const STENCIL_STEP: f64 = 1e-3;

/// Step of the one-sided `κ` quotient.
pub const KAPPA_STEP: f64 = 1e-6;

/// `∂²φ/∂Δt²(0)` by the 5-point central stencil.
pub fn denominator_curvature<T: Real>(phi: &DenominatorFunction<T>, t: T, y: &[T], g: T) -> T {
    let h = T::lit(STENCIL_STEP);
    let two = T::lit(2.0);
    let e = |dt: T| phi.eval(dt, t, y, g);
    (-e(two * h) + T::lit(16.0) * e(h) - T::lit(30.0) * e(T::zero()) + T::lit(16.0) * e(-h) - e(-two * h))
        / (T::lit(12.0) * h * h)
}

/// `∂φ/∂Δt(0)` by the 5-point central stencil.
pub fn denominator_slope<T: Real>(phi: &DenominatorFunction<T>, t: T, y: &[T], g: T) -> T {
    let h = T::lit(STENCIL_STEP);
    let two = T::lit(2.0);
    let e = |dt: T| phi.eval(dt, t, y, g);
    (-e(two * h) + T::lit(8.0) * e(h) - T::lit(8.0) * e(-h) + e(-two * h)) / (T::lit(12.0) * h)
}

/// `|φ''(0) - 2g|`; certified when below [`order2_tolerance`].
pub fn check_order2_denominator<T: Real>(phi: &DenominatorFunction<T>, t: T, y: &[T], g: T) -> T {
    (denominator_curvature(phi, t, y, g) - T::lit(2.0) * g).abs()
}

pub fn order2_tolerance<T: Real>(g: T) -> T {
    T::lit(1e-5) * T::one().max(T::lit(2.0) * g)
}

/// Relative deviation of `(φ(h) - φ(0)) / h` from `κ`.
pub fn check_kappa<T: Real>(varphi: &PerturbationFunction<T>) -> T {
    let h = T::lit(KAPPA_STEP);
    let k = varphi.kappa();
    ((varphi.eval(h) - varphi.eval(T::zero())) / h - k).abs() / k
}

/// Which baseline scheme's order condition to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineScheme {
    Nsfd1,
    Nsfd2,
    Nsfd3,
}

/// Componentwise residual of the baseline second-order condition at `(t, y)`.
///
/// The right-hand sides are evaluated in their printed forms: NSFD1 and NSFD3
/// compare against `2αg + v/F` (α = 1 for NSFD1), NSFD3 on the first
/// derivative of `φ`; NSFD2 uses `v/F` when `F ≥ 0` and
/// `2F/y² - v/(F y²)` otherwise. `alpha` is only read for NSFD3.
///
/// Fails with [`NsfdError::ConditionUndefined`] when some `F_i` vanishes.
pub fn check_lemma_conditions<T: Real>(
    scheme: BaselineScheme,
    phi: &[DenominatorFunction<T>],
    system: &DecomposedSystem<T>,
    alpha: &[T],
    t: T,
    y: &[T],
) -> Result<Vec<T>> {
    let n = system.dim();
    if phi.len() != n {
        return Err(NsfdError::DimensionMismatch {
            expected: n,
            got: phi.len(),
        });
    }
    if scheme == BaselineScheme::Nsfd3 && alpha.len() != n {
        return Err(NsfdError::DimensionMismatch {
            expected: n,
            got: alpha.len(),
        });
    }
    let (f, g) = system.f_g(t, y);
    let rhs: Vec<T> = (0..n).map(|i| f[i] - y[i] * g[i]).collect();
    for i in 0..n {
        let scale = f[i].abs() + (y[i] * g[i]).abs();
        if rhs[i].abs() <= T::epsilon() * scale || rhs[i] == T::zero() {
            return Err(NsfdError::ConditionUndefined { component: i });
        }
    }
    let v = directional_derivative(system, t, y, T::lit(DEFAULT_FD_STEP))?;
    let two = T::lit(2.0);

    let residual = (0..n)
        .map(|i| {
            let ratio = v[i] / rhs[i];
            match scheme {
                BaselineScheme::Nsfd1 => {
                    (denominator_curvature(&phi[i], t, y, g[i]) - (two * g[i] + ratio)).abs()
                }
                BaselineScheme::Nsfd2 => {
                    let target = if rhs[i] >= T::zero() {
                        ratio
                    } else {
                        let y2 = y[i] * y[i];
                        two * rhs[i] / y2 - v[i] / (rhs[i] * y2)
                    };
                    (denominator_curvature(&phi[i], t, y, g[i]) - target).abs()
                }
                BaselineScheme::Nsfd3 => {
                    (denominator_slope(&phi[i], t, y, g[i]) - (two * alpha[i] * g[i] + ratio)).abs()
                }
            }
        })
        .collect();
    Ok(residual)
}

//! Denominator functions `φ(Δt, t, y)`, perturbation weights `φ(Δt)` and the
//! per-component configuration of the second-order positive scheme.

use std::fmt;
use std::sync::Arc;

use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::system::{splitting_from_v, DecomposedSystem, SplitRule, Splitting};

/// Coefficient function `γ(t, y)`.
pub type CoefFn<T> = Arc<dyn Fn(T, &[T]) -> T + Send + Sync>;

/// User-supplied denominator `(Δt, t, y, g_i) -> φ`.
pub type CustomDenominator<T> = Arc<dyn Fn(T, T, &[T], T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Coefficient<T: Real> {
    Const(T),
    Fn(CoefFn<T>),
}

impl<T: Real> Coefficient<T> {
    #[inline]
    pub fn eval(&self, t: T, y: &[T]) -> T {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Fn(f) => f(t, y),
        }
    }
}

impl<T: Real> fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(c) => write!(f, "Const({c})"),
            Coefficient::Fn(_) => f.write_str("Fn(..)"),
        }
    }
}

/// Positive replacement for `Δt` in the difference quotient.
///
/// All built-in kinds satisfy `φ = Δt + O(Δt²)`. Quadratic, Exponential and
/// BoundedRational also satisfy `∂²φ/∂Δt²(0) = 2 g_i`, the curvature the
/// second-order scheme needs.
#[derive(Clone)]
pub enum DenominatorFunction<T: Real> {
    /// `Δt`.
    Linear,
    /// `g Δt² + Δt`.
    Quadratic,
    /// `(e^{2gΔt} - 1) / (2g)`, and `Δt` when `g = 0`.
    Exponential,
    /// `γ₃(Δt + gΔt²) / (γ₃ + γ₄Δtᵐ)` with `m > 2`; bounded as `Δt → ∞`.
    BoundedRational {
        m: T,
        gamma3: Coefficient<T>,
        gamma4: Coefficient<T>,
    },
    Custom(CustomDenominator<T>),
}

impl<T: Real> fmt::Debug for DenominatorFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => f.write_str("Linear"),
            Self::Quadratic => f.write_str("Quadratic"),
            Self::Exponential => f.write_str("Exponential"),
            Self::BoundedRational { m, gamma3, gamma4 } => f
                .debug_struct("BoundedRational")
                .field("m", m)
                .field("gamma3", gamma3)
                .field("gamma4", gamma4)
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Real> DenominatorFunction<T> {
    /// `(Δt + gΔt²) / (1 + Δt³)`.
    pub fn bounded() -> Self {
        Self::bounded_with(T::lit(3.0), T::one(), T::one())
            .expect("default bounded denominator is valid")
    }

    pub fn bounded_with(m: T, gamma3: T, gamma4: T) -> Result<Self> {
        if !(m > T::lit(2.0)) {
            return Err(NsfdError::ParamOutOfRange(format!(
                "bounded denominator needs m > 2, got {m}"
            )));
        }
        if !(gamma3 > T::zero() && gamma4 > T::zero()) {
            return Err(NsfdError::ParamOutOfRange(
                "bounded denominator coefficients must be positive".into(),
            ));
        }
        Ok(Self::BoundedRational {
            m,
            gamma3: Coefficient::Const(gamma3),
            gamma4: Coefficient::Const(gamma4),
        })
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(T, T, &[T], T) -> T + Send + Sync + 'static,
    {
        Self::Custom(Arc::new(f))
    }

    /// Evaluates `φ(Δt, t, y)` given the loss rate `g_i(t, y)`.
    ///
    /// Negative `Δt` is accepted so central-difference diagnostics can probe
    /// the analytic continuation around zero.
    pub fn eval(&self, dt: T, t: T, y: &[T], g: T) -> T {
        let two = T::lit(2.0);
        match self {
            Self::Linear => dt,
            Self::Quadratic => g * dt * dt + dt,
            Self::Exponential => {
                if g == T::zero() {
                    dt
                } else {
                    (two * g * dt).exp_m1() / (two * g)
                }
            }
            Self::BoundedRational { m, gamma3, gamma4 } => {
                let g3 = gamma3.eval(t, y);
                let g4 = gamma4.eval(t, y);
                g3 * (dt + g * dt * dt) / (g3 + g4 * pow_odd(dt, *m))
            }
            Self::Custom(f) => f(dt, t, y, g),
        }
    }
}

/// `Δtᵐ` for integer `m`, else the odd extension `sign(Δt)|Δt|ᵐ`.
fn pow_odd<T: Real>(dt: T, m: T) -> T {
    if m.fract() == T::zero() {
        if let Some(k) = m.to_i32() {
            return dt.powi(k);
        }
    }
    dt.signum() * dt.abs().powf(m)
}

/// Weight `φ(Δt)` of the correction term; `κ = φ'(0) > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PerturbationFunction<T: Real> {
    /// `Δt`, `κ = 1`.
    Identity,
    /// `1 - e^{-τΔt}`, `κ = τ`.
    ExpSaturating(T),
}

impl<T: Real> PerturbationFunction<T> {
    pub fn exp_saturating(tau: T) -> Result<Self> {
        if tau > T::zero() && tau.is_finite() {
            Ok(Self::ExpSaturating(tau))
        } else {
            Err(NsfdError::ParamOutOfRange(format!("tau must be > 0, got {tau}")))
        }
    }

    #[inline]
    pub fn eval(&self, dt: T) -> T {
        match *self {
            Self::Identity => dt,
            Self::ExpSaturating(tau) => -(-tau * dt).exp_m1(),
        }
    }

    pub fn kappa(&self) -> T {
        match *self {
            Self::Identity => T::one(),
            Self::ExpSaturating(tau) => tau,
        }
    }
}

/// Everything the second-order positive stepper needs besides the system.
#[derive(Clone, Debug)]
pub struct SchemeConfig<T: Real> {
    pub phi: Vec<DenominatorFunction<T>>,
    pub varphi: Vec<PerturbationFunction<T>>,
    pub split: Splitting<T>,
}

impl<T: Real> SchemeConfig<T> {
    /// Validates dimensions and that the splitting was scaled with the same
    /// `κ` the perturbation functions carry.
    pub fn new(
        phi: Vec<DenominatorFunction<T>>,
        varphi: Vec<PerturbationFunction<T>>,
        split: Splitting<T>,
    ) -> Result<Self> {
        let n = phi.len();
        for got in [varphi.len(), split.dim()] {
            if got != n {
                return Err(NsfdError::DimensionMismatch { expected: n, got });
            }
        }
        for (i, (p, &k)) in varphi.iter().zip(&split.kappa).enumerate() {
            let kp = p.kappa();
            if (kp - k).abs() > T::lit(1e-12) * kp.abs().max(T::one()) {
                return Err(NsfdError::ParamOutOfRange(format!(
                    "component {i}: splitting kappa {k} differs from perturbation kappa {kp}"
                )));
            }
        }
        Ok(SchemeConfig { phi, varphi, split })
    }

    /// Uniform `φ` and `φ` across components, with `(A, B)` split from the
    /// system's directional derivative.
    pub fn uniform(
        system: &DecomposedSystem<T>,
        phi: DenominatorFunction<T>,
        varphi: PerturbationFunction<T>,
        rule: SplitRule,
    ) -> Result<Self> {
        let n = system.dim();
        let split = splitting_from_v(system, vec![varphi.kappa(); n], rule)?;
        Self::new(vec![phi; n], vec![varphi; n], split)
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let y = [1.0f64];
        assert_eq!(DenominatorFunction::Linear.eval(0.3, 0.0, &y, 5.0), 0.3);
        assert!((DenominatorFunction::Quadratic.eval(0.5, 0.0, &y, 3.0) - 1.25).abs() < 1e-15);
        let e = DenominatorFunction::Exponential.eval(0.1, 0.0, &y, 1.0);
        assert!((e - ((0.2f64).exp() - 1.0) / 2.0).abs() < 1e-15);
        assert_eq!(DenominatorFunction::Exponential.eval(0.1, 0.0, &y, 0.0), 0.1);
        let b = DenominatorFunction::<f64>::bounded().eval(2.0, 0.0, &y, 0.5);
        assert!((b - (2.0 + 0.5 * 4.0) / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bounded_stays_bounded() {
        let phi = DenominatorFunction::<f64>::bounded();
        let big = phi.eval(1e6, 0.0, &[1.0], 2.0);
        assert!(big < 1e-5 && big > 0.0);
    }

    #[test]
    fn bounded_rejects_small_exponent() {
        assert!(DenominatorFunction::<f64>::bounded_with(2.0, 1.0, 1.0).is_err());
        assert!(DenominatorFunction::<f64>::bounded_with(3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn fractional_exponent_is_odd() {
        let phi = DenominatorFunction::<f64>::bounded_with(2.5, 1.0, 1.0).unwrap();
        let p = phi.eval(1e-2, 0.0, &[1.0], 0.0);
        let m = phi.eval(-1e-2, 0.0, &[1.0], 0.0);
        assert!(p.is_finite() && m.is_finite());
    }

    #[test]
    fn perturbations() {
        let id = PerturbationFunction::<f64>::Identity;
        assert_eq!((id.eval(0.2), id.kappa()), (0.2, 1.0));
        let ex = PerturbationFunction::exp_saturating(5.0).unwrap();
        assert_eq!(ex.eval(0.0), 0.0);
        assert!((ex.eval(1.0) - (1.0 - (-5.0f64).exp())).abs() < 1e-15);
        assert_eq!(ex.kappa(), 5.0);
        assert!(PerturbationFunction::<f64>::exp_saturating(0.0).is_err());
    }

    #[test]
    fn config_checks_kappa() {
        let s = Splitting::zero(vec![1.0]);
        let bad = SchemeConfig::new(
            vec![DenominatorFunction::Linear],
            vec![PerturbationFunction::ExpSaturating(5.0)],
            s.clone(),
        );
        assert!(bad.is_err());
        let ok = SchemeConfig::new(vec![DenominatorFunction::Linear], vec![PerturbationFunction::Identity], s);
        assert!(ok.is_ok());
    }
}

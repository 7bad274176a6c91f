//! One-step maps and fixed-step trajectory integration.

mod baseline;
mod positive;

pub use baseline::{
    step_euler, step_nsfd1, step_nsfd2, step_nsfd3, step_trapezoidal, TRAPEZOIDAL_MAX_ITER, TRAPEZOIDAL_TOL,
};
pub use positive::step_second_order_positive;


use crate::denominator::{DenominatorFunction, PerturbationFunction, SchemeConfig};
use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::system::{DecomposedSystem, Splitting};

/// Relative tolerance on `(T - t0) / dt` being an integer.
pub const STEP_COUNT_TOL: f64 = 1e-9;

/// States `y^k` at `t^k = t0 + k dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub dt: T,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[T] {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Time series of component `i`.
    pub fn component(&self, i: usize) -> Vec<T> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn is_positive(&self) -> bool {
        self.states.iter().flatten().all(|&v| v > T::zero())
    }

    pub fn min_value(&self) -> T {
        self.states.iter().flatten().fold(T::infinity(), |m, &v| m.min(v))
    }
}

/// A map `(t, y, dt) ↦ y_next`.
pub trait OneStep<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn step(&self, t: T, y: &[T], dt: T) -> Result<Vec<T>>;
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepperKind<T: Real> {
    SecondOrderPositive,
    Nsfd1,
    Nsfd2,
    /// Per-component `α ≥ 0`.
    Nsfd3(Vec<T>),
    Euler,
    Trapezoidal,
}

impl<T: Real> StepperKind<T> {
    /// Whether the scheme is positive for every step size.
    pub fn preserves_positivity(&self) -> bool {
        matches!(self, Self::SecondOrderPositive | Self::Nsfd1 | Self::Nsfd2)
    }
}

/// A [`StepperKind`] bound to a system and its scheme configuration.
///
/// NSFD1, NSFD2 and NSFD3 read only `config.phi`; Euler and trapezoidal
/// ignore the configuration.
#[derive(Clone, Debug)]
pub struct Stepper<T: Real> {
    kind: StepperKind<T>,
    system: DecomposedSystem<T>,
    config: SchemeConfig<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(kind: StepperKind<T>, system: DecomposedSystem<T>, config: SchemeConfig<T>) -> Result<Self> {
        let n = system.dim();
        if config.dim() != n {
            return Err(NsfdError::DimensionMismatch {
                expected: n,
                got: config.dim(),
            });
        }
        if let StepperKind::Nsfd3(alpha) = &kind {
            if alpha.len() != n {
                return Err(NsfdError::DimensionMismatch {
                    expected: n,
                    got: alpha.len(),
                });
            }
            if let Some(a) = alpha.iter().find(|a| !(**a >= T::zero())) {
                return Err(NsfdError::ParamOutOfRange(format!("NSFD3 alpha must be >= 0, got {a}")));
            }
        }
        Ok(Stepper { kind, system, config })
    }

    /// Binds a scheme that needs no correction, with `φ = Δt` everywhere.
    pub fn plain(kind: StepperKind<T>, system: DecomposedSystem<T>) -> Result<Self> {
        let n = system.dim();
        let config = SchemeConfig::new(
            vec![DenominatorFunction::Linear; n],
            vec![PerturbationFunction::Identity; n],
            Splitting::zero(vec![T::one(); n]),
        )?;
        Self::new(kind, system, config)
    }

    pub fn kind(&self) -> &StepperKind<T> {
        &self.kind
    }

    pub fn system(&self) -> &DecomposedSystem<T> {
        &self.system
    }

    pub fn config(&self) -> &SchemeConfig<T> {
        &self.config
    }
}

impl<T: Real> OneStep<T> for Stepper<T> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn step(&self, t: T, y: &[T], dt: T) -> Result<Vec<T>> {
        let sys = &self.system;
        let rhs = |t: T, y: &[T], out: &mut [T]| sys.rhs(t, y, out);
        match &self.kind {
            StepperKind::SecondOrderPositive => step_second_order_positive(sys, &self.config, t, y, dt),
            StepperKind::Nsfd1 => step_nsfd1(sys, &self.config.phi, t, y, dt),
            StepperKind::Nsfd2 => step_nsfd2(&rhs, &self.config.phi, t, y, dt),
            StepperKind::Nsfd3(alpha) => step_nsfd3(sys, &self.config.phi, alpha, t, y, dt).map(|(y, _)| y),
            StepperKind::Euler => step_euler(&rhs, t, y, dt),
            StepperKind::Trapezoidal => step_trapezoidal(&rhs, t, y, dt),
        }
    }
}

/// Number of steps `N` with `t0 + N dt = t_end`.
pub fn step_count<T: Real>(t0: T, t_end: T, dt: T) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(NsfdError::ParamOutOfRange(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end >= t0) {
        return Err(NsfdError::ParamOutOfRange(format!("final time {t_end} precedes t0 = {t0}")));
    }
    let span = t_end - t0;
    let ratio = span / dt;
    let n = ratio.round();
    if (ratio - n).abs() > T::lit(STEP_COUNT_TOL) * T::one().max(ratio) {
        return Err(NsfdError::NonIntegerStepCount {
            span: span.as_f64(),
            dt: dt.as_f64(),
        });
    }
    n.to_usize()
        .ok_or_else(|| NsfdError::ParamOutOfRange(format!("step count {n} not representable")))
}

/// Applies `stepper` from `(t0, y0)` until `t_end`, keeping every state.
///
/// Errors from the stepper carry the index of the failing step.
pub fn integrate<T: Real, S: OneStep<T> + ?Sized>(stepper: &S, t0: T, y0: &[T], dt: T, t_end: T) -> Result<Trajectory<T>> {
    let n = step_count(t0, t_end, dt)?;
    check_len(stepper, y0)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(t0);
    states.push(y0.to_vec());
    for k in 0..n {
        let t = t0 + T::from_usize(k).unwrap() * dt;
        let next = stepper.step(t, &states[k], dt).map_err(|e| e.at_step(k))?;
        times.push(t0 + T::from_usize(k + 1).unwrap() * dt);
        states.push(next);
    }
    Ok(Trajectory { times, states, dt })
}

/// Like [`integrate`] but returns only the terminal state.
pub fn integrate_final<T: Real, S: OneStep<T> + ?Sized>(stepper: &S, t0: T, y0: &[T], dt: T, t_end: T) -> Result<Vec<T>> {
    let n = step_count(t0, t_end, dt)?;
    check_len(stepper, y0)?;
    let mut y = y0.to_vec();
    for k in 0..n {
        let t = t0 + T::from_usize(k).unwrap() * dt;
        y = stepper.step(t, &y, dt).map_err(|e| e.at_step(k))?;
    }
    Ok(y)
}

fn check_len<T: Real, S: OneStep<T> + ?Sized>(stepper: &S, y0: &[T]) -> Result<()> {
    if y0.len() != stepper.dim() {
        return Err(NsfdError::DimensionMismatch {
            expected: stepper.dim(),
            got: y0.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::SplitRule;

    fn decay() -> DecomposedSystem<f64> {
        DecomposedSystem::from_fns(1, |_, _, f| f[0] = 0.0, |_, _, g| g[0] = 1.0)
    }

    fn lin() -> Vec<DenominatorFunction<f64>> {
        vec![DenominatorFunction::Linear]
    }

    #[test]
    fn fixed_point_of_zero_field() {
        let sys = DecomposedSystem::from_fns(2, |_, _, f: &mut [f64]| f.fill(0.0), |_, _, g: &mut [f64]| g.fill(0.0));
        let cfg = SchemeConfig::new(
            vec![DenominatorFunction::Quadratic; 2],
            vec![PerturbationFunction::Identity; 2],
            Splitting::zero(vec![1.0; 2]),
        )
        .unwrap();
        for dt in [1e-3, 1.0, 50.0] {
            assert_eq!(step_second_order_positive(&sys, &cfg, 0.0, &[1.0, 2.0], dt).unwrap(), vec![1.0, 2.0]);
            assert_eq!(step_nsfd1(&sys, &cfg.phi, 0.0, &[1.0, 2.0], dt).unwrap(), vec![1.0, 2.0]);
            let zero = |_: f64, _: &[f64], o: &mut [f64]| o.fill(0.0);
            assert_eq!(step_nsfd2(&zero, &cfg.phi, 0.0, &[1.0, 2.0], dt).unwrap(), vec![1.0, 2.0]);
            assert_eq!(step_euler(&zero, 0.0, &[1.0, 2.0], dt).unwrap(), vec![1.0, 2.0]);
            assert_eq!(step_trapezoidal(&zero, 0.0, &[1.0, 2.0], dt).unwrap(), vec![1.0, 2.0]);
        }
    }

    #[test]
    fn second_order_decay_step() {
        let sys = decay();
        let cfg = SchemeConfig::uniform(&sys, DenominatorFunction::Exponential, PerturbationFunction::Identity, SplitRule::Abs)
            .unwrap();
        let (a, b) = cfg.split.eval(0.0, &[1.0]);
        assert!((a[0] - 0.5).abs() < 1e-8 && b[0] == 0.0);
        let y = step_second_order_positive(&sys, &cfg, 0.0, &[1.0], 0.1).unwrap();
        assert!((y[0] - (-0.1f64).exp()).abs() < 5e-4);

        // Local error shrinks like dt³.
        let err = |dt: f64| (step_second_order_positive(&sys, &cfg, 0.0, &[1.0], dt).unwrap()[0] - (-dt).exp()).abs();
        let slope = (err(1e-2) / err(1e-3)).log10();
        assert!((slope - 3.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn rejects_nonpositive_input() {
        let sys = decay();
        let cfg = SchemeConfig::uniform(&sys, DenominatorFunction::Quadratic, PerturbationFunction::Identity, SplitRule::Abs)
            .unwrap();
        let err = step_second_order_positive(&sys, &cfg, 0.0, &[0.0], 0.1).unwrap_err();
        assert_eq!(err, NsfdError::NonPositiveState { index: 0, value: 0.0 });
        assert!(step_nsfd1(&sys, &lin(), 0.0, &[-1.0], 0.1).is_err());
    }

    #[test]
    fn negative_correction_is_reported() {
        let sys = decay().with_directional_derivative(std::sync::Arc::new(|_, _, v: &mut [f64]| v[0] = -4.0));
        let cfg = SchemeConfig::uniform(&sys, DenominatorFunction::Quadratic, PerturbationFunction::Identity, SplitRule::Exponential)
            .unwrap();
        let err = step_second_order_positive(&sys, &cfg, 0.0, &[1.0], 0.1).unwrap_err();
        assert!(matches!(err, NsfdError::NegativeCorrection { which: "A", index: 0, .. }));
    }

    #[test]
    fn baseline_decay_examples() {
        let sys = decay();
        assert_eq!(step_nsfd1(&sys, &lin(), 0.0, &[1.0], 1.0).unwrap(), vec![0.5]);
        let down = |_: f64, y: &[f64], o: &mut [f64]| o[0] = -y[0];
        let up = |_: f64, y: &[f64], o: &mut [f64]| o[0] = y[0];
        assert_eq!(step_nsfd2(&down, &lin(), 0.0, &[1.0], 1.0).unwrap(), vec![0.5]);
        assert_eq!(step_nsfd2(&up, &lin(), 0.0, &[1.0], 1.0).unwrap(), vec![2.0]);
        let (y, flag) = step_nsfd3(&sys, &lin(), &[2.0], 0.0, &[1.0], 1.0).unwrap();
        assert!((y[0] - 2.0 / 3.0).abs() < 1e-15 && !flag);
        assert_eq!(step_euler(&down, 0.0, &[1.0], 3.0).unwrap(), vec![-2.0]);
        let z = step_trapezoidal(&down, 0.0, &[1.0], 0.1).unwrap();
        assert!((z[0] - 0.95 / 1.05).abs() < 1e-12);
    }

    #[test]
    fn nsfd3_flags_lost_positivity() {
        // F = -y with g = 1, α = 0: explicit Euler in disguise.
        let (y, flag) = step_nsfd3(&decay(), &lin(), &[0.0], 0.0, &[1.0], 3.0).unwrap();
        assert_eq!(y, vec![-2.0]);
        assert!(flag);
    }

    #[test]
    fn trapezoidal_nonlinear() {
        // y' = -y², exact trapezoidal root of z + h z²/2 = y - h y²/2.
        let rhs = |_: f64, y: &[f64], o: &mut [f64]| o[0] = -y[0] * y[0];
        let h = 0.5;
        let c = 1.0 - h / 2.0;
        let z_exact = (-1.0 + (1.0f64 + 2.0 * h * c).sqrt()) / h;
        let z = step_trapezoidal(&rhs, 0.0, &[1.0], h).unwrap();
        assert!((z[0] - z_exact).abs() < 1e-12);
    }

    #[test]
    fn trapezoidal_reports_no_convergence() {
        let rhs = |_: f64, y: &[f64], o: &mut [f64]| o[0] = y[0].exp();
        let err = step_trapezoidal(&rhs, 0.0, &[5.0], 10.0).unwrap_err();
        assert!(matches!(err, NsfdError::NoConvergence { .. }));
    }

    #[test]
    fn integrate_counts_steps() {
        let st = Stepper::plain(StepperKind::Nsfd1, decay()).unwrap();
        let tr = integrate(&st, 0.0, &[1.0], 0.5, 0.0).unwrap();
        assert_eq!(tr.len(), 1);
        let tr = integrate(&st, 0.0, &[1.0], 0.1, 1.0).unwrap();
        assert_eq!(tr.len(), 11);
        assert_eq!(tr.times[10], 1.0);
        assert!((tr.last()[0] - 1.1f64.powi(-10)).abs() < 1e-14);
        assert_eq!(integrate_final(&st, 0.0, &[1.0], 0.1, 1.0).unwrap(), tr.last().to_vec());
        let err = integrate(&st, 0.0, &[1.0], 0.3, 1.0).unwrap_err();
        assert!(matches!(err, NsfdError::NonIntegerStepCount { .. }));
    }

    #[test]
    fn integrate_attaches_step_index() {
        let st = Stepper::plain(StepperKind::Euler, decay()).unwrap();
        let st2 = Stepper::plain(StepperKind::Nsfd1, decay()).unwrap();
        let tr = integrate(&st, 0.0, &[1.0], 3.0, 6.0).unwrap();
        let err = integrate(&st2, 0.0, tr.states[1].as_slice(), 1.0, 2.0).unwrap_err();
        assert_eq!(err, NsfdError::NonPositiveState { index: 0, value: -2.0 }.at_step(0));
        assert!(matches!(err.root(), NsfdError::NonPositiveState { .. }));
    }

    #[test]
    fn nsfd3_alpha_validated() {
        assert!(Stepper::plain(StepperKind::Nsfd3(vec![-1.0]), decay()).is_err());
        assert!(Stepper::plain(StepperKind::Nsfd3(vec![1.0, 1.0]), decay()).is_err());
    }
}

//! Shooting for `u'' + λ f(u) = 0` on `[0, L]` with `u(0) = u(L) = 0` and
//! `f > 0` on the positive axis.
//!
//! Positive solutions are symmetric about `L/2`, so only the half interval is
//! integrated: the initial slope `s` is chosen so that `u'(L/2) = 0` and the
//! second half is obtained by reflection.

use std::fmt;
use std::sync::Arc;

use crate::denominator::{DenominatorFunction, PerturbationFunction, SchemeConfig};
use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::schemes::{step_count, step_second_order_positive, Trajectory};
use crate::system::{DecomposedSystem, ScalarFn, SplitRule};

/// Upper end of the sampling range used by [`BvpProblem::validate`].
pub const VALIDATE_W_MAX: f64 = 10.0;
const VALIDATE_SAMPLES: usize = 100;

/// Bisection gives way to the Illinois secant below this bracket width.
pub const SECANT_SWITCH_WIDTH: f64 = 1e-6;
/// Bracket width at which the root finder stops regardless of the residual.
pub const MIN_BRACKET_WIDTH: f64 = 1e-14;
pub const MAX_ROOT_ITERATIONS: usize = 200;

#[derive(Clone)]
pub struct BvpProblem<T: Real> {
    pub f: ScalarFn<T>,
    /// `f'`, used for the analytic correction terms; finite differences otherwise.
    pub f_prime: Option<ScalarFn<T>>,
    pub lambda: T,
    pub length: T,
}

impl<T: Real> fmt::Debug for BvpProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvpProblem")
            .field("lambda", &self.lambda)
            .field("length", &self.length)
            .field("f_prime", &self.f_prime.is_some())
            .finish_non_exhaustive()
    }
}

impl<T: Real> BvpProblem<T> {
    pub fn new<F>(f: F, lambda: T, length: T) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        BvpProblem {
            f: Arc::new(f),
            f_prime: None,
            lambda,
            length,
        }
    }

    pub fn with_derivative<F>(mut self, f_prime: F) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        self.f_prime = Some(Arc::new(f_prime));
        self
    }

    /// `u'' + λ e^u = 0`.
    pub fn bratu(lambda: T, length: T) -> Self {
        Self::new(|u: T| u.exp(), lambda, length).with_derivative(|u: T| u.exp())
    }

    /// `u'' + λ u = 0`. With `λ L² = π²` every slope solves the problem.
    pub fn linear(lambda: T, length: T) -> Self {
        Self::new(|u| u, lambda, length).with_derivative(|_| T::one())
    }

    /// `λ ≥ 0`, `L > 0` and `f > 0` sampled on `(0, 10]`.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero() && self.lambda.is_finite()) {
            return Err(NsfdError::ParamOutOfRange(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.length > T::zero() && self.length.is_finite()) {
            return Err(NsfdError::ParamOutOfRange(format!("length must be > 0, got {}", self.length)));
        }
        let n = T::from_usize(VALIDATE_SAMPLES).unwrap();
        for k in 1..=VALIDATE_SAMPLES {
            let w = T::lit(VALIDATE_W_MAX) * T::from_usize(k).unwrap() / n;
            let v = (self.f)(w);
            if !(v > T::zero()) {
                return Err(NsfdError::ParamOutOfRange(format!("f({w}) = {v} is not positive")));
            }
        }
        Ok(())
    }
}

/// `y₁ = u`, `y₂ = u'` with `f₁ = y₂`, `g₁ = 0`, `f₂ = 0`, `g₂ = λ f(y₁) / y₂`.
///
/// Valid while `y₂ > 0`, which holds on `[0, L/2)` for a positive solution.
pub fn bvp_to_system<T: Real>(problem: &BvpProblem<T>) -> DecomposedSystem<T> {
    let f = problem.f.clone();
    let lambda = problem.lambda;
    DecomposedSystem::from_fns(
        2,
        |_, y, out| {
            out[0] = y[1];
            out[1] = T::zero();
        },
        move |_, y, out| {
            out[0] = T::zero();
            out[1] = lambda * f(y[0]) / y[1];
        },
    )
}

/// The same equation in `z₁ = u + c₁`, `z₂ = u' + c₂`:
/// `f₁ = z₂`, `g₁ = c₂ / z₁`, `f₂ = λ (−f)₊`, `g₂ = λ f₊ / z₂`.
///
/// The initial state `(c₁, s + c₂)` lies inside the positive orthant, and the
/// shift keeps `g₂` bounded where `u'` vanishes.
pub fn shifted_system<T: Real>(problem: &BvpProblem<T>, c1: T, c2: T) -> DecomposedSystem<T> {
    let lambda = problem.lambda;
    let (f, fg) = (problem.f.clone(), problem.f.clone());
    let mut sys = DecomposedSystem::from_fns(
        2,
        move |_, z, out| {
            out[0] = z[1];
            out[1] = lambda * (-f(z[0] - c1)).max(T::zero());
        },
        move |_, z, out| {
            out[0] = c2 / z[0];
            out[1] = lambda * fg(z[0] - c1).max(T::zero()) / z[1];
        },
    );
    if let Some(fp) = problem.f_prime.clone() {
        let f = problem.f.clone();
        sys = sys.with_directional_derivative(Arc::new(move |_, z, out| {
            let u = z[0] - c1;
            out[0] = -lambda * f(u);
            out[1] = -lambda * fp(u) * (z[1] - c2);
        }));
    }
    sys
}

/// How the boundary start `u(0) = 0` is moved into the open orthant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularization<T: Real> {
    /// Start the unshifted system from `(ε, s)`. Accuracy degrades near the
    /// turning point, where `g₂` grows like `1/u'`.
    Epsilon(T),
    /// Integrate in the shifted variables of [`shifted_system`].
    Shift { c1: T, c2: T },
}

impl<T: Real> Default for Regularization<T> {
    fn default() -> Self {
        Regularization::Shift {
            c1: T::one(),
            c2: T::one(),
        }
    }
}

/// Result of one shot: `u'(L/2)` and the half trajectory in `(u, u')`.
#[derive(Clone, Debug)]
pub struct Shot<T: Real> {
    pub residual: T,
    pub traj: Trajectory<T>,
}

/// Integrates from slope `s` to `L/2` with the second-order positive scheme
/// (quadratic `φ`, `ϕ = Δt`, absolute-value split).
///
/// With [`Regularization::Epsilon`] the run stops with
/// [`NsfdError::DomainExit`] once an explicit step would drive `u'` to zero
/// or below before `L/2`. In shifted variables the same error is raised when
/// a component underflows to zero, i.e. `u' ≤ -c₂` well before `L/2`.
pub fn shoot<T: Real>(problem: &BvpProblem<T>, reg: Regularization<T>, s: T, dt: T) -> Result<Shot<T>> {
    if !(s > T::zero() && s.is_finite()) {
        return Err(NsfdError::ParamOutOfRange(format!("slope must be > 0, got {s}")));
    }
    let half = problem.length / T::lit(2.0);
    let n = step_count(T::zero(), half, dt)?;
    let (system, y0, shift) = match reg {
        Regularization::Epsilon(eps) => {
            if !(eps > T::zero()) {
                return Err(NsfdError::ParamOutOfRange(format!("epsilon must be > 0, got {eps}")));
            }
            (bvp_to_system(problem), vec![eps, s], (T::zero(), T::zero()))
        }
        Regularization::Shift { c1, c2 } => {
            if !(c1 > T::zero() && c2 > T::zero()) {
                return Err(NsfdError::ParamOutOfRange("shifts must be > 0".into()));
            }
            (shifted_system(problem, c1, c2), vec![c1, s + c2], (c1, c2))
        }
    };
    let config = SchemeConfig::uniform(
        &system,
        DenominatorFunction::Quadratic,
        PerturbationFunction::Identity,
        SplitRule::Abs,
    )?;
    let unshift = |y: &[T]| vec![y[0] - shift.0, y[1] - shift.1];

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut y = y0;
    times.push(T::zero());
    states.push(unshift(&y));
    for k in 0..n {
        let t = T::from_usize(k).unwrap() * dt;
        if let Regularization::Epsilon(_) = reg {
            if y[1] - dt * problem.lambda * (problem.f)(y[0]) <= T::zero() {
                return Err(NsfdError::DomainExit { time: t.as_f64() });
            }
        }
        y = step_second_order_positive(&system, &config, t, &y, dt).map_err(|e| match e {
            NsfdError::NonPositiveState { .. } => NsfdError::DomainExit { time: t.as_f64() },
            e => e.at_step(k),
        })?;
        times.push(T::from_usize(k + 1).unwrap() * dt);
        states.push(unshift(&y));
    }
    let residual = states[n][1];
    Ok(Shot {
        residual,
        traj: Trajectory { times, states, dt },
    })
}

/// `u` sampled on `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BvpSolution<T: Real> {
    pub t: Vec<T>,
    pub u: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct ShootingResult<T: Real> {
    pub s_star: T,
    /// `(u, u')` on `[0, L/2]`.
    pub half_traj: Trajectory<T>,
    /// Half trajectory reflected with `u(t) = u(L - t)`, so the samples are
    /// exactly symmetric and `u(0) = u(L) = 0`.
    pub full_solution: BvpSolution<T>,
    /// `|u'(L/2)|` at `s_star`.
    pub residual: T,
}

/// [`solve_bvp_with`] using the default shift regularization.
pub fn solve_bvp<T: Real>(problem: &BvpProblem<T>, dt: T, bracket: (T, T), tol: T) -> Result<ShootingResult<T>> {
    solve_bvp_with(problem, Regularization::default(), dt, bracket, tol)
}

/// Finds `s` in `bracket` with `|u'(s, L/2)| < tol`.
///
/// Bisection until the bracket is narrower than [`SECANT_SWITCH_WIDTH`], then
/// Illinois steps. A shot ending in [`NsfdError::DomainExit`] counts as a
/// negative residual. Stops when the residual is below `tol` or the bracket
/// is narrower than [`MIN_BRACKET_WIDTH`].
///
/// Only one root per bracket is returned; problems with several positive
/// solutions (Bratu below the critical `λ`) need a bracket per branch.
pub fn solve_bvp_with<T: Real>(
    problem: &BvpProblem<T>,
    reg: Regularization<T>,
    dt: T,
    bracket: (T, T),
    tol: T,
) -> Result<ShootingResult<T>> {
    problem.validate()?;
    let (mut lo, mut hi) = bracket;
    if !(lo > T::zero() && hi > lo) {
        return Err(NsfdError::ParamOutOfRange(format!("bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")));
    }
    if !(tol > T::zero()) {
        return Err(NsfdError::ParamOutOfRange(format!("tol must be > 0, got {tol}")));
    }
    // `None` residual stands for a domain exit.
    let eval = |s: T| -> Result<(Option<T>, Option<Shot<T>>)> {
        match shoot(problem, reg, s, dt) {
            Ok(shot) => Ok((Some(shot.residual), Some(shot))),
            Err(e) if matches!(e.root(), NsfdError::DomainExit { .. }) => Ok((None, None)),
            Err(e) => Err(e),
        }
    };
    let sign = |r: Option<T>| r.map_or(-T::one(), |v| v);

    let (mut r_lo, shot_lo) = eval(lo)?;
    let (mut r_hi, shot_hi) = eval(hi)?;
    for (r, shot, s) in [(r_lo, &shot_lo, lo), (r_hi, &shot_hi, hi)] {
        if let (Some(v), Some(shot)) = (r, shot) {
            if v.abs() < tol {
                return Ok(finish(problem, s, shot.clone()));
            }
        }
    }
    if (sign(r_lo) > T::zero()) == (sign(r_hi) > T::zero()) {
        return Err(NsfdError::NoBracket {
            lo: sign(r_lo).as_f64(),
            hi: sign(r_hi).as_f64(),
        });
    }
    // Orient so that the residual at `lo` is negative.
    let flipped = sign(r_lo) > T::zero();
    if flipped {
        std::mem::swap(&mut lo, &mut hi);
        std::mem::swap(&mut r_lo, &mut r_hi);
    }

    let two = T::lit(2.0);
    let mut side = 0i8;
    let mut best: Option<(T, Shot<T>)> = None;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let width = (hi - lo).abs();
        let mid = match (r_lo, r_hi) {
            (Some(a), Some(b)) if width < T::lit(SECANT_SWITCH_WIDTH) && b != a => {
                let s = (lo * b - hi * a) / (b - a);
                if s > lo.min(hi) && s < lo.max(hi) {
                    s
                } else {
                    (lo + hi) / two
                }
            }
            _ => (lo + hi) / two,
        };
        let (r, shot) = eval(mid)?;
        if let (Some(v), Some(shot)) = (r, shot) {
            if v.abs() < tol || width < T::lit(MIN_BRACKET_WIDTH) {
                return Ok(finish(problem, mid, shot));
            }
            if best.as_ref().is_none_or(|(_, b)| v.abs() < b.residual.abs()) {
                best = Some((mid, shot));
            }
        }
        if sign(r) < T::zero() {
            lo = mid;
            r_lo = r;
            if side == -1 {
                r_hi = r_hi.map(|v| v / two);
            }
            side = -1;
        } else {
            hi = mid;
            r_hi = r;
            if side == 1 {
                r_lo = r_lo.map(|v| v / two);
            }
            side = 1;
        }
        if (hi - lo).abs() < T::lit(MIN_BRACKET_WIDTH) {
            if let Some((s, shot)) = best.take() {
                return Ok(finish(problem, s, shot));
            }
        }
    }
    Err(NsfdError::NoConvergence {
        iterations: MAX_ROOT_ITERATIONS,
        residual: best.map_or(f64::NAN, |(_, b)| b.residual.abs().as_f64()),
    })
}

fn finish<T: Real>(problem: &BvpProblem<T>, s: T, shot: Shot<T>) -> ShootingResult<T> {
    let traj = shot.traj;
    let n = traj.len() - 1;
    let mut u: Vec<T> = traj.states.iter().map(|y| y[0]).collect();
    u[0] = T::zero();
    let mut t_full = traj.times.clone();
    let mut u_full = u.clone();
    for k in (0..n).rev() {
        t_full.push(problem.length - traj.times[k]);
        u_full.push(u[k]);
    }
    ShootingResult {
        s_star: s,
        residual: shot.residual.abs(),
        full_solution: BvpSolution { t: t_full, u: u_full },
        half_traj: traj,
    }
}

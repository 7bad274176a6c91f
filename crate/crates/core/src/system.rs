//! Decomposed right-hand sides `y' = f(t, y) - y ∘ g(t, y)` and the
//! correction splittings built from their directional derivative.

use std::fmt;
use std::sync::Arc;

use crate::error::{NsfdError, Result};
use crate::scalar::Real;

/// Vector field evaluated into a caller-provided buffer: `(t, y, out)`.
pub type VecFn<T> = Arc<dyn Fn(T, &[T], &mut [T]) + Send + Sync>;

/// Scalar function of a single argument.
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Relative step used by the central finite differences of `F`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Non-autonomous system written as production minus linear loss.
///
/// `f` and `g` must be componentwise nonnegative on the open positive
/// orthant. When `v` is absent, [`directional_derivative`] falls back to
/// central differences of the reconstructed right-hand side.
#[derive(Clone)]
pub struct DecomposedSystem<T: Real> {
    dim: usize,
    f: VecFn<T>,
    g: VecFn<T>,
    v: Option<VecFn<T>>,
}

impl<T: Real> fmt::Debug for DecomposedSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecomposedSystem")
            .field("dim", &self.dim)
            .field("analytic_v", &self.v.is_some())
            .finish()
    }
}

impl<T: Real> DecomposedSystem<T> {
    pub fn new(dim: usize, f: VecFn<T>, g: VecFn<T>) -> Self {
        assert!(dim > 0, "system dimension must be positive");
        DecomposedSystem { dim, f, g, v: None }
    }

    /// Attaches an analytic `v = ∂F/∂t + J F`.
    pub fn with_directional_derivative(mut self, v: VecFn<T>) -> Self {
        self.v = Some(v);
        self
    }

    /// Builds the system from closures, boxing them.
    pub fn from_fns<F, G>(dim: usize, f: F, g: G) -> Self
    where
        F: Fn(T, &[T], &mut [T]) + Send + Sync + 'static,
        G: Fn(T, &[T], &mut [T]) + Send + Sync + 'static,
    {
        Self::new(dim, Arc::new(f), Arc::new(g))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_v(&self) -> bool {
        self.v.is_some()
    }

    pub fn eval_f(&self, t: T, y: &[T], out: &mut [T]) {
        (self.f)(t, y, out)
    }

    pub fn eval_g(&self, t: T, y: &[T], out: &mut [T]) {
        (self.g)(t, y, out)
    }

    /// Production and loss-rate terms at `(t, y)`.
    pub fn f_g(&self, t: T, y: &[T]) -> (Vec<T>, Vec<T>) {
        let mut f = vec![T::zero(); self.dim];
        let mut g = vec![T::zero(); self.dim];
        (self.f)(t, y, &mut f);
        (self.g)(t, y, &mut g);
        (f, g)
    }

    /// Reconstructed right-hand side `F = f - y ∘ g`.
    pub fn rhs(&self, t: T, y: &[T], out: &mut [T]) {
        let mut g = vec![T::zero(); self.dim];
        (self.f)(t, y, out);
        (self.g)(t, y, &mut g);
        for ((o, &yi), gi) in out.iter_mut().zip(y).zip(g) {
            *o = *o - yi * gi;
        }
    }

    pub fn rhs_vec(&self, t: T, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.rhs(t, y, &mut out);
        out
    }

    /// The reconstructed right-hand side as a standalone vector field.
    pub fn rhs_fn(&self) -> VecFn<T> {
        let sys = self.clone();
        Arc::new(move |t, y, out| sys.rhs(t, y, out))
    }

    /// Checks `f ≥ 0` and `g ≥ 0` at the given sample points.
    pub fn verify_nonnegative(&self, samples: &[(T, Vec<T>)]) -> Result<()> {
        for (t, y) in samples {
            let (f, g) = self.f_g(*t, y);
            for (i, (&fi, &gi)) in f.iter().zip(&g).enumerate() {
                if fi < T::zero() {
                    return Err(NsfdError::NegativeProduction {
                        component: i,
                        value: fi.as_f64(),
                    });
                }
                if gi < T::zero() {
                    return Err(NsfdError::ParamOutOfRange(format!(
                        "loss rate g[{i}] = {gi} is negative"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `v(t, y) = ∂F/∂t + J_y F · F`, the second time derivative along solutions.
///
/// Uses the analytic form when the system carries one. Otherwise central
/// differences with per-coordinate step `h · max(1, |y_j|)`, clamped to
/// `y_j / 2` so every probe stays in the open orthant.
pub fn directional_derivative<T: Real>(
    system: &DecomposedSystem<T>,
    t: T,
    y: &[T],
    h: T,
) -> Result<Vec<T>> {
    let n = system.dim();
    if y.len() != n {
        return Err(NsfdError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let mut v = vec![T::zero(); n];
    if let Some(va) = &system.v {
        va(t, y, &mut v);
        return finite_or_err(v);
    }

    let two = T::lit(2.0);
    let f0 = system.rhs_vec(t, y);
    if let Some(index) = f0.iter().position(|x| !x.is_finite()) {
        return Err(NsfdError::NonFiniteStep { index });
    }

    let ht = h * T::one().max(t.abs());
    let fp = system.rhs_vec(t + ht, y);
    let fm = system.rhs_vec(t - ht, y);
    for i in 0..n {
        v[i] = (fp[i] - fm[i]) / (two * ht);
    }

    let mut probe = y.to_vec();
    let mut fp = vec![T::zero(); n];
    let mut fm = vec![T::zero(); n];
    for j in 0..n {
        if f0[j] == T::zero() {
            continue;
        }
        let mut hj = h * T::one().max(y[j].abs());
        if y[j] > T::zero() {
            hj = hj.min(y[j] / two);
        }
        probe[j] = y[j] + hj;
        system.rhs(t, &probe, &mut fp);
        probe[j] = y[j] - hj;
        system.rhs(t, &probe, &mut fm);
        probe[j] = y[j];
        for i in 0..n {
            v[i] = v[i] + (fp[i] - fm[i]) / (two * hj) * f0[j];
        }
    }
    finite_or_err(v)
}

fn finite_or_err<T: Real>(v: Vec<T>) -> Result<Vec<T>> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(NsfdError::NonFiniteStep { index }),
        None => Ok(v),
    }
}

/// Members of the splitting set `D(u)`: pairs `(u₊, u₋)` with `u₊ - u₋ = u`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SplitRule {
    /// `((u + |u|)/2, (|u| - u)/2)`.
    #[default]
    Abs,
    /// `(u² + 1 + u, u² + 1)`.
    Quadratic,
    /// `(eᵘ + u, eᵘ)`; the plus part is negative for `u < -0.5671…`.
    Exponential,
}

impl SplitRule {
    #[inline]
    pub fn split<T: Real>(self, u: T) -> (T, T) {
        match self {
            SplitRule::Abs => {
                let two = T::lit(2.0);
                ((u + u.abs()) / two, (u.abs() - u) / two)
            }
            SplitRule::Quadratic => {
                let m = u * u + T::one();
                (m + u, m)
            }
            SplitRule::Exponential => {
                let e = u.exp();
                (e + u, e)
            }
        }
    }
}

/// Pointwise absolute-value split of a vector field.
pub fn split_default<T: Real>(u: VecFn<T>) -> (VecFn<T>, VecFn<T>) {
    split_with(u, SplitRule::Abs)
}

pub fn split_with<T: Real>(u: VecFn<T>, rule: SplitRule) -> (VecFn<T>, VecFn<T>) {
    let up = u.clone();
    let plus: VecFn<T> = Arc::new(move |t, y, out| {
        up(t, y, out);
        for o in out.iter_mut() {
            *o = rule.split(*o).0;
        }
    });
    let minus: VecFn<T> = Arc::new(move |t, y, out| {
        u(t, y, out);
        for o in out.iter_mut() {
            *o = rule.split(*o).1;
        }
    });
    (plus, minus)
}

/// Evaluates a pair of vector fields at once: `(t, y, plus, minus)`.
pub type PairFn<T> = Arc<dyn Fn(T, &[T], &mut [T], &mut [T]) + Send + Sync>;

/// Correction pair `(A, B)` with `A - B = v / (2κ)` componentwise.
#[derive(Clone)]
pub struct Splitting<T: Real> {
    parts: PairFn<T>,
    pub kappa: Vec<T>,
}

impl<T: Real> fmt::Debug for Splitting<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Splitting")
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Splitting<T> {
    /// Builds the pair from a joint evaluator, so shared work (such as a
    /// finite-difference `v`) is done once per call.
    pub fn new(parts: PairFn<T>, kappa: Vec<T>) -> Self {
        Splitting { parts, kappa }
    }

    pub fn from_parts(plus: VecFn<T>, minus: VecFn<T>, kappa: Vec<T>) -> Self {
        let parts: PairFn<T> = Arc::new(move |t, y, a, b| {
            plus(t, y, a);
            minus(t, y, b);
        });
        Splitting { parts, kappa }
    }

    /// The trivial correction `A = B = 0`, which turns the second-order
    /// stepper into the first-order one.
    pub fn zero(kappa: Vec<T>) -> Self {
        let parts: PairFn<T> = Arc::new(|_, _, a: &mut [T], b: &mut [T]| {
            a.fill(T::zero());
            b.fill(T::zero());
        });
        Splitting { parts, kappa }
    }

    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    pub fn eval_into(&self, t: T, y: &[T], a: &mut [T], b: &mut [T]) {
        (self.parts)(t, y, a, b)
    }

    pub fn eval(&self, t: T, y: &[T]) -> (Vec<T>, Vec<T>) {
        let n = self.kappa.len();
        let mut a = vec![T::zero(); n];
        let mut b = vec![T::zero(); n];
        (self.parts)(t, y, &mut a, &mut b);
        (a, b)
    }
}

/// `(A, B) = split(v / (2κ))` with `v` from [`directional_derivative`].
///
/// A failed derivative evaluation surfaces as NaN in both parts, which the
/// stepper rejects as a non-finite step.
pub fn splitting_from_v<T: Real>(
    system: &DecomposedSystem<T>,
    kappa: Vec<T>,
    rule: SplitRule,
) -> Result<Splitting<T>> {
    if kappa.len() != system.dim() {
        return Err(NsfdError::DimensionMismatch {
            expected: system.dim(),
            got: kappa.len(),
        });
    }
    if let Some(k) = kappa.iter().find(|k| !(**k > T::zero())) {
        return Err(NsfdError::ParamOutOfRange(format!("kappa must be > 0, got {k}")));
    }
    let sys = system.clone();
    let scale: Vec<T> = kappa.iter().map(|&k| T::lit(2.0) * k).collect();
    let h = T::lit(DEFAULT_FD_STEP);
    let parts: PairFn<T> = Arc::new(move |t, y, a, b| match directional_derivative(&sys, t, y, h) {
        Ok(v) => {
            for i in 0..v.len() {
                (a[i], b[i]) = rule.split(v[i] / scale[i]);
            }
        }
        Err(_) => {
            a.fill(T::nan());
            b.fill(T::nan());
        }
    });
    Ok(Splitting::new(parts, kappa))
}

/// Shift decomposition `f = F + α ∘ y`, `g = α` for right-hand sides with
/// `F + α ∘ y ≥ 0`. Loss rates are constant, so denominators need no update.
pub fn decompose_with_shift<T: Real>(rhs: VecFn<T>, alpha: Vec<T>) -> Result<DecomposedSystem<T>> {
    if alpha.is_empty() {
        return Err(NsfdError::ParamOutOfRange("empty shift vector".into()));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a > T::zero())) {
        return Err(NsfdError::ParamOutOfRange(format!("shift must be > 0, got {a}")));
    }
    let dim = alpha.len();
    let af = alpha.clone();
    let f: VecFn<T> = Arc::new(move |t, y, out| {
        rhs(t, y, out);
        for ((o, &yi), &a) in out.iter_mut().zip(y).zip(&af) {
            *o = *o + a * yi;
        }
    });
    let g: VecFn<T> = Arc::new(move |_, _, out| out.copy_from_slice(&alpha));
    Ok(DecomposedSystem::new(dim, f, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> DecomposedSystem<f64> {
        DecomposedSystem::from_fns(1, |_, _, f| f[0] = 0.0, |_, _, g| g[0] = 1.0)
    }

    fn konst(c: f64) -> VecFn<f64> {
        Arc::new(move |_, _, out| out.fill(c))
    }

    #[test]
    fn split_default_examples() {
        for (u, want) in [(3.0, (3.0, 0.0)), (-2.0, (0.0, 2.0)), (0.0, (0.0, 0.0))] {
            let (p, m) = split_default(konst(u));
            let (mut a, mut b) = ([0.0], [0.0]);
            p(0.0, &[1.0], &mut a);
            m(0.0, &[1.0], &mut b);
            assert_eq!((a[0], b[0]), want);
        }
    }

    #[test]
    fn split_rules_reconstruct() {
        for rule in [SplitRule::Abs, SplitRule::Quadratic, SplitRule::Exponential] {
            for u in [-0.4f64, 0.0, 0.3, 7.5] {
                let (p, m) = rule.split(u);
                assert!((p - m - u).abs() < 1e-14, "{rule:?} {u}");
                assert!(p >= 0.0 && m >= 0.0);
            }
        }
        assert!(SplitRule::Exponential.split(-1.0f64).0 < 0.0);
    }

    #[test]
    fn v_for_linear_decay() {
        let v = directional_derivative(&decay(), 0.0, &[2.0], 1e-6).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn v_vanishes_for_constant_field() {
        let sys = DecomposedSystem::<f64>::from_fns(2, |_, _, f| f.fill(0.7), |_, _, g| g.fill(0.0));
        let v = directional_derivative(&sys, 1.0, &[0.3, 4.0], 1e-6).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn v_reports_overflow() {
        let sys = DecomposedSystem::<f64>::from_fns(1, |_, y: &[f64], f: &mut [f64]| f[0] = (y[0] * 1e3).exp(), |_, _, g| g[0] = 0.0);
        let err = directional_derivative(&sys, 0.0, &[1.0], 1e-6).unwrap_err();
        assert!(matches!(err, NsfdError::NonFiniteStep { .. }));
    }

    #[test]
    fn splitting_from_v_examples() {
        let s = splitting_from_v(&decay(), vec![1.0], SplitRule::Abs).unwrap();
        let (a, b) = s.eval(0.0, &[3.0]);
        assert!((a[0] - 1.5).abs() < 1e-8 && b[0] == 0.0);

        let sys = decay().with_directional_derivative(Arc::new(|_, y, v| v[0] = -y[0] * y[0]));
        let s = splitting_from_v(&sys, vec![1.0], SplitRule::Abs).unwrap();
        let (a, b) = s.eval(0.0, &[2.0]);
        assert_eq!((a[0], b[0]), (0.0, 2.0));

        let flat = DecomposedSystem::from_fns(1, |_, _, f| f[0] = 0.0, |_, _, g| g[0] = 0.0);
        let s = splitting_from_v(&flat, vec![1.0], SplitRule::Abs).unwrap();
        assert_eq!(s.eval(0.0, &[1.0]), (vec![0.0], vec![0.0]));
    }

    #[test]
    fn splitting_rejects_bad_kappa() {
        assert!(splitting_from_v(&decay(), vec![0.0], SplitRule::Abs).is_err());
        assert!(splitting_from_v(&decay(), vec![1.0, 1.0], SplitRule::Abs).is_err());
    }

    #[test]
    fn shift_decomposition_examples() {
        let zero: VecFn<f64> = Arc::new(|_, _, out| out.fill(0.0));
        let sys = decompose_with_shift(zero, vec![1.0]).unwrap();
        let (f, g) = sys.f_g(0.0, &[0.4]);
        assert_eq!((f[0], g[0]), (0.4, 1.0));

        let neg: VecFn<f64> = Arc::new(|_, y, out| out[0] = -y[0]);
        let sys = decompose_with_shift(neg, vec![1.0]).unwrap();
        let (f, g) = sys.f_g(0.0, &[0.4]);
        assert_eq!((f[0], g[0]), (0.0, 1.0));
        assert!(decompose_with_shift(konst(1.0), vec![-1.0]).is_err());
    }

    #[test]
    fn verify_nonnegative_flags_bad_shift() {
        let rhs: VecFn<f64> = Arc::new(|_, y, out| out[0] = -3.0 * y[0]);
        let sys = decompose_with_shift(rhs, vec![1.0]).unwrap();
        let err = sys.verify_nonnegative(&[(0.0, vec![1.0])]).unwrap_err();
        assert!(matches!(err, NsfdError::NegativeProduction { component: 0, .. }));
    }
}

use crate::denominator::DenominatorFunction;
use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::system::DecomposedSystem;

use super::positive::{check_dim, check_finite, check_positive};

/// Tolerance of the trapezoidal nonlinear solve, relative to `max(1, |z|)`.
pub const TRAPEZOIDAL_TOL: f64 = 1e-12;
pub const TRAPEZOIDAL_MAX_ITER: usize = 50;

/// `y_i ← (y_i + φ_i f_i) / (1 + φ_i g_i)`.
pub fn step_nsfd1<T: Real>(
    system: &DecomposedSystem<T>,
    phi: &[DenominatorFunction<T>],
    t: T,
    y: &[T],
    dt: T,
) -> Result<Vec<T>> {
    let n = system.dim();
    check_dim(n, y.len())?;
    check_dim(n, phi.len())?;
    check_positive(y)?;
    let (f, g) = system.f_g(t, y);
    check_finite(&f)?;
    check_finite(&g)?;
    let out: Vec<T> = (0..n)
        .map(|i| {
            let ph = phi[i].eval(dt, t, y, g[i]);
            (y[i] + ph * f[i]) / (T::one() + ph * g[i])
        })
        .collect();
    check_finite(&out)?;
    Ok(out)
}

/// Explicit where `F_i ≥ 0`, weighted `y_i / (1 - φ_i F_i / y_i)` where `F_i < 0`.
///
/// Works on the raw right-hand side, so `φ` is evaluated with `g = 0`.
pub fn step_nsfd2<T: Real, F>(rhs: &F, phi: &[DenominatorFunction<T>], t: T, y: &[T], dt: T) -> Result<Vec<T>>
where
    F: Fn(T, &[T], &mut [T]) + ?Sized,
{
    let n = y.len();
    check_dim(n, phi.len())?;
    check_positive(y)?;
    let mut fv = vec![T::zero(); n];
    rhs(t, y, &mut fv);
    check_finite(&fv)?;
    let out: Vec<T> = (0..n)
        .map(|i| {
            let ph = phi[i].eval(dt, t, y, T::zero());
            if fv[i] >= T::zero() {
                y[i] + ph * fv[i]
            } else {
                y[i] / (T::one() - ph * fv[i] / y[i])
            }
        })
        .collect();
    check_finite(&out)?;
    Ok(out)
}

/// `y_i ← (y_i + φ_i F_i + φ_i α_i g_i y_i) / (1 + φ_i α_i g_i)`.
///
/// Positivity is not structural here. The flag is set when some output
/// component is not strictly positive; with `α = 1` the map equals NSFD1.
pub fn step_nsfd3<T: Real>(
    system: &DecomposedSystem<T>,
    phi: &[DenominatorFunction<T>],
    alpha: &[T],
    t: T,
    y: &[T],
    dt: T,
) -> Result<(Vec<T>, bool)> {
    let n = system.dim();
    check_dim(n, y.len())?;
    check_dim(n, phi.len())?;
    check_dim(n, alpha.len())?;
    check_positive(y)?;
    let (f, g) = system.f_g(t, y);
    check_finite(&f)?;
    check_finite(&g)?;
    let out: Vec<T> = (0..n)
        .map(|i| {
            let ph = phi[i].eval(dt, t, y, g[i]);
            // F + αgy regrouped as f + (α - 1)gy to avoid cancelling y g.
            let lift = f[i] + (alpha[i] - T::one()) * g[i] * y[i];
            (y[i] + ph * lift) / (T::one() + ph * alpha[i] * g[i])
        })
        .collect();
    check_finite(&out)?;
    let flag = out.iter().any(|&v| !(v > T::zero()));
    Ok((out, flag))
}

/// `y + dt F(t, y)`.
pub fn step_euler<T: Real, F>(rhs: &F, t: T, y: &[T], dt: T) -> Result<Vec<T>>
where
    F: Fn(T, &[T], &mut [T]) + ?Sized,
{
    let mut k = vec![T::zero(); y.len()];
    rhs(t, y, &mut k);
    let out: Vec<T> = y.iter().zip(&k).map(|(&yi, &ki)| yi + dt * ki).collect();
    check_finite(&out)?;
    Ok(out)
}

/// Solves `z = y + dt/2 (F(t, y) + F(t + dt, z))`.
///
/// Newton with a finite-difference Jacobian from the Euler predictor; when
/// Newton stalls, damped fixed-point iteration from the same start.
pub fn step_trapezoidal<T: Real, F>(rhs: &F, t: T, y: &[T], dt: T) -> Result<Vec<T>>
where
    F: Fn(T, &[T], &mut [T]) + ?Sized,
{
    let n = y.len();
    let half = dt / T::lit(2.0);
    let t1 = t + dt;
    let mut f0 = vec![T::zero(); n];
    rhs(t, y, &mut f0);
    check_finite(&f0)?;
    let base: Vec<T> = (0..n).map(|i| y[i] + half * f0[i]).collect();
    let predictor: Vec<T> = (0..n).map(|i| y[i] + dt * f0[i]).collect();

    let residual = |z: &[T], r: &mut [T]| {
        rhs(t1, z, r);
        for i in 0..n {
            r[i] = z[i] - base[i] - half * r[i];
        }
    };
    let converged = |z: &[T], r: &[T]| {
        let scale = z.iter().fold(T::one(), |m, v| m.max(v.abs()));
        norm_inf(r) <= T::lit(TRAPEZOIDAL_TOL) * scale
    };

    let mut z = predictor.clone();
    let mut r = vec![T::zero(); n];
    let mut last = T::infinity();
    for _ in 0..TRAPEZOIDAL_MAX_ITER {
        residual(&z, &mut r);
        if !r.iter().all(|v| v.is_finite()) {
            break;
        }
        if converged(&z, &r) {
            return Ok(z);
        }
        last = norm_inf(&r);
        let jac = fd_jacobian(&residual, &z, &r);
        let Some(delta) = lu_solve(jac, r.clone()) else { break };
        for i in 0..n {
            z[i] = z[i] - delta[i];
        }
    }

    let omega = T::lit(0.5);
    let mut z = predictor;
    for _ in 0..TRAPEZOIDAL_MAX_ITER {
        residual(&z, &mut r);
        if !r.iter().all(|v| v.is_finite()) {
            break;
        }
        if converged(&z, &r) {
            return Ok(z);
        }
        last = last.min(norm_inf(&r));
        for i in 0..n {
            z[i] = z[i] - omega * r[i];
        }
    }
    Err(NsfdError::NoConvergence {
        iterations: TRAPEZOIDAL_MAX_ITER,
        residual: last.as_f64(),
    })
}

fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn fd_jacobian<T: Real>(res: &dyn Fn(&[T], &mut [T]), z: &[T], r0: &[T]) -> Vec<Vec<T>> {
    let n = z.len();
    let mut jac = vec![vec![T::zero(); n]; n];
    let mut probe = z.to_vec();
    let mut r = vec![T::zero(); n];
    let eps = T::epsilon().sqrt();
    for j in 0..n {
        let h = eps * T::one().max(z[j].abs());
        probe[j] = z[j] + h;
        res(&probe, &mut r);
        probe[j] = z[j];
        for i in 0..n {
            jac[i][j] = (r[i] - r0[i]) / h;
        }
    }
    jac
}

/// Gaussian elimination with partial pivoting; `None` when singular.
#[allow(clippy::needless_range_loop)]
fn lu_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if !(a[p][k].abs() > T::zero()) {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] = a[i][j] - m * a[k][j];
            }
            b[i] = b[i] - m * b[k];
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let s = (k + 1..n).fold(b[k], |s, j| s - a[k][j] * x[j]);
        x[k] = s / a[k][k];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

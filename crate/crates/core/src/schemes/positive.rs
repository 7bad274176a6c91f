use crate::denominator::SchemeConfig;
use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::system::DecomposedSystem;

pub(crate) fn check_positive<T: Real>(y: &[T]) -> Result<()> {
    match y.iter().position(|&v| !(v > T::zero())) {
        Some(index) => Err(NsfdError::NonPositiveState {
            index,
            value: y[index].as_f64(),
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_finite<T: Real>(y: &[T]) -> Result<()> {
    match y.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(NsfdError::NonFiniteStep { index }),
        None => Ok(()),
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(NsfdError::DimensionMismatch { expected, got })
    }
}

/// One step of the second-order positive scheme,
///
/// ```text
/// y_i ← (y_i + φ_i f_i + φ_i ϕ_i A_i) / (1 + φ_i g_i + φ_i ϕ_i B_i / y_i)
/// ```
///
/// with every term evaluated at `(t, y)`. Numerator and denominator are sums
/// of nonnegative terms, so the result is positive for any `dt > 0`.
pub fn step_second_order_positive<T: Real>(
    system: &DecomposedSystem<T>,
    config: &SchemeConfig<T>,
    t: T,
    y: &[T],
    dt: T,
) -> Result<Vec<T>> {
    let n = system.dim();
    check_dim(n, y.len())?;
    check_dim(n, config.dim())?;
    check_positive(y)?;

    let (f, g) = system.f_g(t, y);
    check_finite(&f)?;
    check_finite(&g)?;
    let (a, b) = config.split.eval(t, y);
    positive_update(config, t, y, dt, &f, &g, &a, &b)
}

/// The explicit update given precomputed `f, g, A, B`.
#[allow(clippy::too_many_arguments)]
fn positive_update<T: Real>(
    config: &SchemeConfig<T>,
    t: T,
    y: &[T],
    dt: T,
    f: &[T],
    g: &[T],
    a: &[T],
    b: &[T],
) -> Result<Vec<T>> {
    check_finite(a)?;
    check_finite(b)?;
    for (which, part) in [("A", a), ("B", b)] {
        if let Some(index) = part.iter().position(|&v| v < T::zero()) {
            return Err(NsfdError::NegativeCorrection {
                which,
                index,
                value: part[index].as_f64(),
            });
        }
    }
    let out: Vec<T> = (0..y.len())
        .map(|i| {
            let ph = config.phi[i].eval(dt, t, y, g[i]);
            let pw = ph * config.varphi[i].eval(dt);
            (y[i] + ph * f[i] + pw * a[i]) / (T::one() + ph * g[i] + pw * b[i] / y[i])
        })
        .collect();
    check_finite(&out)?;
    Ok(out)
}

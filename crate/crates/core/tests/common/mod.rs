#![allow(dead_code)]

//! Reference integrators independent of the crate's schemes.

use nsfd::sir::SirProblem;

pub type Rhs<'a> = &'a dyn Fn(f64, &[f64], &mut [f64]);

pub fn rk4_step(rhs: Rhs, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    rhs(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    rhs(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    rhs(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    rhs(t + h, &tmp, &mut k4);
    (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// `n` RK4 steps of size `h`, returning every state.
pub fn rk4(rhs: Rhs, t0: f64, y0: &[f64], h: f64, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(y0.to_vec());
    for k in 0..n {
        let next = rk4_step(rhs, t0 + k as f64 * h, &out[k], h);
        out.push(next);
    }
    out
}

/// The SIR right-hand side written out directly from the rates.
pub fn sir_rhs(p: &SirProblem<f64>) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |t, y, out| {
        let (b, c) = ((p.b)(t), (p.c)(t));
        let n = y[0] + y[1];
        out[0] = -b * y[0] * y[1] / n;
        out[1] = b * y[0] * y[1] / n - c * y[1];
    }
}

/// `∂F/∂t + J F` by central differences with step `1e-6 · max(1, |x|)`.
pub fn fd_directional_derivative(rhs: Rhs, t: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut f = vec![0.0; n];
    rhs(t, y, &mut f);
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let ht = 1e-6 * t.abs().max(1.0);
    rhs(t + ht, y, &mut plus);
    rhs(t - ht, y, &mut minus);
    let mut v: Vec<f64> = (0..n).map(|i| (plus[i] - minus[i]) / (2.0 * ht)).collect();
    let mut probe = y.to_vec();
    for j in 0..n {
        let h = 1e-6 * y[j].abs().max(1.0);
        probe[j] = y[j] + h;
        rhs(t, &probe, &mut plus);
        probe[j] = y[j] - h;
        rhs(t, &probe, &mut minus);
        probe[j] = y[j];
        for i in 0..n {
            v[i] += (plus[i] - minus[i]) / (2.0 * h) * f[j];
        }
    }
    v
}

/// `u'' = -λ e^u` from `(0, s)` to `L/2` with RK4; returns `(u, u')` per node.
pub fn bratu_rk4(lambda: f64, s: f64, half: f64, n: usize) -> Vec<Vec<f64>> {
    let rhs = move |_: f64, y: &[f64], out: &mut [f64]| {
        out[0] = y[1];
        out[1] = -lambda * y[0].exp();
    };
    rk4(&rhs, 0.0, &[0.0, s], half / n as f64, n)
}

/// Bisection on `u'(L/2) = 0` using [`bratu_rk4`]; returns the slope and the
/// `u` values on the half grid.
pub fn bratu_reference(lambda: f64, length: f64, n: usize, bracket: (f64, f64)) -> (f64, Vec<f64>) {
    let res = |s: f64| bratu_rk4(lambda, s, length / 2.0, n).last().unwrap()[1];
    let (mut lo, mut hi) = bracket;
    assert!(res(lo) < 0.0 && res(hi) > 0.0);
    while hi - lo > 1e-15 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if res(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let u = bratu_rk4(lambda, s, length / 2.0, n).into_iter().map(|y| y[0]).collect();
    (s, u)
}

//! Method of lines for `u_t + C(u) u_x = D(u) u_xx + f(u)` on `[a, b]` with
//! Dirichlet data, producing a decomposed interior system the positive
//! schemes can integrate.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::denominator::{DenominatorFunction, PerturbationFunction, SchemeConfig};
use crate::error::{NsfdError, Result};
use crate::scalar::Real;
use crate::schemes::{integrate, step_euler, step_trapezoidal, OneStep, Stepper, StepperKind};
use crate::system::{DecomposedSystem, ScalarFn, SplitRule};

/// `(u₊, u₋)` with `u = u₊ - u₋`, both nonnegative.
#[derive(Clone)]
pub struct ScalarSplit<T: Real> {
    pub plus: ScalarFn<T>,
    pub minus: ScalarFn<T>,
}

impl<T: Real> ScalarSplit<T> {
    pub fn new<P, M>(plus: P, minus: M) -> Self
    where
        P: Fn(T) -> T + Send + Sync + 'static,
        M: Fn(T) -> T + Send + Sync + 'static,
    {
        ScalarSplit {
            plus: Arc::new(plus),
            minus: Arc::new(minus),
        }
    }

    /// Pointwise split of `c(u)` with `rule`.
    pub fn with_rule(c: ScalarFn<T>, rule: SplitRule) -> Self {
        let c2 = c.clone();
        ScalarSplit {
            plus: Arc::new(move |u| rule.split(c(u)).0),
            minus: Arc::new(move |u| rule.split(c2(u)).1),
        }
    }

    pub fn constant(c: T) -> Self {
        let (p, m) = SplitRule::Abs.split(c);
        Self::new(move |_| p, move |_| m)
    }
}

/// `f(u) = production(u) - u · loss_rate(u)`, both parts nonnegative for `u > 0`.
#[derive(Clone)]
pub struct ReactionSplit<T: Real> {
    pub production: ScalarFn<T>,
    pub loss_rate: ScalarFn<T>,
}

impl<T: Real> ReactionSplit<T> {
    pub fn new<P, G>(production: P, loss_rate: G) -> Self
    where
        P: Fn(T) -> T + Send + Sync + 'static,
        G: Fn(T) -> T + Send + Sync + 'static,
    {
        ReactionSplit {
            production: Arc::new(production),
            loss_rate: Arc::new(loss_rate),
        }
    }
}

#[derive(Clone)]
pub struct PdeProblem<T: Real> {
    pub advection: ScalarFn<T>,
    pub diffusion: ScalarFn<T>,
    pub reaction: ScalarFn<T>,
    pub advection_split: ScalarSplit<T>,
    pub diffusion_split: ScalarSplit<T>,
    pub reaction_split: ReactionSplit<T>,
    /// `u(a, t)`.
    pub left: ScalarFn<T>,
    /// `u(b, t)`.
    pub right: ScalarFn<T>,
    pub u0: ScalarFn<T>,
    /// `(a, b)`.
    pub interval: (T, T),
    pub t_end: T,
}

impl<T: Real> fmt::Debug for PdeProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("interval", &self.interval)
            .field("t_end", &self.t_end)
            .finish_non_exhaustive()
    }
}

/// Number of sample points per axis in [`check_positivity_preconditions`].
pub const PRECONDITION_SAMPLES: usize = 101;

/// Sign conditions `C(0), D(0), f(0) ≥ 0`, nonnegative boundary data on
/// `[0, T]` and nonnegative initial data on `[a, b]`, sampled on uniform
/// grids. Returns one message per violated condition.
pub fn check_positivity_preconditions<T: Real>(problem: &PdeProblem<T>) -> Vec<String> {
    let mut out = Vec::new();
    let z = T::zero();
    for (name, v) in [
        ("C(0)", (problem.advection)(z)),
        ("D(0)", (problem.diffusion)(z)),
        ("f(0)", (problem.reaction)(z)),
    ] {
        if !(v >= z) {
            out.push(format!("{name} = {v} is negative"));
        }
    }
    let n = PRECONDITION_SAMPLES - 1;
    let frac = |k: usize| T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
    for (name, bc) in [("a(t)", &problem.left), ("b(t)", &problem.right)] {
        if let Some(t) = (0..=n).map(|k| frac(k) * problem.t_end).find(|&t| !(bc(t) >= z)) {
            out.push(format!("boundary {name} negative at t={t}"));
        }
    }
    let (a, b) = problem.interval;
    if let Some(x) = (0..=n).map(|k| a + frac(k) * (b - a)).find(|&x| !((problem.u0)(x) >= z)) {
        out.push(format!("initial data u0 negative at x={x}"));
    }
    out
}

/// Uniform grid with the assembled interior system.
#[derive(Clone)]
pub struct MolGrid<T: Real> {
    pub m: usize,
    pub dx: T,
    /// `x_0, …, x_M`.
    pub nodes: Vec<T>,
    /// Interior system of dimension `M - 1`.
    pub system: DecomposedSystem<T>,
    problem: PdeProblem<T>,
}

impl<T: Real> fmt::Debug for MolGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MolGrid").field("m", &self.m).field("dx", &self.dx).finish_non_exhaustive()
    }
}

impl<T: Real> MolGrid<T> {
    /// The semi-discrete right-hand side computed directly from `C`, `D`, `f`.
    pub fn direct_rhs(&self, t: T, u: &[T], out: &mut [T]) {
        direct_rhs(&self.problem, self.dx, t, u, out)
    }

    /// Interior values of the initial profile.
    pub fn initial_state(&self) -> Vec<T> {
        self.nodes[1..self.m].iter().map(|&x| (self.problem.u0)(x)).collect()
    }

    /// Interior state padded with the boundary values at `t`.
    pub fn with_boundary(&self, t: T, u: &[T]) -> Vec<T> {
        let mut row = Vec::with_capacity(self.m + 1);
        row.push((self.problem.left)(t));
        row.extend_from_slice(u);
        row.push((self.problem.right)(t));
        row
    }

    pub fn problem(&self) -> &PdeProblem<T> {
        &self.problem
    }
}

fn neighbours<T: Real>(p: &PdeProblem<T>, t: T, u: &[T], i: usize) -> (T, T) {
    let left = if i == 0 { (p.left)(t) } else { u[i - 1] };
    let right = if i + 1 == u.len() { (p.right)(t) } else { u[i + 1] };
    (left, right)
}

fn direct_rhs<T: Real>(p: &PdeProblem<T>, dx: T, t: T, u: &[T], out: &mut [T]) {
    let dx2 = dx * dx;
    let two = T::lit(2.0);
    for i in 0..u.len() {
        let (l, r) = neighbours(p, t, u, i);
        let ui = u[i];
        out[i] = -(p.advection)(ui) * (ui - l) / dx + (p.diffusion)(ui) * (r - two * ui + l) / dx2 + (p.reaction)(ui);
    }
}

/// Probes per assembly for the reconstruction identity.
pub const ASSEMBLY_PROBES: usize = 50;
const ASSEMBLY_SEED: u64 = 0x6d6f_6c67;

/// Builds `F_i` and `G_i` on `M` subintervals so that `F - u ∘ G` equals the
/// direct discretization
///
/// ```text
/// u_i' = -C(u_i)(u_i - u_{i-1})/Δx + D(u_i)(u_{i+1} - 2u_i + u_{i-1})/Δx² + f(u_i)
/// ```
///
/// with `F_i = C₋u_i/Δx + C₊u_{i-1}/Δx + D₊(u_{i+1} + u_{i-1})/Δx² + 2D₋u_i/Δx² + f₊`
/// and `G_i = C₊/Δx + C₋u_{i-1}/(u_iΔx) + 2D₊/Δx² + D₋(u_{i+1} + u_{i-1})/(u_iΔx²) + g`.
/// Boundary data is evaluated at the current time.
///
/// The identity is checked at seeded random positive states and fails with
/// [`NsfdError::SplitInconsistent`] when some split does not reconstruct its
/// coefficient.
pub fn assemble_mol<T: Real>(problem: &PdeProblem<T>, m: usize) -> Result<MolGrid<T>> {
    if m < 2 {
        return Err(NsfdError::ParamOutOfRange(format!("need M >= 2 subintervals, got {m}")));
    }
    let (a, b) = problem.interval;
    if !(b > a) {
        return Err(NsfdError::ParamOutOfRange(format!("empty interval [{a}, {b}]")));
    }
    let mt = T::from_usize(m).unwrap();
    let dx = (b - a) / mt;
    let nodes: Vec<T> = (0..=m).map(|k| a + T::from_usize(k).unwrap() * (b - a) / mt).collect();

    let two = T::lit(2.0);
    let dx2 = dx * dx;
    let pf = problem.clone();
    let f = move |t: T, u: &[T], out: &mut [T]| {
        for i in 0..u.len() {
            let (l, r) = neighbours(&pf, t, u, i);
            let ui = u[i];
            let c = &pf.advection_split;
            let d = &pf.diffusion_split;
            out[i] = (c.minus)(ui) * ui / dx
                + (c.plus)(ui) * l / dx
                + (d.plus)(ui) * (r + l) / dx2
                + two * (d.minus)(ui) * ui / dx2
                + (pf.reaction_split.production)(ui);
        }
    };
    let pg = problem.clone();
    let g = move |t: T, u: &[T], out: &mut [T]| {
        for i in 0..u.len() {
            let (l, r) = neighbours(&pg, t, u, i);
            let ui = u[i];
            let c = &pg.advection_split;
            let d = &pg.diffusion_split;
            out[i] = (c.plus)(ui) / dx
                + (c.minus)(ui) * l / (ui * dx)
                + two * (d.plus)(ui) / dx2
                + (d.minus)(ui) * (r + l) / (ui * dx2)
                + (pg.reaction_split.loss_rate)(ui);
        }
    };
    let grid = MolGrid {
        m,
        dx,
        nodes,
        system: DecomposedSystem::from_fns(m - 1, f, g),
        problem: problem.clone(),
    };
    check_assembly(&grid)?;
    Ok(grid)
}

fn check_assembly<T: Real>(grid: &MolGrid<T>) -> Result<()> {
    let n = grid.m - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(ASSEMBLY_SEED);
    let mut direct = vec![T::zero(); n];
    let mut worst = 0.0f64;
    for _ in 0..ASSEMBLY_PROBES {
        let t = T::lit(rng.gen_range(0.0..=1.0)) * grid.problem.t_end;
        let u: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(0.05..1.5))).collect();
        let (f, g) = grid.system.f_g(t, &u);
        grid.direct_rhs(t, &u, &mut direct);
        for i in 0..n {
            let scale = T::one() + f[i].abs() + (u[i] * g[i]).abs();
            let r = ((f[i] - u[i] * g[i] - direct[i]).abs() / scale).as_f64();
            if !(r <= 1e-12) {
                worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
            }
        }
    }
    if worst > 0.0 {
        return Err(NsfdError::SplitInconsistent { residual: worst });
    }
    Ok(())
}

/// Named instances of the model class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NamedPde<T> {
    /// `f = λ₁u - λ₂u²`, `C = 0`.
    Fisher { lambda1: T, lambda2: T },
    /// `C(u) = u`, `f = u(1 - u)`.
    FisherNonlinearAdvection,
    /// `f = αu + βuᵐ`, `C = 0`.
    Kpp { alpha: T, beta: T, m: T },
    /// `f = u(1 - u)(α - u)`, `C = 0`.
    FitzHughNagumo { alpha: T },
}

impl<T: Real> NamedPde<T> {
    pub fn fisher() -> Self {
        Self::Fisher {
            lambda1: T::one(),
            lambda2: T::one(),
        }
    }

    pub fn kpp() -> Self {
        Self::Kpp {
            alpha: T::one(),
            beta: -T::one(),
            m: T::lit(2.0),
        }
    }

    pub fn fitzhugh_nagumo() -> Self {
        Self::FitzHughNagumo { alpha: T::lit(0.25) }
    }

    /// Parses `fisher`, `fisher-advection`, `kpp` or `fhn` with default parameters.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "fisher" => Ok(Self::fisher()),
            "fisher-advection" | "fisher-nonlinear-advection" => Ok(Self::FisherNonlinearAdvection),
            "kpp" => Ok(Self::kpp()),
            "fhn" | "fitzhugh-nagumo" => Ok(Self::fitzhugh_nagumo()),
            other => Err(NsfdError::ParamOutOfRange(format!("unknown PDE model '{other}'"))),
        }
    }
}

/// Domain, diffusion coefficient and data shared by the named models.
#[derive(Clone)]
pub struct PdeSetup<T: Real> {
    /// Constant `D > 0`.
    pub diffusion: T,
    pub interval: (T, T),
    pub t_end: T,
    /// Constant boundary values `(a(t), b(t))`.
    pub boundary: (T, T),
    pub u0: ScalarFn<T>,
}

impl<T: Real> Default for PdeSetup<T> {
    /// `D = 10⁻³` on `[0, 1]`, `T = 1`, boundaries `0.1`, `u0 = 0.1 + 0.5 sin²(πx)`.
    fn default() -> Self {
        PdeSetup {
            diffusion: T::lit(1e-3),
            interval: (T::zero(), T::one()),
            t_end: T::one(),
            boundary: (T::lit(0.1), T::lit(0.1)),
            u0: Arc::new(|x: T| {
                let s = (T::PI() * x).sin();
                T::lit(0.1) + T::lit(0.5) * s * s
            }),
        }
    }
}

/// Builds the model with its default reaction split: negative monomials go
/// into `u · g`, the rest into the production term.
pub fn named_pde<T: Real>(model: NamedPde<T>, setup: &PdeSetup<T>) -> Result<PdeProblem<T>> {
    let bad = |msg: String| Err(NsfdError::ParamOutOfRange(msg));
    if !(setup.diffusion > T::zero()) {
        return bad(format!("diffusion must be > 0, got {}", setup.diffusion));
    }
    let zero = T::zero();
    let one = T::one();
    let mut advection: ScalarFn<T> = Arc::new(move |_| zero);
    let mut advection_split = ScalarSplit::constant(zero);
    let (reaction, reaction_split): (ScalarFn<T>, ReactionSplit<T>) = match model {
        NamedPde::Fisher { lambda1, lambda2 } => {
            if !(lambda1 > zero && lambda2 > zero) {
                return bad(format!("Fisher needs λ1, λ2 > 0, got {lambda1}, {lambda2}"));
            }
            (
                Arc::new(move |u| lambda1 * u - lambda2 * u * u),
                ReactionSplit::new(move |u| lambda1 * u, move |u| lambda2 * u),
            )
        }
        NamedPde::FisherNonlinearAdvection => {
            advection = Arc::new(|u| u);
            advection_split = ScalarSplit::new(|u: T| u.max(T::zero()), |u: T| (-u).max(T::zero()));
            (Arc::new(move |u| u * (one - u)), ReactionSplit::new(|u| u, |u| u))
        }
        NamedPde::Kpp { alpha, beta, m } => {
            if !(m.is_finite() && m > zero) || m == one {
                return bad(format!("KPP needs m > 0 and m != 1, got {m}"));
            }
            if !(alpha.is_finite() && beta.is_finite()) {
                return bad("KPP coefficients must be finite".into());
            }
            let (ap, am) = SplitRule::Abs.split(alpha);
            let (bp, bm) = SplitRule::Abs.split(beta);
            (
                Arc::new(move |u: T| alpha * u + beta * u.powf(m)),
                ReactionSplit::new(move |u: T| ap * u + bp * u.powf(m), move |u: T| am + bm * u.powf(m - one)),
            )
        }
        NamedPde::FitzHughNagumo { alpha } => {
            if !(alpha >= zero && alpha <= one) {
                return bad(format!("FitzHugh-Nagumo needs 0 <= α <= 1, got {alpha}"));
            }
            (
                Arc::new(move |u| u * (one - u) * (alpha - u)),
                ReactionSplit::new(move |u| alpha * u + u * u * u, move |u| (one + alpha) * u),
            )
        }
    };
    let d = setup.diffusion;
    let (bl, br) = setup.boundary;
    Ok(PdeProblem {
        advection,
        diffusion: Arc::new(move |_| d),
        reaction,
        advection_split,
        diffusion_split: ScalarSplit::constant(d),
        reaction_split,
        left: Arc::new(move |_| bl),
        right: Arc::new(move |_| br),
        u0: setup.u0.clone(),
        interval: setup.interval,
        t_end: setup.t_end,
    })
}

/// `φ`, `ϕ` and split rule applied uniformly to every grid node.
#[derive(Clone, Debug)]
pub struct PdeScheme<T: Real> {
    pub phi: DenominatorFunction<T>,
    pub varphi: PerturbationFunction<T>,
    pub rule: SplitRule,
}

impl<T: Real> PdeScheme<T> {
    /// Bounded `φ` with `ϕ = 1 - e^{-20Δt}`; stays bounded for large steps.
    pub fn bounded() -> Self {
        PdeScheme {
            phi: DenominatorFunction::bounded(),
            varphi: PerturbationFunction::ExpSaturating(T::lit(20.0)),
            rule: SplitRule::Abs,
        }
    }

    /// `φ = Δt`, for the first-order scheme.
    pub fn linear() -> Self {
        PdeScheme {
            phi: DenominatorFunction::Linear,
            varphi: PerturbationFunction::Identity,
            rule: SplitRule::Abs,
        }
    }
}

/// `u(x_i, t_k)` including the boundary columns.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeField<T: Real> {
    pub x: Vec<T>,
    pub t: Vec<T>,
    /// One row per time level, `M + 1` values each.
    pub u: Vec<Vec<T>>,
}

impl<T: Real> PdeField<T> {
    /// Smallest value over interior nodes and all time levels.
    pub fn interior_min(&self) -> T {
        self.u
            .iter()
            .flat_map(|r| &r[1..r.len() - 1])
            .fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn interior_max(&self) -> T {
        self.u
            .iter()
            .flat_map(|r| &r[1..r.len() - 1])
            .fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn last(&self) -> &[T] {
        self.u.last().expect("field holds the initial row")
    }
}

/// Assembles the grid and integrates the interior system to `problem.t_end`.
///
/// The positive schemes need strictly positive interior data; trivial zero
/// data is only accepted by Euler and trapezoidal.
pub fn solve_pde<T: Real>(
    problem: &PdeProblem<T>,
    m: usize,
    kind: StepperKind<T>,
    scheme: &PdeScheme<T>,
    dt: T,
) -> Result<PdeField<T>> {
    let violated = check_positivity_preconditions(problem);
    if !violated.is_empty() {
        return Err(NsfdError::ParamOutOfRange(violated.join("; ")));
    }
    let grid = assemble_mol(problem, m)?;
    let config = if matches!(kind, StepperKind::SecondOrderPositive) {
        SchemeConfig::uniform(&grid.system, scheme.phi.clone(), scheme.varphi, scheme.rule)?
    } else {
        let n = grid.system.dim();
        SchemeConfig::new(
            vec![scheme.phi.clone(); n],
            vec![PerturbationFunction::Identity; n],
            crate::system::Splitting::zero(vec![T::one(); n]),
        )?
    };
    let traj = match kind {
        StepperKind::Euler | StepperKind::Trapezoidal => {
            let direct = DirectStepper {
                grid: &grid,
                trapezoidal: kind == StepperKind::Trapezoidal,
            };
            integrate(&direct, T::zero(), &grid.initial_state(), dt, problem.t_end)?
        }
        _ => {
            let stepper = Stepper::new(kind, grid.system.clone(), config)?;
            integrate(&stepper, T::zero(), &grid.initial_state(), dt, problem.t_end)?
        }
    };
    let u = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| grid.with_boundary(t, s))
        .collect();
    Ok(PdeField {
        x: grid.nodes.clone(),
        t: traj.times,
        u,
    })
}

/// Classical steppers on the direct right-hand side, which stays defined at `u = 0`.
struct DirectStepper<'a, T: Real> {
    grid: &'a MolGrid<T>,
    trapezoidal: bool,
}

impl<T: Real> OneStep<T> for DirectStepper<'_, T> {
    fn dim(&self) -> usize {
        self.grid.m - 1
    }

    fn step(&self, t: T, y: &[T], dt: T) -> Result<Vec<T>> {
        let rhs = |t: T, u: &[T], out: &mut [T]| self.grid.direct_rhs(t, u, out);
        if self.trapezoidal {
            step_trapezoidal(&rhs, t, y, dt)
        } else {
            step_euler(&rhs, t, y, dt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        let p = named_pde(NamedPde::<f64>::fisher(), &PdeSetup::default()).unwrap();
        assert!(check_positivity_preconditions(&p).is_empty());
        let mut bad = p.clone();
        bad.left = Arc::new(|_| -1.0);
        let v = check_positivity_preconditions(&bad);
        assert_eq!(v.len(), 1);
        assert!(v[0].starts_with("boundary a(t) negative at t="));
        let fhn = named_pde(NamedPde::<f64>::fitzhugh_nagumo(), &PdeSetup::default()).unwrap();
        assert_eq!((fhn.reaction)(0.0), 0.0);
        assert!(check_positivity_preconditions(&fhn).is_empty());
    }

    #[test]
    fn pure_diffusion_stencil() {
        let mut p = named_pde(NamedPde::<f64>::kpp(), &PdeSetup::default()).unwrap();
        p.diffusion = Arc::new(|_| 1.0);
        p.diffusion_split = ScalarSplit::constant(1.0);
        p.reaction = Arc::new(|_| 0.0);
        p.reaction_split = ReactionSplit::new(|_| 0.0, |_| 0.0);
        p.left = Arc::new(|_| 0.0);
        p.right = Arc::new(|_| 0.0);
        let grid = assemble_mol(&p, 3).unwrap();
        let u = [0.3, 0.7];
        let dx2 = (1.0f64 / 3.0).powi(2);
        let rhs = grid.system.rhs_vec(0.0, &u);
        assert!((rhs[0] - (0.7 - 0.6) / dx2).abs() < 1e-12);
        assert!((rhs[1] - (-1.4 + 0.3) / dx2).abs() < 1e-12);
    }

    #[test]
    fn advection_adds_loss() {
        let p = named_pde(NamedPde::<f64>::FisherNonlinearAdvection, &PdeSetup::default()).unwrap();
        let grid = assemble_mol(&p, 4).unwrap();
        let (_, g) = grid.system.f_g(0.0, &[0.5, 0.5, 0.5]);
        let dx = 0.25;
        let expected = 0.5 / dx + 2.0 * 1e-3 / (dx * dx) + 0.5;
        assert!((g[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_split_is_rejected() {
        let mut p = named_pde(NamedPde::<f64>::fisher(), &PdeSetup::default()).unwrap();
        p.reaction_split = ReactionSplit::new(|u| 2.0 * u, |u| u);
        let err = assemble_mol(&p, 8).unwrap_err();
        assert!(matches!(err, NsfdError::SplitInconsistent { .. }));
    }

    #[test]
    fn parameter_ranges() {
        let s = PdeSetup::<f64>::default();
        assert!(named_pde(NamedPde::FitzHughNagumo { alpha: 1.5 }, &s).is_err());
        assert!(named_pde(NamedPde::Fisher { lambda1: 0.0, lambda2: 1.0 }, &s).is_err());
        assert!(named_pde(NamedPde::Kpp { alpha: 1.0, beta: 1.0, m: 1.0 }, &s).is_err());
        let kpp = named_pde(NamedPde::Kpp { alpha: 1.0, beta: 1.0, m: 2.0 }, &s).unwrap();
        assert_eq!((kpp.reaction_split.loss_rate)(0.7), 0.0);
        assert!(assemble_mol(&kpp, 1).is_err());
    }

    #[test]
    fn fitzhugh_nagumo_roots() {
        let p = named_pde(NamedPde::FitzHughNagumo { alpha: 0.25 }, &PdeSetup::default()).unwrap();
        for r in [0.0f64, 0.25, 1.0] {
            let split = (p.reaction_split.production)(r) - r * (p.reaction_split.loss_rate)(r);
            assert!(split.abs() < 1e-15 && (p.reaction)(r).abs() < 1e-15);
        }
    }
}

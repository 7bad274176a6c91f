//! Positivity-preserving nonstandard finite difference (NSFD) integrators for
//! non-autonomous systems `y' = f(t, y) - y ∘ g(t, y)`.
//!
//! The crate provides a second-order scheme that stays positive for every
//! step size, the first-order NSFD baselines it is compared against, and
//! three application front ends: an SIR model with variable rates, a
//! method-of-lines discretization of reaction-advection-diffusion equations
//! and a shooting solver for symmetric two-point boundary value problems.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use nsfd::{DenominatorFunction, PerturbationFunction, SchemeConfig, SplitRule, System};
//! use nsfd::schemes::step_second_order_positive;
//!
//! // y' = -y written as f = 0, g = 1.
//! let sys = System::from_fns(1, |_, _, f| f[0] = 0.0, |_, _, g| g[0] = 1.0);
//! let cfg = SchemeConfig::uniform(
//!     &sys,
//!     DenominatorFunction::Exponential,
//!     PerturbationFunction::Identity,
//!     SplitRule::Abs,
//! )
//! .unwrap();
//! let y1 = step_second_order_positive(&sys, &cfg, 0.0, &[1.0], 0.1).unwrap();
//! assert!((y1[0] - (-0.1f64).exp()).abs() < 5e-4);
//! ```

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod cli;
pub mod denominator;
pub mod diagnostics;
pub mod error;
pub mod pde;
pub mod scalar;
pub mod schemes;
pub mod sir;
pub mod system;

pub use denominator::{Coefficient, DenominatorFunction, PerturbationFunction, SchemeConfig};
pub use error::{NsfdError, Result};
pub use scalar::Real;
pub use schemes::{integrate, integrate_final, OneStep, Stepper, StepperKind, Trajectory};
pub use system::{
    decompose_with_shift, directional_derivative, split_default, splitting_from_v, DecomposedSystem,
    SplitRule, Splitting,
};

pub type System = DecomposedSystem<f64>;
pub type Split = Splitting<f64>;
pub type Config = SchemeConfig<f64>;
pub type Denominator = DenominatorFunction<f64>;
pub type Perturbation = PerturbationFunction<f64>;
pub type Traj = Trajectory<f64>;
pub type Sir = sir::SirProblem<f64>;
pub type Pde = pde::PdeProblem<f64>;
pub type Bvp = bvp::BvpProblem<f64>;




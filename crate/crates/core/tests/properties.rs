mod common;

use std::sync::Arc;

use nsfd::bvp::{solve_bvp, BvpProblem};
use nsfd::schemes::{step_nsfd1, step_nsfd3};
use nsfd::sir::{build_named_scheme, sir_correction_split, sir_directional_derivative, NamedSirScheme, SirProblem, SirStepper};
use nsfd::system::VecFn;
use nsfd::{
    decompose_with_shift, splitting_from_v, Denominator, OneStep, Perturbation, SplitRule, Stepper, StepperKind,
    System,
};
use proptest::prelude::*;

const LARGE_DTS: [f64; 4] = [1e-3, 1.0, 10.0, 100.0];

fn sir_steppers() -> Vec<SirStepper<f64>> {
    let p = SirProblem::benchmark();
    NamedSirScheme::all()
        .into_iter()
        .map(|s| build_named_scheme(s, &p).unwrap())
        .collect()
}

/// Three species with state-dependent production and loss.
fn chain_system(k: [f64; 3]) -> System {
    System::from_fns(
        3,
        move |t, y, f| {
            f[0] = k[0] * (1.0 + t.sin().powi(2)) * y[2];
            f[1] = k[1] * y[0] * y[0];
            f[2] = k[2] * y[1] / (1.0 + y[1]);
        },
        move |_, y, g| {
            g[0] = k[1] * y[0];
            g[1] = k[2] / (1.0 + y[1]);
            g[2] = k[0] * (1.0 + y[2]);
        },
    )
}

fn state() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..10.0, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn split_parts_reconstruct(u in -50.0f64..50.0) {
        for rule in [SplitRule::Abs, SplitRule::Quadratic] {
            let (p, m) = rule.split(u);
            prop_assert!(p >= 0.0 && m >= 0.0);
            prop_assert!((p - m - u).abs() <= 1e-12 * (1.0 + u * u));
        }
        let (p, m) = SplitRule::Exponential.split(u.max(-0.5));
        prop_assert!(p >= 0.0 && m > 0.0);
    }

    #[test]
    fn denominators_are_positive(dt in 1e-6f64..1e3, g in 0.0f64..10.0, t in 0.0f64..5.0) {
        for phi in [Denominator::Linear, Denominator::Quadratic, Denominator::Exponential, Denominator::bounded()] {
            // The exponential kind overflows to +inf once 2gΔt exceeds the exponent range.
            let v = phi.eval(dt, t, &[1.0], g);
            prop_assert!(v > 0.0 && !v.is_nan(), "{phi:?} at dt={dt}, g={g}: {v}");
        }
        for varphi in [Perturbation::Identity, Perturbation::ExpSaturating(5.0)] {
            prop_assert!(varphi.eval(dt) > 0.0);
        }
    }

    #[test]
    fn sir_steps_stay_positive(y in state(), t in 0.0f64..100.0) {
        for st in sir_steppers() {
            for dt in LARGE_DTS {
                let next = st.step(t, &y, dt).unwrap();
                prop_assert!(next.iter().all(|&v| v > 0.0 && v.is_finite()), "dt={dt}: {next:?}");
            }
        }
    }

    #[test]
    fn generic_positive_step(
        y in prop::collection::vec(1e-6f64..10.0, 3),
        k in prop::array::uniform3(0.1f64..5.0),
        t in 0.0f64..10.0,
    ) {
        let sys = chain_system(k);
        for kind in [StepperKind::SecondOrderPositive, StepperKind::Nsfd1, StepperKind::Nsfd2] {
            let cfg = nsfd::SchemeConfig::uniform(&sys, Denominator::Quadratic, Perturbation::ExpSaturating(2.0), SplitRule::Abs).unwrap();
            let st = Stepper::new(kind.clone(), sys.clone(), cfg).unwrap();
            for dt in LARGE_DTS {
                let next = st.step(t, &y, dt).unwrap();
                prop_assert!(next.iter().all(|&v| v > 0.0), "{kind:?} dt={dt}: {next:?}");
            }
        }
    }

    #[test]
    fn nsfd3_with_unit_alpha_is_nsfd1(y in state(), t in 0.0f64..10.0, dt in 1e-4f64..50.0) {
        let sys = nsfd::sir::sir_decomposition_state_g(&SirProblem::benchmark());
        let phi = vec![Denominator::Exponential; 2];
        let a = step_nsfd1(&sys, &phi, t, &y, dt).unwrap();
        let (b, flag) = step_nsfd3(&sys, &phi, &[1.0, 1.0], t, &y, dt).unwrap();
        prop_assert!(!flag);
        prop_assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn shift_decomposition_reconstructs(y in state(), t in 0.0f64..10.0, a in 0.5f64..20.0) {
        let p = SirProblem::<f64>::benchmark();
        let rhs: VecFn<f64> = Arc::new(move |t, y, out| p.rhs(t, y, out));
        let sys = decompose_with_shift(rhs.clone(), vec![a, a]).unwrap();
        let mut want = [0.0; 2];
        rhs(t, &y, &mut want);
        let got = sys.rhs_vec(t, &y);
        for i in 0..2 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-12 * (1.0 + a * y[i]));
        }
    }

    #[test]
    fn analytic_v_matches_finite_differences(y in prop::collection::vec(0.05f64..5.0, 2), t in 0.0f64..5.0) {
        let p = SirProblem::<f64>::benchmark();
        let mut exact = [0.0; 2];
        sir_directional_derivative(&p)(t, &y, &mut exact);
        let fd = common::fd_directional_derivative(&common::sir_rhs(&p), t, &y);
        for i in 0..2 {
            let scale = exact[i].abs().max(1e-3);
            prop_assert!((exact[i] - fd[i]).abs() <= 1e-6 * scale, "{exact:?} vs {fd:?}");
        }
    }

    #[test]
    fn correction_split_is_consistent(y in state(), t in 0.0f64..5.0, kappa in 0.2f64..10.0) {
        let p = SirProblem::<f64>::benchmark();
        let sys = nsfd::sir::sir_decomposition_state_g(&p);
        let split = splitting_from_v(&sys, vec![kappa; 2], SplitRule::Abs).unwrap();
        let (a, b) = split.eval(t, &y);
        let mut v = [0.0; 2];
        sir_directional_derivative(&p)(t, &y, &mut v);
        for i in 0..2 {
            prop_assert!(a[i] >= 0.0 && b[i] >= 0.0);
            let want = v[i] / (2.0 * kappa);
            prop_assert!((a[i] - b[i] - want).abs() <= 1e-10 * want.abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn closed_form_split_matches_finite_differences(y in prop::collection::vec(0.05f64..5.0, 2), t in 0.0f64..5.0) {
        let p = SirProblem::<f64>::benchmark();
        let split = sir_correction_split(&p, [1.0, 5.0], SplitRule::Abs, SplitRule::Abs).unwrap();
        let (a, b) = split.eval(t, &y);
        let fd = common::fd_directional_derivative(&common::sir_rhs(&p), t, &y);
        for (i, kappa) in [1.0, 5.0].into_iter().enumerate() {
            prop_assert!(a[i] >= 0.0 && b[i] >= 0.0);
            let want = fd[i] / (2.0 * kappa);
            prop_assert!((a[i] - b[i] - want).abs() <= 1e-6 * want.abs().max(1e-3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bvp_solution_is_symmetric(lambda in 0.1f64..2.0) {
        let res = solve_bvp(&BvpProblem::bratu(lambda, 1.0), 1e-3, (0.05, 2.0), 1e-12).unwrap();
        let u = &res.full_solution.u;
        for k in 0..u.len() {
            prop_assert_eq!(u[k], u[u.len() - 1 - k]);
        }
        prop_assert!(u[1..u.len() - 1].iter().all(|&v| v > 0.0));
        prop_assert!(res.residual < 1e-10);
    }
}

mod common;

use nsfd::bvp::{shoot, solve_bvp, solve_bvp_with, BvpProblem, Regularization};
use nsfd::NsfdError;

#[test]
fn bratu_matches_reference_shooting() {
    let p = BvpProblem::<f64>::bratu(1.0, 1.0);
    let res = solve_bvp(&p, 1e-4, (0.1, 2.0), 1e-12).unwrap();
    assert!(res.residual < 1e-10, "residual {}", res.residual);

    let (s_ref, u_ref) = common::bratu_reference(1.0, 1.0, 500_000, (0.1, 2.0));
    assert!((res.s_star - s_ref).abs() < 1e-6, "{} vs {s_ref}", res.s_star);
    let half = &res.full_solution.u[..=5000];
    let err = half
        .iter()
        .enumerate()
        .map(|(k, u)| (u - u_ref[100 * k]).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "max error {err}");

    let sol = &res.full_solution;
    assert_eq!(sol.u[2500], sol.u[7500]);
    assert!(sol.u[1..sol.u.len() - 1].iter().all(|&u| u > 0.0));
    let peak = sol.u.iter().cloned().fold(0.0, f64::max);
    assert_eq!(peak, sol.u[5000]);
}

#[test]
fn linear_residual_is_second_order() {
    let lambda = 4.0f64;
    let p = BvpProblem::<f64>::linear(lambda, 1.0);
    let s = 0.7;
    let exact = s * (lambda.sqrt() * 0.5).cos();
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| (shoot(&p, Regularization::default(), s, dt).unwrap().residual - exact).abs())
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((1.8..2.3).contains(&rate), "rate {rate} from {errs:?}");
    }
}

#[test]
fn eigenvalue_case_is_degenerate() {
    let p = BvpProblem::<f64>::linear(std::f64::consts::PI.powi(2), 1.0);
    match solve_bvp(&p, 1e-3, (0.1, 2.0), 1e-10) {
        Err(NsfdError::NoBracket { .. }) => {}
        Ok(res) => assert!(res.residual < 1e-10),
        Err(e) => panic!("unexpected {e}"),
    }
}

#[test]
fn epsilon_mode_finds_the_same_branch() {
    let p = BvpProblem::<f64>::bratu(1.0, 1.0);
    let shifted = solve_bvp(&p, 1e-3, (0.1, 2.0), 1e-12).unwrap();
    let eps = solve_bvp_with(&p, Regularization::Epsilon(1e-12), 1e-3, (0.1, 2.0), 1e-12).unwrap();
    assert!((eps.s_star - shifted.s_star).abs() < 1e-2);
}

#[test]
fn upper_branch_needs_its_own_bracket() {
    let p = BvpProblem::<f64>::bratu(1.0, 1.0);
    let lower = solve_bvp(&p, 1e-3, (0.1, 2.0), 1e-12).unwrap();
    let upper = solve_bvp(&p, 1e-3, (5.0, 20.0), 1e-12).unwrap();
    assert!(upper.s_star > lower.s_star + 1.0);
    let peak = |r: &nsfd::bvp::ShootingResult<f64>| *r.half_traj.states.last().map(|y| &y[0]).unwrap();
    assert!(peak(&upper) > peak(&lower));
}

#[test]
fn deterministic_slope() {
    let p = BvpProblem::<f64>::bratu(1.0, 1.0);
    let a = solve_bvp(&p, 1e-3, (0.1, 2.0), 1e-12).unwrap();
    let b = solve_bvp(&p, 1e-3, (0.1, 2.0), 1e-12).unwrap();
    assert_eq!(a.s_star.to_bits(), b.s_star.to_bits());
}

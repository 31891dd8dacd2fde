mod common;

use common::{brute_force, dual_objective, dual_signs_ok, random_milp};
use gridflex_core::milp::{solve_lp, solve_mip, Branching, SolveOptions, SolveStatus, VarKind};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn exact(branching: Branching) -> SolveOptions {
    SolveOptions {
        mip_gap: 0.0,
        branching,
        ..SolveOptions::default()
    }
}

#[test]
fn relaxations_satisfy_strong_duality() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut solved = 0;
    for _ in 0..400 {
        let mut m = random_milp(&mut rng, 8, 25, false);
        for v in &mut m.variables {
            v.kind = VarKind::Continuous;
        }
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal, "feasible by construction");
        assert!(m.max_violation(&s.values) < 1e-7);
        let y = s.duals.as_ref().unwrap();
        assert!(dual_signs_ok(&m, y, 1e-7));
        let dual = dual_objective(&m, y, 1e-9).expect("dual feasible");
        let gap = (s.objective - dual).abs();
        assert!(gap <= 1e-6 * s.objective.abs().max(1.0), "gap {gap}");
        solved += 1;
    }
    assert_eq!(solved, 400);
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = StdRng::seed_from_u64(5);
    for case in 0..150 {
        let tight = case % 3 == 0;
        let m = random_milp(&mut rng, 9, 20, tight);
        let oracle = brute_force(&m);
        for branching in [Branching::PseudoCost, Branching::MostFractional] {
            let s = solve_mip(&m, &exact(branching)).unwrap();
            match oracle {
                None => assert_eq!(s.status, SolveStatus::Infeasible, "case {case}"),
                Some(z) => {
                    assert_eq!(s.status, SolveStatus::Optimal, "case {case}");
                    let tol = 1e-6 * z.abs().max(1.0);
                    assert!((s.objective - z).abs() <= tol, "case {case}: {} vs {z}", s.objective);
                    assert!(m.max_violation(&s.values) < 1e-6);
                    for (v, x) in m.variables.iter().zip(&s.values) {
                        if v.kind == VarKind::Binary {
                            assert!(*x == 0.0 || *x == 1.0);
                        }
                    }
                }
            }
        }
    }
}

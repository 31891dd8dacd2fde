//! Structural properties of solved schedules on randomized small systems.

mod fixtures;

use fixtures::*;
use gridflex_core::facts::{self, FlowDirection};
use gridflex_core::grid::{Fuel, GridCase, HOURS};
use gridflex_core::metrics;
use gridflex_core::milp::NoClock;
use gridflex_core::renewables::ScenarioSet;
use gridflex_core::suc;
use proptest::prelude::*;

/// Most the triangle can deliver to bus 3. Line 1-3 carries two thirds of
/// A's output and one third of B's; unit C sits at the load.
fn deliverable(rating13: f64) -> f64 {
    let (a, b) = if 3.0 * rating13 <= 200.0 {
        (0.0, 3.0 * rating13)
    } else {
        (((3.0 * rating13 - 200.0) / 2.0).min(200.0), 200.0)
    };
    a + b + 60.0
}

/// Triangle with committed-unit economics, random load shape and limits.
/// `fill` is the peak load as a fraction of what the network can deliver.
fn system(fill: f64, swing: f64, rating13: f64, cost_b: f64) -> GridCase {
    let load = fill * deliverable(rating13) / (1.0 + swing);
    let mut c = triangle();
    c.lines[1].rating = rating13;
    c.generators[1].segments[0].marginal_cost = cost_b;
    c.generators[1].deploy_cost = 1.5 * cost_b;
    for g in &mut c.generators {
        g.p_min = 10.0;
        g.segments[0].width = g.p_max - g.p_min;
        g.no_load_cost = 40.0;
        g.startup_cost = 200.0;
        g.min_up = 2;
        g.min_down = 2;
        g.ramp_up = 2.0;
        g.ramp_down = 2.0;
    }
    c.generators.push(flexible("C", 3, Fuel::Oil, 60.0, 121.0));
    c.load_curve = (0..HOURS)
        .map(|t| load * (1.0 + swing * ((t as f64) * std::f64::consts::PI / 12.0).sin()))
        .collect();
    c
}

fn with_solar(c: &GridCase, mw: f64, profile: &[f64]) -> (GridCase, ScenarioSet) {
    let mut c = c.clone();
    c.renewables = vec![solar("pv", 2, mw)];
    let scen = scenarios(&["pv"], |t, s| vec![mw * profile[(2 * t + s) % profile.len()]], 2);
    (c, scen)
}

fn gap_tol(a: f64) -> f64 {
    2e-6 * a.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn solved_schedules_pass_the_audit_and_settle(
        fill in 0.3f64..0.9,
        swing in 0.0f64..0.3,
        rating in 40.0f64..150.0,
        cost_b in 15.0f64..60.0,
        mw in 0.0f64..120.0,
        profile in prop::collection::vec(0.0f64..=1.0, 5),
    ) {
        let (c, scen) = with_solar(&system(fill, swing, rating, cost_b), mw, &profile);
        let sol = solve(&c, &scen, &FlowDirection::default(), true);
        let audit = suc::audit(&c, &scen, &FlowDirection::default(), &sol);
        prop_assert!(audit.max_violation <= 1e-6, "{audit:?}");
        prop_assert!(close(sol.objective, sol.breakdown.total(), 1e-6));
        let rent = metrics::congestion_rent(&sol, &c, &scen).unwrap();
        prop_assert!(metrics::rent_identity_error(&rent) <= 1e-4, "{rent:?}");
        let curtailed = metrics::curtailment_total(&sol, &scen);
        prop_assert!(curtailed <= metrics::available_renewable_energy(&c, &scen) + 1e-6);
        for g in 0..c.generators.len() {
            for t in 0..HOURS {
                let prev = t > 0 && sol.commitment[g][t - 1];
                let diff = sol.commitment[g][t] as i32 - prev as i32;
                prop_assert_eq!(diff, sol.startup[g][t] as i32 - sol.shutdown[g][t] as i32);
            }
        }
    }

    #[test]
    fn free_renewables_never_raise_cost(
        fill in 0.3f64..0.9,
        rating in 40.0f64..150.0,
        mw in 1.0f64..120.0,
        profile in prop::collection::vec(0.0f64..=1.0, 5),
    ) {
        let base = system(fill, 0.2, rating, 30.0);
        let none = ScenarioSet::without_renewables(2);
        let without = solve(&base, &none, &FlowDirection::default(), true);
        let (c, scen) = with_solar(&base, mw, &profile);
        let with = solve(&c, &scen, &FlowDirection::default(), true);
        prop_assert!(with.objective <= without.objective + gap_tol(without.objective));
    }

    #[test]
    fn consistent_devices_never_raise_cost(
        fill in 0.3f64..0.9,
        rating in 40.0f64..150.0,
        cost_b in 15.0f64..60.0,
        line in 0usize..3,
    ) {
        let base = system(fill, 0.2, rating, cost_b);
        let scen = ScenarioSet::without_renewables(1);
        let id = base.lines[line].id.clone();
        let equipped = base.with_facts(&[id.clone()]).unwrap();
        let presolve = solve(&base, &scen, &FlowDirection::default(), true);
        let dirs = facts::directions_from_solution(&equipped, &scen, &presolve, &[id]).unwrap();
        prop_assume!(facts::directions_consistent(&equipped, &presolve, &dirs));
        let with = suc::solve(&equipped, &scen, &dirs, &exact_options(false), &NoClock).unwrap();
        prop_assert!(with.objective <= presolve.objective + gap_tol(presolve.objective));
        prop_assert!(suc::audit(&equipped, &scen, &dirs, &with).max_violation <= 1e-6);
    }
}

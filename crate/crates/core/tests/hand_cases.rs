//! Small networks whose optimal schedules and prices are known in closed form.

mod fixtures;

use fixtures::*;
use gridflex_core::facts::{self, FlowDirection};
use gridflex_core::grid::{Fuel, HOURS};
use gridflex_core::metrics;
use gridflex_core::milp::{NoClock, SolveStatus};
use gridflex_core::renewables::ScenarioSet;
use gridflex_core::suc::{self, BuildOptions};

fn angle_flow(case: &gridflex_core::grid::GridCase, sol: &suc::SucSolution, l: usize, t: usize, s: usize) -> f64 {
    let line = &case.lines[l];
    let a = case.bus_index(line.from_bus).unwrap();
    let b = case.bus_index(line.to_bus).unwrap();
    sol.theta[a][t][s] - sol.theta[b][t][s]
}

#[test]
fn single_unit_variable_count() {
    let c = case(&[1.0], vec![], vec![flexible("g", 1, Fuel::Coal, 100.0, 20.0)], 50.0);
    let model = suc::build(&c, &ScenarioSet::without_renewables(1), &FlowDirection::default(), &BuildOptions::default()).unwrap();
    // Per hour: u, v, w, P, one segment, P^ru, P^rd. No angles, flows or curtailment.
    assert_eq!(model.instance.variables.len(), HOURS * (3 + 2 + 2));
    assert_eq!(model.instance.num_binaries(), HOURS * 3);
}

#[test]
fn triangle_dispatch_matches_hand_solution() {
    let c = triangle();
    let sol = solve(&c, &ScenarioSet::without_renewables(1), &FlowDirection::default(), true);
    assert_eq!(sol.status, SolveStatus::Optimal);
    // Line 1-3 binds: 2/3 PA + 1/3 PB = 80 with PA + PB = 150.
    for t in 0..HOURS {
        assert!((sol.dispatch[0][t] - 90.0).abs() < 1e-6, "PA {}", sol.dispatch[0][t]);
        assert!((sol.dispatch[1][t] - 60.0).abs() < 1e-6, "PB {}", sol.dispatch[1][t]);
        let f: Vec<f64> = (0..3).map(|l| sol.flow[l][t][0]).collect();
        assert!((f[0] - 10.0).abs() < 1e-6 && (f[1] - 80.0).abs() < 1e-6 && (f[2] - 70.0).abs() < 1e-6);
    }
    assert!(close(sol.objective, 24.0 * (10.0 * 90.0 + 30.0 * 60.0), 1e-9));
    assert!(close(sol.objective, sol.breakdown.total(), 1e-6));
    let audit = suc::audit(&c, &ScenarioSet::without_renewables(1), &FlowDirection::default(), &sol);
    assert!(audit.max_violation <= 1e-6, "{audit:?}");
}

#[test]
fn fixed_susceptance_flows_follow_angles() {
    let c = triangle();
    let sol = solve(&c, &ScenarioSet::without_renewables(1), &FlowDirection::default(), true);
    for (l, line) in c.lines.iter().enumerate() {
        for t in 0..HOURS {
            let expected = c.s_base * line.susceptance_nominal * angle_flow(&c, &sol, l, t, 0);
            assert!((sol.flow[l][t][0] - expected).abs() <= 1e-6);
        }
    }
}

#[test]
fn congested_triangle_prices() {
    let c = triangle();
    let scen = ScenarioSet::without_renewables(1);
    let sol = solve(&c, &scen, &FlowDirection::default(), true);
    let lambda = sol.nodal_duals.as_ref().unwrap();
    // One more MW at bus 3 needs PA -1 and PB +2 to keep line 1-3 at its limit.
    for t in 0..HOURS {
        assert!((lambda[0][t][0] - 10.0).abs() < 1e-6);
        assert!((lambda[1][t][0] - 30.0).abs() < 1e-6);
        assert!((lambda[2][t][0] - 50.0).abs() < 1e-6);
    }
    let rent = metrics::congestion_rent(&sol, &c, &scen).unwrap();
    let per_hour = 50.0 * 150.0 - (10.0 * 90.0 + 30.0 * 60.0);
    assert!(close(rent.congestion_rent, 24.0 * per_hour, 1e-6));
    assert!(metrics::rent_identity_error(&rent) < 1e-6);
    let by_line: Vec<f64> = rent.lines.iter().map(|l| l.rent / 24.0).collect();
    assert!((by_line[0] - 200.0).abs() < 1e-4);
    assert!((by_line[1] - 3200.0).abs() < 1e-4);
    assert!((by_line[2] - 1400.0).abs() < 1e-4);
}

#[test]
fn two_bus_binding_line_rent() {
    let c = case(
        &[0.0, 1.0],
        vec![line("L", 1, 2, 10.0, 100.0)],
        vec![
            flexible("gas", 1, Fuel::Gas, 200.0, 14.0),
            flexible("coal", 2, Fuel::Coal, 200.0, 22.0),
        ],
        150.0,
    );
    c.validate().unwrap();
    let scen = ScenarioSet::without_renewables(1);
    let sol = solve(&c, &scen, &FlowDirection::default(), true);
    let lambda = sol.nodal_duals.as_ref().unwrap();
    assert!((lambda[0][0][0] - 14.0).abs() < 1e-6);
    assert!((lambda[1][0][0] - 22.0).abs() < 1e-6);
    let rent = metrics::congestion_rent(&sol, &c, &scen).unwrap();
    assert!(close(rent.congestion_rent, 24.0 * 800.0, 1e-6));
    assert!(close(rent.line_rent_total, 24.0 * 800.0, 1e-6));
}

#[test]
fn single_bus_has_no_rent() {
    let c = case(
        &[1.0],
        vec![],
        vec![
            flexible("gas", 1, Fuel::Gas, 100.0, 14.0),
            flexible("coal", 1, Fuel::Coal, 100.0, 22.0),
        ],
        150.0,
    );
    let scen = ScenarioSet::without_renewables(1);
    let sol = solve(&c, &scen, &FlowDirection::default(), true);
    let rent = metrics::congestion_rent(&sol, &c, &scen).unwrap();
    assert!(rent.congestion_rent.abs() < 1e-6 * rent.load_payment);
    assert!(rent.line_rent_total.abs() < 1e-9);
}

#[test]
fn single_scenario_needs_no_recourse() {
    let c = triangle();
    let sol = solve(&c, &ScenarioSet::without_renewables(1), &FlowDirection::default(), true);
    for g in 0..c.generators.len() {
        for t in 0..HOURS {
            assert_eq!(sol.deploy_up[g][t][0].abs() + sol.deploy_down[g][t][0].abs(), 0.0);
        }
    }
    assert!(sol.breakdown.deployment.abs() < 1e-9);
}

/// Independent recomputation of the device rent from its closed form.
fn rent_per_hour(rating: f64, s_base: f64, r: f64, n: i32) -> f64 {
    let s = rating * rating / s_base;
    let unit = 153.75 + s * (-0.713 + s * 0.0015);
    let factor = 1.0 / (1..=n).map(|k| (1.0 + r).powi(-k)).sum::<f64>();
    unit * s * 1000.0 * factor / 8760.0
}

#[test]
fn facts_relax_the_congested_line() {
    let c = triangle().with_facts(&["L13".into()]).unwrap();
    c.validate().unwrap();
    let scen = ScenarioSet::without_renewables(1);
    let dirs = forward(&["L13"]);
    let sol = solve(&c, &scen, &dirs, false);
    // At b_13 = B/1.4 the binding limit gives 1050 = 17x + 12y with x + y = 70.
    for t in 0..HOURS {
        assert!((sol.dispatch[1][t] - 28.0).abs() < 1e-5, "PB {}", sol.dispatch[1][t]);
        let d = angle_flow(&c, &sol, 1, t, 0);
        let b = sol.flow[1][t][0] / (c.s_base * d);
        assert!((b - 10.0 / 1.4).abs() < 1e-6, "b {b}");
    }
    assert!(close(sol.objective, 24.0 * (122.0 * 10.0 + 28.0 * 30.0), 1e-9));
    assert!(suc::audit(&c, &scen, &dirs, &sol).max_violation <= 1e-6);

    let charged = solve(&c, &scen, &dirs, true);
    let rent = 24.0 * rent_per_hour(80.0, 100.0, 0.05, 15);
    assert!(close(charged.breakdown.facts, rent, 1e-9));
    assert!(close(charged.objective, sol.objective + rent, 1e-9));
}

#[test]
fn only_device_rent_remains_without_dispatch() {
    // Free solar covers the load, so no unit runs and the objective is the rent.
    let mut c = case(
        &[1.0, 0.0],
        vec![line("L", 1, 2, 10.0, 175.0)],
        vec![flexible("coal", 2, Fuel::Coal, 100.0, 22.0)],
        10.0,
    );
    c.renewables = vec![solar("pv", 1, 50.0)];
    let c = c.with_facts(&["L".into()]).unwrap();
    let scen = scenarios(&["pv"], |_, _| vec![50.0], 1);
    let sol = solve(&c, &scen, &forward(&["L"]), true);
    assert!(sol.commitment[0].iter().all(|&u| !u));
    let expected = 24.0 * rent_per_hour(175.0, 100.0, 0.05, 15);
    assert!(close(sol.objective, expected, 1e-9), "{} vs {expected}", sol.objective);
    assert!(close(sol.breakdown.facts, expected, 1e-12));
}

#[test]
fn predicted_directions_match_radial_flow() {
    // One unit at bus 1, all load at bus 3; L31 is declared against the flow.
    let mut c = case(
        &[0.0, 0.0, 1.0],
        vec![
            line("L12", 1, 2, 10.0, 500.0),
            line("L23", 2, 3, 10.0, 500.0),
            line("L31", 3, 1, 5.0, 500.0),
        ],
        vec![flexible("g", 1, Fuel::Gas, 300.0, 10.0)],
        120.0,
    );
    c.facts.enabled_lines = vec!["L12".into(), "L23".into(), "L31".into()];
    c.validate().unwrap();
    let scen = ScenarioSet::without_renewables(2);
    let (dirs, presolve) = suc::predict_flow_directions(&c, &scen, &exact_options(true), &NoClock).unwrap();
    assert_eq!(dirs.get("L12"), Some(true));
    assert_eq!(dirs.get("L23"), Some(true));
    assert_eq!(dirs.get("L31"), Some(false));
    assert!(facts::directions_consistent(&c, &presolve, &dirs));
    // Path 1-2-3 has series susceptance 5, equal to L31: the load splits evenly.
    assert!((presolve.flow[0][0][0] - 60.0).abs() < 1e-6);
    assert!((presolve.flow[2][0][0] + 60.0).abs() < 1e-6);
}

#[test]
fn zero_weighted_flow_predicts_forward() {
    let c = triangle();
    let mut sol = blank_solution(2, 3, 3, 0, HOURS, 2);
    let scen = ScenarioSet::without_renewables(2);
    // L12 carries +5 and -5 in the two scenarios; L23 carries -1 throughout.
    for t in 0..HOURS {
        sol.flow[0][t] = vec![5.0, -5.0];
        sol.flow[2][t] = vec![-1.0, -1.0];
    }
    let ids = ["L12".to_string(), "L13".to_string(), "L23".to_string()];
    let dirs = facts::directions_from_solution(&c, &scen, &sol, &ids).unwrap();
    assert_eq!(dirs.get("L12"), Some(true));
    assert_eq!(dirs.get("L13"), Some(true));
    assert_eq!(dirs.get("L23"), Some(false));
}

#[test]
fn island_curtailment() {
    // 60 MW of solar at an unloaded bus behind a 10 MW line, in hour 0 only.
    let mut c = case(
        &[1.0, 0.0],
        vec![line("L", 1, 2, 10.0, 10.0)],
        vec![flexible("coal", 1, Fuel::Coal, 100.0, 22.0)],
        40.0,
    );
    c.renewables = vec![solar("pv", 2, 60.0)];
    c.validate().unwrap();
    let scen = scenarios(&["pv"], |t, _| vec![if t == 0 { 60.0 } else { 0.0 }], 1);
    let sol = solve(&c, &scen, &FlowDirection::default(), true);
    assert!((metrics::curtailment_total(&sol, &scen) - 50.0).abs() < 1e-6);
    assert!((metrics::available_renewable_energy(&c, &scen) - 60.0).abs() < 1e-12);

    let bare = case(&[1.0], vec![], vec![flexible("coal", 1, Fuel::Coal, 100.0, 22.0)], 40.0);
    let none = ScenarioSet::without_renewables(1);
    let sol = solve(&bare, &none, &FlowDirection::default(), true);
    assert_eq!(metrics::curtailment_total(&sol, &none), 0.0);
}

#[test]
fn decoded_objective_matches_breakdown_with_commitment_costs() {
    let mut c = triangle();
    for g in &mut c.generators {
        g.p_min = 20.0;
        g.segments[0].width = g.p_max - g.p_min;
        g.no_load_cost = 50.0;
        g.startup_cost = 400.0;
        g.min_up = 3;
        g.min_down = 3;
        g.ramp_up = 1.0;
        g.ramp_down = 1.0;
    }
    c.load_curve = (0..HOURS).map(|t| 100.0 + 40.0 * ((t as f64) / 4.0).sin().abs()).collect();
    let scen = ScenarioSet::without_renewables(1);
    let sol = solve(&c, &scen, &FlowDirection::default(), true);
    assert!(close(sol.objective, sol.breakdown.total(), 1e-6));
    for g in 0..2 {
        for t in 0..HOURS {
            let prev = t > 0 && sol.commitment[g][t - 1];
            let diff = sol.commitment[g][t] as i32 - prev as i32;
            assert_eq!(diff, sol.startup[g][t] as i32 - sol.shutdown[g][t] as i32);
            assert!(!(sol.startup[g][t] && sol.shutdown[g][t]));
        }
    }
    assert!(suc::audit(&c, &scen, &FlowDirection::default(), &sol).max_violation <= 1e-6);
}

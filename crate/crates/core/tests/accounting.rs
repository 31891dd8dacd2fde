//! Emission, curtailment and rent accounting on hand-built schedules.

mod fixtures;

use fixtures::*;
use gridflex_core::grid::{Fuel, GridCase, HOURS};
use gridflex_core::metrics::{self, MetricsError};
use gridflex_core::renewables::{Scenario, ScenarioSet};
use proptest::prelude::*;

/// One-hour case on one bus; the metrics read shapes off the inputs.
fn one_hour(fuels: &[Fuel], load: f64) -> GridCase {
    let gens = fuels
        .iter()
        .enumerate()
        .map(|(i, &f)| flexible(&format!("g{i}"), 1, f, 500.0, f.generation_cost()))
        .collect();
    let mut c = case(&[1.0], vec![], gens, load);
    c.load_curve = vec![load];
    c
}

fn one_hour_scenarios(probs: &[f64]) -> ScenarioSet {
    ScenarioSet {
        resource_ids: Vec::new(),
        hours: vec![probs
            .iter()
            .map(|&p| Scenario {
                probability: p,
                power: Vec::new(),
            })
            .collect()],
    }
}

#[test]
fn coal_hour() {
    let c = one_hour(&[Fuel::Coal], 100.0);
    let mut sol = blank_solution(1, 0, 1, 0, 1, 1);
    sol.dispatch[0][0] = 100.0;
    let e = metrics::emissions(&sol, &c, &one_hour_scenarios(&[1.0])).unwrap();
    assert!((e.total_lb - 202_700.0).abs() < 1e-9);
    assert!((e.total_mlb - 0.2027).abs() < 1e-12);
}

#[test]
fn gas_expectation_over_two_scenarios() {
    let c = one_hour(&[Fuel::Gas], 100.0);
    let mut sol = blank_solution(1, 0, 1, 0, 1, 2);
    sol.dispatch[0][0] = 100.0;
    sol.deploy_up[0][0][1] = 100.0;
    let e = metrics::emissions(&sol, &c, &one_hour_scenarios(&[0.5, 0.5])).unwrap();
    assert!((e.total_lb - 1169.0 * 150.0).abs() < 1e-9);
    assert!((e.units[0].energy_mwh - 150.0).abs() < 1e-12);
}

#[test]
fn carbon_free_fleet_emits_nothing() {
    let c = one_hour(&[Fuel::Nuclear, Fuel::Hydro], 300.0);
    let mut sol = blank_solution(2, 0, 1, 0, 1, 1);
    sol.dispatch[0][0] = 200.0;
    sol.dispatch[1][0] = 100.0;
    assert_eq!(metrics::emissions(&sol, &c, &one_hour_scenarios(&[1.0])).unwrap().total_lb, 0.0);
}

#[test]
fn negative_output_is_an_audit_error() {
    let c = one_hour(&[Fuel::Coal], 100.0);
    let mut sol = blank_solution(1, 0, 1, 0, 1, 1);
    sol.dispatch[0][0] = 10.0;
    sol.deploy_down[0][0][0] = 11.0;
    let err = metrics::emissions(&sol, &c, &one_hour_scenarios(&[1.0])).unwrap_err();
    assert!(matches!(err, MetricsError::NegativeOutput { .. }));
}

#[test]
fn rent_needs_prices() {
    let c = one_hour(&[Fuel::Coal], 100.0);
    let sol = blank_solution(1, 0, 1, 0, 1, 1);
    assert_eq!(
        metrics::congestion_rent(&sol, &c, &one_hour_scenarios(&[1.0])).unwrap_err(),
        MetricsError::MissingDuals
    );
}

#[test]
fn settled_two_bus_hour() {
    // 100 MW at $14 from bus 1 over a full line, 50 MW at $22 at bus 2.
    let mut c = case(
        &[0.0, 1.0],
        vec![line("L", 1, 2, 10.0, 100.0)],
        vec![
            flexible("gas", 1, Fuel::Gas, 200.0, 14.0),
            flexible("coal", 2, Fuel::Coal, 200.0, 22.0),
        ],
        150.0,
    );
    c.load_curve = vec![150.0];
    let mut sol = blank_solution(2, 1, 2, 0, 1, 1);
    sol.dispatch[0][0] = 100.0;
    sol.dispatch[1][0] = 50.0;
    sol.flow[0][0][0] = 100.0;
    sol.nodal_duals = Some(vec![vec![vec![14.0]], vec![vec![22.0]]]);
    let r = metrics::congestion_rent(&sol, &c, &one_hour_scenarios(&[1.0])).unwrap();
    assert!((r.load_payment - 3300.0).abs() < 1e-9);
    assert!((r.generation_revenue - 2500.0).abs() < 1e-9);
    assert!((r.congestion_rent - 800.0).abs() < 1e-9);
    assert!((r.line_rent_total - 800.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn emissions_scale_linearly(
        outputs in prop::collection::vec(0.0f64..500.0, 3),
        ups in prop::collection::vec(0.0f64..50.0, 6),
        alpha in 0.0f64..10.0,
    ) {
        let c = one_hour(&[Fuel::Coal, Fuel::Oil, Fuel::Gas], 100.0);
        let scen = one_hour_scenarios(&[0.25, 0.75]);
        let mut sol = blank_solution(3, 0, 1, 0, 1, 2);
        for g in 0..3 {
            sol.dispatch[g][0] = outputs[g];
            sol.deploy_up[g][0] = vec![ups[2 * g], ups[2 * g + 1]];
        }
        let base = metrics::emissions(&sol, &c, &scen).unwrap();
        let parts: f64 = base.units.iter().map(|u| u.emissions_lb).sum();
        prop_assert!((parts - base.total_lb).abs() <= 1e-9 * base.total_lb.max(1.0));
        for g in 0..3 {
            sol.dispatch[g][0] *= alpha;
            for x in &mut sol.deploy_up[g][0] {
                *x *= alpha;
            }
        }
        let scaled = metrics::emissions(&sol, &c, &scen).unwrap();
        prop_assert!((scaled.total_lb - alpha * base.total_lb).abs() <= 1e-9 * scaled.total_lb.max(1.0));
    }

    #[test]
    fn curtailment_is_linear_and_bounded(
        avail in prop::collection::vec(0.0f64..300.0, HOURS * 2),
        frac in prop::collection::vec(0.0f64..=1.0, HOURS * 2),
    ) {
        let mut c = case(&[1.0], vec![], vec![flexible("g", 1, Fuel::Coal, 100.0, 22.0)], 50.0);
        c.renewables = vec![solar("pv", 1, 300.0)];
        let scen = scenarios(&["pv"], |t, s| vec![avail[2 * t + s]], 2);
        let mut sol = blank_solution(1, 0, 1, 1, HOURS, 2);
        for t in 0..HOURS {
            for s in 0..2 {
                sol.curtailment[0][t][s] = frac[2 * t + s] * avail[2 * t + s];
            }
        }
        let total = metrics::curtailment_total(&sol, &scen);
        let available = metrics::available_renewable_energy(&c, &scen);
        prop_assert!(total <= available * (1.0 + 1e-12) + 1e-12);
        for x in sol.curtailment[0].iter_mut().flatten() {
            *x *= 2.0;
        }
        prop_assert!((metrics::curtailment_total(&sol, &scen) - 2.0 * total).abs() <= 1e-9 * total.max(1.0));
    }
}

#![allow(dead_code)]

use gridflex_core::facts::FlowDirection;
use gridflex_core::grid::{
    Bus, FactsConfig, Fuel, Generator, GridCase, Line, RenewableKind, RenewableUnit, Segment, HOURS,
};
use gridflex_core::milp::{NoClock, SolveOptions};
use gridflex_core::renewables::{Scenario, ScenarioSet};
use gridflex_core::suc::{self, BuildOptions, SucOptions, SucSolution};

/// A unit with no commitment costs and unrestrictive ramps, so its dispatch
/// is a plain economic-dispatch decision.
pub fn flexible(id: &str, bus: u32, fuel: Fuel, p_max: f64, cost: f64) -> Generator {
    Generator {
        id: id.into(),
        bus,
        fuel,
        p_min: 0.0,
        p_max,
        min_up: 1,
        min_down: 1,
        ramp_up: 100.0,
        ramp_down: 100.0,
        no_load_cost: 0.0,
        startup_cost: 0.0,
        shutdown_cost: 0.0,
        segments: vec![Segment {
            width: p_max,
            marginal_cost: cost,
        }],
        deploy_cost: 1.5 * cost,
        emission_rate: fuel.emission_rate(),
    }
}

pub fn line(id: &str, from: u32, to: u32, b: f64, rating: f64) -> Line {
    Line {
        id: id.into(),
        from_bus: from,
        to_bus: to,
        susceptance_nominal: b,
        rating,
        facts_candidate: true,
    }
}

pub fn case(shares: &[f64], lines: Vec<Line>, generators: Vec<Generator>, load_mw: f64) -> GridCase {
    GridCase {
        buses: shares
            .iter()
            .enumerate()
            .map(|(i, &s)| Bus {
                id: i as u32 + 1,
                load_share: s,
            })
            .collect(),
        lines,
        generators,
        renewables: Vec::new(),
        s_base: 100.0,
        load_curve: vec![load_mw; HOURS],
        facts: FactsConfig::default(),
        renewable_sites: Vec::new(),
    }
}

/// Triangle 1-2-3 with equal susceptances, a $10 unit at bus 1, a $30 unit
/// at bus 2 and 150 MW of load at bus 3. Line 1-3 is limited to 80 MW.
pub fn triangle() -> GridCase {
    case(
        &[0.0, 0.0, 1.0],
        vec![
            line("L12", 1, 2, 10.0, 500.0),
            line("L13", 1, 3, 10.0, 80.0),
            line("L23", 2, 3, 10.0, 500.0),
        ],
        vec![
            flexible("A", 1, Fuel::Gas, 200.0, 10.0),
            flexible("B", 2, Fuel::Coal, 200.0, 30.0),
        ],
        150.0,
    )
}

pub fn solar(id: &str, bus: u32, rated: f64) -> RenewableUnit {
    RenewableUnit {
        id: id.into(),
        bus,
        kind: RenewableKind::Solar,
        rated_power: rated,
        curtail_cost: 0.0,
        wind_params: None,
        pv_params: None,
    }
}

/// Scenario set with explicit `power[t][s][r]` and equal probabilities.
pub fn scenarios(ids: &[&str], power: impl Fn(usize, usize) -> Vec<f64>, n: usize) -> ScenarioSet {
    ScenarioSet {
        resource_ids: ids.iter().map(|s| s.to_string()).collect(),
        hours: (0..HOURS)
            .map(|t| {
                (0..n)
                    .map(|s| Scenario {
                        probability: 1.0 / n as f64,
                        power: power(t, s),
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn exact_options(charge_facts_cost: bool) -> SucOptions {
    SucOptions {
        build: BuildOptions { charge_facts_cost },
        solve: SolveOptions {
            mip_gap: 1e-6,
            ..SolveOptions::default()
        },
    }
}

pub fn solve(case: &GridCase, scen: &ScenarioSet, dirs: &FlowDirection, charge: bool) -> SucSolution {
    suc::solve(case, scen, dirs, &exact_options(charge), &NoClock).expect("hand case solves")
}

pub fn forward(ids: &[&str]) -> FlowDirection {
    FlowDirection {
        lines: ids.iter().map(|id| (id.to_string(), true)).collect(),
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// All-zero schedule shaped for `n_gen` units, `n_lines` lines, `n_buses`
/// buses, `n_ren` renewables over `hours` hours and `n_scen` scenarios.
pub fn blank_solution(n_gen: usize, n_lines: usize, n_buses: usize, n_ren: usize, hours: usize, n_scen: usize) -> SucSolution {
    let g2 = |n: usize| vec![vec![0.0; hours]; n];
    let g3 = |n: usize| vec![vec![vec![0.0; n_scen]; hours]; n];
    SucSolution {
        commitment: vec![vec![false; hours]; n_gen],
        startup: vec![vec![false; hours]; n_gen],
        shutdown: vec![vec![false; hours]; n_gen],
        dispatch: g2(n_gen),
        segments: vec![vec![vec![0.0; 1]; hours]; n_gen],
        deploy_up: g3(n_gen),
        deploy_down: g3(n_gen),
        flow: g3(n_lines),
        theta: g3(n_buses),
        susceptance: Default::default(),
        curtailment: g3(n_ren),
        objective: 0.0,
        bound: 0.0,
        breakdown: Default::default(),
        status: gridflex_core::milp::SolveStatus::Optimal,
        mip_gap: 0.0,
        node_count: 0,
        nodal_duals: None,
    }
}

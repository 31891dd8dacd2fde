use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{SucError, SucModel};
use crate::grid::GridCase;
use crate::milp::{self, RawSolution, SolveOptions, SolveStatus, VarKind};
use crate::renewables::ScenarioSet;

/// Objective split by term, $.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// No-load, start-up and shut-down.
    pub commitment: f64,
    /// Segment energy.
    pub energy: f64,
    /// Expected recourse deployment.
    pub deployment: f64,
    /// Expected curtailment penalty.
    pub curtailment: f64,
    /// Device rent over the horizon.
    pub facts: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.commitment + self.energy + self.deployment + self.curtailment + self.facts
    }
}

/// Decoded schedule. Arrays are indexed `[g][t]`, `[g][t][s]`, `[l][t][s]`,
/// `[b][t][s]` or `[r][t][s]` following the case's ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SucSolution {
    pub commitment: Vec<Vec<bool>>,
    pub startup: Vec<Vec<bool>>,
    pub shutdown: Vec<Vec<bool>>,
    /// MW.
    pub dispatch: Vec<Vec<f64>>,
    pub segments: Vec<Vec<Vec<f64>>>,
    pub deploy_up: Vec<Vec<Vec<f64>>>,
    pub deploy_down: Vec<Vec<Vec<f64>>>,
    pub flow: Vec<Vec<Vec<f64>>>,
    /// Radians; zero at the reference bus.
    pub theta: Vec<Vec<Vec<f64>>>,
    /// Effective per-unit susceptance of equipped lines, by line id.
    pub susceptance: BTreeMap<String, Vec<Vec<f64>>>,
    pub curtailment: Vec<Vec<Vec<f64>>>,
    pub objective: f64,
    pub bound: f64,
    pub breakdown: CostBreakdown,
    pub status: SolveStatus,
    pub mip_gap: f64,
    pub node_count: u64,
    /// Nodal prices λ_bts in $/MWh from the fixed-commitment LP.
    pub nodal_duals: Option<Vec<Vec<Vec<f64>>>>,
}

/// Reads a raw solver result back into schedule form, checks the objective
/// bookkeeping, and prices the schedule with the fixed-commitment LP.
pub fn decode(
    model: &SucModel,
    raw: &RawSolution,
    case: &GridCase,
    scenarios: &ScenarioSet,
    options: &SolveOptions,
) -> Result<SucSolution, SucError> {
    let mut solution = decode_values(model, raw, case, scenarios)?;
    let reported = raw.objective;
    let computed = solution.breakdown.total();
    if (computed - reported).abs() > 1e-6 * reported.abs().max(1.0) {
        return Err(SucError::Inconsistent { computed, reported });
    }
    solution.nodal_duals = Some(price(model, raw, scenarios, options)?);
    Ok(solution)
}

fn decode_values(
    model: &SucModel,
    raw: &RawSolution,
    case: &GridCase,
    scenarios: &ScenarioSet,
) -> Result<SucSolution, SucError> {
    let ly = &model.layout;
    let x = &raw.values;
    if x.len() != model.instance.variables.len() {
        return Err(SucError::Dimension {
            got: x.len(),
            expected: model.instance.variables.len(),
        });
    }
    let (nh, ns) = (ly.n_hours, ly.n_scen);
    let per_gt = |idx: &[usize], g: usize| -> Vec<bool> { (0..nh).map(|t| x[idx[ly.gt(g, t)]] > 0.5).collect() };
    let cube = |n: usize, at: &dyn Fn(usize, usize, usize) -> f64| -> Vec<Vec<Vec<f64>>> {
        (0..n)
            .map(|i| (0..nh).map(|t| (0..ns).map(|s| at(i, t, s)).collect()).collect())
            .collect()
    };

    let mut breakdown = CostBreakdown {
        facts: ly.facts_cost,
        ..CostBreakdown::default()
    };
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..nh {
            let i = ly.gt(g, t);
            breakdown.commitment +=
                gen.no_load_cost * x[ly.u[i]] + gen.startup_cost * x[ly.v[i]] + gen.shutdown_cost * x[ly.w[i]];
            for (k, sg) in gen.segments.iter().enumerate() {
                breakdown.energy += sg.marginal_cost * x[ly.seg[i][k]];
            }
            for s in 0..ns {
                let j = ly.gts(g, t, s);
                breakdown.deployment += scenarios.probability(t, s) * gen.deploy_cost * (x[ly.ru[j]] + x[ly.rd[j]]);
            }
        }
    }
    for (r, unit) in case.renewables.iter().enumerate() {
        for t in 0..nh {
            for s in 0..ns {
                breakdown.curtailment +=
                    scenarios.probability(t, s) * unit.curtail_cost * x[ly.curtail[ly.rts(r, t, s)]];
            }
        }
    }

    let theta = cube(ly.n_buses, &|b, t, s| ly.theta[ly.bts(b, t, s)].map_or(0.0, |j| x[j]));
    let flow = cube(ly.n_lines, &|l, t, s| x[ly.flow[ly.lts(l, t, s)]]);
    let mut susceptance = BTreeMap::new();
    for (l, line) in case.lines.iter().enumerate() {
        if ly.facts[l].is_none() {
            continue;
        }
        let a = case.bus_index(line.from_bus).unwrap();
        let b = case.bus_index(line.to_bus).unwrap();
        let values = (0..nh)
            .map(|t| {
                (0..ns)
                    .map(|s| {
                        let d = theta[a][t][s] - theta[b][t][s];
                        if d.abs() > 1e-9 {
                            flow[l][t][s] / (case.s_base * d)
                        } else {
                            line.susceptance_nominal
                        }
                    })
                    .collect()
            })
            .collect();
        susceptance.insert(line.id.clone(), values);
    }

    Ok(SucSolution {
        commitment: (0..ly.n_gen).map(|g| per_gt(&ly.u, g)).collect(),
        startup: (0..ly.n_gen).map(|g| per_gt(&ly.v, g)).collect(),
        shutdown: (0..ly.n_gen).map(|g| per_gt(&ly.w, g)).collect(),
        dispatch: (0..ly.n_gen)
            .map(|g| (0..nh).map(|t| x[ly.p[ly.gt(g, t)]]).collect())
            .collect(),
        segments: (0..ly.n_gen)
            .map(|g| (0..nh).map(|t| ly.seg[ly.gt(g, t)].iter().map(|&j| x[j]).collect()).collect())
            .collect(),
        deploy_up: cube(ly.n_gen, &|g, t, s| x[ly.ru[ly.gts(g, t, s)]]),
        deploy_down: cube(ly.n_gen, &|g, t, s| x[ly.rd[ly.gts(g, t, s)]]),
        flow,
        theta,
        susceptance,
        curtailment: cube(ly.n_ren, &|r, t, s| x[ly.curtail[ly.rts(r, t, s)]]),
        objective: raw.objective,
        bound: raw.bound,
        breakdown,
        status: raw.status,
        mip_gap: raw.relative_gap(),
        node_count: raw.node_count,
        nodal_duals: None,
    })
}

/// Nodal prices from the LP with every binary fixed at its incumbent value.
fn price(
    model: &SucModel,
    raw: &RawSolution,
    scenarios: &ScenarioSet,
    options: &SolveOptions,
) -> Result<Vec<Vec<Vec<f64>>>, SucError> {
    let ly = &model.layout;
    let mut fixed = model.instance.clone();
    for j in ly.binaries() {
        let v = if raw.values[j] > 0.5 { 1.0 } else { 0.0 };
        let var = &mut fixed.variables[j];
        var.lower = v;
        var.upper = v;
        var.kind = VarKind::Continuous;
    }
    let lp = milp::solve_lp_with(&fixed, options)?;
    if lp.status != SolveStatus::Optimal {
        return Err(SucError::Pricing(lp.status));
    }
    let y = lp.duals.as_ref().expect("optimal LP carries duals");
    Ok((0..ly.n_buses)
        .map(|b| {
            (0..ly.n_hours)
                .map(|t| {
                    (0..ly.n_scen)
                        .map(|s| y[ly.balance_rows[ly.bts(b, t, s)]] / scenarios.probability(t, s))
                        .collect()
                })
                .collect()
        })
        .collect())
}

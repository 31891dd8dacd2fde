//! Post-solution accounting: emissions, curtailment and congestion rent.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::grid::{Fuel, GridCase};
use crate::renewables::ScenarioSet;
use crate::suc::SucSolution;

pub const LB_PER_MLB: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("solution carries no nodal prices; price it with the fixed-commitment LP first")]
    MissingDuals,
    #[error("unit `{id}` has negative output {value} MW at hour {t}, scenario {s}")]
    NegativeOutput { id: String, t: usize, s: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitEmission {
    pub id: String,
    pub fuel: Fuel,
    /// Expected energy, MWh.
    pub energy_mwh: f64,
    pub emissions_lb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionLedger {
    pub units: Vec<UnitEmission>,
    pub total_lb: f64,
    pub total_mlb: f64,
}

/// Expected CO2 from realized output `P + P^ru - P^rd` in every scenario.
pub fn emissions(sol: &SucSolution, case: &GridCase, scenarios: &ScenarioSet) -> Result<EmissionLedger, MetricsError> {
    let mut units = Vec::with_capacity(case.generators.len());
    let mut total = 0.0;
    for (g, gen) in case.generators.iter().enumerate() {
        let mut energy = 0.0;
        for t in 0..sol.dispatch[g].len() {
            for s in 0..scenarios.n_scenarios() {
                let out = sol.dispatch[g][t] + sol.deploy_up[g][t][s] - sol.deploy_down[g][t][s];
                if out < -1e-6 {
                    return Err(MetricsError::NegativeOutput {
                        id: gen.id.clone(),
                        t,
                        s,
                        value: out,
                    });
                }
                energy += scenarios.probability(t, s) * out.max(0.0);
            }
        }
        let lb = gen.emission_rate * energy;
        total += lb;
        units.push(UnitEmission {
            id: gen.id.clone(),
            fuel: gen.fuel,
            energy_mwh: energy,
            emissions_lb: lb,
        });
    }
    Ok(EmissionLedger {
        units,
        total_lb: total,
        total_mlb: total / LB_PER_MLB,
    })
}

/// Expected curtailed energy Σ π_st P^RC_rts, MWh.
pub fn curtailment_total(sol: &SucSolution, scenarios: &ScenarioSet) -> f64 {
    let mut total = 0.0;
    for unit in &sol.curtailment {
        for (t, hour) in unit.iter().enumerate() {
            for (s, rc) in hour.iter().enumerate() {
                total += scenarios.probability(t, s) * rc;
            }
        }
    }
    total
}

/// Expected available energy of the case's renewables, MWh.
pub fn available_renewable_energy(case: &GridCase, scenarios: &ScenarioSet) -> f64 {
    let cols: Vec<usize> = case
        .renewables
        .iter()
        .filter_map(|r| scenarios.resource_index(&r.id))
        .collect();
    scenarios.expected_energy(&cols)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRent {
    pub line: String,
    pub rent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongestionReport {
    pub load_payment: f64,
    pub generation_revenue: f64,
    /// Load payment minus generation revenue.
    pub congestion_rent: f64,
    /// Σ π (λ_to - λ_from) PL per line.
    pub lines: Vec<LineRent>,
    pub line_rent_total: f64,
}

/// Settles load and generation at nodal prices. Renewables are paid for
/// what they deliver after curtailment.
pub fn congestion_rent(
    sol: &SucSolution,
    case: &GridCase,
    scenarios: &ScenarioSet,
) -> Result<CongestionReport, MetricsError> {
    let lambda = sol.nodal_duals.as_ref().ok_or(MetricsError::MissingDuals)?;
    let nh = case.load_curve.len();
    let ns = scenarios.n_scenarios();
    let mut load_payment = 0.0;
    let mut revenue = 0.0;
    for (b, bus) in case.buses.iter().enumerate() {
        for t in 0..nh {
            for s in 0..ns {
                let pi = scenarios.probability(t, s);
                let price = lambda[b][t][s];
                load_payment += pi * price * case.demand(b, t);
                let mut injected = 0.0;
                for (g, gen) in case.generators.iter().enumerate() {
                    if gen.bus == bus.id {
                        injected += sol.dispatch[g][t] + sol.deploy_up[g][t][s] - sol.deploy_down[g][t][s];
                    }
                }
                for (r, unit) in case.renewables.iter().enumerate() {
                    if unit.bus == bus.id {
                        let avail = scenarios
                            .resource_index(&unit.id)
                            .map_or(0.0, |c| scenarios.power(c, t, s));
                        injected += avail - sol.curtailment[r][t][s];
                    }
                }
                revenue += pi * price * injected;
            }
        }
    }
    let mut lines = Vec::with_capacity(case.lines.len());
    let mut line_total = 0.0;
    for (l, line) in case.lines.iter().enumerate() {
        let a = case.bus_index(line.from_bus).unwrap();
        let z = case.bus_index(line.to_bus).unwrap();
        let mut rent = 0.0;
        for t in 0..nh {
            for s in 0..ns {
                rent += scenarios.probability(t, s) * (lambda[z][t][s] - lambda[a][t][s]) * sol.flow[l][t][s];
            }
        }
        line_total += rent;
        lines.push(LineRent {
            line: line.id.clone(),
            rent,
        });
    }
    Ok(CongestionReport {
        load_payment,
        generation_revenue: revenue,
        congestion_rent: load_payment - revenue,
        lines,
        line_rent_total: line_total,
    })
}

/// Relative disagreement between the nodal and line-wise rent, scaled by
/// the larger of the rent and one percent of the load payment.
pub fn rent_identity_error(report: &CongestionReport) -> f64 {
    let scale = report
        .congestion_rent
        .abs()
        .max(report.line_rent_total.abs())
        .max(1e-2 * report.load_payment.abs())
        .max(1.0);
    (report.congestion_rent - report.line_rent_total).abs() / scale
}

//! Thyristor-controlled series compensation: susceptance range, flow-direction
//! prediction and device economics.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::grid::{GridCase, Line};
use crate::renewables::ScenarioSet;
use crate::suc::SucSolution;

pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FactsError {
    #[error("delta_min {0} would drive the line reactance to zero or below")]
    ReactanceCrossesZero(f64),
    #[error("adjustment range [{0}, {1}] does not contain zero")]
    RangeExcludesNominal(f64, f64),
    #[error("compensation rating {0} MVar gives a negative unit cost")]
    OutOfModel(f64),
    #[error("line `{0}` not found")]
    UnknownLine(String),
}

/// Device limits for one equipped line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactsSpec {
    pub line_id: String,
    pub delta_min: f64,
    pub delta_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub discount_rate: f64,
    pub lifespan_years: u32,
}

impl FactsSpec {
    pub fn for_line(case: &GridCase, line: &Line) -> Result<Self, FactsError> {
        let f = &case.facts;
        let (b_min, b_max) = susceptance_range(line, f.delta_min, f.delta_max)?;
        Ok(FactsSpec {
            line_id: line.id.clone(),
            delta_min: f.delta_min,
            delta_max: f.delta_max,
            b_min,
            b_max,
            discount_rate: f.discount_rate,
            lifespan_years: f.lifespan_years,
        })
    }
}

/// Susceptance bounds when the reactance may move to `X(1 + δ)`, δ in
/// `[delta_min, delta_max]`.
pub fn susceptance_range(line: &Line, delta_min: f64, delta_max: f64) -> Result<(f64, f64), FactsError> {
    if delta_min <= -1.0 {
        return Err(FactsError::ReactanceCrossesZero(delta_min));
    }
    if delta_min > 0.0 || delta_max < 0.0 {
        return Err(FactsError::RangeExcludesNominal(delta_min, delta_max));
    }
    let b = line.susceptance_nominal;
    Ok((b / (1.0 + delta_max), b / (1.0 + delta_min)))
}

/// Compensation rating, MVar.
pub fn compensation_rating(line_rating_mw: f64, s_base: f64) -> f64 {
    line_rating_mw * line_rating_mw / s_base
}

/// Unit investment cost in $/kVar for a device rated `s_mvar`.
pub fn tcsc_unit_cost(s_mvar: f64) -> Result<f64, FactsError> {
    let c = 0.0015 * s_mvar * s_mvar - 0.713 * s_mvar + 153.75;
    if c < 0.0 || !c.is_finite() {
        return Err(FactsError::OutOfModel(s_mvar));
    }
    Ok(c)
}

/// Capital recovery factor `r(1+r)^n / ((1+r)^n - 1)`; `1/n` at `r = 0`.
pub fn annuity_factor(r: f64, n: u32) -> f64 {
    if r == 0.0 {
        return 1.0 / n as f64;
    }
    let g = libm::pow(1.0 + r, n as f64);
    r * g / (g - 1.0)
}

/// Investment spread over the device life, $/h.
pub fn hourly_cost(total_investment: f64, r: f64, n: u32) -> f64 {
    annuity_factor(r, n) * total_investment / HOURS_PER_YEAR
}

/// Total investment in $ for a device on a line of the given rating.
pub fn device_investment(line_rating_mw: f64, s_base: f64) -> Result<f64, FactsError> {
    let s = compensation_rating(line_rating_mw, s_base);
    Ok(tcsc_unit_cost(s)? * s * 1000.0)
}

/// Hourly cost of the device on `line_id` under the case's economics.
pub fn device_hourly_cost(case: &GridCase, line_id: &str) -> Result<f64, FactsError> {
    let line = case
        .line(line_id)
        .ok_or_else(|| FactsError::UnknownLine(line_id.into()))?;
    let investment = device_investment(line.rating, case.s_base)?;
    Ok(hourly_cost(
        investment,
        case.facts.discount_rate,
        case.facts.lifespan_years,
    ))
}

/// Predicted sign of flow for each equipped line; `true` is `F = 1`
/// (flow from the line's from-bus to its to-bus).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowDirection {
    pub lines: BTreeMap<String, bool>,
}

impl FlowDirection {
    pub fn get(&self, line: &str) -> Option<bool> {
        self.lines.get(line).copied()
    }
}

/// Reads directions off a solution of the same system with all devices
/// disabled: `F = 1` when `Σ π_st PL_lts ≥ 0`.
pub fn directions_from_solution(
    case: &GridCase,
    scenarios: &ScenarioSet,
    presolve: &SucSolution,
    lines: &[String],
) -> Result<FlowDirection, FactsError> {
    let mut out = FlowDirection::default();
    for id in lines {
        let l = case
            .lines
            .iter()
            .position(|l| &l.id == id)
            .ok_or_else(|| FactsError::UnknownLine(id.clone()))?;
        let mut weighted = 0.0;
        for t in 0..presolve.flow[l].len() {
            for s in 0..presolve.flow[l][t].len() {
                weighted += scenarios.probability(t, s) * presolve.flow[l][t][s];
            }
        }
        out.lines.insert(id.clone(), weighted >= 0.0);
    }
    Ok(out)
}

/// Whether every equipped line's predicted direction agrees with the sign
/// of its angle difference in `presolve` at every hour and scenario.
pub fn directions_consistent(case: &GridCase, presolve: &SucSolution, directions: &FlowDirection) -> bool {
    let tol = 1e-9;
    directions.lines.iter().all(|(id, &f)| {
        let Some(l) = case.lines.iter().position(|l| &l.id == id) else {
            return false;
        };
        let line = &case.lines[l];
        let (Some(a), Some(b)) = (case.bus_index(line.from_bus), case.bus_index(line.to_bus)) else {
            return false;
        };
        (0..presolve.theta[a].len()).all(|t| {
            (0..presolve.theta[a][t].len()).all(|s| {
                let d = presolve.theta[a][t][s] - presolve.theta[b][t][s];
                if f {
                    d >= -tol
                } else {
                    d <= tol
                }
            })
        })
    })
}

/// Lines in `lines` sorted and deduplicated, as stored in `FlowDirection`.
pub fn line_set(lines: &[String]) -> Vec<String> {
    let mut v = lines.to_vec();
    v.sort();
    v.dedup();
    v
}

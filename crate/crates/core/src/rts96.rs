//! The modified single-area RTS-96 case, built from a source data record.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::grid::{
    Bus, CaseError, FactsConfig, Fuel, Generator, GridCase, Line, Segment, HOURS,
};

/// Single-area RTS-96 data as vendored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rts96Source {
    pub s_base: f64,
    pub buses: Vec<SourceBus>,
    pub branches: Vec<SourceBranch>,
    pub unit_types: BTreeMap<String, UnitType>,
    pub units: Vec<SourceUnit>,
    /// Hourly load in percent of the daily peak.
    pub load_profile_pct: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBus {
    pub id: u32,
    /// Peak load, MW.
    pub load_mw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBranch {
    pub id: String,
    pub from: u32,
    pub to: u32,
    /// Series reactance, p.u.
    pub x: f64,
    /// Continuous rating, MW.
    pub rating: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitType {
    pub fuel: Fuel,
    pub p_min: f64,
    pub p_max: f64,
    pub min_up: u32,
    pub min_down: u32,
    /// MW per minute, both directions.
    pub ramp: f64,
    /// Multiplier on the fuel's average cost for this unit class.
    pub cost_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceUnit {
    pub id: String,
    pub bus: u32,
    pub unit_type: String,
}

/// Load moved to bus 13 before the uniform increase, MW.
pub const SHIFTED_LOAD_MW: f64 = 480.0;
pub const SHIFT_FROM: [u32; 4] = [14, 15, 19, 20];
pub const SHIFT_TO: u32 = 13;
pub const LOAD_GROWTH: f64 = 1.05;
pub const DERATED: [(&str, f64); 4] = [("A25-1", 175.0), ("A25-2", 175.0), ("A21", 220.0), ("A22", 220.0)];
pub const FACTS_CANDIDATES: [&str; 3] = ["A21", "A25-1", "A26"];
pub const RENEWABLE_SITES: [[u32; 2]; 3] = [[4, 5], [17, 18], [3, 24]];

/// Relative marginal cost of the three cost-curve segments.
const SEGMENT_SPREAD: [f64; 3] = [0.9, 1.0, 1.1];
/// Start-up cost expressed as hours of full-load operating cost.
const STARTUP_HOURS: f64 = 2.0;
/// Recourse deployment cost relative to the unit's top segment cost.
pub const DEPLOY_FACTOR: f64 = 1.5;

/// Builds a dispatchable unit from a source unit class.
pub fn unit_from_type(id: String, bus: u32, ty: &UnitType) -> Generator {
    let base = ty.fuel.generation_cost() * ty.cost_factor;
    let width = (ty.p_max - ty.p_min) / SEGMENT_SPREAD.len() as f64;
    let segments: Vec<Segment> = SEGMENT_SPREAD
        .iter()
        .map(|&k| Segment {
            width,
            marginal_cost: base * k,
        })
        .collect();
    let top = segments.last().map_or(0.0, |s| s.marginal_cost);
    Generator {
        id,
        bus,
        fuel: ty.fuel,
        p_min: ty.p_min,
        p_max: ty.p_max,
        min_up: ty.min_up,
        min_down: ty.min_down,
        ramp_up: ty.ramp,
        ramp_down: ty.ramp,
        no_load_cost: ty.p_min * segments[0].marginal_cost,
        startup_cost: STARTUP_HOURS * ty.p_max * base,
        shutdown_cost: 0.0,
        segments,
        deploy_cost: DEPLOY_FACTOR * top,
        emission_rate: ty.fuel.emission_rate(),
    }
}

fn corrupt(reason: String) -> CaseError {
    CaseError::Invalid {
        what: "source",
        id: "rts96".to_string(),
        reason,
    }
}

/// Applies the load shift, load growth, line deratings and FACTS/renewable
/// candidate designations to the source system.
pub fn modified_case(src: &Rts96Source) -> Result<GridCase, CaseError> {
    if src.load_profile_pct.len() != HOURS {
        return Err(corrupt(format!(
            "load profile has {} entries",
            src.load_profile_pct.len()
        )));
    }
    let mut load: BTreeMap<u32, f64> = src.buses.iter().map(|b| (b.id, b.load_mw)).collect();
    let donors: f64 = SHIFT_FROM.iter().map(|b| load.get(b).copied().unwrap_or(0.0)).sum();
    if !(donors > SHIFTED_LOAD_MW) || !load.contains_key(&SHIFT_TO) {
        return Err(corrupt("load shift buses missing".into()));
    }
    // Each donor gives up load in proportion to its own.
    for b in SHIFT_FROM {
        let l = load.get_mut(&b).unwrap();
        *l -= SHIFTED_LOAD_MW * *l / donors;
    }
    *load.get_mut(&SHIFT_TO).unwrap() += SHIFTED_LOAD_MW;
    for l in load.values_mut() {
        *l *= LOAD_GROWTH;
    }
    let peak: f64 = load.values().sum();

    let buses = load
        .iter()
        .map(|(&id, &mw)| Bus {
            id,
            load_share: mw / peak,
        })
        .collect();
    let lines = src
        .branches
        .iter()
        .map(|b| {
            let rating = DERATED
                .iter()
                .find(|(id, _)| *id == b.id)
                .map_or(b.rating, |&(_, r)| r);
            Line {
                id: b.id.clone(),
                from_bus: b.from,
                to_bus: b.to,
                susceptance_nominal: 1.0 / b.x,
                rating,
                facts_candidate: FACTS_CANDIDATES.contains(&b.id.as_str()),
            }
        })
        .collect();
    let mut generators = Vec::with_capacity(src.units.len());
    for u in &src.units {
        let ty = src
            .unit_types
            .get(&u.unit_type)
            .ok_or_else(|| corrupt(format!("unit `{}` has unknown type `{}`", u.id, u.unit_type)))?;
        generators.push(unit_from_type(u.id.clone(), u.bus, ty));
    }
    let case = GridCase {
        buses,
        lines,
        generators,
        renewables: vec![],
        s_base: src.s_base,
        load_curve: src.load_profile_pct.iter().map(|p| p / 100.0 * peak).collect(),
        facts: FactsConfig::default(),
        renewable_sites: RENEWABLE_SITES.to_vec(),
    };
    case.validate()?;
    Ok(case)
}

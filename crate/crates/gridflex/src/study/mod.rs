//! The five study families, their configuration and the cell runner.

mod config;
mod plan;
mod run;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use gridflex_core::suc::CostBreakdown;
use serde::{Deserialize, Serialize};

pub use config::{
    resource_id, BuiltinCase, CaseSource, ConfigError, CurveSource, Inputs, PenetrationSweep, Placement,
    StudyConfig, SITING_CAPACITY_MW, SITING_SOLAR_MWH, SITING_WIND_MWH,
};
pub use plan::{capacity_mix, facts_label, plan, Axis, CellLabel, Group};
pub use run::{cell_key, run_study, CellTiming, Engine, RunError, RunOptions, StudyRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Base,
    Siting,
    Penetration,
    LoadCurves,
    GenerationMix,
}

impl Study {
    pub const ALL: [Study; 5] = [
        Study::Base,
        Study::Siting,
        Study::Penetration,
        Study::LoadCurves,
        Study::GenerationMix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Study::Base => "base",
            Study::Siting => "siting",
            Study::Penetration => "penetration",
            Study::LoadCurves => "load-curves",
            Study::GenerationMix => "generation-mix",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Study {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Study::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown study `{s}`; expected one of base, siting, penetration, load-curves, generation-mix"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Optimal,
    /// Solved, but stopped at a node or time limit above the target gap.
    GapLimited,
    Infeasible,
    /// A limit was reached before any feasible schedule was found.
    NoSolution,
    /// Any other error; see the message.
    Failed,
}

impl CellStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, CellStatus::Optimal | CellStatus::GapLimited)
    }
}

/// Everything measured on one solved cell. Money in $, energy in MWh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellMetrics {
    pub total_cost: f64,
    pub breakdown: CostBreakdown,
    /// Proven lower bound, absent when the solver did not supply one.
    pub bound: Option<f64>,
    pub mip_gap: Option<f64>,
    pub node_count: u64,
    pub emissions_mlb: f64,
    pub curtailment_mwh: f64,
    pub available_renewable_mwh: f64,
    pub demand_mwh: f64,
    pub load_payment: f64,
    pub generation_revenue: f64,
    pub congestion_rent: f64,
    pub line_rent_total: f64,
    pub rent_identity_error: f64,
    pub audit_max_violation: f64,
    pub audit_worst: String,
    /// Directions used for equipped lines; for the device-free cell, the
    /// directions it predicts for every candidate line.
    pub flow_directions: BTreeMap<String, bool>,
    /// Per line: whether the device-free angles agree with the direction
    /// at every hour and scenario.
    pub direction_consistent: BTreeMap<String, bool>,
    pub capacity_by_fuel_mw: BTreeMap<String, f64>,
    pub energy_by_fuel_mwh: BTreeMap<String, f64>,
}

impl CellMetrics {
    pub fn directions_consistent(&self) -> bool {
        self.direction_consistent.values().all(|&c| c)
    }
}

/// Result of one cell as stored in the cache.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellOutcome {
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<CellMetrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellReport {
    pub id: String,
    pub facts_set: Vec<String>,
    pub axis: Axis,
    /// Cache key of the cell's resolved inputs.
    pub key: String,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<CellMetrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportMetadata {
    pub config_hash: String,
    pub case_hash: String,
    pub seed: u64,
    pub mip_gap: f64,
    pub scenarios: usize,
    pub engine: String,
    pub charge_facts_cost: bool,
    pub curtail_cost: f64,
    pub approximations: Vec<String>,
}

/// Study results in configured order. Wall times are kept apart so that
/// reruns produce identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyReport {
    pub study: Study,
    pub metadata: ReportMetadata,
    pub cells: Vec<CellReport>,
}

impl StudyReport {
    pub fn cell(&self, id: &str) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.id == id)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.status.is_solved()).count()
    }
}

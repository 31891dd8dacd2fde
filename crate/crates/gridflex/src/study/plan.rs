//! Expands a study into groups of cells. Cells in a group share the case
//! and scenario set and differ only in the FACTS set, so one device-free
//! solve per group supplies every cell's flow directions.

use std::collections::BTreeMap;

use gridflex_core::grid::{self, GridCase, RenewableKind, RenewableUnit};
use gridflex_core::renewables::{self, ScenarioSet};
use serde::{Deserialize, Serialize};

use super::config::{resource_id, ConfigError, Inputs, StudyConfig};
use super::Study;

/// Position of a cell on the study's axes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<RenewableKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u32>,
    /// Wind and solar capacity per candidate bus, MW.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewable_mw_per_bus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<String>,
}

impl Axis {
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(m) = &self.mix {
            parts.push(format!("mix={m}"));
        }
        if let Some(c) = &self.curve {
            parts.push(format!("curve={c}"));
        }
        if let Some([a, b]) = self.pair {
            parts.push(format!("pair={a}-{b}"));
        }
        if let Some(k) = self.kind {
            parts.push(format!("kind={}", k.as_str()));
        }
        if let Some(s) = self.step {
            parts.push(format!("step={s}"));
        }
        if self.step.is_none() {
            if let Some(mw) = self.renewable_mw_per_bus {
                parts.push(format!("renewables={mw}"));
            }
        }
        parts.join("/")
    }
}

/// `none` for the empty set, otherwise line ids joined with `+`.
pub fn facts_label(set: &[String]) -> String {
    if set.is_empty() {
        "none".to_string()
    } else {
        set.join("+")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellLabel {
    pub id: String,
    pub axis: Axis,
    pub facts_set: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Group {
    pub axis: Axis,
    /// Case with no device enabled.
    pub case: GridCase,
    pub scenarios: ScenarioSet,
    /// FACTS sets to report, the empty set first.
    pub facts_sets: Vec<Vec<String>>,
}

impl Group {
    pub fn cells(&self) -> Vec<CellLabel> {
        self.facts_sets
            .iter()
            .map(|set| {
                let axis = self.axis.label();
                let f = format!("facts={}", facts_label(set));
                CellLabel {
                    id: if axis.is_empty() { f } else { format!("{axis}/{f}") },
                    axis: self.axis.clone(),
                    facts_set: set.clone(),
                }
            })
            .collect()
    }
}

fn unit(kind: RenewableKind, bus: u32, mw: f64, curtail_cost: f64) -> RenewableUnit {
    RenewableUnit {
        id: resource_id(kind, bus),
        bus,
        kind,
        rated_power: mw,
        curtail_cost,
        wind_params: None,
        pv_params: None,
    }
}

/// Wind and solar of `mw` each at every bus of the case's renewable sites.
fn everywhere(case: &GridCase, mw: f64, curtail_cost: f64) -> Vec<RenewableUnit> {
    let mut out = Vec::new();
    for kind in [RenewableKind::Wind, RenewableKind::Solar] {
        for pair in &case.renewable_sites {
            for &b in pair {
                if !out.iter().any(|u: &RenewableUnit| u.bus == b && u.kind == kind) {
                    out.push(unit(kind, b, mw, curtail_cost));
                }
            }
        }
    }
    out
}

fn scenarios_for(case: &GridCase, inputs: &Inputs, n: usize) -> Result<ScenarioSet, ConfigError> {
    renewables::discretize(&inputs.traces, &case.renewables, n)
        .map_err(|e| ConfigError::Invalid(format!("scenarios: {e}")))
}

fn with_curve(case: &GridCase, pct: &[f64], peak: f64) -> GridCase {
    let mut c = case.clone();
    c.load_curve = pct.iter().map(|p| p / 100.0 * peak).collect();
    c
}

/// Union of the configured sets: the "devices on" side of the mix study.
fn all_devices(sets: &[Vec<String>]) -> Vec<String> {
    let all: Vec<String> = sets.iter().flatten().cloned().collect();
    gridflex_core::facts::line_set(&all)
}

pub fn plan(study: Study, config: &StudyConfig, inputs: &Inputs) -> Result<Vec<Group>, ConfigError> {
    let base = &inputs.case;
    let n = config.scenarios;
    let sets = &inputs.facts_sets;
    let mut groups = Vec::new();
    let group = |axis: Axis, case: GridCase, facts_sets: Vec<Vec<String>>| -> Result<Group, ConfigError> {
        case.validate()
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", axis.label())))?;
        let scenarios = scenarios_for(&case, inputs, n)?;
        Ok(Group {
            axis,
            case,
            scenarios,
            facts_sets,
        })
    };
    match study {
        Study::Base => {
            let mut case = base.clone();
            case.renewables.clear();
            groups.push(group(Axis::default(), case, sets.clone())?);
        }
        Study::Siting => {
            for p in &inputs.placements {
                let mut case = base.clone();
                case.renewables = p
                    .buses
                    .iter()
                    .map(|&b| unit(p.kind, b, p.capacity_mw, config.curtail_cost))
                    .collect();
                let axis = Axis {
                    pair: Some(p.buses),
                    kind: Some(p.kind),
                    ..Axis::default()
                };
                let mut g = group(axis, case, sets.clone())?;
                if let Some(target) = p.target_energy_mwh {
                    let ids: Vec<String> = g.case.renewables.iter().map(|u| u.id.clone()).collect();
                    g.scenarios = renewables::scale_to_daily_energy(&g.scenarios, &g.case.renewables, &ids, target)
                        .map_err(|e| ConfigError::Invalid(format!("{}: {e}", g.axis.label())))?;
                }
                groups.push(g);
            }
        }
        Study::Penetration => {
            for step in 0..=config.penetration.steps {
                let mw = step as f64 * config.penetration.increment_mw;
                let mut case = base.clone();
                case.renewables = if step == 0 {
                    Vec::new()
                } else {
                    everywhere(base, mw, config.curtail_cost)
                };
                let axis = Axis {
                    step: Some(step),
                    renewable_mw_per_bus: Some(mw),
                    ..Axis::default()
                };
                groups.push(group(axis, case, sets.clone())?);
            }
        }
        Study::LoadCurves => {
            for (name, pct) in &inputs.load_curves {
                let mut case = with_curve(base, pct, inputs.peak_load_mw);
                case.renewables = everywhere(base, config.study_renewables_mw, config.curtail_cost);
                let axis = Axis {
                    curve: Some(name.clone()),
                    renewable_mw_per_bus: Some(config.study_renewables_mw),
                    ..Axis::default()
                };
                groups.push(group(axis, case, sets.clone())?);
            }
        }
        Study::GenerationMix => {
            let on = all_devices(sets);
            let mut toggled = vec![Vec::new()];
            if !on.is_empty() {
                toggled.push(on);
            }
            for (name, mix) in &inputs.generation_mixes {
                let mixed = if mix.is_empty() {
                    base.clone()
                } else {
                    grid::apply_generation_mix(base, mix)
                        .map_err(|e| ConfigError::Invalid(format!("generation mix `{name}`: {e}")))?
                };
                let mut bare = mixed.clone();
                bare.renewables.clear();
                let axis = Axis {
                    mix: Some(name.clone()),
                    renewable_mw_per_bus: Some(0.0),
                    ..Axis::default()
                };
                groups.push(group(axis, bare, vec![Vec::new()])?);
                let mut case = mixed;
                case.renewables = everywhere(base, config.study_renewables_mw, config.curtail_cost);
                let axis = Axis {
                    mix: Some(name.clone()),
                    renewable_mw_per_bus: Some(config.study_renewables_mw),
                    ..Axis::default()
                };
                groups.push(group(axis, case, toggled.clone())?);
            }
        }
    }
    Ok(groups)
}

/// Capacity by fuel name, MW.
pub fn capacity_mix(case: &GridCase) -> BTreeMap<String, f64> {
    case.capacity_by_fuel()
        .into_iter()
        .map(|(f, mw)| (f.as_str().to_string(), mw))
        .collect()
}

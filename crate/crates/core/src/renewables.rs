//! Wind and solar output models and per-hour scenario discretization.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::grid::{PvArraySpec, RenewableKind, RenewableUnit, WindParams, HOURS};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("weather trace for `{0}` has no days")]
    EmptyTrace(String),
    #[error("weather trace for `{id}` day {day} has {hours} hours, expected 24")]
    HourCount { id: String, day: usize, hours: usize },
    #[error("weather trace for `{id}` has invalid value {value}")]
    BadValue { id: String, value: f64 },
    #[error("no weather trace for renewable `{0}`")]
    MissingTrace(String),
    #[error("weather trace for `{0}` has the wrong resource kind")]
    KindMismatch(String),
    #[error("scenario count must be at least 1")]
    NoScenarios,
    #[error("unknown renewable `{0}`")]
    UnknownResource(String),
    #[error("target {target} MWh is not reachable; the selected units can deliver at most {max} MWh")]
    InfeasibleTarget { target: f64, max: f64 },
    #[error("selected units have no expected energy to scale")]
    NothingToScale,
    #[error("scenario set is malformed: {0}")]
    Malformed(String),
}

/// Power curve: zero outside `[v_ci, v_co]`, cubic up to rated speed, flat after.
pub fn wind_power(v: f64, params: &WindParams, p_rated: f64) -> f64 {
    if v < params.v_ci || v > params.v_co {
        0.0
    } else if v >= params.v_rated {
        p_rated
    } else {
        let r = v / params.v_rated;
        p_rated * r * r * r
    }
}

/// Linear irradiance model capped at nameplate.
pub fn solar_power(g_irr: f64, spec: &PvArraySpec, p_rated: f64) -> f64 {
    (p_rated * g_irr / spec.g_stc).clamp(0.0, p_rated)
}

/// Available power of `unit` for a weather observation.
pub fn unit_power(unit: &RenewableUnit, value: f64) -> f64 {
    match unit.kind {
        RenewableKind::Wind => wind_power(value, &unit.wind_params.unwrap_or_default(), unit.rated_power),
        RenewableKind::Solar => solar_power(value, &unit.pv_params.unwrap_or_default(), unit.rated_power),
    }
}

/// Historical weather for one resource: wind speed (m/s) or irradiance (W/m²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeatherTrace {
    pub resource_id: String,
    pub kind: RenewableKind,
    /// `values[day][hour]`.
    pub values: Vec<Vec<f64>>,
}

impl WeatherTrace {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.values.is_empty() {
            return Err(ScenarioError::EmptyTrace(self.resource_id.clone()));
        }
        for (day, row) in self.values.iter().enumerate() {
            if row.len() != HOURS {
                return Err(ScenarioError::HourCount {
                    id: self.resource_id.clone(),
                    day,
                    hours: row.len(),
                });
            }
            let limit = match self.kind {
                RenewableKind::Wind => 100.0,
                RenewableKind::Solar => f64::INFINITY,
            };
            if let Some(&value) = row.iter().find(|&&v| !(v >= 0.0 && v < limit)) {
                return Err(ScenarioError::BadValue {
                    id: self.resource_id.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub probability: f64,
    /// Available power per resource, MW, ordered as `ScenarioSet::resource_ids`.
    pub power: Vec<f64>,
}

/// Rectangular hour × scenario grid of renewable availability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub resource_ids: Vec<String>,
    /// `hours[t][s]`.
    pub hours: Vec<Vec<Scenario>>,
}

impl ScenarioSet {
    /// `n` equiprobable scenarios with no renewable resources.
    pub fn without_renewables(n: usize) -> Self {
        let p = 1.0 / n as f64;
        ScenarioSet {
            resource_ids: Vec::new(),
            hours: vec![
                vec![
                    Scenario {
                        probability: p,
                        power: Vec::new(),
                    };
                    n
                ];
                HOURS
            ],
        }
    }

    pub fn n_scenarios(&self) -> usize {
        self.hours.first().map_or(0, |h| h.len())
    }

    pub fn probability(&self, t: usize, s: usize) -> f64 {
        self.hours[t][s].probability
    }

    pub fn power(&self, r: usize, t: usize, s: usize) -> f64 {
        self.hours[t][s].power[r]
    }

    pub fn resource_index(&self, id: &str) -> Option<usize> {
        self.resource_ids.iter().position(|r| r == id)
    }

    /// Σ_t Σ_s π_st P_rts over the given resource indices, MWh.
    pub fn expected_energy(&self, resources: &[usize]) -> f64 {
        let mut e = 0.0;
        for hour in &self.hours {
            for sc in hour {
                for &r in resources {
                    e += sc.probability * sc.power[r];
                }
            }
        }
        e
    }

    /// Checks shape, probabilities and `0 ≤ P ≤ rated`.
    pub fn validate(&self, rated: &[f64]) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::Malformed(m.into()));
        if self.hours.len() != HOURS {
            return bad("scenario set must cover 24 hours");
        }
        let n = self.n_scenarios();
        if n == 0 {
            return Err(ScenarioError::NoScenarios);
        }
        if rated.len() != self.resource_ids.len() {
            return bad("rated power list does not match resources");
        }
        for hour in &self.hours {
            if hour.len() != n {
                return bad("scenario count differs across hours");
            }
            let total: f64 = hour.iter().map(|s| s.probability).sum();
            if (total - 1.0).abs() > 1e-9 {
                return bad("probabilities do not sum to 1");
            }
            for sc in hour {
                if !(sc.probability >= 0.0) || sc.power.len() != rated.len() {
                    return bad("scenario has a negative probability or wrong width");
                }
                for (p, cap) in sc.power.iter().zip(rated) {
                    if !(*p >= 0.0 && *p <= cap + 1e-9) {
                        return bad("available power outside [0, rated]");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Mean of equal-probability quantile bins of `values`, one per scenario.
///
/// Sorted samples are laid end to end on `[0, M)` and cut into `n` equal
/// pieces; a sample straddling a cut contributes to both bins in proportion.
pub fn quantile_bin_means(values: &[f64], n: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let width = m / n as f64;
    (0..n)
        .map(|s| {
            let (lo, hi) = (s as f64 * width, (s + 1) as f64 * width);
            let mut acc = 0.0;
            let first = libm::floor(lo) as usize;
            for (i, v) in sorted.iter().enumerate().skip(first) {
                let (a, b) = (i as f64, i as f64 + 1.0);
                if a >= hi {
                    break;
                }
                let overlap = b.min(hi) - a.max(lo);
                if overlap > 0.0 {
                    acc += overlap * v;
                }
            }
            acc / width
        })
        .collect()
}

/// Converts each resource's trace to power and bins it per hour. Scenario
/// `s` pairs bin `s` of every resource.
pub fn discretize(
    traces: &[WeatherTrace],
    resources: &[RenewableUnit],
    n_scenarios: usize,
) -> Result<ScenarioSet, ScenarioError> {
    if n_scenarios == 0 {
        return Err(ScenarioError::NoScenarios);
    }
    let mut per_resource = Vec::with_capacity(resources.len());
    for unit in resources {
        let trace = traces
            .iter()
            .find(|t| t.resource_id == unit.id)
            .ok_or_else(|| ScenarioError::MissingTrace(unit.id.clone()))?;
        trace.validate()?;
        if trace.kind != unit.kind {
            return Err(ScenarioError::KindMismatch(unit.id.clone()));
        }
        let bins: Vec<Vec<f64>> = (0..HOURS)
            .map(|t| {
                let powers: Vec<f64> = trace.values.iter().map(|d| unit_power(unit, d[t])).collect();
                quantile_bin_means(&powers, n_scenarios)
                    .into_iter()
                    .map(|p| p.clamp(0.0, unit.rated_power))
                    .collect()
            })
            .collect();
        per_resource.push(bins);
    }
    let p = 1.0 / n_scenarios as f64;
    let hours = (0..HOURS)
        .map(|t| {
            (0..n_scenarios)
                .map(|s| Scenario {
                    probability: p,
                    power: per_resource.iter().map(|bins| bins[t][s]).collect(),
                })
                .collect()
        })
        .collect();
    Ok(ScenarioSet {
        resource_ids: resources.iter().map(|r| r.id.clone()).collect(),
        hours,
    })
}

/// Rescales the selected resources so their expected daily energy hits
/// `target_mwh` within 0.1%, clipping at rated power.
pub fn scale_to_daily_energy(
    set: &ScenarioSet,
    resources: &[RenewableUnit],
    ids: &[String],
    target_mwh: f64,
) -> Result<ScenarioSet, ScenarioError> {
    let mut selected = Vec::with_capacity(ids.len());
    let mut rated = Vec::with_capacity(ids.len());
    for id in ids {
        let r = set
            .resource_index(id)
            .ok_or_else(|| ScenarioError::UnknownResource(id.clone()))?;
        let unit = resources
            .iter()
            .find(|u| &u.id == id)
            .ok_or_else(|| ScenarioError::UnknownResource(id.clone()))?;
        selected.push(r);
        rated.push(unit.rated_power);
    }
    let capacity = HOURS as f64 * rated.iter().sum::<f64>();
    if target_mwh > capacity {
        return Err(ScenarioError::InfeasibleTarget {
            target: target_mwh,
            max: capacity,
        });
    }
    let current = set.expected_energy(&selected);
    if !(current > 0.0) || !(target_mwh > 0.0) {
        return Err(ScenarioError::NothingToScale);
    }

    let energy_at = |k: f64| -> f64 {
        let mut e = 0.0;
        for hour in &set.hours {
            for sc in hour {
                for (&r, &cap) in selected.iter().zip(&rated) {
                    e += sc.probability * (k * sc.power[r]).min(cap);
                }
            }
        }
        e
    };
    // Reachable maximum: every hour with some output runs at rated power.
    let mut reachable = 0.0;
    for hour in &set.hours {
        for sc in hour {
            for (&r, &cap) in selected.iter().zip(&rated) {
                if sc.power[r] > 0.0 {
                    reachable += sc.probability * cap;
                }
            }
        }
    }
    if target_mwh > reachable * (1.0 + 1e-3) {
        return Err(ScenarioError::InfeasibleTarget {
            target: target_mwh,
            max: reachable,
        });
    }

    // Fixed-point rescaling; clipping makes energy concave in k so the
    // iterates approach the root from one side.
    let mut k = target_mwh / current;
    for _ in 0..200 {
        let e = energy_at(k);
        if (e - target_mwh).abs() <= 1e-12 * target_mwh {
            break;
        }
        k *= target_mwh / e;
    }
    let achieved = energy_at(k);
    if (achieved - target_mwh).abs() > 1e-3 * target_mwh {
        return Err(ScenarioError::InfeasibleTarget {
            target: target_mwh,
            max: reachable,
        });
    }
    let mut out = set.clone();
    for hour in &mut out.hours {
        for sc in hour {
            for (&r, &cap) in selected.iter().zip(&rated) {
                sc.power[r] = (k * sc.power[r]).min(cap);
            }
        }
    }
    Ok(out)
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gridflex_core::grid::{self, GridCase, RenewableKind};
use gridflex_core::milp::SolveOptions;
use gridflex_core::renewables::WeatherTrace;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::external::ExternalSolver;
use crate::io::{self, FileError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinCase {
    Rts96Modified,
}

/// `"rts96-modified"` or `{"path": "case.json"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseSource {
    Builtin(BuiltinCase),
    File { path: PathBuf },
}

impl Default for CaseSource {
    fn default() -> Self {
        CaseSource::Builtin(BuiltinCase::Rts96Modified)
    }
}

/// Inline percent-of-peak values or `{"path": "curve.csv"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSource {
    Values(Vec<f64>),
    File { path: PathBuf },
}

/// Renewable farms at both buses of a pair, `capacity_mw` each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub buses: [u32; 2],
    pub kind: RenewableKind,
    pub capacity_mw: f64,
    /// Expected daily energy of the pair after rescaling, MWh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_energy_mwh: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenetrationSweep {
    /// Wind and solar capacity added per candidate bus at each step, MW.
    pub increment_mw: f64,
    /// Largest step; step 0 has no renewables.
    pub steps: u32,
}

impl Default for PenetrationSweep {
    fn default() -> Self {
        Self {
            increment_mw: 100.0,
            steps: 5,
        }
    }
}

pub const SITING_CAPACITY_MW: f64 = 400.0;
pub const SITING_WIND_MWH: f64 = 6412.42;
pub const SITING_SOLAR_MWH: f64 = 4891.71;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub case: CaseSource,
    /// Annual peak the load curves are expressed against, MW. Defaults to
    /// the source peak for the built-in case and the curve maximum otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_load_mw: Option<f64>,
    pub facts_sets: Vec<Vec<String>>,
    /// Scenarios per hour.
    pub scenarios: usize,
    /// Weather CSV per resource id (`wind-3`, `solar-24`, ...). Resources
    /// not listed use the bundled traces.
    pub weather: BTreeMap<String, PathBuf>,
    /// Siting study farms. Empty means both kinds at every candidate pair.
    pub placements: Vec<Placement>,
    pub penetration: PenetrationSweep,
    /// Empty means the six bundled day types.
    pub load_curves: BTreeMap<String, CurveSource>,
    /// Wind and solar per candidate bus in the load-curve and mix studies, MW.
    pub study_renewables_mw: f64,
    /// Empty means the bundled ISO mixes.
    pub generation_mixes: BTreeMap<String, BTreeMap<String, f64>>,
    /// Curtailment penalty applied to every renewable unit, $/MWh.
    pub curtail_cost: f64,
    pub charge_facts_cost: bool,
    pub solve: SolveOptions,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub external_solver: Option<ExternalSolver>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        Self {
            case: CaseSource::default(),
            peak_load_mw: None,
            facts_sets: vec![
                vec![],
                s(&["A21"]),
                s(&["A25-1", "A26"]),
                s(&["A21", "A25-1", "A26"]),
            ],
            scenarios: 3,
            weather: BTreeMap::new(),
            placements: Vec::new(),
            penetration: PenetrationSweep::default(),
            load_curves: BTreeMap::new(),
            study_renewables_mw: 100.0,
            generation_mixes: BTreeMap::new(),
            curtail_cost: 0.0,
            charge_facts_cost: true,
            solve: SolveOptions::default(),
            workers: 1,
            output_dir: None,
            external_solver: None,
            base_dir: PathBuf::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Everything a study needs after files are read and defaults filled in.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub case: GridCase,
    pub peak_load_mw: f64,
    pub facts_sets: Vec<Vec<String>>,
    pub traces: Vec<WeatherTrace>,
    pub placements: Vec<Placement>,
    pub load_curves: BTreeMap<String, Vec<f64>>,
    pub generation_mixes: BTreeMap<String, BTreeMap<String, f64>>,
    /// Bundled defaults in use that only approximate the original data.
    pub approximations: Vec<String>,
}

impl StudyConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: StudyConfig = io::parse_json(path, &io::read_text(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Reads every referenced file and checks the config against the case.
    pub fn inputs(&self) -> Result<Inputs, ConfigError> {
        let mut approximations = Vec::new();
        let (case, default_peak) = match &self.case {
            CaseSource::Builtin(BuiltinCase::Rts96Modified) => {
                approximations.push(
                    "built-in RTS-96 case: hourly load profile capped at 98% of peak so the derated network can serve it"
                        .to_string(),
                );
                (data::build_rts96_modified(), data::rts96_peak_mw())
            }
            CaseSource::File { path } => {
                let case = io::load_case(&self.resolve(path))?;
                let peak = case.load_curve.iter().cloned().fold(0.0, f64::max);
                (case, peak)
            }
        };
        let peak_load_mw = self.peak_load_mw.unwrap_or(default_peak);
        if !(peak_load_mw > 0.0 && peak_load_mw.is_finite()) {
            return invalid("peak_load_mw must be positive");
        }
        if self.scenarios == 0 {
            return invalid("scenarios must be at least 1");
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1");
        }
        if !(self.solve.mip_gap >= 0.0) || !(self.solve.time_limit_s > 0.0) {
            return invalid("solve.mip_gap must be >= 0 and solve.time_limit_s > 0");
        }
        if !(self.curtail_cost >= 0.0 && self.curtail_cost.is_finite()) {
            return invalid("curtail_cost must be finite and nonnegative");
        }

        let mut facts_sets: Vec<Vec<String>> = Vec::new();
        // The device-free solve supplies flow directions, so it always runs.
        facts_sets.push(Vec::new());
        for set in &self.facts_sets {
            let set = gridflex_core::facts::line_set(set);
            for id in &set {
                match case.line(id) {
                    None => return invalid(format!("facts set {set:?}: line `{id}` is not in the case")),
                    Some(l) if !l.facts_candidate => {
                        return invalid(format!("facts set {set:?}: line `{id}` is not a FACTS candidate"))
                    }
                    _ => {}
                }
            }
            if set.len() > case.facts.n_max {
                return invalid(format!(
                    "facts set {set:?} exceeds the device budget of {}",
                    case.facts.n_max
                ));
            }
            if !facts_sets.contains(&set) {
                facts_sets.push(set);
            }
        }

        let placements = if self.placements.is_empty() {
            let mut v = Vec::new();
            for pair in &case.renewable_sites {
                for (kind, target) in [(RenewableKind::Wind, SITING_WIND_MWH), (RenewableKind::Solar, SITING_SOLAR_MWH)] {
                    v.push(Placement {
                        buses: *pair,
                        kind,
                        capacity_mw: SITING_CAPACITY_MW,
                        target_energy_mwh: Some(target),
                    });
                }
            }
            v
        } else {
            self.placements.clone()
        };
        for p in &placements {
            for b in p.buses {
                if case.bus_index(b).is_none() {
                    return invalid(format!("placement: bus {b} is not in the case"));
                }
            }
            if p.buses[0] == p.buses[1] {
                return invalid(format!("placement: pair {:?} repeats a bus", p.buses));
            }
            if !(p.capacity_mw > 0.0 && p.capacity_mw.is_finite()) {
                return invalid(format!("placement {:?}: capacity_mw must be positive", p.buses));
            }
            if let Some(e) = p.target_energy_mwh {
                if !(e > 0.0) {
                    return invalid(format!("placement {:?}: target_energy_mwh must be positive", p.buses));
                }
            }
        }
        if !(self.penetration.increment_mw > 0.0 && self.penetration.increment_mw.is_finite()) {
            return invalid("penetration.increment_mw must be positive");
        }
        if !(self.study_renewables_mw > 0.0 && self.study_renewables_mw.is_finite()) {
            return invalid("study_renewables_mw must be positive");
        }
        for pair in &case.renewable_sites {
            for b in pair {
                if case.bus_index(*b).is_none() {
                    return invalid(format!("case renewable site bus {b} is not in the case"));
                }
            }
        }

        let load_curves = if self.load_curves.is_empty() {
            approximations.push(
                "load curves: bundled day-type shapes (hot/cold/mild, weekday/weekend) stand in for measured day-type load data"
                    .to_string(),
            );
            data::default_load_curves()
        } else {
            let mut out = BTreeMap::new();
            for (name, src) in &self.load_curves {
                let curve = match src {
                    CurveSource::Values(v) => v.clone(),
                    CurveSource::File { path } => io::read_load_curve_csv(&self.resolve(path))?,
                };
                if curve.len() != grid::HOURS {
                    return invalid(format!("load curve `{name}` has {} points, expected 24", curve.len()));
                }
                if curve.iter().any(|p| !(*p > 0.0 && *p <= 100.0)) {
                    return invalid(format!("load curve `{name}`: values must be percent of peak in (0, 100]"));
                }
                out.insert(name.clone(), curve);
            }
            out
        };

        let generation_mixes = if self.generation_mixes.is_empty() {
            approximations.push(
                "generation mixes: bundled ISO fuel fractions; shares not stated in prose are estimates".to_string(),
            );
            data::default_generation_mixes()
        } else {
            self.generation_mixes.clone()
        };
        for (name, mix) in &generation_mixes {
            if !mix.is_empty() {
                grid::apply_generation_mix(&case, mix)
                    .map_err(|e| ConfigError::Invalid(format!("generation mix `{name}`: {e}")))?;
            }
        }

        let mut traces = Vec::new();
        let mut bundled = false;
        let mut needed: Vec<String> = Vec::new();
        for pair in case.renewable_sites.iter().chain(placements.iter().map(|p| &p.buses)) {
            for b in pair {
                for kind in [RenewableKind::Wind, RenewableKind::Solar] {
                    let id = resource_id(kind, *b);
                    if !needed.contains(&id) {
                        needed.push(id);
                    }
                }
            }
        }
        for id in self.weather.keys() {
            if !needed.contains(id) {
                needed.push(id.clone());
            }
        }
        let defaults = data::default_weather();
        for id in &needed {
            if let Some(path) = self.weather.get(id) {
                traces.push(io::read_weather_csv(&self.resolve(path), id)?);
            } else if let Some(t) = defaults.iter().find(|t| &t.resource_id == id) {
                bundled = true;
                traces.push(t.clone());
            }
        }
        for p in &placements {
            for b in p.buses {
                let id = resource_id(p.kind, b);
                if !traces.iter().any(|t| t.resource_id == id) {
                    return invalid(format!("no weather trace for `{id}`; add it under `weather`"));
                }
            }
        }
        if bundled {
            approximations.push("weather: bundled synthetic traces, 30 days per resource".to_string());
        }

        Ok(Inputs {
            case,
            peak_load_mw,
            facts_sets,
            traces,
            placements,
            load_curves,
            generation_mixes,
            approximations,
        })
    }
}

/// Resource id shared by a renewable unit and its weather trace.
pub fn resource_id(kind: RenewableKind, bus: u32) -> String {
    format!("{}-{bus}", kind.as_str())
}

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use gridflex_core::facts::{self, FlowDirection};
use gridflex_core::grid::GridCase;
use gridflex_core::metrics;
use gridflex_core::milp::SolveStatus;
use gridflex_core::renewables::ScenarioSet;
use gridflex_core::suc::{self, BuildOptions, SucError, SucOptions, SucSolution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ConfigError, Inputs, StudyConfig};
use super::plan::{capacity_mix, plan, CellLabel, Group};
use super::{CellMetrics, CellOutcome, CellReport, CellStatus, ReportMetadata, Study, StudyReport};
use crate::clock::WallClock;
use crate::external::ExternalSolver;
use crate::io::{self, FileError};

/// Bumped whenever the meaning of a cached cell changes.
const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Engine {
    Embedded,
    External(ExternalSolver),
}

impl Engine {
    fn tag(&self) -> String {
        match self {
            Engine::Embedded => "embedded".to_string(),
            Engine::External(s) => format!("external:{} {}", s.command, s.args.join(" ")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub engine: Engine,
    /// Print one line per finished cell to stderr.
    pub progress: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub id: String,
    pub wall_time_s: f64,
    pub cached: bool,
}

#[derive(Clone, Debug)]
pub struct StudyRun {
    pub report: StudyReport,
    pub timings: Vec<CellTiming>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct KeyInputs<'a> {
    version: u32,
    case: &'a GridCase,
    scenarios: &'a ScenarioSet,
    options: &'a SucOptions,
    engine: String,
}

/// Hash of everything that determines a cell's outcome. The device rent
/// switch is dropped for device-free cells, where it has no effect.
pub fn cell_key(case: &GridCase, scenarios: &ScenarioSet, options: &SucOptions, engine: &Engine) -> String {
    let mut options = options.clone();
    if case.facts.enabled_lines.is_empty() {
        options.build = BuildOptions::default();
    }
    let inputs = KeyInputs {
        version: CACHE_VERSION,
        case,
        scenarios,
        options: &options,
        engine: engine.tag(),
    };
    sha256_hex(&serde_json::to_vec(&inputs).expect("cell inputs serialize"))
}

struct Cache {
    dir: PathBuf,
}

impl Cache {
    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn get(&self, key: &str) -> Option<CellOutcome> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn put(&self, key: &str, outcome: &CellOutcome) -> Result<(), FileError> {
        let path = self.path(key);
        let tmp = self.dir.join(format!("{key}.json.tmp"));
        io::write_text(&tmp, &serde_json::to_string_pretty(outcome).expect("outcomes serialize"))?;
        fs::rename(&tmp, &path).map_err(|e| FileError::io(&path, e))
    }
}

struct Ctx<'a> {
    options: SucOptions,
    engine: &'a Engine,
    work_dir: PathBuf,
    cache: Cache,
    progress: bool,
}

fn failure(status: CellStatus, message: String) -> CellOutcome {
    CellOutcome {
        status,
        message: Some(message),
        metrics: None,
    }
}

fn error_outcome(e: SucError) -> CellOutcome {
    match e {
        SucError::Infeasible => failure(CellStatus::Infeasible, e.to_string()),
        SucError::NoSolution(_) => failure(CellStatus::NoSolution, e.to_string()),
        other => failure(CellStatus::Failed, other.to_string()),
    }
}

impl Ctx<'_> {
    fn solve(
        &self,
        case: &GridCase,
        scenarios: &ScenarioSet,
        dirs: &FlowDirection,
        key: &str,
    ) -> Result<SucSolution, CellOutcome> {
        let clock = WallClock::start();
        match self.engine {
            Engine::Embedded => suc::solve(case, scenarios, dirs, &self.options, &clock).map_err(error_outcome),
            Engine::External(solver) => {
                let model = suc::build(case, scenarios, dirs, &self.options.build).map_err(error_outcome)?;
                let raw = solver
                    .solve(&model.instance, &self.work_dir, &key[..16])
                    .map_err(|e| failure(CellStatus::Failed, e.to_string()))?;
                suc::decode(&model, &raw, case, scenarios, &self.options.solve).map_err(error_outcome)
            }
        }
    }

    fn measure(
        &self,
        case: &GridCase,
        scenarios: &ScenarioSet,
        dirs: &FlowDirection,
        sol: &SucSolution,
        consistent: BTreeMap<String, bool>,
    ) -> CellOutcome {
        let audit = suc::audit(case, scenarios, dirs, sol);
        let ledger = match metrics::emissions(sol, case, scenarios) {
            Ok(l) => l,
            Err(e) => return failure(CellStatus::Failed, e.to_string()),
        };
        let rent = match metrics::congestion_rent(sol, case, scenarios) {
            Ok(r) => r,
            Err(e) => return failure(CellStatus::Failed, e.to_string()),
        };
        let mut energy_by_fuel: BTreeMap<String, f64> = BTreeMap::new();
        for u in &ledger.units {
            *energy_by_fuel.entry(u.fuel.as_str().to_string()).or_insert(0.0) += u.energy_mwh;
        }
        let finite = |x: f64| x.is_finite().then_some(x);
        let status = match sol.status {
            SolveStatus::Optimal => CellStatus::Optimal,
            _ => CellStatus::GapLimited,
        };
        CellOutcome {
            status,
            message: None,
            metrics: Some(CellMetrics {
                total_cost: sol.objective,
                breakdown: sol.breakdown,
                bound: finite(sol.bound),
                mip_gap: finite(sol.mip_gap),
                node_count: sol.node_count,
                emissions_mlb: ledger.total_mlb,
                curtailment_mwh: metrics::curtailment_total(sol, scenarios),
                available_renewable_mwh: metrics::available_renewable_energy(case, scenarios),
                demand_mwh: case.daily_energy(),
                load_payment: rent.load_payment,
                generation_revenue: rent.generation_revenue,
                congestion_rent: rent.congestion_rent,
                line_rent_total: rent.line_rent_total,
                rent_identity_error: metrics::rent_identity_error(&rent),
                audit_max_violation: audit.max_violation,
                audit_worst: audit.worst,
                flow_directions: dirs.lines.clone(),
                direction_consistent: consistent,
                capacity_by_fuel_mw: capacity_mix(case),
                energy_by_fuel_mwh: energy_by_fuel,
            }),
        }
    }

    /// Device-free solve; records predicted directions for every candidate.
    fn reference(&self, g: &Group, key: &str) -> CellOutcome {
        let none = FlowDirection::default();
        let sol = match self.solve(&g.case, &g.scenarios, &none, key) {
            Ok(s) => s,
            Err(o) => return o,
        };
        let candidates: Vec<String> = g
            .case
            .lines
            .iter()
            .filter(|l| l.facts_candidate)
            .map(|l| l.id.clone())
            .collect();
        let predicted = match facts::directions_from_solution(&g.case, &g.scenarios, &sol, &candidates) {
            Ok(d) => d,
            Err(e) => return failure(CellStatus::Failed, e.to_string()),
        };
        let consistent = predicted
            .lines
            .iter()
            .map(|(id, &f)| {
                let one = FlowDirection {
                    lines: BTreeMap::from([(id.clone(), f)]),
                };
                (id.clone(), facts::directions_consistent(&g.case, &sol, &one))
            })
            .collect();
        let mut out = self.measure(&g.case, &g.scenarios, &none, &sol, consistent);
        if let Some(m) = out.metrics.as_mut() {
            m.flow_directions = predicted.lines;
        }
        out
    }

    fn with_devices(&self, g: &Group, set: &[String], reference: &CellOutcome, key: &str) -> CellOutcome {
        let Some(r) = reference.metrics.as_ref() else {
            return failure(
                CellStatus::Failed,
                format!(
                    "device-free solve needed for flow directions ended {:?}",
                    reference.status
                ),
            );
        };
        let case = match g.case.with_facts(set) {
            Ok(c) => c,
            Err(e) => return failure(CellStatus::Failed, e.to_string()),
        };
        let mut dirs = FlowDirection::default();
        let mut consistent = BTreeMap::new();
        for id in set {
            dirs.lines.insert(id.clone(), r.flow_directions.get(id).copied().unwrap_or(true));
            consistent.insert(id.clone(), r.direction_consistent.get(id).copied().unwrap_or(false));
        }
        match self.solve(&case, &g.scenarios, &dirs, key) {
            Ok(sol) => self.measure(&case, &g.scenarios, &dirs, &sol, consistent),
            Err(o) => o,
        }
    }

    fn cached(
        &self,
        label: &CellLabel,
        key: &str,
        compute: impl FnOnce() -> CellOutcome,
    ) -> Result<(CellOutcome, CellTiming), FileError> {
        if let Some(hit) = self.cache.get(key) {
            return Ok((
                hit,
                CellTiming {
                    id: label.id.clone(),
                    wall_time_s: 0.0,
                    cached: true,
                },
            ));
        }
        let clock = std::time::Instant::now();
        let outcome = compute();
        let secs = clock.elapsed().as_secs_f64();
        // Failures may be transient (limits, a missing solver binary), so
        // only settled outcomes are kept.
        if outcome.status.is_solved() || outcome.status == CellStatus::Infeasible {
            self.cache.put(key, &outcome)?;
        }
        if self.progress {
            let value = outcome
                .metrics
                .as_ref()
                .map_or(String::new(), |m| format!(" cost {:.2}", m.total_cost));
            eprintln!("{}: {:?}{value} ({secs:.1} s)", label.id, outcome.status);
        }
        Ok((
            outcome,
            CellTiming {
                id: label.id.clone(),
                wall_time_s: secs,
                cached: false,
            },
        ))
    }

    fn run_group(&self, g: &Group) -> Result<Vec<(CellReport, CellTiming)>, FileError> {
        let labels = g.cells();
        let ref_key = cell_key(&g.case, &g.scenarios, &self.options, self.engine);
        let ref_label = labels
            .iter()
            .find(|l| l.facts_set.is_empty())
            .cloned()
            .unwrap_or_else(|| CellLabel {
                id: format!("{}/reference", g.axis.label()),
                axis: g.axis.clone(),
                facts_set: Vec::new(),
            });
        let (reference, ref_timing) = self.cached(&ref_label, &ref_key, || self.reference(g, &ref_key))?;
        labels
            .par_iter()
            .map(|label| {
                if label.facts_set.is_empty() {
                    return Ok((report(label, &ref_key, reference.clone()), ref_timing.clone()));
                }
                let key = match g.case.with_facts(&label.facts_set) {
                    Ok(c) => cell_key(&c, &g.scenarios, &self.options, self.engine),
                    Err(_) => format!("{ref_key}-{}", label.facts_set.join("+")),
                };
                let (outcome, timing) =
                    self.cached(label, &key, || self.with_devices(g, &label.facts_set, &reference, &key))?;
                Ok((report(label, &key, outcome), timing))
            })
            .collect()
    }
}

fn report(label: &CellLabel, key: &str, outcome: CellOutcome) -> CellReport {
    CellReport {
        id: label.id.clone(),
        facts_set: label.facts_set.clone(),
        axis: label.axis.clone(),
        key: key.to_string(),
        status: outcome.status,
        message: outcome.message,
        metrics: outcome.metrics,
    }
}

fn config_hash(config: &StudyConfig) -> String {
    let mut c = config.clone();
    c.output_dir = None;
    c.workers = 1;
    sha256_hex(&serde_json::to_vec(&c).expect("configs serialize"))
}

/// Runs every cell of `study`, reusing cells already stored under
/// `<out_dir>/cells`.
pub fn run_study(
    study: Study,
    config: &StudyConfig,
    inputs: &Inputs,
    options: &RunOptions,
) -> Result<StudyRun, RunError> {
    let groups = plan(study, config, inputs)?;
    let cache_dir = options.out_dir.join("cells");
    fs::create_dir_all(&cache_dir).map_err(|e| FileError::io(&cache_dir, e))?;
    let ctx = Ctx {
        options: SucOptions {
            build: BuildOptions {
                charge_facts_cost: config.charge_facts_cost,
            },
            solve: config.solve.clone(),
        },
        engine: &options.engine,
        work_dir: options.out_dir.join("external"),
        cache: Cache { dir: cache_dir },
        progress: options.progress,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<Vec<(CellReport, CellTiming)>> =
        pool.install(|| groups.par_iter().map(|g| ctx.run_group(g)).collect::<Result<_, _>>())?;
    let (cells, timings): (Vec<_>, Vec<_>) = results.into_iter().flatten().unzip();
    let case_json = serde_json::to_vec(&inputs.case).expect("cases serialize");
    Ok(StudyRun {
        report: StudyReport {
            study,
            metadata: ReportMetadata {
                config_hash: config_hash(config),
                case_hash: sha256_hex(&case_json),
                seed: config.solve.seed,
                mip_gap: config.solve.mip_gap,
                scenarios: config.scenarios,
                engine: options.engine.tag(),
                charge_facts_cost: config.charge_facts_cost,
                curtail_cost: config.curtail_cost,
                approximations: inputs.approximations.clone(),
            },
            cells,
        },
        timings,
    })
}

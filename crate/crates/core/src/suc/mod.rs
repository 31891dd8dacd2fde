//! Two-stage stochastic unit commitment with variable-susceptance lines.
//!
//! First stage: commitment `u, v, w` and dispatch `P` per unit and hour.
//! Second stage, per scenario: up/down deployment, curtailment, line flows
//! and bus angles. FACTS-equipped lines replace the fixed DC flow equation
//! with a pair of inequalities whose orientation follows the predicted flow
//! direction.

mod audit;
mod decode;
mod heuristic;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::facts::{self, FactsError, FactsSpec, FlowDirection};
use crate::grid::{CaseError, GridCase};
use crate::milp::{Clock, MilpError, MilpInstance, MipSolver, RowSense, SolveOptions, SolveStatus, VarKind};
use crate::renewables::ScenarioSet;

pub use audit::{audit, AuditReport};
pub use decode::{decode, CostBreakdown, SucSolution};
pub use heuristic::CommitmentRounding;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SucError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("no flow direction given for equipped line `{0}`")]
    MissingDirection(String),
    #[error("scenario set: {0}")]
    Scenarios(String),
    #[error("model is infeasible")]
    Infeasible,
    #[error("solver returned no solution (status {0:?})")]
    NoSolution(SolveStatus),
    #[error("decoded objective {computed} disagrees with solver objective {reported}")]
    Inconsistent { computed: f64, reported: f64 },
    #[error("fixed-commitment pricing LP ended with status {0:?}")]
    Pricing(SolveStatus),
    #[error("raw solution has {got} values, instance has {expected} variables")]
    Dimension { got: usize, expected: usize },
}

/// Formulation switches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildOptions {
    /// Add the hourly device rent `T Σ c_h` to the objective.
    pub charge_facts_cost: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            charge_facts_cost: true,
        }
    }
}

/// Variable and row indices of a built model.
#[derive(Clone, Debug)]
pub struct Layout {
    pub n_gen: usize,
    pub n_hours: usize,
    pub n_scen: usize,
    pub n_lines: usize,
    pub n_buses: usize,
    pub n_ren: usize,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub p: Vec<usize>,
    /// Segment variables per `(g, t)`.
    pub seg: Vec<Vec<usize>>,
    pub ru: Vec<usize>,
    pub rd: Vec<usize>,
    pub flow: Vec<usize>,
    /// `None` at the reference bus.
    pub theta: Vec<Option<usize>>,
    pub curtail: Vec<usize>,
    pub balance_rows: Vec<usize>,
    /// Scenario-set column of each case renewable.
    pub ren_column: Vec<usize>,
    /// Device limits of equipped lines, by line index.
    pub facts: Vec<Option<FactsSpec>>,
    /// Objective constant from device rent.
    pub facts_cost: f64,
}

impl Layout {
    #[inline]
    pub fn gt(&self, g: usize, t: usize) -> usize {
        g * self.n_hours + t
    }
    #[inline]
    pub fn gts(&self, g: usize, t: usize, s: usize) -> usize {
        (g * self.n_hours + t) * self.n_scen + s
    }
    #[inline]
    pub fn lts(&self, l: usize, t: usize, s: usize) -> usize {
        (l * self.n_hours + t) * self.n_scen + s
    }
    #[inline]
    pub fn bts(&self, b: usize, t: usize, s: usize) -> usize {
        (b * self.n_hours + t) * self.n_scen + s
    }
    #[inline]
    pub fn rts(&self, r: usize, t: usize, s: usize) -> usize {
        (r * self.n_hours + t) * self.n_scen + s
    }

    /// Indices of every binary variable.
    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.u.iter().chain(&self.v).chain(&self.w).copied()
    }
}

/// A built model: the instance plus the index map needed to read it back.
#[derive(Clone, Debug)]
pub struct SucModel {
    pub instance: MilpInstance,
    pub layout: Layout,
}

/// Start of the rolling min-up/min-down window ending at `t` (0-based),
/// covering `τ = t - span - 1 ..= t` truncated at the horizon start.
pub fn window_start(t: usize, span: u32) -> usize {
    t.saturating_sub(span as usize + 1)
}

fn check_scenarios(case: &GridCase, scenarios: &ScenarioSet) -> Result<Vec<usize>, SucError> {
    let bad = |m: String| Err(SucError::Scenarios(m));
    if scenarios.hours.len() != case.load_curve.len() {
        return bad(format!("{} hours for a {}-hour case", scenarios.hours.len(), case.load_curve.len()));
    }
    let n = scenarios.n_scenarios();
    if n == 0 {
        return bad("no scenarios".into());
    }
    let width = scenarios.resource_ids.len();
    for hour in &scenarios.hours {
        if hour.len() != n {
            return bad("scenario count differs across hours".into());
        }
        let total: f64 = hour.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad("hourly probabilities do not sum to 1".into());
        }
        if hour.iter().any(|s| s.power.len() != width || !(s.probability > 0.0)) {
            return bad("scenario has the wrong width or a nonpositive probability".into());
        }
    }
    case.renewables
        .iter()
        .map(|r| {
            scenarios
                .resource_index(&r.id)
                .ok_or_else(|| SucError::Scenarios(format!("no scenarios for renewable `{}`", r.id)))
        })
        .collect()
}

/// Builds the stochastic unit commitment MILP.
pub fn build(
    case: &GridCase,
    scenarios: &ScenarioSet,
    directions: &FlowDirection,
    options: &BuildOptions,
) -> Result<SucModel, SucError> {
    case.validate()?;
    let ren_column = check_scenarios(case, scenarios)?;
    let n_gen = case.generators.len();
    let n_hours = case.load_curve.len();
    let n_scen = scenarios.n_scenarios();
    let n_lines = case.lines.len();
    let n_buses = case.buses.len();
    let n_ren = case.renewables.len();
    let reference = case.reference_bus();

    let mut facts_specs = vec![None; n_lines];
    let mut facts_cost = 0.0;
    for (l, line) in case.lines.iter().enumerate() {
        if case.is_facts_enabled(&line.id) {
            if directions.get(&line.id).is_none() {
                return Err(SucError::MissingDirection(line.id.clone()));
            }
            facts_specs[l] = Some(FactsSpec::for_line(case, line)?);
            if options.charge_facts_cost {
                facts_cost += n_hours as f64 * facts::device_hourly_cost(case, &line.id)?;
            }
        }
    }

    let mut m = MilpInstance::new();
    m.objective_offset = facts_cost;
    let gt_len = n_gen * n_hours;
    let mut u = Vec::with_capacity(gt_len);
    let mut v = Vec::with_capacity(gt_len);
    let mut w = Vec::with_capacity(gt_len);
    let mut p = Vec::with_capacity(gt_len);
    let mut seg = Vec::with_capacity(gt_len);
    for (g, gen) in case.generators.iter().enumerate() {
        // After the first hour the ramp rows cap a start-up hour at 10·RU and
        // a shut-down hour's drop at 10·RD, so a unit whose minimum output
        // exceeds either can never take that transition. Fixing it here
        // leaves the feasible set unchanged and tightens the relaxation.
        let no_late_start = gen.p_min > 10.0 * gen.ramp_up;
        let no_stop = gen.p_min > 10.0 * gen.ramp_down;
        for t in 0..n_hours {
            let v_max = if t >= 1 && no_late_start { 0.0 } else { 1.0 };
            let w_max = if t >= 1 && no_stop { 0.0 } else { 1.0 };
            u.push(m.add_var(format!("u_{g}_{t}"), 0.0, 1.0, VarKind::Binary, gen.no_load_cost));
            v.push(m.add_var(format!("v_{g}_{t}"), 0.0, v_max, VarKind::Binary, gen.startup_cost));
            w.push(m.add_var(format!("w_{g}_{t}"), 0.0, w_max, VarKind::Binary, gen.shutdown_cost));
            p.push(m.add_var(format!("p_{g}_{t}"), 0.0, gen.p_max, VarKind::Continuous, 0.0));
            let ks = gen
                .segments
                .iter()
                .enumerate()
                .map(|(k, sg)| {
                    m.add_var(format!("seg_{g}_{t}_{k}"), 0.0, sg.width, VarKind::Continuous, sg.marginal_cost)
                })
                .collect();
            seg.push(ks);
        }
    }
    let mut ru = Vec::with_capacity(gt_len * n_scen);
    let mut rd = Vec::with_capacity(gt_len * n_scen);
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..n_hours {
            for s in 0..n_scen {
                let c = scenarios.probability(t, s) * gen.deploy_cost;
                ru.push(m.add_var(format!("ru_{g}_{t}_{s}"), 0.0, 10.0 * gen.ramp_up, VarKind::Continuous, c));
                rd.push(m.add_var(format!("rd_{g}_{t}_{s}"), 0.0, 10.0 * gen.ramp_down, VarKind::Continuous, c));
            }
        }
    }
    let mut flow = Vec::with_capacity(n_lines * n_hours * n_scen);
    for (l, line) in case.lines.iter().enumerate() {
        for t in 0..n_hours {
            for s in 0..n_scen {
                flow.push(m.add_var(
                    format!("pl_{l}_{t}_{s}"),
                    -line.rating,
                    line.rating,
                    VarKind::Continuous,
                    0.0,
                ));
            }
        }
    }
    let mut theta = Vec::with_capacity(n_buses * n_hours * n_scen);
    for b in 0..n_buses {
        for t in 0..n_hours {
            for s in 0..n_scen {
                theta.push((b != reference).then(|| {
                    m.add_var(
                        format!("th_{b}_{t}_{s}"),
                        f64::NEG_INFINITY,
                        f64::INFINITY,
                        VarKind::Continuous,
                        0.0,
                    )
                }));
            }
        }
    }
    let mut curtail = Vec::with_capacity(n_ren * n_hours * n_scen);
    for (r, unit) in case.renewables.iter().enumerate() {
        for t in 0..n_hours {
            for s in 0..n_scen {
                let avail = scenarios.power(ren_column[r], t, s);
                let c = scenarios.probability(t, s) * unit.curtail_cost;
                curtail.push(m.add_var(format!("rc_{r}_{t}_{s}"), 0.0, avail, VarKind::Continuous, c));
            }
        }
    }

    let mut layout = Layout {
        n_gen,
        n_hours,
        n_scen,
        n_lines,
        n_buses,
        n_ren,
        u,
        v,
        w,
        p,
        seg,
        ru,
        rd,
        flow,
        theta,
        curtail,
        balance_rows: Vec::new(),
        ren_column,
        facts: facts_specs,
        facts_cost,
    };
    let ly = &layout;

    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..n_hours {
            let i = ly.gt(g, t);
            // Dispatch is p_min while committed plus the filled segments.
            let mut row = vec![(ly.p[i], 1.0), (ly.u[i], -gen.p_min)];
            row.extend(ly.seg[i].iter().map(|&j| (j, -1.0)));
            m.add_row(format!("disp_{g}_{t}"), row, RowSense::Eq, 0.0);
            for (k, sg) in gen.segments.iter().enumerate() {
                if sg.width > 0.0 {
                    m.add_row(
                        format!("segcap_{g}_{t}_{k}"),
                        vec![(ly.seg[i][k], 1.0), (ly.u[i], -sg.width)],
                        RowSense::Le,
                        0.0,
                    );
                }
            }
            for s in 0..n_scen {
                let j = ly.gts(g, t, s);
                m.add_row(
                    format!("pmax_{g}_{t}_{s}"),
                    vec![(ly.p[i], 1.0), (ly.ru[j], 1.0), (ly.rd[j], -1.0), (ly.u[i], -gen.p_max)],
                    RowSense::Le,
                    0.0,
                );
                m.add_row(
                    format!("pmin_{g}_{t}_{s}"),
                    vec![(ly.p[i], 1.0), (ly.ru[j], 1.0), (ly.rd[j], -1.0), (ly.u[i], -gen.p_min)],
                    RowSense::Ge,
                    0.0,
                );
            }
            // Units start the horizon offline.
            let mut row = vec![(ly.v[i], 1.0), (ly.w[i], -1.0), (ly.u[i], -1.0)];
            if t > 0 {
                row.push((ly.u[ly.gt(g, t - 1)], 1.0));
            }
            m.add_row(format!("trans_{g}_{t}"), row, RowSense::Eq, 0.0);
            m.add_row(
                format!("onoff_{g}_{t}"),
                vec![(ly.v[i], 1.0), (ly.w[i], 1.0)],
                RowSense::Le,
                1.0,
            );
            let mut row: Vec<(usize, f64)> = (window_start(t, gen.min_up)..=t)
                .map(|tau| (ly.v[ly.gt(g, tau)], 1.0))
                .collect();
            row.push((ly.u[i], -1.0));
            m.add_row(format!("minup_{g}_{t}"), row, RowSense::Le, 0.0);
            let mut row: Vec<(usize, f64)> = (window_start(t, gen.min_down)..=t)
                .map(|tau| (ly.w[ly.gt(g, tau)], 1.0))
                .collect();
            row.push((ly.u[i], 1.0));
            m.add_row(format!("mindn_{g}_{t}"), row, RowSense::Le, 1.0);
            if t >= 1 {
                let prev = ly.gt(g, t - 1);
                m.add_row(
                    format!("rampup_{g}_{t}"),
                    vec![
                        (ly.p[i], 1.0),
                        (ly.p[prev], -1.0),
                        (ly.u[prev], -60.0 * gen.ramp_up),
                        (ly.v[i], -10.0 * gen.ramp_up),
                    ],
                    RowSense::Le,
                    0.0,
                );
                m.add_row(
                    format!("rampdn_{g}_{t}"),
                    vec![
                        (ly.p[prev], 1.0),
                        (ly.p[i], -1.0),
                        (ly.u[i], -60.0 * gen.ramp_down),
                        (ly.w[i], -10.0 * gen.ramp_down),
                    ],
                    RowSense::Le,
                    0.0,
                );
            }
        }
    }

    let bus_of = |id: u32| case.bus_index(id).expect("validated bus");
    for (l, line) in case.lines.iter().enumerate() {
        let (a, b) = (bus_of(line.from_bus), bus_of(line.to_bus));
        for t in 0..n_hours {
            for s in 0..n_scen {
                let angle_terms = |k: f64| {
                    let mut terms = Vec::with_capacity(3);
                    terms.push((ly.flow[ly.lts(l, t, s)], 1.0));
                    if let Some(j) = ly.theta[ly.bts(a, t, s)] {
                        terms.push((j, -k));
                    }
                    if let Some(j) = ly.theta[ly.bts(b, t, s)] {
                        terms.push((j, k));
                    }
                    terms
                };
                match &ly.facts[l] {
                    None => {
                        let k = case.s_base * line.susceptance_nominal;
                        m.add_row(format!("flow_{l}_{t}_{s}"), angle_terms(k), RowSense::Eq, 0.0);
                    }
                    Some(spec) => {
                        let forward = directions.get(&line.id).unwrap_or(true);
                        let (lo, hi) = if forward {
                            (spec.b_min, spec.b_max)
                        } else {
                            (spec.b_max, spec.b_min)
                        };
                        m.add_row(
                            format!("flo_{l}_{t}_{s}"),
                            angle_terms(case.s_base * lo),
                            RowSense::Ge,
                            0.0,
                        );
                        m.add_row(
                            format!("fhi_{l}_{t}_{s}"),
                            angle_terms(case.s_base * hi),
                            RowSense::Le,
                            0.0,
                        );
                    }
                }
            }
        }
    }

    let mut gens_at = vec![Vec::new(); n_buses];
    for (g, gen) in case.generators.iter().enumerate() {
        gens_at[bus_of(gen.bus)].push(g);
    }
    let mut ren_at = vec![Vec::new(); n_buses];
    for (r, unit) in case.renewables.iter().enumerate() {
        ren_at[bus_of(unit.bus)].push(r);
    }
    let mut lines_at = vec![Vec::new(); n_buses];
    for (l, line) in case.lines.iter().enumerate() {
        lines_at[bus_of(line.from_bus)].push((l, -1.0));
        lines_at[bus_of(line.to_bus)].push((l, 1.0));
    }
    let mut balance_rows = Vec::with_capacity(n_buses * n_hours * n_scen);
    for b in 0..n_buses {
        for t in 0..n_hours {
            for s in 0..n_scen {
                let mut row = Vec::new();
                for &g in &gens_at[b] {
                    let j = ly.gts(g, t, s);
                    row.push((ly.p[ly.gt(g, t)], 1.0));
                    row.push((ly.ru[j], 1.0));
                    row.push((ly.rd[j], -1.0));
                }
                let mut rhs = case.demand(b, t);
                for &r in &ren_at[b] {
                    row.push((ly.curtail[ly.rts(r, t, s)], -1.0));
                    rhs -= scenarios.power(ly.ren_column[r], t, s);
                }
                for &(l, sign) in &lines_at[b] {
                    row.push((ly.flow[ly.lts(l, t, s)], sign));
                }
                balance_rows.push(m.add_row(format!("bal_{b}_{t}_{s}"), row, RowSense::Eq, rhs));
            }
        }
    }
    layout.balance_rows = balance_rows;
    Ok(SucModel { instance: m, layout })
}

/// Solve settings for one stochastic UC run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SucOptions {
    pub build: BuildOptions,
    pub solve: SolveOptions,
}

/// Builds, solves with the embedded engine, and decodes.
pub fn solve(
    case: &GridCase,
    scenarios: &ScenarioSet,
    directions: &FlowDirection,
    options: &SucOptions,
    clock: &dyn Clock,
) -> Result<SucSolution, SucError> {
    let model = build(case, scenarios, directions, &options.build)?;
    let rounding = CommitmentRounding::new(case, &model.layout);
    let raw = MipSolver::new(options.solve.clone())
        .with_clock(clock)
        .with_heuristic(&rounding)
        .solve(&model.instance)?;
    match raw.status {
        SolveStatus::Infeasible => return Err(SucError::Infeasible),
        s if !s.has_solution() => return Err(SucError::NoSolution(s)),
        _ => {}
    }
    decode(&model, &raw, case, scenarios, &options.solve)
}

/// Solves with every device disabled and reads flow directions for the
/// case's equipped lines off that solution. Also returns the solution.
pub fn predict_flow_directions(
    case: &GridCase,
    scenarios: &ScenarioSet,
    options: &SucOptions,
    clock: &dyn Clock,
) -> Result<(FlowDirection, SucSolution), SucError> {
    let bare = case.with_facts(&[])?;
    let presolve = solve(&bare, scenarios, &FlowDirection::default(), options, clock)?;
    let dirs = facts::directions_from_solution(case, scenarios, &presolve, &case.facts.enabled_lines)?;
    Ok((dirs, presolve))
}

//! Constraint checker that works from case data and a decoded schedule,
//! independent of the assembled constraint matrix.

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::{window_start, SucSolution};
use crate::facts::{susceptance_range, FlowDirection};
use crate::grid::GridCase;
use crate::renewables::ScenarioSet;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Largest violation found, in MW (or unitless for logic rows).
    pub max_violation: f64,
    /// Label of the constraint attaining it.
    pub worst: String,
    /// Number of constraint instances evaluated.
    pub checked: usize,
}

impl AuditReport {
    fn note(&mut self, violation: f64, label: impl FnOnce() -> String) {
        self.checked += 1;
        if violation > self.max_violation {
            self.max_violation = violation;
            self.worst = label();
        }
    }
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

/// Evaluates every constraint family of the model on `sol`.
pub fn audit(
    case: &GridCase,
    scenarios: &ScenarioSet,
    directions: &FlowDirection,
    sol: &SucSolution,
) -> AuditReport {
    let mut rep = AuditReport::default();
    let nh = case.load_curve.len();
    let ns = scenarios.n_scenarios();

    for (g, gen) in case.generators.iter().enumerate() {
        let u = |t: usize| b(sol.commitment[g][t]);
        for t in 0..nh {
            let p = sol.dispatch[g][t];
            let seg_sum: f64 = sol.segments[g][t].iter().sum();
            rep.note((p - gen.p_min * u(t) - seg_sum).abs(), || format!("dispatch g{g} t{t}"));
            for (k, sg) in gen.segments.iter().enumerate() {
                let x = sol.segments[g][t][k];
                rep.note((-x).max(x - sg.width * u(t)), || format!("segment g{g} t{t} k{k}"));
            }
            for s in 0..ns {
                let up = sol.deploy_up[g][t][s];
                let dn = sol.deploy_down[g][t][s];
                let out = p + up - dn;
                rep.note(out - gen.p_max * u(t), || format!("max output g{g} t{t} s{s}"));
                rep.note(gen.p_min * u(t) - out, || format!("min output g{g} t{t} s{s}"));
                rep.note((-up).max(up - 10.0 * gen.ramp_up), || format!("deploy up g{g} t{t} s{s}"));
                rep.note((-dn).max(dn - 10.0 * gen.ramp_down), || format!("deploy down g{g} t{t} s{s}"));
            }
            let prev = if t == 0 { 0.0 } else { u(t - 1) };
            let v = b(sol.startup[g][t]);
            let w = b(sol.shutdown[g][t]);
            rep.note((v - w - (u(t) - prev)).abs(), || format!("transition g{g} t{t}"));
            rep.note(v + w - 1.0, || format!("start/stop exclusive g{g} t{t}"));
            let starts: f64 = (window_start(t, gen.min_up)..=t).map(|k| b(sol.startup[g][k])).sum();
            rep.note(starts - u(t), || format!("min up g{g} t{t}"));
            let stops: f64 = (window_start(t, gen.min_down)..=t).map(|k| b(sol.shutdown[g][k])).sum();
            rep.note(stops - (1.0 - u(t)), || format!("min down g{g} t{t}"));
            if t >= 1 {
                let dp = p - sol.dispatch[g][t - 1];
                rep.note(dp - 60.0 * gen.ramp_up * u(t - 1) - 10.0 * gen.ramp_up * v, || {
                    format!("ramp up g{g} t{t}")
                });
                rep.note(-dp - 60.0 * gen.ramp_down * u(t) - 10.0 * gen.ramp_down * w, || {
                    format!("ramp down g{g} t{t}")
                });
            }
        }
    }

    rep.note(
        case.facts.enabled_lines.len() as f64 - case.facts.n_max as f64,
        || String::from("device budget"),
    );

    for (l, line) in case.lines.iter().enumerate() {
        let a = case.bus_index(line.from_bus).unwrap();
        let z = case.bus_index(line.to_bus).unwrap();
        let equipped = case.is_facts_enabled(&line.id);
        let range = susceptance_range(line, case.facts.delta_min, case.facts.delta_max).ok();
        for t in 0..nh {
            for s in 0..ns {
                let pl = sol.flow[l][t][s];
                let d = case.s_base * (sol.theta[a][t][s] - sol.theta[z][t][s]);
                rep.note(pl.abs() - line.rating, || format!("rating {} t{t} s{s}", line.id));
                match (equipped, range) {
                    (true, Some((lo, hi))) => {
                        let f = directions.get(&line.id).unwrap_or(true);
                        let (first, second) = if f { (lo, hi) } else { (hi, lo) };
                        rep.note(first * d - pl, || format!("device lower {} t{t} s{s}", line.id));
                        rep.note(pl - second * d, || format!("device upper {} t{t} s{s}", line.id));
                    }
                    _ => rep.note((pl - line.susceptance_nominal * d).abs(), || {
                        format!("dc flow {} t{t} s{s}", line.id)
                    }),
                }
            }
        }
    }

    for (r, unit) in case.renewables.iter().enumerate() {
        let col = scenarios.resource_index(&unit.id);
        for t in 0..nh {
            for s in 0..ns {
                let avail = col.map_or(0.0, |c| scenarios.power(c, t, s));
                let rc = sol.curtailment[r][t][s];
                rep.note((-rc).max(rc - avail), || format!("curtailment {} t{t} s{s}", unit.id));
            }
        }
    }

    for (bi, bus) in case.buses.iter().enumerate() {
        for t in 0..nh {
            for s in 0..ns {
                let mut net = -case.demand(bi, t);
                for (g, gen) in case.generators.iter().enumerate() {
                    if gen.bus == bus.id {
                        net += sol.dispatch[g][t] + sol.deploy_up[g][t][s] - sol.deploy_down[g][t][s];
                    }
                }
                for (r, unit) in case.renewables.iter().enumerate() {
                    if unit.bus == bus.id {
                        let avail = scenarios
                            .resource_index(&unit.id)
                            .map_or(0.0, |c| scenarios.power(c, t, s));
                        net += avail - sol.curtailment[r][t][s];
                    }
                }
                for (l, line) in case.lines.iter().enumerate() {
                    if line.to_bus == bus.id {
                        net += sol.flow[l][t][s];
                    }
                    if line.from_bus == bus.id {
                        net -= sol.flow[l][t][s];
                    }
                }
                rep.note(net.abs(), || format!("balance bus {} t{t} s{s}", bus.id));
            }
        }
    }
    rep
}

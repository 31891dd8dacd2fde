//! Root heuristic: round commitment, repair it to satisfy the logical and
//! start/stop ramp rules, and derive start-ups and shut-downs.

use alloc::vec;
use alloc::vec::Vec;

use super::Layout;
use crate::grid::GridCase;
use crate::milp::MipHeuristic;

/// Rounding thresholds tried in order; lower ones commit more units.
const THRESHOLDS: [f64; 3] = [0.5, 0.1, 1e-4];

pub struct CommitmentRounding<'a> {
    case: &'a GridCase,
    layout: &'a Layout,
}

impl<'a> CommitmentRounding<'a> {
    pub fn new(case: &'a GridCase, layout: &'a Layout) -> Self {
        Self { case, layout }
    }

    /// Makes one unit's on/off pattern logically feasible by only switching
    /// hours on.
    fn repair(&self, g: usize, on: &mut [bool]) {
        let gen = &self.case.generators[g];
        let nh = on.len();
        // With every unit offline before the horizon, a unit whose minimum
        // output exceeds its start-up ramp can only start in the first hour,
        // and one whose minimum exceeds its shut-down ramp never stops.
        let late_start_ok = gen.p_min <= 10.0 * gen.ramp_up + 1e-9;
        let stop_ok = gen.p_min <= 10.0 * gen.ramp_down + 1e-9;
        let min_on = gen.min_up as usize + 2;
        let min_off = gen.min_down as usize + 2;
        for _ in 0..2 * nh {
            let before = on.to_vec();
            if let (Some(first), Some(last)) = (on.iter().position(|&x| x), on.iter().rposition(|&x| x)) {
                if !late_start_ok {
                    on[..=last].fill(true);
                }
                if !stop_ok {
                    on[first..].fill(true);
                }
            }
            let mut t = 0;
            while t < nh {
                if on[t] && (t == 0 || !on[t - 1]) {
                    let end = (t + min_on).min(nh);
                    on[t..end].fill(true);
                }
                t += 1;
            }
            // Off spells between two on spells must last min_off hours.
            let mut t = 1;
            while t < nh {
                if on[t - 1] && !on[t] {
                    let next_on = (t..nh).find(|&k| on[k]);
                    if let Some(k) = next_on {
                        if k - t < min_off {
                            on[t..k].fill(true);
                        }
                    }
                }
                t += 1;
            }
            if on == before.as_slice() {
                break;
            }
        }
    }

    fn assignment(&self, pattern: &[Vec<bool>], n_vars: usize) -> Vec<f64> {
        let ly = self.layout;
        let mut x = vec![0.0; n_vars];
        for (g, on) in pattern.iter().enumerate() {
            for t in 0..ly.n_hours {
                let i = ly.gt(g, t);
                let prev = t > 0 && on[t - 1];
                x[ly.u[i]] = if on[t] { 1.0 } else { 0.0 };
                x[ly.v[i]] = if on[t] && !prev { 1.0 } else { 0.0 };
                x[ly.w[i]] = if !on[t] && prev { 1.0 } else { 0.0 };
            }
        }
        x
    }
}

impl MipHeuristic for CommitmentRounding<'_> {
    fn propose(&self, relaxation: &[f64]) -> Vec<Vec<f64>> {
        let ly = self.layout;
        let mut patterns: Vec<Vec<Vec<bool>>> = Vec::new();
        for threshold in THRESHOLDS {
            let pattern: Vec<Vec<bool>> = (0..ly.n_gen)
                .map(|g| {
                    let mut on: Vec<bool> = (0..ly.n_hours)
                        .map(|t| relaxation[ly.u[ly.gt(g, t)]] > threshold)
                        .collect();
                    self.repair(g, &mut on);
                    on
                })
                .collect();
            if !patterns.contains(&pattern) {
                patterns.push(pattern);
            }
        }
        let all_on = vec![vec![true; ly.n_hours]; ly.n_gen];
        if !patterns.contains(&all_on) {
            patterns.push(all_on);
        }
        patterns
            .iter()
            .map(|p| self.assignment(p, relaxation.len()))
            .collect()
    }
}

#![allow(dead_code)]

use gridflex_core::milp::{MilpInstance, RawSolution, RowSense, SolveStatus, VarKind};
use rand::rngs::StdRng;
use rand::Rng;

/// Random bounded MILP that is feasible by construction unless `tight` is set.
pub fn random_milp(rng: &mut StdRng, max_bin: usize, max_cont: usize, tight: bool) -> MilpInstance {
    let nb = rng.gen_range(1..=max_bin);
    let nc = rng.gen_range(0..=max_cont);
    let mut m = MilpInstance::new();
    let mut point = Vec::new();
    for k in 0..nb {
        m.add_var(format!("b{k}"), 0.0, 1.0, VarKind::Binary, rng.gen_range(-10.0..10.0));
        point.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }
    for k in 0..nc {
        let lo = if rng.gen_bool(0.3) { rng.gen_range(-5.0..0.0) } else { 0.0 };
        let hi = lo + rng.gen_range(0.5..8.0);
        m.add_var(format!("c{k}"), lo, hi, VarKind::Continuous, rng.gen_range(-10.0..10.0));
        point.push(rng.gen_range(lo..hi));
    }
    let n = nb + nc;
    let rows = rng.gen_range(1..=(n / 2 + 4));
    for r in 0..rows {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.4) {
                coeffs.push((j, (rng.gen_range(-5.0..5.0f64) * 4.0).round() / 4.0));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.gen_range(0..n), 1.0));
        }
        let lhs: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
        let slack = if tight { rng.gen_range(-2.0..1.0) } else { rng.gen_range(0.0..3.0) };
        let (sense, rhs) = match rng.gen_range(0..5) {
            0 => (RowSense::Eq, lhs),
            1 | 2 => (RowSense::Le, lhs + slack),
            _ => (RowSense::Ge, lhs - slack),
        };
        m.add_row(format!("r{r}"), coeffs, sense, rhs);
    }
    m
}

/// Dual objective `bᵀy + Σ min over bounds of d_j x_j`, or `None` if some
/// reduced cost points at an infinite bound.
pub fn dual_objective(m: &MilpInstance, y: &[f64], tol: f64) -> Option<f64> {
    let mut d: Vec<f64> = m.variables.iter().map(|v| v.cost).collect();
    let mut obj = m.objective_offset;
    for (row, &yi) in m.rows.iter().zip(y) {
        obj += yi * row.rhs;
        for &(j, a) in &row.coeffs {
            d[j] -= a * yi;
        }
    }
    for (v, &dj) in m.variables.iter().zip(&d) {
        let bound = if dj > 0.0 { v.lower } else { v.upper };
        if dj.abs() <= tol {
            continue;
        }
        if !bound.is_finite() {
            return None;
        }
        obj += dj * bound;
    }
    Some(obj)
}

/// Sign pattern a minimization dual must obey.
pub fn dual_signs_ok(m: &MilpInstance, y: &[f64], tol: f64) -> bool {
    m.rows.iter().zip(y).all(|(row, &yi)| match row.sense {
        RowSense::Le => yi <= tol,
        RowSense::Ge => yi >= -tol,
        RowSense::Eq => true,
    })
}

/// Enumerates every binary assignment and solves the remaining LP.
pub fn brute_force(m: &MilpInstance) -> Option<f64> {
    let bins: Vec<usize> = (0..m.variables.len())
        .filter(|&j| m.variables[j].kind == VarKind::Binary)
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1 << bins.len()) {
        let mut fixed = m.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            fixed.variables[j].lower = v;
            fixed.variables[j].upper = v;
            fixed.variables[j].kind = VarKind::Continuous;
        }
        let s: RawSolution = gridflex_core::milp::solve_lp(&fixed).unwrap();
        assert!(
            matches!(s.status, SolveStatus::Optimal | SolveStatus::Infeasible),
            "unexpected LP status {:?}",
            s.status
        );
        if s.status == SolveStatus::Optimal {
            best = Some(best.map_or(s.objective, |b: f64| b.min(s.objective)));
        }
    }
    best
}

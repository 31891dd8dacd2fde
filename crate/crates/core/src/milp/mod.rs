//! Mixed-integer linear programming engine.
//!
//! Instances are stated in natural form (bounded variables, sparse rows with a
//! sense and right-hand side, minimization). Linear relaxations are solved by a
//! bounded revised simplex over a sparse LU factorization; integrality is
//! recovered by best-bound branch-and-bound with pseudo-cost branching.

mod bnb;
mod lp;
mod lu;
pub mod mps;
mod simplex;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use bnb::{Clock, MipHeuristic, NoClock};

/// Integrality class of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Binary,
}

/// Sense of a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Abstract sparse MILP: `min cᵀx + offset` subject to rows and variable bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Constant added to every objective value.
    pub objective_offset: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MilpError {
    #[error("variable `{name}` has a non-finite cost or NaN bound")]
    BadVariable { name: String },
    #[error("variable `{name}` has lower bound {lower} above upper bound {upper}")]
    EmptyDomain { name: String, lower: f64, upper: f64 },
    #[error("binary variable `{name}` has bounds outside [0, 1]")]
    BinaryBounds { name: String },
    #[error("row `{row}` references undeclared variable index {index}")]
    UnknownVariable { row: String, index: usize },
    #[error("row `{row}` has a non-finite coefficient or right-hand side")]
    BadRow { row: String },
    #[error("row `{row}` references variable index {index} twice")]
    DuplicateEntry { row: String, index: usize },
}

impl MilpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
        cost: f64,
    ) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            kind,
            cost,
        });
        self.variables.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        for v in &self.variables {
            if !v.cost.is_finite() || v.lower.is_nan() || v.upper.is_nan() {
                return Err(MilpError::BadVariable {
                    name: v.name.clone(),
                });
            }
            if v.lower > v.upper {
                return Err(MilpError::EmptyDomain {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(MilpError::BinaryBounds {
                    name: v.name.clone(),
                });
            }
        }
        let mut seen = alloc::vec![usize::MAX; self.variables.len()];
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(MilpError::BadRow {
                    row: row.name.clone(),
                });
            }
            for &(j, a) in &row.coeffs {
                if j >= self.variables.len() {
                    return Err(MilpError::UnknownVariable {
                        row: row.name.clone(),
                        index: j,
                    });
                }
                if !a.is_finite() {
                    return Err(MilpError::BadRow {
                        row: row.name.clone(),
                    });
                }
                if seen[j] == r {
                    return Err(MilpError::DuplicateEntry {
                        row: row.name.clone(),
                        index: j,
                    });
                }
                seen[j] = r;
            }
        }
        if !self.objective_offset.is_finite() {
            return Err(MilpError::BadRow {
                row: String::from("objective"),
            });
        }
        Ok(())
    }

    /// Objective value of an arbitrary point (offset included).
    pub fn objective_at(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.cost * x)
            .sum::<f64>()
            + self.objective_offset
    }

    /// Largest bound or row violation of a point, in the instance's own units.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let viol = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => libm::fabs(lhs - row.rhs),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

/// Branching rule for choosing the variable to split on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branching {
    MostFractional,
    PseudoCost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which search stops.
    pub mip_gap: f64,
    pub time_limit_s: f64,
    pub node_limit: u64,
    pub lp_tolerance: f64,
    pub branching: Branching,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mip_gap: 0.01,
            time_limit_s: 600.0,
            node_limit: 100_000,
            lp_tolerance: 1e-7,
            branching: Branching::PseudoCost,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped at a node or time limit with an incumbent.
    GapLimited,
    /// Stopped at a limit without any incumbent.
    NoSolution,
    Infeasible,
    Unbounded,
    /// The simplex failed to make progress; values hold the best iterate.
    Stalled,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::GapLimited)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound on the optimal objective.
    pub bound: f64,
    pub status: SolveStatus,
    pub node_count: u64,
    /// Row duals `∂objective/∂rhs`, present for pure LP solves.
    pub duals: Option<Vec<f64>>,
}

impl RawSolution {
    pub fn relative_gap(&self) -> f64 {
        if !self.status.has_solution() {
            return f64::INFINITY;
        }
        let denom = libm::fabs(self.objective).max(1.0);
        (self.objective - self.bound).max(0.0) / denom
    }
}

/// Solves the linear relaxation of `instance` (integrality ignored).
pub fn solve_lp(instance: &MilpInstance) -> Result<RawSolution, MilpError> {
    solve_lp_with(instance, &SolveOptions::default())
}

pub fn solve_lp_with(
    instance: &MilpInstance,
    options: &SolveOptions,
) -> Result<RawSolution, MilpError> {
    instance.validate()?;
    Ok(lp::solve_relaxation(instance, options))
}

/// Solves `instance` to the configured relative gap.
pub fn solve_mip(instance: &MilpInstance, options: &SolveOptions) -> Result<RawSolution, MilpError> {
    MipSolver::new(options.clone()).solve(instance)
}

/// Branch-and-bound driver with an optional wall clock and primal heuristic.
pub struct MipSolver<'h> {
    options: SolveOptions,
    clock: &'h dyn Clock,
    heuristic: Option<&'h dyn MipHeuristic>,
}

impl<'h> MipSolver<'h> {
    pub fn new(options: SolveOptions) -> Self {
        Self {
            options,
            clock: &NoClock,
            heuristic: None,
        }
    }

    pub fn with_clock(mut self, clock: &'h dyn Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_heuristic(mut self, heuristic: &'h dyn MipHeuristic) -> Self {
        self.heuristic = Some(heuristic);
        self
    }

    pub fn solve(&self, instance: &MilpInstance) -> Result<RawSolution, MilpError> {
        instance.validate()?;
        Ok(bnb::branch_and_bound(
            instance,
            &self.options,
            self.clock,
            self.heuristic,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn exact() -> SolveOptions {
        SolveOptions {
            mip_gap: 0.0,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn lower_bound_row_dual_is_one() {
        let mut m = MilpInstance::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, VarKind::Continuous, 1.0);
        m.add_row("r", vec![(x, 1.0)], RowSense::Ge, 3.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[x] - 3.0).abs() < 1e-9);
        assert!((s.duals.unwrap()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn simple_maximization() {
        let mut m = MilpInstance::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, VarKind::Continuous, -1.0);
        let y = m.add_var("y", 0.0, f64::INFINITY, VarKind::Continuous, -1.0);
        m.add_row("cap", vec![(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
        let s = solve_lp(&m).unwrap();
        assert!((s.objective + 1.0).abs() < 1e-9);
        assert!((s.duals.unwrap()[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = MilpInstance::new();
        let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous, 1.0);
        m.add_row("a", vec![(x, 1.0)], RowSense::Le, 0.0);
        m.add_row("b", vec![(x, 1.0)], RowSense::Ge, 1.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);
        assert_eq!(solve_mip(&m, &exact()).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray_is_detected() {
        let mut m = MilpInstance::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, VarKind::Continuous, -1.0);
        let y = m.add_var("y", 0.0, f64::INFINITY, VarKind::Continuous, 0.0);
        m.add_row("r", vec![(x, 1.0), (y, -1.0)], RowSense::Le, 2.0);
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn knapsack_picks_the_better_item() {
        let mut m = MilpInstance::new();
        let a = m.add_var("a", 0.0, 1.0, VarKind::Binary, -3.0);
        let b = m.add_var("b", 0.0, 1.0, VarKind::Binary, -2.0);
        m.add_row("one", vec![(a, 1.0), (b, 1.0)], RowSense::Le, 1.5);
        let s = solve_mip(&m, &exact()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 3.0).abs() < 1e-9);
        assert_eq!(s.values[a], 1.0);
        assert_eq!(s.values[b], 0.0);
    }

    #[test]
    fn branching_is_needed_for_fractional_root() {
        // max 5a + 4b + 3c, 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut m = MilpInstance::new();
        let a = m.add_var("a", 0.0, 1.0, VarKind::Binary, -5.0);
        let b = m.add_var("b", 0.0, 1.0, VarKind::Binary, -4.0);
        let c = m.add_var("c", 0.0, 1.0, VarKind::Binary, -3.0);
        let z = m.add_var("z", 0.0, 3.0, VarKind::Continuous, -0.5);
        m.add_row("r1", vec![(a, 2.0), (b, 3.0), (c, 1.0), (z, 1.0)], RowSense::Le, 5.5);
        m.add_row("r2", vec![(a, 4.0), (b, 1.0), (c, 2.0)], RowSense::Le, 11.0);
        m.add_row("r3", vec![(a, 3.0), (b, 4.0), (c, 2.0)], RowSense::Le, 8.0);
        let s = solve_mip(&m, &exact()).unwrap();
        // Enumerate by hand: a=b=1 uses 5.0 of r1, leaving z=0.5: -9.25.
        // a=c=1: r1 uses 3 -> z=2.5: -8 - 1.25 = -9.25. a=b=c: r1 = 6 > 5.5.
        assert!((s.objective + 9.25).abs() < 1e-9, "{}", s.objective);
        assert!(m.max_violation(&s.values) < 1e-9);
    }

    #[test]
    fn validation_rejects_bad_binary() {
        let mut m = MilpInstance::new();
        m.add_var("u", 0.0, 2.0, VarKind::Binary, 0.0);
        assert!(matches!(m.validate(), Err(MilpError::BinaryBounds { .. })));
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // min |x - 2| style: x free, t >= x - 2, t >= 2 - x.
        let mut m = MilpInstance::new();
        let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous, 0.0);
        let t = m.add_var("t", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous, 1.0);
        let w = m.add_var("w", 0.0, 10.0, VarKind::Continuous, 0.0);
        m.add_row("a", vec![(t, 1.0), (x, -1.0)], RowSense::Ge, -2.0);
        m.add_row("b", vec![(t, 1.0), (x, 1.0)], RowSense::Ge, 2.0);
        m.add_row("c", vec![(x, 1.0), (w, 1.0)], RowSense::Eq, 7.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!(s.objective.abs() < 1e-9);
        assert!(m.max_violation(&s.values) < 1e-9);
    }
}

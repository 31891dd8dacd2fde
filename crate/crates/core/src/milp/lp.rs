//! Scaled computational form of an instance and the pure-LP entry point.

use alloc::vec;
use alloc::vec::Vec;

use super::simplex::{LpStatus, Simplex};
use super::{MilpInstance, RawSolution, RowSense, SolveOptions, SolveStatus};

const SCALING_PASSES: usize = 6;

/// `A x - s = 0` with `l ≤ (x, s) ≤ u`, after row/column equilibration.
///
/// Original quantities relate to scaled ones by `x = col_scale · x̃`,
/// `s = s̃ / row_scale`, `y = row_scale · ỹ`.
pub(crate) struct LpData {
    pub n: usize,
    pub m: usize,
    pub col_start: Vec<usize>,
    pub col_row: Vec<usize>,
    pub col_val: Vec<f64>,
    pub row_start: Vec<usize>,
    pub row_col: Vec<usize>,
    pub row_val: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub row_scale: Vec<f64>,
    pub offset: f64,
}

fn pow2_round(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    libm::exp2(libm::round(libm::log2(v)))
}

impl LpData {
    pub(crate) fn new(instance: &MilpInstance) -> Self {
        let n = instance.variables.len();
        let m = instance.rows.len();

        // Row-major copy for scaling.
        let mut row_start = Vec::with_capacity(m + 1);
        let mut row_col = Vec::new();
        let mut row_val = Vec::new();
        row_start.push(0);
        for row in &instance.rows {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    row_col.push(j);
                    row_val.push(a);
                }
            }
            row_start.push(row_col.len());
        }

        // Geometric-mean equilibration, rounded to powers of two.
        let mut row_scale = vec![1.0; m];
        let mut col_scale = vec![1.0; n];
        for _ in 0..SCALING_PASSES {
            for i in 0..m {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for e in row_start[i]..row_start[i + 1] {
                    let v = libm::fabs(row_val[e]) * col_scale[row_col[e]];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if hi > 0.0 {
                    row_scale[i] = 1.0 / libm::sqrt(lo * hi);
                }
            }
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![0.0f64; n];
            for i in 0..m {
                for e in row_start[i]..row_start[i + 1] {
                    let j = row_col[e];
                    let v = libm::fabs(row_val[e]) * row_scale[i];
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
            for j in 0..n {
                if hi[j] > 0.0 {
                    col_scale[j] = 1.0 / libm::sqrt(lo[j] * hi[j]);
                }
            }
        }
        for s in row_scale.iter_mut().chain(col_scale.iter_mut()) {
            *s = pow2_round(*s);
        }

        for i in 0..m {
            for e in row_start[i]..row_start[i + 1] {
                row_val[e] *= row_scale[i] * col_scale[row_col[e]];
            }
        }

        // Column-major copy.
        let mut counts = vec![0usize; n + 1];
        for &j in &row_col {
            counts[j + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let mut col_row = vec![0; row_col.len()];
        let mut col_val = vec![0.0; row_col.len()];
        for i in 0..m {
            for e in row_start[i]..row_start[i + 1] {
                let j = row_col[e];
                let at = fill[j];
                col_row[at] = i;
                col_val[at] = row_val[e];
                fill[j] += 1;
            }
        }

        let mut cost = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for (j, v) in instance.variables.iter().enumerate() {
            cost.push(v.cost * col_scale[j]);
            lower.push(v.lower / col_scale[j]);
            upper.push(v.upper / col_scale[j]);
        }
        for (i, row) in instance.rows.iter().enumerate() {
            let b = row.rhs * row_scale[i];
            let (l, u) = match row.sense {
                RowSense::Le => (f64::NEG_INFINITY, b),
                RowSense::Ge => (b, f64::INFINITY),
                RowSense::Eq => (b, b),
            };
            lower.push(l);
            upper.push(u);
        }

        LpData {
            n,
            m,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            cost,
            lower,
            upper,
            col_scale,
            row_scale,
            offset: instance.objective_offset,
        }
    }

    pub(crate) fn iteration_budget(&self) -> u64 {
        (50 * (self.n + self.m) as u64).max(10_000)
    }

    /// Unscaled structural values of the simplex's current point.
    pub(crate) fn values(&self, simplex: &Simplex<'_>) -> Vec<f64> {
        (0..self.n)
            .map(|j| simplex.value(j) * self.col_scale[j])
            .collect()
    }

    pub(crate) fn duals(&self, simplex: &Simplex<'_>) -> Vec<f64> {
        simplex
            .row_duals()
            .iter()
            .zip(&self.row_scale)
            .map(|(y, r)| y * r)
            .collect()
    }
}

pub(crate) fn solve_relaxation(instance: &MilpInstance, options: &SolveOptions) -> RawSolution {
    let data = LpData::new(instance);
    let mut simplex = Simplex::new(&data, options.lp_tolerance);
    let status = simplex.solve(f64::INFINITY, data.iteration_budget());
    let values = data.values(&simplex);
    let (status, objective, duals) = match status {
        LpStatus::Optimal => (
            SolveStatus::Optimal,
            instance.objective_at(&values),
            Some(data.duals(&simplex)),
        ),
        LpStatus::Infeasible => (SolveStatus::Infeasible, f64::INFINITY, None),
        LpStatus::Unbounded => (SolveStatus::Unbounded, f64::NEG_INFINITY, None),
        LpStatus::Cutoff | LpStatus::IterationLimit | LpStatus::TimeLimit | LpStatus::Stalled => {
            (SolveStatus::Stalled, instance.objective_at(&values), None)
        }
    };
    let bound = if status == SolveStatus::Optimal {
        objective
    } else {
        f64::NEG_INFINITY
    };
    RawSolution {
        values,
        objective,
        bound,
        status,
        node_count: 0,
        duals,
    }
}

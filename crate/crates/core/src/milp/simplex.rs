//! Bounded revised simplex on the computational form `A x - s = 0`,
//! `l ≤ (x, s) ≤ u`.
//!
//! The dual simplex (dual steepest edge pricing, bound-flipping ratio test)
//! is the workhorse: it starts from any dual feasible basis, which covers
//! cold starts with nonnegative costs and every warm start inside
//! branch-and-bound. A textbook composite primal simplex handles dual
//! infeasible starts and cleans up residual dual infeasibility.

use alloc::vec;
use alloc::vec::Vec;

use super::bnb::Clock;
use super::lp::LpData;
use super::lu::LuFactor;

const NIL: usize = usize::MAX;
const REFACTOR_INTERVAL: usize = 100;
const PIVOT_TOLERANCE: f64 = 1e-7;
const ZERO_ALPHA: f64 = 1e-9;
const MIN_WEIGHT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable resting at zero.
    Free,
}

/// Snapshot of a basis used to warm-start later solves.
#[derive(Clone, Debug)]
pub(crate) struct Basis {
    head: Vec<usize>,
    state: Vec<VarState>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The dual objective crossed the caller's cutoff.
    Cutoff,
    IterationLimit,
    TimeLimit,
    Stalled,
}

enum Step {
    Continue,
    Done(LpStatus),
    /// Numerical trouble; refactorize and retry.
    Refactor,
}

pub(crate) struct Simplex<'a> {
    lp: &'a LpData,
    lower: Vec<f64>,
    upper: Vec<f64>,
    head: Vec<usize>,
    state: Vec<VarState>,
    pos: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    y: Vec<f64>,
    lu: LuFactor,
    weights: Vec<f64>,
    primal_tol: f64,
    dual_tol: f64,
    pub(crate) iterations: u64,
    work: Vec<f64>,
    rho: Vec<f64>,
    column: Vec<f64>,
    tau: Vec<f64>,
    alpha: Vec<f64>,
    touched: Vec<usize>,
    in_row: Vec<bool>,
    candidates: Vec<(f64, usize, f64)>,
    deadline: Option<(&'a dyn Clock, f64)>,
}

impl<'a> Simplex<'a> {
    pub(crate) fn new(lp: &'a LpData, tolerance: f64) -> Self {
        let (n, m) = (lp.n, lp.m);
        let total = n + m;
        let mut s = Simplex {
            lp,
            lower: lp.lower.clone(),
            upper: lp.upper.clone(),
            head: (n..total).collect(),
            state: vec![VarState::Basic; total],
            pos: vec![NIL; total],
            x: vec![0.0; total],
            d: vec![0.0; total],
            y: vec![0.0; m],
            lu: LuFactor::default(),
            weights: vec![1.0; m],
            primal_tol: tolerance,
            dual_tol: tolerance,
            iterations: 0,
            work: vec![0.0; m],
            rho: vec![0.0; m],
            column: vec![0.0; m],
            tau: vec![0.0; m],
            alpha: vec![0.0; total],
            touched: Vec::new(),
            in_row: vec![false; total],
            candidates: Vec::new(),
            deadline: None,
        };
        for k in 0..m {
            s.pos[n + k] = k;
        }
        for j in 0..n {
            s.state[j] = s.preferred_state(j, lp.cost[j]);
        }
        s
    }

    fn preferred_state(&self, j: usize, reduced_cost: f64) -> VarState {
        let (l, u) = (self.lower[j], self.upper[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if reduced_cost < 0.0 {
                    VarState::Upper
                } else {
                    VarState::Lower
                }
            }
            (true, false) => VarState::Lower,
            (false, true) => VarState::Upper,
            (false, false) => VarState::Free,
        }
    }

    /// Makes `solve` give up with `TimeLimit` once `clock` reaches `limit_s`.
    pub(crate) fn set_deadline(&mut self, clock: &'a dyn Clock, limit_s: f64) {
        self.deadline = Some((clock, limit_s));
    }

    fn out_of_time(&self) -> bool {
        self.iterations % 64 == 0 && self.deadline.is_some_and(|(c, limit)| c.elapsed_secs() >= limit)
    }

    pub(crate) fn basis(&self) -> Basis {
        Basis {
            head: self.head.clone(),
            state: self.state.clone(),
        }
    }

    pub(crate) fn load_basis(&mut self, basis: &Basis) {
        self.head.clone_from(&basis.head);
        self.state.clone_from(&basis.state);
        self.pos.fill(NIL);
        for (k, &j) in self.head.iter().enumerate() {
            self.pos[j] = k;
        }
        self.weights.fill(1.0);
    }

    /// Sets bounds of structural `j` in scaled units.
    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub(crate) fn reset_bounds(&mut self) {
        self.lower.copy_from_slice(&self.lp.lower);
        self.upper.copy_from_slice(&self.lp.upper);
    }

    /// Scaled value of variable `j` (structural or logical).
    pub(crate) fn value(&self, j: usize) -> f64 {
        self.x[j]
    }

    /// Scaled row duals from the last optimal solve.
    pub(crate) fn row_duals(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn objective(&self) -> f64 {
        let n = self.lp.n;
        let mut z = self.lp.offset;
        for j in 0..n {
            z += self.lp.cost[j] * self.x[j];
        }
        z
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.lp.n {
            self.lp.cost[j]
        } else {
            0.0
        }
    }

    fn scatter_column(&self, j: usize, scale: f64, out: &mut [f64]) {
        scatter(self.lp, j, scale, out);
    }

    fn column_dot(&self, j: usize, rowvec: &[f64]) -> f64 {
        let lp = self.lp;
        if j < lp.n {
            let mut s = 0.0;
            for e in lp.col_start[j]..lp.col_start[j + 1] {
                s += lp.col_val[e] * rowvec[lp.col_row[e]];
            }
            s
        } else {
            -rowvec[j - lp.n]
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Lower => self.lower[j],
            VarState::Upper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic => self.x[j],
        }
    }

    /// Refactorizes the basis, repairing singular positions with logicals.
    fn refactor(&mut self) {
        let lp = self.lp;
        let n = lp.n;
        let head = &self.head;
        let (lu, replacements) = LuFactor::factorize(lp.m, |k, buf| {
            let j = head[k];
            if j < n {
                for e in lp.col_start[j]..lp.col_start[j + 1] {
                    buf.push((lp.col_row[e], lp.col_val[e]));
                }
            } else {
                buf.push((j - n, -1.0));
            }
        });
        self.lu = lu;
        for (k, row) in replacements {
            let old = self.head[k];
            let logical = n + row;
            let v = self.x[old];
            self.state[old] = self.nearest_bound_state(old, v);
            self.pos[old] = NIL;
            self.head[k] = logical;
            self.pos[logical] = k;
            self.state[logical] = VarState::Basic;
            self.weights[k] = 1.0;
        }
    }

    fn nearest_bound_state(&self, j: usize, v: f64) -> VarState {
        let (l, u) = (self.lower[j], self.upper[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if v - l <= u - v {
                    VarState::Lower
                } else {
                    VarState::Upper
                }
            }
            (true, false) => VarState::Lower,
            (false, true) => VarState::Upper,
            (false, false) => VarState::Free,
        }
    }

    fn compute_primal(&mut self) {
        let total = self.lp.n + self.lp.m;
        let mut rhs = core::mem::take(&mut self.column);
        rhs.fill(0.0);
        for j in 0..total {
            if self.state[j] != VarState::Basic {
                let v = self.nonbasic_value(j);
                self.x[j] = v;
                if v != 0.0 {
                    self.scatter_column(j, -v, &mut rhs);
                }
            }
        }
        self.lu.ftran(&mut rhs, &mut self.work);
        for (k, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[k];
        }
        self.column = rhs;
    }

    fn compute_duals(&mut self) {
        let lp = self.lp;
        let mut cb = core::mem::take(&mut self.rho);
        for (k, &j) in self.head.iter().enumerate() {
            cb[k] = self.cost(j);
        }
        self.lu.btran(&mut cb, &mut self.work);
        self.y.copy_from_slice(&cb);
        self.rho = cb;
        for j in 0..lp.n + lp.m {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                self.cost(j) - self.column_dot(j, &self.y)
            };
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    /// Moves boxed nonbasic variables to the bound matching their reduced
    /// cost sign. Returns false if some dual infeasibility cannot be repaired
    /// that way.
    fn make_dual_feasible(&mut self) -> bool {
        let total = self.lp.n + self.lp.m;
        let mut ok = true;
        let mut flipped = false;
        for j in 0..total {
            let state = self.state[j];
            if state == VarState::Basic {
                continue;
            }
            let normalized = match state {
                VarState::Lower if !self.lower[j].is_finite() => self.nearest_bound_state(j, 0.0),
                VarState::Upper if !self.upper[j].is_finite() => self.nearest_bound_state(j, 0.0),
                VarState::Free if self.lower[j].is_finite() || self.upper[j].is_finite() => {
                    self.nearest_bound_state(j, 0.0)
                }
                s => s,
            };
            if normalized != state {
                self.state[j] = normalized;
                flipped = true;
            }
            if self.is_fixed(j) {
                continue;
            }
            let dj = self.d[j];
            match self.state[j] {
                VarState::Lower if dj < -self.dual_tol => {
                    if self.upper[j].is_finite() {
                        self.state[j] = VarState::Upper;
                        flipped = true;
                    } else {
                        ok = false;
                    }
                }
                VarState::Upper if dj > self.dual_tol => {
                    if self.lower[j].is_finite() {
                        self.state[j] = VarState::Lower;
                        flipped = true;
                    } else {
                        ok = false;
                    }
                }
                VarState::Free if libm::fabs(dj) > self.dual_tol => ok = false,
                _ => {}
            }
        }
        if flipped {
            self.compute_primal();
        }
        ok
    }

    fn max_dual_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.lp.n + self.lp.m {
            if self.is_fixed(j) {
                continue;
            }
            let dj = self.d[j];
            let v = match self.state[j] {
                VarState::Basic => 0.0,
                VarState::Lower => -dj,
                VarState::Upper => dj,
                VarState::Free => libm::fabs(dj),
            };
            worst = worst.max(v);
        }
        worst
    }

    fn max_primal_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &j in &self.head {
            worst = worst.max(self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]);
        }
        worst
    }

    /// Solves from the current basis. `cutoff` stops the dual simplex once
    /// its (monotone) objective reaches the value.
    pub(crate) fn solve(&mut self, cutoff: f64, max_iterations: u64) -> LpStatus {
        let limit = self.iterations.saturating_add(max_iterations);
        self.refactor();
        self.compute_primal();
        self.compute_duals();
        for _ in 0..8 {
            if self.make_dual_feasible() {
                match self.dual_loop(cutoff, limit) {
                    LpStatus::Optimal => {
                        self.compute_duals();
                        if self.max_dual_infeasibility() <= self.dual_tol {
                            return LpStatus::Optimal;
                        }
                    }
                    LpStatus::Stalled => {}
                    other => return other,
                }
            }
            match self.primal_loop(limit) {
                LpStatus::Optimal => {
                    self.compute_primal();
                    self.compute_duals();
                    if self.max_primal_infeasibility() <= self.primal_tol
                        && self.max_dual_infeasibility() <= self.dual_tol
                    {
                        return LpStatus::Optimal;
                    }
                }
                LpStatus::Stalled => {}
                other => return other,
            }
            self.refactor();
            self.compute_primal();
            self.compute_duals();
        }
        LpStatus::Stalled
    }

    fn dual_loop(&mut self, cutoff: f64, limit: u64) -> LpStatus {
        let mut retries = 0;
        let mut since_check = 0;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if self.out_of_time() {
                return LpStatus::TimeLimit;
            }
            if self.lu.num_updates() >= REFACTOR_INTERVAL {
                self.refactor();
                self.compute_primal();
                self.compute_duals();
                if self.max_dual_infeasibility() > 10.0 * self.dual_tol && !self.make_dual_feasible() {
                    return LpStatus::Stalled;
                }
            }
            since_check += 1;
            if cutoff.is_finite() && since_check >= 10 {
                since_check = 0;
                if self.objective() > cutoff {
                    return LpStatus::Cutoff;
                }
            }
            match self.dual_iterate() {
                Step::Continue => {
                    retries = 0;
                }
                Step::Done(LpStatus::Infeasible) if self.lu.num_updates() > 0 => {
                    // Confirm on a fresh factorization.
                    self.refactor();
                    self.compute_primal();
                    self.compute_duals();
                }
                Step::Done(status) => return status,
                Step::Refactor => {
                    retries += 1;
                    if retries > 3 {
                        return LpStatus::Stalled;
                    }
                    self.refactor();
                    self.compute_primal();
                    self.compute_duals();
                    if !self.make_dual_feasible() {
                        return LpStatus::Stalled;
                    }
                }
            }
        }
    }

    /// Row `r` of `B⁻¹[A, -I]` over nonbasic columns into `self.alpha`,
    /// listing nonzero positions in `self.touched`.
    fn compute_pivot_row(&mut self) {
        let lp = self.lp;
        let n = lp.n;
        for &j in &self.touched {
            self.alpha[j] = 0.0;
            self.in_row[j] = false;
        }
        self.touched.clear();
        for i in 0..lp.m {
            let ri = self.rho[i];
            if ri == 0.0 {
                continue;
            }
            for e in lp.row_start[i]..lp.row_start[i + 1] {
                let j = lp.row_col[e];
                if self.state[j] == VarState::Basic {
                    continue;
                }
                if !self.in_row[j] {
                    self.in_row[j] = true;
                    self.touched.push(j);
                }
                self.alpha[j] += ri * lp.row_val[e];
            }
            let logical = n + i;
            if self.state[logical] != VarState::Basic {
                self.alpha[logical] = -ri;
                self.in_row[logical] = true;
                self.touched.push(logical);
            }
        }
    }

    fn dual_iterate(&mut self) -> Step {
        let m = self.lp.m;
        // Leaving row by dual steepest edge.
        let mut r = NIL;
        let mut best = 0.0;
        for k in 0..m {
            let j = self.head[k];
            let v = self.x[j];
            let infeas = if v < self.lower[j] - self.primal_tol {
                self.lower[j] - v
            } else if v > self.upper[j] + self.primal_tol {
                v - self.upper[j]
            } else {
                continue;
            };
            let score = infeas * infeas / self.weights[k];
            if score > best {
                best = score;
                r = k;
            }
        }
        if r == NIL {
            return Step::Done(LpStatus::Optimal);
        }
        let p = self.head[r];
        let (target, sign) = if self.x[p] < self.lower[p] {
            (self.lower[p], -1.0)
        } else {
            (self.upper[p], 1.0)
        };
        let mut slope = libm::fabs(self.x[p] - target);

        self.rho.fill(0.0);
        self.rho[r] = 1.0;
        self.lu.btran(&mut self.rho, &mut self.work);
        self.compute_pivot_row();

        // Bound-flipping ratio test.
        self.candidates.clear();
        for &j in &self.touched {
            let a = self.alpha[j];
            if libm::fabs(a) < ZERO_ALPHA || self.is_fixed(j) {
                continue;
            }
            let sa = sign * a;
            let dj = self.d[j];
            let ratio = match self.state[j] {
                VarState::Lower if sa > 0.0 => dj.max(0.0) / sa,
                VarState::Upper if sa < 0.0 => dj.min(0.0) / sa,
                VarState::Free => 0.0,
                _ => continue,
            };
            self.candidates.push((ratio, j, libm::fabs(a)));
        }
        if self.candidates.is_empty() {
            return Step::Done(LpStatus::Infeasible);
        }
        self.candidates
            .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut k = 0;
        let mut flips = 0;
        while k < self.candidates.len() {
            let (_, j, mag) = self.candidates[k];
            let range = self.upper[j] - self.lower[j];
            if self.state[j] != VarState::Free && range.is_finite() && slope - mag * range > self.primal_tol {
                slope -= mag * range;
                flips += 1;
                k += 1;
            } else {
                break;
            }
        }
        if k == self.candidates.len() {
            return Step::Done(LpStatus::Infeasible);
        }
        // Harris pass over the remaining breakpoints.
        let mut t_max = f64::INFINITY;
        for &(_, j, mag) in &self.candidates[k..] {
            let slack = match self.state[j] {
                VarState::Lower => self.d[j].max(0.0),
                VarState::Upper => (-self.d[j]).max(0.0),
                _ => 0.0,
            };
            t_max = t_max.min((slack + self.dual_tol) / mag);
        }
        let mut chosen = k;
        let mut chosen_mag = 0.0;
        for (idx, &(ratio, _, mag)) in self.candidates.iter().enumerate().skip(k) {
            if ratio > t_max {
                break;
            }
            if mag > chosen_mag {
                chosen = idx;
                chosen_mag = mag;
            }
        }
        let (t_q, q, _) = self.candidates[chosen];
        let alpha_rq = self.alpha[q];
        if libm::fabs(alpha_rq) < PIVOT_TOLERANCE {
            return Step::Refactor;
        }

        // Entering column.
        self.column.fill(0.0);
        scatter(self.lp, q, 1.0, &mut self.column);
        self.lu.ftran(&mut self.column, &mut self.work);
        let alpha_col_r = self.column[r];
        if libm::fabs(alpha_col_r - alpha_rq) > 1e-6 * (1.0 + libm::fabs(alpha_rq)) {
            return Step::Refactor;
        }

        // Dual steepest edge auxiliary vector.
        self.tau.copy_from_slice(&self.rho);
        self.lu.ftran(&mut self.tau, &mut self.work);

        // Dual update.
        let theta_d = sign * t_q;
        for &j in &self.touched {
            if self.state[j] != VarState::Basic {
                self.d[j] -= theta_d * self.alpha[j];
            }
        }
        self.d[q] = 0.0;
        self.d[p] = -theta_d;

        // Bound flips of the passed breakpoints.
        if flips > 0 {
            let mut delta = core::mem::take(&mut self.rho);
            delta.fill(0.0);
            for idx in 0..flips {
                let j = self.candidates[idx].1;
                let (old, new_state, new) = match self.state[j] {
                    VarState::Lower => (self.lower[j], VarState::Upper, self.upper[j]),
                    _ => (self.upper[j], VarState::Lower, self.lower[j]),
                };
                self.state[j] = new_state;
                self.x[j] = new;
                self.scatter_column(j, new - old, &mut delta);
            }
            self.lu.ftran(&mut delta, &mut self.work);
            for (k, &j) in self.head.iter().enumerate() {
                self.x[j] -= delta[k];
            }
            self.rho = delta;
        }

        // Primal update.
        let theta_p = (self.x[p] - target) / alpha_col_r;
        for (k, &j) in self.head.iter().enumerate() {
            let a = self.column[k];
            if a != 0.0 {
                self.x[j] -= theta_p * a;
            }
        }
        self.x[q] += theta_p;
        self.x[p] = target;

        // Weights.
        let wr = self.weights[r];
        for k in 0..m {
            let a = self.column[k];
            if k == r || a == 0.0 {
                continue;
            }
            let ratio = a / alpha_col_r;
            let w = self.weights[k] - 2.0 * ratio * self.tau[k] + ratio * ratio * wr;
            self.weights[k] = w.max(MIN_WEIGHT).max(ratio * ratio);
        }
        self.weights[r] = (wr / (alpha_col_r * alpha_col_r)).max(MIN_WEIGHT);

        // Basis change.
        self.lu.update(r, &self.column);
        self.head[r] = q;
        self.pos[q] = r;
        self.state[q] = VarState::Basic;
        self.pos[p] = NIL;
        self.state[p] = if target == self.lower[p] {
            VarState::Lower
        } else {
            VarState::Upper
        };
        self.iterations += 1;
        Step::Continue
    }

    fn primal_loop(&mut self, limit: u64) -> LpStatus {
        self.weights.fill(1.0);
        let mut retries = 0;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if self.out_of_time() {
                return LpStatus::TimeLimit;
            }
            if self.lu.num_updates() >= REFACTOR_INTERVAL {
                self.refactor();
                self.compute_primal();
            }
            match self.primal_iterate() {
                Step::Continue => retries = 0,
                Step::Done(status) => return status,
                Step::Refactor => {
                    retries += 1;
                    if retries > 3 {
                        return LpStatus::Stalled;
                    }
                    self.refactor();
                    self.compute_primal();
                }
            }
        }
    }

    fn primal_iterate(&mut self) -> Step {
        let lp = self.lp;
        let (n, m) = (lp.n, lp.m);
        let tol = self.primal_tol;

        // Phase costs on the basis.
        let mut phase_one = false;
        let mut cb = core::mem::take(&mut self.rho);
        for (k, &j) in self.head.iter().enumerate() {
            let v = self.x[j];
            cb[k] = if v < self.lower[j] - tol {
                phase_one = true;
                -1.0
            } else if v > self.upper[j] + tol {
                phase_one = true;
                1.0
            } else {
                0.0
            };
        }
        if !phase_one {
            for (k, &j) in self.head.iter().enumerate() {
                cb[k] = self.cost(j);
            }
        }
        self.lu.btran(&mut cb, &mut self.work);
        self.rho = cb;

        // Dantzig pricing.
        let mut q = NIL;
        let mut best = 0.0;
        for j in 0..n + m {
            if self.state[j] == VarState::Basic || self.is_fixed(j) {
                continue;
            }
            let cj = if phase_one { 0.0 } else { self.cost(j) };
            let dj = cj - self.column_dot(j, &self.rho);
            if !phase_one {
                self.d[j] = dj;
            }
            let score = match self.state[j] {
                VarState::Lower if dj < -self.dual_tol => -dj,
                VarState::Upper if dj > self.dual_tol => dj,
                VarState::Free if libm::fabs(dj) > self.dual_tol => libm::fabs(dj),
                _ => continue,
            };
            if score > best {
                best = score;
                q = j;
            }
        }
        if q == NIL {
            return Step::Done(if phase_one {
                LpStatus::Infeasible
            } else {
                LpStatus::Optimal
            });
        }
        let dq = if phase_one {
            -self.column_dot(q, &self.rho)
        } else {
            self.d[q]
        };
        let dir = if dq < 0.0 { 1.0 } else { -1.0 };

        self.column.fill(0.0);
        scatter(self.lp, q, 1.0, &mut self.column);
        self.lu.ftran(&mut self.column, &mut self.work);

        // Two-pass Harris ratio test. Basic j moves at rate -dir·α_k.
        let mut t_max = f64::INFINITY;
        for k in 0..m {
            let a = self.column[k];
            if libm::fabs(a) < PIVOT_TOLERANCE {
                continue;
            }
            let j = self.head[k];
            let rate = -dir * a;
            if let Some(gap) = self.primal_gap(j, rate, tol) {
                t_max = t_max.min((gap + tol) / libm::fabs(rate));
            }
        }
        let mut r = NIL;
        let mut r_mag = 0.0;
        let mut t_r = f64::INFINITY;
        for k in 0..m {
            let a = self.column[k];
            if libm::fabs(a) < PIVOT_TOLERANCE {
                continue;
            }
            let j = self.head[k];
            let rate = -dir * a;
            if let Some(gap) = self.primal_gap(j, rate, tol) {
                let t = gap / libm::fabs(rate);
                if t <= t_max && libm::fabs(a) > r_mag {
                    r = k;
                    r_mag = libm::fabs(a);
                    t_r = t.max(0.0);
                }
            }
        }
        let own = self.upper[q] - self.lower[q];
        if own.is_finite() && own <= t_r {
            // Entering variable runs to its opposite bound.
            for (k, &j) in self.head.iter().enumerate() {
                self.x[j] -= dir * own * self.column[k];
            }
            let (state, value) = if dir > 0.0 {
                (VarState::Upper, self.upper[q])
            } else {
                (VarState::Lower, self.lower[q])
            };
            self.state[q] = state;
            self.x[q] = value;
            self.iterations += 1;
            return Step::Continue;
        }
        if r == NIL {
            return if phase_one {
                Step::Refactor
            } else {
                Step::Done(LpStatus::Unbounded)
            };
        }
        let p = self.head[r];
        let rate_p = -dir * self.column[r];
        let target = if self.x[p] < self.lower[p] - tol {
            self.lower[p]
        } else if self.x[p] > self.upper[p] + tol {
            self.upper[p]
        } else if rate_p > 0.0 {
            self.upper[p]
        } else {
            self.lower[p]
        };
        for (k, &j) in self.head.iter().enumerate() {
            self.x[j] -= dir * t_r * self.column[k];
        }
        self.x[q] += dir * t_r;
        self.x[p] = target;
        self.lu.update(r, &self.column);
        self.head[r] = q;
        self.pos[q] = r;
        self.state[q] = VarState::Basic;
        self.pos[p] = NIL;
        self.state[p] = if target == self.lower[p] {
            VarState::Lower
        } else {
            VarState::Upper
        };
        self.iterations += 1;
        Step::Continue
    }

    /// Distance basic `j` may travel in direction `rate` before it blocks.
    fn primal_gap(&self, j: usize, rate: f64, tol: f64) -> Option<f64> {
        let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
        if v < l - tol {
            // Infeasible below: blocks on reaching its lower bound.
            (rate > 0.0).then(|| l - v)
        } else if v > u + tol {
            (rate < 0.0).then(|| v - u)
        } else if rate > 0.0 {
            u.is_finite().then(|| (u - v).max(0.0))
        } else {
            l.is_finite().then(|| (v - l).max(0.0))
        }
    }
}

/// Scatters column `j` of `[A, -I]` into the row-indexed dense `out`.
fn scatter(lp: &LpData, j: usize, scale: f64, out: &mut [f64]) {
    if j < lp.n {
        for e in lp.col_start[j]..lp.col_start[j + 1] {
            out[lp.col_row[e]] += scale * lp.col_val[e];
        }
    } else {
        out[j - lp.n] -= scale;
    }
}

//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The basis is eliminated right-looking with Markowitz pivot selection under
//! threshold partial pivoting. Row operations are stored as column etas
//! (`L`), the eliminated rows as `U` in pivot order. Basis changes between
//! refactorizations append product-form etas.
//!
//! Vectors indexed "by row" refer to constraint rows; vectors indexed "by
//! position" refer to basis slots.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOLERANCE: f64 = 1e-11;
const ETA_DROP: f64 = 1e-13;
const SEARCH_LIMIT: usize = 4;
const NIL: usize = usize::MAX;

#[derive(Clone, Debug, Default)]
pub(crate) struct LuFactor {
    m: usize,
    l_pivot: Vec<usize>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    u_row: Vec<usize>,
    u_pos: Vec<usize>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    eta_pos: Vec<usize>,
    eta_pivot: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,
}

/// Doubly linked buckets keyed by nonzero count.
struct CountLists {
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    count: Vec<usize>,
}

impl CountLists {
    fn new(items: usize, max_count: usize) -> Self {
        Self {
            head: vec![NIL; max_count + 2],
            next: vec![NIL; items],
            prev: vec![NIL; items],
            count: vec![0; items],
        }
    }

    fn insert(&mut self, item: usize, count: usize) {
        let c = count.min(self.head.len() - 1);
        self.count[item] = count;
        self.prev[item] = NIL;
        self.next[item] = self.head[c];
        if self.head[c] != NIL {
            self.prev[self.head[c]] = item;
        }
        self.head[c] = item;
    }

    fn remove(&mut self, item: usize) {
        let c = self.count[item].min(self.head.len() - 1);
        let (p, n) = (self.prev[item], self.next[item]);
        if p != NIL {
            self.next[p] = n;
        } else {
            self.head[c] = n;
        }
        if n != NIL {
            self.prev[n] = p;
        }
        self.prev[item] = NIL;
        self.next[item] = NIL;
    }

    fn update(&mut self, item: usize, count: usize) {
        self.remove(item);
        self.insert(item, count);
    }
}

/// Outcome of a factorization: basis positions whose column had to be
/// replaced by the logical (slack) column of the paired row.
pub(crate) type Replacements = Vec<(usize, usize)>;

impl LuFactor {
    /// Factorizes the `m × m` basis whose column at position `k` is produced
    /// by `column(k, &mut buf)` as `(row, value)` pairs.
    ///
    /// Structurally or numerically singular positions are reported and
    /// factorized as if their column were the logical `-e_row` of the paired
    /// row; the caller must update its basis accordingly.
    pub(crate) fn factorize<F>(m: usize, mut column: F) -> (Self, Replacements)
    where
        F: FnMut(usize, &mut Vec<(usize, f64)>),
    {
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut buf = Vec::new();
        for k in 0..m {
            buf.clear();
            column(k, &mut buf);
            let entries: Vec<(usize, f64)> =
                buf.iter().copied().filter(|&(_, v)| v != 0.0).collect();
            for &(i, _) in &entries {
                rows[i].push(k);
            }
            cols.push(entries);
        }

        let mut col_lists = CountLists::new(m, m);
        let mut row_lists = CountLists::new(m, m);
        for k in 0..m {
            col_lists.insert(k, cols[k].len());
            row_lists.insert(k, rows[k].len());
        }
        let mut col_done = vec![false; m];
        let mut row_done = vec![false; m];
        let mut mark = vec![0usize; m];

        let mut f = LuFactor {
            m,
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            ..Default::default()
        };
        let mut pivot_row_entries: Vec<(usize, f64)> = Vec::new();
        let mut multipliers: Vec<(usize, f64)> = Vec::new();

        for _ in 0..m {
            let Some((p, q)) = find_pivot(&cols, &rows, &col_lists, &row_lists, m) else {
                break;
            };
            let a_pq = cols[q]
                .iter()
                .find(|&&(i, _)| i == p)
                .map(|&(_, v)| v)
                .unwrap_or(0.0);

            // Detach the pivot row from every other active column.
            pivot_row_entries.clear();
            for &j in &rows[p] {
                if j == q {
                    continue;
                }
                let col = &mut cols[j];
                if let Some(at) = col.iter().position(|&(i, _)| i == p) {
                    let (_, v) = col.swap_remove(at);
                    pivot_row_entries.push((j, v));
                }
            }
            // Detach the pivot column from every other active row.
            multipliers.clear();
            for &(i, v) in &cols[q] {
                if i == p {
                    continue;
                }
                multipliers.push((i, v / a_pq));
                let r = &mut rows[i];
                if let Some(at) = r.iter().position(|&j| j == q) {
                    r.swap_remove(at);
                }
            }
            // Schur complement update.
            for &(j, a_pj) in &pivot_row_entries {
                let col = &mut cols[j];
                for (idx, &(i, _)) in col.iter().enumerate() {
                    mark[i] = idx + 1;
                }
                for &(i, l) in &multipliers {
                    let delta = -l * a_pj;
                    if mark[i] > 0 {
                        col[mark[i] - 1].1 += delta;
                    } else {
                        col.push((i, delta));
                        rows[i].push(j);
                    }
                }
                for &(i, _) in col.iter() {
                    mark[i] = 0;
                }
            }

            // Record factors.
            f.l_pivot.push(p);
            for &(i, l) in &multipliers {
                f.l_row.push(i);
                f.l_val.push(l);
            }
            f.l_start.push(f.l_row.len());
            f.u_row.push(p);
            f.u_pos.push(q);
            f.u_diag.push(a_pq);
            for &(j, v) in &pivot_row_entries {
                f.u_idx.push(j);
                f.u_val.push(v);
            }
            f.u_start.push(f.u_idx.len());

            // Retire pivot row and column, refresh counts.
            col_done[q] = true;
            row_done[p] = true;
            col_lists.remove(q);
            row_lists.remove(p);
            cols[q].clear();
            rows[p].clear();
            for &(j, _) in &pivot_row_entries {
                col_lists.update(j, cols[j].len());
            }
            for &(i, _) in &multipliers {
                row_lists.update(i, rows[i].len());
            }
        }

        // Pair leftover rows and positions with logical columns.
        let mut replacements = Vec::new();
        let free_rows: Vec<usize> = (0..m).filter(|&i| !row_done[i]).collect();
        let free_pos: Vec<usize> = (0..m).filter(|&k| !col_done[k]).collect();
        debug_assert_eq!(free_rows.len(), free_pos.len());
        if !free_pos.is_empty() {
            let mut replaced = vec![false; m];
            for &k in &free_pos {
                replaced[k] = true;
            }
            // Drop U entries that referenced the discarded columns.
            let mut idx = Vec::with_capacity(f.u_idx.len());
            let mut val = Vec::with_capacity(f.u_val.len());
            let mut start = vec![0];
            for k in 0..f.u_row.len() {
                for e in f.u_start[k]..f.u_start[k + 1] {
                    if !replaced[f.u_idx[e]] {
                        idx.push(f.u_idx[e]);
                        val.push(f.u_val[e]);
                    }
                }
                start.push(idx.len());
            }
            f.u_idx = idx;
            f.u_val = val;
            f.u_start = start;
            for (&i, &k) in free_rows.iter().zip(&free_pos) {
                f.u_row.push(i);
                f.u_pos.push(k);
                f.u_diag.push(-1.0);
                f.u_start.push(f.u_idx.len());
                replacements.push((k, i));
            }
        }
        (f, replacements)
    }

    pub(crate) fn num_updates(&self) -> usize {
        self.eta_pos.len()
    }

    /// Solves `B x = rhs`. `rhs` is indexed by row on entry and holds `x`
    /// indexed by position on exit.
    pub(crate) fn ftran(&self, rhs: &mut [f64], work: &mut [f64]) {
        for k in 0..self.l_pivot.len() {
            let v = rhs[self.l_pivot[k]];
            if v != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_row[e]] -= self.l_val[e] * v;
                }
            }
        }
        for k in (0..self.u_row.len()).rev() {
            let mut s = rhs[self.u_row[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[e] * work[self.u_idx[e]];
            }
            work[self.u_pos[k]] = s / self.u_diag[k];
        }
        rhs[..self.m].copy_from_slice(&work[..self.m]);
        for t in 0..self.eta_pos.len() {
            let r = self.eta_pos[t];
            let xr = rhs[r] / self.eta_pivot[t];
            if xr != 0.0 {
                for e in self.eta_start[t]..self.eta_start[t + 1] {
                    rhs[self.eta_idx[e]] -= self.eta_val[e] * xr;
                }
            }
            rhs[r] = xr;
        }
    }

    /// Solves `Bᵀ y = rhs`. `rhs` is indexed by position on entry and holds
    /// `y` indexed by row on exit.
    pub(crate) fn btran(&self, rhs: &mut [f64], work: &mut [f64]) {
        for t in (0..self.eta_pos.len()).rev() {
            let r = self.eta_pos[t];
            let mut s = rhs[r];
            for e in self.eta_start[t]..self.eta_start[t + 1] {
                s -= self.eta_val[e] * rhs[self.eta_idx[e]];
            }
            rhs[r] = s / self.eta_pivot[t];
        }
        for k in 0..self.u_row.len() {
            let z = rhs[self.u_pos[k]] / self.u_diag[k];
            work[self.u_row[k]] = z;
            if z != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    rhs[self.u_idx[e]] -= self.u_val[e] * z;
                }
            }
        }
        for k in (0..self.l_pivot.len()).rev() {
            let mut s = work[self.l_pivot[k]];
            for e in self.l_start[k]..self.l_start[k + 1] {
                s -= self.l_val[e] * work[self.l_row[e]];
            }
            work[self.l_pivot[k]] = s;
        }
        rhs[..self.m].copy_from_slice(&work[..self.m]);
    }

    /// Records that basis position `r` now holds a column whose FTRAN image
    /// (by position) is `alpha`.
    pub(crate) fn update(&mut self, r: usize, alpha: &[f64]) {
        self.eta_pos.push(r);
        self.eta_pivot.push(alpha[r]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && libm::fabs(a) > ETA_DROP {
                self.eta_idx.push(i);
                self.eta_val.push(a);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}

fn column_max(col: &[(usize, f64)]) -> f64 {
    col.iter().fold(0.0, |m, &(_, v)| m.max(libm::fabs(v)))
}

fn find_pivot(
    cols: &[Vec<(usize, f64)>],
    rows: &[Vec<usize>],
    col_lists: &CountLists,
    row_lists: &CountLists,
    m: usize,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_cost = usize::MAX;
    let mut best_mag = 0.0;
    let mut searched = 0;
    let bucket_top = col_lists.head.len() - 1;
    for c in 1..=m.min(bucket_top) {
        let mut j = col_lists.head[c];
        while j != NIL {
            let col = &cols[j];
            let cmax = column_max(col);
            if cmax > SINGULAR_TOLERANCE {
                for &(i, v) in col {
                    let mag = libm::fabs(v);
                    if mag >= PIVOT_THRESHOLD * cmax {
                        let cost = (row_lists.count[i] - 1) * (col.len() - 1);
                        if cost < best_cost || (cost == best_cost && mag > best_mag) {
                            best = Some((i, j));
                            best_cost = cost;
                            best_mag = mag;
                        }
                    }
                }
                searched += 1;
                if best_cost == 0 || (best.is_some() && searched >= SEARCH_LIMIT) {
                    return best;
                }
            }
            j = col_lists.next[j];
        }
        let mut i = row_lists.head[c];
        while i != NIL {
            let mut any = false;
            for &j in &rows[i] {
                let col = &cols[j];
                let cmax = column_max(col);
                if cmax <= SINGULAR_TOLERANCE {
                    continue;
                }
                if let Some(&(_, v)) = col.iter().find(|&&(r, _)| r == i) {
                    let mag = libm::fabs(v);
                    if mag >= PIVOT_THRESHOLD * cmax {
                        any = true;
                        let cost = (rows[i].len() - 1) * (col.len() - 1);
                        if cost < best_cost || (cost == best_cost && mag > best_mag) {
                            best = Some((i, j));
                            best_cost = cost;
                            best_mag = mag;
                        }
                    }
                }
            }
            if any {
                searched += 1;
            }
            if best_cost == 0 || (best.is_some() && searched >= SEARCH_LIMIT) {
                return best;
            }
            i = row_lists.next[i];
        }
    }
    best
}

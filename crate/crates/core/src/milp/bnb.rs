//! Best-bound branch-and-bound with depth-first plunging.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::lp::LpData;
use super::simplex::{Basis, LpStatus, Simplex};
use super::{Branching, MilpInstance, RawSolution, SolveOptions, SolveStatus, VarKind};

const INTEGRALITY_TOLERANCE: f64 = 1e-6;
/// Nodes beyond this many open ones are queued without a stored basis.
const MAX_STORED_BASES: usize = 2_000;
/// Relative gap treated as zero when `mip_gap` asks for exact optimality.
const MIN_GAP: f64 = 1e-9;

/// Elapsed wall time source for time limits. The core has no clock of its own.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// A clock that never advances; time limits are then inert.
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// Proposes integer assignments from the root relaxation.
///
/// Each candidate is indexed like the instance's variables; only binary
/// entries are read, rounded, and fixed before the LP is re-solved.
/// Candidates are tried in order.
pub trait MipHeuristic {
    fn propose(&self, relaxation: &[f64]) -> Vec<Vec<f64>>;
}

struct Node {
    id: u64,
    bound: f64,
    changes: Vec<(usize, f64)>,
    basis: Option<Rc<Basis>>,
    /// Variable, direction (true = up) and fractionality that created the node.
    origin: Option<(usize, bool, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap on "better": lower bound first, then older node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

#[derive(Clone, Copy, Default)]
struct PseudoCost {
    down_sum: f64,
    down_n: u32,
    up_sum: f64,
    up_n: u32,
}

struct Search<'a> {
    instance: &'a MilpInstance,
    data: &'a LpData,
    options: &'a SolveOptions,
    binaries: Vec<usize>,
    pseudo: Vec<PseudoCost>,
    incumbent: Option<(f64, Vec<f64>)>,
    next_id: u64,
    nodes: u64,
    budget: u64,
}

fn mix(seed: u64, j: usize) -> u64 {
    // splitmix64 finalizer; only used to order exact score ties.
    let mut z = seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl<'a> Search<'a> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((z, _)) => z - self.prune_margin(*z),
            None => f64::INFINITY,
        }
    }

    fn prune_margin(&self, z: f64) -> f64 {
        let scale = libm::fabs(z).max(1.0);
        self.options.mip_gap.max(MIN_GAP) * scale
    }

    fn apply(&self, sx: &mut Simplex<'_>, changes: &[(usize, f64)]) {
        sx.reset_bounds();
        for &(j, v) in changes {
            let s = v / self.data.col_scale[j];
            sx.set_bounds(j, s, s);
        }
    }

    fn values(&self, sx: &Simplex<'_>) -> Vec<f64> {
        self.data.values(sx)
    }

    fn fractional(&self, values: &[f64]) -> Vec<(usize, f64)> {
        self.binaries
            .iter()
            .filter_map(|&j| {
                let f = values[j] - libm::floor(values[j]);
                (f > INTEGRALITY_TOLERANCE && f < 1.0 - INTEGRALITY_TOLERANCE).then_some((j, f))
            })
            .collect()
    }

    fn offer_incumbent(&mut self, values: &[f64]) -> bool {
        let mut v = values.to_vec();
        for &j in &self.binaries {
            v[j] = libm::round(v[j]);
        }
        let z = self.instance.objective_at(&v);
        let better = match &self.incumbent {
            Some((best, _)) => z < *best - 1e-12 * libm::fabs(*best).max(1.0),
            None => true,
        };
        if better {
            self.incumbent = Some((z, v));
        }
        better
    }

    /// Fixes every binary at the rounded proposal and solves the remaining LP.
    fn try_assignment(&mut self, sx: &mut Simplex<'_>, proposal: &[f64]) {
        let changes: Vec<(usize, f64)> = self
            .binaries
            .iter()
            .map(|&j| (j, libm::round(proposal[j]).clamp(0.0, 1.0)))
            .collect();
        self.apply(sx, &changes);
        if sx.solve(self.cutoff(), self.budget) == LpStatus::Optimal {
            let values = self.values(sx);
            self.offer_incumbent(&values);
        }
    }

    fn choose_branch(&self, fractional: &[(usize, f64)]) -> (usize, f64) {
        let by_fraction = |cands: &mut dyn Iterator<Item = &(usize, f64)>| {
            let mut best = (usize::MAX, 0.0, -1.0, 0u64);
            for &(j, f) in cands {
                let score = f.min(1.0 - f);
                let tie = mix(self.options.seed, j);
                if score > best.2 || (score == best.2 && tie > best.3) {
                    best = (j, f, score, tie);
                }
            }
            (best.0, best.1)
        };
        if self.options.branching == Branching::MostFractional {
            return by_fraction(&mut fractional.iter());
        }
        let (mut down_sum, mut down_n, mut up_sum, mut up_n) = (0.0, 0u32, 0.0, 0u32);
        for pc in &self.pseudo {
            if pc.down_n > 0 {
                down_sum += pc.down_sum / pc.down_n as f64;
                down_n += 1;
            }
            if pc.up_n > 0 {
                up_sum += pc.up_sum / pc.up_n as f64;
                up_n += 1;
            }
        }
        if down_n == 0 && up_n == 0 {
            return by_fraction(&mut fractional.iter());
        }
        let avg_down = if down_n > 0 { down_sum / down_n as f64 } else { 1.0 };
        let avg_up = if up_n > 0 { up_sum / up_n as f64 } else { 1.0 };
        let mut best = (usize::MAX, 0.0, -1.0, 0u64);
        for &(j, f) in fractional {
            let pc = &self.pseudo[j];
            let down = if pc.down_n > 0 { pc.down_sum / pc.down_n as f64 } else { avg_down };
            let up = if pc.up_n > 0 { pc.up_sum / pc.up_n as f64 } else { avg_up };
            let score = (f * down).max(1e-6) * ((1.0 - f) * up).max(1e-6);
            let tie = mix(self.options.seed, j);
            if score > best.2 || (score == best.2 && tie > best.3) {
                best = (j, f, score, tie);
            }
        }
        (best.0, best.1)
    }

    fn record_pseudo_cost(&mut self, origin: Option<(usize, bool, f64)>, parent: f64, child: f64) {
        let Some((j, up, f)) = origin else { return };
        if !(parent.is_finite() && child.is_finite()) {
            return;
        }
        let gain = (child - parent).max(0.0);
        let pc = &mut self.pseudo[j];
        if up {
            pc.up_sum += gain / (1.0 - f).max(1e-9);
            pc.up_n += 1;
        } else {
            pc.down_sum += gain / f.max(1e-9);
            pc.down_n += 1;
        }
    }
}

pub(crate) fn branch_and_bound(
    instance: &MilpInstance,
    options: &SolveOptions,
    clock: &dyn Clock,
    heuristic: Option<&dyn MipHeuristic>,
) -> RawSolution {
    let data = LpData::new(instance);
    let binaries: Vec<usize> = instance
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let mut search = Search {
        instance,
        data: &data,
        options,
        binaries,
        pseudo: vec![PseudoCost::default(); instance.variables.len()],
        incumbent: None,
        next_id: 1,
        nodes: 0,
        budget: data.iteration_budget(),
    };
    // Slightly above the prune margin so rounding in the cutoff cannot
    // leave a proven solve short of optimal.
    let gap_tolerance = options.mip_gap.max(MIN_GAP) * (1.0 + 1e-6);
    let mut sx = Simplex::new(&data, options.lp_tolerance);
    sx.set_deadline(clock, options.time_limit_s);

    let finish = |search: Search<'_>, status: SolveStatus, bound: f64| -> RawSolution {
        let nodes = search.nodes;
        match search.incumbent {
            Some((z, values)) => RawSolution {
                values,
                objective: z,
                bound: bound.min(z),
                status,
                node_count: nodes,
                duals: None,
            },
            None => RawSolution {
                values: vec![0.0; instance.variables.len()],
                objective: f64::INFINITY,
                bound,
                status,
                node_count: nodes,
                duals: None,
            },
        }
    };

    // Root.
    search.nodes = 1;
    let root_status = sx.solve(f64::INFINITY, search.budget);
    match root_status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return finish(search, SolveStatus::Infeasible, f64::INFINITY),
        LpStatus::TimeLimit => return finish(search, SolveStatus::NoSolution, f64::NEG_INFINITY),
        LpStatus::Unbounded => {
            let mut s = finish(search, SolveStatus::Unbounded, f64::NEG_INFINITY);
            s.objective = f64::NEG_INFINITY;
            return s;
        }
        _ => return finish(search, SolveStatus::Stalled, f64::NEG_INFINITY),
    }
    let root_obj = sx.objective();
    let root_values = search.values(&sx);
    let root_basis = Rc::new(sx.basis());
    let root_fractional = search.fractional(&root_values);
    if root_fractional.is_empty() {
        search.offer_incumbent(&root_values);
        return finish(search, SolveStatus::Optimal, root_obj);
    }

    if let Some(h) = heuristic {
        for proposal in h.propose(&root_values) {
            search.try_assignment(&mut sx, &proposal);
            sx.load_basis(&root_basis);
        }
    }
    search.try_assignment(&mut sx, &root_values);
    sx.load_basis(&root_basis);

    let mut open: BinaryHeap<Node> = BinaryHeap::new();
    // Bound of nodes dropped without a proof (solver trouble).
    let mut lost_bound = f64::INFINITY;
    // Least bound among nodes fathomed by the cutoff; with a nonzero gap the
    // cutoff sits below the incumbent, so these still limit the proof.
    let mut pruned_bound = f64::INFINITY;
    let mut current: Option<Node> = Some(Node {
        id: 0,
        bound: root_obj,
        changes: Vec::new(),
        basis: Some(root_basis),
        origin: None,
    });
    let mut first = true;
    let mut limited = false;

    loop {
        let node = match current.take() {
            Some(n) => n,
            None => match open.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if node.bound >= search.cutoff() {
            pruned_bound = pruned_bound.min(node.bound);
            continue;
        }
        // Gap test on the global bound.
        if let Some((z, _)) = &search.incumbent {
            let global = open
                .peek()
                .map_or(node.bound, |n| n.bound.min(node.bound))
                .min(lost_bound)
                .min(pruned_bound);
            if (z - global) / libm::fabs(*z).max(1.0) <= gap_tolerance {
                open.push(node);
                break;
            }
        }
        if search.nodes >= options.node_limit || clock.elapsed_secs() >= options.time_limit_s {
            open.push(node);
            limited = true;
            break;
        }

        let cutoff = search.cutoff();
        let (status, obj, values) = if first {
            first = false;
            (LpStatus::Optimal, root_obj, root_values.clone())
        } else {
            search.nodes += 1;
            search.apply(&mut sx, &node.changes);
            if let Some(b) = &node.basis {
                sx.load_basis(b);
            }
            let st = sx.solve(cutoff, search.budget);
            let obj = sx.objective();
            let values = if st == LpStatus::Optimal {
                search.values(&sx)
            } else {
                Vec::new()
            };
            (st, obj, values)
        };
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::TimeLimit => {
                open.push(node);
                limited = true;
                break;
            }
            LpStatus::Cutoff => {
                pruned_bound = pruned_bound.min(cutoff);
                continue;
            }
            _ => {
                lost_bound = lost_bound.min(node.bound);
                continue;
            }
        }
        search.record_pseudo_cost(node.origin, node.bound, obj);
        if obj >= search.cutoff() {
            pruned_bound = pruned_bound.min(obj);
            continue;
        }
        let fractional = search.fractional(&values);
        if fractional.is_empty() {
            search.offer_incumbent(&values);
            continue;
        }
        let (j, f) = search.choose_branch(&fractional);
        let basis = if open.len() < MAX_STORED_BASES {
            Some(Rc::new(sx.basis()))
        } else {
            None
        };
        let mut make_child = |up: bool| {
            let mut changes = node.changes.clone();
            changes.push((j, if up { 1.0 } else { 0.0 }));
            let id = search.next_id;
            search.next_id += 1;
            Node {
                id,
                bound: obj,
                changes,
                basis: basis.clone(),
                origin: Some((j, up, f)),
            }
        };
        let prefer_up = f >= 0.5;
        let dive = make_child(prefer_up);
        let other = make_child(!prefer_up);
        open.push(other);
        current = Some(dive);
    }

    let open_bound = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let bound = open_bound.min(lost_bound).min(pruned_bound);
    match &search.incumbent {
        Some((z, _)) => {
            let gap = (z - bound.min(*z)) / libm::fabs(*z).max(1.0);
            let status = if gap <= gap_tolerance {
                SolveStatus::Optimal
            } else {
                SolveStatus::GapLimited
            };
            let z = *z;
            finish(search, status, bound.min(z))
        }
        None => {
            if limited || lost_bound.is_finite() {
                finish(search, SolveStatus::NoSolution, bound.min(root_obj.max(bound)))
            } else {
                finish(search, SolveStatus::Infeasible, f64::INFINITY)
            }
        }
    }
}


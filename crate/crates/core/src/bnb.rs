//! Best-bound branch-and-bound with BPCG node relaxations.
//!
//! Each node carries a tightened copy of the root box and, when available, the
//! parent's active set restricted to the child. Node relaxations are solved to
//! a depth-dependent dual-gap tolerance; `primal - dual_gap` is the node bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{domain_feasible, Objective};
use crate::error::{OedError, Result};
use crate::frankwolfe::{bpcg, ActiveSet, BpcgOptions, StopReason};
use crate::function::SquaredDistance;
use crate::instance::Instance;
use crate::linalg;
use crate::lmo::BoundBox;

/// Coordinates closer than this to an integer count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnbParams {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    /// Root dual-gap tolerance; `1e-3 (1 + |f(x_start)|)` when unset.
    pub gap_tol_root: Option<f64>,
    pub decay: f64,
    pub gap_tol_final: f64,
    pub node_iter_cap: usize,
    pub seed: u64,
    pub workers: usize,
    pub record_trace: bool,
    /// Pass the incumbent to the node solver so it can stop early.
    pub dynamic_pruning: bool,
}

impl Default for BnbParams {
    fn default() -> Self {
        BnbParams {
            abs_tol: 1e-6,
            rel_tol: 1e-4,
            time_limit: None,
            node_limit: None,
            gap_tol_root: None,
            decay: 0.5,
            gap_tol_final: 1e-6,
            node_iter_cap: 10_000,
            seed: 1,
            workers: 1,
            record_trace: false,
            dynamic_pruning: true,
        }
    }
}

impl BnbParams {
    /// Tolerances tight enough for exact comparisons against enumeration.
    pub fn exact() -> Self {
        BnbParams {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            gap_tol_final: 1e-9,
            ..Default::default()
        }
    }

    pub fn root_tolerance(&self, f_start: f64) -> f64 {
        self.gap_tol_root
            .unwrap_or_else(|| 1e-3 * (1.0 + f_start.abs()))
    }
}

/// `max(gap_tol_final, root * decay^depth)`.
pub fn node_tolerance(depth: usize, params: &BnbParams, root: f64) -> f64 {
    let depth = depth.min(i32::MAX as usize) as i32;
    (root * params.decay.powi(depth)).max(params.gap_tol_final)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    /// Stopped by the node limit, or the tree closed without meeting the gap.
    GapLimit,
    TimeLimit,
    Infeasible,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Optimal => "Optimal",
            Status::GapLimit => "GapLimit",
            Status::TimeLimit => "TimeLimit",
            Status::Infeasible => "Infeasible",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTrace {
    pub node_id: u64,
    pub depth: usize,
    pub lower_bound: f64,
    pub incumbent: f64,
    pub abs_gap: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub node_id: u64,
    pub objective: f64,
    pub x: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub incumbent: Vec<i64>,
    pub objective: f64,
    pub lower_bound: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub nodes: usize,
    pub lmo_calls: usize,
    pub wall_time: f64,
    pub status: Status,
    /// Every incumbent update in order.
    pub improvements: Vec<Improvement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<NodeTrace>,
}

pub fn rel_gap(abs_gap: f64, objective: f64) -> f64 {
    if objective.abs() < 1e-10 {
        abs_gap
    } else {
        abs_gap / objective.abs()
    }
}

/// Integer start point built from linearly independent experiments.
pub fn start_point(instance: &Instance, seed: u64) -> Result<Vec<i64>> {
    let bbox = BoundBox::from_instance(instance);
    bbox.check()?;
    let m = instance.m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<usize> = (0..m).filter(|&i| instance.upper[i] > 0).collect();
    let attempts = m.max(1);
    for attempt in 0..attempts {
        if attempt > 0 {
            candidates.shuffle(&mut rng);
        }
        let support = linalg::independent_rows(&instance.a, &candidates);
        if support.len() < instance.n && !instance.is_fusion() {
            break;
        }
        if let Some(x) = fill_start(&bbox, &support, &mut rng) {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            if domain_feasible(instance, &xf) {
                return Ok(x);
            }
        }
    }
    Err(OedError::NoStart(attempts))
}

fn fill_start(bbox: &BoundBox, support: &[usize], rng: &mut ChaCha8Rng) -> Option<Vec<i64>> {
    let mut x = bbox.lower.clone();
    for &i in support {
        x[i] = bbox.upper[i];
    }
    let mut sum: i64 = x.iter().sum();
    while sum > bbox.budget {
        let i = (0..x.len())
            .filter(|&i| x[i] > bbox.lower[i])
            .fold(None::<usize>, |best, i| match best {
                Some(b) if x[b] >= x[i] => Some(b),
                _ => Some(i),
            })?;
        x[i] -= 1;
        sum -= 1;
    }
    while sum < bbox.budget {
        let open: Vec<usize> = (0..x.len())
            .filter(|&i| !support.contains(&i) && x[i] < bbox.upper[i])
            .collect();
        if open.is_empty() {
            return None;
        }
        let i = open[rng.random_range(0..open.len())];
        let add = (bbox.upper[i] - x[i]).min(bbox.budget - sum);
        x[i] += add;
        sum += add;
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    Kept(ActiveSet),
    NeedsProjection,
}

/// Restricts an active set to the atoms satisfying the new bound.
pub fn split_active_set(instance: &Instance, active: &ActiveSet, var: usize, side: Side, bound: i64) -> Split {
    let kept = active.filter(|v| match side {
        Side::Le => v[var] <= bound,
        Side::Ge => v[var] >= bound,
    });
    match kept {
        Some(a) if domain_feasible(instance, &a.iterate()) => Split::Kept(a),
        _ => Split::NeedsProjection,
    }
}

const PROJECTION_ITERS: usize = 2_000;

/// A domain-feasible point of the box near `x_ref`, as an active set.
///
/// Runs BPCG on `0.5 ||x - x_ref||^2` and stops at the first domain-feasible
/// iterate. If that fails the target is moved to [`BoundBox::center`], which
/// has maximal support, so failure there proves the box has no feasible point.
pub fn domain_point(instance: &Instance, bbox: &BoundBox, x_ref: &[f64]) -> Result<Option<ActiveSet>> {
    let mut calls = 0;
    domain_point_counted(instance, bbox, x_ref, &mut calls)
}

pub(crate) fn domain_point_counted(
    instance: &Instance,
    bbox: &BoundBox,
    x_ref: &[f64],
    lmo_calls: &mut usize,
) -> Result<Option<ActiveSet>> {
    bbox.check()?;
    let feasible = |x: &[f64]| domain_feasible(instance, x);
    for target in [x_ref.to_vec(), bbox.center()] {
        let neg: Vec<f64> = target.iter().map(|t| -t).collect();
        let start = ActiveSet::singleton(bbox.lmo(&neg)?);
        *lmo_calls += 1;
        let f = SquaredDistance::new(target);
        let opts = BpcgOptions {
            gap_tol: 1e-12,
            iter_cap: PROJECTION_ITERS,
            stop_when: Some(&feasible),
            ..Default::default()
        };
        let (status, active) = bpcg(&f, bbox, start, opts)?;
        *lmo_calls += status.lmo_calls;
        if status.reason == StopReason::ConditionMet {
            return Ok(Some(active));
        }
    }
    Ok(None)
}

/// Warm start handed from a parent to a child node.
#[derive(Debug, Clone)]
pub(crate) struct WarmStart {
    pub active: Option<ActiveSet>,
    pub x_ref: Vec<f64>,
}

pub(crate) struct NodeContext {
    pub gap_tol: f64,
    pub exact_tol: f64,
    pub prune_bound: Option<f64>,
    pub deadline: Option<Instant>,
    pub iter_cap: usize,
}

pub(crate) struct NodeEval {
    pub lower_bound: f64,
    pub x: Vec<f64>,
    pub candidates: Vec<Vec<i64>>,
    pub active: Option<ActiveSet>,
    pub lmo_calls: usize,
    pub infeasible: bool,
}

impl NodeEval {
    pub fn infeasible(lmo_calls: usize) -> Self {
        NodeEval {
            lower_bound: f64::INFINITY,
            x: Vec::new(),
            candidates: Vec::new(),
            active: None,
            lmo_calls,
            infeasible: true,
        }
    }
}

/// Relaxation solver plugged into the shared tree search.
pub(crate) trait NodeSolver: Sync {
    fn name(&self) -> &'static str;
    fn evaluate(&self, bbox: &BoundBox, warm: &WarmStart, ctx: &NodeContext) -> Result<NodeEval>;
}

pub(crate) fn is_integral(x: &[f64]) -> bool {
    x.iter().all(|v| (v - v.round()).abs() <= INTEGRALITY_TOL)
}

struct BpcgNodes<'a> {
    instance: &'a Instance,
    objective: Objective<'a>,
}

impl NodeSolver for BpcgNodes<'_> {
    fn name(&self) -> &'static str {
        "boscia"
    }

    fn evaluate(&self, bbox: &BoundBox, warm: &WarmStart, ctx: &NodeContext) -> Result<NodeEval> {
        let mut lmo_calls = 0;
        let start = match &warm.active {
            Some(a) => a.clone(),
            None => match domain_point_counted(self.instance, bbox, &warm.x_ref, &mut lmo_calls)? {
                Some(a) => a,
                None => return Ok(NodeEval::infeasible(lmo_calls)),
            },
        };
        let opts = BpcgOptions {
            gap_tol: ctx.gap_tol,
            prune_bound: ctx.prune_bound,
            iter_cap: ctx.iter_cap,
            deadline: ctx.deadline,
            ..Default::default()
        };
        let (mut status, mut active) = bpcg(&self.objective, bbox, start, opts)?;
        lmo_calls += status.lmo_calls;
        if is_integral(&status.x) && status.reason != StopReason::BoundPruned && status.dual_gap > ctx.exact_tol {
            let opts = BpcgOptions {
                gap_tol: ctx.exact_tol,
                prune_bound: ctx.prune_bound,
                iter_cap: ctx.iter_cap,
                deadline: ctx.deadline,
                ..Default::default()
            };
            let (s, a) = bpcg(&self.objective, bbox, active, opts)?;
            lmo_calls += s.lmo_calls;
            status = s;
            active = a;
        }
        let mut candidates = vec![bbox.round(&status.x)?];
        for v in &active.vertices {
            if !candidates.contains(v) {
                candidates.push(v.clone());
            }
        }
        Ok(NodeEval {
            lower_bound: status.lower_bound(),
            x: status.x,
            candidates,
            active: Some(active),
            lmo_calls,
            infeasible: false,
        })
    }
}

/// Solves the instance with BPCG node relaxations.
pub fn solve(instance: &Instance, params: &BnbParams) -> Result<SolveReport> {
    let solver = BpcgNodes {
        instance,
        objective: Objective::new(instance),
    };
    run_tree(instance, params, &solver)
}

struct OpenNode {
    lower_bound: f64,
    seq: u64,
    depth: usize,
    bbox: BoundBox,
    warm: WarmStart,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenNode {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower_bound
            .total_cmp(&self.lower_bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn most_fractional(x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &w) in x.iter().enumerate() {
        let frac = (w - w.floor()).min(w.ceil() - w);
        if frac > INTEGRALITY_TOL && best.is_none_or(|(_, b)| frac > b) {
            best = Some((i, frac));
        }
    }
    best.map(|(i, _)| i)
}

struct Tree<'a> {
    instance: &'a Instance,
    objective: Objective<'a>,
    params: &'a BnbParams,
    start: Instant,
    heap: BinaryHeap<OpenNode>,
    next_seq: u64,
    frontier_min: f64,
    best_bound: f64,
    incumbent: Option<(Vec<i64>, f64)>,
    improvements: Vec<Improvement>,
    nodes: usize,
    lmo_calls: usize,
    trace: Vec<NodeTrace>,
}

impl Tree<'_> {
    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(_, v)| *v)
    }

    fn prune_threshold(&self) -> f64 {
        self.incumbent_value() - self.params.abs_tol
    }

    fn push(&mut self, lower_bound: f64, depth: usize, bbox: BoundBox, warm: WarmStart) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(OpenNode {
            lower_bound,
            seq,
            depth,
            bbox,
            warm,
        });
    }

    /// Monotone global bound: min over open nodes and closed leaves, capped at the incumbent.
    fn global_bound(&mut self) -> f64 {
        let open = self.heap.peek().map_or(f64::INFINITY, |n| n.lower_bound);
        let raw = open.min(self.frontier_min).min(self.incumbent_value());
        self.best_bound = self.best_bound.max(raw);
        self.best_bound
    }

    fn gap_closed(&mut self) -> bool {
        let inc = self.incumbent_value();
        if !inc.is_finite() {
            return false;
        }
        let abs_gap = inc - self.global_bound();
        abs_gap <= self.params.abs_tol || rel_gap(abs_gap, inc) <= self.params.rel_tol
    }

    fn offer(&mut self, node_id: u64, x: &[i64]) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let Ok(value) = self.objective.value(&xf) else {
            return;
        };
        let better = match &self.incumbent {
            None => true,
            Some((_, inc)) => value <= inc - 1e-9 * (1.0 + inc.abs()),
        };
        if better {
            self.incumbent = Some((x.to_vec(), value));
            self.improvements.push(Improvement {
                node_id,
                objective: value,
                x: x.to_vec(),
            });
        }
    }

    fn record(&mut self, node_id: u64, depth: usize) {
        if !self.params.record_trace {
            return;
        }
        let lb = self.global_bound();
        let inc = self.incumbent_value();
        self.trace.push(NodeTrace {
            node_id,
            depth,
            lower_bound: lb,
            incumbent: inc,
            abs_gap: inc - lb,
            time: self.start.elapsed().as_secs_f64(),
        });
    }

    fn merge(&mut self, node: OpenNode, eval: NodeEval) {
        self.nodes += 1;
        self.lmo_calls += eval.lmo_calls;
        let id = node.seq;
        if eval.infeasible {
            self.record(id, node.depth);
            return;
        }
        for cand in &eval.candidates {
            if node.bbox.contains_integer(cand) {
                self.offer(id, cand);
            }
        }
        let lb = node.lower_bound.max(eval.lower_bound);
        if lb >= self.prune_threshold() || node.bbox.is_singleton() {
            self.frontier_min = self.frontier_min.min(lb);
            self.record(id, node.depth);
            return;
        }
        let (var, down, up) = match most_fractional(&eval.x) {
            Some(i) => (i, eval.x[i].floor() as i64, eval.x[i].ceil() as i64),
            None => {
                // integral relaxation that did not certify the node: split on a free coordinate
                let Some(i) = (0..eval.x.len()).find(|&i| node.bbox.lower[i] < node.bbox.upper[i]) else {
                    self.frontier_min = self.frontier_min.min(lb);
                    self.record(id, node.depth);
                    return;
                };
                let v = (eval.x[i].round() as i64).clamp(node.bbox.lower[i], node.bbox.upper[i] - 1);
                (i, v, v + 1)
            }
        };
        for (side, bound) in [(Side::Le, down), (Side::Ge, up)] {
            let child = match side {
                Side::Le => node.bbox.with_upper(var, bound),
                Side::Ge => node.bbox.with_lower(var, bound),
            };
            let Some(child) = child else {
                continue;
            };
            let active = eval
                .active
                .as_ref()
                .and_then(|a| match split_active_set(self.instance, a, var, side, bound) {
                    Split::Kept(a) => Some(a),
                    Split::NeedsProjection => None,
                });
            let warm = WarmStart {
                active,
                x_ref: eval.x.clone(),
            };
            self.push(lb, node.depth + 1, child, warm);
        }
        self.record(id, node.depth);
    }
}

pub(crate) fn run_tree<S: NodeSolver>(instance: &Instance, params: &BnbParams, solver: &S) -> Result<SolveReport> {
    let start = Instant::now();
    let root = BoundBox::from_instance(instance);
    let objective = Objective::new(instance);
    let mut tree = Tree {
        instance,
        objective,
        params,
        start,
        heap: BinaryHeap::new(),
        next_seq: 0,
        frontier_min: f64::INFINITY,
        best_bound: f64::NEG_INFINITY,
        incumbent: None,
        improvements: Vec::new(),
        nodes: 0,
        lmo_calls: 0,
        trace: Vec::new(),
    };
    if !root.is_feasible() {
        return Ok(finish(tree, solver.name(), Status::Infeasible));
    }
    instance.ensure_valid()?;
    let deadline = params.time_limit.map(|s| start + Duration::from_secs_f64(s.max(0.0)));

    let x_start = start_point(instance, params.seed).ok();
    let root_warm = match &x_start {
        Some(x) => {
            tree.offer(0, x);
            WarmStart {
                active: Some(ActiveSet::singleton(x.clone())),
                x_ref: x.iter().map(|&v| v as f64).collect(),
            }
        }
        None => WarmStart {
            active: None,
            x_ref: root.center(),
        },
    };
    let f_start = tree.incumbent_value();
    let root_tol = params.root_tolerance(if f_start.is_finite() { f_start } else { 0.0 });
    let exact_tol = params.gap_tol_final.min(params.abs_tol);
    tree.push(f64::NEG_INFINITY, 0, root, root_warm);

    let workers = params.workers.max(1);
    let status = loop {
        if tree.gap_closed() {
            break Status::Optimal;
        }
        if tree.heap.is_empty() {
            break if tree.incumbent.is_none() {
                Status::Infeasible
            } else {
                Status::GapLimit
            };
        }
        if deadline.is_some_and(|d| Instant::now() >= d) && tree.nodes > 0 {
            break Status::TimeLimit;
        }
        if params.node_limit.is_some_and(|k| tree.nodes >= k) {
            break Status::GapLimit;
        }

        let mut batch = Vec::with_capacity(workers);
        while batch.len() < workers {
            let Some(node) = tree.heap.pop() else { break };
            if node.lower_bound >= tree.prune_threshold() {
                tree.frontier_min = tree.frontier_min.min(node.lower_bound);
                continue;
            }
            batch.push(node);
        }
        if batch.is_empty() {
            continue;
        }
        let inc = tree.incumbent_value();
        let prune_bound = (params.dynamic_pruning && inc.is_finite()).then_some(inc);
        let contexts: Vec<NodeContext> = batch
            .iter()
            .map(|node| NodeContext {
                gap_tol: node_tolerance(node.depth, params, root_tol),
                exact_tol,
                prune_bound,
                deadline,
                iter_cap: params.node_iter_cap,
            })
            .collect();
        let evals: Vec<Result<NodeEval>> = if batch.len() == 1 {
            vec![solver.evaluate(&batch[0].bbox, &batch[0].warm, &contexts[0])]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .zip(&contexts)
                    .map(|(node, ctx)| scope.spawn(move || solver.evaluate(&node.bbox, &node.warm, ctx)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("node worker panicked"))
                    .collect()
            })
        };
        for (node, eval) in batch.into_iter().zip(evals) {
            let eval = eval?;
            tree.merge(node, eval);
        }
    };
    log::debug!(
        "{}: {} nodes, status {status}, objective {}",
        solver.name(),
        tree.nodes,
        tree.incumbent_value()
    );
    Ok(finish(tree, solver.name(), status))
}

fn finish(mut tree: Tree<'_>, solver: &str, status: Status) -> SolveReport {
    let wall_time = tree.start.elapsed().as_secs_f64();
    let (incumbent, objective, lower_bound, abs_gap, rel) = match (status, tree.incumbent.clone()) {
        (Status::Infeasible, _) | (_, None) => {
            let lb = if status == Status::Infeasible {
                f64::INFINITY
            } else {
                tree.global_bound()
            };
            (Vec::new(), f64::INFINITY, lb, f64::INFINITY, f64::INFINITY)
        }
        (_, Some((x, value))) => {
            let lb = tree.global_bound();
            let gap = value - lb;
            (x, value, lb, gap, rel_gap(gap, value))
        }
    };
    SolveReport {
        solver: solver.to_string(),
        incumbent,
        objective,
        lower_bound,
        abs_gap,
        rel_gap: rel,
        nodes: tree.nodes,
        lmo_calls: tree.lmo_calls,
        wall_time,
        status,
        improvements: tree.improvements,
        trace: tree.trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Criterion;
    use nalgebra::DMatrix;

    fn identity(budget: i64, upper: Vec<i64>, criterion: Criterion) -> Instance {
        let m = upper.len();
        Instance {
            m,
            n: m,
            budget,
            a: DMatrix::identity(m, m),
            lower: vec![0; m],
            upper,
            fusion: None,
            criterion,
        }
    }

    #[test]
    fn d_opt_identity_two_by_two() {
        let inst = identity(3, vec![2, 2], Criterion::d_opt());
        let r = solve(&inst, &BnbParams::exact()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!(r.incumbent == vec![2, 1] || r.incumbent == vec![1, 2]);
        assert!((r.objective + 2f64.ln()).abs() < 1e-12);
        assert!(r.abs_gap <= 1e-9 + 1e-12);
    }

    #[test]
    fn a_opt_identity_only_feasible_point() {
        let inst = identity(2, vec![2, 2], Criterion::a_opt());
        let r = solve(&inst, &BnbParams::exact()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.incumbent, vec![1, 1]);
        assert!((r.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_root_box() {
        let inst = identity(5, vec![2, 2], Criterion::d_opt());
        let r = solve(&inst, &BnbParams::default()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
        assert!(r.incumbent.is_empty());
    }

    #[test]
    fn start_point_hand_trace() {
        let inst = identity(4, vec![2, 2, 2], Criterion::d_opt());
        assert_eq!(start_point(&inst, 1).unwrap(), vec![1, 1, 2]);
    }

    #[test]
    fn start_point_is_budgeted_and_feasible() {
        let mut inst = identity(5, vec![1, 1, 3], Criterion::d_opt());
        inst.m = 4;
        inst.a = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        inst.lower = vec![0; 4];
        inst.upper = vec![1, 1, 1, 3];
        let x = start_point(&inst, 7).unwrap();
        assert_eq!(x.iter().sum::<i64>(), 5);
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        assert!(domain_feasible(&inst, &xf));
    }

    #[test]
    fn node_tolerance_schedule() {
        let p = BnbParams::default();
        let root = p.root_tolerance(0.0);
        assert!((node_tolerance(0, &p, root) - 1e-3).abs() < 1e-18);
        assert_eq!(node_tolerance(20, &p, root), 1e-6);
        assert!((0..40).all(|d| node_tolerance(d + 1, &p, root) <= node_tolerance(d, &p, root)));
    }

    #[test]
    fn split_examples() {
        let mut inst = identity(3, vec![2, 2, 2], Criterion::d_opt());
        inst.fusion = Some(DMatrix::identity(3, 3));
        let a = ActiveSet::from_parts(vec![vec![0, 2, 1], vec![2, 1, 0]], vec![0.5, 0.5]);
        match split_active_set(&inst, &a, 0, Side::Le, 1) {
            Split::Kept(k) => {
                assert_eq!(k.vertices, vec![vec![0, 2, 1]]);
                assert_eq!(k.weights, vec![1.0]);
            }
            Split::NeedsProjection => panic!("expected a kept atom"),
        }
        assert_eq!(split_active_set(&inst, &a, 0, Side::Ge, 3), Split::NeedsProjection);

        // survivor is singular without the fusion term
        inst.fusion = None;
        assert_eq!(split_active_set(&inst, &a, 0, Side::Le, 1), Split::NeedsProjection);
    }

    #[test]
    fn domain_point_restores_rank() {
        let inst = identity(3, vec![2, 2, 2], Criterion::d_opt());
        let bbox = BoundBox::from_instance(&inst);
        let a = domain_point(&inst, &bbox, &[3.0, 0.0, 0.0]).unwrap().unwrap();
        let x = a.iterate();
        assert!(domain_feasible(&inst, &x));
        assert!(bbox.contains(&x, 1e-9));

        let feasible = [1.0, 1.0, 1.0];
        let a = domain_point(&inst, &bbox, &feasible).unwrap().unwrap();
        assert_eq!(a.iterate(), feasible.to_vec());

        let tight = BoundBox::new(vec![0, 0, 0], vec![2, 2, 0], 3).unwrap();
        assert!(domain_point(&inst, &tight, &[1.5, 1.5, 0.0]).unwrap().is_none());
    }

    #[test]
    fn report_serializes() {
        let inst = identity(3, vec![2, 2], Criterion::d_opt());
        let r = solve(&inst, &BnbParams::default()).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: SolveReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.status, r.status);
        assert_eq!(back.incumbent, r.incumbent);
    }
}

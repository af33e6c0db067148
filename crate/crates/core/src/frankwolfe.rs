//! Blended pairwise conditional gradients over the budgeted box.
//!
//! The iterate is stored as a convex combination of integer points of the
//! polytope (the active set). Each iteration either moves weight between the
//! best and worst active atoms (pairwise step) or towards the vertex returned
//! by the linear minimization oracle (FW step), whichever has the larger gap.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{OedError, Result};
use crate::function::{dot, SmoothFunction};
use crate::lmo::BoundBox;

/// Atoms with weight at or below this are dropped.
pub const WEIGHT_DROP: f64 = 1e-12;

/// Convex decomposition of the current iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub vertices: Vec<Vec<i64>>,
    pub weights: Vec<f64>,
}

impl ActiveSet {
    pub fn singleton(v: Vec<i64>) -> Self {
        ActiveSet {
            vertices: vec![v],
            weights: vec![1.0],
        }
    }

    pub fn from_parts(vertices: Vec<Vec<i64>>, weights: Vec<f64>) -> Self {
        let mut s = ActiveSet { vertices, weights };
        s.cleanup();
        s
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, Vec::len)
    }

    pub fn iterate(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for (v, &w) in self.vertices.iter().zip(&self.weights) {
            for (xi, &vi) in x.iter_mut().zip(v) {
                *xi += w * vi as f64;
            }
        }
        x
    }

    /// Weights positive and summing to one within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        !self.is_empty()
            && self.vertices.len() == self.weights.len()
            && self.weights.iter().all(|&w| w > WEIGHT_DROP)
            && (self.weights.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    fn cleanup(&mut self) {
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] <= WEIGHT_DROP {
                self.weights.swap_remove(i);
                self.vertices.swap_remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = self.weights.iter().sum();
        if total > 0.0 {
            for w in self.weights.iter_mut() {
                *w /= total;
            }
        }
    }

    fn position(&self, v: &[i64]) -> Option<usize> {
        self.vertices.iter().position(|u| u.as_slice() == v)
    }

    fn fw_update(&mut self, v: Vec<i64>, gamma: f64) {
        if gamma >= 1.0 {
            *self = ActiveSet::singleton(v);
            return;
        }
        for w in self.weights.iter_mut() {
            *w *= 1.0 - gamma;
        }
        match self.position(&v) {
            Some(k) => self.weights[k] += gamma,
            None => {
                self.vertices.push(v);
                self.weights.push(gamma);
            }
        }
        self.cleanup();
    }

    fn pairwise_update(&mut self, from: usize, to: usize, gamma: f64) {
        let moved = gamma.min(self.weights[from]);
        if self.weights[from] - moved <= WEIGHT_DROP {
            self.weights[to] += self.weights[from];
            self.weights[from] = 0.0;
        } else {
            self.weights[from] -= moved;
            self.weights[to] += moved;
        }
        self.cleanup();
    }

    /// Keeps the atoms satisfying `keep`, renormalized; `None` if none survive.
    pub fn filter(&self, keep: impl Fn(&[i64]) -> bool) -> Option<ActiveSet> {
        let (vertices, weights): (Vec<_>, Vec<_>) = self
            .vertices
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| keep(v))
            .map(|(v, &w)| (v.clone(), w))
            .unzip();
        if vertices.is_empty() {
            return None;
        }
        Some(ActiveSet::from_parts(vertices, weights))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GapReached,
    IterLimit,
    BoundPruned,
    DomainStall,
    TimeLimit,
    /// The caller-provided stopping predicate accepted the iterate.
    ConditionMet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FwStatus {
    pub x: Vec<f64>,
    pub dual_gap: f64,
    pub primal: f64,
    pub iterations: usize,
    pub lmo_calls: usize,
    pub reason: StopReason,
}

impl FwStatus {
    /// Valid lower bound on the minimum over the polytope (by convexity).
    pub fn lower_bound(&self) -> f64 {
        self.primal - self.dual_gap
    }
}

/// One line of the per-iteration convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub primal: f64,
    pub dual_gap: f64,
}

pub struct BpcgOptions<'a> {
    pub gap_tol: f64,
    /// Stop once `primal - dual_gap` exceeds this value.
    pub prune_bound: Option<f64>,
    pub iter_cap: usize,
    pub deadline: Option<Instant>,
    pub stop_when: Option<&'a dyn Fn(&[f64]) -> bool>,
    pub trace: Option<&'a mut dyn FnMut(TracePoint)>,
}

impl Default for BpcgOptions<'_> {
    fn default() -> Self {
        BpcgOptions {
            gap_tol: 1e-7,
            prune_bound: None,
            iter_cap: 10_000,
            deadline: None,
            stop_when: None,
            trace: None,
        }
    }
}

impl<'a> BpcgOptions<'a> {
    pub fn with_gap(gap_tol: f64) -> Self {
        BpcgOptions {
            gap_tol,
            ..Default::default()
        }
    }
}

/// Relative slack allowed on the monotone-decrease check.
const MONOTONE_SLACK: f64 = 1e-12;

pub fn bpcg<F: SmoothFunction + ?Sized>(
    f: &F,
    bbox: &BoundBox,
    start: ActiveSet,
    mut opts: BpcgOptions<'_>,
) -> Result<(FwStatus, ActiveSet)> {
    if !(opts.gap_tol > 0.0) {
        return Err(OedError::InvalidSpec("gap tolerance must be positive".into()));
    }
    let mut active = start;
    active.cleanup();
    if active.is_empty() {
        return Err(OedError::InvalidSpec("empty active set".into()));
    }
    let mut x = active.iterate();
    if !f.in_domain(&x) {
        return Err(OedError::Domain);
    }
    let (mut primal, mut grad) = f.value_and_gradient(&x)?;
    let mut lmo_calls = 0usize;
    let mut iterations = 0usize;
    let mut frozen = 0usize;

    loop {
        let v_fw = bbox.lmo(&grad)?;
        lmo_calls += 1;
        let gx = dot(&grad, &x);
        let gv: f64 = grad.iter().zip(&v_fw).map(|(g, &v)| g * v as f64).sum();
        let dual_gap = (gx - gv).max(0.0);
        if let Some(trace) = opts.trace.as_mut() {
            trace(TracePoint {
                iteration: iterations,
                primal,
                dual_gap,
            });
        }
        macro_rules! finish {
            ($reason:expr) => {
                return Ok((
                    FwStatus {
                        x,
                        dual_gap,
                        primal,
                        iterations,
                        lmo_calls,
                        reason: $reason,
                    },
                    active,
                ))
            };
        }
        if opts.stop_when.is_some_and(|cond| cond(&x)) {
            finish!(StopReason::ConditionMet);
        }
        if dual_gap <= opts.gap_tol {
            finish!(StopReason::GapReached);
        }
        if opts.prune_bound.is_some_and(|b| primal - dual_gap > b) {
            finish!(StopReason::BoundPruned);
        }
        if iterations >= opts.iter_cap {
            finish!(StopReason::IterLimit);
        }
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            finish!(StopReason::TimeLimit);
        }

        let scores: Vec<f64> = active
            .vertices
            .iter()
            .map(|v| grad.iter().zip(v).map(|(g, &vi)| g * vi as f64).sum())
            .collect();
        let away = argmax(&scores);
        let toward = argmin(&scores);
        let local_gap = scores[away] - scores[toward];

        let pairwise = local_gap >= dual_gap && away != toward;
        let (dir, gamma_max): (Vec<f64>, f64) = if pairwise {
            let a = &active.vertices[away];
            let s = &active.vertices[toward];
            (
                s.iter().zip(a).map(|(&si, &ai)| (si - ai) as f64).collect(),
                active.weights[away],
            )
        } else {
            (v_fw.iter().zip(&x).map(|(&vi, xi)| vi as f64 - xi).collect(), 1.0)
        };
        let slope = dot(&grad, &dir);
        let gamma = match line_search_from(f, &x, &dir, gamma_max, primal, slope) {
            Ok(g) if g > 0.0 => g,
            _ => finish!(StopReason::DomainStall),
        };

        let previous = active.clone();
        if pairwise {
            active.pairwise_update(away, toward, gamma);
        } else {
            active.fw_update(v_fw, gamma);
        }
        let x_new = active.iterate();
        let evaluated = if f.in_domain(&x_new) {
            f.value_and_gradient(&x_new).ok()
        } else {
            None
        };
        match evaluated {
            Some((p, g)) if p <= primal + MONOTONE_SLACK * primal.abs().max(1.0) => {
                frozen = if x_new == x { frozen + 1 } else { 0 };
                if frozen >= FROZEN_LIMIT {
                    finish!(StopReason::DomainStall);
                }
                x = x_new;
                primal = p;
                grad = g;
                iterations += 1;
            }
            _ => {
                active = previous;
                finish!(StopReason::DomainStall);
            }
        }
    }
}

/// Consecutive steps that leave the iterate bit-identical before giving up.
const FROZEN_LIMIT: usize = 5;

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

/// The line search could not find a domain-feasible decreasing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainStall;

const MAX_HALVINGS: usize = 60;
const SECANT_ITERS: usize = 40;
const ARMIJO_C: f64 = 1e-4;

fn shifted(x: &[f64], d: &[f64], gamma: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + gamma * b).collect()
}

fn directional<F: SmoothFunction + ?Sized>(f: &F, x: &[f64], d: &[f64], gamma: f64) -> Option<f64> {
    let y = shifted(x, d, gamma);
    if !f.in_domain(&y) {
        return None;
    }
    f.gradient(&y).ok().map(|g| dot(&g, d))
}

fn value_at<F: SmoothFunction + ?Sized>(f: &F, x: &[f64], d: &[f64], gamma: f64) -> Option<f64> {
    let y = shifted(x, d, gamma);
    if !f.in_domain(&y) {
        return None;
    }
    f.value(&y).ok()
}

/// Secant search for a root of `phi'(gamma) = <grad f(x + gamma d), d>` on
/// `[0, gamma_max]`, kept inside the domain by halving the right end.
pub fn line_search_secant<F: SmoothFunction + ?Sized>(
    f: &F,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
) -> std::result::Result<f64, DomainStall> {
    let (f0, g0) = f.value_and_gradient(x).map_err(|_| DomainStall)?;
    secant(f, x, d, gamma_max, f0, dot(&g0, d))
}

fn secant<F: SmoothFunction + ?Sized>(
    f: &F,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    f0: f64,
    slope0: f64,
) -> std::result::Result<f64, DomainStall> {
    if !(slope0 < 0.0) || !(gamma_max > 0.0) {
        return Err(DomainStall);
    }
    let mut hi = gamma_max;
    let mut halvings = 0;
    let mut g_hi = loop {
        match directional(f, x, d, hi) {
            Some(g) => break g,
            None => {
                hi *= 0.5;
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(DomainStall);
                }
            }
        }
    };
    let gamma = if g_hi <= 0.0 {
        hi
    } else {
        let tol = 1e-8 * slope0.abs();
        let (mut lo, mut g_lo) = (0.0, slope0);
        let mut t = hi;
        let mut side = 0i8;
        for _ in 0..SECANT_ITERS {
            t = lo - g_lo * (hi - lo) / (g_hi - g_lo);
            if !(t > lo && t < hi) {
                t = 0.5 * (lo + hi);
            }
            let Some(g_t) = directional(f, x, d, t) else {
                hi = t;
                continue;
            };
            if g_t.abs() <= tol {
                break;
            }
            if g_t < 0.0 {
                lo = t;
                g_lo = g_t;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = t;
                g_hi = g_t;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            }
        }
        t
    };
    match value_at(f, x, d, gamma) {
        Some(v) if v <= f0 => Ok(gamma),
        _ => Err(DomainStall),
    }
}

/// Armijo backtracking from `gamma_max` with `c = 1e-4`.
pub fn line_search_backtracking<F: SmoothFunction + ?Sized>(
    f: &F,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
) -> std::result::Result<f64, DomainStall> {
    let (f0, g0) = f.value_and_gradient(x).map_err(|_| DomainStall)?;
    backtracking(f, x, d, gamma_max, f0, dot(&g0, d))
}

fn backtracking<F: SmoothFunction + ?Sized>(
    f: &F,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    f0: f64,
    slope0: f64,
) -> std::result::Result<f64, DomainStall> {
    if !(slope0 < 0.0) || !(gamma_max > 0.0) {
        return Err(DomainStall);
    }
    let mut gamma = gamma_max;
    for _ in 0..=MAX_HALVINGS {
        if let Some(v) = value_at(f, x, d, gamma) {
            if v <= f0 + ARMIJO_C * gamma * slope0 {
                return Ok(gamma);
            }
        }
        gamma *= 0.5;
    }
    Err(DomainStall)
}

/// Secant search with Armijo backtracking as fallback.
fn line_search_from<F: SmoothFunction + ?Sized>(
    f: &F,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    f0: f64,
    slope0: f64,
) -> std::result::Result<f64, DomainStall> {
    secant(f, x, d, gamma_max, f0, slope0).or_else(|_| backtracking(f, x, d, gamma_max, f0, slope0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Objective;
    use crate::function::SquaredDistance;
    use crate::instance::{Criterion, Instance};
    use nalgebra::DMatrix;

    fn identity_instance() -> Instance {
        Instance {
            m: 2,
            n: 2,
            budget: 3,
            a: DMatrix::identity(2, 2),
            lower: vec![0, 0],
            upper: vec![2, 2],
            fusion: None,
            criterion: Criterion::d_opt(),
        }
    }

    #[test]
    fn projection_of_interior_target() {
        let c = vec![1.2, 0.3, 0.9];
        let f = SquaredDistance::new(c.clone());
        let bbox = BoundBox::new(vec![0; 3], vec![2; 3], 3).unwrap();
        let start = ActiveSet::singleton(vec![2, 1, 0]);
        let opts = BpcgOptions {
            gap_tol: 1e-8,
            iter_cap: 500,
            ..Default::default()
        };
        let (status, active) = bpcg(&f, &bbox, start, opts).unwrap();
        assert_eq!(status.reason, StopReason::GapReached);

        // grid oracle with step 0.01
        let mut best = (f64::INFINITY, [0.0; 3]);
        for i in 0..=200 {
            for j in 0..=200 {
                let p = [i as f64 * 0.01, j as f64 * 0.01, 3.0 - (i + j) as f64 * 0.01];
                if p[2] < -1e-12 || p[2] > 2.0 + 1e-12 {
                    continue;
                }
                let v: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
        for k in 0..3 {
            assert!((status.x[k] - best.1[k]).abs() <= 0.01 + 1e-9, "{:?} vs {:?}", status.x, best.1);
        }
        assert!(active.is_valid(1e-10));
    }

    #[test]
    fn d_optimal_relaxation_of_identity() {
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let bbox = BoundBox::from_instance(&inst);
        let (status, _) = bpcg(&obj, &bbox, ActiveSet::singleton(vec![2, 1]), BpcgOptions::with_gap(1e-10)).unwrap();
        // maximize log t + log(3 - t): t = 1.5
        assert!((status.x[0] - 1.5).abs() < 1e-4);
        assert!((status.primal + 2.0 * 1.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn start_at_optimum_stops_immediately() {
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let bbox = BoundBox::from_instance(&inst);
        let start = ActiveSet::from_parts(vec![vec![2, 1], vec![1, 2]], vec![0.5, 0.5]);
        let (status, _) = bpcg(&obj, &bbox, start, BpcgOptions::with_gap(1e-9)).unwrap();
        assert_eq!(status.reason, StopReason::GapReached);
        assert!(status.iterations <= 1);
    }

    #[test]
    fn forced_prune() {
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let bbox = BoundBox::from_instance(&inst);
        let opts = BpcgOptions {
            gap_tol: 1e-12,
            prune_bound: Some(-10.0),
            ..Default::default()
        };
        let (status, _) = bpcg(&obj, &bbox, ActiveSet::singleton(vec![2, 1]), opts).unwrap();
        assert_eq!(status.reason, StopReason::BoundPruned);
        assert!(status.lower_bound() > -10.0);
    }

    #[test]
    fn rejects_singular_start() {
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let mut bbox = BoundBox::from_instance(&inst);
        bbox.upper = vec![3, 3];
        assert!(matches!(
            bpcg(&obj, &bbox, ActiveSet::singleton(vec![3, 0]), BpcgOptions::default()),
            Err(OedError::Domain)
        ));
    }

    #[test]
    fn trace_is_reported() {
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let bbox = BoundBox::from_instance(&inst);
        let mut rows = Vec::new();
        let mut sink = |p: TracePoint| rows.push(p);
        let opts = BpcgOptions {
            gap_tol: 1e-10,
            trace: Some(&mut sink),
            ..Default::default()
        };
        let (status, _) = bpcg(&obj, &bbox, ActiveSet::singleton(vec![2, 1]), opts).unwrap();
        assert_eq!(rows.len(), status.iterations + 1);
        assert!(rows.windows(2).all(|w| w[1].primal <= w[0].primal + 1e-12));
    }

    #[test]
    fn secant_finds_quadratic_minimum() {
        // phi(gamma) = 0.5 * ((gamma - 0.3)^2 + const) along d = e_0
        let f = SquaredDistance::new(vec![0.3, 0.0]);
        let g = line_search_secant(&f, &[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!((g - 0.3).abs() < 1e-6);
        let g = line_search_secant(&f, &[0.0, 0.0], &[1.0, 0.0], 0.2).unwrap();
        assert_eq!(g, 0.2);
    }

    #[test]
    fn secant_matches_golden_section_on_logdet_slice() {
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let x = [2.0, 1.0];
        let d = [-1.0, 1.0];
        let g = line_search_secant(&obj, &x, &d, 1.0).unwrap();
        let phi = |t: f64| obj.value(&[2.0 - t, 1.0 + t]).unwrap();
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let e = a + r * (b - a);
            if phi(c) < phi(e) {
                b = e;
            } else {
                a = c;
            }
        }
        assert!((g - 0.5 * (a + b)).abs() < 1e-6);
    }

    #[test]
    fn backtracking_cases() {
        let f = SquaredDistance::new(vec![5.0, 0.0]);
        assert_eq!(line_search_backtracking(&f, &[0.0, 0.0], &[1.0, 0.0], 1.0), Ok(1.0));
        assert_eq!(line_search_backtracking(&f, &[0.0, 0.0], &[-1.0, 0.0], 1.0), Err(DomainStall));

        // domain boundary at gamma = 1.5 = 0.5 * gamma_max
        let inst = identity_instance();
        let obj = Objective::new(&inst);
        let g = line_search_backtracking(&obj, &[0.5, 1.5], &[1.0, -1.0], 3.0).unwrap();
        assert!(g < 1.5 && g > 0.0);
    }

    #[test]
    fn active_set_filter_and_updates() {
        let mut s = ActiveSet::from_parts(vec![vec![0, 2, 1], vec![2, 1, 0]], vec![0.5, 0.5]);
        let kept = s.filter(|v| v[0] <= 1).unwrap();
        assert_eq!(kept.vertices, vec![vec![0, 2, 1]]);
        assert_eq!(kept.weights, vec![1.0]);
        assert!(s.filter(|v| v[0] >= 3).is_none());
        s.fw_update(vec![1, 1, 1], 0.5);
        assert!(s.is_valid(1e-12));
        assert_eq!(s.iterate(), vec![1.0, 1.25, 0.75]);
        s.pairwise_update(0, 2, 1.0);
        assert_eq!(s.len(), 2);
        assert!(s.is_valid(1e-12));
    }
}

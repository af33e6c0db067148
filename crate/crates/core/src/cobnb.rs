//! Coordinate-exchange baseline.
//!
//! Node relaxations are solved by moving weight from the experiment with the
//! largest partial derivative to the one with the smallest, with closed-form
//! step sizes for the A- and D-criteria.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bnb::{self, BnbParams, NodeContext, NodeEval, NodeSolver, SolveReport, WarmStart};
use crate::criteria::{info_matrix, Objective};
use crate::error::{OedError, Result};
use crate::instance::{CriterionKind, Instance};
use crate::lmo::BoundBox;

/// Quadratic forms of the two exchanged experiments.
///
/// `omega_*` use `X^-1`, `zeta_*` use `X^-2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeStats {
    pub omega_j: f64,
    pub omega_k: f64,
    pub omega_jk: f64,
    pub zeta_j: f64,
    pub zeta_k: f64,
    pub zeta_jk: f64,
}

impl ExchangeStats {
    pub fn from_vectors(x: &DMatrix<f64>, vj: &DVector<f64>, vk: &DVector<f64>) -> Result<Self> {
        let chol = x.clone().cholesky().ok_or(OedError::Domain)?;
        let wj = chol.solve(vj);
        let wk = chol.solve(vk);
        Ok(ExchangeStats {
            omega_j: vj.dot(&wj),
            omega_k: vk.dot(&wk),
            omega_jk: vj.dot(&wk),
            zeta_j: wj.dot(&wj),
            zeta_k: wk.dot(&wk),
            zeta_jk: wj.dot(&wk),
        })
    }

    fn coefficients(&self) -> (f64, f64, f64, f64) {
        let a = self.zeta_j - self.zeta_k;
        let b = 2.0 * self.omega_jk * self.zeta_jk - self.omega_j * self.zeta_k - self.omega_k * self.zeta_j;
        let c = self.omega_j - self.omega_k;
        let d = self.omega_j * self.omega_k - self.omega_jk * self.omega_jk;
        (a, b, c, d)
    }

    /// `det(X + theta (v_j v_j^T - v_k v_k^T)) / det X`.
    pub fn det_ratio(&self, theta: f64) -> f64 {
        let (_, _, c, d) = self.coefficients();
        1.0 + theta * c - theta * theta * d
    }

    /// Decrease of `Tr X^-1` after the exchange; `-inf` once the update is singular.
    pub fn a_gain(&self, theta: f64) -> f64 {
        let (a, b, _, _) = self.coefficients();
        let den = self.det_ratio(theta);
        if den <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (theta * a + theta * theta * b) / den
    }

    /// Decrease of `-log det X` after the exchange.
    pub fn d_gain(&self, theta: f64) -> f64 {
        let den = self.det_ratio(theta);
        if den <= 0.0 {
            f64::NEG_INFINITY
        } else {
            den.ln()
        }
    }

    /// Largest step in `[0, h]` with a positive definite update.
    fn admissible(&self, h: f64) -> f64 {
        if self.det_ratio(h) > DET_FLOOR {
            return h;
        }
        // det ratio is concave with value 1 at 0: bisect its first root
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.det_ratio(mid) > DET_FLOOR {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

const DET_FLOOR: f64 = 1e-12;

fn headroom(h_j: f64, h_k: f64) -> f64 {
    h_j.min(h_k).max(0.0)
}

/// Maximizes `a_gain` on `[0, min(h_j, h_k)]`.
///
/// Stationary points solve `A + 2 B theta + (AD + BC) theta^2 = 0`; the
/// candidate roots and both ends are compared and the best admissible one kept.
pub fn exchange_step_a(stats: &ExchangeStats, h_j: f64, h_k: f64) -> f64 {
    let h = stats.admissible(headroom(h_j, h_k));
    if h <= 0.0 {
        return 0.0;
    }
    let (a, b, c, d) = stats.coefficients();
    let delta = a * d + b * c;
    let scale = a.abs().max(b.abs()).max(delta.abs()).max(f64::MIN_POSITIVE);
    let mut candidates = vec![0.0, h];
    if delta.abs() > 1e-14 * scale {
        let disc = b * b - a * delta;
        if disc < 0.0 {
            log::debug!("exchange_step_a: negative discriminant, golden-section fallback");
            return best_of(|t| stats.a_gain(t), &[0.0, h, golden_max(|t| stats.a_gain(t), 0.0, h)]);
        }
        let r = disc.sqrt();
        candidates.push(-(b + r) / delta);
        candidates.push((r - b) / delta);
    } else if b != 0.0 {
        candidates.push(-a / (2.0 * b));
    }
    let valid: Vec<f64> = candidates
        .into_iter()
        .filter(|t| t.is_finite() && *t >= 0.0 && *t <= h)
        .collect();
    best_of(|t| stats.a_gain(t), &valid)
}

/// Maximizes `log det` along `e_j - e_k` on `[0, min(h_j, h_k)]`.
///
/// The determinant ratio `1 + C theta - D theta^2` peaks at `C / 2D`.
pub fn exchange_step_d(stats: &ExchangeStats, h_j: f64, h_k: f64) -> f64 {
    let h = stats.admissible(headroom(h_j, h_k));
    if h <= 0.0 {
        return 0.0;
    }
    let (_, _, c, d) = stats.coefficients();
    let theta = if d > 1e-14 * (stats.omega_j * stats.omega_k).max(f64::MIN_POSITIVE) {
        (c / (2.0 * d)).clamp(0.0, h)
    } else if c > 0.0 {
        h
    } else {
        0.0
    };
    if stats.d_gain(theta) > 0.0 {
        theta
    } else {
        0.0
    }
}

fn best_of(f: impl Fn(f64) -> f64, points: &[f64]) -> f64 {
    let mut best = (0.0, f(0.0));
    for &t in points {
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    if best.1 > 0.0 {
        best.0
    } else {
        0.0
    }
}

/// Golden-section search for a maximizer of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CdReason {
    GapReached,
    IterLimit,
    /// No pair with `x_j < u_j` and `x_k > l_k` exists.
    DegenerateStop,
    /// The best exchange did not decrease the objective.
    Stalled,
    BoundPruned,
    TimeLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdStatus {
    pub x: Vec<f64>,
    pub primal: f64,
    /// `max_k grad_k - min_j grad_j` over admissible pairs.
    pub pairwise_gap: f64,
    pub fw_gap: f64,
    pub exchanges: usize,
    pub lmo_calls: usize,
    pub reason: CdReason,
    /// Objective after every accepted exchange, starting with the initial value.
    pub history: Vec<f64>,
}

impl CdStatus {
    pub fn lower_bound(&self) -> f64 {
        self.primal - self.fw_gap
    }
}

#[derive(Debug, Clone, Default)]
pub struct CdOptions {
    pub tol: f64,
    pub iter_cap: usize,
    pub prune_bound: Option<f64>,
    pub deadline: Option<Instant>,
}

impl CdOptions {
    pub fn new(tol: f64, iter_cap: usize) -> Self {
        CdOptions {
            tol,
            iter_cap,
            ..Default::default()
        }
    }
}

const BOUND_EPS: f64 = 1e-12;

/// Coordinate-exchange descent from a domain-feasible point of the box.
///
/// Stops once the pairwise gap is below `tol / max(1, N - sum l)`, which keeps
/// the Frank-Wolfe gap (and so the lower bound) within `tol`.
pub fn cd_solve(instance: &Instance, bbox: &BoundBox, start: &[f64], opts: &CdOptions) -> Result<CdStatus> {
    let obj = Objective::new(instance);
    if !bbox.contains(start, 1e-9) {
        return Err(OedError::InvalidSpec("start point outside the box".into()));
    }
    let mut x = start.to_vec();
    let (mut primal, mut grad) = obj.value_and_gradient(&x)?;
    let mass = (bbox.budget - bbox.lower.iter().sum::<i64>()).max(1) as f64;
    let pair_tol = opts.tol / mass;
    let mut history = vec![primal];
    let mut lmo_calls = 0;
    let mut exchanges = 0;
    loop {
        let v = bbox.lmo(&grad)?;
        lmo_calls += 1;
        let fw_gap = grad
            .iter()
            .zip(x.iter().zip(&v))
            .map(|(g, (xi, &vi))| g * (xi - vi as f64))
            .sum::<f64>()
            .max(0.0);
        let up = (0..x.len())
            .filter(|&i| x[i] < bbox.upper[i] as f64 - BOUND_EPS)
            .min_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        let down = (0..x.len())
            .filter(|&i| x[i] > bbox.lower[i] as f64 + BOUND_EPS)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]).then(b.cmp(&a)));
        let (j, k) = match (up, down) {
            (Some(j), Some(k)) => (j, k),
            _ => {
                return Ok(CdStatus {
                    x,
                    primal,
                    pairwise_gap: 0.0,
                    fw_gap,
                    exchanges,
                    lmo_calls,
                    reason: CdReason::DegenerateStop,
                    history,
                })
            }
        };
        let pairwise_gap = (grad[k] - grad[j]).max(0.0);
        let stop = |reason| CdStatus {
            x: x.clone(),
            primal,
            pairwise_gap,
            fw_gap,
            exchanges,
            lmo_calls,
            reason,
            history: history.clone(),
        };
        if pairwise_gap <= pair_tol {
            return Ok(stop(CdReason::GapReached));
        }
        if opts.prune_bound.is_some_and(|b| primal - fw_gap > b) {
            return Ok(stop(CdReason::BoundPruned));
        }
        if exchanges >= opts.iter_cap {
            return Ok(stop(CdReason::IterLimit));
        }
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(stop(CdReason::TimeLimit));
        }
        let h_j = bbox.upper[j] as f64 - x[j];
        let h_k = x[k] - bbox.lower[k] as f64;
        let theta = exchange_theta(&obj, &x, j, k, h_j, h_k)?;
        if !(theta > 0.0) {
            return Ok(stop(CdReason::Stalled));
        }
        let mut y = x.clone();
        y[j] += theta;
        y[k] -= theta;
        // snap to the bounds to keep the simplex slice exact
        if (y[j] - bbox.upper[j] as f64).abs() <= BOUND_EPS {
            y[j] = bbox.upper[j] as f64;
        }
        if (y[k] - bbox.lower[k] as f64).abs() <= BOUND_EPS {
            y[k] = bbox.lower[k] as f64;
        }
        match obj.value_and_gradient(&y) {
            Ok((p, g)) if p < primal => {
                x = y;
                primal = p;
                grad = g;
                exchanges += 1;
                history.push(primal);
            }
            _ => return Ok(stop(CdReason::Stalled)),
        }
    }
}

fn exchange_theta(obj: &Objective<'_>, x: &[f64], j: usize, k: usize, h_j: f64, h_k: f64) -> Result<f64> {
    let kind = obj.criterion.kind;
    let closed_form = match kind {
        CriterionKind::DOpt => true,
        CriterionKind::AOpt | CriterionKind::LogAOpt => true,
        _ => obj.criterion.p == 1.0,
    };
    if closed_form {
        let info = info_matrix(obj.instance, x)?;
        let stats = ExchangeStats::from_vectors(&info.matrix, &obj.instance.row(j), &obj.instance.row(k))?;
        return Ok(match kind {
            CriterionKind::DOpt => exchange_step_d(&stats, h_j, h_k),
            _ => exchange_step_a(&stats, h_j, h_k),
        });
    }
    // no closed form: golden section on the objective along e_j - e_k
    let along = |t: f64| {
        let mut y = x.to_vec();
        y[j] += t;
        y[k] -= t;
        obj.value(&y).map(|v| -v).unwrap_or(f64::NEG_INFINITY)
    };
    let mut h = headroom(h_j, h_k);
    let mut halvings = 0;
    while !along(h).is_finite() && halvings < 60 {
        h *= 0.5;
        halvings += 1;
    }
    if !along(h).is_finite() {
        return Ok(0.0);
    }
    let f0 = along(0.0);
    let t = golden_max(along, 0.0, h);
    let best = [t, h]
        .into_iter()
        .fold((0.0, f0), |acc, c| if along(c) > acc.1 { (c, along(c)) } else { acc });
    Ok(best.0)
}

struct CdNodes<'a> {
    instance: &'a Instance,
}

impl NodeSolver for CdNodes<'_> {
    fn name(&self) -> &'static str {
        "cobnb"
    }

    fn evaluate(&self, bbox: &BoundBox, warm: &WarmStart, ctx: &NodeContext) -> Result<NodeEval> {
        let mut lmo_calls = 0;
        let Some(start) = bnb::domain_point_counted(self.instance, bbox, &warm.x_ref, &mut lmo_calls)? else {
            return Ok(NodeEval::infeasible(lmo_calls));
        };
        let mut opts = CdOptions {
            tol: ctx.gap_tol,
            iter_cap: ctx.iter_cap,
            prune_bound: ctx.prune_bound,
            deadline: ctx.deadline,
        };
        let mut status = cd_solve(self.instance, bbox, &start.iterate(), &opts)?;
        lmo_calls += status.lmo_calls;
        if bnb::is_integral(&status.x) && status.reason != CdReason::BoundPruned && status.fw_gap > ctx.exact_tol {
            opts.tol = ctx.exact_tol;
            let s = cd_solve(self.instance, bbox, &status.x, &opts)?;
            lmo_calls += s.lmo_calls;
            status = s;
        }
        Ok(NodeEval {
            lower_bound: status.lower_bound(),
            candidates: vec![bbox.round(&status.x)?],
            x: status.x,
            active: None,
            lmo_calls,
            infeasible: false,
        })
    }
}

/// Branch-and-bound with coordinate-exchange node relaxations.
pub fn cobnb_solve(instance: &Instance, params: &BnbParams) -> Result<SolveReport> {
    bnb::run_tree(instance, params, &CdNodes { instance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Criterion;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_argmax(f: impl Fn(f64) -> f64, h: f64) -> f64 {
        let mut best = (0.0, f(0.0));
        for i in 0..=10_000 {
            let t = h * i as f64 / 10_000.0;
            let v = f(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        best.0
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let b = DMatrix::from_fn(n + 2, n, |_, _| rng.random_range(-1.0..1.0));
        let x = b.transpose() * &b + DMatrix::identity(n, n) * 0.1;
        let vj = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let vk = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        (x, vj, vk)
    }

    #[test]
    fn symmetric_a_step_is_rejected() {
        let s = ExchangeStats {
            omega_j: 1.0,
            omega_k: 1.0,
            omega_jk: 0.5,
            zeta_j: 1.0,
            zeta_k: 1.0,
            zeta_jk: 0.1,
        };
        let (a, b, c, _) = s.coefficients();
        assert_eq!((a, c), (0.0, 0.0));
        assert!(b < 0.0);
        assert_eq!(exchange_step_a(&s, 1.0, 1.0), 0.0);
        assert_eq!(exchange_step_a(&s, 0.0, 5.0), 0.0);
    }

    #[test]
    fn a_step_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (x, vj, vk) = random_state(&mut rng, 3);
            let s = ExchangeStats::from_vectors(&x, &vj, &vk).unwrap();
            let h = rng.random_range(0.1..3.0);
            let theta = exchange_step_a(&s, h, h);
            let grid = grid_argmax(|t| s.a_gain(t), s.admissible(h));
            assert!((theta - grid).abs() <= 1e-4 * h.max(1.0), "{theta} vs {grid}");
        }
    }

    #[test]
    fn a_gain_matches_trace_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, vj, vk) = random_state(&mut rng, 3);
        let s = ExchangeStats::from_vectors(&x, &vj, &vk).unwrap();
        let t = 0.3;
        let xp = &x + (&vj * vj.transpose() - &vk * vk.transpose()) * t;
        let before = x.clone().try_inverse().unwrap().trace();
        let after = xp.clone().try_inverse().unwrap().trace();
        assert!((s.a_gain(t) - (before - after)).abs() < 1e-9 * before);
        assert!((s.det_ratio(t) - xp.determinant() / x.determinant()).abs() < 1e-9);
    }

    #[test]
    fn d_step_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let (x, vj, vk) = random_state(&mut rng, 3);
            let s = ExchangeStats::from_vectors(&x, &vj, &vk).unwrap();
            let h = rng.random_range(0.1..3.0);
            let theta = exchange_step_d(&s, h, h);
            let hh = s.admissible(h);
            let gold = golden_max(|t| s.d_gain(t), 0.0, hh);
            let gold = if s.d_gain(gold) > 0.0 { gold } else { 0.0 };
            assert!((theta - gold).abs() <= 1e-4, "{theta} vs {gold}");
        }
        let x = DMatrix::identity(2, 2);
        let v = DVector::from_vec(vec![1.0, 0.0]);
        let s = ExchangeStats::from_vectors(&x, &v, &v).unwrap();
        assert_eq!(exchange_step_d(&s, 1.0, 1.0), 0.0);

        // X = diag(1, 4), move from e2 to e1: optimum at theta = 1.5, capped by headroom 0.5
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let s = ExchangeStats::from_vectors(&x, &e1, &e2).unwrap();
        assert!((exchange_step_d(&s, 5.0, 5.0) - 1.5).abs() < 1e-12);
        assert_eq!(exchange_step_d(&s, 0.5, 5.0), 0.5);
    }

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
    fn cd_converges_on_identity() {
        let inst = identity_instance();
        let bbox = BoundBox::from_instance(&inst);
        let s = cd_solve(&inst, &bbox, &[2.0, 1.0], &CdOptions::new(1e-10, 1000)).unwrap();
        assert!((s.x[0] - 1.5).abs() < 1e-9);
        assert!(s.history.windows(2).all(|w| w[1] < w[0]));

        let s = cd_solve(&inst, &bbox, &[1.5, 1.5], &CdOptions::new(1e-10, 1000)).unwrap();
        assert_eq!(s.exchanges, 0);
        assert_eq!(s.reason, CdReason::GapReached);
    }

    #[test]
    fn cobnb_identity() {
        let inst = identity_instance();
        let r = cobnb_solve(&inst, &BnbParams::exact()).unwrap();
        assert_eq!(r.status, bnb::Status::Optimal);
        assert!((r.objective + 2f64.ln()).abs() < 1e-12);
    }
}

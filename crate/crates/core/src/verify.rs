//! Independent oracles and the property harnesses built on them.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bnb::{self, BnbParams, SolveReport};
use crate::cobnb::{self, ExchangeStats};
use crate::criteria::{self, domain_feasible, Objective};
use crate::error::{OedError, Result};
use crate::frankwolfe::{bpcg, ActiveSet, BpcgOptions, TracePoint};
use crate::function::{SmoothFunction, TwiceDifferentiable};
use crate::instance::{self, Correlation, Criterion, GeneratorSpec, Instance, Variant};
use crate::linalg::{self, Spectral};
use crate::lmo::{BoundBox, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    pub x: Vec<i64>,
    pub value: f64,
    pub points: usize,
    pub feasible: usize,
}

/// Exact minimizer over all domain-feasible integer points.
///
/// Points are visited in lexicographic order and only strict improvements
/// replace the best one, so ties go to the lexicographically smallest point.
pub fn brute_force(instance: &Instance) -> Result<BruteForce> {
    brute_force_with_cap(instance, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_with_cap(instance: &Instance, cap: usize) -> Result<BruteForce> {
    let obj = Objective::new(instance);
    let bbox = BoundBox::from_instance(instance);
    let mut best: Option<(Vec<i64>, f64)> = None;
    let (mut points, mut feasible) = (0, 0);
    for p in bbox.enumerate(cap)? {
        points += 1;
        let xf: Vec<f64> = p.iter().map(|&v| v as f64).collect();
        let Ok(v) = obj.value(&xf) else { continue };
        feasible += 1;
        let better = match &best {
            None => true,
            Some((_, b)) => v < b - 1e-12 * (1.0 + b.abs()),
        };
        if better {
            best = Some((p, v));
        }
    }
    let (x, value) = best.ok_or(OedError::AllInfeasible)?;
    Ok(BruteForce {
        x,
        value,
        points,
        feasible,
    })
}

/// Central-difference check of the gradient (`order = 1`) or Hessian (`order = 2`).
///
/// Returns `max |fd - analytic| / max(1, max |analytic|)`. Probes that leave
/// the domain shrink the step up to four times.
pub fn fd_check<F: TwiceDifferentiable + ?Sized>(f: &F, x: &[f64], order: u8) -> Result<f64> {
    if !(order == 1 || order == 2) {
        return Err(OedError::InvalidSpec(format!("order must be 1 or 2, got {order}")));
    }
    if !f.in_domain(x) {
        return Err(OedError::Domain);
    }
    let m = x.len();
    let mut worst: f64 = 0.0;
    let analytic_scale;
    let mut diffs = Vec::with_capacity(m);
    if order == 1 {
        let g = f.gradient(x)?;
        analytic_scale = g.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        for i in 0..m {
            let (xp, xm, h) = probes(f, x, i)?;
            let d = (f.value(&xp)? - f.value(&xm)?) / (2.0 * h);
            diffs.push((d - g[i]).abs());
        }
    } else {
        let hess = f.hessian(x)?;
        analytic_scale = hess.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        for i in 0..m {
            let (xp, xm, h) = probes(f, x, i)?;
            let gp = f.gradient(&xp)?;
            let gm = f.gradient(&xm)?;
            for j in 0..m {
                let d = (gp[j] - gm[j]) / (2.0 * h);
                diffs.push((d - hess[(j, i)]).abs());
            }
        }
    }
    for d in diffs {
        worst = worst.max(d);
    }
    Ok(worst / analytic_scale)
}

fn probes<F: SmoothFunction + ?Sized>(f: &F, x: &[f64], i: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let mut h = 1e-5 * (1.0 + x[i].abs());
    for _ in 0..5 {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        if f.in_domain(&xp) && f.in_domain(&xm) {
            return Ok((xp, xm, h));
        }
        h *= 0.1;
    }
    Err(OedError::Domain)
}

/// Least-squares slope of `log(gap)` against the iteration over the final 70%
/// of the points with positive gap.
pub fn slope_fit(trace: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(_, g)| *g > 0.0 && g.is_finite())
        .map(|&(t, g)| (t, g.ln()))
        .collect();
    if pts.len() < 20 {
        return Err(OedError::Oracle(format!(
            "slope fit needs at least 20 positive gaps, got {}",
            pts.len()
        )));
    }
    let tail = &pts[(pts.len() as f64 * 0.3).floor() as usize..];
    let n = tail.len() as f64;
    let mt = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let mg = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mt) * (p.1 - mg)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if sxx <= 0.0 {
        return Err(OedError::Oracle("slope fit needs distinct iterations".into()));
    }
    Ok(sxy / sxx)
}

/// Small instance for enumeration oracles: `m` in [5, 9], `n` in [2, 3],
/// `N` in [n, n + 3], `u_i` in [1, 3].
pub fn tiny_instance(seed: u64, variant: Variant, criterion: Criterion) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(5..=9usize);
    let n = rng.random_range(2..=3usize);
    let budget = rng.random_range(n as i64..=n as i64 + 3);
    let mut upper: Vec<i64>;
    loop {
        upper = (0..m).map(|_| rng.random_range(1..=3)).collect();
        if upper.iter().sum::<i64>() >= budget {
            break;
        }
    }
    let a = instance::draw_rows(&mut rng, m, n, None);
    let fusion = match variant {
        Variant::Optimal => None,
        Variant::Fusion => {
            let b = instance::draw_rows(&mut rng, n + 2, n, None);
            let gram = b.transpose() * &b;
            let ridge = 1e-6 * gram.trace() / n as f64;
            Some(linalg::symmetrize(&(gram + DMatrix::identity(n, n) * ridge)))
        }
    };
    Instance {
        m,
        n,
        budget,
        a,
        lower: vec![0; m],
        upper,
        fusion,
        criterion,
    }
}

/// The four criteria of the oracle suite.
pub fn oracle_criteria() -> Vec<Criterion> {
    vec![
        Criterion::d_opt(),
        Criterion::a_opt(),
        Criterion::log_a_opt(),
        Criterion::gti(0.5).expect("positive exponent"),
    ]
}

/// A random point of the polytope with maximal support.
pub fn random_point(bbox: &BoundBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let center = bbox.center();
    let mut x: Vec<f64> = center.iter().map(|c| 0.5 * c).collect();
    let weights: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let d: Vec<f64> = (0..bbox.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let v = bbox.lmo(&d).expect("feasible box");
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += 0.5 * w / total * vi as f64;
        }
    }
    x
}

fn random_vertex(bbox: &BoundBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d: Vec<f64> = (0..bbox.dim()).map(|_| rng.sample(StandardNormal)).collect();
    bbox.lmo(&d).expect("feasible box").iter().map(|&v| v as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// One line of the verification report. A check passes iff `worst_case <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_name: String,
    pub status: CheckStatus,
    pub worst_case: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, worst_case: f64, tolerance: f64) -> Self {
        let status = if worst_case <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckResult {
            check_name: name.into(),
            status,
            worst_case,
            tolerance,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64) -> Self {
        CheckResult {
            check_name: name.into(),
            status: CheckStatus::Fail,
            worst_case: f64::INFINITY,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

fn all_criteria() -> Vec<Criterion> {
    let mut c = oracle_criteria();
    c.push(Criterion::log_gti(0.5).expect("positive exponent"));
    c.push(Criterion::gti(2.0).expect("positive exponent"));
    c
}

fn small_instance(rng: &mut ChaCha8Rng, variant: Variant) -> Instance {
    let m = rng.random_range(6..=15usize);
    let n = rng.random_range(2..=4usize);
    let corr = if rng.random_bool(0.5) {
        Correlation::Correlated
    } else {
        Correlation::Independent
    };
    instance::generate(&GeneratorSpec::new(m, n, variant, corr, rng.random())).expect("valid generator spec")
}

/// Finite-difference checks of gradients and Hessians at random interior points.
pub fn derivative_check(seed: u64, points_per_criterion: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst1, mut worst2): (f64, f64) = (0.0, 0.0);
    for criterion in all_criteria() {
        for k in 0..points_per_criterion {
            let variant = if k % 2 == 0 { Variant::Optimal } else { Variant::Fusion };
            let inst = small_instance(&mut rng, variant).with_criterion(criterion);
            let x = random_point(&BoundBox::from_instance(&inst), &mut rng);
            let obj = Objective::new(&inst);
            worst1 = worst1.max(fd_check(&obj, &x, 1).unwrap_or(f64::INFINITY));
            worst2 = worst2.max(fd_check(&obj, &x, 2).unwrap_or(f64::INFINITY));
        }
    }
    vec![
        CheckResult::new("fd_gradient", worst1, 1e-5),
        CheckResult::new("fd_hessian", worst2, 1e-5),
    ]
}

/// Largest Hessian eigenvalue against the global fusion smoothness constants.
pub fn lipschitz_check(seed: u64, instances: usize, points: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [f64::NEG_INFINITY; 3];
    for _ in 0..instances {
        let m = rng.random_range(10..=30usize);
        let n = rng.random_range(2..=6usize);
        let corr = if rng.random_bool(0.5) {
            Correlation::Correlated
        } else {
            Correlation::Independent
        };
        let inst = instance::generate(&GeneratorSpec::new(m, n, Variant::Fusion, corr, rng.random()))
            .expect("valid generator spec");
        let p = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let k = match criteria::fusion_constants(&inst, p) {
            Ok(k) => k,
            Err(_) => return vec![CheckResult::failed("lipschitz_fusion", 1e-8)],
        };
        let bbox = BoundBox::from_instance(&inst);
        let objectives = [
            (Criterion::d_opt(), k.l_f),
            (Criterion::gti(p).expect("positive exponent"), k.l_g),
            (Criterion::log_gti(p).expect("positive exponent"), k.l_k),
        ];
        for _ in 0..points {
            let x = if rng.random_bool(0.5) {
                random_vertex(&bbox, &mut rng)
            } else {
                random_point(&bbox, &mut rng)
            };
            for (slot, (criterion, bound)) in objectives.iter().enumerate() {
                let h = Objective::with_criterion(&inst, *criterion)
                    .hessian(&x)
                    .expect("fusion domain is everything");
                let lmax = linalg::max_eigenvalue(&h);
                worst[slot] = worst[slot].max(lmax - bound);
            }
        }
    }
    vec![
        CheckResult::new("lipschitz_logdet", worst[0], 1e-8),
        CheckResult::new("lipschitz_trace_power", worst[1], 1e-8),
        CheckResult::new("lipschitz_log_trace", worst[2], 1e-8),
    ]
}

/// Violations of `lambda_max(X(x)) <= eig_bound` (and of the trace bound) over sampled points.
pub fn eig_bound_check(seed: u64, samples: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_instance = 20;
    let (mut closed_form, mut trace_bound) = (0usize, 0usize);
    let mut drawn = 0;
    while drawn < samples {
        let m = rng.random_range(20..=60usize);
        let n = rng.random_range((m / 10).max(2)..=m / 4);
        let variant = if rng.random_bool(0.5) { Variant::Optimal } else { Variant::Fusion };
        let corr = if rng.random_bool(0.5) {
            Correlation::Correlated
        } else {
            Correlation::Independent
        };
        let mut inst =
            instance::generate(&GeneratorSpec::new(m, n, variant, corr, rng.random())).expect("valid generator spec");
        inst.fusion = None;
        let bound = criteria::eig_bound(&inst);
        let tb = criteria::trace_eig_bound(&inst).expect("feasible instance");
        let bbox = BoundBox::from_instance(&inst);
        for _ in 0..per_instance.min(samples - drawn) {
            let x = if rng.random_bool(0.5) {
                random_vertex(&bbox, &mut rng)
            } else {
                random_point(&bbox, &mut rng)
            };
            let lmax = linalg::max_eigenvalue(&criteria::information(&inst, &x).expect("dimension"));
            if lmax > bound * (1.0 + 1e-12) {
                closed_form += 1;
            }
            if lmax > tb * (1.0 + 1e-12) {
                trace_bound += 1;
            }
            drawn += 1;
        }
    }
    vec![
        CheckResult::new("eig_bound_violations", closed_form as f64, 0.0),
        CheckResult::new("trace_eig_bound_violations", trace_bound as f64, 0.0),
    ]
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let d = DVector::from_fn(n, |_, _| rng.random_range(lo..=hi));
    linalg::symmetrize(&(&q * DMatrix::from_diagonal(&d) * q.transpose()))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&g + g.transpose()) * 0.5
}

/// Worst ratio `|h'''| / (M h''^{3/2})` of the self-concordance inequality per exponent.
pub fn gsc_check(seed: u64, samples: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&p| {
            let mut worst: f64 = 0.0;
            for _ in 0..samples {
                let n = rng.random_range(2..=6usize);
                let alpha = rng.random_range(0.5..10.0);
                let v = random_spd(&mut rng, n, 0.02 * alpha, alpha);
                let u = random_symmetric(&mut rng, n);
                let w = criteria::gsc_witness(p, &v, &u, alpha).expect("positive definite V");
                if w.rhs > 0.0 {
                    worst = worst.max(w.lhs / w.rhs);
                } else if w.lhs > 0.0 {
                    worst = f64::INFINITY;
                }
            }
            CheckResult::new(format!("gsc_p{p}"), worst, 1.0)
        })
        .collect()
}

/// Directional curvature against the strong-convexity floors with unit-norm directions.
pub fn strong_convexity_check(seed: u64, samples: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [f64::NEG_INFINITY; 3];
    for _ in 0..samples {
        let n = rng.random_range(2..=6usize);
        let alpha = rng.random_range(0.5..10.0);
        let a = random_spd(&mut rng, n, 0.05 * alpha, alpha);
        let mut b = random_symmetric(&mut rng, n);
        b /= b.norm();
        let p = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let s = Spectral::new(&a);
        let kappa = s.max() / s.min();
        let pairs = [
            (
                criteria::logdet_curvature(&a, &b).expect("pd"),
                criteria::logdet_curvature_floor(alpha),
            ),
            (
                criteria::trace_power_curvature(&a, &b, p).expect("pd"),
                criteria::trace_power_curvature_floor(alpha, p),
            ),
            (
                criteria::log_trace_curvature(&a, &b, p).expect("pd"),
                criteria::log_trace_curvature_floor(n, alpha, kappa, p),
            ),
        ];
        for (slot, (curv, floor)) in pairs.iter().enumerate() {
            worst[slot] = worst[slot].max(floor - curv);
        }
    }
    vec![
        CheckResult::new("strong_convexity_logdet", worst[0], 1e-9),
        CheckResult::new("strong_convexity_trace_power", worst[1], 1e-9),
        CheckResult::new("strong_convexity_log_trace", worst[2], 1e-9),
    ]
}

/// Greedy LMO against exhaustive enumeration on random small boxes.
pub fn lmo_check(seed: u64, trials: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..trials {
        let m = rng.random_range(1..=8usize);
        let lower: Vec<i64> = (0..m).map(|_| rng.random_range(0..=2)).collect();
        let upper: Vec<i64> = lower.iter().map(|l| l + rng.random_range(0..=3)).collect();
        let budget = rng.random_range(lower.iter().sum::<i64>()..=upper.iter().sum::<i64>());
        let bbox = BoundBox::new(lower, upper, budget).expect("feasible by construction");
        let d: Vec<f64> = (0..m)
            .map(|_| {
                if rng.random_bool(0.2) {
                    rng.random_range(-2..=2) as f64
                } else {
                    rng.sample(StandardNormal)
                }
            })
            .collect();
        let value = |x: &[i64]| x.iter().zip(&d).map(|(&a, b)| a as f64 * b).sum::<f64>();
        let greedy = bbox.lmo(&d).expect("feasible box");
        if !bbox.contains_integer(&greedy) {
            return vec![CheckResult::failed("lmo_exactness", 1e-12)];
        }
        let g = value(&greedy);
        let best = bbox
            .enumerate(DEFAULT_ENUMERATION_CAP)
            .expect("small box")
            .map(|p| value(&p))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(g - best);
    }
    vec![CheckResult::new("lmo_exactness", worst, 1e-12)]
}

/// Root relaxation of a fusion D-criterion instance, with its dual-gap trace.
pub fn root_trace(instance: &Instance, gap_tol: f64, iter_cap: usize) -> Result<Vec<TracePoint>> {
    let x0 = bnb::start_point(instance, 1)?;
    let obj = Objective::new(instance);
    let bbox = BoundBox::from_instance(instance);
    let mut rows = Vec::new();
    let mut sink = |p: TracePoint| rows.push(p);
    let opts = BpcgOptions {
        gap_tol,
        iter_cap,
        trace: Some(&mut sink),
        ..Default::default()
    };
    bpcg(&obj, &bbox, ActiveSet::singleton(x0), opts)?;
    Ok(rows)
}

/// Log-slope of the BPCG dual gap on a fusion D-criterion root node (m = 40, n = 10).
pub fn fw_convergence_check(seed: u64) -> Vec<CheckResult> {
    let spec = GeneratorSpec::new(40, 10, Variant::Fusion, Correlation::Independent, seed);
    let slope = instance::generate(&spec)
        .and_then(|inst| root_trace(&inst, 1e-12, 5_000))
        .and_then(|rows| {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.iteration as f64, r.dual_gap)).collect();
            slope_fit(&pts)
        })
        .unwrap_or(f64::INFINITY);
    vec![CheckResult::new("fw_gap_slope", slope, -1e-3)]
}

/// The FW dual gap at any iterate bounds its primal gap from above.
pub fn fw_gap_check(seed: u64, count: usize) -> Vec<CheckResult> {
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..count as u64 {
        let criterion = oracle_criteria()[(i % 4) as usize];
        let variant = if i % 2 == 0 { Variant::Fusion } else { Variant::Optimal };
        let inst = tiny_instance(seed.wrapping_add(i), variant, criterion);
        let obj = Objective::new(&inst);
        let bbox = BoundBox::from_instance(&inst);
        let Ok(x0) = bnb::start_point(&inst, 1) else { continue };
        let mut rows = Vec::new();
        let mut sink = |p: TracePoint| rows.push(p);
        let opts = BpcgOptions {
            gap_tol: 1e-11,
            iter_cap: 20_000,
            trace: Some(&mut sink),
            ..Default::default()
        };
        let Ok((status, _)) = bpcg(&obj, &bbox, ActiveSet::singleton(x0), opts) else {
            worst = f64::INFINITY;
            continue;
        };
        // f* lies in [lower_bound, best primal]; the best primal only
        // flags violations that hold for every f* in that bracket
        let fstar = rows.iter().map(|r| r.primal).fold(status.primal, f64::min);
        for r in &rows {
            worst = worst.max((r.primal - fstar) - r.dual_gap);
        }
    }
    vec![CheckResult::new("fw_gap_bounds_primal_gap", worst, 1e-9)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Boscia,
    Cobnb,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Boscia => "boscia",
            SolverKind::Cobnb => "cobnb",
        }
    }

    pub fn solve(self, instance: &Instance, params: &BnbParams) -> Result<SolveReport> {
        match self {
            SolverKind::Boscia => bnb::solve(instance, params),
            SolverKind::Cobnb => cobnb::cobnb_solve(instance, params),
        }
    }
}

/// Largest soundness violation of a recorded solve; zero means sound.
///
/// Checks: nondecreasing trace lower bound, nonincreasing incumbent, every
/// incumbent integral, in the box, on budget and domain-feasible, and
/// `lower_bound <= objective`.
pub fn soundness_violation(instance: &Instance, report: &SolveReport) -> f64 {
    let bbox = BoundBox::from_instance(instance);
    let mut worst: f64 = 0.0;
    for w in report.trace.windows(2) {
        worst = worst.max(w[0].lower_bound - w[1].lower_bound);
        worst = worst.max(w[1].incumbent - w[0].incumbent);
    }
    for w in report.improvements.windows(2) {
        worst = worst.max(w[1].objective - w[0].objective);
    }
    for imp in &report.improvements {
        let xf: Vec<f64> = imp.x.iter().map(|&v| v as f64).collect();
        if !bbox.contains_integer(&imp.x) || !domain_feasible(instance, &xf) {
            return f64::INFINITY;
        }
    }
    if report.objective.is_finite() {
        worst = worst.max(report.lower_bound - report.objective - 1e-9);
    }
    worst
}

/// Outcome of the enumeration-oracle comparison for one solver.
#[derive(Debug, Clone)]
pub struct OracleSummary {
    pub solver: SolverKind,
    pub worst_rel_error: f64,
    pub worst_soundness: f64,
    pub solves: usize,
    pub nodes: usize,
    pub elapsed: Duration,
}

impl OracleSummary {
    pub fn results(&self) -> Vec<CheckResult> {
        vec![
            CheckResult::new(format!("oracle_{}", self.solver.name()), self.worst_rel_error, 1e-6),
            CheckResult::new(format!("soundness_{}", self.solver.name()), self.worst_soundness, 1e-9),
        ]
    }
}

/// Tolerances used for solver-versus-enumeration comparisons.
pub fn oracle_params() -> BnbParams {
    BnbParams {
        abs_tol: 1e-8,
        rel_tol: 1e-9,
        gap_tol_final: 1e-9,
        record_trace: true,
        ..Default::default()
    }
}

/// Solves `count` tiny instances per (criterion, variant) and compares with [`brute_force`].
pub fn oracle_check(seed: u64, count: usize, solver: SolverKind) -> OracleSummary {
    let start = Instant::now();
    let params = oracle_params();
    let mut worst: f64 = 0.0;
    let mut worst_sound: f64 = 0.0;
    let (mut solves, mut nodes) = (0, 0);
    for criterion in oracle_criteria() {
        for variant in [Variant::Optimal, Variant::Fusion] {
            for i in 0..count as u64 {
                let inst = tiny_instance(seed.wrapping_add(i), variant, criterion);
                let Ok(oracle) = brute_force(&inst) else {
                    worst = f64::INFINITY;
                    continue;
                };
                solves += 1;
                match solver.solve(&inst, &params) {
                    Ok(r) => {
                        nodes += r.nodes;
                        let err = (r.objective - oracle.value).abs() / oracle.value.abs().max(1.0);
                        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
                        worst_sound = worst_sound.max(soundness_violation(&inst, &r));
                    }
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
    }
    OracleSummary {
        solver,
        worst_rel_error: worst,
        worst_soundness: worst_sound,
        solves,
        nodes,
        elapsed: start.elapsed(),
    }
}

fn grid_then_golden(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let steps = 10_000;
    let mut best = (0usize, f(0.0));
    for i in 1..=steps {
        let v = f(h * i as f64 / steps as f64);
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = h * best.0.saturating_sub(1) as f64 / steps as f64;
    let hi = h * (best.0 + 1).min(steps) as f64 / steps as f64;
    let t = cobnb::golden_max(&f, lo, hi);
    let candidates = [h * best.0 as f64 / steps as f64, t];
    let t = candidates
        .into_iter()
        .fold((0.0, f(0.0)), |acc, c| if f(c) > acc.1 { (c, f(c)) } else { acc });
    t.0
}

/// Closed-form exchange steps against numerical maximization of the gain.
pub fn step_check(seed: u64, states: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_a, mut worst_d): (f64, f64) = (0.0, 0.0);
    for _ in 0..states {
        let n = rng.random_range(2..=4usize);
        let b = DMatrix::from_fn(n + 2, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = b.transpose() * &b + DMatrix::identity(n, n) * 0.05;
        let vj = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let vk = if rng.random_bool(0.5) {
            // make the removed experiment carry real weight in X
            b.row(rng.random_range(0..n + 2)).transpose()
        } else {
            DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
        };
        let Ok(s) = ExchangeStats::from_vectors(&x, &vj, &vk) else { continue };
        let hj: f64 = rng.random_range(0.05..3.0);
        let hk: f64 = rng.random_range(0.05..3.0);
        let h = hj.min(hk);
        for slot in 0..2 {
            let f = |t: f64| if slot == 0 { s.a_gain(t) } else { s.d_gain(t) };
            let theta = if slot == 0 {
                cobnb::exchange_step_a(&s, hj, hk)
            } else {
                cobnb::exchange_step_d(&s, hj, hk)
            };
            let reference = grid_then_golden(f, h);
            let reference = if f(reference) > 0.0 { reference } else { 0.0 };
            let tie = f(theta) >= f(reference) - 1e-12 * (1.0 + f(reference).abs());
            let err = if tie { 0.0 } else { (theta - reference).abs() };
            if slot == 0 {
                worst_a = worst_a.max(err);
            } else {
                worst_d = worst_d.max(err);
            }
        }
    }
    vec![
        CheckResult::new("exchange_step_a", worst_a, 1e-4),
        CheckResult::new("exchange_step_d", worst_d, 1e-4),
    ]
}

/// Aggregate node counts of both solvers on correlated D-criterion instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeComparison {
    pub instances: usize,
    pub boscia_nodes: usize,
    pub cobnb_nodes: usize,
}

pub fn node_comparison(seed: u64, instances: usize, m: usize) -> Result<NodeComparison> {
    let params = BnbParams {
        time_limit: Some(30.0),
        ..Default::default()
    };
    let mut out = NodeComparison {
        instances,
        boscia_nodes: 0,
        cobnb_nodes: 0,
    };
    for i in 0..instances as u64 {
        let n = (m / 4).max(2);
        let inst = instance::generate(&GeneratorSpec::new(
            m,
            n,
            Variant::Optimal,
            Correlation::Correlated,
            seed.wrapping_add(i),
        ))?;
        out.boscia_nodes += bnb::solve(&inst, &params)?.nodes;
        out.cobnb_nodes += cobnb::cobnb_solve(&inst, &params)?.nodes;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    All,
    Criteria,
    Lmo,
    Fw,
    Bnb,
    Cobnb,
}

impl std::str::FromStr for Suite {
    type Err = OedError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "criteria" => Suite::Criteria,
            "lmo" => Suite::Lmo,
            "fw" => Suite::Fw,
            "bnb" => Suite::Bnb,
            "cobnb" => Suite::Cobnb,
            other => return Err(OedError::InvalidSpec(format!("unknown suite {other:?}"))),
        })
    }
}

/// Runs a suite with its default sample sizes.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let wants = |s: Suite| suite == Suite::All || suite == s;
    if wants(Suite::Criteria) {
        out.extend(derivative_check(seed, 100));
        out.extend(lipschitz_check(seed, 20, 50));
        out.extend(eig_bound_check(seed, 1000));
        out.extend(gsc_check(seed, 200));
        out.extend(strong_convexity_check(seed, 200));
    }
    if wants(Suite::Lmo) {
        out.extend(lmo_check(seed, 1000));
    }
    if wants(Suite::Fw) {
        out.extend(fw_convergence_check(seed));
        out.extend(fw_gap_check(seed, 40));
    }
    if wants(Suite::Bnb) {
        out.extend(oracle_check(seed, 50, SolverKind::Boscia).results());
    }
    if wants(Suite::Cobnb) {
        out.extend(step_check(seed, 200));
        out.extend(oracle_check(seed, 50, SolverKind::Cobnb).results());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(budget: i64) -> Instance {
        Instance {
            m: 2,
            n: 2,
            budget,
            a: DMatrix::identity(2, 2),
            lower: vec![0, 0],
            upper: vec![2, 2],
            fusion: None,
            criterion: Criterion::d_opt(),
        }
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force(&identity(2)).unwrap();
        assert_eq!(r.x, vec![1, 1]);
        assert_eq!(r.value, 0.0);
        let r = brute_force(&identity(3)).unwrap();
        assert_eq!(r.x, vec![1, 2]);
        assert!((r.value + 2f64.ln()).abs() < 1e-15);
        let mut single = identity(1);
        single.upper = vec![1, 1];
        assert!(matches!(brute_force(&single), Err(OedError::AllInfeasible)));
    }

    #[test]
    fn slope_of_exact_exponential() {
        let pts: Vec<(f64, f64)> = (0..100).map(|t| (t as f64, (-0.01 * t as f64).exp())).collect();
        assert!((slope_fit(&pts).unwrap() + 0.01).abs() < 1e-6);
        let pts: Vec<(f64, f64)> = (100..=1000).map(|t| (t as f64, 1.0 / t as f64)).collect();
        let s = slope_fit(&pts).unwrap();
        assert!((-0.005..0.0).contains(&s));
        assert!(slope_fit(&pts[..10]).is_err());
    }

    #[test]
    fn fd_on_diagonal_example() {
        let mut inst = identity(3);
        inst.upper = vec![3, 3];
        let obj = Objective::new(&inst);
        assert!(fd_check(&obj, &[1.0, 2.0], 1).unwrap() <= 1e-7);
        assert!(fd_check(&obj, &[1.0, 2.0], 2).unwrap() <= 1e-7);
        assert!(fd_check(&obj, &[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn tiny_instances_respect_ranges() {
        for seed in 0..30 {
            let inst = tiny_instance(seed, Variant::Optimal, Criterion::d_opt());
            assert!((5..=9).contains(&inst.m));
            assert!((2..=3).contains(&inst.n));
            assert!(inst.budget >= inst.n as i64 && inst.budget <= inst.n as i64 + 3);
            assert!(inst.upper.iter().all(|u| (1..=3).contains(u)));
            assert!(inst.upper.iter().sum::<i64>() >= inst.budget);
            assert!(inst.validate().is_empty());
        }
    }
}

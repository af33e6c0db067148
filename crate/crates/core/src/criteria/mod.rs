//! Information matrices and the D-, A- and generalized-trace criteria.
//!
//! For a design `x` the information matrix is `X(x) = A^T diag(x) A`, plus the
//! fixed matrix `C` for fusion instances. The criteria are
//!
//! * D:   `-log det X`
//! * GTI: `Tr(X^-p)` (the A-criterion is `p = 1`)
//! * log-GTI: `log Tr(X^-p)`
//!
//! and are only defined where `X` is positive definite.

mod constants;

pub use constants::{
    eig_bound, fusion_constants, gsc_witness, local_constants, log_trace_curvature,
    log_trace_curvature_floor, logdet_curvature, logdet_curvature_floor, trace_eig_bound,
    trace_power_curvature, trace_power_curvature_floor, FusionConstants, GscWitness,
    LocalConstants,
};

use nalgebra::DMatrix;

use crate::error::{OedError, Result};
use crate::function::{check_len, SmoothFunction, TwiceDifferentiable};
use crate::instance::{Criterion, CriterionKind, Instance};
use crate::linalg::{self, Spectral};

/// `X(x)` together with its Cholesky factor when it is positive definite.
#[derive(Debug, Clone)]
pub struct InfoMatrix {
    pub matrix: DMatrix<f64>,
    pub chol: Option<DMatrix<f64>>,
    pub is_pd: bool,
}

/// `A^T diag(x) A (+ C)` without the definiteness check.
pub fn information(instance: &Instance, x: &[f64]) -> Result<DMatrix<f64>> {
    check_len(x, instance.m)?;
    let n = instance.n;
    let mut out = match &instance.fusion {
        Some(c) => c.clone(),
        None => DMatrix::zeros(n, n),
    };
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let v = instance.a.row(i);
        for j in 0..n {
            let s = xi * v[j];
            if s == 0.0 {
                continue;
            }
            for k in j..n {
                out[(j, k)] += s * v[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            out[(j, k)] = out[(k, j)];
        }
    }
    Ok(out)
}

pub fn info_matrix(instance: &Instance, x: &[f64]) -> Result<InfoMatrix> {
    let matrix = information(instance, x)?;
    let chol = linalg::cholesky_pd(&matrix);
    Ok(InfoMatrix {
        is_pd: chol.is_some(),
        chol,
        matrix,
    })
}

/// Domain oracle: is `X(x)` positive definite?
pub fn domain_feasible(instance: &Instance, x: &[f64]) -> bool {
    match information(instance, x) {
        Ok(m) => linalg::is_positive_definite(&m),
        Err(_) => false,
    }
}

/// A criterion bound to an instance.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub instance: &'a Instance,
    pub criterion: Criterion,
}

struct Eval {
    spectral: Spectral,
    /// `A Q`, rows are the experiment vectors in the eigenbasis.
    rotated: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Objective {
            instance,
            criterion: instance.criterion,
        }
    }

    pub fn with_criterion(instance: &'a Instance, criterion: Criterion) -> Self {
        Objective { instance, criterion }
    }

    fn prepare(&self, x: &[f64], rotate: bool) -> Result<Eval> {
        let info = info_matrix(self.instance, x)?;
        let chol = info.chol.ok_or(OedError::Domain)?;
        let spectral = Spectral::new(&info.matrix);
        if !(spectral.min() > 0.0) {
            return Err(OedError::Domain);
        }
        let rotated = if rotate {
            &self.instance.a * &spectral.vectors
        } else {
            DMatrix::zeros(0, 0)
        };
        Ok(Eval {
            spectral,
            rotated,
            chol,
        })
    }

    fn value_from(&self, e: &Eval) -> f64 {
        match self.criterion.kind {
            CriterionKind::DOpt => -2.0 * e.chol.diagonal().iter().map(|d| d.ln()).sum::<f64>(),
            kind => {
                let t = e.spectral.trace_power(-self.criterion.p);
                if kind.is_log() {
                    t.ln()
                } else {
                    t
                }
            }
        }
    }

    fn gradient_from(&self, e: &Eval) -> Vec<f64> {
        let lambda = &e.spectral.values;
        let b = &e.rotated;
        let (weights, scale): (Vec<f64>, f64) = match self.criterion.kind {
            CriterionKind::DOpt => (lambda.iter().map(|l| 1.0 / l).collect(), -1.0),
            kind => {
                let p = self.criterion.p;
                let w = lambda.iter().map(|l| l.powf(-p - 1.0)).collect();
                let mut s = -p;
                if kind.is_log() {
                    s /= e.spectral.trace_power(-p);
                }
                (w, s)
            }
        };
        (0..self.instance.m)
            .map(|i| {
                let q: f64 = (0..weights.len()).map(|a| weights[a] * b[(i, a)] * b[(i, a)]).sum();
                scale * q
            })
            .collect()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let e = self.prepare(x, false)?;
        Ok(self.value_from(&e))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let e = self.prepare(x, true)?;
        Ok(self.gradient_from(&e))
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let e = self.prepare(x, true)?;
        Ok((self.value_from(&e), self.gradient_from(&e)))
    }

    /// Exact Hessian in `x`.
    ///
    /// With `X = Q diag(lambda) Q^T` and `B = A Q`, the second derivative of
    /// `Tr phi(X)` along rank-one directions is
    /// `H_ij = sum_ab phi'[lambda_a, lambda_b] (B_ia B_ib)(B_ja B_jb)` where
    /// `phi'[.,.]` is the first divided difference of `phi'`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let e = self.prepare(x, true)?;
        let m = self.instance.m;
        let n = self.instance.n;
        let lambda = &e.spectral.values;
        let b = &e.rotated;
        match self.criterion.kind {
            CriterionKind::DOpt => {
                let mut scaled = b.clone();
                for a in 0..n {
                    scaled.column_mut(a).scale_mut(1.0 / lambda[a]);
                }
                let mx = &scaled * b.transpose();
                Ok(mx.component_mul(&mx))
            }
            kind => {
                let p = self.criterion.p;
                let dphi = |l: f64| -p * l.powf(-p - 1.0);
                let d2phi = |l: f64| p * (p + 1.0) * l.powf(-p - 2.0);
                let mut h = DMatrix::<f64>::zeros(m, m);
                let mut w = vec![0.0; m];
                for a in 0..n {
                    for c in a..n {
                        let (la, lc) = (lambda[a], lambda[c]);
                        let psi = if (la - lc).abs() <= 1e-8 * la.max(lc) {
                            d2phi(0.5 * (la + lc))
                        } else {
                            (dphi(la) - dphi(lc)) / (la - lc)
                        };
                        let coef = if a == c { psi } else { 2.0 * psi };
                        for i in 0..m {
                            w[i] = b[(i, a)] * b[(i, c)];
                        }
                        for i in 0..m {
                            let wi = coef * w[i];
                            if wi == 0.0 {
                                continue;
                            }
                            for j in i..m {
                                h[(i, j)] += wi * w[j];
                            }
                        }
                    }
                }
                for i in 0..m {
                    for j in 0..i {
                        h[(i, j)] = h[(j, i)];
                    }
                }
                if kind.is_log() {
                    let t = e.spectral.trace_power(-p);
                    let g = Objective {
                        instance: self.instance,
                        criterion: Criterion { kind: CriterionKind::GTIOpt, p },
                    }
                    .gradient_from(&e);
                    for i in 0..m {
                        for j in 0..m {
                            h[(i, j)] = h[(i, j)] / t - g[i] * g[j] / (t * t);
                        }
                    }
                }
                Ok(h)
            }
        }
    }
}

impl SmoothFunction for Objective<'_> {
    fn dim(&self) -> usize {
        self.instance.m
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        domain_feasible(self.instance, x)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Objective::value(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Objective::gradient(self, x)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Objective::value_and_gradient(self, x)
    }
}

impl TwiceDifferentiable for Objective<'_> {
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Objective::hessian(self, x)
    }
}

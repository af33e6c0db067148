//! Smoothness, eigenvalue, self-concordance and curvature constants.

use nalgebra::DMatrix;

use crate::error::{OedError, Result};
use crate::instance::Instance;
use crate::linalg::{self, Spectral};
use crate::lmo::BoundBox;

fn max_row_norm_sq(instance: &Instance) -> f64 {
    (0..instance.m)
        .map(|i| instance.a.row(i).norm_squared())
        .fold(0.0, f64::max)
}

/// `max_i u_i * max_j ||v_j||^2`.
///
/// This is the closed-form eigenvalue bound used by the self-concordance and
/// smoothness constants. It holds for typical data but can fail when many
/// nearly collinear rows share the budget; [`trace_eig_bound`] is always valid.
pub fn eig_bound(instance: &Instance) -> f64 {
    let umax = instance.upper.iter().copied().max().unwrap_or(0) as f64;
    umax * max_row_norm_sq(instance)
}

/// `max_{x in P} sum_i x_i ||v_i||^2`, an upper bound on `Tr X(x)` and hence
/// on `lambda_max(X(x))` for every feasible `x`.
pub fn trace_eig_bound(instance: &Instance) -> Result<f64> {
    let bbox = BoundBox::from_instance(instance);
    let neg_norms: Vec<f64> = (0..instance.m)
        .map(|i| -instance.a.row(i).norm_squared())
        .collect();
    let v = bbox.lmo(&neg_norms)?;
    Ok(v.iter().zip(&neg_norms).map(|(&x, d)| -(x as f64) * d).sum())
}

/// Global smoothness constants of the fusion objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConstants {
    pub l_f: f64,
    pub l_g: f64,
    pub l_k: f64,
    pub a_c: f64,
}

pub fn fusion_constants(instance: &Instance, p: f64) -> Result<FusionConstants> {
    let c = instance
        .fusion
        .as_ref()
        .ok_or_else(|| OedError::Unsupported("fusion constants need a fusion instance".into()))?;
    if !(p > 0.0) {
        return Err(OedError::InvalidSpec(format!("p = {p} must be positive")));
    }
    let spec_c = Spectral::new(c);
    let lmin = spec_c.min();
    let lmax = spec_c.max();
    let diag = max_row_norm_sq(instance);
    let norm_a = linalg::spectral_norm(&instance.a);
    let l_f = diag * norm_a * norm_a / (lmin * lmin);
    let l_g = p * (p + 1.0) * diag * norm_a * norm_a / lmin.powf(2.0 + p);
    let a_c = lmax + eig_bound(instance);
    let l_k = a_c.powf(p) / instance.n as f64 * l_g;
    Ok(FusionConstants { l_f, l_g, l_k, a_c })
}

/// Local smoothness constants on the sublevel set of a start point `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalConstants {
    pub l_f: f64,
    pub l_g: f64,
    pub l_k: f64,
}

pub fn local_constants(instance: &Instance, p: f64, x0: &[f64]) -> Result<LocalConstants> {
    let info = super::info_matrix(instance, x0)?;
    if !info.is_pd {
        return Err(OedError::Domain);
    }
    let n = instance.n as f64;
    let m = instance.m as f64;
    let budget = instance.budget as f64;
    let diag = max_row_norm_sq(instance);
    let norm_a = linalg::spectral_norm(&instance.a);
    let det0 = info
        .chol
        .as_ref()
        .map(|l| l.diagonal().iter().map(|d| d * d).product::<f64>())
        .unwrap_or(0.0);
    let trace_ratio = (m * budget * diag).powf(n - 1.0) / (n - 1.0).powf(n - 1.0);
    let l_f = diag * norm_a * norm_a * trace_ratio / (det0 * det0);
    let tr_inv = Spectral::new(&info.matrix).trace_power(-1.0);
    let l_g = p * (p + 1.0) * diag * norm_a * norm_a * tr_inv.powf(2.0 + p);
    let l_k = eig_bound(instance).powf(p) / n * l_g;
    Ok(LocalConstants { l_f, l_g, l_k })
}

/// Both sides of the self-concordance inequality `|h'''(0)| <= M h''(0)^{3/2}`
/// for `h(t) = Tr((V + tU)^-p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GscWitness {
    pub second: f64,
    pub third: f64,
    pub constant: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl GscWitness {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

pub fn gsc_witness(p: f64, v: &DMatrix<f64>, u: &DMatrix<f64>, alpha: f64) -> Result<GscWitness> {
    let n = v.nrows();
    if !linalg::is_positive_definite(v) {
        return Err(OedError::Domain);
    }
    let s = Spectral::new(v);
    let vp = s.power(-p);
    let vinv = s.power(-1.0);
    let uv = u * &vinv;
    let two = &vp * &uv * &uv;
    let three = &two * &uv;
    let second = p * (p + 1.0) * two.trace();
    let third = -p * (p + 1.0) * (p + 2.0) * three.trace();
    let constant = (p + 2.0) * (alpha.powf(2.0 * p) * n as f64).powf(0.25) / (p * (p + 1.0)).sqrt();
    let lhs = third.abs();
    let rhs = constant * second.max(0.0).powf(1.5);
    Ok(GscWitness {
        second,
        third,
        constant,
        lhs,
        rhs,
    })
}

/// `Tr((A^-1 B)^2)`, the second derivative of `-log det` at `A` along `B`.
pub fn logdet_curvature(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let inv = a.clone().try_inverse().ok_or(OedError::Domain)?;
    let ab = inv * b;
    Ok((&ab * &ab).trace())
}

pub fn logdet_curvature_floor(alpha: f64) -> f64 {
    1.0 / (alpha * alpha)
}

/// `p(p+1) Tr(A^-p B A^-1 B A^-1)`.
pub fn trace_power_curvature(a: &DMatrix<f64>, b: &DMatrix<f64>, p: f64) -> Result<f64> {
    if !linalg::is_positive_definite(a) {
        return Err(OedError::Domain);
    }
    let s = Spectral::new(a);
    let ap = s.power(-p);
    let inv = s.power(-1.0);
    Ok(p * (p + 1.0) * (ap * b * &inv * b * &inv).trace())
}

pub fn trace_power_curvature_floor(alpha: f64, p: f64) -> f64 {
    p * (p + 1.0) / alpha.powf(p + 2.0)
}

/// `p [(p+1) Tr(A^{-p-2} B B) Tr(A^-p) - p Tr(A^{-p-1} B)^2] / Tr(A^-p)^2`.
pub fn log_trace_curvature(a: &DMatrix<f64>, b: &DMatrix<f64>, p: f64) -> Result<f64> {
    if !linalg::is_positive_definite(a) {
        return Err(OedError::Domain);
    }
    let s = Spectral::new(a);
    let t = s.trace_power(-p);
    let first = (s.power(-p - 2.0) * b * b).trace();
    let lin = (s.power(-p - 1.0) * b).trace();
    Ok(p * ((p + 1.0) * first * t - p * lin * lin) / (t * t))
}

/// Floor `p / (n kappa^p alpha^2)` for condition number at most `kappa`.
pub fn log_trace_curvature_floor(n: usize, alpha: f64, kappa: f64, p: f64) -> f64 {
    p / (n as f64 * kappa.powf(p) * alpha * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Criterion;

    fn identity_fusion(upper: Vec<i64>) -> Instance {
        Instance {
            m: 2,
            n: 2,
            budget: 2,
            a: DMatrix::identity(2, 2),
            lower: vec![0, 0],
            upper,
            fusion: Some(DMatrix::identity(2, 2)),
            criterion: Criterion::d_opt(),
        }
    }

    #[test]
    fn fusion_constants_identity() {
        let k = fusion_constants(&identity_fusion(vec![1, 1]), 1.0).unwrap();
        assert!((k.l_f - 1.0).abs() < 1e-9);
        assert!((k.l_g - 2.0).abs() < 1e-9);
        assert!((k.a_c - 2.0).abs() < 1e-12);
        assert!((k.l_k - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fusion_constants_need_fusion() {
        let mut inst = identity_fusion(vec![1, 1]);
        inst.fusion = None;
        assert!(matches!(fusion_constants(&inst, 1.0), Err(OedError::Unsupported(_))));
    }

    #[test]
    fn scaling_a_scales_l_f_by_sixteen() {
        let base = identity_fusion(vec![1, 1]);
        let mut scaled = base.clone();
        scaled.a *= 2.0;
        let k0 = fusion_constants(&base, 1.0).unwrap();
        let k1 = fusion_constants(&scaled, 1.0).unwrap();
        assert!((k1.l_f / k0.l_f - 16.0).abs() < 1e-8);
    }

    #[test]
    fn eig_bound_examples() {
        assert_eq!(eig_bound(&identity_fusion(vec![2, 2])), 2.0);
        assert_eq!(eig_bound(&identity_fusion(vec![1, 3])), 3.0);
    }

    #[test]
    fn eig_bound_fails_for_collinear_rows_but_trace_bound_holds() {
        let inst = Instance {
            m: 2,
            n: 1,
            budget: 2,
            a: DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            lower: vec![0, 0],
            upper: vec![1, 1],
            fusion: None,
            criterion: Criterion::d_opt(),
        };
        let x = [1.0, 1.0];
        let lmax = linalg::max_eigenvalue(&super::super::information(&inst, &x).unwrap());
        assert_eq!(lmax, 2.0);
        assert!(eig_bound(&inst) < lmax);
        assert!(trace_eig_bound(&inst).unwrap() >= lmax);
    }

    #[test]
    fn gsc_identity_case() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let w = gsc_witness(1.0, &i2, &i2, 1.0).unwrap();
        assert!((w.second - 4.0).abs() < 1e-12);
        assert!((w.third + 12.0).abs() < 1e-12);
        assert!((w.lhs - 12.0).abs() < 1e-12);
        let m = 3.0 * 2f64.powf(0.25) / 2f64.sqrt();
        assert!((w.constant - m).abs() < 1e-12);
        assert!((w.rhs - 8.0 * m).abs() < 1e-10);
        assert!(w.holds(0.0));
        let zero = DMatrix::<f64>::zeros(2, 2);
        let w0 = gsc_witness(1.0, &i2, &zero, 1.0).unwrap();
        assert_eq!((w0.lhs, w0.rhs), (0.0, 0.0));
        assert!(gsc_witness(1.0, &zero, &i2, 1.0).is_err());
    }

    #[test]
    fn local_constants_are_finite() {
        let inst = identity_fusion(vec![2, 2]);
        let mut opt = inst.clone();
        opt.fusion = None;
        let k = local_constants(&opt, 1.0, &[1.0, 1.0]).unwrap();
        assert!(k.l_f.is_finite() && k.l_g.is_finite() && k.l_k.is_finite());
        // X0 = I, n = 2: L_g = 2 * 1 * 1 * Tr(I)^3 = 16
        assert!((k.l_g - 16.0).abs() < 1e-8);
        assert!(local_constants(&opt, 1.0, &[2.0, 0.0]).is_err());
    }
}

//! Objective abstraction shared by the first-order solvers.

use nalgebra::DMatrix;

use crate::error::{OedError, Result};

/// A convex function on `R^m` that may be undefined outside an open domain.
pub trait SmoothFunction {
    fn dim(&self) -> usize;

    fn in_domain(&self, x: &[f64]) -> bool;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }
}

pub trait TwiceDifferentiable: SmoothFunction {
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;
}

/// `0.5 * ||x - target||^2`, defined everywhere.
#[derive(Debug, Clone)]
pub struct SquaredDistance {
    pub target: Vec<f64>,
}

impl SquaredDistance {
    pub fn new(target: Vec<f64>) -> Self {
        SquaredDistance { target }
    }
}

impl SmoothFunction for SquaredDistance {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.target.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_len(x, self.target.len())?;
        Ok(0.5 * x.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.target.len())?;
        Ok(x.iter().zip(&self.target).map(|(a, b)| a - b).collect())
    }
}

impl TwiceDifferentiable for SquaredDistance {
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len(x, self.target.len())?;
        Ok(DMatrix::identity(x.len(), x.len()))
    }
}

pub(crate) fn check_len(x: &[f64], expected: usize) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(OedError::Dimension {
            expected,
            got: x.len(),
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

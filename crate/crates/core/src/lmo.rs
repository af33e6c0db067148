//! The feasible polytope `P = {x : l <= x <= u, sum x = N}` and its oracles.

use crate::error::{OedError, Result};
use crate::instance::Instance;

/// Default cap on the number of points produced by [`BoundBox::enumerate`].
pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;

/// Integer bounds plus the budget constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundBox {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub budget: i64,
}

impl BoundBox {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>, budget: i64) -> Result<Self> {
        let b = BoundBox {
            lower,
            upper,
            budget,
        };
        b.check()?;
        Ok(b)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        BoundBox {
            lower: instance.lower.clone(),
            upper: instance.upper.clone(),
            budget: instance.budget,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(OedError::InfeasibleBox("bound vectors differ in length".into()));
        }
        if let Some(i) = (0..self.dim()).find(|&i| self.lower[i] < 0 || self.lower[i] > self.upper[i]) {
            return Err(OedError::InfeasibleBox(format!("bad bounds at index {i}")));
        }
        let (lo, hi) = self.sum_range();
        if self.budget < lo || self.budget > hi {
            return Err(OedError::InfeasibleBox(format!(
                "budget {} outside [{lo}, {hi}]",
                self.budget
            )));
        }
        Ok(())
    }

    pub fn is_feasible(&self) -> bool {
        self.check().is_ok()
    }

    fn sum_range(&self) -> (i64, i64) {
        (self.lower.iter().sum(), self.upper.iter().sum())
    }

    /// Whether the box pins every coordinate.
    pub fn is_singleton(&self) -> bool {
        let (lo, hi) = self.sum_range();
        lo == self.budget || hi == self.budget
    }

    pub fn contains_integer(&self, x: &[i64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &v)| self.lower[i] <= v && v <= self.upper[i])
            && x.iter().sum::<i64>() == self.budget
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(i, &v)| self.lower[i] as f64 - tol <= v && v <= self.upper[i] as f64 + tol)
            && (x.iter().sum::<f64>() - self.budget as f64).abs() <= tol
    }

    /// Child box with `x_i <= bound`; `None` if it is empty.
    pub fn with_upper(&self, i: usize, bound: i64) -> Option<Self> {
        let mut b = self.clone();
        b.upper[i] = b.upper[i].min(bound);
        b.is_feasible().then_some(b)
    }

    /// Child box with `x_i >= bound`; `None` if it is empty.
    pub fn with_lower(&self, i: usize, bound: i64) -> Option<Self> {
        let mut b = self.clone();
        b.lower[i] = b.lower[i].max(bound);
        b.is_feasible().then_some(b)
    }

    /// Point `l + t (u - l)` with the budget met; it has the largest support
    /// of any feasible point.
    pub fn center(&self) -> Vec<f64> {
        let (lo, hi) = self.sum_range();
        let t = if hi > lo {
            (self.budget - lo) as f64 / (hi - lo) as f64
        } else {
            0.0
        };
        (0..self.dim())
            .map(|i| self.lower[i] as f64 + t * (self.upper[i] - self.lower[i]) as f64)
            .collect()
    }

    /// Exact minimizer of `<d, x>` over the box and budget.
    ///
    /// Starts at `l` and fills coordinates in ascending order of `d` (ties by
    /// index), each up to `min(u_i - l_i, N - sum x)`.
    pub fn lmo(&self, d: &[f64]) -> Result<Vec<i64>> {
        self.check()?;
        if d.len() != self.dim() {
            return Err(OedError::Dimension {
                expected: self.dim(),
                got: d.len(),
            });
        }
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
        let mut x = self.lower.clone();
        let mut remaining = self.budget - self.lower.iter().sum::<i64>();
        for i in order {
            if remaining == 0 {
                break;
            }
            let add = (self.upper[i] - self.lower[i]).min(remaining);
            x[i] += add;
            remaining -= add;
        }
        Ok(x)
    }

    /// Rounds a fractional point of the polytope to a nearby integer point.
    pub fn round(&self, w: &[f64]) -> Result<Vec<i64>> {
        self.check()?;
        if w.len() != self.dim() {
            return Err(OedError::Dimension {
                expected: self.dim(),
                got: w.len(),
            });
        }
        let m = self.dim();
        let mut x: Vec<i64> = (0..m)
            .map(|i| ((w[i] + 1e-9).floor() as i64).clamp(self.lower[i], self.upper[i]))
            .collect();
        let mut sum: i64 = x.iter().sum();
        while sum < self.budget {
            let pick = (0..m)
                .filter(|&i| x[i] < self.upper[i])
                .fold(None::<(usize, f64)>, |best, i| {
                    let r = w[i] - x[i] as f64;
                    match best {
                        Some((_, br)) if br >= r => best,
                        _ => Some((i, r)),
                    }
                });
            let (i, _) = pick.expect("feasible box has headroom");
            x[i] += 1;
            sum += 1;
        }
        while sum > self.budget {
            let pick = (0..m)
                .filter(|&i| x[i] > self.lower[i])
                .fold(None::<(usize, f64)>, |best, i| {
                    let r = w[i] - x[i] as f64;
                    match best {
                        Some((_, br)) if br <= r => best,
                        _ => Some((i, r)),
                    }
                });
            let (i, _) = pick.expect("feasible box has slack");
            x[i] -= 1;
            sum -= 1;
        }
        Ok(x)
    }

    /// Number of integer points, or `None` if it exceeds `cap`.
    pub fn count_points(&self, cap: usize) -> Option<usize> {
        if !self.is_feasible() {
            return Some(0);
        }
        let base: i64 = self.lower.iter().sum();
        let target = (self.budget - base) as usize;
        let limit = cap as u128 + 1;
        // ways[s]: completions of the processed suffix summing to s
        let mut ways = vec![0u128; target + 1];
        ways[0] = 1;
        for i in (0..self.dim()).rev() {
            let span = (self.upper[i] - self.lower[i]) as usize;
            let mut next = vec![0u128; target + 1];
            // sliding window sum over ways[s - span ..= s]
            let mut window = 0u128;
            for s in 0..=target {
                window += ways[s];
                if s > span {
                    window -= ways[s - span - 1];
                }
                next[s] = window.min(limit);
            }
            ways = next;
        }
        let total = ways[target];
        (total <= cap as u128).then_some(total as usize)
    }

    /// All integer points in lexicographic order.
    pub fn enumerate(&self, cap: usize) -> Result<IntegerPoints> {
        self.check()?;
        if self.count_points(cap).is_none() {
            return Err(OedError::TooManyPoints { cap });
        }
        Ok(IntegerPoints::new(self.clone()))
    }
}

/// Lexicographic iterator over the integer points of a [`BoundBox`].
pub struct IntegerPoints {
    bbox: BoundBox,
    suffix_max: Vec<i64>,
    suffix_min: Vec<i64>,
    current: Option<Vec<i64>>,
    started: bool,
}

impl IntegerPoints {
    fn new(bbox: BoundBox) -> Self {
        let m = bbox.dim();
        let mut suffix_max = vec![0; m + 1];
        let mut suffix_min = vec![0; m + 1];
        for i in (0..m).rev() {
            suffix_max[i] = suffix_max[i + 1] + bbox.upper[i];
            suffix_min[i] = suffix_min[i + 1] + bbox.lower[i];
        }
        IntegerPoints {
            bbox,
            suffix_max,
            suffix_min,
            current: None,
            started: false,
        }
    }

    /// Smallest completion of positions `from..` summing to `rest`.
    fn fill(&self, x: &mut [i64], from: usize, mut rest: i64) {
        for j in from..x.len() {
            let v = (rest - self.suffix_max[j + 1]).max(self.bbox.lower[j]);
            x[j] = v;
            rest -= v;
        }
    }
}

impl Iterator for IntegerPoints {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if !self.started {
            self.started = true;
            let mut x = vec![0; self.bbox.dim()];
            self.fill(&mut x, 0, self.bbox.budget);
            self.current = Some(x.clone());
            return Some(x);
        }
        let mut x = self.current.take()?;
        let m = x.len();
        if m < 2 {
            return None;
        }
        let mut prefix: i64 = x[..m - 1].iter().sum();
        for k in (0..m - 1).rev() {
            prefix -= x[k];
            let candidate = x[k] + 1;
            let rest = self.bbox.budget - prefix - candidate;
            if candidate <= self.bbox.upper[k]
                && rest >= self.suffix_min[k + 1]
                && rest <= self.suffix_max[k + 1]
            {
                x[k] = candidate;
                self.fill(&mut x, k + 1, rest);
                self.current = Some(x.clone());
                return Some(x);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(l: &[i64], u: &[i64], n: i64) -> BoundBox {
        BoundBox::new(l.to_vec(), u.to_vec(), n).unwrap()
    }

    #[test]
    fn lmo_examples() {
        let b = bx(&[0, 0, 0], &[2, 2, 2], 3);
        assert_eq!(b.lmo(&[3.0, 1.0, 2.0]).unwrap(), vec![0, 2, 1]);
        assert_eq!(b.lmo(&[1.0, 1.0, 1.0]).unwrap(), vec![2, 1, 0]);
        let b = bx(&[1, 0, 0], &[2, 2, 2], 3);
        assert_eq!(b.lmo(&[3.0, 1.0, 2.0]).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn infeasible_boxes_are_rejected() {
        assert!(BoundBox::new(vec![0, 0], vec![1, 1], 3).is_err());
        assert!(BoundBox::new(vec![2, 0], vec![1, 1], 1).is_err());
        let b = BoundBox {
            lower: vec![0, 0],
            upper: vec![1, 1],
            budget: 5,
        };
        assert!(b.lmo(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn rounding_examples() {
        let b = bx(&[0, 0, 0], &[2, 2, 2], 3);
        assert_eq!(b.round(&[1.6, 0.9, 0.5]).unwrap(), vec![2, 1, 0]);
        assert_eq!(b.round(&[1.0, 2.0, 0.0]).unwrap(), vec![1, 2, 0]);
        let b = bx(&[0, 0], &[1, 1], 1);
        assert_eq!(b.round(&[0.5, 0.5]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn enumeration_examples() {
        let pts: Vec<_> = bx(&[0, 0], &[2, 2], 2).enumerate(100).unwrap().collect();
        assert_eq!(pts, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        let pts: Vec<_> = bx(&[1, 1], &[1, 1], 2).enumerate(100).unwrap().collect();
        assert_eq!(pts, vec![vec![1, 1]]);
        assert_eq!(bx(&[0, 0, 0], &[1, 1, 1], 2).enumerate(100).unwrap().count(), 3);
    }

    #[test]
    fn enumeration_respects_cap() {
        let b = bx(&[0; 8], &[5; 8], 20);
        assert!(matches!(b.enumerate(10), Err(OedError::TooManyPoints { cap: 10 })));
        let n = b.count_points(usize::MAX / 2).unwrap();
        assert_eq!(b.enumerate(n).unwrap().count(), n);
    }

    #[test]
    fn single_coordinate_box() {
        let pts: Vec<_> = bx(&[0], &[4], 3).enumerate(10).unwrap().collect();
        assert_eq!(pts, vec![vec![3]]);
    }

    #[test]
    fn center_is_feasible() {
        let b = bx(&[1, 0, 0], &[3, 2, 0], 3);
        let c = b.center();
        assert!(b.contains(&c, 1e-12));
        assert!(c[0] > 1.0 && c[1] > 0.0 && c[2] == 0.0);
    }
}

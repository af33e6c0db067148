//! Problem instances: data model, validation, random generation and JSON I/O.

use std::fmt;
use std::io;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{OedError, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    DOpt,
    AOpt,
    LogAOpt,
    GTIOpt,
    LogGTIOpt,
}

impl CriterionKind {
    pub fn is_log(self) -> bool {
        matches!(self, CriterionKind::LogAOpt | CriterionKind::LogGTIOpt)
    }

    pub fn is_trace(self) -> bool {
        !matches!(self, CriterionKind::DOpt)
    }
}

/// Optimality criterion with its trace exponent `p`.
///
/// `p` is fixed to 1 for the A-criteria, ignored (stored as 0) for the
/// D-criterion and free (positive) for the generalized trace criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub kind: CriterionKind,
    pub p: f64,
}

impl Criterion {
    pub fn new(kind: CriterionKind, p: f64) -> Result<Self> {
        let p = match kind {
            CriterionKind::DOpt => 0.0,
            CriterionKind::AOpt | CriterionKind::LogAOpt => 1.0,
            CriterionKind::GTIOpt | CriterionKind::LogGTIOpt => {
                if !(p > 0.0) || !p.is_finite() {
                    return Err(OedError::InvalidSpec(format!(
                        "trace exponent p must be positive, got {p}"
                    )));
                }
                p
            }
        };
        Ok(Criterion { kind, p })
    }

    pub fn d_opt() -> Self {
        Criterion { kind: CriterionKind::DOpt, p: 0.0 }
    }

    pub fn a_opt() -> Self {
        Criterion { kind: CriterionKind::AOpt, p: 1.0 }
    }

    pub fn log_a_opt() -> Self {
        Criterion { kind: CriterionKind::LogAOpt, p: 1.0 }
    }

    pub fn gti(p: f64) -> Result<Self> {
        Self::new(CriterionKind::GTIOpt, p)
    }

    pub fn log_gti(p: f64) -> Result<Self> {
        Self::new(CriterionKind::LogGTIOpt, p)
    }

    /// Effective trace exponent; `None` for the D-criterion.
    pub fn exponent(&self) -> Option<f64> {
        self.kind.is_trace().then_some(self.p)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CriterionKind::DOpt => write!(f, "DOpt"),
            CriterionKind::AOpt => write!(f, "AOpt"),
            CriterionKind::LogAOpt => write!(f, "LogAOpt"),
            CriterionKind::GTIOpt => write!(f, "GTIOpt(p={})", self.p),
            CriterionKind::LogGTIOpt => write!(f, "LogGTIOpt(p={})", self.p),
        }
    }
}

/// An integer optimal experiment design instance.
///
/// Row `i` of `a` is the experiment vector `v_i`. When `fusion` holds a
/// matrix `C`, the information matrix is `C + A^T diag(x) A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub budget: i64,
    pub a: DMatrix<f64>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub fusion: Option<DMatrix<f64>>,
    pub criterion: Criterion,
}

/// A single invariant violation reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyDimensions,
    TooManyParameters { n: usize, m: usize },
    MatrixShape { rows: usize, cols: usize },
    BoundsLength { field: &'static str, len: usize },
    NegativeLowerBound(usize),
    LowerAboveUpper(usize),
    BudgetBelowLowerBounds { budget: i64, sum_lower: i64 },
    BudgetExceedsUpperBounds { budget: i64, sum_upper: i64 },
    NonFiniteEntry(&'static str),
    RankDeficient { rank: usize },
    FusionShape { rows: usize, cols: usize },
    FusionNotSymmetric,
    FusionNotPositiveDefinite,
    InvalidExponent(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDimensions => write!(f, "m and n must be positive"),
            Violation::TooManyParameters { n, m } => write!(f, "n = {n} exceeds m = {m}"),
            Violation::MatrixShape { rows, cols } => {
                write!(f, "matrix A has shape {rows}x{cols}, expected m x n")
            }
            Violation::BoundsLength { field, len } => {
                write!(f, "bound vector {field} has length {len}, expected m")
            }
            Violation::NegativeLowerBound(i) => write!(f, "lower bound l[{i}] is negative"),
            Violation::LowerAboveUpper(i) => write!(f, "lower bound exceeds upper bound at index {i}"),
            Violation::BudgetBelowLowerBounds { .. } => write!(f, "budget below lower bounds"),
            Violation::BudgetExceedsUpperBounds { .. } => write!(f, "budget exceeds upper bounds"),
            Violation::NonFiniteEntry(field) => write!(f, "non-finite entry in {field}"),
            Violation::RankDeficient { .. } => write!(f, "rank deficient"),
            Violation::FusionShape { rows, cols } => {
                write!(f, "fusion matrix C has shape {rows}x{cols}, expected n x n")
            }
            Violation::FusionNotSymmetric => write!(f, "fusion matrix C is not symmetric"),
            Violation::FusionNotPositiveDefinite => {
                write!(f, "fusion matrix C is not positive definite")
            }
            Violation::InvalidExponent(p) => write!(f, "trace exponent p = {p} must be positive"),
        }
    }
}

/// Checks every instance invariant; an empty result means the instance is valid.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let Instance { m, n, .. } = *instance;
    if m == 0 || n == 0 {
        out.push(Violation::EmptyDimensions);
        return out;
    }
    if n > m {
        out.push(Violation::TooManyParameters { n, m });
    }
    if instance.a.nrows() != m || instance.a.ncols() != n {
        out.push(Violation::MatrixShape {
            rows: instance.a.nrows(),
            cols: instance.a.ncols(),
        });
        return out;
    }
    if instance.a.iter().any(|v| !v.is_finite()) {
        out.push(Violation::NonFiniteEntry("A"));
    }
    let mut bounds_ok = true;
    for (field, v) in [("l", &instance.lower), ("u", &instance.upper)] {
        if v.len() != m {
            out.push(Violation::BoundsLength { field, len: v.len() });
            bounds_ok = false;
        }
    }
    if bounds_ok {
        for i in 0..m {
            if instance.lower[i] < 0 {
                out.push(Violation::NegativeLowerBound(i));
            }
            if instance.lower[i] > instance.upper[i] {
                out.push(Violation::LowerAboveUpper(i));
            }
        }
        let sum_lower: i64 = instance.lower.iter().sum();
        let sum_upper: i64 = instance.upper.iter().sum();
        if instance.budget < sum_lower {
            out.push(Violation::BudgetBelowLowerBounds {
                budget: instance.budget,
                sum_lower,
            });
        }
        if instance.budget > sum_upper {
            out.push(Violation::BudgetExceedsUpperBounds {
                budget: instance.budget,
                sum_upper,
            });
        }
    }
    if n <= m && instance.a.iter().all(|v| v.is_finite()) {
        let rank = linalg::numerical_rank(&instance.a, 1e-10);
        if rank < n {
            out.push(Violation::RankDeficient { rank });
        }
    }
    if let Some(c) = &instance.fusion {
        if c.nrows() != n || c.ncols() != n {
            out.push(Violation::FusionShape {
                rows: c.nrows(),
                cols: c.ncols(),
            });
        } else if c.iter().any(|v| !v.is_finite()) {
            out.push(Violation::NonFiniteEntry("C"));
        } else {
            let scale = c.abs().max().max(f64::MIN_POSITIVE);
            if (c - c.transpose()).abs().max() > 1e-12 * scale {
                out.push(Violation::FusionNotSymmetric);
            } else if !linalg::is_positive_definite(c) {
                out.push(Violation::FusionNotPositiveDefinite);
            }
        }
    }
    if instance.criterion.kind.is_trace() && !(instance.criterion.p > 0.0) {
        out.push(Violation::InvalidExponent(instance.criterion.p));
    }
    out
}

impl Instance {
    pub fn is_fusion(&self) -> bool {
        self.fusion.is_some()
    }

    pub fn with_criterion(mut self, criterion: Criterion) -> Self {
        self.criterion = criterion;
        self
    }

    /// Experiment vector `v_i` (row `i` of `A`) as a slice-free copy.
    pub fn row(&self, i: usize) -> nalgebra::DVector<f64> {
        self.a.row(i).transpose()
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Returns `Err` listing all violations if the instance is invalid.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = validate(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(OedError::InvalidInstance(v.iter().map(|x| x.to_string()).collect()))
        }
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile::from(self);
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter);
        file.serialize(&mut ser).expect("serializing to memory cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| OedError::Parse(e.to_string()))?;
        let inst = file.into_instance()?;
        inst.ensure_valid()?;
        Ok(inst)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// On-disk layout of an instance.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    n: usize,
    #[serde(rename = "N")]
    budget: i64,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    l: Vec<i64>,
    u: Vec<i64>,
    #[serde(rename = "C")]
    c: Option<Vec<Vec<f64>>>,
    criterion: Criterion,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix_from_rows(field: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(OedError::Parse(format!(
            "field \"{field}\" has {} rows, expected {nrows}",
            rows.len()
        )));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(OedError::Parse(format!(
                "field \"{field}\" row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            m: inst.m,
            n: inst.n,
            budget: inst.budget,
            a: rows_of(&inst.a),
            l: inst.lower.clone(),
            u: inst.upper.clone(),
            c: inst.fusion.as_ref().map(rows_of),
            criterion: inst.criterion,
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance> {
        let a = matrix_from_rows("A", &self.a, self.m, self.n)?;
        for (name, v) in [("l", &self.l), ("u", &self.u)] {
            if v.len() != self.m {
                return Err(OedError::Parse(format!(
                    "field \"{name}\" has length {}, expected {}",
                    v.len(),
                    self.m
                )));
            }
        }
        let fusion = match self.c {
            Some(rows) => Some(matrix_from_rows("C", &rows, self.n, self.n)?),
            None => None,
        };
        Ok(Instance {
            m: self.m,
            n: self.n,
            budget: self.budget,
            a,
            lower: self.l,
            upper: self.u,
            fusion,
            criterion: self.criterion,
        })
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Optimal,
    Fusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correlation {
    Independent,
    Correlated,
}

/// Parameters of the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub variant: Variant,
    pub correlation: Correlation,
    pub seed: u64,
    /// Correlation decay of the AR(1) covariance `rho^|j-k|`.
    pub rho: f64,
}

impl GeneratorSpec {
    pub fn new(m: usize, n: usize, variant: Variant, correlation: Correlation, seed: u64) -> Self {
        GeneratorSpec {
            m,
            n,
            variant,
            correlation,
            seed,
            rho: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(OedError::InvalidSpec("m and n must be positive".into()));
        }
        if self.n > self.m {
            return Err(OedError::InvalidSpec(format!(
                "n = {} exceeds m = {}",
                self.n, self.m
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(OedError::InvalidSpec(format!(
                "rho = {} must lie in (0, 1)",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Number of whole-vector resamples of the upper bounds before widening.
const UPPER_RESAMPLES: usize = 100;

/// Draws a random instance. Deterministic in `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    let GeneratorSpec { m, n, .. } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mixing = match spec.correlation {
        Correlation::Independent => None,
        Correlation::Correlated => {
            let sigma = DMatrix::from_fn(n, n, |j, k| spec.rho.powi((j as i32 - k as i32).abs()));
            Some(linalg::Spectral::new(&sigma).map(|l| l.max(0.0).sqrt()))
        }
    };
    let a = draw_rows(&mut rng, m, n, mixing.as_ref());

    let (budget, cap) = match spec.variant {
        Variant::Optimal => {
            let budget = (1.5 * n as f64).floor() as i64;
            (budget, (budget / 3).max(1))
        }
        Variant::Fusion => {
            let lo = (m as i64 + 19) / 20;
            let hi = (m as i64 / 3).max(lo);
            let budget = rng.random_range(lo..=hi);
            (budget, (m as i64 / 10).max(1))
        }
    };

    let mut upper = vec![0i64; m];
    let mut fits = false;
    for _ in 0..UPPER_RESAMPLES {
        for u in upper.iter_mut() {
            *u = rng.random_range(1..=cap);
        }
        if upper.iter().sum::<i64>() >= budget {
            fits = true;
            break;
        }
    }
    if !fits {
        let widened = (budget + m as i64 - 1) / m as i64 + 1;
        for u in upper.iter_mut() {
            *u = (*u).max(widened);
        }
    }

    let fusion = match spec.variant {
        Variant::Optimal => None,
        Variant::Fusion => {
            let b = draw_rows(&mut rng, n, n, mixing.as_ref());
            let gram = b.transpose() * &b;
            let ridge = 1e-6 * gram.trace() / n as f64;
            let c = linalg::symmetrize(&(gram + DMatrix::identity(n, n) * ridge));
            Some(c)
        }
    };

    let inst = Instance {
        m,
        n,
        budget,
        a,
        lower: vec![0; m],
        upper,
        fusion,
        criterion: Criterion::d_opt(),
    };
    inst.ensure_valid()?;
    Ok(inst)
}

pub(crate) fn draw_rows(rng: &mut ChaCha8Rng, rows: usize, n: usize, mixing: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(rows, n);
    for i in 0..rows {
        let z = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let v = match mixing {
            Some(s) => s * z,
            None => z,
        };
        a.row_mut(i).copy_from(&v.transpose());
    }
    a
}

//! Drive schedules `q(s)`, `s ∈ [0, 1]`.
//!
//! A schedule is a curve in reduced coordinates `p(s)` together with a
//! parametrization `q = φ(p)` that eliminates holonomic constraints.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{RMatrix, RVector};

#[derive(Debug, Clone, PartialEq)]
pub enum Parametrization {
    /// `q = p`.
    Identity(usize),
    /// `q = offset + matrix · p`.
    Affine { offset: RVector, matrix: RMatrix },
    /// `q = r (cos p, sin p)`.
    Polar { radius: f64 },
}

impl Parametrization {
    /// Two drives tied by `q_1 + q_2 = total`, parametrized by `q_2`.
    pub fn sum_second(total: f64) -> Self {
        Parametrization::Affine {
            offset: RVector::from_vec(vec![total, 0.0]),
            matrix: RMatrix::from_column_slice(2, 1, &[-1.0, 1.0]),
        }
    }

    /// Two drives tied by `q_1 + q_2 = total`, parametrized by `q_1`.
    pub fn sum_first(total: f64) -> Self {
        Parametrization::Affine {
            offset: RVector::from_vec(vec![0.0, total]),
            matrix: RMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
        }
    }

    pub fn reduced_dim(&self) -> usize {
        match self {
            Parametrization::Identity(n) => *n,
            Parametrization::Affine { matrix, .. } => matrix.ncols(),
            Parametrization::Polar { .. } => 1,
        }
    }

    pub fn full_dim(&self) -> usize {
        match self {
            Parametrization::Identity(n) => *n,
            Parametrization::Affine { matrix, .. } => matrix.nrows(),
            Parametrization::Polar { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Parametrization::Affine { offset, matrix } if offset.len() != matrix.nrows() => Err(Error::Shape {
                expected: format!("offset of length {}", matrix.nrows()),
                got: offset.len().to_string(),
            }),
            Parametrization::Polar { radius } if !(*radius > 0.0) => {
                Err(Error::InvalidParameter(format!("polar radius must be positive, got {radius}")))
            }
            _ => Ok(()),
        }
    }

    pub fn map(&self, p: &RVector) -> RVector {
        match self {
            Parametrization::Identity(_) => p.clone(),
            Parametrization::Affine { offset, matrix } => offset + matrix * p,
            Parametrization::Polar { radius } => RVector::from_vec(vec![radius * p[0].cos(), radius * p[0].sin()]),
        }
    }

    /// `∂q/∂p`, shape `full × reduced`.
    pub fn jacobian(&self, p: &RVector) -> RMatrix {
        match self {
            Parametrization::Identity(n) => RMatrix::identity(*n, *n),
            Parametrization::Affine { matrix, .. } => matrix.clone(),
            Parametrization::Polar { radius } => {
                RMatrix::from_column_slice(2, 1, &[-radius * p[0].sin(), radius * p[0].cos()])
            }
        }
    }

    /// `∂J/∂p_k`; zero for linear maps.
    pub fn jacobian_derivative(&self, p: &RVector, _k: usize) -> Option<RMatrix> {
        match self {
            Parametrization::Polar { radius } => {
                Some(RMatrix::from_column_slice(2, 1, &[-radius * p[0].cos(), -radius * p[0].sin()]))
            }
            _ => None,
        }
    }

    /// Inverse map for points on the constraint surface.
    pub fn invert(&self, q: &RVector) -> Result<RVector> {
        match self {
            Parametrization::Identity(_) => Ok(q.clone()),
            Parametrization::Affine { offset, matrix } => {
                let rhs = q - offset;
                let p = matrix
                    .clone()
                    .svd(true, true)
                    .solve(&rhs, 1e-14)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                if (matrix * &p - rhs).norm() > 1e-10 * q.norm().max(1.0) {
                    return Err(Error::InvalidParameter("point is off the constraint surface".into()));
                }
                Ok(p)
            }
            Parametrization::Polar { radius } => {
                if ((q[0].hypot(q[1])) - radius).abs() > 1e-10 * radius {
                    return Err(Error::InvalidParameter("point is off the constraint circle".into()));
                }
                Ok(RVector::from_vec(vec![q[1].atan2(q[0])]))
            }
        }
    }
}

pub type CurveFn = Arc<dyn Fn(f64) -> (RVector, RVector) + Send + Sync>;

/// Piecewise-cubic Hermite curve through samples and slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCurve {
    grid: Vec<f64>,
    values: Vec<RVector>,
    slopes: Vec<RVector>,
}

impl HermiteCurve {
    pub fn new(grid: Vec<f64>, values: Vec<RVector>, slopes: Vec<RVector>) -> Result<Self> {
        if grid.len() < 2 || values.len() != grid.len() || slopes.len() != grid.len() {
            return Err(Error::InvalidParameter("Hermite curve needs matching samples on >= 2 points".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values, slopes })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[RVector] {
        &self.values
    }

    pub fn slopes(&self) -> &[RVector] {
        &self.slopes
    }

    pub fn eval(&self, s: f64) -> (RVector, RVector) {
        let n = self.grid.len();
        let i = match self.grid.partition_point(|&g| g <= s) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (s0, s1) = (self.grid[i], self.grid[i + 1]);
        let h = s1 - s0;
        let t = (s - s0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let (y0, y1, m0, m1) = (&self.values[i], &self.values[i + 1], &self.slopes[i], &self.slopes[i + 1]);
        let p = y0 * h00 + m0 * (h10 * h) + y1 * h01 + m1 * (h11 * h);
        let dp = y0 * d00 + m0 * d10 + y1 * d01 + m1 * d11;
        (p, dp)
    }
}

#[derive(Clone)]
pub enum Curve {
    Function(CurveFn),
    Hermite(HermiteCurve),
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Function(_) => write!(f, "Curve::Function"),
            Curve::Hermite(h) => write!(f, "Curve::Hermite({} points)", h.grid.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Schedule {
    curve: Curve,
    param: Parametrization,
}

/// Tolerance for evaluating at the ends of `[0, 1]`.
const DOMAIN_SLACK: f64 = 1e-12;

impl Schedule {
    pub fn new(curve: Curve, param: Parametrization) -> Result<Self> {
        param.validate()?;
        Ok(Self { curve, param })
    }

    /// Reduced-coordinate curve given as a closure returning `(p(s), p'(s))`.
    pub fn from_fn<F>(param: Parametrization, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (RVector, RVector) + Send + Sync + 'static,
    {
        Self::new(Curve::Function(Arc::new(f)), param)
    }

    /// Straight line from `p0` to `p1` in reduced coordinates.
    pub fn linear(param: Parametrization, p0: RVector, p1: RVector) -> Result<Self> {
        if p0.len() != param.reduced_dim() || p1.len() != param.reduced_dim() {
            return Err(Error::Shape {
                expected: format!("{} reduced coordinates", param.reduced_dim()),
                got: format!("{} and {}", p0.len(), p1.len()),
            });
        }
        let slope = &p1 - &p0;
        Self::from_fn(param, move |s| (&p0 + &slope * s, slope.clone()))
    }

    pub fn parametrization(&self) -> &Parametrization {
        &self.param
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn full_dim(&self) -> usize {
        self.param.full_dim()
    }

    pub fn reduced_dim(&self) -> usize {
        self.param.reduced_dim()
    }

    fn check(s: f64) -> Result<f64> {
        if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&s) {
            return Err(Error::Domain(s));
        }
        Ok(s.clamp(0.0, 1.0))
    }

    /// `(p(s), p'(s))`.
    pub fn reduced_at(&self, s: f64) -> Result<(RVector, RVector)> {
        let s = Self::check(s)?;
        Ok(match &self.curve {
            Curve::Function(f) => f(s),
            Curve::Hermite(h) => h.eval(s),
        })
    }

    /// `(q(s), q'(s))`.
    pub fn drives_at(&self, s: f64) -> Result<(RVector, RVector)> {
        let (p, dp) = self.reduced_at(s)?;
        let q = self.param.map(&p);
        let dq = self.param.jacobian(&p) * dp;
        Ok((q, dq))
    }

    pub fn drives(&self, s: f64) -> Result<Vec<f64>> {
        Ok(self.drives_at(s)?.0.as_slice().to_vec())
    }
}

/// `n` equally spaced points covering `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

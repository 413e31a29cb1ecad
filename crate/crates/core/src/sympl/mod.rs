//! Symplectic matrices and discretized symplectic paths: validation,
//! interpolation, catenation and the JSON document format.

pub mod crossing;
pub mod index;
pub mod kan;

use crate::error::{Error, Result};
use crate::linalg::{block_rotation, symplectic_residual};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Default tolerance for the symplectic-group membership residual.
pub const TOL_SP: f64 = 1e-10;
/// Maximum sup-norm jump between consecutive path samples.
pub const GAP_MAX: f64 = 0.5;
/// Tolerance for "this sample is the identity".
pub const IDENTITY_TOL: f64 = 1e-8;

/// A validated element of Sp(2n) in interleaved coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    dim: usize,
    m: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tol(m, TOL_SP)
    }

    pub fn with_tol(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::validation(format!(
                "expected a square even-dimensional matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let residual = symplectic_residual(&m);
        if residual > tol {
            return Err(Error::NotSymplectic { residual, tol });
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tol.max(1e-9) {
            return Err(Error::NotSymplectic {
                residual: (det - 1.0).abs(),
                tol,
            });
        }
        Ok(SymplecticMatrix { dim: m.nrows(), m })
    }

    pub fn identity(dim: usize) -> Self {
        SymplecticMatrix {
            dim,
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn rotation(dim: usize, theta: f64) -> Self {
        SymplecticMatrix {
            dim,
            m: block_rotation(dim, theta),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }
}

/// A path psi: [0, T] -> Sp(2n) with psi(0) = id, stored as samples on a
/// strictly increasing time grid.
#[derive(Debug, Clone)]
pub struct SymplecticPath {
    dim: usize,
    times: Vec<f64>,
    mats: Vec<DMatrix<f64>>,
}

impl SymplecticPath {
    /// Validates all path invariants: grid shape, identity start, per-sample
    /// symplecticity and the continuity guard.
    pub fn new(times: Vec<f64>, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::with_tol(times, mats, TOL_SP, GAP_MAX)
    }

    pub fn with_tol(
        times: Vec<f64>,
        mats: Vec<DMatrix<f64>>,
        tol_sp: f64,
        gap_max: f64,
    ) -> Result<Self> {
        if times.len() != mats.len() {
            return Err(Error::validation("times and samples differ in length"));
        }
        if times.len() < 2 {
            return Err(Error::validation("a path needs at least two samples"));
        }
        if times[0] != 0.0 {
            return Err(Error::validation("path must start at t = 0"));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::validation("times must be strictly increasing"));
            }
        }
        let dim = mats[0].nrows();
        let id = DMatrix::identity(dim, dim);
        if (&mats[0] - &id).amax() > IDENTITY_TOL {
            return Err(Error::validation("path must start at the identity"));
        }
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::validation("inconsistent sample dimensions"));
            }
            let residual = symplectic_residual(m);
            if residual > tol_sp {
                return Err(Error::NotSymplectic {
                    residual,
                    tol: tol_sp,
                });
            }
            if i > 0 {
                let gap = (m - &mats[i - 1]).amax();
                if gap > gap_max {
                    return Err(Error::Discontinuity {
                        index: i,
                        gap,
                        gap_max,
                    });
                }
            }
        }
        Ok(SymplecticPath { dim, times, mats })
    }

    /// Samples `f` uniformly on [0, T] (n+1 samples including both ends).
    pub fn from_fn(t_end: f64, n: usize, f: impl Fn(f64) -> DMatrix<f64>) -> Result<Self> {
        if !(t_end > 0.0) || n < 1 {
            return Err(Error::validation("need t_end > 0 and n >= 1"));
        }
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let mats: Vec<DMatrix<f64>> = times.iter().map(|&t| f(t)).collect();
        Self::new(times, mats)
    }

    /// Block-rotation path t -> exp(rate * t * J0) on [0, t_end].
    pub fn rotation(dim: usize, rate: f64, t_end: f64, n: usize) -> Result<Self> {
        Self::from_fn(t_end, n, |t| block_rotation(dim, rate * t))
    }

    /// Upper shear path [[1, rate*t], [0, 1]] on [0, t_end] (dim 2).
    pub fn shear(rate: f64, t_end: f64, n: usize) -> Result<Self> {
        Self::from_fn(t_end, n, |t| {
            DMatrix::from_row_slice(2, 2, &[1.0, rate * t, 0.0, 1.0])
        })
    }

    /// Constant identity path.
    pub fn constant_identity(dim: usize, t_end: f64, n: usize) -> Result<Self> {
        Self::from_fn(t_end, n, |_| DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end_matrix(&self) -> &DMatrix<f64> {
        self.mats.last().unwrap()
    }

    /// Largest sup-norm jump between consecutive samples.
    pub fn max_gap(&self) -> f64 {
        self.mats
            .windows(2)
            .map(|w| (&w[1] - &w[0]).amax())
            .fold(0.0, f64::max)
    }

    /// Largest second difference of the samples; a cheap proxy for how much
    /// the cubic interpolant can be trusted between nodes.
    pub fn second_difference(&self) -> f64 {
        if self.mats.len() < 3 {
            return 0.0;
        }
        self.mats
            .windows(3)
            .map(|w| (&w[2] - 2.0 * &w[1] + &w[0]).amax())
            .fold(0.0, f64::max)
    }

    /// Catenation: runs `self` on [0, T1], then `other` rebased by right
    /// multiplication with `self`'s end matrix on [T1, T1 + T2].
    pub fn catenate(&self, other: &SymplecticPath) -> Result<SymplecticPath> {
        if self.dim != other.dim {
            return Err(Error::validation("dimension mismatch in catenation"));
        }
        let t1 = self.t_end();
        let end = self.end_matrix().clone();
        let mut times = self.times.clone();
        let mut mats = self.mats.clone();
        for (i, (t, m)) in other.times.iter().zip(other.mats.iter()).enumerate() {
            if i == 0 {
                // other(0) = id, so the rebased sample equals `end`; skip the
                // duplicate grid point.
                continue;
            }
            times.push(t1 + t);
            mats.push(m * &end);
        }
        SymplecticPath::new(times, mats)
    }

    /// Path with the same samples traversed backwards, rebased to start at
    /// the identity: t -> psi(T - t) psi(T)^{-1}.
    pub fn reversed(&self) -> Result<SymplecticPath> {
        let t_end = self.t_end();
        let inv = self
            .end_matrix()
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::validation("end matrix not invertible"))?;
        let mut times = Vec::with_capacity(self.len());
        let mut mats = Vec::with_capacity(self.len());
        for i in (0..self.len()).rev() {
            times.push(t_end - self.times[i]);
            mats.push(&self.mats[i] * &inv);
        }
        SymplecticPath::new(times, mats)
    }

    /// Restriction of the path to [0, t_cut], keeping every sample with
    /// time <= t_cut (t_cut must be a grid point or very close to one).
    pub fn truncated(&self, t_cut: f64) -> Result<SymplecticPath> {
        let mut times = Vec::new();
        let mut mats = Vec::new();
        for (t, m) in self.times.iter().zip(self.mats.iter()) {
            if *t <= t_cut + 1e-12 {
                times.push(*t);
                mats.push(m.clone());
            }
        }
        SymplecticPath::new(times, mats)
    }

    pub fn interpolant(&self) -> PathInterp<'_> {
        PathInterp { path: self }
    }

    pub fn to_document(&self) -> PathDocument {
        PathDocument {
            dim: self.dim,
            times: self.times.clone(),
            matrices: self
                .mats
                .iter()
                .map(|m| m.transpose().as_slice().to_vec())
                .collect(),
        }
    }

    pub fn from_document(doc: &PathDocument) -> Result<Self> {
        let mats = doc
            .matrices
            .iter()
            .map(|rows| {
                if rows.len() != doc.dim * doc.dim {
                    return Err(Error::validation("matrix entry count mismatch"));
                }
                Ok(DMatrix::from_row_slice(doc.dim, doc.dim, rows))
            })
            .collect::<Result<Vec<_>>>()?;
        SymplecticPath::new(doc.times.clone(), mats)
    }
}

/// Wire format for paths: `{dim, times: [...], matrices: [[row-major], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathDocument {
    pub dim: usize,
    pub times: Vec<f64>,
    pub matrices: Vec<Vec<f64>>,
}

/// Local cubic (Lagrange, four nearest nodes) interpolation of the path
/// samples, with derivative. Falls back to lower degree near short paths.
pub struct PathInterp<'a> {
    path: &'a SymplecticPath,
}

impl<'a> PathInterp<'a> {
    /// Value of the interpolated path at `t` (skips the derivative work).
    pub fn value(&self, t: f64) -> DMatrix<f64> {
        let times = &self.path.times;
        let mats = &self.path.mats;
        let n = times.len();
        let dim = self.path.dim;

        let mut hi = match times.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
            Ok(i) => return mats[i].clone(),
            Err(i) => i.clamp(1, n - 1),
        };
        if hi >= n {
            hi = n - 1;
        }
        let lo = hi - 1;
        let start = lo.saturating_sub(1);
        let end = (hi + 1).min(n - 1);
        let idx: Vec<usize> = (start..=end).collect();

        let mut value = DMatrix::zeros(dim, dim);
        for &ia in &idx {
            let ta = times[ia];
            let mut l = 1.0;
            for &ib in &idx {
                if ia != ib {
                    l *= (t - times[ib]) / (ta - times[ib]);
                }
            }
            value += l * &mats[ia];
        }
        value
    }

    /// Value and time-derivative of the interpolated path at `t`.
    pub fn eval(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let times = &self.path.times;
        let mats = &self.path.mats;
        let n = times.len();
        let dim = self.path.dim;

        // locate the bracketing interval
        let mut hi = match times.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
            Ok(i) => i.max(1),
            Err(i) => i.clamp(1, n - 1),
        };
        if hi >= n {
            hi = n - 1;
        }
        let lo = hi - 1;

        // choose up to four nodes around [lo, hi]
        let start = lo.saturating_sub(1);
        let end = (hi + 1).min(n - 1);
        let idx: Vec<usize> = (start..=end).collect();
        let k = idx.len();

        let mut value = DMatrix::zeros(dim, dim);
        let mut deriv = DMatrix::zeros(dim, dim);
        for (a, &ia) in idx.iter().enumerate() {
            let ta = times[ia];
            // Lagrange basis L_a(t) and its derivative over the chosen nodes
            let mut l = 1.0;
            for (b, &ib) in idx.iter().enumerate() {
                if a != b {
                    l *= (t - times[ib]) / (ta - times[ib]);
                }
            }
            let mut dl = 0.0;
            for (b, &ib) in idx.iter().enumerate() {
                if a == b {
                    continue;
                }
                let mut term = 1.0 / (ta - times[ib]);
                for (c, &ic) in idx.iter().enumerate() {
                    if c != a && c != b {
                        term *= (t - times[ic]) / (ta - times[ic]);
                    }
                }
                dl += term;
            }
            let _ = k;
            value += l * &mats[ia];
            deriv += dl * &mats[ia];
        }
        (value, deriv)
    }
}

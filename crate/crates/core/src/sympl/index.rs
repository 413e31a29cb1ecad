//! Robbin-Salamon index of symplectic paths via the crossing form, the
//! iterate generator and the mean index.
//!
//! The index is the half-weighted signed count of crossings,
//! mu = 1/2 sign Gamma(0) + sum_interior sign Gamma + 1/2 sign Gamma(T).
//! Paths whose crossing structure is degenerate (a crossing form with kernel,
//! or a stretch of the path inside the crossing locus) are regularized by an
//! endpoint-preserving rotation bump psi(t) exp(delta eta(t) J0); the result
//! is accepted only when two bump sizes agree.

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::sympl::crossing::{detect, SIGMA_TOL};
use crate::sympl::SymplecticPath;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    CrossingForm,
    KanWinding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_samples: usize,
    pub dt_max: f64,
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: HalfInt,
    pub method: IndexMethod,
    pub resolution: Resolution,
}

const BUMP_DELTAS: [f64; 2] = [1e-6, 5e-7];

/// Robbin-Salamon index by crossing-form counting.
pub fn rs_index(path: &SymplecticPath) -> Result<IndexEstimate> {
    let raw = detect(path, 0.0, SIGMA_TOL)?;
    let dt_max = path
        .times()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);

    if !raw.degenerate() {
        return Ok(IndexEstimate {
            value: HalfInt::from_halves(raw.sum_halves()),
            method: IndexMethod::CrossingForm,
            resolution: Resolution {
                n_samples: path.len(),
                dt_max,
                regularized: false,
            },
        });
    }

    // degenerate structure: regularize with two bump sizes and demand
    // agreement
    let mut values = Vec::new();
    for &delta in &BUMP_DELTAS {
        let det = detect(path, delta, SIGMA_TOL)?;
        if !det.segments.is_empty() || det.ambiguous {
            let t = det.segments.first().map(|s| s.0).unwrap_or(0.0);
            return Err(Error::DegenerateCrossing { time: t });
        }
        values.push(det.sum_halves());
    }
    if values[0] != values[1] {
        let bad = raw
            .crossings
            .iter()
            .find(|c| !c.regular)
            .map(|c| c.time)
            .unwrap_or(0.0);
        return Err(Error::DegenerateCrossing { time: bad });
    }

    Ok(IndexEstimate {
        value: HalfInt::from_halves(values[0]),
        method: IndexMethod::CrossingForm,
        resolution: Resolution {
            n_samples: path.len(),
            dt_max,
            regularized: true,
        },
    })
}

/// Generator of iterates of a 1-periodic linearized flow: the path over
/// [0, k] is assembled from the period-one path by
/// psi(t + j) = psi(t) psi(1)^j.
pub struct IterateGenerator {
    period_path: SymplecticPath,
}

impl IterateGenerator {
    pub fn new(period_path: SymplecticPath) -> Result<Self> {
        if (period_path.t_end() - 1.0).abs() > 1e-12 {
            return Err(Error::validation(
                "iterate generator expects the period-one path on [0, 1]",
            ));
        }
        Ok(IterateGenerator { period_path })
    }

    pub fn period_path(&self) -> &SymplecticPath {
        &self.period_path
    }

    /// Path over [0, k].
    pub fn extend(&self, k: usize) -> Result<SymplecticPath> {
        if k == 0 {
            return Err(Error::validation("need at least one period"));
        }
        let base_times = self.period_path.times();
        let base_mats = self.period_path.samples();
        let monodromy = self.period_path.end_matrix().clone();

        let mut times = Vec::new();
        let mut mats = Vec::new();
        let mut power = nalgebra::DMatrix::identity(self.period_path.dim(), self.period_path.dim());
        for j in 0..k {
            let skip = if j == 0 { 0 } else { 1 };
            for (t, m) in base_times.iter().zip(base_mats.iter()).skip(skip) {
                times.push(j as f64 + t);
                mats.push(m * &power);
            }
            power = &monodromy * power;
        }
        SymplecticPath::new(times, mats)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanIndexReport {
    pub value: f64,
    /// (k, mu_RS over [0, k]) for every computed horizon.
    pub sequence: Vec<(usize, f64)>,
}

/// Mean index of a periodic generator: slope extrapolation of
/// mu_RS(psi|[0,k]) / k. The returned value is the difference quotient
/// between the horizons k_max/2 and k_max, which cancels the bounded defect.
pub fn mean_index(generator: &IterateGenerator, k_max: usize) -> Result<MeanIndexReport> {
    if k_max < 2 {
        return Err(Error::validation("mean index needs k_max >= 2"));
    }
    let mut sequence = Vec::new();
    let mut mu_at = std::collections::BTreeMap::new();
    let half = (k_max / 2).max(1);
    for &k in &[1usize, half, k_max] {
        if mu_at.contains_key(&k) {
            continue;
        }
        let path = generator.extend(k)?;
        let mu = rs_index(&path)?.value.to_f64();
        mu_at.insert(k, mu);
        sequence.push((k, mu));
    }
    let mu_half = mu_at[&half];
    let mu_full = mu_at[&k_max];
    let value = if k_max > half {
        (mu_full - mu_half) / (k_max - half) as f64
    } else {
        mu_full / k_max as f64
    };
    Ok(MeanIndexReport { value, sequence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;
    use nalgebra::DMatrix;
    use std::f64::consts::{PI, TAU};

    fn rotation_loop(k: i64, n: usize) -> SymplecticPath {
        SymplecticPath::rotation(2, k as f64 * TAU, 1.0, n).unwrap()
    }

    #[test]
    fn index_of_rotation_loops_is_two_k() {
        for k in 1..=5i64 {
            let path = rotation_loop(k, 1024 * k as usize);
            let est = rs_index(&path).unwrap();
            assert_eq!(est.value, HalfInt::from_int(2 * k), "k = {k}");
            assert!(!est.resolution.regularized);
        }
    }

    #[test]
    fn index_of_constant_identity_is_zero() {
        let path = SymplecticPath::constant_identity(2, 1.0, 32).unwrap();
        let est = rs_index(&path).unwrap();
        assert_eq!(est.value, HalfInt::ZERO);
        assert!(est.resolution.regularized);
    }

    #[test]
    fn index_of_shear_is_minus_half() {
        let path = SymplecticPath::shear(1.0, 1.0, 256).unwrap();
        let est = rs_index(&path).unwrap();
        assert_eq!(est.value, HalfInt::from_halves(-1));
        assert!(est.resolution.regularized);
    }

    #[test]
    fn index_of_time_reparametrized_rotation() {
        // psi(t) = R(pi t^2): same endpoints and homotopy class as R(pi t),
        // but with a degenerate start (psi' (0) = 0)
        let path = SymplecticPath::from_fn(1.0, 512, |t| rotation2(PI * t * t)).unwrap();
        let est = rs_index(&path).unwrap();
        assert_eq!(est.value, HalfInt::from_int(1));
    }

    #[test]
    fn index_of_half_turn() {
        let path = SymplecticPath::rotation(2, PI, 1.0, 256).unwrap();
        assert_eq!(rs_index(&path).unwrap().value, HalfInt::from_int(1));
    }

    #[test]
    fn catenation_adds_indices_for_rotations() {
        let p1 = rotation_loop(1, 1024);
        let p2 = rotation_loop(1, 1024);
        let cat = p1.catenate(&p2).unwrap();
        assert_eq!(rs_index(&cat).unwrap().value, HalfInt::from_int(4));
    }

    #[test]
    fn catenation_with_constant_path_keeps_index() {
        let p1 = SymplecticPath::rotation(2, PI, 1.0, 256).unwrap();
        let end = p1.end_matrix().clone();
        // constant path at the endpoint, rebased as catenate() requires
        let c = SymplecticPath::constant_identity(2, 0.5, 8).unwrap();
        let cat = p1.catenate(&c).unwrap();
        assert!((cat.end_matrix() - end).amax() < 1e-12);
        assert_eq!(rs_index(&cat).unwrap().value, HalfInt::from_int(1));
    }

    #[test]
    fn shear_up_then_down_has_index_zero() {
        let up = SymplecticPath::shear(1.0, 1.0, 256).unwrap();
        let down = up.reversed().unwrap();
        let cat = up.catenate(&down).unwrap();
        assert_eq!(rs_index(&cat).unwrap().value, HalfInt::ZERO);
    }

    #[test]
    fn rotation_then_shear_catenation() {
        // full loop followed by a shear: indices add to 2 - 1/2
        let loop1 = rotation_loop(1, 1024);
        let shear = SymplecticPath::shear(1.0, 1.0, 256).unwrap();
        let cat = loop1.catenate(&shear).unwrap();
        assert_eq!(rs_index(&cat).unwrap().value, HalfInt::from_halves(3));
    }

    #[test]
    fn mean_index_of_full_rotation_generator() {
        let gen = IterateGenerator::new(rotation_loop(1, 512)).unwrap();
        let report = mean_index(&gen, 8).unwrap();
        assert!((report.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mean_index_of_half_rotation_generator() {
        let period = SymplecticPath::rotation(2, PI, 1.0, 512).unwrap();
        let gen = IterateGenerator::new(period).unwrap();
        let report = mean_index(&gen, 8).unwrap();
        assert!((report.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_index_of_identity_generator() {
        let gen =
            IterateGenerator::new(SymplecticPath::constant_identity(2, 1.0, 16).unwrap()).unwrap();
        let report = mean_index(&gen, 8).unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn dim4_rotation_loop_index() {
        // block rotation in both planes: indices add over the planes
        let path = SymplecticPath::rotation(4, TAU, 1.0, 1024).unwrap();
        let est = rs_index(&path).unwrap();
        assert_eq!(est.value, HalfInt::from_int(4));
    }

    #[test]
    fn degenerate_start_dim4() {
        // generator vanishing at t = 0 in dim 4
        let path = SymplecticPath::from_fn(1.0, 512, |t| {
            crate::linalg::block_rotation(4, PI * t * t)
        })
        .unwrap();
        let est = rs_index(&path).unwrap();
        assert_eq!(est.value, HalfInt::from_int(2));
        assert!(est.resolution.regularized);
    }

    #[test]
    fn hyperbolic_path_index_zero() {
        let path = SymplecticPath::from_fn(1.0, 128, |t| {
            DMatrix::from_row_slice(2, 2, &[(0.6 * t).exp(), 0.0, 0.0, (-0.6 * t).exp()])
        })
        .unwrap();
        assert_eq!(rs_index(&path).unwrap().value, HalfInt::ZERO);
    }
}

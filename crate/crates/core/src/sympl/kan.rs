//! Iwasawa (KAN) factorization of Sp(2): rotation x diagonal scaling x upper
//! shear. The rotation angle of the factorization, lifted continuously along
//! a path, measures winding past the Maslov cycle; together with the
//! endpoint matrix it determines the Robbin-Salamon index of a dim-2 path
//! without any crossing enumeration.

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::linalg::rotation2;
use crate::sympl::index::{IndexEstimate, IndexMethod, Resolution};
use crate::sympl::{SymplecticMatrix, SymplecticPath};
use nalgebra::DMatrix;
use std::f64::consts::{PI, TAU};

/// Factors of m = rotation(angle) * [[scale, shear], [0, 1/scale]]: `shear`
/// is the upper-right entry of the triangular factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KanFactors {
    pub angle: f64,
    pub scale: f64,
    pub shear: f64,
}

impl KanFactors {
    pub fn compose(&self) -> DMatrix<f64> {
        let rot = rotation2(self.angle);
        let tri =
            DMatrix::from_row_slice(2, 2, &[self.scale, self.shear, 0.0, 1.0 / self.scale]);
        rot * tri
    }
}

/// KAN factors of a 2x2 symplectic matrix: angle = atan2(c, a),
/// scale = sqrt(a^2 + c^2), shear = (ab + cd)/sqrt(a^2 + c^2).
pub fn kan_decompose(m: &SymplecticMatrix) -> Result<KanFactors> {
    if m.dim() != 2 {
        return Err(Error::validation("KAN decomposition requires dim 2"));
    }
    Ok(kan_factors_raw(m.matrix()))
}

pub(crate) fn kan_factors_raw(m: &DMatrix<f64>) -> KanFactors {
    let a = m[(0, 0)];
    let b = m[(0, 1)];
    let c = m[(1, 0)];
    let d = m[(1, 1)];
    let r = (a * a + c * c).sqrt();
    KanFactors {
        angle: c.atan2(a),
        scale: r,
        shear: (a * b + c * d) / r,
    }
}

/// Continuous lift of the KAN angle along the path samples, by
/// nearest-branch continuation. Errors if the angle jumps by more than pi/2
/// between consecutive samples (grid too coarse to unwrap safely).
pub fn angle_lift(path: &SymplecticPath) -> Result<Vec<f64>> {
    if path.dim() != 2 {
        return Err(Error::validation("KAN angle lift requires dim 2"));
    }
    let mut lift = Vec::with_capacity(path.len());
    let mut prev_raw = 0.0f64;
    let mut offset = 0.0f64;
    for (i, m) in path.samples().iter().enumerate() {
        let raw = m[(1, 0)].atan2(m[(0, 0)]);
        if i == 0 {
            prev_raw = raw;
            lift.push(raw);
            continue;
        }
        let mut d = raw - prev_raw;
        while d > PI {
            d -= TAU;
        }
        while d < -PI {
            d += TAU;
        }
        if d.abs() > PI / 2.0 {
            return Err(Error::Resolution(format!(
                "KAN angle jumps by {:.3} rad between samples {} and {}",
                d.abs(),
                i - 1,
                i
            )));
        }
        offset += d;
        prev_raw = raw;
        lift.push(lift[0] + offset);
    }
    Ok(lift)
}

/// Real winding number of the path: (lifted angle at T minus at 0) / 2 pi.
pub fn kan_winding(path: &SymplecticPath) -> Result<f64> {
    let lift = angle_lift(path)?;
    Ok((lift[lift.len() - 1] - lift[0]) / TAU)
}

/// Robbin-Salamon index of a dim-2 path via the KAN-angle route.
///
/// The lifted angle determines the endpoint of the path in the universal
/// cover of Sp(2); since the index is invariant under homotopies with fixed
/// endpoints, it is a function of that endpoint alone. In Sp(2) one has
/// det(psi - id) = 2 - tr(psi), so the Maslov cycle is the locus
/// {tr = 2} and the classification runs over the trace:
///
/// * tr < 2: the cover splits into bands separated by the planes
///   {lift in 2 pi Z}; on the band with floor(lift / 2 pi) = k the index of
///   any path from the identity is 2k + 1.
/// * tr > 2: components sit around lift = 2 pi m; the index is 2m.
/// * tr = 2 with psi = id: loops; the index is 2m by the loop axiom.
/// * tr = 2, psi != id (parabolic): the point is one of the two edges of the
///   arc {tr > 2} around 2 pi m; the index is 2m -/+ 1/2 for the lower/upper
///   edge. Which edge is decided by comparing the angle against the arc
///   center atan2(scale * shear, scale + 1/scale).
pub fn rs_index_kan(path: &SymplecticPath) -> Result<IndexEstimate> {
    let lift = angle_lift(path)?;
    let theta = lift[lift.len() - 1];
    let end = path.end_matrix();
    let tr = end[(0, 0)] + end[(1, 1)];
    let id_dist = {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let e = end[(i, j)] - if i == j { 1.0 } else { 0.0 };
                d = d.max(e.abs());
            }
        }
        d
    };

    const DEG_TOL: f64 = 1e-9;
    let halves = if id_dist <= DEG_TOL {
        let m = (theta / TAU).round() as i64;
        4 * m
    } else if tr < 2.0 - DEG_TOL {
        let k = (theta / TAU).floor() as i64;
        4 * k + 2
    } else if tr > 2.0 + DEG_TOL {
        let m = (theta / TAU).round() as i64;
        4 * m
    } else {
        // parabolic endpoint
        let m = (theta / TAU).round() as i64;
        let frac = theta - TAU * m as f64;
        // tr = (scale + 1/scale) cos(angle) + shear sin(angle), so the arc
        // {tr > 2} on the angle circle is centered at atan2(shear, scale + 1/scale)
        let f = kan_factors_raw(end);
        let center = f.shear.atan2(f.scale + 1.0 / f.scale);
        if (frac - center).abs() < 1e-12 {
            return Err(Error::DegenerateCrossing {
                time: path.t_end(),
            });
        }
        if frac < center {
            4 * m - 1
        } else {
            4 * m + 1
        }
    };

    Ok(IndexEstimate {
        value: HalfInt::from_halves(halves),
        method: IndexMethod::KanWinding,
        resolution: Resolution {
            n_samples: path.len(),
            dt_max: path
                .times()
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(0.0, f64::max),
            regularized: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn kan_of_identity() {
        let f = kan_decompose(&SymplecticMatrix::identity(2)).unwrap();
        assert_eq!(f.angle, 0.0);
        assert_eq!(f.scale, 1.0);
        assert_eq!(f.shear, 0.0);
    }

    #[test]
    fn kan_of_quarter_rotation() {
        let m = SymplecticMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]))
            .unwrap();
        let f = kan_decompose(&m).unwrap();
        assert_relative_eq!(f.angle, FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(f.scale, 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.shear, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn kan_of_diagonal_scaling() {
        let m = SymplecticMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]))
            .unwrap();
        let f = kan_decompose(&m).unwrap();
        assert_eq!(f.angle, 0.0);
        assert_relative_eq!(f.scale, 2.0, epsilon = 1e-15);
        assert_eq!(f.shear, 0.0);
    }

    #[test]
    fn recomposition_identity_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let angle = rng.gen_range(-3.0..3.0);
            let scale = rng.gen_range(0.2..4.0);
            let shear = rng.gen_range(-3.0..3.0);
            let f = KanFactors {
                angle,
                scale,
                shear,
            };
            let m = f.compose();
            let g = kan_factors_raw(&m);
            let m2 = g.compose();
            assert!((m - m2).amax() < 1e-12);
        }
    }

    #[test]
    fn winding_of_full_rotation_loop() {
        let path = SymplecticPath::rotation(2, TAU, 1.0, 256).unwrap();
        assert_relative_eq!(kan_winding(&path).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn winding_of_constant_identity_is_zero() {
        let path = SymplecticPath::constant_identity(2, 1.0, 16).unwrap();
        assert_eq!(kan_winding(&path).unwrap(), 0.0);
    }

    #[test]
    fn winding_of_triple_loop() {
        let path = SymplecticPath::rotation(2, 3.0 * TAU, 1.0, 1024).unwrap();
        assert_relative_eq!(kan_winding(&path).unwrap(), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn coarse_grid_gets_resolution_error() {
        // 3 samples across a full turn: angle jumps by pi
        let path = SymplecticPath::from_fn(1.0, 100, |t| rotation2(TAU * t)).unwrap();
        let coarse = SymplecticPath::new(
            vec![0.0, 0.5, 1.0],
            vec![rotation2(0.0), rotation2(0.501 * TAU), rotation2(TAU)],
        );
        // the continuity guard already rejects such a coarse path
        assert!(coarse.is_err() || kan_winding(&coarse.unwrap()).is_err());
        assert!(kan_winding(&path).is_ok());
    }

    #[test]
    fn kan_index_of_rotation_loops() {
        for k in 1..=3i64 {
            let path = SymplecticPath::rotation(2, k as f64 * TAU, 1.0, 512 * k as usize).unwrap();
            let est = rs_index_kan(&path).unwrap();
            assert_eq!(est.value, HalfInt::from_int(2 * k));
        }
    }

    #[test]
    fn kan_index_of_half_turn() {
        let path = SymplecticPath::rotation(2, PI, 1.0, 256).unwrap();
        assert_eq!(rs_index_kan(&path).unwrap().value, HalfInt::from_int(1));
    }

    #[test]
    fn kan_index_of_constant_identity() {
        let path = SymplecticPath::constant_identity(2, 1.0, 16).unwrap();
        assert_eq!(rs_index_kan(&path).unwrap().value, HalfInt::ZERO);
    }

    #[test]
    fn kan_index_of_shear_is_minus_half() {
        let path = SymplecticPath::shear(1.0, 1.0, 128).unwrap();
        assert_eq!(
            rs_index_kan(&path).unwrap().value,
            HalfInt::from_halves(-1)
        );
    }

    #[test]
    fn kan_index_of_negative_shear_is_plus_half() {
        let path = SymplecticPath::shear(-1.0, 1.0, 128).unwrap();
        assert_eq!(rs_index_kan(&path).unwrap().value, HalfInt::from_halves(1));
    }

    #[test]
    fn kan_index_of_backward_half_turn() {
        let path = SymplecticPath::rotation(2, -PI, 1.0, 256).unwrap();
        assert_eq!(rs_index_kan(&path).unwrap().value, HalfInt::from_int(-1));
    }

    #[test]
    fn kan_index_of_hyperbolic_endpoint() {
        // pure stretching: ends positive hyperbolic near angle 0
        let path = SymplecticPath::from_fn(1.0, 64, |t| {
            DMatrix::from_row_slice(2, 2, &[(0.8 * t).exp(), 0.0, 0.0, (-0.8 * t).exp()])
        })
        .unwrap();
        assert_eq!(rs_index_kan(&path).unwrap().value, HalfInt::ZERO);
    }
}

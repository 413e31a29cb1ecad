//! Small dense linear-algebra helpers shared across the crate: the standard
//! complex structure, symplectic residuals, rotations, and compact SVD/eigen
//! utilities tuned for the 2x2 and 4x4 matrices that dominate the workload.

use nalgebra::{DMatrix, DVector};

/// Standard complex structure on R^{2n} in interleaved coordinates
/// (x_1, y_1, ..., x_n, y_n): block-diagonal copies of [[0,-1],[1,0]].
pub fn j0(dim: usize) -> DMatrix<f64> {
    assert!(dim % 2 == 0, "symplectic dimension must be even");
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k, 2 * k + 1)] = -1.0;
        j[(2 * k + 1, 2 * k)] = 1.0;
    }
    j
}

/// Applies J0 to a vector without materializing the matrix.
pub fn j0_apply(v: &DVector<f64>) -> DVector<f64> {
    let dim = v.len();
    let mut out = DVector::zeros(dim);
    for k in 0..dim / 2 {
        out[2 * k] = -v[2 * k + 1];
        out[2 * k + 1] = v[2 * k];
    }
    out
}

/// Standard symplectic form omega0(u, v) = <J0 u, v>.
pub fn omega0(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let mut s = 0.0;
    for k in 0..u.len() / 2 {
        s += u[2 * k] * v[2 * k + 1] - u[2 * k + 1] * v[2 * k];
    }
    s
}

/// Sup-norm of psi^T J0 psi - J0; zero iff psi is symplectic.
pub fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let j = j0(m.nrows());
    let r = m.transpose() * &j * m - &j;
    r.amax()
}

/// Sup-norm of (J0 A) - (J0 A)^T; zero iff A is in sp(2n).
pub fn sp_membership_residual(a: &DMatrix<f64>) -> f64 {
    let j = j0(a.nrows());
    let ja = &j * a;
    (&ja - ja.transpose()).amax()
}

/// Block rotation exp(theta * J0): rotation by `theta` in every (x_k, y_k)
/// plane.
pub fn block_rotation(dim: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
        m[(2 * k + 1, 2 * k + 1)] = c;
    }
    m
}

/// 2x2 rotation matrix.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    block_rotation(2, theta)
}

/// det(M - I) evaluated directly for 2x2/4x4, LU otherwise.
pub fn det_minus_id(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    match n {
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        4 => det4(&a),
        _ => a.determinant(),
    }
}

fn det4(a: &DMatrix<f64>) -> f64 {
    let m = |i: usize, j: usize| a[(i, j)];
    let s0 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    let s1 = m(0, 0) * m(1, 2) - m(0, 2) * m(1, 0);
    let s2 = m(0, 0) * m(1, 3) - m(0, 3) * m(1, 0);
    let s3 = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    let s4 = m(0, 1) * m(1, 3) - m(0, 3) * m(1, 1);
    let s5 = m(0, 2) * m(1, 3) - m(0, 3) * m(1, 2);
    let c5 = m(2, 2) * m(3, 3) - m(2, 3) * m(3, 2);
    let c4 = m(2, 1) * m(3, 3) - m(2, 3) * m(3, 1);
    let c3 = m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1);
    let c2 = m(2, 0) * m(3, 3) - m(2, 3) * m(3, 0);
    let c1 = m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0);
    let c0 = m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0);
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// Smallest singular value of M - I. Closed form for 2x2, SVD otherwise.
pub fn sigma_min_minus_id(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 2 {
        let a = m[(0, 0)] - 1.0;
        let b = m[(0, 1)];
        let c = m[(1, 0)];
        let d = m[(1, 1)] - 1.0;
        // singular values of [[a,b],[c,d]] via its Gram invariants
        let q = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let disc = (q * q - 4.0 * det * det).max(0.0).sqrt();
        let lo = 0.5 * (q - disc);
        lo.max(0.0).sqrt()
    } else {
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] -= 1.0;
        }
        a.svd(false, false).singular_values.min()
    }
}

/// Right-singular vectors of M - I whose singular values fall at or below
/// `threshold`: an orthonormal basis of the numerical kernel.
pub fn kernel_minus_id(m: &DMatrix<f64>, threshold: f64) -> Vec<DVector<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= threshold {
            basis.push(vt.row(i).transpose());
        }
    }
    basis
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = 0.5 * (m + m.transpose());
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Signature (#positive - #negative) of a symmetric matrix, counting
/// eigenvalues with |e| <= tol as zero. Also returns the rank deficit on the
/// given space (number of |e| <= tol).
pub fn form_signature(m: &DMatrix<f64>, tol: f64) -> (i64, usize) {
    let ev = symmetric_eigenvalues(m);
    let mut sig = 0i64;
    let mut zeros = 0usize;
    for e in ev {
        if e > tol {
            sig += 1;
        } else if e < -tol {
            sig -= 1;
        } else {
            zeros += 1;
        }
    }
    (sig, zeros)
}

/// Matrix exponential by scaling-and-squaring with a (6,6) Pade approximant.
/// Used by closed-form generators and by test oracles.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.amax();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a_scaled = a * 2f64.powi(-s);
    let id = DMatrix::identity(n, n);

    let c = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u = &a_scaled * (c[1] * &id + c[3] * &a2 + c[5] * &a4);
    let v = c[0] * &id + c[2] * &a2 + c[4] * &a4 + c[6] * &a6;
    let num = &v + &u;
    let den = &v - &u;
    let mut e = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is invertible for scaled input");
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j0_squares_to_minus_identity() {
        for dim in [2usize, 4, 6] {
            let j = j0(dim);
            let m = &j * &j + DMatrix::identity(dim, dim);
            assert!(m.amax() < 1e-15);
        }
    }

    #[test]
    fn rotations_are_symplectic() {
        for dim in [2usize, 4] {
            for theta in [0.3, -1.2, 7.0] {
                let r = block_rotation(dim, theta);
                assert!(symplectic_residual(&r) < 1e-14);
            }
        }
    }

    #[test]
    fn det_minus_id_matches_lu_on_4x4() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.2, 0.3, -0.1, 0.7, //
                -0.4, 0.9, 0.2, 0.0, //
                0.1, -0.2, 1.1, 0.5, //
                0.6, 0.0, -0.3, 0.8,
            ],
        );
        let direct = det_minus_id(&m);
        let lu = (m - DMatrix::identity(4, 4)).determinant();
        assert_relative_eq!(direct, lu, epsilon = 1e-12);
    }

    #[test]
    fn sigma_min_closed_form_matches_svd() {
        let m = DMatrix::from_row_slice(2, 2, &[1.5, 0.2, -0.3, 0.9]);
        let fast = sigma_min_minus_id(&m);
        let mut a = m.clone();
        a[(0, 0)] -= 1.0;
        a[(1, 1)] -= 1.0;
        let slow = a.svd(false, false).singular_values.min();
        assert_relative_eq!(fast, slow, epsilon = 1e-12);
    }

    #[test]
    fn expm_reproduces_rotation() {
        let gen = j0(2) * 0.73;
        let e = expm(&gen);
        let r = rotation2(0.73);
        assert!((e - r).amax() < 1e-12);
    }

    #[test]
    fn expm_of_sp_generator_is_symplectic() {
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 1.3, 0.4, -0.9]);
        assert!(sp_membership_residual(&a) < 1e-15);
        let e = expm(&a);
        assert!(symplectic_residual(&e) < 1e-12);
    }
}

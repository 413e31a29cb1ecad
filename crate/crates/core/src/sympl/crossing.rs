//! Detection and classification of crossings of a symplectic path with the
//! locus det(psi(t) - id) = 0, including tangential crossings and on-cycle
//! segments, plus the crossing form data that feeds the index.
//!
//! Strategy: scan det(psi - id) on a refined grid (sign changes and local
//! minima of |det| mark candidates, runs of vanishing det mark segments),
//! zoom into each candidate window with a fine det scan, then polish each
//! located crossing against the smallest singular value of psi - id, which
//! degenerates linearly at crossings of every multiplicity.

use crate::error::{Error, Result};
use crate::linalg::{det_minus_id, form_signature, j0, omega0, sigma_min_minus_id};
use crate::sympl::{PathInterp, SymplecticPath};
use nalgebra::{DMatrix, DVector};

/// Default scale factor for the sigma_min acceptance threshold.
pub const SIGMA_TOL: f64 = 1e-6;

const COARSE_REFINE: usize = 8;
const FINE_POINTS: usize = 2000;
const PLATEAU_FLOOR_REL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Crossing {
    pub time: f64,
    pub kernel_dim: usize,
    /// Signature (#positive - #negative eigenvalues) of the crossing form
    /// omega0(., dpsi .) restricted to ker(psi - id).
    pub signature: i64,
    pub at_endpoint: bool,
    /// False when the crossing form is degenerate on the kernel.
    pub regular: bool,
    /// Eigenvalues of the crossing form on an orthonormal kernel basis.
    pub gamma_eigs: Vec<f64>,
    /// Smallest singular value of psi(t) - id at the polished time.
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    /// Maximal intervals over which the path stays on the crossing locus.
    pub segments: Vec<(f64, f64)>,
    pub regularized: bool,
}

impl CrossingReport {
    pub fn all_regular(&self) -> bool {
        self.segments.is_empty() && self.crossings.iter().all(|c| c.regular)
    }
}

/// Evaluates the (optionally rotation-bump regularized) path between samples.
///
/// With `delta != 0` the path is replaced by psi(t) * exp(delta eta(t) J0)
/// with eta(t) = t (T - t) / T. The bump vanishes at both endpoints, so the
/// perturbed path has the same endpoints and the same index, while generic
/// degenerate crossings become regular.
pub(crate) struct Evaluator<'a> {
    interp: PathInterp<'a>,
    dim: usize,
    t_end: f64,
    delta: f64,
    j: DMatrix<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(path: &'a SymplecticPath, delta: f64) -> Self {
        Evaluator {
            interp: path.interpolant(),
            dim: path.dim(),
            t_end: path.t_end(),
            delta,
            j: j0(path.dim()),
        }
    }

    fn bump(&self, t: f64) -> (f64, f64) {
        let t_end = self.t_end;
        (t * (t_end - t) / t_end, (t_end - 2.0 * t) / t_end)
    }

    pub fn value(&self, t: f64) -> DMatrix<f64> {
        let m = self.interp.value(t);
        if self.delta == 0.0 {
            return m;
        }
        let (eta, _) = self.bump(t);
        let r = crate::linalg::block_rotation(self.dim, self.delta * eta);
        m * r
    }

    pub fn eval(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let (m, dm) = self.interp.eval(t);
        if self.delta == 0.0 {
            return (m, dm);
        }
        let (eta, deta) = self.bump(t);
        let r = crate::linalg::block_rotation(self.dim, self.delta * eta);
        let value = &m * &r;
        // d/dt [m R(delta eta)] = dm R + m R J0 delta eta'
        let deriv = &dm * &r + &value * &self.j * (self.delta * deta);
        (value, deriv)
    }

    pub fn det(&self, t: f64) -> f64 {
        det_minus_id(&self.value(t))
    }

    pub fn sigma(&self, t: f64) -> f64 {
        sigma_min_minus_id(&self.value(t))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Detection {
    pub crossings: Vec<Crossing>,
    pub segments: Vec<(f64, f64)>,
    /// Kernel extraction saw singular values too close to the threshold.
    pub ambiguous: bool,
}

impl Detection {
    pub fn degenerate(&self) -> bool {
        self.ambiguous
            || !self.segments.is_empty()
            || self.crossings.iter().any(|c| !c.regular)
    }

    /// Index contribution in halves: full signature at interior crossings,
    /// half weight at endpoint crossings.
    pub fn sum_halves(&self) -> i64 {
        self.crossings
            .iter()
            .map(|c| if c.at_endpoint { c.signature } else { 2 * c.signature })
            .sum()
    }
}

/// Locates and classifies the crossings of `path` (bump-regularized when
/// `delta != 0`), with acceptance threshold `sigma_tol` times the path scale.
pub(crate) fn detect(path: &SymplecticPath, delta: f64, sigma_tol: f64) -> Result<Detection> {
    let dim = path.dim();
    let t_end = path.t_end();
    let ev = Evaluator::new(path, delta);
    let id = DMatrix::identity(dim, dim);

    let mat_scale = path
        .samples()
        .iter()
        .map(|m| (m - &id).amax())
        .fold(1.0f64, f64::max);
    // A regularized path can approach the crossing locus to distance of
    // order delta without crossing it; genuine crossings polish to the
    // interpolation floor, so the acceptance threshold must sit well below
    // delta in that case.
    let tau_cross = if delta == 0.0 {
        sigma_tol * mat_scale
    } else {
        (delta / 20.0) * mat_scale
    };
    let t_eps = 1e-8 * t_end.max(1.0);
    // Cubic interpolation reproduces the path to roughly the square of the
    // largest second difference of the samples; singular values below that
    // floor are indistinguishable from zero.
    let sd = path.second_difference();
    let interp_floor = sd * sd;

    // ---- coarse scan -------------------------------------------------
    let mut coarse_ts = Vec::new();
    for w in path.times().windows(2) {
        let h = (w[1] - w[0]) / COARSE_REFINE as f64;
        for j in 0..COARSE_REFINE {
            coarse_ts.push(w[0] + j as f64 * h);
        }
    }
    coarse_ts.push(t_end);
    let coarse_det: Vec<f64> = coarse_ts.iter().map(|&t| ev.det(t)).collect();
    let det_scale = coarse_det.iter().fold(1.0f64, |a, d| a.max(d.abs()));
    let plateau_floor = PLATEAU_FLOOR_REL * det_scale;

    // Runs of vanishing det: long runs are on-cycle segments, short runs
    // (e.g. an isolated grid point landing exactly on a crossing) become
    // candidate windows below. The bump makes det small of necessity near
    // the endpoints, so segment classification only applies to the raw path.
    let raw = delta == 0.0;
    let below: Vec<bool> = if raw {
        coarse_det.iter().map(|d| d.abs() < plateau_floor).collect()
    } else {
        vec![false; coarse_det.len()]
    };
    let mut segments = Vec::new();
    let mut pinpoint_windows: Vec<(f64, f64)> = Vec::new();
    {
        let n = below.len();
        let mut handle_run = |s: usize, e: usize| {
            // run covers indices s..=e
            if e - s + 1 > COARSE_REFINE {
                segments.push((coarse_ts[s], coarse_ts[e]));
            } else {
                let lo = coarse_ts[s.saturating_sub(1)];
                let hi = coarse_ts[(e + 1).min(n - 1)];
                pinpoint_windows.push((lo, hi));
            }
        };
        let mut run_start: Option<usize> = None;
        for i in 0..n {
            match (below[i], run_start) {
                (true, None) => run_start = Some(i),
                (false, Some(s)) => {
                    handle_run(s, i - 1);
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            handle_run(s, n - 1);
        }
    }
    fn in_segment(segments: &[(f64, f64)], t: f64, t_eps: f64) -> bool {
        segments
            .iter()
            .any(|&(a, b)| t > a + t_eps && t < b - t_eps)
    }

    // ---- candidate windows --------------------------------------------
    let mut windows: Vec<(f64, f64)> = pinpoint_windows;
    let n = coarse_ts.len();
    for i in 1..n {
        if below[i - 1] || below[i] {
            continue;
        }
        if coarse_det[i - 1] * coarse_det[i] < 0.0 {
            windows.push((coarse_ts[i - 1], coarse_ts[i]));
        }
    }
    for i in 1..n - 1 {
        if below[i - 1] || below[i] || below[i + 1] {
            continue;
        }
        let d = coarse_det[i].abs();
        if d <= coarse_det[i - 1].abs() && d <= coarse_det[i + 1].abs() && d < 1e-4 * det_scale {
            windows.push((coarse_ts[i - 1], coarse_ts[i + 1]));
        }
    }
    // the bump can shuffle crossings near the endpoints; always inspect them
    let k_end = COARSE_REFINE.min(n - 1);
    windows.push((0.0, coarse_ts[k_end]));
    windows.push((coarse_ts[n - 1 - k_end], t_end));

    if std::env::var("BIRKHOFF_DEBUG_CROSSINGS").is_ok() {
        eprintln!("windows before merge: {:?}", windows);
    }
    windows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if w.0 <= last.1 => last.1 = last.1.max(w.1),
            _ => merged.push(w),
        }
    }

    // ---- zoom + polish -------------------------------------------------
    let mut found: Vec<(f64, f64)> = Vec::new(); // (time, sigma)
    for (a, b) in merged {
        if b - a <= 0.0 {
            continue;
        }
        let h = (b - a) / FINE_POINTS as f64;
        let fine: Vec<f64> = (0..=FINE_POINTS)
            .map(|i| ev.det(a + i as f64 * h))
            .collect();

        // fine plateau (raw path only)
        if raw {
            let frac_below = fine.iter().filter(|d| d.abs() < plateau_floor).count() as f64
                / fine.len() as f64;
            if frac_below > 0.3 {
                let first = (0..fine.len())
                    .find(|&i| fine[i].abs() < plateau_floor)
                    .unwrap();
                let last = (0..fine.len())
                    .rfind(|&i| fine[i].abs() < plateau_floor)
                    .unwrap();
                segments.push((a + first as f64 * h, a + last as f64 * h));
                continue;
            }
        }

        let mut brackets: Vec<(f64, f64)> = Vec::new();
        for i in 1..=FINE_POINTS {
            if fine[i - 1] * fine[i] < 0.0 {
                brackets.push((a + (i - 1) as f64 * h, a + i as f64 * h));
            }
        }
        for i in 1..FINE_POINTS {
            let d = fine[i].abs();
            if d <= fine[i - 1].abs() && d <= fine[i + 1].abs() && d < 1e-4 * det_scale {
                brackets.push((a + (i - 1) as f64 * h, a + (i + 1) as f64 * h));
            }
        }

        for (lo, hi) in brackets {
            // polish on sigma_min, which has a simple zero at every crossing
            let (t_star, s_star) = golden_min(|t| ev.sigma(t), lo, hi, 1e-14 * t_end.max(1.0));
            if std::env::var("BIRKHOFF_DEBUG_CROSSINGS").is_ok() {
                eprintln!(
                    "bracket ({lo:.9},{hi:.9}) -> t*={t_star:.9} sigma={s_star:.3e} tau={tau_cross:.3e}"
                );
            }
            if s_star < tau_cross && !in_segment(&segments, t_star, t_eps) {
                found.push((t_star, s_star));
            }
        }
    }

    // dedupe and fold endpoint hits into the endpoints themselves
    found.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut interior: Vec<(f64, f64)> = Vec::new();
    for (t, s) in found {
        if t < t_eps || t > t_end - t_eps {
            continue;
        }
        match interior.last_mut() {
            Some(last) if (t - last.0).abs() < 1e-10 * t_end.max(1.0) => {
                if s < last.1 {
                    *last = (t, s);
                }
            }
            _ => interior.push((t, s)),
        }
    }

    // ---- classify -------------------------------------------------------
    let mut ambiguous = false;
    let mut crossings = Vec::new();

    let mut classify = |t: f64, at_endpoint: bool, crossings: &mut Vec<Crossing>| {
        let (m, dm) = ev.eval(t);
        let sigma = sigma_min_minus_id(&m);
        let dist = (&m - &id).amax();
        let tau_ker = if t < t_eps {
            // the path starts at the identity by construction
            (3.0 * sigma).max(1e-7)
        } else {
            (3.0 * sigma).max(1e-8 * dist).max(1e-9)
        };
        let mut a = m.clone();
        for i in 0..dim {
            a[(i, i)] -= 1.0;
        }
        let svals = a.svd(false, false).singular_values;
        if svals.iter().any(|&s| s > tau_ker && s < 10.0 * tau_ker) {
            if std::env::var("BIRKHOFF_DEBUG_CROSSINGS").is_ok() {
                eprintln!("ambiguous svals at t={t:.9}: {svals:?} tau_ker={tau_ker:.3e}");
            }
            ambiguous = true;
        }
        let basis = crate::linalg::kernel_minus_id(&m, tau_ker);
        let k = basis.len();
        if k == 0 {
            if std::env::var("BIRKHOFF_DEBUG_CROSSINGS").is_ok() {
                eprintln!("empty kernel at t={t:.9}: svals {svals:?} tau_ker={tau_ker:.3e}");
            }
            ambiguous = true;
            return;
        }
        let mut gram = DMatrix::zeros(k, k);
        for p in 0..k {
            let dv: DVector<f64> = &dm * &basis[p];
            for q in 0..k {
                gram[(q, p)] = omega0(&basis[q], &dv);
            }
        }
        let sym = 0.5 * (&gram + gram.transpose());
        let gtol = 1e-7 * sym.amax().max(1.0);
        let (signature, zeros) = form_signature(&sym, gtol);
        let gamma_eigs = crate::linalg::symmetric_eigenvalues(&sym);
        crossings.push(Crossing {
            time: t,
            kernel_dim: k,
            signature,
            at_endpoint,
            regular: zeros == 0,
            gamma_eigs,
            sigma,
        });
    };

    classify(0.0, true, &mut crossings);
    for (t, _) in &interior {
        classify(*t, false, &mut crossings);
    }
    if ev.sigma(t_end) < tau_cross {
        classify(t_end, true, &mut crossings);
    }

    // merge overlapping segments
    segments.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut seg_merged: Vec<(f64, f64)> = Vec::new();
    for s in segments {
        match seg_merged.last_mut() {
            Some(last) if s.0 <= last.1 + t_eps => last.1 = last.1.max(s.1),
            _ => seg_merged.push(s),
        }
    }

    Ok(Detection {
        crossings,
        segments: seg_merged,
        ambiguous,
    })
}

/// Golden-section minimization of a unimodal-ish scalar function.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Public crossing report for a path, without regularization: the raw
/// crossing structure, including degenerate entries and on-cycle segments.
pub fn crossings(path: &SymplecticPath, sigma_tol: f64) -> Result<CrossingReport> {
    if !(sigma_tol > 0.0) {
        return Err(Error::validation("sigma tolerance must be positive"));
    }
    let det = detect(path, 0.0, sigma_tol)?;
    Ok(CrossingReport {
        crossings: det.crossings,
        segments: det.segments,
        regularized: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn rotation_loop_has_endpoint_crossings_with_positive_form() {
        let path = SymplecticPath::rotation(2, TAU, 1.0, 1024).unwrap();
        let rep = crossings(&path, SIGMA_TOL).unwrap();
        assert_eq!(rep.crossings.len(), 2);
        for c in &rep.crossings {
            assert!(c.at_endpoint);
            assert_eq!(c.kernel_dim, 2);
            assert_eq!(c.signature, 2);
            assert!(c.regular);
        }
        assert!(rep.segments.is_empty());
    }

    #[test]
    fn double_loop_has_interior_crossing() {
        let path = SymplecticPath::rotation(2, 2.0 * TAU, 1.0, 2048).unwrap();
        let rep = crossings(&path, SIGMA_TOL).unwrap();
        assert_eq!(rep.crossings.len(), 3);
        let mid = &rep.crossings[1];
        assert!(!mid.at_endpoint);
        assert!((mid.time - 0.5).abs() < 1e-7);
        assert_eq!(mid.signature, 2);
    }

    #[test]
    fn constant_identity_is_one_degenerate_segment() {
        let path = SymplecticPath::constant_identity(2, 1.0, 32).unwrap();
        let rep = crossings(&path, SIGMA_TOL).unwrap();
        assert_eq!(rep.segments.len(), 1);
        assert!(!rep.all_regular());
        // both endpoint entries are degenerate with zero signature
        for c in &rep.crossings {
            assert_eq!(c.kernel_dim, 2);
            assert_eq!(c.signature, 0);
            assert!(!c.regular);
        }
    }

    #[test]
    fn shear_start_has_kernel_two_signature_minus_one() {
        let path = SymplecticPath::shear(1.0, 1.0, 256).unwrap();
        let rep = crossings(&path, SIGMA_TOL).unwrap();
        let c0 = &rep.crossings[0];
        assert_eq!(c0.time, 0.0);
        assert_eq!(c0.kernel_dim, 2);
        assert_eq!(c0.signature, -1);
        assert!(!c0.regular);
        // the shear path sits inside the crossing locus throughout
        assert!(!rep.segments.is_empty());
    }

    #[test]
    fn hyperbolic_path_start_has_zero_signature() {
        let path = SymplecticPath::from_fn(1.0, 128, |t| {
            nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[(0.5 * t).exp(), 0.0, 0.0, (-0.5 * t).exp()],
            )
        })
        .unwrap();
        let rep = crossings(&path, SIGMA_TOL).unwrap();
        assert_eq!(rep.crossings.len(), 1);
        assert_eq!(rep.crossings[0].signature, 0);
    }
}

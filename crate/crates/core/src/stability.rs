//! Linear stability machinery: characteristic polynomial, Routh–Hurwitz
//! tests, eigenvalue computation, and the closed-form classification of
//! the prey-only equilibrium.
//!
//! For a 4×4 Jacobian `J` the characteristic polynomial is written as
//!
//! ```text
//! lambda^4 + eps1 lambda^3 + eps2 lambda^2 + eps3 lambda + eps4
//! ```
//!
//! with `eps1 = -tr J`, `eps2` the sum of 2×2 principal minors,
//! `eps3` minus the sum of 3×3 principal minors and `eps4 = det J`.
//! The Routh–Hurwitz conditions for all roots to have negative real part
//! are the four strict inequalities
//!
//! ```text
//! eps1 > 0,   eps4 > 0,   eps1 eps2 - eps3 > 0,
//! Delta := eps1 eps2 eps3 - eps3^2 - eps1^2 eps4 > 0.
//! ```
//!
//! `Delta` doubles as the Hopf test function: on a curve of equilibria a
//! simple zero of `Delta` (with the first and third conditions holding)
//! marks a conjugate pair crossing the imaginary axis.
//!
//! Eigenvalues are computed as roots of the characteristic quartic via
//! the companion matrix and an implicit double-shift QR iteration,
//! followed by one guarded Newton polish per root and exact
//! conjugate-pair symmetrization.

use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

use crate::model::Params;

/// Coefficients of the monic characteristic quartic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoeffs {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
}

/// The four Routh–Hurwitz quantities, in test order
/// `[eps1, eps4, eps1*eps2 - eps3, Delta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouthHurwitz {
    pub tests: [f64; 4],
    /// All four tests strictly positive.
    pub stable: bool,
}

/// Eigenvalues sorted by descending real part, then descending imaginary
/// part; complex values occur in exact conjugate pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSpectrum {
    pub values: [Complex64; 4],
}

/// Qualitative type of an equilibrium as seen by the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// All Routh–Hurwitz tests positive: locally asymptotically stable.
    Stable,
    /// Eigenvalues with both signs of real part bounded away from zero.
    Saddle,
    /// A conjugate pair sits on (numerically: within 1e-9 of) the
    /// imaginary axis — a Hopf candidate.
    CenterCandidate,
    /// Not stable, with no sign change and no critical pair.
    Unstable,
}

/// Full linear-stability diagnostic at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub coeffs: CharCoeffs,
    pub rh: RouthHurwitz,
    pub spectrum: EigenSpectrum,
    pub verdict: StabilityVerdict,
}

/// Planar-style verdict for the prey-only equilibrium `(1, 0, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreyOnlyVerdict {
    Stable,
    Unstable,
    Saddle,
    Center,
}

/// Closed-form classification of the prey-only equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreyOnlyReport {
    /// Determinant of the Jacobian at `(1, 0, 0, 0)` in closed form.
    pub det: f64,
    /// Trace of the Jacobian at `(1, 0, 0, 0)`.
    pub trace: f64,
    /// Adult-predation threshold
    /// `(b + d1)(a3 - c - d2) d3 / (b u (a3 - c))`;
    /// undefined when `a3 = c`.
    pub threshold: Option<f64>,
    /// Which of the four closed-form stability cases the parameters
    /// satisfy, if any.
    pub case: Option<u8>,
    pub verdict: PreyOnlyVerdict,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilityError {
    #[error("QR iteration did not converge within the sweep limit")]
    NoConvergence,
}

impl CharCoeffs {
    /// Characteristic coefficients of `det(lambda I - m)` via exact
    /// principal-minor sums (no factorization round-off).
    pub fn of_matrix(m: &Matrix4<f64>) -> CharCoeffs {
        let mut sum2 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                sum2 += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
            }
        }
        let mut sum3 = 0.0;
        for k in 0..4 {
            let idx: [usize; 3] = match k {
                0 => [1, 2, 3],
                1 => [0, 2, 3],
                2 => [0, 1, 3],
                _ => [0, 1, 2],
            };
            sum3 += det3(m, &idx);
        }
        CharCoeffs {
            eps1: -m.trace(),
            eps2: sum2,
            eps3: -sum3,
            eps4: det4(m),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.eps1, self.eps2, self.eps3, self.eps4]
    }

    /// Horner evaluation of the quartic at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (((z + self.eps1) * z + self.eps2) * z + self.eps3) * z + self.eps4
    }

    /// Derivative of the quartic at a complex point.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        ((4.0 * z + 3.0 * self.eps1) * z + 2.0 * self.eps2) * z + self.eps3
    }
}

fn det3(m: &Matrix4<f64>, idx: &[usize; 3]) -> f64 {
    let a = |r: usize, c: usize| m[(idx[r], idx[c])];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

fn det4(m: &Matrix4<f64>) -> f64 {
    let mut det = 0.0;
    let mut sign = 1.0;
    for c in 0..4 {
        let cols: [usize; 3] = match c {
            0 => [1, 2, 3],
            1 => [0, 2, 3],
            2 => [0, 1, 3],
            _ => [0, 1, 2],
        };
        let a = |r: usize, cc: usize| m[(r + 1, cols[cc])];
        let minor = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        det += sign * m[(0, c)] * minor;
        sign = -sign;
    }
    det
}

/// Routh–Hurwitz test vector `[eps1, eps4, eps1*eps2 - eps3, Delta]`.
pub fn routh_hurwitz(c: &CharCoeffs) -> RouthHurwitz {
    let third = c.eps1 * c.eps2 - c.eps3;
    let tests = [c.eps1, c.eps4, third, hopf_discriminant(c)];
    RouthHurwitz {
        tests,
        stable: tests.iter().all(|&t| t > 0.0),
    }
}

/// `Delta = eps1 eps2 eps3 - eps3^2 - eps1^2 eps4`, the quantity whose
/// simple zeros (under `eps1 > 0`, `eps1 eps2 - eps3 > 0`) mark Hopf
/// points.
pub fn hopf_discriminant(c: &CharCoeffs) -> f64 {
    c.eps1 * c.eps2 * c.eps3 - c.eps3 * c.eps3 - c.eps1 * c.eps1 * c.eps4
}

/// Eigenvalues of a real 4×4 matrix through its characteristic quartic.
pub fn eigenvalues(m: &Matrix4<f64>) -> Result<EigenSpectrum, StabilityError> {
    eigenvalues_of_coeffs(&CharCoeffs::of_matrix(m))
}

/// Roots of the monic quartic given by `c`, as an [`EigenSpectrum`].
pub fn eigenvalues_of_coeffs(c: &CharCoeffs) -> Result<EigenSpectrum, StabilityError> {
    let companion = Matrix4::new(
        -c.eps1, -c.eps2, -c.eps3, -c.eps4, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let raw = hessenberg_eigenvalues(companion)?;

    // One guarded Newton step per root against the quartic itself, then
    // exact conjugate symmetrization: only the upper member of each pair
    // is polished and its partner is set to the literal conjugate.
    let mut values: Vec<Complex64> = Vec::with_capacity(4);
    for &e in &raw {
        if e.im == 0.0 {
            values.push(polish_root(c, e));
        } else if e.im > 0.0 {
            let p = polish_root(c, e);
            values.push(p);
            values.push(p.conj());
        }
    }
    debug_assert_eq!(values.len(), 4);
    values.sort_by(|p, q| q.re.total_cmp(&p.re).then(q.im.total_cmp(&p.im)));
    Ok(EigenSpectrum {
        values: [values[0], values[1], values[2], values[3]],
    })
}

fn polish_root(c: &CharCoeffs, z: Complex64) -> Complex64 {
    let p = c.eval(z);
    let dp = c.eval_derivative(z);
    if dp.norm() == 0.0 {
        return z;
    }
    let z1 = z - p / dp;
    if c.eval(z1).norm() <= p.norm() {
        z1
    } else {
        z
    }
}

/// Implicit double-shift QR on an upper-Hessenberg 4×4.
fn hessenberg_eigenvalues(mut h: Matrix4<f64>) -> Result<Vec<Complex64>, StabilityError> {
    const MAX_SWEEPS: usize = 500;
    let mut eigs: Vec<Complex64> = Vec::with_capacity(4);
    let mut hi: usize = 4;
    let mut sweeps = 0usize;
    let mut stagnation = 0usize;

    while hi > 0 {
        // Start of the trailing irreducible block: zero any negligible
        // subdiagonal entry on the way up.
        let mut lo = hi - 1;
        while lo > 0 {
            let scale = h[(lo - 1, lo - 1)].abs() + h[(lo, lo)].abs();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[(lo, lo - 1)].abs() <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = 0.0;
                break;
            }
            lo -= 1;
        }

        match hi - lo {
            1 => {
                eigs.push(Complex64::new(h[(lo, lo)], 0.0));
                hi -= 1;
                stagnation = 0;
            }
            2 => {
                let (e1, e2) = eig2(
                    h[(lo, lo)],
                    h[(lo, lo + 1)],
                    h[(lo + 1, lo)],
                    h[(lo + 1, lo + 1)],
                );
                eigs.push(e1);
                eigs.push(e2);
                hi -= 2;
                stagnation = 0;
            }
            _ => {
                sweeps += 1;
                stagnation += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(StabilityError::NoConvergence);
                }
                francis_sweep(&mut h, lo, hi, stagnation);
            }
        }
    }
    Ok(eigs)
}

/// Eigenvalues of `[[a, b], [c, d]]`.
fn eig2(a: f64, b: f64, c: f64, d: f64) -> (Complex64, Complex64) {
    let mid = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (Complex64::new(mid + r, 0.0), Complex64::new(mid - r, 0.0))
    } else {
        let w = (-disc).sqrt();
        (Complex64::new(mid, w), Complex64::new(mid, -w))
    }
}

/// One Francis double-shift bulge chase on the block `lo..hi` of `h`.
/// Every tenth sweep without a deflation substitutes the classical
/// exceptional shift to break symmetry-induced stalls.
fn francis_sweep(h: &mut Matrix4<f64>, lo: usize, hi: usize, stagnation: usize) {
    let m = hi - 1;
    let (s, t) = if stagnation % 10 == 0 {
        let w = h[(m, m - 1)].abs() + h[(m - 1, m - 2)].abs();
        (1.5 * w, w * w)
    } else {
        (
            h[(m - 1, m - 1)] + h[(m, m)],
            h[(m - 1, m - 1)] * h[(m, m)] - h[(m - 1, m)] * h[(m, m - 1)],
        )
    };

    // First column of (H - aI)(H - bI) with a + b = s, ab = t.
    let mut x = h[(lo, lo)] * h[(lo, lo)] + h[(lo, lo + 1)] * h[(lo + 1, lo)]
        - s * h[(lo, lo)]
        + t;
    let mut y = h[(lo + 1, lo)] * (h[(lo, lo)] + h[(lo + 1, lo + 1)] - s);
    let mut z = h[(lo + 2, lo + 1)] * h[(lo + 1, lo)];

    for k in lo..hi - 2 {
        if let Some((v, beta)) = householder([x, y, z]) {
            // Left: rows k..k+2 over all columns.
            for j in 0..4 {
                let w = v[0] * h[(k, j)] + v[1] * h[(k + 1, j)] + v[2] * h[(k + 2, j)];
                h[(k, j)] -= beta * v[0] * w;
                h[(k + 1, j)] -= beta * v[1] * w;
                h[(k + 2, j)] -= beta * v[2] * w;
            }
            // Right: columns k..k+2 over all rows.
            for i in 0..4 {
                let w = v[0] * h[(i, k)] + v[1] * h[(i, k + 1)] + v[2] * h[(i, k + 2)];
                h[(i, k)] -= beta * v[0] * w;
                h[(i, k + 1)] -= beta * v[1] * w;
                h[(i, k + 2)] -= beta * v[2] * w;
            }
        }
        x = h[(k + 1, k)];
        y = h[(k + 2, k)];
        z = if k + 3 < hi { h[(k + 3, k)] } else { 0.0 };
    }

    // Final 2-element reflector on rows hi-2, hi-1.
    if let Some((v, beta)) = householder2([x, y]) {
        let k = hi - 2;
        for j in 0..4 {
            let w = v[0] * h[(k, j)] + v[1] * h[(k + 1, j)];
            h[(k, j)] -= beta * v[0] * w;
            h[(k + 1, j)] -= beta * v[1] * w;
        }
        for i in 0..4 {
            let w = v[0] * h[(i, k)] + v[1] * h[(i, k + 1)];
            h[(i, k)] -= beta * v[0] * w;
            h[(i, k + 1)] -= beta * v[1] * w;
        }
    }
}

fn householder(q: [f64; 3]) -> Option<([f64; 3], f64)> {
    let scale = q[0].abs() + q[1].abs() + q[2].abs();
    if scale == 0.0 {
        return None;
    }
    let x = q[0] / scale;
    let y = q[1] / scale;
    let z = q[2] / scale;
    let alpha = -x.signum() * (x * x + y * y + z * z).sqrt();
    let v = [x - alpha, y, z];
    let vtv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if vtv == 0.0 {
        None
    } else {
        Some((v, 2.0 / vtv))
    }
}

fn householder2(q: [f64; 2]) -> Option<([f64; 2], f64)> {
    let scale = q[0].abs() + q[1].abs();
    if scale == 0.0 {
        return None;
    }
    let x = q[0] / scale;
    let y = q[1] / scale;
    let alpha = -x.signum() * (x * x + y * y).sqrt();
    let v = [x - alpha, y];
    let vtv = v[0] * v[0] + v[1] * v[1];
    if vtv == 0.0 {
        None
    } else {
        Some((v, 2.0 / vtv))
    }
}

impl EigenSpectrum {
    /// Largest real part.
    pub fn max_re(&self) -> f64 {
        self.values
            .iter()
            .map(|e| e.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The member with positive imaginary part of the complex pair whose
    /// real part is smallest in magnitude, if any pair exists.
    pub fn critical_pair(&self) -> Option<Complex64> {
        self.values
            .iter()
            .filter(|e| e.im > 0.0)
            .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
            .copied()
    }
}

/// Full stability diagnostic of a Jacobian.
pub fn classify(m: &Matrix4<f64>) -> Result<StabilityReport, StabilityError> {
    let coeffs = CharCoeffs::of_matrix(m);
    let rh = routh_hurwitz(&coeffs);
    let spectrum = eigenvalues_of_coeffs(&coeffs)?;
    let verdict = if rh.stable {
        StabilityVerdict::Stable
    } else if spectrum
        .values
        .iter()
        .any(|e| e.re.abs() < 1e-9 && e.im.abs() > 1e-9)
    {
        StabilityVerdict::CenterCandidate
    } else if spectrum.values.iter().any(|e| e.re > 1e-9)
        && spectrum.values.iter().any(|e| e.re < -1e-9)
    {
        StabilityVerdict::Saddle
    } else {
        StabilityVerdict::Unstable
    };
    Ok(StabilityReport {
        coeffs,
        rh,
        spectrum,
        verdict,
    })
}

/// Closed-form stability analysis of the prey-only equilibrium
/// `(1, 0, 0, 0)`.
///
/// The Jacobian there is block triangular: the prey direction
/// contributes the eigenvalue `-1` and the predator block decides the
/// verdict, summarized by the determinant and trace of the full matrix:
///
/// ```text
/// det = d1 (c + d2) d3 + b (c d3 + d2 d3 - a2 c u)
///       - a3 (d1 d3 + b (d3 - a2 u))
/// tr  = a3 - (1 + b + d1 + c + d2 + d3)
/// ```
///
/// `case` reports which of the four sufficient parameter regions for
/// stability holds (1: `a3 < c` with adult predation below the
/// threshold; 2: `a3 = c`; 3: `c < a3 < 1 + c` with the stated predation
/// and death-rate side conditions; 4: `a3 > 1 + c` bounded by the trace
/// condition), or `None` when the parameters match no region.
pub fn classify_prey_only(p: &Params) -> PreyOnlyReport {
    let det = p.d1 * (p.c + p.d2) * p.d3
        + p.b * (p.c * p.d3 + p.d2 * p.d3 - p.a2 * p.c * p.u)
        - p.a3 * (p.d1 * p.d3 + p.b * (p.d3 - p.a2 * p.u));
    let trace = p.a3 - (1.0 + p.b + p.d1 + p.c + p.d2 + p.d3);
    let threshold = if p.a3 == p.c {
        None
    } else {
        Some((p.b + p.d1) * (p.a3 - p.c - p.d2) * p.d3 / (p.b * p.u * (p.a3 - p.c)))
    };

    let case = if p.a3 < p.c {
        match threshold {
            Some(thr) if p.a2 < thr => Some(1),
            _ => None,
        }
    } else if p.a3 == p.c {
        Some(2)
    } else if p.a3 < 1.0 + p.c {
        let thr = threshold.expect("a3 != c in this branch");
        if (p.a2 > thr && p.a3 > p.c + p.d2) || p.a3 <= p.c + p.d2 {
            Some(3)
        } else {
            None
        }
    } else {
        let thr = threshold.expect("a3 != c in this branch");
        if p.a2 > thr && p.a3 < 1.0 + p.c + p.b + p.d1 + p.d2 + p.d3 {
            Some(4)
        } else {
            None
        }
    };

    let verdict = if det < 0.0 {
        PreyOnlyVerdict::Saddle
    } else if trace.abs() < 1e-12 {
        PreyOnlyVerdict::Center
    } else if trace < 0.0 {
        PreyOnlyVerdict::Stable
    } else {
        PreyOnlyVerdict::Unstable
    };

    PreyOnlyReport {
        det,
        trace,
        threshold,
        case,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jacobian, Params, State};
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficients_of_diagonal_matrix() {
        let m = Matrix4::from_diagonal(&Vector4::new(-1.0, -2.0, -3.0, -4.0));
        let c = CharCoeffs::of_matrix(&m);
        assert_eq!(c.as_array(), [10.0, 35.0, 50.0, 24.0]);
        let rh = routh_hurwitz(&c);
        assert_eq!(rh.tests, [10.0, 24.0, 300.0, 12600.0]);
        assert!(rh.stable);
    }

    #[test]
    fn eigenvalues_of_diagonal_matrix() {
        let m = Matrix4::from_diagonal(&Vector4::new(-1.0, -2.0, -3.0, -4.0));
        let s = eigenvalues(&m).unwrap();
        for (got, want) in s.values.iter().zip([-1.0, -2.0, -3.0, -4.0]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-12);
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn eigenvalues_of_pure_rotations() {
        // Block diag of two rotations: eigenvalues ±i and ±2i.
        let m = Matrix4::new(
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -2.0, //
            0.0, 0.0, 2.0, 0.0,
        );
        let s = eigenvalues(&m).unwrap();
        let expected = [(0.0, 2.0), (0.0, 1.0), (0.0, -1.0), (0.0, -2.0)];
        for (got, (re, im)) in s.values.iter().zip(expected) {
            assert_abs_diff_eq!(got.re, re, epsilon = 1e-10);
            assert_abs_diff_eq!(got.im, im, epsilon = 1e-10);
        }
        // Both pairs sit exactly on the axis; either is a valid critical
        // pair, and the reported member must have positive imaginary part.
        let pair = s.critical_pair().unwrap();
        assert_eq!(pair.re, 0.0);
        assert!(pair.im == 1.0 || pair.im == 2.0);
    }

    /// Cyclic Jacobi iteration — an independent eigenvalue oracle for
    /// symmetric matrices.
    fn jacobi_symmetric_eigenvalues(mut a: Matrix4<f64>) -> [f64; 4] {
        for _ in 0..60 {
            let mut off = 0.0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..4 {
                for q in (p + 1)..4 {
                    if a[(p, q)].abs() < 1e-18 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)], a[(3, 3)]];
        d.sort_by(|x, y| y.total_cmp(x));
        d
    }

    #[test]
    fn eigenvalues_match_jacobi_oracle_on_symmetric_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
        for _ in 0..300 {
            let mut m = Matrix4::zeros();
            for i in 0..4 {
                for j in i..4 {
                    let v = 2.0 * rng.gen::<f64>() - 1.0;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let ours = eigenvalues(&m).unwrap();
            let oracle = jacobi_symmetric_eigenvalues(m);
            for (got, want) in ours.values.iter().zip(oracle) {
                assert!(got.im.abs() < 1e-7, "symmetric matrix gave im {}", got.im);
                assert!(
                    (got.re - want).abs() < 1e-7,
                    "eig {} vs jacobi {}",
                    got.re,
                    want
                );
            }
        }
    }

    #[test]
    fn random_matrices_reconstruct_coefficients_and_match_routh_hurwitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
        let mut checked = 0usize;
        for _ in 0..1000 {
            let mut m = Matrix4::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] = 2.0 * rng.gen::<f64>() - 1.0;
                }
            }
            let c = CharCoeffs::of_matrix(&m);
            let s = eigenvalues_of_coeffs(&c).unwrap();
            let [l0, l1, l2, l3] = s.values;

            // Vieta reconstruction of the quartic from its computed roots.
            let e1 = -(l0 + l1 + l2 + l3);
            let e2 = l0 * l1 + l0 * l2 + l0 * l3 + l1 * l2 + l1 * l3 + l2 * l3;
            let e3 = -(l0 * l1 * l2 + l0 * l1 * l3 + l0 * l2 * l3 + l1 * l2 * l3);
            let e4 = l0 * l1 * l2 * l3;
            for (got, want) in [e1, e2, e3, e4].iter().zip(c.as_array()) {
                assert!(got.im.abs() < 1e-7, "imaginary leak {}", got.im);
                let scale = 1.0_f64.max(want.abs());
                assert!(
                    (got.re - want).abs() < 1e-7 * scale,
                    "coefficient {} vs {}",
                    got.re,
                    want
                );
            }

            // Routh–Hurwitz must agree with the sign of the spectrum,
            // away from the decision boundary.
            let rh = routh_hurwitz(&c);
            let min_abs_re = s.values.iter().map(|e| e.re.abs()).fold(f64::MAX, f64::min);
            let min_test = rh.tests.iter().map(|t| t.abs()).fold(f64::MAX, f64::min);
            if min_abs_re > 1e-6 && min_test > 1e-10 {
                assert_eq!(rh.stable, s.max_re() < 0.0, "matrix {m:?}");
                checked += 1;
            }
        }
        assert!(checked > 900, "only {checked} matrices were conclusive");
    }

    #[test]
    fn interior_benchmark_spectra_and_tests() {
        let p = Params::table1();

        // Low-prey interior equilibrium: stable focus-node.
        let s_lo = State::new(
            0.762785289845291,
            0.301589749223076,
            0.234191061718478,
            0.207178914822734,
        );
        let c = CharCoeffs::of_matrix(&jacobian(&s_lo, &p));
        assert_abs_diff_eq!(c.eps1, 1.219018172455, epsilon = 1e-9);
        assert_abs_diff_eq!(c.eps2, 0.4043398797529, epsilon = 1e-9);
        assert_abs_diff_eq!(c.eps3, 0.04750253831035, epsilon = 1e-9);
        assert_abs_diff_eq!(c.eps4, 1.266757156153e-4, epsilon = 1e-12);
        let rh = routh_hurwitz(&c);
        assert!(rh.stable);
        assert_abs_diff_eq!(rh.tests[2], 0.44539512, epsilon = 1e-7);
        assert_abs_diff_eq!(rh.tests[3], 0.02096916, epsilon = 1e-7);
        let report = classify(&jacobian(&s_lo, &p)).unwrap();
        assert_eq!(report.verdict, StabilityVerdict::Stable);
        let eigs = report.spectrum.values;
        assert_abs_diff_eq!(eigs[0].re, -0.0027296148, epsilon = 1e-8);
        assert_abs_diff_eq!(eigs[1].re, -0.21960284, epsilon = 1e-7);
        assert_abs_diff_eq!(eigs[1].im, 0.10721595, epsilon = 1e-7);
        assert_abs_diff_eq!(eigs[3].re, -0.77708288, epsilon = 1e-7);

        // High-prey interior equilibrium: saddle (one slow unstable
        // direction).
        let s_hi = State::new(
            0.971143281583280,
            0.039620376663737,
            0.033685834066471,
            0.021377975593829,
        );
        let c = CharCoeffs::of_matrix(&jacobian(&s_hi, &p));
        assert_abs_diff_eq!(c.eps1, 1.414874684688, epsilon = 1e-9);
        assert_abs_diff_eq!(c.eps2, 0.4848031023845, epsilon = 1e-9);
        assert_abs_diff_eq!(c.eps3, 0.05300857865805, epsilon = 1e-9);
        assert_abs_diff_eq!(c.eps4, -1.961912760510e-5, epsilon = 1e-12);
        let rh = routh_hurwitz(&c);
        assert!(!rh.stable);
        assert_abs_diff_eq!(rh.tests[2], 0.63292706, epsilon = 1e-7);
        assert_abs_diff_eq!(rh.tests[3], 0.03358984, epsilon = 1e-7);
        let report = classify(&jacobian(&s_hi, &p)).unwrap();
        assert_eq!(report.verdict, StabilityVerdict::Saddle);
        let eigs = report.spectrum.values;
        assert_abs_diff_eq!(eigs[0].re, 0.00036887, epsilon = 1e-7);
        assert_abs_diff_eq!(eigs[1].re, -0.22142760, epsilon = 1e-7);
        assert_abs_diff_eq!(eigs[1].im, 0.07528423, epsilon = 1e-7);
        assert_abs_diff_eq!(eigs[3].re, -0.97238835, epsilon = 1e-7);
    }

    #[test]
    fn critical_pair_at_hopf_benchmark() {
        // Juvenile maturation rate at its oscillation onset for the
        // second benchmark set; the low-prey interior equilibrium there
        // carries a conjugate pair on the imaginary axis.
        let p = Params::table2().with(crate::model::ParamId::C, 0.0359834531);
        let s = State::new(
            0.063265965464,
            0.649760941898,
            0.371370651897,
            0.892389554246,
        );
        let spectrum = eigenvalues(&jacobian(&s, &p)).unwrap();
        let pair = spectrum.critical_pair().unwrap();
        assert!(pair.re.abs() < 1e-6, "pair re {}", pair.re);
        assert_abs_diff_eq!(pair.im, 0.07069819160061408, epsilon = 1e-6);
        let mut reals: Vec<f64> = spectrum
            .values
            .iter()
            .filter(|e| e.im == 0.0)
            .map(|e| e.re)
            .collect();
        reals.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(reals.len(), 2);
        assert_abs_diff_eq!(reals[0], -0.05201042908771662, epsilon = 1e-6);
        assert_abs_diff_eq!(reals[1], -0.13549404202046525, epsilon = 1e-6);
    }

    #[test]
    fn prey_only_closed_form_matches_full_jacobian() {
        for p in [Params::table1(), Params::table2()] {
            let report = classify_prey_only(&p);
            let j = jacobian(&State::new(1.0, 0.0, 0.0, 0.0), &p);
            assert_abs_diff_eq!(report.det, det4(&j), epsilon = 1e-14);
            assert_abs_diff_eq!(report.trace, j.trace(), epsilon = 1e-14);
        }
    }

    #[test]
    fn prey_only_benchmark_classifications() {
        // First benchmark set: low injury rate (a3 < c), adult predation
        // below the threshold — stable through case 1.
        let p = Params::table1();
        let report = classify_prey_only(&p);
        assert_eq!(report.case, Some(1));
        assert_eq!(report.verdict, PreyOnlyVerdict::Stable);
        assert_abs_diff_eq!(report.threshold.unwrap(), 0.633557, epsilon = 1e-6);
        assert!(report.det > 0.0 && report.det < 1e-4);
        assert_abs_diff_eq!(report.trace, -1.442, epsilon = 1e-12);

        // Lower conversion efficiency raises the threshold; still stable.
        let p_low_u = p.with(crate::model::ParamId::U, 0.7);
        let report = classify_prey_only(&p_low_u);
        assert_eq!(report.case, Some(1));
        assert_eq!(report.verdict, PreyOnlyVerdict::Stable);
        assert_abs_diff_eq!(report.threshold.unwrap(), 0.724065, epsilon = 1e-6);
        assert_abs_diff_eq!(report.det, 0.000233, epsilon = 1e-6);

        // Pushing adult predation above the threshold flips the verdict
        // to saddle and leaves every sufficient case unsatisfied.
        let p_hot = p.with(crate::model::ParamId::A2, 0.7);
        let report = classify_prey_only(&p_hot);
        assert_eq!(report.case, None);
        assert_eq!(report.verdict, PreyOnlyVerdict::Saddle);
        assert!(report.det < 0.0);

        // Equal injury and maturation rates: case 2, threshold undefined.
        let p_eq = p.with(crate::model::ParamId::A3, p.c);
        let report = classify_prey_only(&p_eq);
        assert_eq!(report.case, Some(2));
        assert!(report.threshold.is_none());
    }

    #[test]
    fn prey_only_verdict_agrees_with_spectrum_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0012);
        let mut checked = 0;
        for _ in 0..500 {
            let p = Params::new(
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
                rng.gen_range(0.001..1.5),
            )
            .unwrap();
            let report = classify_prey_only(&p);
            let spectrum = eigenvalues(&jacobian(&State::new(1.0, 0.0, 0.0, 0.0), &p)).unwrap();
            let max_re = spectrum.max_re();
            if max_re.abs() < 1e-6 {
                continue;
            }
            checked += 1;
            // Sound implications only: a negative determinant forces a
            // positive real eigenvalue, a positive trace forces a
            // positive real part, and a strictly stable spectrum forces
            // det > 0, trace < 0. (det > 0 with trace < 0 is necessary
            // but not sufficient for stability in dimension four.)
            match report.verdict {
                PreyOnlyVerdict::Saddle | PreyOnlyVerdict::Unstable => {
                    assert!(max_re > 0.0, "params {p:?}")
                }
                PreyOnlyVerdict::Stable | PreyOnlyVerdict::Center => {}
            }
            if max_re < 0.0 {
                assert_eq!(report.verdict, PreyOnlyVerdict::Stable, "params {p:?}");
            }
        }
        assert!(checked > 400, "only {checked} draws were conclusive");
    }
}

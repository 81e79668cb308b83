//! Normal-form coefficients at codimension-one bifurcations: the Hopf
//! cubic coefficient (first Lyapunov quantity) via an explicit linear
//! normalization, and the Sotomayor nondegeneracy quantities at
//! transcritical and saddle-node points.
//!
//! # Hopf reduction
//!
//! At a Hopf point the Jacobian `U` has eigenvalues
//! `{+i alpha, -i alpha, v1, v2}` with `alpha > 0` and `v1 >= v2` real.
//! A real matrix `A` (first row fixed to `(1, 0, 1, 1)`) built from
//! closed-form expressions in the entries of `U` satisfies
//!
//! ```text
//! A^-1 U A = blockdiag([[0, alpha], [-alpha, 0]], v1, v2),
//! ```
//!
//! and the residual of that identity is reported as `block_error` — the
//! correctness certificate of the transformation. In the complex
//! coordinate `z = z1 + i z2` of the planar block the rotation acts as
//! `dz/dt = -i alpha z`; the corresponding eigenvector is
//! `q = A e1 - i A e2` and the projection functional is
//! `r = (A^-1)_1 + i (A^-1)_2`. Because the vector field is exactly
//! quadratic, the cubic coefficient `g21` comes entirely from the
//! resolvent ("slaved mode") terms — the direct cubic contribution is
//! identically zero — and
//!
//! ```text
//! C1(0) = -i/(2 alpha) (g20 g11 - 2|g11|^2 - |g02|^2/3) + g21/2,
//! beta2 = 2 Re C1(0),    l1 = Re C1(0) / alpha.
//! ```
//!
//! `Re C1(0)` is invariant under swapping the pair orientation (the
//! conjugate reduction conjugates every `g` and `C1(0)`), which is
//! exposed for testing through the internal orientation flag.
//!
//! # Sotomayor checks
//!
//! At the prey-only branch point and at interior folds the left/right
//! null vectors of the Jacobian have closed forms; the reported
//! quantities are the projections of the parameter derivative and of the
//! second derivative of the field onto the left null vector. For the
//! saddle-node both the raw vectors (free scalars set to one) and
//! scale-invariant normalized projections are reported.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use thiserror::Error;

use crate::equilibria::{refine, EquilibriaError};
use crate::model::{jacobian, quadratic_form, rhs_param_derivative, ParamId, Params, State};
use crate::stability::{eigenvalues, CharCoeffs, StabilityError};

/// Hopf reduction output. Complex quantities follow the orientation
/// `dz/dt = -i alpha z` with `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfNormalForm {
    /// Imaginary part of the critical pair (positive).
    pub alpha: f64,
    /// The two real non-critical eigenvalues, `v1 >= v2`.
    pub v1: f64,
    pub v2: f64,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    /// Resolvent (slaved-mode) cubic coefficient.
    pub g21: Complex64,
    /// Direct cubic contribution — identically zero for this quadratic
    /// field, kept as an audit value.
    pub g21_cubic: Complex64,
    /// `C1(0)`, the cubic normal-form coefficient.
    pub c1: Complex64,
    /// `2 Re C1(0)`.
    pub beta2: f64,
    /// First Lyapunov quantity `Re C1(0) / alpha`; negative means the
    /// emerging cycle is stable (supercritical branch).
    pub l1: f64,
    /// Max-norm residual of the block-diagonalization identity.
    pub block_error: f64,
    /// Frequency recovered from the characteristic coefficients,
    /// `sqrt(eps3/eps1)` — an independent cross-check of `alpha`.
    pub alpha_rh: f64,
    /// Speed of the critical pair's real part across the bifurcation,
    /// when computed.
    pub psi1_prime: Option<f64>,
    /// `-Re C1(0) / psi1_prime`, when computed.
    pub theta: Option<f64>,
    /// Jacobian at the expansion point.
    pub linearization: Matrix4<f64>,
    /// Closed-form block-diagonalizing matrix.
    pub transform: Matrix4<f64>,
    /// Slaved-mode intermediates, kept so any divergence from published
    /// coefficient values can be traced term by term.
    pub audit: HopfAudit,
}

/// Intermediates of the slaved-mode correction, indexed by the two
/// non-critical directions (in the `v1`, `v2` order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfAudit {
    /// Projections of `Q(q, q)` onto the slaved rows.
    pub h20: [Complex64; 2],
    /// Projections of `Q(q, conj q)` onto the slaved rows.
    pub h11: [Complex64; 2],
    /// Resolvent responses at frequency `2 alpha`.
    pub w20: [Complex64; 2],
    /// Static resolvent responses.
    pub w11: [Complex64; 2],
    /// Couplings of `q` with each slaved column.
    pub g110: [Complex64; 2],
    /// Couplings of `conj q` with each slaved column.
    pub g101: [Complex64; 2],
}

/// Transcritical nondegeneracy data at the prey-only equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranscriticalCheck {
    /// Adult predation level at which the branch point sits,
    /// `(b + d1)(a3 - c - d2) d3 / (b u (a3 - c))`.
    pub critical_a2: f64,
    /// Right null vector of the Jacobian (third component fixed to 1).
    pub l: Vector4<f64>,
    /// Left null vector (second component fixed to 1).
    pub m: Vector4<f64>,
    /// `m . dF/da2` — vanishes identically at the prey-only state.
    pub q0: f64,
    /// `m . (d(dF/da2)) l`, the transversality projection.
    pub q1: f64,
    /// `m . d2F(l, l)`, the quadratic projection (numeric).
    pub q2: f64,
    /// Closed form of `q2`, for cross-checking.
    pub q2_closed: f64,
    /// `|J l|` and `|J^T m|` — near zero exactly at the branch point.
    pub residual_l: f64,
    pub residual_m: f64,
}

/// Saddle-node nondegeneracy data at an interior fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleNodeCheck {
    /// Right null vector with first component fixed to 1.
    pub chi1: Vector4<f64>,
    /// Left null vector with second component fixed to 1.
    pub chi2: Vector4<f64>,
    /// Raw projections: `chi2 . dF/dparam` and `chi2 . d2F(chi1, chi1)`.
    pub s0_raw: f64,
    pub s1_raw: f64,
    /// Scale-invariant projections `s0_raw / |chi2|` and
    /// `s1_raw / (|chi2| |chi1|^2)`.
    pub s0: f64,
    pub s1: f64,
    /// Determinant of the Jacobian (must vanish at the fold); also equal
    /// to the closed-form degeneracy expression reported next.
    pub eps4: f64,
    /// The characteristic polynomial at zero frequency in expanded form,
    /// kept as an audit identity (`degeneracy == eps4` to round-off).
    pub degeneracy: f64,
    pub residual_chi1: f64,
    pub residual_chi2: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum NormalFormError {
    #[error("state is not a Hopf point (critical pair real part {re})")]
    NotAHopfPoint { re: f64 },
    #[error("normalizing transformation is singular: {0}")]
    TransformationSingular(&'static str),
    #[error("geometry is degenerate: {0}")]
    DegenerateGeometry(&'static str),
    #[error("state is not a fold point (det J = {eps4})")]
    NotAFold { eps4: f64 },
    #[error(transparent)]
    Refinement(#[from] EquilibriaError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// Quadratic form of the field on complex arguments (same closed form as
/// the real version; needed for the eigenvector projections).
fn q_complex(
    p: &Params,
    xi: &Vector4<Complex64>,
    eta: &Vector4<Complex64>,
) -> Vector4<Complex64> {
    let sym_x_y2 = 0.5 * (xi[0] * eta[2] + xi[2] * eta[0]);
    let sym_x_y3 = 0.5 * (xi[0] * eta[3] + xi[3] * eta[0]);
    let q1 = -xi[0] * eta[0] - p.a1 * sym_x_y2 - p.a2 * sym_x_y3;
    let q2 = p.u * p.a2 * sym_x_y3;
    let q3 = p.a3 * sym_x_y2;
    Vector4::new(q1, q2, q3, -q3)
}

fn cdot(a: &Vector4<Complex64>, b: &Vector4<Complex64>) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

fn lift(v: &Vector4<f64>) -> Vector4<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}

/// The closed-form normalizing matrix for the block-diagonalization of
/// the Jacobian at a Hopf point. `alpha` may carry either sign; the
/// returned matrix block-diagonalizes to `[[0, alpha], [-alpha, 0]]`.
fn normalizing_matrix(
    u: &Matrix4<f64>,
    alpha: f64,
    v1: f64,
    v2: f64,
) -> Result<Matrix4<f64>, NormalFormError> {
    let (u11, u13, u14) = (u[(0, 0)], u[(0, 2)], u[(0, 3)]);
    let (u21, u22, u24) = (u[(1, 0)], u[(1, 1)], u[(1, 3)]);
    let (u31, u32, u33) = (u[(2, 0)], u[(2, 1)], u[(2, 2)]);
    let a2 = alpha * alpha;

    let den12 = u13 * u13 * u24 * u24 * u32 * u32
        + 2.0 * u13 * u14 * u24 * u32 * (u22 * u33 - a2)
        + u14 * u14 * (a2 + u22 * u22) * (a2 + u33 * u33);
    if den12.abs() < 1e-300 {
        return Err(NormalFormError::TransformationSingular(
            "rotational-block denominator vanishes",
        ));
    }
    let den34 = |v: f64| u13 * u24 * u32 + u14 * (u22 - v) * (u33 - v);
    let d34_1 = den34(v1);
    let d34_2 = den34(v2);
    if d34_1.abs() < 1e-300 || d34_2.abs() < 1e-300 {
        return Err(NormalFormError::TransformationSingular(
            "real-eigenvector denominator vanishes",
        ));
    }

    let a21 = (-(u13
        * u24
        * (u24 * u32 * (a2 - u11 * u33) + u14 * (u21 * u32 * u33 + u22 * u31 * u33 - a2 * u31)))
        + u14 * (a2 + u33 * u33) * (u24 * (a2 + u11 * u22) - u14 * u21 * u22)
        - u13 * u13 * u24 * u24 * u31 * u32)
        / den12;
    let a22 = -alpha
        * (u13 * u24 * (u24 * u32 * (u11 + u33) + u14 * (-u21 * u32 + u22 * u31 + u31 * u33))
            + u14 * (a2 + u33 * u33) * (u24 * (u22 - u11) + u14 * u21))
        / den12;
    let a23 = -((u33 - v1) * (u24 * (v1 - u11) + u14 * u21) + u13 * u24 * u31) / d34_1;
    let a24 = -((u33 - v2) * (u24 * (v2 - u11) + u14 * u21) + u13 * u24 * u31) / d34_2;
    let a31 = -(u13 * u24 * u32 * (u11 * u24 * u32 - u14 * u21 * u32 + u14 * u22 * u31)
        + u14
            * (u24 * u32 * (u11 * (u22 * u33 - a2) + a2 * (u22 + u33))
                + u14
                    * (-u21 * u22 * u32 * u33
                        + a2 * (u21 * u32 + u31 * u33)
                        + u22 * u22 * u31 * u33)))
        / den12;
    let a32 = -alpha
        * (u14 * u24 * u32 * (a2 + u11 * (u22 + u33) - u13 * u31 - u22 * u33)
            - u13 * u24 * u24 * u32 * u32
            + u14
                * u14
                * (-u21 * u22 * u32 - u21 * u32 * u33 + u22 * u22 * u31 + a2 * u31))
        / den12;
    let a33 = (u24 * u32 * (v1 - u11) + u14 * (u21 * u32 - u22 * u31 + u31 * v1)) / d34_1;
    let a34 = (u24 * u32 * (v2 - u11) + u14 * (u21 * u32 - u22 * u31 + u31 * v2)) / d34_2;
    let a41 = (u13
        * (u24 * u32 * (u11 * (a2 - u22 * u33) + a2 * (u22 + u33))
            + u14
                * (-u21 * u22 * u32 * u33 + a2 * (u21 * u32 + u31 * u33) + u22 * u22 * u31 * u33))
        - u11 * u14 * (a2 + u22 * u22) * (a2 + u33 * u33)
        + u13 * u13 * u24 * u32 * (u22 * u31 - u21 * u32))
        / den12;
    let a42 = alpha
        * (u13
            * (u24 * u32 * (-a2 + u11 * (u22 + u33) + u22 * u33)
                + u14 * (-u21 * u22 * u32 - u21 * u32 * u33 + u22 * u22 * u31 + a2 * u31))
            - u13 * u13 * u24 * u31 * u32
            + u14 * (a2 + u22 * u22) * (a2 + u33 * u33))
        / den12;
    let a43 = (u13 * (-u21 * u32 + u22 * u31 - u31 * v1) - (u11 - v1) * (v1 - u22) * (v1 - u33))
        / d34_1;
    let a44 = (u13 * (-u21 * u32 + u22 * u31 - u31 * v2) - (u11 - v2) * (v2 - u22) * (v2 - u33))
        / d34_2;

    Ok(Matrix4::new(
        1.0, 0.0, 1.0, 1.0, //
        a21, a22, a23, a24, //
        a31, a32, a33, a34, //
        a41, a42, a43, a44,
    ))
}

/// Hopf reduction at an equilibrium; `conjugate` flips the orientation of
/// the rotational plane (conjugating every complex coefficient), which
/// must leave `Re C1(0)` untouched.
fn hopf_normal_form_oriented(
    p: &Params,
    eq: &State,
    conjugate: bool,
) -> Result<HopfNormalForm, NormalFormError> {
    let u = jacobian(eq, p);
    let spectrum = eigenvalues(&u)?;
    let pair = spectrum
        .values
        .iter()
        .filter(|e| e.im > 0.0)
        .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .copied()
        .ok_or(NormalFormError::NotAHopfPoint { re: f64::NAN })?;
    if pair.re.abs() > 1e-7 {
        return Err(NormalFormError::NotAHopfPoint { re: pair.re });
    }
    let mut reals: Vec<Complex64> = spectrum
        .values
        .iter()
        .filter(|e| (e.re - pair.re).abs() > 1e-12 || e.im.abs() != pair.im.abs())
        .copied()
        .collect();
    // The two non-critical eigenvalues, largest real part first.
    reals.sort_by(|a, b| b.re.total_cmp(&a.re));
    if reals.len() != 2 {
        return Err(NormalFormError::TransformationSingular(
            "could not isolate two non-critical eigenvalues",
        ));
    }
    if reals.iter().any(|v| v.im.abs() > 1e-9) {
        return Err(NormalFormError::TransformationSingular(
            "non-critical eigenvalues are not real",
        ));
    }
    let (v1, v2) = (reals[0].re, reals[1].re);
    let alpha = pair.im;
    // The transformation itself is orientation-independent (built at
    // +alpha); the orientation sign enters the eigenvector/projection
    // pair and the resolvent below.
    let sigma = if conjugate { 1.0 } else { -1.0 };
    let a = normalizing_matrix(&u, alpha, v1, v2)?;
    let a_inv = a.try_inverse().ok_or(NormalFormError::TransformationSingular(
        "normalizing matrix is not invertible",
    ))?;

    // Certificate: A^-1 U A must be the rotation/relaxation block form.
    let lam = a_inv * u * a;
    let target = Matrix4::new(
        0.0, alpha, 0.0, 0.0, //
        -alpha, 0.0, 0.0, 0.0, //
        0.0, 0.0, v1, 0.0, //
        0.0, 0.0, 0.0, v2,
    );
    let block_error = (lam - target).abs().max();
    if block_error > 1e-8 {
        return Err(NormalFormError::TransformationSingular(
            "block-diagonalization identity failed",
        ));
    }

    let i = Complex64::new(0.0, 1.0);
    let col = |k: usize| {
        Vector4::new(a[(0, k)], a[(1, k)], a[(2, k)], a[(3, k)])
    };
    let row = |k: usize| {
        Vector4::new(a_inv[(k, 0)], a_inv[(k, 1)], a_inv[(k, 2)], a_inv[(k, 3)])
    };
    // Complex eigenvector and projection for dz/dt = sigma i alpha z
    // (the default orientation sigma = -1 rotates clockwise).
    let q: Vector4<Complex64> = lift(&col(0)) + lift(&col(1)).map(|x| sigma * i * x);
    let r: Vector4<Complex64> = lift(&row(0)) - lift(&row(1)).map(|x| sigma * i * x);
    let qbar = q.map(|z| z.conj());
    let s1 = lift(&row(2));
    let s2 = lift(&row(3));
    let c3 = lift(&col(2));
    let c4 = lift(&col(3));

    let qq = q_complex(p, &q, &q);
    let qqbar = q_complex(p, &q, &qbar);
    let qbarqbar = q_complex(p, &qbar, &qbar);

    let g20 = 0.5 * cdot(&r, &qq);
    let g11 = 0.5 * cdot(&r, &qqbar);
    let g02 = 0.5 * cdot(&r, &qbarqbar);

    let g110 = [cdot(&r, &q_complex(p, &q, &c3)), cdot(&r, &q_complex(p, &q, &c4))];
    let g101 = [
        cdot(&r, &q_complex(p, &qbar, &c3)),
        cdot(&r, &q_complex(p, &qbar, &c4)),
    ];
    let h20 = [0.5 * cdot(&s1, &qq), 0.5 * cdot(&s2, &qq)];
    let h11 = [0.5 * cdot(&s1, &qqbar), 0.5 * cdot(&s2, &qqbar)];
    let vv = [v1, v2];
    let mut w20 = [Complex64::new(0.0, 0.0); 2];
    let mut w11 = [Complex64::new(0.0, 0.0); 2];
    let mut g21 = Complex64::new(0.0, 0.0);
    for j in 0..2 {
        w20[j] = h20[j] / (2.0 * sigma * i * alpha - vv[j]);
        w11[j] = -h11[j] / vv[j];
        g21 += 2.0 * g110[j] * w11[j] + g101[j] * w20[j];
    }
    // The field has no cubic terms, so the direct contribution to g21 is
    // exactly zero; recorded for the audit trail.
    let g21_cubic = Complex64::new(0.0, 0.0);
    let g21 = g21 + g21_cubic;

    let c1 = sigma * i / (2.0 * alpha)
        * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0)
        + g21 / 2.0;
    let beta2 = 2.0 * c1.re;
    let l1 = c1.re / alpha;

    let coeffs = CharCoeffs::of_matrix(&u);
    let alpha_rh = if coeffs.eps1.abs() > 1e-300 && coeffs.eps3 / coeffs.eps1 > 0.0 {
        (coeffs.eps3 / coeffs.eps1).sqrt()
    } else {
        f64::NAN
    };

    Ok(HopfNormalForm {
        alpha,
        v1,
        v2,
        g20,
        g11,
        g02,
        g21,
        g21_cubic,
        c1,
        beta2,
        l1,
        block_error,
        alpha_rh,
        psi1_prime: None,
        theta: None,
        linearization: u,
        transform: a,
        audit: HopfAudit {
            h20,
            h11,
            w20,
            w11,
            g110,
            g101,
        },
    })
}

/// Hopf reduction at an equilibrium of `p`. Fails unless the Jacobian
/// carries a conjugate pair within `1e-7` of the imaginary axis and two
/// real non-critical eigenvalues.
pub fn hopf_normal_form(p: &Params, eq: &State) -> Result<HopfNormalForm, NormalFormError> {
    hopf_normal_form_oriented(p, eq, false)
}

/// Speed of the critical pair's real part with respect to `free`,
/// by central differences with the equilibrium re-solved at the shifted
/// parameter values.
pub fn hopf_transversality(
    p: &Params,
    eq: &State,
    free: ParamId,
) -> Result<f64, NormalFormError> {
    let base = p.get(free);
    let h = 1e-6 * base.abs().max(1.0);
    let mut re = [0.0_f64; 2];
    for (slot, sign) in [(0usize, 1.0), (1usize, -1.0)] {
        let shifted = p.with(free, base + sign * h);
        let eq_shifted = refine(&shifted, eq)?;
        let spectrum = eigenvalues(&jacobian(&eq_shifted, &shifted))?;
        let pair = spectrum
            .critical_pair()
            .ok_or(NormalFormError::NotAHopfPoint { re: f64::NAN })?;
        re[slot] = pair.re;
    }
    Ok((re[0] - re[1]) / (2.0 * h))
}

/// [`hopf_normal_form`] plus the crossing speed and the ratio
/// `theta = -Re C1(0) / psi1'`.
pub fn hopf_normal_form_with_transversality(
    p: &Params,
    eq: &State,
    free: ParamId,
) -> Result<HopfNormalForm, NormalFormError> {
    let mut nf = hopf_normal_form(p, eq)?;
    let psi1_prime = hopf_transversality(p, eq, free)?;
    nf.psi1_prime = Some(psi1_prime);
    nf.theta = Some(-nf.c1.re / psi1_prime);
    Ok(nf)
}

/// Closed-form adult predation level of the prey-only branch point.
pub fn transcritical_a2(p: &Params) -> Result<f64, NormalFormError> {
    if (p.a3 - p.c).abs() < 1e-12 {
        return Err(NormalFormError::DegenerateGeometry(
            "injury rate equals the maturation rate",
        ));
    }
    Ok((p.b + p.d1) * (p.a3 - p.c - p.d2) * p.d3 / (p.b * p.u * (p.a3 - p.c)))
}

fn transcritical_scaled(
    p: &Params,
    l3: f64,
    m2: f64,
) -> Result<TranscriticalCheck, NormalFormError> {
    let critical_a2 = transcritical_a2(p)?;
    let Params {
        a1,
        a3,
        b,
        c,
        d1,
        d2,
        d3,
        u,
        ..
    } = *p;

    let l = Vector4::new(
        -a1 * l3 + (b + d1) * (a3 - c - d2) * l3 / (b * u),
        (-a3 + c + d2) * l3 / b,
        l3,
        (-a3 + c) * l3 / d3,
    );
    let m = Vector4::new(
        0.0,
        m2,
        (b + d1) * m2 / b,
        (b + d1) * (a3 - c - d2) * m2 / (b * (a3 - c)),
    );

    let e2 = State::new(1.0, 0.0, 0.0, 0.0);
    let j = jacobian(&e2, p);
    let residual_l = (j * l).norm();
    let residual_m = (j.transpose() * m).norm();

    // dF/da2 vanishes at the prey-only state (no adults), so q0 = 0.
    let q0 = m.dot(&rhs_param_derivative(&e2, p, ParamId::A2));
    // Directional derivative of dF/da2 along l: rows x and y1 pick up
    // -l4 and u l4 respectively.
    let q1 = m.dot(&Vector4::new(-l[3], u * l[3], 0.0, 0.0));
    let q2 = m.dot(&(2.0 * quadratic_form(p, &l, &l)));
    let q2_closed = -2.0 * l3 * l3 * m2 * ((b + d1) * (a3 - c - d2) - a1 * b * u)
        * (-a3 * (b + d1) * d2 * d3 + p.a2 * b * (a3 - c) * (a3 - c) * u)
        / (b * b * (a3 - c) * d3 * u);

    Ok(TranscriticalCheck {
        critical_a2,
        l,
        m,
        q0,
        q1,
        q2,
        q2_closed,
        residual_l,
        residual_m,
    })
}

/// Sotomayor projections for the transcritical exchange at the prey-only
/// equilibrium, with the closed-form null vectors (free scalars fixed
/// to one). Meaningful when `a2` is at (or near) [`transcritical_a2`].
pub fn verify_transcritical(p: &Params) -> Result<TranscriticalCheck, NormalFormError> {
    transcritical_scaled(p, 1.0, 1.0)
}

/// Closed-form null vectors of a singular interior Jacobian, with the
/// free scalars of the right (`phi`) and left (`phi1`) vectors.
fn fold_null_vectors(
    j: &Matrix4<f64>,
    phi: f64,
    phi1: f64,
) -> Result<(Vector4<f64>, Vector4<f64>), NormalFormError> {
    let (e1, e2, e3) = (j[(0, 0)], j[(0, 2)], j[(0, 3)]);
    let (e4, _e5, e6) = (j[(1, 0)], j[(1, 1)], j[(1, 3)]);
    let (e7, e8, e9) = (j[(2, 0)], j[(2, 1)], j[(2, 2)]);
    let (e10, e11, e12) = (j[(3, 0)], j[(3, 2)], j[(3, 3)]);

    let pair_den = e12 * e2 - e11 * e3;
    let big_den = e12 * e2 * e7 - e11 * e3 * e7 - e1 * e12 * e9 + e10 * e3 * e9;
    if pair_den.abs() < 1e-300 || big_den.abs() < 1e-300 || e8.abs() < 1e-300 {
        return Err(NormalFormError::DegenerateGeometry(
            "null-vector denominators vanish",
        ));
    }

    let chi1 = Vector4::new(
        phi,
        -big_den * phi / (pair_den * e8),
        -(e1 * e12 - e10 * e3) * phi / pair_den,
        -(e1 * e11 - e10 * e2) * phi / (-pair_den),
    );
    let chi2 = Vector4::new(
        -(e11 * e6 * e7 + e12 * e4 * e9 - e10 * e6 * e9) * phi1 / (-big_den),
        phi1,
        -(e12 * e2 * e4 - e11 * e3 * e4 + e1 * e11 * e6 - e10 * e2 * e6) * phi1 / big_den,
        -(e2 * e6 * e7 + e3 * e4 * e9 - e1 * e6 * e9) * phi1 / big_den,
    );
    Ok((chi1, chi2))
}

/// Expanded characteristic-polynomial-at-zero expression; algebraically
/// identical to `det J` at any state, kept as an audit identity.
fn fold_degeneracy_expression(p: &Params, s: &State) -> f64 {
    let State { x, y2, y3, .. } = *s;
    let Params {
        a1,
        a2,
        a3,
        b,
        c,
        d1,
        d2,
        d3,
        u,
        ..
    } = *p;
    a2 * b * u * x * (a3 * x * (-1.0 + 2.0 * x) - c * (-1.0 + 2.0 * x + a1 * y2) + a1 * d3 * y3)
        + (-b - d1)
            * (a2 * a3 * d2 * x * y2
                - d3 * (a1 * a3 * x * y2
                    + (c + d2 - a3 * x) * (-1.0 + 2.0 * x + a1 * y2 + a2 * y3)))
}

fn saddle_node_scaled(
    p: &Params,
    state: &State,
    free: ParamId,
    phi: f64,
    phi1: f64,
) -> Result<SaddleNodeCheck, NormalFormError> {
    let j = jacobian(state, p);
    let coeffs = CharCoeffs::of_matrix(&j);
    if coeffs.eps4.abs() > 1e-6 {
        return Err(NormalFormError::NotAFold { eps4: coeffs.eps4 });
    }
    let (chi1, chi2) = fold_null_vectors(&j, phi, phi1)?;
    let residual_chi1 = (j * chi1).norm();
    let residual_chi2 = (j.transpose() * chi2).norm();

    let s0_raw = chi2.dot(&rhs_param_derivative(state, p, free));
    let s1_raw = chi2.dot(&(2.0 * quadratic_form(p, &chi1, &chi1)));
    let n1 = chi1.norm();
    let n2 = chi2.norm();

    Ok(SaddleNodeCheck {
        chi1,
        chi2,
        s0_raw,
        s1_raw,
        s0: s0_raw / n2,
        s1: s1_raw / (n2 * n1 * n1),
        eps4: coeffs.eps4,
        degeneracy: fold_degeneracy_expression(p, state),
        residual_chi1,
        residual_chi2,
    })
}

/// Sotomayor projections at an interior fold equilibrium with respect to
/// the parameter `free`. `state` must carry a (numerically) singular
/// Jacobian: `|det J| <= 1e-6`.
pub fn verify_saddle_node(
    p: &Params,
    state: &State,
    free: ParamId,
) -> Result<SaddleNodeCheck, NormalFormError> {
    saddle_node_scaled(p, state, free, 1.0, 1.0)
}

/// Normalized quadratic fold coefficient at a fold state — the quantity
/// whose zero along a fold curve marks a cusp point.
pub fn fold_normal_coefficient(p: &Params, state: &State) -> Result<f64, NormalFormError> {
    let j = jacobian(state, p);
    let (chi1, chi2) = fold_null_vectors(&j, 1.0, 1.0)?;
    let s1_raw = chi2.dot(&(2.0 * quadratic_form(p, &chi1, &chi1)));
    Ok(s1_raw / (chi2.norm() * chi1.norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::interior_equilibria;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hopf_benchmark() -> (Params, State) {
        let p = Params::table2().with(ParamId::C, 0.0359834531);
        let eq = interior_equilibria(&p).low.unwrap().state;
        (p, eq)
    }

    #[test]
    fn hopf_reduction_benchmark_digits() {
        let (p, eq) = hopf_benchmark();
        let nf = hopf_normal_form(&p, &eq).unwrap();

        assert_abs_diff_eq!(nf.alpha, 0.0706981916, epsilon = 1e-8);
        assert_abs_diff_eq!(nf.v1, -0.05201042908771662, epsilon = 1e-8);
        assert_abs_diff_eq!(nf.v2, -0.13549404202046525, epsilon = 1e-8);
        assert!(nf.block_error < 1e-10, "block error {}", nf.block_error);
        assert_abs_diff_eq!(nf.alpha_rh, nf.alpha, epsilon = 1e-7);

        assert_abs_diff_eq!(nf.g20.re, -0.11236274, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g20.im, -0.33204094, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g11.re, -0.01859504, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g11.im, 0.03281186, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g02.re, 0.07517265, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g02.im, 0.39766466, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g21.re, -0.36329073, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.g21.im, 0.66837786, epsilon = 1e-6);
        assert_eq!(nf.g21_cubic, Complex64::new(0.0, 0.0));

        assert_abs_diff_eq!(nf.c1.re, -0.16405309, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.c1.im, 0.64859976, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.beta2, -0.32810617, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.l1, -2.32047076, epsilon = 1e-5);

        // The retained intermediates must reassemble the cubic
        // coefficient exactly.
        let mut rebuilt = nf.g21_cubic;
        for j in 0..2 {
            rebuilt += 2.0 * nf.audit.g110[j] * nf.audit.w11[j]
                + nf.audit.g101[j] * nf.audit.w20[j];
        }
        assert_abs_diff_eq!(rebuilt.re, nf.g21.re, epsilon = 1e-14);
        assert_abs_diff_eq!(rebuilt.im, nf.g21.im, epsilon = 1e-14);
        assert_eq!(nf.linearization, jacobian(&eq, &p));
    }

    #[test]
    fn hopf_orientation_flip_conjugates_everything() {
        let (p, eq) = hopf_benchmark();
        let nf = hopf_normal_form_oriented(&p, &eq, false).unwrap();
        let flipped = hopf_normal_form_oriented(&p, &eq, true).unwrap();
        for (a, b) in [
            (nf.g20, flipped.g20),
            (nf.g11, flipped.g11),
            (nf.g02, flipped.g02),
            (nf.g21, flipped.g21),
            (nf.c1, flipped.c1),
        ] {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(nf.l1, flipped.l1, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.beta2, flipped.beta2, epsilon = 1e-12);
        assert!(flipped.block_error < 1e-10);
    }

    #[test]
    fn hopf_transversality_benchmark() {
        let (p, eq) = hopf_benchmark();
        let nf = hopf_normal_form_with_transversality(&p, &eq, ParamId::C).unwrap();
        assert_abs_diff_eq!(nf.psi1_prime.unwrap(), 0.36928096, epsilon = 1e-6);
        assert_abs_diff_eq!(nf.theta.unwrap(), 0.44425005, epsilon = 1e-5);
    }

    #[test]
    fn hopf_rejects_ordinary_equilibria() {
        let p = Params::table1();
        let eq = interior_equilibria(&p).low.unwrap().state;
        match hopf_normal_form(&p, &eq) {
            Err(NormalFormError::NotAHopfPoint { re }) => assert!(re.abs() > 1e-7),
            other => panic!("expected NotAHopfPoint, got {other:?}"),
        }
    }

    #[test]
    fn complex_quadratic_form_matches_real_on_real_inputs() {
        let p = Params::table2();
        let xi = Vector4::new(0.3, -0.2, 0.7, 0.1);
        let eta = Vector4::new(-0.5, 0.9, 0.2, -0.4);
        let real = quadratic_form(&p, &xi, &eta);
        let complex = q_complex(&p, &lift(&xi), &lift(&eta));
        for k in 0..4 {
            assert_abs_diff_eq!(complex[k].re, real[k], epsilon = 1e-15);
            assert_eq!(complex[k].im, 0.0);
        }
    }

    #[test]
    fn transcritical_benchmark_projections() {
        // Infant transition rate at which the prey-only threshold equals
        // the benchmark adult predation 0.625 exactly.
        let b_bp = 0.15 / (0.625 / 0.2708333333333333 - 1.0);
        let p = Params::table1().with(ParamId::B, b_bp);
        let check = verify_transcritical(&p).unwrap();

        assert_abs_diff_eq!(check.critical_a2, 0.625, epsilon = 1e-12);
        assert!(check.residual_l < 1e-12, "residual {}", check.residual_l);
        assert!(check.residual_m < 1e-12, "residual {}", check.residual_m);
        assert_eq!(check.q0, 0.0);
        assert_abs_diff_eq!(check.q1, 0.48, epsilon = 1e-12);
        assert_abs_diff_eq!(check.q2, 0.26976923, epsilon = 1e-7);
        assert_abs_diff_eq!(check.q2, check.q2_closed, epsilon = 1e-12);
    }

    #[test]
    fn transcritical_scaling_leaves_signs_intact() {
        let b_bp = 0.15 / (0.625 / 0.2708333333333333 - 1.0);
        let p = Params::table1().with(ParamId::B, b_bp);
        let unit = transcritical_scaled(&p, 1.0, 1.0).unwrap();
        let scaled = transcritical_scaled(&p, 2.0, 2.0).unwrap();
        // q1 scales linearly in each free scalar, q2 quadratically in l3
        // and linearly in m2; zero-status and signs are scale-invariant.
        assert_abs_diff_eq!(scaled.q1, 4.0 * unit.q1, epsilon = 1e-12);
        assert_abs_diff_eq!(scaled.q2, 8.0 * unit.q2, epsilon = 1e-12);
        assert_eq!(scaled.q1.signum(), unit.q1.signum());
        assert_eq!(scaled.q2.signum(), unit.q2.signum());
        assert_eq!(scaled.q0, 0.0);
    }

    #[test]
    fn transcritical_rejects_equal_rates() {
        let p = Params::table1().with(ParamId::A3, 0.09);
        assert!(matches!(
            verify_transcritical(&p),
            Err(NormalFormError::DegenerateGeometry(_))
        ));
    }

    /// Double-root fold state for the first benchmark set at the given
    /// infant transition rate.
    fn fold_state(p: &Params) -> State {
        let d = interior_equilibria(p);
        let x = d.delta3 / (2.0 * d.quadratic[0]);
        let margin = p.c - p.a3 * x;
        let y2 = p.d3 * (1.0 - x) / (p.a1 * p.d3 + p.a2 * margin);
        State::new(x, (margin + p.d2) * y2 / p.b, y2, margin * y2 / p.d3)
    }

    #[test]
    fn saddle_node_benchmark_projections() {
        let p = Params::table1().with(ParamId::B, 0.108185755);
        let state = fold_state(&p);
        let check = verify_saddle_node(&p, &state, ParamId::B).unwrap();

        assert_abs_diff_eq!(check.chi1[0], 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(check.chi1[1], -1.299825510047, epsilon = 1e-6);
        assert_abs_diff_eq!(check.chi1[2], -0.959218430427, epsilon = 1e-6);
        assert_abs_diff_eq!(check.chi1[3], -0.894015235206, epsilon = 1e-6);
        assert!(check.chi2[0].abs() < 1e-10);
        assert_abs_diff_eq!(check.chi2[1], 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(check.chi2[2], 2.386504159699, epsilon = 1e-6);
        assert_abs_diff_eq!(check.chi2[3], 8.693252079850, epsilon = 1e-5);

        assert_abs_diff_eq!(check.s0_raw, 0.24742024, epsilon = 1e-6);
        assert_abs_diff_eq!(check.s1_raw, -0.16806937, epsilon = 1e-6);
        assert_abs_diff_eq!(check.s0, 0.0272783, epsilon = 1e-5);
        assert_abs_diff_eq!(check.s1, -0.0042027, epsilon = 1e-5);

        assert!(check.residual_chi1 < 1e-9);
        assert!(check.residual_chi2 < 1e-9);
        assert!(check.eps4.abs() < 1e-9);
        assert_abs_diff_eq!(check.degeneracy, check.eps4, epsilon = 1e-12);
    }

    #[test]
    fn saddle_node_normalized_projections_are_scale_invariant() {
        let p = Params::table1().with(ParamId::B, 0.108185755);
        let state = fold_state(&p);
        let unit = saddle_node_scaled(&p, &state, ParamId::B, 1.0, 1.0).unwrap();
        let scaled = saddle_node_scaled(&p, &state, ParamId::B, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(unit.s0, scaled.s0, epsilon = 1e-12);
        assert_abs_diff_eq!(unit.s1, scaled.s1, epsilon = 1e-12);
        assert_abs_diff_eq!(scaled.s0_raw, 3.0 * unit.s0_raw, epsilon = 1e-12);
        assert_abs_diff_eq!(scaled.s1_raw, 12.0 * unit.s1_raw, epsilon = 1e-10);
    }

    #[test]
    fn saddle_node_rejects_regular_equilibria() {
        let p = Params::table1();
        let eq = interior_equilibria(&p).low.unwrap().state;
        assert!(matches!(
            verify_saddle_node(&p, &eq, ParamId::B),
            Err(NormalFormError::NotAFold { .. })
        ));
    }

    #[test]
    fn degeneracy_expression_equals_determinant_everywhere() {
        // The expanded zero-frequency expression must agree with det J at
        // arbitrary (not just fold) states — it is an algebraic identity.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0040);
        for _ in 0..200 {
            let p = Params::new(
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
                rng.gen_range(0.01..1.5),
            )
            .unwrap();
            let s = State::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            let det = CharCoeffs::of_matrix(&jacobian(&s, &p)).eps4;
            let expr = fold_degeneracy_expression(&p, &s);
            let scale = 1.0_f64.max(det.abs());
            assert!(
                (det - expr).abs() < 1e-12 * scale,
                "det {det} vs expression {expr}"
            );
        }
    }

    #[test]
    fn fold_normal_coefficient_matches_full_check() {
        let p = Params::table1().with(ParamId::B, 0.108185755);
        let state = fold_state(&p);
        let s1 = fold_normal_coefficient(&p, &state).unwrap();
        let check = verify_saddle_node(&p, &state, ParamId::B).unwrap();
        assert_abs_diff_eq!(s1, check.s1, epsilon = 1e-14);
    }
}

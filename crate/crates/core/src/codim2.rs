//! Two-parameter continuation of fold and Hopf loci, detection of
//! codimension-two points on them, and parameter-plane classification.
//!
//! A codimension-one locus is traced as a curve of
//! `z = (x, y1, y2, y3, p1, p2) in R^6` solving the five equations
//!
//! ```text
//! F(state; p1, p2) = 0,        g(state; p1, p2) = 0,
//! ```
//!
//! where `g = eps4` (the Jacobian determinant) on a fold curve and
//! `g = eps1 eps2 eps3 - eps3^2 - eps1^2 eps4` on a Hopf curve, closed by
//! the usual pseudo-arclength constraint. The Hopf discriminant vanishes
//! on the Hopf locus proper and on its neutral-saddle extension, so the
//! curve passes through Bogdanov–Takens points instead of terminating
//! there — which is what makes those points detectable by a sign change
//! of `eps3` along the curve. On a fold curve the diagnostic is the
//! normalized quadratic fold coefficient and its zero marks a cusp; on a
//! Hopf curve it is the first Lyapunov quantity and its zero marks a
//! generalized (Bautin) Hopf point. Bogdanov–Takens candidates are
//! polished by a square Newton solve of `{F = 0, eps4 = 0, eps3 = 0}`.

use nalgebra::{Matrix6, Vector6};
use thiserror::Error;

use crate::continuation::StopReason;
use crate::equilibria::interior_equilibria;
use crate::model::{jacobian, rhs, rhs_param_derivative, ParamId, Params, State};
use crate::normalform::{fold_normal_coefficient, hopf_normal_form};
use crate::simulate::{detect_attractor, integrate, Attractor, IntegratorConfig};
use crate::stability::{classify, hopf_discriminant, CharCoeffs, StabilityVerdict};

/// Step-size and corrector policy for two-parameter curve tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codim2Config {
    pub ds0: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Corrector residual tolerance (max norm).
    pub tol: f64,
    pub max_steps: usize,
    pub max_newton: usize,
    /// Relative step for the finite-difference gradient of the defining
    /// function `g`.
    pub fd_step: f64,
}

impl Default for Codim2Config {
    fn default() -> Self {
        Self {
            ds0: 1e-3,
            ds_min: 1e-10,
            ds_max: 0.02,
            tol: 1e-10,
            max_steps: 4000,
            max_newton: 10,
            fd_step: 1e-6,
        }
    }
}

/// Which codimension-one locus a curve traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveId {
    Fold,
    Hopf,
}

/// One accepted point of a two-parameter locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codim2Point {
    pub p1: f64,
    pub p2: f64,
    pub state: State,
    pub coeffs: CharCoeffs,
    /// Curve diagnostic: the normalized fold coefficient on a fold
    /// curve, the first Lyapunov quantity on a Hopf curve (NaN where the
    /// evaluation fails, e.g. on a neutral-saddle segment).
    pub diag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codim2Kind {
    /// Cusp: the quadratic fold coefficient vanishes on a fold curve.
    Cusp,
    /// Bogdanov–Takens: double zero eigenvalue.
    BogdanovTakens,
    /// Generalized (Bautin) Hopf: the first Lyapunov quantity vanishes.
    GeneralizedHopf,
}

impl Codim2Kind {
    pub fn label(&self) -> &'static str {
        match self {
            Codim2Kind::Cusp => "CP",
            Codim2Kind::BogdanovTakens => "BT",
            Codim2Kind::GeneralizedHopf => "GH",
        }
    }
}

/// A localized codimension-two point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codim2Special {
    pub kind: Codim2Kind,
    pub p1: f64,
    pub p2: f64,
    pub state: State,
}

/// A traced two-parameter locus.
#[derive(Debug, Clone, PartialEq)]
pub struct Codim2Curve {
    pub id: CurveId,
    pub free: (ParamId, ParamId),
    pub points: Vec<Codim2Point>,
    pub specials: Vec<Codim2Special>,
    pub stop: StopReason,
}

#[derive(Debug, Error, PartialEq)]
pub enum Codim2Error {
    #[error("seed point did not converge onto the locus (residual {residual})")]
    SeedNotConverged { residual: f64 },
    #[error("tangent system is singular")]
    TangentSingular,
    #[error("parameter ranges are empty or the direction is not +1/-1")]
    BadRequest,
    #[error("Newton polish of the double-zero point failed")]
    PolishFailed,
}

fn pack(state: &State, p1: f64, p2: f64) -> Vector6<f64> {
    Vector6::new(state.x, state.y1, state.y2, state.y3, p1, p2)
}

fn unpack(z: &Vector6<f64>) -> (State, f64, f64) {
    (State::new(z[0], z[1], z[2], z[3]), z[4], z[5])
}

fn params_at(base: &Params, free: (ParamId, ParamId), z: &Vector6<f64>) -> Params {
    base.with(free.0, z[4]).with(free.1, z[5])
}

/// The defining function `g` of the traced locus.
fn g_value(id: CurveId, base: &Params, free: (ParamId, ParamId), z: &Vector6<f64>) -> f64 {
    let (state, _, _) = unpack(z);
    let p = params_at(base, free, z);
    let coeffs = CharCoeffs::of_matrix(&jacobian(&state, &p));
    match id {
        CurveId::Fold => coeffs.eps4,
        CurveId::Hopf => hopf_discriminant(&coeffs),
    }
}

/// Central-difference gradient of `g` with respect to all six unknowns.
fn g_gradient(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    z: &Vector6<f64>,
    fd_step: f64,
) -> Vector6<f64> {
    let mut grad = Vector6::zeros();
    for k in 0..6 {
        let h = fd_step * z[k].abs().max(1.0);
        let mut zp = *z;
        let mut zm = *z;
        zp[k] += h;
        zm[k] -= h;
        grad[k] = (g_value(id, base, free, &zp) - g_value(id, base, free, &zm)) / (2.0 * h);
    }
    grad
}

/// Rows 0..4: `[dF/dstate | dF/dp1 | dF/dp2]`; row 4: the gradient of
/// `g`; row 5: the border.
fn bordered_matrix(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    z: &Vector6<f64>,
    border: &Vector6<f64>,
    fd_step: f64,
) -> Matrix6<f64> {
    let (state, _, _) = unpack(z);
    let p = params_at(base, free, z);
    let j = jacobian(&state, &p);
    let fp1 = rhs_param_derivative(&state, &p, free.0);
    let fp2 = rhs_param_derivative(&state, &p, free.1);
    let grad = g_gradient(id, base, free, z, fd_step);

    let mut m = Matrix6::zeros();
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = j[(r, c)];
        }
        m[(r, 4)] = fp1[r];
        m[(r, 5)] = fp2[r];
    }
    for c in 0..6 {
        m[(4, c)] = grad[c];
        m[(5, c)] = border[c];
    }
    m
}

fn residual(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    z: &Vector6<f64>,
    anchor: &Vector6<f64>,
    border: &Vector6<f64>,
) -> Option<Vector6<f64>> {
    let (state, _, _) = unpack(z);
    if !state.is_finite() || !z[4].is_finite() || !z[5].is_finite() {
        return None;
    }
    let p = params_at(base, free, z);
    let f = rhs(&state, &p);
    let g = g_value(id, base, free, z);
    let c = border.dot(&(z - anchor));
    Some(Vector6::new(f[0], f[1], f[2], f[3], g, c))
}

/// Newton correction within the hyperplane `border . (z - anchor) = 0`,
/// starting at `seed`.
fn correct_seeded(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    anchor: &Vector6<f64>,
    seed: &Vector6<f64>,
    border: &Vector6<f64>,
    cfg: &Codim2Config,
    max_newton: usize,
) -> Option<(Vector6<f64>, usize)> {
    let mut z = *seed;
    for iter in 0..=max_newton {
        let res = residual(id, base, free, &z, anchor, border)?;
        if res.amax() < cfg.tol {
            return Some((z, iter));
        }
        if iter == max_newton {
            return None;
        }
        let m = bordered_matrix(id, base, free, &z, border, cfg.fd_step);
        let delta = m.lu().solve(&res)?;
        if !delta.iter().all(|v| v.is_finite()) {
            return None;
        }
        z -= delta;
    }
    None
}

fn solve_tangent(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    z: &Vector6<f64>,
    previous: &Vector6<f64>,
    cfg: &Codim2Config,
) -> Result<Vector6<f64>, Codim2Error> {
    let m = bordered_matrix(id, base, free, z, previous, cfg.fd_step);
    let e6 = Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let t = m.lu().solve(&e6).ok_or(Codim2Error::TangentSingular)?;
    let norm = t.norm();
    if !norm.is_finite() || norm < 1e-300 {
        return Err(Codim2Error::TangentSingular);
    }
    Ok(t / norm)
}

/// Curve diagnostic at a point: normalized fold coefficient (fold curve)
/// or first Lyapunov quantity (Hopf curve); NaN when unavailable.
fn diagnostic(id: CurveId, base: &Params, free: (ParamId, ParamId), z: &Vector6<f64>) -> f64 {
    let (state, _, _) = unpack(z);
    let p = params_at(base, free, z);
    match id {
        CurveId::Fold => fold_normal_coefficient(&p, &state).unwrap_or(f64::NAN),
        CurveId::Hopf => hopf_normal_form(&p, &state)
            .map(|nf| nf.l1)
            .unwrap_or(f64::NAN),
    }
}

fn make_point(id: CurveId, base: &Params, free: (ParamId, ParamId), z: &Vector6<f64>) -> Codim2Point {
    let (state, p1, p2) = unpack(z);
    let p = params_at(base, free, z);
    Codim2Point {
        p1,
        p2,
        state,
        coeffs: CharCoeffs::of_matrix(&jacobian(&state, &p)),
        diag: diagnostic(id, base, free, z),
    }
}

/// Warm-started bracketed secant localization of a sign change of `test`
/// between two accepted curve points (same scheme as the one-parameter
/// tracer: every correction is seeded from the nearer bracket endpoint so
/// the iteration cannot drift onto an intersecting solution sheet).
fn localize_crossing(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    cfg: &Codim2Config,
    z_a: &Vector6<f64>,
    z_b: &Vector6<f64>,
    test: &dyn Fn(&Vector6<f64>) -> f64,
) -> Option<Vector6<f64>> {
    let chord = z_b - z_a;
    let chord_norm = chord.norm();
    if chord_norm < 1e-300 {
        return None;
    }
    let t_ab = chord / chord_norm;

    let eval_at = |sigma: f64, seed_sigma: f64, seed: &Vector6<f64>| -> Option<(Vector6<f64>, f64)> {
        let anchor = z_a + sigma * chord;
        let start = seed + (sigma - seed_sigma) * chord;
        let (z, _) = correct_seeded(
            id,
            base,
            free,
            &anchor,
            &start,
            &t_ab,
            cfg,
            cfg.max_newton + 5,
        )?;
        let f = test(&z);
        f.is_finite().then_some((z, f))
    };

    let flo = test(z_a);
    let fhi = test(z_b);
    if !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    if flo == 0.0 {
        return Some(*z_a);
    }
    if fhi == 0.0 {
        return Some(*z_b);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }

    let mut lo = (0.0_f64, flo, *z_a);
    let mut hi = (1.0_f64, fhi, *z_b);
    let mut best = *z_b;

    for _ in 0..60 {
        let (slo, flo, _) = lo;
        let (shi, fhi, _) = hi;
        let mut sigma = if (fhi - flo).abs() > 1e-300 {
            shi - fhi * (shi - slo) / (fhi - flo)
        } else {
            0.5 * (slo + shi)
        };
        if !(sigma > slo && sigma < shi) {
            sigma = 0.5 * (slo + shi);
        }
        let (seed_sigma, seed) = if sigma - slo <= shi - sigma {
            (lo.0, lo.2)
        } else {
            (hi.0, hi.2)
        };
        let Some((z, f)) = eval_at(sigma, seed_sigma, &seed)
            .or_else(|| eval_at(0.5 * (slo + shi), seed_sigma, &seed))
        else {
            return None;
        };
        best = z;
        if f == 0.0 {
            return Some(best);
        }
        if f.signum() == flo.signum() {
            lo = (sigma, f, z);
        } else {
            hi = (sigma, f, z);
        }
        if (hi.0 - lo.0) * chord_norm < 1e-12 {
            break;
        }
    }
    Some(best)
}

/// Square Newton solve of the double-zero system
/// `{F = 0, eps4 = 0, eps3 = 0}` in all six unknowns.
fn polish_double_zero(
    base: &Params,
    free: (ParamId, ParamId),
    seed: &Vector6<f64>,
    cfg: &Codim2Config,
) -> Option<Vector6<f64>> {
    let eps3_of = |z: &Vector6<f64>| -> f64 {
        let (state, _, _) = unpack(z);
        let p = params_at(base, free, z);
        CharCoeffs::of_matrix(&jacobian(&state, &p)).eps3
    };
    let mut z = *seed;
    for _ in 0..30 {
        let (state, _, _) = unpack(&z);
        if !state.is_finite() {
            return None;
        }
        let p = params_at(base, free, &z);
        let f = rhs(&state, &p);
        let coeffs = CharCoeffs::of_matrix(&jacobian(&state, &p));
        let res = Vector6::new(f[0], f[1], f[2], f[3], coeffs.eps4, coeffs.eps3);
        if res.amax() < 1e-12 {
            return Some(z);
        }

        let j = jacobian(&state, &p);
        let fp1 = rhs_param_derivative(&state, &p, free.0);
        let fp2 = rhs_param_derivative(&state, &p, free.1);
        let grad4 = g_gradient(CurveId::Fold, base, free, &z, cfg.fd_step);
        let mut grad3 = Vector6::zeros();
        for k in 0..6 {
            let h = cfg.fd_step * z[k].abs().max(1.0);
            let mut zp = z;
            let mut zm = z;
            zp[k] += h;
            zm[k] -= h;
            grad3[k] = (eps3_of(&zp) - eps3_of(&zm)) / (2.0 * h);
        }
        let mut m = Matrix6::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m[(r, c)] = j[(r, c)];
            }
            m[(r, 4)] = fp1[r];
            m[(r, 5)] = fp2[r];
        }
        for c in 0..6 {
            m[(4, c)] = grad4[c];
            m[(5, c)] = grad3[c];
        }
        let delta = m.lu().solve(&res)?;
        if !delta.iter().all(|v| v.is_finite()) {
            return None;
        }
        z -= delta;
    }
    // Accept the final iterate if it still meets a relaxed tolerance.
    let (state, _, _) = unpack(&z);
    let p = params_at(base, free, &z);
    let f = rhs(&state, &p);
    let coeffs = CharCoeffs::of_matrix(&jacobian(&state, &p));
    let res = f.amax().max(coeffs.eps4.abs()).max(coeffs.eps3.abs());
    (res < 1e-9).then_some(z)
}

/// Scan one segment for codimension-two sign changes and append the
/// localized points.
fn collect_specials(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    cfg: &Codim2Config,
    prev: &Codim2Point,
    cur: &Codim2Point,
    specials: &mut Vec<Codim2Special>,
) {
    let z_a = pack(&prev.state, prev.p1, prev.p2);
    let z_b = pack(&cur.state, cur.p1, cur.p2);

    // Diagnostic zero: cusp on a fold curve, generalized Hopf on a Hopf
    // curve. NaN diagnostics (neutral-saddle segments) never cross.
    if prev.diag.is_finite()
        && cur.diag.is_finite()
        && prev.diag.signum() * cur.diag.signum() < 0.0
    {
        let test = |z: &Vector6<f64>| diagnostic(id, base, free, z);
        if let Some(z) = localize_crossing(id, base, free, cfg, &z_a, &z_b, &test) {
            let (state, p1, p2) = unpack(&z);
            specials.push(Codim2Special {
                kind: match id {
                    CurveId::Fold => Codim2Kind::Cusp,
                    CurveId::Hopf => Codim2Kind::GeneralizedHopf,
                },
                p1,
                p2,
                state,
            });
        }
    }

    // eps3 zero on either curve marks a double-zero (Bogdanov-Takens)
    // candidate; polish it with the square Newton solve.
    if prev.coeffs.eps3.signum() * cur.coeffs.eps3.signum() < 0.0 {
        let test = |z: &Vector6<f64>| {
            let (state, _, _) = unpack(z);
            let p = params_at(base, free, z);
            CharCoeffs::of_matrix(&jacobian(&state, &p)).eps3
        };
        if let Some(z) = localize_crossing(id, base, free, cfg, &z_a, &z_b, &test) {
            if let Some(z) = polish_double_zero(base, free, &z, cfg) {
                let (state, p1, p2) = unpack(&z);
                specials.push(Codim2Special {
                    kind: Codim2Kind::BogdanovTakens,
                    p1,
                    p2,
                    state,
                });
            }
        }
    }
}

/// Clip the final point onto an exited parameter boundary by fixing that
/// parameter and solving the remaining square system.
fn clip_to_boundary(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    z_outside: &Vector6<f64>,
    fixed_index: usize,
    bound: f64,
    cfg: &Codim2Config,
) -> Option<Vector6<f64>> {
    let mut border = Vector6::zeros();
    border[fixed_index] = 1.0;
    let mut anchor = *z_outside;
    anchor[fixed_index] = bound;
    let mut seed = anchor;
    seed[fixed_index] = bound;
    let (z, _) = correct_seeded(id, base, free, &anchor, &seed, &border, cfg, cfg.max_newton + 5)?;
    Some(z)
}

fn run_from(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    z0: Vector6<f64>,
    t_hint: Vector6<f64>,
    range1: (f64, f64),
    range2: (f64, f64),
    cfg: &Codim2Config,
) -> Result<Codim2Curve, Codim2Error> {
    let mut tangent = solve_tangent(id, base, free, &z0, &t_hint, cfg)?;
    let mut z = z0;
    let mut ds = cfg.ds0;

    let mut points = vec![make_point(id, base, free, &z)];
    let mut specials = Vec::new();
    let stop;

    loop {
        if points.len() >= cfg.max_steps {
            stop = StopReason::MaxSteps;
            break;
        }

        let mut accepted = None;
        while ds >= cfg.ds_min {
            let z_pred = z + ds * tangent;
            if let Some(hit) =
                correct_seeded(id, base, free, &z_pred, &z_pred, &tangent, cfg, cfg.max_newton)
            {
                accepted = Some(hit);
                break;
            }
            ds *= 0.5;
        }
        let Some((z_new, iters)) = accepted else {
            stop = StopReason::StepUnderflow;
            break;
        };

        let out1 = z_new[4] < range1.0 || z_new[4] > range1.1;
        let out2 = z_new[5] < range2.0 || z_new[5] > range2.1;
        if out1 || out2 {
            let (idx, range) = if out1 { (4, range1) } else { (5, range2) };
            let bound = z_new[idx].clamp(range.0, range.1);
            if let Some(z_clip) = clip_to_boundary(id, base, free, &z_new, idx, bound, cfg) {
                let point = make_point(id, base, free, &z_clip);
                collect_specials(id, base, free, cfg, points.last().unwrap(), &point, &mut specials);
                points.push(point);
            }
            stop = StopReason::RangeBoundary;
            break;
        }

        let new_tangent = solve_tangent(id, base, free, &z_new, &tangent, cfg)?;
        let point = make_point(id, base, free, &z_new);
        collect_specials(id, base, free, cfg, points.last().unwrap(), &point, &mut specials);
        points.push(point);

        if iters <= 3 {
            ds = (ds * 1.3).min(cfg.ds_max);
        }
        z = z_new;
        tangent = new_tangent;
    }

    Ok(Codim2Curve {
        id,
        free,
        points,
        specials,
        stop,
    })
}

/// Converge a seed onto the locus with the first parameter frozen at its
/// baseline value: a square solve of `{F = 0, g = 0}` over the state and
/// the second parameter.
fn seed_onto_locus(
    id: CurveId,
    base: &Params,
    free: (ParamId, ParamId),
    seed: &State,
    cfg: &Codim2Config,
) -> Result<Vector6<f64>, Codim2Error> {
    let z0 = pack(seed, base.get(free.0), base.get(free.1));
    let mut border = Vector6::zeros();
    border[4] = 1.0;
    match correct_seeded(id, base, free, &z0, &z0, &border, cfg, cfg.max_newton + 10) {
        Some((z, _)) => Ok(z),
        None => {
            let res = residual(id, base, free, &z0, &z0, &border)
                .map(|r| r.amax())
                .unwrap_or(f64::NAN);
            Err(Codim2Error::SeedNotConverged { residual: res })
        }
    }
}

/// Trace a two-parameter locus from a seed equilibrium near it.
///
/// The seed is first converged onto the locus by varying the state and
/// the second free parameter with the first held at its baseline; the
/// trace then moves initially so that the first parameter follows
/// `direction` (+1 or -1).
pub fn trace_locus(
    id: CurveId,
    p: &Params,
    free: (ParamId, ParamId),
    seed: &State,
    range1: (f64, f64),
    range2: (f64, f64),
    direction: f64,
    cfg: &Codim2Config,
) -> Result<Codim2Curve, Codim2Error> {
    if !(range1.0 < range1.1) || !(range2.0 < range2.1) || direction.abs() != 1.0 {
        return Err(Codim2Error::BadRequest);
    }
    let z0 = seed_onto_locus(id, p, free, seed, cfg)?;
    if z0[4] < range1.0 || z0[4] > range1.1 || z0[5] < range2.0 || z0[5] > range2.1 {
        return Err(Codim2Error::BadRequest);
    }
    let mut t_hint = Vector6::zeros();
    t_hint[4] = direction;
    run_from(id, p, free, z0, t_hint, range1, range2, cfg)
}

/// Analytic transcritical locus in a `(c, b)`-style parameter plane: for
/// each maturation rate `c` in the grid, the infant transition rate `b`
/// at which the prey-only threshold equals the adult predation rate.
/// Grid points where the expression degenerates or leaves `(0, inf)` are
/// skipped.
pub fn transcritical_locus(p: &Params, c_range: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let c = c_range.0 + (c_range.1 - c_range.0) * k as f64 / (n - 1).max(1) as f64;
        let g = p.a3 - c;
        let den = p.a2 * p.u * g - (g - p.d2) * p.d3;
        if den.abs() < 1e-14 {
            continue;
        }
        let b = p.d1 * (g - p.d2) * p.d3 / den;
        if b.is_finite() && b > 0.0 {
            out.push((c, b));
        }
    }
    out
}

/// Outcome class of one parameter-plane cell.
///
/// * `bistable_E2_E4` — prey-only and low-prey interior equilibria both
///   attract;
/// * `E2_stable_only` — only the prey-only state attracts;
/// * `E4_stable_only` — only the interior state attracts;
/// * `E4_unstable_cycle` — neither equilibrium attracts and the flow
///   settles on a limit cycle around the unstable interior state;
/// * `neither` — none of the above.
pub fn classify_cell(p: &Params) -> &'static str {
    let e2 = State::new(1.0, 0.0, 0.0, 0.0);
    let e2_stable = classify(&jacobian(&e2, p))
        .map(|r| r.verdict == StabilityVerdict::Stable)
        .unwrap_or(false);

    let interior = interior_equilibria(p);
    let e4 = interior.low.as_ref().filter(|c| c.feasible);
    let e4_stable = e4
        .and_then(|c| classify(&jacobian(&c.state, p)).ok())
        .map(|r| r.verdict == StabilityVerdict::Stable)
        .unwrap_or(false);

    match (e2_stable, e4_stable) {
        (true, true) => "bistable_E2_E4",
        (true, false) => "E2_stable_only",
        (false, true) => "E4_stable_only",
        (false, false) => {
            let Some(candidate) = e4 else {
                return "neither";
            };
            // Probe for a surrounding limit cycle. The kick off the
            // unstable state must be sizable: just past the oscillation
            // onset the focus repels at a rate proportional to the
            // parameter distance, and a tiny perturbation would need far
            // longer than the probe window to reach the cycle.
            let init = State::new(
                candidate.state.x * 1.15,
                candidate.state.y1,
                candidate.state.y2,
                candidate.state.y3,
            );
            let cfg = IntegratorConfig {
                tmax: 8000.0,
                dense_stride: Some(0.5),
                ..IntegratorConfig::default()
            };
            let Ok(traj) = integrate(p, &init, &cfg) else {
                return "neither";
            };
            match detect_attractor(p, &traj) {
                Attractor::LimitCycle { .. } => "E4_unstable_cycle",
                Attractor::Equilibrium { .. } => "neither",
                // Near the onset the orbit contracts onto the cycle as
                // slowly as the focus repels; give an undecided probe one
                // longer continuation from where the first run ended.
                Attractor::Undecided => {
                    let (_, resume) = traj.last();
                    let cfg2 = IntegratorConfig {
                        tmax: 20000.0,
                        ..cfg
                    };
                    match integrate(p, &resume, &cfg2) {
                        Ok(traj2) => match detect_attractor(p, &traj2) {
                            Attractor::LimitCycle { .. } => "E4_unstable_cycle",
                            _ => "neither",
                        },
                        Err(_) => "neither",
                    }
                }
            }
        }
    }
}

/// One classified cell of a parameter-plane sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell {
    pub p1: f64,
    pub p2: f64,
    pub label: &'static str,
}

/// Classify an `n1 x n2` grid of cell centers over the given parameter
/// rectangle, splitting rows across `jobs` threads.
pub fn region_map(
    base: &Params,
    free: (ParamId, ParamId),
    range1: (f64, f64),
    range2: (f64, f64),
    n1: usize,
    n2: usize,
    jobs: usize,
) -> Vec<RegionCell> {
    let n1 = n1.max(1);
    let n2 = n2.max(1);
    let jobs = jobs.clamp(1, n1 * n2);
    let centers = |range: (f64, f64), n: usize, k: usize| {
        range.0 + (range.1 - range.0) * (k as f64 + 0.5) / n as f64
    };

    let indices: Vec<(usize, usize)> =
        (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
    let mut cells = vec![
        RegionCell {
            p1: 0.0,
            p2: 0.0,
            label: "neither",
        };
        indices.len()
    ];

    std::thread::scope(|scope| {
        let chunk = indices.len().div_ceil(jobs);
        for (idx_chunk, out_chunk) in indices.chunks(chunk).zip(cells.chunks_mut(chunk)) {
            scope.spawn(move || {
                for ((i, j), out) in idx_chunk.iter().zip(out_chunk.iter_mut()) {
                    let p1 = centers(range1, n1, *i);
                    let p2 = centers(range2, n2, *j);
                    let p = base.with(free.0, p1).with(free.1, p2);
                    *out = RegionCell {
                        p1,
                        p2,
                        label: classify_cell(&p),
                    };
                }
            });
        }
    });
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn low_interior(p: &Params) -> State {
        interior_equilibria(p).low.unwrap().state
    }

    #[test]
    fn cusp_on_the_fold_curve_in_c_b() {
        let p = Params::table1();
        // Seed: the interior fold in b found by one-parameter
        // continuation sits at b = 0.108185755; seeding converges onto
        // the locus by adjusting (state, b) at fixed c.
        let seed = low_interior(&p);
        let cfg = Codim2Config::default();
        let curve = trace_locus(
            CurveId::Fold,
            &p,
            (ParamId::C, ParamId::B),
            &seed,
            (0.05, 0.15),
            (0.02, 0.2),
            1.0,
            &cfg,
        )
        .unwrap();

        let cusps: Vec<_> = curve
            .specials
            .iter()
            .filter(|s| s.kind == Codim2Kind::Cusp)
            .collect();
        assert!(!cusps.is_empty(), "specials: {:?}", curve.specials);
        // Triple point where the interior double root sits exactly on the
        // prey-only state: in the interior quadratic A x^2 - d x + C this
        // is {A = C, d = 2A}, solvable in closed form for (c, b).
        assert_abs_diff_eq!(cusps[0].p1, 0.102195444573, epsilon = 1e-5);
        assert_abs_diff_eq!(cusps[0].p2, 0.076241753072, epsilon = 1e-5);

        // The cusp state degenerates onto the prey-only equilibrium.
        assert_abs_diff_eq!(cusps[0].state.x, 1.0, epsilon = 1e-3);
        assert!(cusps[0].state.y2.abs() < 1e-3);
    }

    #[test]
    fn cusp_on_the_fold_curve_in_a3_c() {
        let p = Params::table1();
        let seed = low_interior(&p);
        let cfg = Codim2Config::default();
        let curve = trace_locus(
            CurveId::Fold,
            &p,
            (ParamId::A3, ParamId::C),
            &seed,
            (0.02, 0.09),
            (0.02, 0.15),
            -1.0,
            &cfg,
        )
        .unwrap();

        let cusps: Vec<_> = curve
            .specials
            .iter()
            .filter(|s| s.kind == Codim2Kind::Cusp)
            .collect();
        assert!(!cusps.is_empty(), "specials: {:?}", curve.specials);
        assert_abs_diff_eq!(cusps[0].p1, 0.039860683217, epsilon = 1e-5);
        assert_abs_diff_eq!(cusps[0].p2, 0.070396813753, epsilon = 1e-5);
    }

    #[test]
    fn bogdanov_takens_on_the_hopf_curve_in_a1_c() {
        let p = Params::table2().with(ParamId::C, 0.0359834531);
        let seed = low_interior(&p);
        let cfg = Codim2Config::default();
        let curve = trace_locus(
            CurveId::Hopf,
            &p,
            (ParamId::A1, ParamId::C),
            &seed,
            (0.05, 0.7),
            (0.005, 0.06),
            -1.0,
            &cfg,
        )
        .unwrap();

        let bts: Vec<_> = curve
            .specials
            .iter()
            .filter(|s| s.kind == Codim2Kind::BogdanovTakens)
            .collect();
        assert!(!bts.is_empty(), "specials: {:?}", curve.specials);
        assert_abs_diff_eq!(bts[0].p1, 0.14958964, epsilon = 1e-5);
        assert_abs_diff_eq!(bts[0].p2, 0.01858910, epsilon = 1e-5);

        // Double-zero certificate.
        let pp = p.with(ParamId::A1, bts[0].p1).with(ParamId::C, bts[0].p2);
        let coeffs = CharCoeffs::of_matrix(&jacobian(&bts[0].state, &pp));
        assert!(coeffs.eps4.abs() < 1e-10);
        assert!(coeffs.eps3.abs() < 1e-10);
    }

    #[test]
    fn generalized_hopf_and_bt_on_the_hopf_curve_in_a1_a2() {
        let p = Params::table2().with(ParamId::A2, 0.810108750);
        let seed = low_interior(&p);
        let cfg = Codim2Config::default();
        let curve = trace_locus(
            CurveId::Hopf,
            &p,
            (ParamId::A1, ParamId::A2),
            &seed,
            (0.01, 0.7),
            (0.1, 1.2),
            -1.0,
            &cfg,
        )
        .unwrap();

        let ghs: Vec<_> = curve
            .specials
            .iter()
            .filter(|s| s.kind == Codim2Kind::GeneralizedHopf)
            .collect();
        let bts: Vec<_> = curve
            .specials
            .iter()
            .filter(|s| s.kind == Codim2Kind::BogdanovTakens)
            .collect();
        assert!(!ghs.is_empty(), "specials: {:?}", curve.specials);
        assert!(!bts.is_empty(), "specials: {:?}", curve.specials);
        assert_abs_diff_eq!(ghs[0].p1, 0.04295362, epsilon = 1e-4);
        assert_abs_diff_eq!(ghs[0].p2, 0.37981623, epsilon = 1e-4);
        assert_abs_diff_eq!(bts[0].p1, 0.01913331, epsilon = 1e-4);
        assert_abs_diff_eq!(bts[0].p2, 0.27493099, epsilon = 1e-4);
    }

    #[test]
    fn transcritical_locus_matches_the_branch_point() {
        let p = Params::table1();
        let locus = transcritical_locus(&p, (0.09, 0.09), 1);
        assert_eq!(locus.len(), 1);
        let (c, b) = locus[0];
        assert_abs_diff_eq!(c, 0.09, epsilon = 0.0);
        assert_abs_diff_eq!(b, 0.114705882353, epsilon = 1e-9);
    }

    #[test]
    fn region_cells_recover_known_regimes() {
        // First benchmark set: prey-only and interior states both
        // attract.
        assert_eq!(classify_cell(&Params::table1()), "bistable_E2_E4");
        // Second benchmark set past the oscillation onset: the interior
        // focus has shed a stable cycle.
        let p = Params::table2().with(ParamId::C, 0.037);
        assert_eq!(classify_cell(&p), "E4_unstable_cycle");
    }

    #[test]
    fn region_map_is_thread_count_invariant() {
        let p = Params::table1();
        let serial = region_map(&p, (ParamId::C, ParamId::B), (0.08, 0.1), (0.1, 0.12), 3, 3, 1);
        let parallel = region_map(&p, (ParamId::C, ParamId::B), (0.08, 0.1), (0.1, 0.12), 3, 3, 4);
        assert_eq!(serial, parallel);
        assert!(serial.iter().any(|c| c.label == "bistable_E2_E4"));
    }

    #[test]
    fn bt_spectrum_has_a_double_zero_and_two_contracting_directions() {
        let p = Params::table2().with(ParamId::C, 0.0359834531);
        let curve = trace_locus(
            CurveId::Hopf,
            &p,
            (ParamId::A1, ParamId::C),
            &low_interior(&p),
            (0.05, 0.7),
            (0.005, 0.06),
            -1.0,
            &Codim2Config::default(),
        )
        .unwrap();
        let bt = curve
            .specials
            .iter()
            .find(|s| s.kind == Codim2Kind::BogdanovTakens)
            .unwrap();

        let pp = p.with(ParamId::A1, bt.p1).with(ParamId::C, bt.p2);
        let spectrum = crate::stability::eigenvalues(&jacobian(&bt.state, &pp)).unwrap();
        let mut mags: Vec<f64> = spectrum.values.iter().map(|v| v.norm()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(mags[0] < 1e-5 && mags[1] < 1e-5, "eigenvalues: {:?}", spectrum.values);
        let contracting = spectrum.values.iter().filter(|v| v.re < -1e-3).count();
        assert_eq!(contracting, 2, "eigenvalues: {:?}", spectrum.values);
    }

    #[test]
    fn gh_point_has_vanishing_l1_and_a_transverse_slope() {
        let p = Params::table2().with(ParamId::A2, 0.810108750);
        let cfg = Codim2Config::default();
        let curve = trace_locus(
            CurveId::Hopf,
            &p,
            (ParamId::A1, ParamId::A2),
            &low_interior(&p),
            (0.01, 0.7),
            (0.1, 1.2),
            -1.0,
            &cfg,
        )
        .unwrap();
        let gh = curve
            .specials
            .iter()
            .find(|s| s.kind == Codim2Kind::GeneralizedHopf)
            .unwrap();

        let z = pack(&gh.state, gh.p1, gh.p2);
        let l1_at_gh = diagnostic(CurveId::Hopf, &p, (ParamId::A1, ParamId::A2), &z);
        assert!(l1_at_gh.abs() < 1e-6, "l1 at GH = {l1_at_gh}");

        // Transverse crossing: l1 sweeps a healthy range across the
        // flanking curve points.
        let flank: Vec<&Codim2Point> = curve
            .points
            .windows(2)
            .find(|w| {
                (w[0].p1 - gh.p1) * (w[1].p1 - gh.p1) <= 0.0
                    && w[0].diag.is_finite()
                    && w[1].diag.is_finite()
            })
            .map(|w| vec![&w[0], &w[1]])
            .unwrap();
        let ds = ((flank[1].p1 - flank[0].p1).powi(2) + (flank[1].p2 - flank[0].p2).powi(2)).sqrt();
        let slope = (flank[1].diag - flank[0].diag).abs() / ds;
        assert!(slope > 1e-4, "l1 slope along curve = {slope}");
    }

    #[test]
    fn fold_curve_slices_reproduce_one_parameter_folds() {
        use crate::continuation::{continue_equilibrium, ContinuationConfig, SpecialKind};

        let p = Params::table1();
        let curve = trace_locus(
            CurveId::Fold,
            &p,
            (ParamId::C, ParamId::B),
            &low_interior(&p),
            (0.05, 0.15),
            (0.02, 0.2),
            1.0,
            &Codim2Config::default(),
        )
        .unwrap();

        // Three slices on the smooth stretch before the cusp (past it the
        // fold state leaves the positive cone).
        let eligible: Vec<&Codim2Point> =
            curve.points.iter().filter(|q| q.p1 < 0.1).collect();
        assert!(eligible.len() >= 3);
        for &point in [
            eligible[eligible.len() / 5],
            eligible[eligible.len() / 2],
            eligible[4 * eligible.len() / 5],
        ]
        .iter()
        {
            let sliced = p.with(ParamId::B, point.p2);
            // Interior equilibria exist on the high-c side of this fold;
            // seed there and walk down onto it.
            let seed_c = point.p1 + 0.004;
            let seed = interior_equilibria(&sliced.with(ParamId::C, seed_c))
                .low
                .unwrap()
                .state;
            let run = continue_equilibrium(
                &sliced.with(ParamId::C, seed_c),
                ParamId::C,
                &seed,
                (point.p1 - 0.01, seed_c + 1e-6),
                -1.0,
                &ContinuationConfig::default(),
            )
            .unwrap();
            let lp = run
                .specials
                .iter()
                .find(|s| s.kind == SpecialKind::Fold)
                .unwrap();
            assert_abs_diff_eq!(lp.param, point.p1, epsilon = 1e-5);
        }
    }

    #[test]
    fn fold_and_transcritical_curves_osculate_at_the_cusp() {
        // Contact order between the fold locus and the transcritical
        // locus at the cusp: the gap in b shrinks quadratically in the
        // offset along c.
        let p = Params::table1();
        let (c_star, b_star) = (0.102195444573, 0.076241753072);

        let fold_b = |c: f64| -> f64 {
            let at = p.with(ParamId::C, c);
            // b-slope of the fold locus is about -1.9 near the cusp.
            let center = b_star - 1.92 * (c - c_star);
            let f = |b: f64| interior_equilibria(&at.with(ParamId::B, b)).mu_squared;
            let (mut lo, mut hi) = (center - 2e-3, center + 2e-3);
            let (flo, fhi) = (f(lo), f(hi));
            assert!(
                flo.signum() != fhi.signum(),
                "no bracket at c={c}: f({lo})={flo}, f({hi})={fhi}"
            );
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };

        let mut logs = Vec::new();
        for dc in [-4e-3, -2e-3, 2e-3, 4e-3] {
            let c = c_star + dc;
            let tc_b = transcritical_locus(&p, (c, c), 1)[0].1;
            let gap = (fold_b(c) - tc_b).abs();
            logs.push((dc.abs().ln(), gap.ln()));
        }
        let n = logs.len() as f64;
        let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |a, v| (a.0 + v.0, a.1 + v.1));
        let sxx: f64 = logs.iter().map(|v| v.0 * v.0).sum();
        let sxy: f64 = logs.iter().map(|v| v.0 * v.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(
            (1.7..=2.3).contains(&slope),
            "tangency exponent {slope}, gaps {logs:?}"
        );
    }
}

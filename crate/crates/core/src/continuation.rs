//! One-parameter equilibrium continuation by pseudo-arclength, with
//! detection and localization of folds, Hopf points, and branch points.
//!
//! The continuation variable is `z = (x, y1, y2, y3, p) in R^5` where `p`
//! is the free parameter. Each step predicts along the normalized tangent
//! of the solution curve of `F(z) = 0` (the vector field with the free
//! parameter appended) and corrects with Newton iterations orthogonal to
//! the tangent, adapting the arclength step to the corrector's effort.
//!
//! Three test functions are recorded at every accepted point:
//!
//! * fold — `eps4` (the Jacobian determinant up to sign convention),
//!   which crosses zero at a saddle-node;
//! * Hopf — the discriminant `eps1 eps2 eps3 - eps3^2 - eps1^2 eps4`,
//!   valid as a Hopf test only while `eps1 > 0` and
//!   `eps1 eps2 - eps3 > 0`; outside that region the previous sign is
//!   carried so that no spurious crossing is reported;
//! * branch — the determinant of the tangent-bordered extended Jacobian,
//!   which changes sign where a second solution branch crosses.
//!
//! A sign change is localized by a bracketed secant iteration on the
//! corrected curve. A fold crossing that coincides with a branch-test
//! crossing (within `1e-7` in the parameter) is reported as a branch
//! point; an isolated fold as a limit point; a Hopf crossing carries the
//! first Lyapunov quantity of the reduced normal form when the reduction
//! succeeds.

use nalgebra::{Matrix5, Vector5};
use thiserror::Error;

use crate::equilibria::{refine, EquilibriaError};
use crate::model::{jacobian, rhs, rhs_param_derivative, ParamId, Params, State};
use crate::normalform::hopf_normal_form;
use crate::stability::{hopf_discriminant, routh_hurwitz, CharCoeffs, RouthHurwitz};

/// Step-size and corrector policy for a continuation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationConfig {
    /// Initial arclength step.
    pub ds0: f64,
    /// Abandon the run when the step must shrink below this.
    pub ds_min: f64,
    /// Never grow the step beyond this.
    pub ds_max: f64,
    /// Corrector residual tolerance (max norm).
    pub tol: f64,
    /// Maximum number of accepted points.
    pub max_steps: usize,
    /// Newton iterations allowed per correction.
    pub max_newton: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            ds0: 1e-3,
            ds_min: 1e-9,
            ds_max: 0.01,
            tol: 1e-10,
            max_steps: 2000,
            max_newton: 8,
        }
    }
}

/// One accepted point of the traced branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub param: f64,
    pub state: State,
    pub coeffs: CharCoeffs,
    pub rh: RouthHurwitz,
    pub test_fold: f64,
    pub test_hopf: f64,
    pub test_branch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    /// Saddle-node (limit point), labeled `LP`.
    Fold,
    /// Hopf point, labeled `H`.
    Hopf,
    /// Branch (transcritical) point, labeled `BP`.
    BranchPoint,
}

impl SpecialKind {
    pub fn label(&self) -> &'static str {
        match self {
            SpecialKind::Fold => "LP",
            SpecialKind::Hopf => "H",
            SpecialKind::BranchPoint => "BP",
        }
    }
}

/// A localized codimension-one bifurcation on the branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialPoint {
    pub kind: SpecialKind,
    pub param: f64,
    pub state: State,
    /// First Lyapunov quantity at Hopf points, when the normal-form
    /// reduction succeeds.
    pub l1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The branch left the requested parameter range (the last point is
    /// clipped to the boundary when the boundary solve converges).
    RangeBoundary,
    /// The accepted-point budget ran out.
    MaxSteps,
    /// The corrector kept failing down to the minimum step.
    StepUnderflow,
}

/// A traced solution branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCurve {
    pub free: ParamId,
    pub points: Vec<CurvePoint>,
    pub specials: Vec<SpecialPoint>,
    pub stop: StopReason,
}

/// A maximal run of consecutive points sharing one stability flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySegment {
    pub param_from: f64,
    pub param_to: f64,
    pub stable: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ContinuationError {
    #[error("seed equilibrium did not converge (residual {residual})")]
    SeedNotConverged { residual: f64 },
    #[error("tangent system is singular")]
    TangentSingular,
    #[error("parameter range is empty or the direction is not +1/-1")]
    BadRequest,
    #[error("no second branch could be found at the branch point")]
    NoSecondBranch,
    #[error(transparent)]
    Refinement(#[from] EquilibriaError),
}

fn pack(state: &State, param: f64) -> Vector5<f64> {
    Vector5::new(state.x, state.y1, state.y2, state.y3, param)
}

fn unpack(z: &Vector5<f64>) -> (State, f64) {
    (State::new(z[0], z[1], z[2], z[3]), z[4])
}

/// Bordered 5x5 matrix: the extended Jacobian `[dF/dstate | dF/dparam]`
/// on top of the given border row.
fn bordered_matrix(base: &Params, free: ParamId, z: &Vector5<f64>, border: &Vector5<f64>) -> Matrix5<f64> {
    let (state, param) = unpack(z);
    let p = base.with(free, param);
    let j = jacobian(&state, &p);
    let fp = rhs_param_derivative(&state, &p, free);
    let mut m = Matrix5::zeros();
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = j[(r, c)];
        }
        m[(r, 4)] = fp[r];
    }
    for c in 0..5 {
        m[(4, c)] = border[c];
    }
    m
}

/// Unit tangent of the solution curve at `z`, oriented to keep a positive
/// inner product with `previous`.
fn solve_tangent(
    base: &Params,
    free: ParamId,
    z: &Vector5<f64>,
    previous: &Vector5<f64>,
) -> Result<Vector5<f64>, ContinuationError> {
    let m = bordered_matrix(base, free, z, previous);
    let rhs_vec = Vector5::new(0.0, 0.0, 0.0, 0.0, 1.0);
    let t = m
        .lu()
        .solve(&rhs_vec)
        .ok_or(ContinuationError::TangentSingular)?;
    let norm = t.norm();
    if !norm.is_finite() || norm < 1e-300 {
        return Err(ContinuationError::TangentSingular);
    }
    Ok(t / norm)
}

/// Newton correction onto the curve within the hyperplane
/// `border . (z - anchor) = 0`, starting the iteration at `seed`.
/// Separating the anchor from the seed lets a caller steer which nearby
/// solution branch the iteration converges to. Returns the corrected
/// point and the number of iterations used.
fn correct_seeded(
    base: &Params,
    free: ParamId,
    anchor: &Vector5<f64>,
    seed: &Vector5<f64>,
    border: &Vector5<f64>,
    tol: f64,
    max_newton: usize,
) -> Option<(Vector5<f64>, usize)> {
    let z_pred = anchor;
    let mut z = *seed;
    for iter in 0..max_newton {
        let (state, param) = unpack(&z);
        if !state.is_finite() || !param.is_finite() {
            return None;
        }
        let p = base.with(free, param);
        let f = rhs(&state, &p);
        let constraint = border.dot(&(z - z_pred));
        let res = f.amax().max(constraint.abs());
        if res < tol {
            return Some((z, iter));
        }
        let m = bordered_matrix(base, free, &z, border);
        let g = Vector5::new(f[0], f[1], f[2], f[3], constraint);
        let delta = m.lu().solve(&g)?;
        if !delta.iter().all(|v| v.is_finite()) {
            return None;
        }
        z -= delta;
    }
    // Accept a final iterate that meets the tolerance even when the loop
    // budget was exhausted computing it.
    let (state, param) = unpack(&z);
    if !state.is_finite() {
        return None;
    }
    let p = base.with(free, param);
    let res = rhs(&state, &p).amax().max(border.dot(&(z - z_pred)).abs());
    (res < tol).then_some((z, max_newton))
}

/// Newton correction of `z_pred` onto the curve within the hyperplane
/// `border . (z - z_pred) = 0`.
fn correct(
    base: &Params,
    free: ParamId,
    z_pred: &Vector5<f64>,
    border: &Vector5<f64>,
    tol: f64,
    max_newton: usize,
) -> Option<(Vector5<f64>, usize)> {
    correct_seeded(base, free, z_pred, z_pred, border, tol, max_newton)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TestKind {
    Fold,
    Hopf,
    Branch,
}

/// Raw test-function value at a point; the branch test borders the
/// extended Jacobian with the segment direction `t_ab`.
fn eval_test(
    base: &Params,
    free: ParamId,
    kind: TestKind,
    z: &Vector5<f64>,
    t_ab: &Vector5<f64>,
) -> f64 {
    let (state, param) = unpack(z);
    let p = base.with(free, param);
    match kind {
        TestKind::Fold => CharCoeffs::of_matrix(&jacobian(&state, &p)).eps4,
        TestKind::Hopf => hopf_discriminant(&CharCoeffs::of_matrix(&jacobian(&state, &p))),
        TestKind::Branch => bordered_matrix(base, free, z, t_ab).determinant(),
    }
}

/// Localize a sign change of a test function between two accepted points
/// by bracketed secant iteration on the corrected curve.
///
/// Every evaluation is warm-started from the nearer bracket endpoint's
/// converged point, so the Newton corrector stays on the branch the
/// endpoints belong to. Without this, localization near a transcritical
/// point hops between the two intersecting branches and the apparent
/// sign change settles on the basin boundary instead of the root.
fn localize_crossing(
    base: &Params,
    free: ParamId,
    cfg: &ContinuationConfig,
    kind: TestKind,
    z_a: &Vector5<f64>,
    z_b: &Vector5<f64>,
) -> Option<Vector5<f64>> {
    let chord = z_b - z_a;
    let chord_norm = chord.norm();
    if chord_norm < 1e-300 {
        return None;
    }
    let t_ab = chord / chord_norm;

    let eval_at = |sigma: f64, seed_sigma: f64, seed: &Vector5<f64>| -> Option<(Vector5<f64>, f64)> {
        let anchor = z_a + sigma * chord;
        // Slide the converged seed along the chord so the iteration
        // starts near the same branch at the new section plane.
        let start = seed + (sigma - seed_sigma) * chord;
        let (z, _) =
            correct_seeded(base, free, &anchor, &start, &t_ab, cfg.tol, cfg.max_newton + 4)?;
        Some((z, eval_test(base, free, kind, &z, &t_ab)))
    };

    // Endpoint values recomputed with the common border so the bracket is
    // self-consistent (the per-point values used each point's own
    // tangent as the border of the branch test).
    let flo = eval_test(base, free, kind, z_a, &t_ab);
    let fhi = eval_test(base, free, kind, z_b, &t_ab);
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
        // Secant proposal clamped into the bracket interior; fall back to
        // bisection when it degenerates.
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

/// Guarded Hopf test: the discriminant where the guard conditions hold,
/// otherwise the previous sign with the raw magnitude, so crossings are
/// only reported inside the guard region.
fn guarded_hopf_test(coeffs: &CharCoeffs, previous: Option<f64>) -> f64 {
    let delta = hopf_discriminant(coeffs);
    let guards_ok = coeffs.eps1 > 0.0 && coeffs.eps1 * coeffs.eps2 - coeffs.eps3 > 0.0;
    match (guards_ok, previous) {
        (true, _) | (false, None) => delta,
        (false, Some(prev)) => delta.abs().max(1e-30).copysign(prev),
    }
}

fn make_point(
    base: &Params,
    free: ParamId,
    z: &Vector5<f64>,
    tangent: &Vector5<f64>,
    prev_hopf: Option<f64>,
) -> CurvePoint {
    let (state, param) = unpack(z);
    let p = base.with(free, param);
    let coeffs = CharCoeffs::of_matrix(&jacobian(&state, &p));
    let rh = routh_hurwitz(&coeffs);
    CurvePoint {
        param,
        state,
        coeffs,
        rh,
        test_fold: coeffs.eps4,
        test_hopf: guarded_hopf_test(&coeffs, prev_hopf),
        test_branch: bordered_matrix(base, free, z, tangent).determinant(),
    }
}

/// Scan one curve segment for sign changes of the three test functions,
/// localize them, and append the results.
///
/// A fold-test crossing is localized on the determinant `eps4`, which is
/// well conditioned on the branch even at a transcritical crossing; the
/// branch test decides only whether that singular point is a plain fold
/// or a branch point. (The branch determinant itself cannot be localized
/// point-wise: near the crossing the corrector's linear systems are
/// nearly singular and accepted iterates drift off the branch.)
fn collect_specials(
    base: &Params,
    free: ParamId,
    cfg: &ContinuationConfig,
    prev: &CurvePoint,
    cur: &CurvePoint,
    specials: &mut Vec<SpecialPoint>,
) {
    let z_a = pack(&prev.state, prev.param);
    let z_b = pack(&cur.state, cur.param);

    let fold_crossed = prev.test_fold.signum() * cur.test_fold.signum() < 0.0;
    let hopf_crossed = prev.test_hopf.signum() * cur.test_hopf.signum() < 0.0;
    let branch_crossed = prev.test_branch.signum() * cur.test_branch.signum() < 0.0;

    if fold_crossed {
        if let Some(z) = localize_crossing(base, free, cfg, TestKind::Fold, &z_a, &z_b) {
            let (state, param) = unpack(&z);
            let kind = if branch_crossed {
                SpecialKind::BranchPoint
            } else {
                SpecialKind::Fold
            };
            specials.push(SpecialPoint {
                kind,
                param,
                state,
                l1: None,
            });
        }
    } else if branch_crossed {
        // A branch crossing without a determinant crossing is atypical;
        // fall back to localizing the branch test directly.
        if let Some(z) = localize_crossing(base, free, cfg, TestKind::Branch, &z_a, &z_b) {
            let (state, param) = unpack(&z);
            specials.push(SpecialPoint {
                kind: SpecialKind::BranchPoint,
                param,
                state,
                l1: None,
            });
        }
    }

    if hopf_crossed {
        if let Some(z) = localize_crossing(base, free, cfg, TestKind::Hopf, &z_a, &z_b) {
            let (state, param) = unpack(&z);
            let p = base.with(free, param);
            let l1 = hopf_normal_form(&p, &state).ok().map(|nf| nf.l1);
            specials.push(SpecialPoint {
                kind: SpecialKind::Hopf,
                param,
                state,
                l1,
            });
        }
    }
}

/// Core predictor–corrector loop from a converged point `z0` with initial
/// tangent hint `t_hint` (not necessarily normalized or tangential).
fn run_from(
    base: &Params,
    free: ParamId,
    z0: Vector5<f64>,
    t_hint: Vector5<f64>,
    range: (f64, f64),
    cfg: &ContinuationConfig,
) -> Result<BranchCurve, ContinuationError> {
    let (lo, hi) = range;
    let mut tangent = solve_tangent(base, free, &z0, &t_hint)?;
    let mut z = z0;
    let mut ds = cfg.ds0;

    let mut points = vec![make_point(base, free, &z, &tangent, None)];
    let mut specials = Vec::new();
    let stop;

    loop {
        if points.len() >= cfg.max_steps {
            stop = StopReason::MaxSteps;
            break;
        }

        // Predict/correct, halving the step until the corrector succeeds.
        let mut accepted = None;
        while ds >= cfg.ds_min {
            let z_pred = z + ds * tangent;
            if let Some(hit) = correct(base, free, &z_pred, &tangent, cfg.tol, cfg.max_newton) {
                accepted = Some(hit);
                break;
            }
            ds *= 0.5;
        }
        let Some((z_new, iters)) = accepted else {
            stop = StopReason::StepUnderflow;
            break;
        };

        if z_new[4] < lo || z_new[4] > hi {
            // Clip the final point onto the range boundary by a
            // fixed-parameter solve seeded from the chord.
            let boundary = z_new[4].clamp(lo, hi);
            let denom = z_new[4] - z[4];
            let sigma = if denom.abs() > 1e-300 {
                ((boundary - z[4]) / denom).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let chord_state = State::from_vector(
                &(z.fixed_rows::<4>(0) * (1.0 - sigma) + z_new.fixed_rows::<4>(0) * sigma),
            );
            let p_boundary = base.with(free, boundary);
            if let Ok(clipped) = refine(&p_boundary, &chord_state) {
                let z_clip = pack(&clipped, boundary);
                let prev_hopf = points.last().map(|pt| pt.test_hopf);
                let point = make_point(base, free, &z_clip, &tangent, prev_hopf);
                collect_specials(base, free, cfg, points.last().unwrap(), &point, &mut specials);
                points.push(point);
            }
            stop = StopReason::RangeBoundary;
            break;
        }

        let new_tangent = solve_tangent(base, free, &z_new, &tangent)?;
        let prev_hopf = points.last().map(|pt| pt.test_hopf);
        let point = make_point(base, free, &z_new, &new_tangent, prev_hopf);
        collect_specials(base, free, cfg, points.last().unwrap(), &point, &mut specials);
        points.push(point);

        if iters <= 3 {
            ds = (ds * 1.3).min(cfg.ds_max);
        }
        z = z_new;
        tangent = new_tangent;
    }

    Ok(BranchCurve {
        free,
        points,
        specials,
        stop,
    })
}

/// Trace the equilibrium branch through `seed` as `free` varies over
/// `range`, starting from the parameter value in `p` and moving initially
/// in `direction` (+1 or -1).
pub fn continue_equilibrium(
    p: &Params,
    free: ParamId,
    seed: &State,
    range: (f64, f64),
    direction: f64,
    cfg: &ContinuationConfig,
) -> Result<BranchCurve, ContinuationError> {
    let (lo, hi) = range;
    let param0 = p.get(free);
    if !(lo < hi) || !(param0 >= lo && param0 <= hi) || direction.abs() != 1.0 {
        return Err(ContinuationError::BadRequest);
    }
    let converged = refine(p, seed)?;
    let residual = rhs(&converged, p).amax();
    if residual > 1e-8 {
        return Err(ContinuationError::SeedNotConverged { residual });
    }
    let z0 = pack(&converged, param0);
    let t_hint = Vector5::new(0.0, 0.0, 0.0, 0.0, direction);
    run_from(p, free, z0, t_hint, range, cfg)
}

/// Trace the branch through `seed` in both senses of `free` and stitch
/// the legs into one curve, ordered by arclength from the end reached by
/// the downward leg.
///
/// The arclength parametrization means `param` is not monotone along the
/// result whenever a leg turns around at a fold.  The reported stop
/// reason is the upward leg's.
pub fn continue_equilibrium_both(
    p: &Params,
    free: ParamId,
    seed: &State,
    range: (f64, f64),
    cfg: &ContinuationConfig,
) -> Result<BranchCurve, ContinuationError> {
    let down = continue_equilibrium(p, free, seed, range, -1.0, cfg)?;
    let up = continue_equilibrium(p, free, seed, range, 1.0, cfg)?;
    let mut points: Vec<CurvePoint> = down.points.iter().rev().copied().collect();
    points.extend(up.points.iter().skip(1).copied());
    let mut specials: Vec<SpecialPoint> = down.specials.iter().rev().copied().collect();
    specials.extend(up.specials.iter().copied());
    Ok(BranchCurve {
        free,
        points,
        specials,
        stop: up.stop,
    })
}

/// Switch onto the second branch through a branch point found by
/// [`continue_equilibrium`], continuing away from it in both senses until
/// one converges.
pub fn branch_switch(
    p: &Params,
    free: ParamId,
    curve: &BranchCurve,
    bp: &SpecialPoint,
    range: (f64, f64),
    cfg: &ContinuationConfig,
) -> Result<BranchCurve, ContinuationError> {
    if bp.kind != SpecialKind::BranchPoint {
        return Err(ContinuationError::BadRequest);
    }
    let z_star = pack(&bp.state, bp.param);

    // Approximate the old tangent from the accepted points flanking the
    // branch point along the curve.
    let mut t_old = Vector5::new(0.0, 0.0, 0.0, 0.0, 1.0);
    for w in curve.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if (a.param - bp.param) * (b.param - bp.param) <= 0.0 {
            let chord = pack(&b.state, b.param) - pack(&a.state, a.param);
            let norm = chord.norm();
            if norm > 1e-300 {
                t_old = chord / norm;
                break;
            }
        }
    }

    // The null space of the extended Jacobian at the branch point is
    // two-dimensional; bordering with the old tangent isolates the other
    // null direction as the smallest singular vector.
    let m = bordered_matrix(p, free, &z_star, &t_old);
    let svd = m.svd(true, true);
    let v_t = svd.v_t.ok_or(ContinuationError::TangentSingular)?;
    let mut min_idx = 0;
    for k in 1..5 {
        if svd.singular_values[k] < svd.singular_values[min_idx] {
            min_idx = k;
        }
    }
    let psi = Vector5::from_iterator(v_t.row(min_idx).iter().copied());

    let delta = 1e-3;
    for sense in [1.0_f64, -1.0] {
        let z_seed = z_star + sense * delta * psi;
        if let Some((z_new, _)) = correct(p, free, &z_seed, &psi, cfg.tol, cfg.max_newton + 4) {
            if (z_new - z_star).norm() > delta * 0.1 {
                let hint = sense * psi;
                return run_from(p, free, z_new, hint, range, cfg);
            }
        }
    }
    Err(ContinuationError::NoSecondBranch)
}

/// Group the curve into maximal runs of constant stability flag.
pub fn stability_segments(curve: &BranchCurve) -> Vec<StabilitySegment> {
    let mut segments: Vec<StabilitySegment> = Vec::new();
    for point in &curve.points {
        match segments.last_mut() {
            Some(seg) if seg.stable == point.rh.stable => seg.param_to = point.param,
            _ => segments.push(StabilitySegment {
                param_from: point.param,
                param_to: point.param,
                stable: point.rh.stable,
            }),
        }
    }
    segments
}

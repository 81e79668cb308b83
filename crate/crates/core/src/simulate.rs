//! Time integration and trajectory diagnostics.
//!
//! The integrator is an explicit Dormand–Prince 5(4) pair with the
//! first-same-as-last optimization and a PI step-size controller
//! (safety 0.9, integral exponent `1/5 - 0.75 beta`, `beta = 0.04`,
//! step-factor clamp `[0.2, 10]`, growth suppressed immediately after a
//! rejection). The error estimate is the RMS of the embedded difference
//! scaled by `atol + rtol * max(|y0_i|, |y1_i|)` per component.
//!
//! Sampled output between accepted steps uses cubic Hermite
//! interpolation on `(y0, f0, y1, f1)` — formally one order below the
//! integrator's dense output, which is ample for plotting and for the
//! window statistics computed here. Biomass components are clamped to
//! zero at emission only (round-off can produce `-1e-12`-scale
//! negatives); the integration itself is never clamped.

use nalgebra::Vector4;
use thiserror::Error;

use crate::equilibria::{all_equilibria, EquilibriumKind};
use crate::model::{rhs, Params, State};

/// Integrator tolerances and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step size.
    pub h0: f64,
    /// Step-size ceiling.
    pub hmax: f64,
    /// Integration horizon (the run always ends exactly at `tmax`).
    pub tmax: f64,
    /// `Some(dt)`: sample the solution on the uniform grid `k * dt`;
    /// `None`: record every accepted step.
    pub dense_stride: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            h0: 1e-4,
            hmax: 5.0,
            tmax: 5000.0,
            dense_stride: None,
        }
    }
}

/// A sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<State>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> (f64, State) {
        let i = self.t.len() - 1;
        (self.t[i], self.states[i])
    }

    /// Index of the first sample with `t >= t_from`.
    pub fn index_from(&self, t_from: f64) -> usize {
        self.t.partition_point(|&t| t < t_from)
    }
}

/// What a trajectory settles onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attractor {
    Equilibrium {
        kind: EquilibriumKind,
        distance: f64,
    },
    LimitCycle {
        /// Half the prey peak-to-peak span over the tail window.
        amplitude: f64,
    },
    Undecided,
}

/// Peak statistics of an established oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleMetrics {
    /// Mean spacing of refined prey maxima.
    pub period: f64,
    /// Half the prey peak-to-peak span over the window.
    pub amplitude: f64,
    pub peak_count: usize,
}

/// Outcome of a near-extinction recovery experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BloomReport {
    pub outcome: Attractor,
    /// Smallest total predator biomass along the trajectory.
    pub predator_min: f64,
    /// Time at which the minimum occurred.
    pub predator_min_t: f64,
    /// Total predator biomass at the end of the run.
    pub predator_final: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimulateError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("fewer than three prey maxima in the analysis window")]
    NoOscillation,
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
}

// Dormand–Prince 5(4) coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights (also the last stage row: first-same-as-last).
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn clamp_emit(v: &Vector4<f64>) -> State {
    State::from_vector(v).clamped_nonnegative()
}

/// Cubic Hermite interpolant on one accepted step.
fn hermite(
    y0: &Vector4<f64>,
    f0: &Vector4<f64>,
    y1: &Vector4<f64>,
    f1: &Vector4<f64>,
    h: f64,
    theta: f64,
) -> Vector4<f64> {
    let diff = y1 - y0;
    y0 * (1.0 - theta)
        + y1 * theta
        + (diff * (1.0 - 2.0 * theta) + f0 * ((theta - 1.0) * h) + f1 * (theta * h))
            * (theta * (theta - 1.0))
}

/// Integrates the system from `init` to `cfg.tmax`.
pub fn integrate(
    p: &Params,
    init: &State,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SimulateError> {
    if !(cfg.tmax > 0.0 && cfg.tmax.is_finite()) {
        return Err(SimulateError::InvalidConfig("tmax must be positive"));
    }
    if !(cfg.rtol > 0.0 && cfg.atol > 0.0) {
        return Err(SimulateError::InvalidConfig("tolerances must be positive"));
    }
    if let Some(dt) = cfg.dense_stride {
        if !(dt > 0.0) {
            return Err(SimulateError::InvalidConfig("dense stride must be positive"));
        }
    }
    if !init.is_finite() {
        return Err(SimulateError::NonFinite { t: 0.0 });
    }

    let mut t = 0.0_f64;
    let mut y = init.as_vector();
    let mut k1 = rhs(&State::from_vector(&y), p);
    let mut h = cfg.h0.min(cfg.hmax).min(cfg.tmax);
    let mut errold = 1e-4_f64;
    let mut just_rejected = false;

    let mut traj = Trajectory {
        t: vec![0.0],
        states: vec![clamp_emit(&y)],
        steps_accepted: 0,
        steps_rejected: 0,
    };
    // Next dense-grid index (grid point 0 is already emitted).
    let mut grid_next: u64 = 1;

    let expo = 0.2 - 0.75 * BETA;

    while t < cfg.tmax {
        // Land exactly on the horizon.
        if t + 1.01 * h >= cfg.tmax {
            h = cfg.tmax - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(SimulateError::StepUnderflow { t, h });
        }

        let eval = |tau: f64, v: &Vector4<f64>| -> Vector4<f64> {
            let _ = tau; // autonomous field
            rhs(&State::from_vector(v), p)
        };

        let k2 = eval(t + C[1] * h, &(y + h * (A2[0] * k1)));
        let k3 = eval(t + C[2] * h, &(y + h * (A3[0] * k1 + A3[1] * k2)));
        let k4 = eval(t + C[3] * h, &(y + h * (A4[0] * k1 + A4[1] * k2 + A4[2] * k3)));
        let k5 = eval(
            t + C[4] * h,
            &(y + h * (A5[0] * k1 + A5[1] * k2 + A5[2] * k3 + A5[3] * k4)),
        );
        let k6 = eval(
            t + C[5] * h,
            &(y + h * (A6[0] * k1 + A6[1] * k2 + A6[2] * k3 + A6[3] * k4 + A6[4] * k5)),
        );
        let y_new = y + h * (B[0] * k1 + B[2] * k3 + B[3] * k4 + B[4] * k5 + B[5] * k6);
        let k7 = eval(t + h, &y_new);

        if !(y_new.iter().all(|v| v.is_finite()) && k7.iter().all(|v| v.is_finite())) {
            return Err(SimulateError::NonFinite { t: t + h });
        }

        // RMS error scaled against both endpoints.
        let err_vec = E[0] * k1 + E[2] * k3 + E[3] * k4 + E[4] * k5 + E[5] * k6 + E[6] * k7;
        let mut err = 0.0;
        for i in 0..4 {
            let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
            let e = h * err_vec[i] / sc;
            err += e * e;
        }
        err = (err / 4.0).sqrt();

        let facmax = if just_rejected { 1.0 } else { FAC_MAX };
        let fac = (SAFETY * err.powf(-expo) * errold.powf(BETA)).clamp(FAC_MIN, facmax);

        if err <= 1.0 {
            // Accept: emit samples, advance, reuse k7 (first same as last).
            let t_new = t + h;
            if let Some(dt) = cfg.dense_stride {
                let mut tg = grid_next as f64 * dt;
                while tg <= t_new + 1e-12 * t_new.abs().max(1.0) {
                    if tg <= cfg.tmax {
                        let theta = ((tg - t) / h).clamp(0.0, 1.0);
                        let v = hermite(&y, &k1, &y_new, &k7, h, theta);
                        traj.t.push(tg.min(cfg.tmax));
                        traj.states.push(clamp_emit(&v));
                    }
                    grid_next += 1;
                    tg = grid_next as f64 * dt;
                }
            } else {
                traj.t.push(t_new);
                traj.states.push(clamp_emit(&y_new));
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            errold = err.max(1e-4);
            just_rejected = false;
            traj.steps_accepted += 1;
            h = (h * fac).min(cfg.hmax);
        } else {
            just_rejected = true;
            traj.steps_rejected += 1;
            h *= fac;
        }
    }

    // With a stride the horizon itself may not be a grid point; always
    // close the record at tmax.
    if cfg.dense_stride.is_some() {
        let (t_last, _) = traj.last();
        if t_last < cfg.tmax - 1e-9 {
            traj.t.push(cfg.tmax);
            traj.states.push(clamp_emit(&y));
        }
    }

    Ok(traj)
}

/// Peak-to-peak span per component over `states[from..]`.
fn ptp(states: &[State], from: usize) -> [f64; 4] {
    let mut lo = [f64::MAX; 4];
    let mut hi = [f64::MIN; 4];
    for s in &states[from..] {
        let v = [s.x, s.y1, s.y2, s.y3];
        for i in 0..4 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = hi[i] - lo[i];
    }
    out
}

/// Classifies the tail of a trajectory (its last 20%) as an equilibrium,
/// a limit cycle, or undecided.
///
/// Equilibrium: every component varies by less than `1e-6` over the
/// window and the final state lies within `1e-4` of a named equilibrium.
/// Limit cycle: the prey oscillation amplitude is bounded away from zero
/// and agrees within 5% between the two halves of the window.
pub fn detect_attractor(p: &Params, traj: &Trajectory) -> Attractor {
    const FLAT_TOL: f64 = 1e-6;
    const MATCH_TOL: f64 = 1e-4;
    const AMP_FLOOR: f64 = 1e-4;

    let (t_end, s_end) = traj.last();
    let from = traj.index_from(0.8 * t_end);
    if from + 8 > traj.len() {
        return Attractor::Undecided;
    }

    let span = ptp(&traj.states, from);
    if span.iter().all(|&v| v < FLAT_TOL) {
        let mut best: Option<(EquilibriumKind, f64)> = None;
        for eq in all_equilibria(p) {
            let d = s_end.max_distance(&eq.state);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((eq.kind, d));
            }
        }
        if let Some((kind, distance)) = best {
            if distance < MATCH_TOL {
                return Attractor::Equilibrium { kind, distance };
            }
        }
        return Attractor::Undecided;
    }

    // Oscillation stationarity: compare prey spans on the two window
    // halves.
    let mid = traj.index_from(0.9 * t_end);
    if mid <= from + 4 || mid + 4 > traj.len() {
        return Attractor::Undecided;
    }
    let amp_a = ptp(&traj.states[..mid], from)[0];
    let amp_b = ptp(&traj.states, mid)[0];
    let amp = 0.5 * amp_a.max(amp_b);
    if amp_a.min(amp_b) > AMP_FLOOR && (amp_a - amp_b).abs() <= 0.05 * amp_a.max(amp_b) {
        Attractor::LimitCycle { amplitude: amp }
    } else {
        Attractor::Undecided
    }
}

/// Period and amplitude from refined prey maxima over the trailing
/// `window_fraction` of the trajectory. Fails with `NoOscillation` when
/// fewer than three interior maxima are present.
pub fn cycle_metrics(traj: &Trajectory, window_fraction: f64) -> Result<CycleMetrics, SimulateError> {
    let (t_end, _) = traj.last();
    let from = traj.index_from((1.0 - window_fraction.clamp(0.0, 1.0)) * t_end);
    if from + 3 > traj.len() {
        return Err(SimulateError::NoOscillation);
    }

    let mut peaks: Vec<f64> = Vec::new();
    for i in (from + 1).max(1)..traj.len() - 1 {
        let (x0, x1, x2) = (traj.states[i - 1].x, traj.states[i].x, traj.states[i + 1].x);
        if x1 > x0 && x1 >= x2 {
            // Quadratic refinement of the peak position through the
            // three samples around the maximum.
            let (t0, t1, t2) = (traj.t[i - 1], traj.t[i], traj.t[i + 1]);
            let denom = x0 * (t1 - t2) + x1 * (t2 - t0) + x2 * (t0 - t1);
            let refined = if denom.abs() > 1e-300 {
                let num = x0 * (t1 * t1 - t2 * t2)
                    + x1 * (t2 * t2 - t0 * t0)
                    + x2 * (t0 * t0 - t1 * t1);
                let v = num / (2.0 * denom);
                if v.is_finite() && v >= t0 && v <= t2 {
                    v
                } else {
                    t1
                }
            } else {
                t1
            };
            peaks.push(refined);
        }
    }
    if peaks.len() < 3 {
        return Err(SimulateError::NoOscillation);
    }
    let period = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
    let amplitude = 0.5 * ptp(&traj.states, from)[0];
    Ok(CycleMetrics {
        period,
        amplitude,
        peak_count: peaks.len(),
    })
}

/// Integrates from `init` and reports the attractor together with the
/// transient minimum of total predator biomass — the quantity of
/// interest when the prey is started near extinction and the predator
/// stages must survive the famine until the prey blooms back.
pub fn bloom_probe(
    p: &Params,
    init: &State,
    cfg: &IntegratorConfig,
) -> Result<BloomReport, SimulateError> {
    let traj = integrate(p, init, cfg)?;
    let mut predator_min = f64::MAX;
    let mut predator_min_t = 0.0;
    for (t, s) in traj.t.iter().zip(&traj.states) {
        let total = s.y1 + s.y2 + s.y3;
        if total < predator_min {
            predator_min = total;
            predator_min_t = *t;
        }
    }
    let (_, s_end) = traj.last();
    Ok(BloomReport {
        outcome: detect_attractor(p, &traj),
        predator_min,
        predator_min_t,
        predator_final: s_end.y1 + s_end.y2 + s_end.y3,
    })
}

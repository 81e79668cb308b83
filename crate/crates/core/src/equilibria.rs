//! Equilibria of the system: the two boundary states, the closed-form
//! interior branch, a feasibility/existence report, Newton refinement,
//! and the pointwise global-stability predicates.
//!
//! Setting the three predator equations to zero and eliminating the
//! stage variables reduces interior equilibria to one quadratic in the
//! prey level `x`:
//!
//! ```text
//! a2 a3 b u x^2 - delta3 x + (b + d1) d3 (c + d2) = 0,
//! delta3 = a3 (b + d1) d3 + a2 b c u.
//! ```
//!
//! Its discriminant is `mu^2 = delta4^2 - 4 K d2` with
//! `delta4 = a3 (b + d1) d3 - a2 b c u` and `K = a2 a3 b u (b + d1) d3`,
//! so two distinct roots exist exactly when `d2 < delta4^2 / (4 K)`.
//! The remaining components follow by back-substitution:
//!
//! ```text
//! y2 = d3 (1 - x) / (a1 d3 + a2 (c - a3 x)),
//! y3 = (c - a3 x) y2 / d3,
//! y1 = (c - a3 x + d2) y2 / b.
//! ```
//!
//! A root is a feasible equilibrium when every component is positive and
//! the effective juvenile-to-adult rate `c - a3 x` stays positive.

use nalgebra::Vector4;
use thiserror::Error;

use crate::model::{jacobian, rhs, Params, State};

/// Which equilibrium a state represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// Total extinction, the origin.
    Extinction,
    /// Prey at carrying capacity, no predators.
    PreyOnly,
    /// Interior root with the larger prey level (`+mu` branch).
    InteriorHigh,
    /// Interior root with the smaller prey level (`-mu` branch).
    InteriorLow,
}

impl EquilibriumKind {
    pub fn label(self) -> &'static str {
        match self {
            EquilibriumKind::Extinction => "extinction",
            EquilibriumKind::PreyOnly => "prey_only",
            EquilibriumKind::InteriorHigh => "interior_high",
            EquilibriumKind::InteriorLow => "interior_low",
        }
    }
}

/// A named equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub state: State,
}

/// One root of the interior quadratic with its back-substituted
/// components, whether feasible or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorCandidate {
    pub x: f64,
    /// Back-substituted state (components may be negative when the root
    /// is infeasible).
    pub state: State,
    /// Effective juvenile-to-adult rate `c - a3 x` at the root.
    pub maturation_margin: f64,
    /// All components strictly positive and the maturation margin
    /// positive.
    pub feasible: bool,
}

/// The full interior computation: quadratic coefficients, discriminant
/// pieces, and both roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorDerivation {
    /// Coefficients of the prey quadratic in the order `[x^2, x, 1]`.
    pub quadratic: [f64; 3],
    pub delta3: f64,
    pub delta4: f64,
    pub mu_squared: f64,
    /// `sqrt(mu_squared)` when the discriminant is nonnegative.
    pub mu: Option<f64>,
    /// `+mu` root (larger prey level).
    pub high: Option<InteriorCandidate>,
    /// `-mu` root (smaller prey level).
    pub low: Option<InteriorCandidate>,
}

/// Closed-form existence diagnostics for the interior pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceReport {
    pub delta3: f64,
    pub delta4: f64,
    pub mu_squared: f64,
    /// Largest juvenile death rate compatible with a real root pair,
    /// `delta4^2 / (4 K)`.
    pub d2_limit: f64,
    /// `d2 < d2_limit`, equivalent to `mu^2 > 0`.
    pub d2_bound_ok: bool,
    /// `a3 = c` with adult predation large enough.
    pub case1: bool,
    /// `a3 > c` with `a2 b c u > a3 (b + d1) d3`.
    pub case2: bool,
    /// `a3 < c < 2 a3` with the predation and death-rate side
    /// conditions.
    pub case3: bool,
    /// Discriminant bound together with at least one sufficient case.
    pub passes: bool,
    /// Number of feasible interior equilibria actually found.
    pub interior_count: usize,
}

/// Pointwise basin test for the prey-only equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreyOnlyBasinCheck {
    /// `(1 - x)(a1 y2 + x - 1) + a2 y3`; negative values satisfy the
    /// contraction condition.
    pub value: f64,
    pub satisfied: bool,
}

/// Pointwise basin test for an interior equilibrium: the four margin
/// quantities, each negative when its inequality holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorBasinCheck {
    pub margins: [f64; 4],
    pub satisfied: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum EquilibriaError {
    #[error("Newton refinement did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("singular Jacobian during Newton refinement")]
    SingularJacobian,
    #[error("predicate requires a strictly positive state; component {name} = {value}")]
    DomainError { name: &'static str, value: f64 },
}

/// Feasibility cutoff for interior components.
const FEASIBLE_MIN: f64 = 1e-12;

/// The two boundary equilibria, always present.
pub fn boundary_equilibria() -> [Equilibrium; 2] {
    [
        Equilibrium {
            kind: EquilibriumKind::Extinction,
            state: State::new(0.0, 0.0, 0.0, 0.0),
        },
        Equilibrium {
            kind: EquilibriumKind::PreyOnly,
            state: State::new(1.0, 0.0, 0.0, 0.0),
        },
    ]
}

fn back_substitute(p: &Params, x: f64) -> InteriorCandidate {
    let margin = p.c - p.a3 * x;
    let y2 = p.d3 * (1.0 - x) / (p.a1 * p.d3 + p.a2 * margin);
    let y3 = margin * y2 / p.d3;
    let y1 = (margin + p.d2) * y2 / p.b;
    let state = State::new(x, y1, y2, y3);
    let feasible = margin > 0.0
        && x > FEASIBLE_MIN
        && y1 > FEASIBLE_MIN
        && y2 > FEASIBLE_MIN
        && y3 > FEASIBLE_MIN;
    InteriorCandidate {
        x,
        state,
        maturation_margin: margin,
        feasible,
    }
}

/// Solves the interior quadratic and back-substitutes both roots.
pub fn interior_equilibria(p: &Params) -> InteriorDerivation {
    let a = p.a2 * p.a3 * p.b * p.u;
    let delta3 = p.a3 * (p.b + p.d1) * p.d3 + p.a2 * p.b * p.c * p.u;
    let delta4 = p.a3 * (p.b + p.d1) * p.d3 - p.a2 * p.b * p.c * p.u;
    let c0 = (p.b + p.d1) * p.d3 * (p.c + p.d2);
    let mu_squared = delta3 * delta3 - 4.0 * a * c0;
    let (mu, high, low) = if mu_squared >= 0.0 {
        let mu = mu_squared.sqrt();
        (
            Some(mu),
            Some(back_substitute(p, (delta3 + mu) / (2.0 * a))),
            Some(back_substitute(p, (delta3 - mu) / (2.0 * a))),
        )
    } else {
        (None, None, None)
    };
    InteriorDerivation {
        quadratic: [a, -delta3, c0],
        delta3,
        delta4,
        mu_squared,
        mu,
        high,
        low,
    }
}

impl InteriorDerivation {
    /// The feasible interior equilibria, labeled by branch.
    pub fn feasible(&self) -> Vec<Equilibrium> {
        let mut out = Vec::with_capacity(2);
        if let Some(c) = self.high.filter(|c| c.feasible) {
            out.push(Equilibrium {
                kind: EquilibriumKind::InteriorHigh,
                state: c.state,
            });
        }
        if let Some(c) = self.low.filter(|c| c.feasible) {
            out.push(Equilibrium {
                kind: EquilibriumKind::InteriorLow,
                state: c.state,
            });
        }
        out
    }
}

/// All equilibria for the given parameters: the two boundary states
/// followed by any feasible interior roots.
pub fn all_equilibria(p: &Params) -> Vec<Equilibrium> {
    let mut out = boundary_equilibria().to_vec();
    out.extend(interior_equilibria(p).feasible());
    out
}

/// Closed-form existence report for the interior pair.
pub fn existence_report(p: &Params) -> ExistenceReport {
    let derivation = interior_equilibria(p);
    let k = p.a2 * p.a3 * p.b * p.u * (p.b + p.d1) * p.d3;
    let d2_limit = derivation.delta4 * derivation.delta4 / (4.0 * k);
    let d2_bound_ok = p.d2 < d2_limit;

    let case1 = p.a3 == p.c && {
        let den = 2.0 * p.a3 * p.b * p.u - p.b * p.c * p.u;
        den > 0.0 && p.a2 > (p.a3 * p.b * p.d3 + p.a3 * p.d1 * p.d3) / den
    };
    let case2 = p.a3 > p.c && p.a2 * p.b * p.c * p.u > p.a3 * (p.b + p.d1) * p.d3;
    let case3 = p.a3 < p.c && 2.0 * p.a3 > p.c && {
        let den = 2.0 * p.a3 * p.b * p.u - p.b * p.c * p.u;
        let predation_ok = den > 0.0 && p.a2 > p.a3 * p.d3 * (p.b + p.d1) / den;
        let death_ok = (p.a3 - p.c) * (p.d1 * p.d3 + p.b * (p.d3 - p.a2 * p.u))
            / ((p.b + p.d1) * p.d3)
            < p.d2;
        predation_ok && death_ok
    };

    ExistenceReport {
        delta3: derivation.delta3,
        delta4: derivation.delta4,
        mu_squared: derivation.mu_squared,
        d2_limit,
        d2_bound_ok,
        case1,
        case2,
        case3,
        passes: d2_bound_ok && (case1 || case2 || case3),
        interior_count: derivation.feasible().len(),
    }
}

/// Damped Newton refinement of an equilibrium guess to residual
/// `|rhs| < 1e-12`.
pub fn refine(p: &Params, guess: &State) -> Result<State, EquilibriaError> {
    const MAX_ITER: usize = 50;
    const TOL: f64 = 1e-12;
    let mut s = guess.as_vector();
    let mut res = rhs(&State::from_vector(&s), p);
    for _ in 0..MAX_ITER {
        if res.norm() < TOL {
            return Ok(State::from_vector(&s));
        }
        let j = jacobian(&State::from_vector(&s), p);
        let step = j
            .lu()
            .solve(&res)
            .ok_or(EquilibriaError::SingularJacobian)?;
        // Backtracking line search on the residual norm.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..7 {
            let trial: Vector4<f64> = s - lambda * step;
            let trial_res = rhs(&State::from_vector(&trial), p);
            if trial_res.norm() < res.norm() {
                s = trial;
                res = trial_res;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(EquilibriaError::NoConvergence(MAX_ITER));
        }
    }
    if res.norm() < TOL {
        Ok(State::from_vector(&s))
    } else {
        Err(EquilibriaError::NoConvergence(MAX_ITER))
    }
}

fn require_positive(s: &State) -> Result<(), EquilibriaError> {
    for (name, value) in [("x", s.x), ("y1", s.y1), ("y2", s.y2), ("y3", s.y3)] {
        if value <= 0.0 {
            return Err(EquilibriaError::DomainError { name, value });
        }
    }
    Ok(())
}

/// Pointwise contraction test toward the prey-only equilibrium at a
/// strictly positive state.
pub fn prey_only_basin_check(s: &State, p: &Params) -> Result<PreyOnlyBasinCheck, EquilibriaError> {
    require_positive(s)?;
    let value = (1.0 - s.x) * (p.a1 * s.y2 + s.x - 1.0) + p.a2 * s.y3;
    Ok(PreyOnlyBasinCheck {
        value,
        satisfied: value < 0.0,
    })
}

/// Pointwise contraction test toward an interior equilibrium
/// `eq = (X, Y1, Y2, Y3)` at a strictly positive state. The four margins
/// are, in order,
///
/// ```text
/// (x - X)(1 - x - a1 y2) + a2 X y3 - a2 x y3 Y1 / y1
/// Y1 (d1 + b) - (d1 y1 + d2 y2)
/// (c + d2) - (a3 x + b y1 / y2)
/// Y3 (d3 - c y2 / y3 + a3 x y2 / y3) - d3 y3
/// ```
///
/// and the check passes when all four are negative.
pub fn interior_basin_check(
    s: &State,
    p: &Params,
    eq: &State,
) -> Result<InteriorBasinCheck, EquilibriaError> {
    require_positive(s)?;
    let m1 = (s.x - eq.x) * (1.0 - s.x - p.a1 * s.y2) + p.a2 * eq.x * s.y3
        - p.a2 * s.x * s.y3 * eq.y1 / s.y1;
    let m2 = eq.y1 * (p.d1 + p.b) - (p.d1 * s.y1 + p.d2 * s.y2);
    let m3 = (p.c + p.d2) - (p.a3 * s.x + p.b * s.y1 / s.y2);
    let m4 = eq.y3 * (p.d3 - p.c * s.y2 / s.y3 + p.a3 * s.x * s.y2 / s.y3) - p.d3 * s.y3;
    let margins = [m1, m2, m3, m4];
    Ok(InteriorBasinCheck {
        margins,
        satisfied: margins.iter().all(|&m| m < 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamId;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interior_pair_benchmark_digits() {
        let d = interior_equilibria(&Params::table1());
        let high = d.high.unwrap();
        let low = d.low.unwrap();
        assert!(high.feasible && low.feasible);
        assert!(high.x > low.x);

        assert_abs_diff_eq!(high.state.x, 0.971143281583280, epsilon = 1e-12);
        assert_abs_diff_eq!(high.state.y1, 0.039620376663737, epsilon = 1e-12);
        assert_abs_diff_eq!(high.state.y2, 0.033685834066471, epsilon = 1e-12);
        assert_abs_diff_eq!(high.state.y3, 0.021377975593829, epsilon = 1e-12);

        assert_abs_diff_eq!(low.state.x, 0.762785289845291, epsilon = 1e-12);
        assert_abs_diff_eq!(low.state.y1, 0.301589749223076, epsilon = 1e-12);
        assert_abs_diff_eq!(low.state.y2, 0.234191061718478, epsilon = 1e-12);
        assert_abs_diff_eq!(low.state.y3, 0.207178914822734, epsilon = 1e-12);

        for c in [high, low] {
            assert!(rhs(&c.state, &Params::table1()).norm() < 1e-13);
        }
    }

    #[test]
    fn existence_report_benchmark() {
        let report = existence_report(&Params::table1());
        assert!(report.d2_bound_ok);
        assert!(!report.case1 && !report.case2 && report.case3);
        assert!(report.passes);
        assert_eq!(report.interior_count, 2);
        assert!(report.mu_squared > 0.0);

        // Lower conversion efficiency pushes the discriminant negative:
        // no interior equilibria at all.
        let report = existence_report(&Params::table1().with(ParamId::U, 0.7));
        assert!(!report.d2_bound_ok);
        assert!(!report.passes);
        assert_eq!(report.interior_count, 0);
        assert_abs_diff_eq!(report.mu_squared, -2.272e-6, epsilon = 1e-9);

        // A huge juvenile death rate violates the discriminant bound.
        let report = existence_report(&Params::table1().with(ParamId::D2, 10.0));
        assert!(!report.d2_bound_ok);
        assert_eq!(report.interior_count, 0);
    }

    #[test]
    fn discriminant_identity_on_random_draws() {
        // mu^2 = delta4^2 - 4 K d2 is an exact algebraic identity.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0020);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let d = interior_equilibria(&p);
            let k = p.a2 * p.a3 * p.b * p.u * (p.b + p.d1) * p.d3;
            let alt = d.delta4 * d.delta4 - 4.0 * k * p.d2;
            let scale = 1.0_f64.max(d.mu_squared.abs());
            assert!(
                (d.mu_squared - alt).abs() < 1e-13 * scale,
                "{} vs {}",
                d.mu_squared,
                alt
            );
        }
    }

    fn random_params(rng: &mut impl Rng) -> Params {
        Params::new(
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
        .unwrap()
    }

    #[test]
    fn closed_form_roots_are_equilibria_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0021);
        let mut feasible_seen = 0usize;
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let d = interior_equilibria(&p);
            for c in [d.high, d.low].into_iter().flatten() {
                if c.feasible {
                    feasible_seen += 1;
                    assert!(
                        rhs(&c.state, &p).norm() < 1e-8,
                        "residual {} at {:?}",
                        rhs(&c.state, &p).norm(),
                        p
                    );
                }
            }
        }
        assert!(feasible_seen > 50, "only {feasible_seen} feasible roots seen");
    }

    #[test]
    fn existence_report_predicts_the_interior_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0022);
        let mut passing = 0usize;
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let report = existence_report(&p);
            // The sufficient conditions must deliver both equilibria,
            // and a feasible pair forces a positive discriminant.
            if report.passes {
                passing += 1;
                assert_eq!(report.interior_count, 2, "params {p:?}");
            }
            if report.interior_count == 2 {
                assert!(report.mu_squared > 0.0, "params {p:?}");
                assert!(report.d2_bound_ok, "params {p:?}");
            }
        }
        assert!(passing >= 10, "only {passing} draws satisfied the conditions");
    }

    #[test]
    fn refine_recovers_perturbed_equilibria() {
        let p = Params::table1();
        let d = interior_equilibria(&p);
        for c in [d.high.unwrap(), d.low.unwrap()] {
            let guess = State::new(
                c.state.x + 1e-3,
                c.state.y1 - 1e-3,
                c.state.y2 + 1e-3,
                c.state.y3 - 1e-3,
            );
            let refined = refine(&p, &guess).unwrap();
            assert!(refined.max_distance(&c.state) < 1e-10);
            assert!(rhs(&refined, &p).norm() < 1e-12);
        }
        // The boundary equilibria are fixed points of the refinement.
        let refined = refine(&p, &State::new(1.0 + 1e-4, 1e-5, 1e-5, 1e-5)).unwrap();
        assert!(refined.max_distance(&State::new(1.0, 0.0, 0.0, 0.0)) < 1e-9);
    }

    #[test]
    fn all_equilibria_lists_boundary_and_interior() {
        let eqs = all_equilibria(&Params::table1());
        assert_eq!(eqs.len(), 4);
        assert_eq!(eqs[0].kind, EquilibriumKind::Extinction);
        assert_eq!(eqs[1].kind, EquilibriumKind::PreyOnly);
        assert_eq!(eqs[2].kind, EquilibriumKind::InteriorHigh);
        assert_eq!(eqs[3].kind, EquilibriumKind::InteriorLow);

        let eqs = all_equilibria(&Params::table1().with(ParamId::U, 0.7));
        assert_eq!(eqs.len(), 2);
    }

    #[test]
    fn basin_checks_enforce_positive_domain() {
        let p = Params::table1();
        let err = prey_only_basin_check(&State::new(0.5, 0.0, 0.1, 0.1), &p).unwrap_err();
        assert!(matches!(err, EquilibriaError::DomainError { name: "y1", .. }));
        let eq = interior_equilibria(&p).low.unwrap().state;
        assert!(interior_basin_check(&State::new(0.5, 0.1, -0.1, 0.1), &p, &eq).is_err());
    }

    #[test]
    fn prey_only_basin_check_signs() {
        let p = Params::table1();
        // Near the prey-only state with almost no adults the
        // contraction condition holds (the adult term a2 y3 is the only
        // positive contribution)...
        let check = prey_only_basin_check(&State::new(0.99, 0.01, 0.01, 1e-6), &p).unwrap();
        assert!(check.satisfied, "value {}", check.value);
        // ...but any appreciable adult population breaks it.
        let check = prey_only_basin_check(&State::new(0.99, 0.01, 0.01, 0.001), &p).unwrap();
        assert!(!check.satisfied);
    }

    #[test]
    fn interior_basin_margins_reduce_at_the_equilibrium() {
        // Evaluated at the equilibrium itself the margins collapse to
        // closed forms: m1 = m3 = 0, m2 = d3 Y3, m4 = -d3 Y3 (using the
        // equilibrium relations b Y1 = (c - a3 X + d2) Y2 and
        // (c - a3 X) Y2 = d3 Y3).
        let p = Params::table1();
        let eq = interior_equilibria(&p).low.unwrap().state;
        let check = interior_basin_check(&eq, &p, &eq).unwrap();
        let flux = p.d3 * eq.y3;
        assert!(check.margins[0].abs() < 1e-12);
        assert_abs_diff_eq!(check.margins[1], flux, epsilon = 1e-12);
        assert!(check.margins[2].abs() < 1e-12);
        assert_abs_diff_eq!(check.margins[3], -flux, epsilon = 1e-12);
        // The second margin is positive at the equilibrium, so the
        // pointwise test is meaningful only away from it.
        assert!(!check.satisfied);
    }
}

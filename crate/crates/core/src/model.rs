//! The dynamical system: parameters, states, vector field, analytic
//! Jacobian, nondimensionalization, and the absorbing region.
//!
//! Everything downstream (equilibria, stability, continuation, normal
//! forms) consumes the three functions defined here — [`rhs`],
//! [`jacobian`] and [`quadratic_form`] — so the algebra is written once
//! and cross-checked once (against finite differences and against the
//! exact second-order Taylor identity for a quadratic field).

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The nine dimensionless rates of the model.
///
/// * `a1`, `a2` — juvenile and adult predation rates,
/// * `a3` — injury/maturation-delay rate (effective juvenile→adult
///   transition is `c - a3 x`),
/// * `b` — infant→juvenile transition, `c` — juvenile→adult transition,
/// * `d1`, `d2`, `d3` — stage death rates,
/// * `u` — prey-to-infant biomass conversion efficiency.
///
/// All fields must be strictly positive and finite; construct through
/// [`Params::new`] or start from a preset and mutate via [`Params::set`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b: f64,
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub u: f64,
}

/// Dimensional counterpart of [`Params`]: rates carrying units of
/// 1/time or 1/(biomass·time), plus the prey growth rate `r` and
/// carrying capacity `k` that define the scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    /// Prey intrinsic growth rate (1/time).
    pub r: f64,
    /// Prey carrying capacity (biomass).
    pub k: f64,
    /// Juvenile predation rate (1/(biomass·time)).
    pub a1: f64,
    /// Adult predation rate (1/(biomass·time)).
    pub a2: f64,
    /// Injury rate (1/(biomass·time)).
    pub a3: f64,
    /// Infant→juvenile transition (1/time).
    pub b: f64,
    /// Juvenile→adult transition (1/time).
    pub c: f64,
    /// Stage death rates (1/time).
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Conversion efficiency (dimensionless, carried through unchanged).
    pub u: f64,
}

/// Scales recorded by [`nondimensionalize`]: dividing dimensional time by
/// `time` and dimensional biomass by `state` recovers the dimensionless
/// variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    /// Time scale `1/r`.
    pub time: f64,
    /// State scale `K`.
    pub state: f64,
}

/// One point of the state space: prey and the three predator stages.
///
/// Biologically admissible states are componentwise nonnegative;
/// operations tolerate round-off down to `-1e-12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

/// Absorbing region of the flow: every trajectory started in the positive
/// orthant eventually satisfies `x <= x_max` and
/// `y1 + y2 + y3 <= predator_sum_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingRegion {
    /// Prey bound (the carrying capacity, 1 after scaling).
    pub x_max: f64,
    /// Total-predator bound `u (1 - zeta)^2 / (4 zeta)`.
    pub predator_sum_max: f64,
    /// `min(d1, d2, d3)`; the bound above requires `zeta < 1`.
    pub zeta: f64,
}

/// Identifier for one of the nine free parameters, used wherever a
/// parameter is selected at runtime (continuation, partial derivatives,
/// CLI `--free`/`--set`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamId {
    A1,
    A2,
    A3,
    B,
    C,
    D1,
    D2,
    D3,
    U,
}

/// Validation and scaling errors.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter {name} = {value} must be strictly positive and finite")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("unknown parameter name `{0}`")]
    UnknownParameter(String),
    #[error("state component {name} = {value} is not finite")]
    NonFiniteState { name: &'static str, value: f64 },
}

impl ParamId {
    /// All nine identifiers in canonical order.
    pub const ALL: [ParamId; 9] = [
        ParamId::A1,
        ParamId::A2,
        ParamId::A3,
        ParamId::B,
        ParamId::C,
        ParamId::D1,
        ParamId::D2,
        ParamId::D3,
        ParamId::U,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamId::A1 => "a1",
            ParamId::A2 => "a2",
            ParamId::A3 => "a3",
            ParamId::B => "b",
            ParamId::C => "c",
            ParamId::D1 => "d1",
            ParamId::D2 => "d2",
            ParamId::D3 => "d3",
            ParamId::U => "u",
        }
    }
}

impl std::fmt::Display for ParamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ParamId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| ModelError::UnknownParameter(s.to_owned()))
    }
}

impl Params {
    /// Validating constructor; every rate must be strictly positive and
    /// finite.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a1: f64,
        a2: f64,
        a3: f64,
        b: f64,
        c: f64,
        d1: f64,
        d2: f64,
        d3: f64,
        u: f64,
    ) -> Result<Self, ModelError> {
        let p = Params {
            a1,
            a2,
            a3,
            b,
            c,
            d1,
            d2,
            d3,
            u,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity and finiteness of all nine rates.
    pub fn validate(&self) -> Result<(), ModelError> {
        for id in ParamId::ALL {
            let v = self.get(id);
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name: id.name(),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::A1 => self.a1,
            ParamId::A2 => self.a2,
            ParamId::A3 => self.a3,
            ParamId::B => self.b,
            ParamId::C => self.c,
            ParamId::D1 => self.d1,
            ParamId::D2 => self.d2,
            ParamId::D3 => self.d3,
            ParamId::U => self.u,
        }
    }

    pub fn set(&mut self, id: ParamId, value: f64) {
        match id {
            ParamId::A1 => self.a1 = value,
            ParamId::A2 => self.a2 = value,
            ParamId::A3 => self.a3 = value,
            ParamId::B => self.b = value,
            ParamId::C => self.c = value,
            ParamId::D1 => self.d1 = value,
            ParamId::D2 => self.d2 = value,
            ParamId::D3 => self.d3 = value,
            ParamId::U => self.u = value,
        }
    }

    /// Copy with one parameter replaced.
    pub fn with(&self, id: ParamId, value: f64) -> Params {
        let mut p = *self;
        p.set(id, value);
        p
    }

    /// First benchmark parameter set (bistable regime).
    pub fn table1() -> Params {
        Params {
            a1: 0.46,
            a2: 0.625,
            a3: 0.06,
            b: 0.112,
            c: 0.09,
            d1: 0.15,
            d2: 0.1,
            d3: 0.05,
            u: 0.8,
        }
    }

    /// Second benchmark parameter set (oscillatory regime).
    pub fn table2() -> Params {
        Params {
            a1: 0.6,
            a2: 0.8,
            a3: 0.075,
            b: 0.031,
            c: 0.035,
            d1: 0.026,
            d2: 0.023,
            d3: 0.013,
            u: 0.82,
        }
    }
}

impl State {
    pub fn new(x: f64, y1: f64, y2: f64, y3: f64) -> State {
        State { x, y1, y2, y3 }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.x, self.y1, self.y2, self.y3)
    }

    pub fn from_vector(v: &Vector4<f64>) -> State {
        State {
            x: v[0],
            y1: v[1],
            y2: v[2],
            y3: v[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y1.is_finite() && self.y2.is_finite() && self.y3.is_finite()
    }

    /// Componentwise max-norm distance.
    pub fn max_distance(&self, other: &State) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y1 - other.y1).abs())
            .max((self.y2 - other.y2).abs())
            .max((self.y3 - other.y3).abs())
    }

    /// Clamp tiny negative round-off to exact zero (used only at output
    /// boundaries, never inside the vector field).
    pub fn clamped_nonnegative(&self) -> State {
        let clamp = |v: f64| if v < 0.0 { 0.0 } else { v };
        State {
            x: clamp(self.x),
            y1: clamp(self.y1),
            y2: clamp(self.y2),
            y3: clamp(self.y3),
        }
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y1, self.y2, self.y3)
    }
}

/// Right-hand side of the system.
///
/// ```text
/// x'  = x(1 - x) - a1 x y2 - a2 x y3
/// y1' = u a2 x y3 - (b + d1) y1
/// y2' = b y1 - (c - a3 x) y2 - d2 y2
/// y3' = (c - a3 x) y2 - d3 y3
/// ```
pub fn rhs(s: &State, p: &Params) -> Vector4<f64> {
    let State { x, y1, y2, y3 } = *s;
    let maturation = p.c - p.a3 * x;
    Vector4::new(
        x * (1.0 - x) - p.a1 * x * y2 - p.a2 * x * y3,
        p.u * p.a2 * x * y3 - (p.b + p.d1) * y1,
        p.b * y1 - maturation * y2 - p.d2 * y2,
        maturation * y2 - p.d3 * y3,
    )
}

/// Analytic Jacobian of [`rhs`] with respect to the state.
pub fn jacobian(s: &State, p: &Params) -> Matrix4<f64> {
    let State { x, y2, y3, .. } = *s;
    Matrix4::new(
        1.0 - 2.0 * x - p.a1 * y2 - p.a2 * y3,
        0.0,
        -p.a1 * x,
        -p.a2 * x,
        p.a2 * p.u * y3,
        -p.b - p.d1,
        0.0,
        p.a2 * p.u * x,
        p.a3 * y2,
        p.b,
        p.a3 * x - p.c - p.d2,
        0.0,
        -p.a3 * y2,
        0.0,
        p.c - p.a3 * x,
        -p.d3,
    )
}

/// The symmetric bilinear form `Q` of the vector field's quadratic part.
///
/// The field is exactly quadratic in the state, so for any base point `s`
/// and offset `h`:
///
/// ```text
/// rhs(s + h) = rhs(s) + jacobian(s) h + Q(h, h)
/// ```
///
/// with `Q` independent of `s`. `2 Q(·,·)` is the (constant) second
/// derivative of the field, which the Sotomayor checks and the Hopf
/// normal form consume directly.
pub fn quadratic_form(p: &Params, xi: &Vector4<f64>, eta: &Vector4<f64>) -> Vector4<f64> {
    let sym_x_y2 = 0.5 * (xi[0] * eta[2] + xi[2] * eta[0]);
    let sym_x_y3 = 0.5 * (xi[0] * eta[3] + xi[3] * eta[0]);
    let q1 = -xi[0] * eta[0] - p.a1 * sym_x_y2 - p.a2 * sym_x_y3;
    let q2 = p.u * p.a2 * sym_x_y3;
    let q3 = p.a3 * sym_x_y2;
    Vector4::new(q1, q2, q3, -q3)
}

/// Partial derivative of [`rhs`] with respect to one parameter, at fixed
/// state. Exact (each rate enters the field linearly).
pub fn rhs_param_derivative(s: &State, p: &Params, id: ParamId) -> Vector4<f64> {
    let State { x, y1, y2, y3 } = *s;
    match id {
        ParamId::A1 => Vector4::new(-x * y2, 0.0, 0.0, 0.0),
        ParamId::A2 => Vector4::new(-x * y3, p.u * x * y3, 0.0, 0.0),
        ParamId::A3 => Vector4::new(0.0, 0.0, x * y2, -x * y2),
        ParamId::B => Vector4::new(0.0, -y1, y1, 0.0),
        ParamId::C => Vector4::new(0.0, 0.0, -y2, y2),
        ParamId::D1 => Vector4::new(0.0, -y1, 0.0, 0.0),
        ParamId::D2 => Vector4::new(0.0, 0.0, -y2, 0.0),
        ParamId::D3 => Vector4::new(0.0, 0.0, 0.0, -y3),
        ParamId::U => Vector4::new(0.0, p.a2 * x * y3, 0.0, 0.0),
    }
}

/// Maps dimensional rates to the dimensionless [`Params`]:
/// `t = r T`, `x = X/K`, predation/injury rates scale by `K/r`, linear
/// rates by `1/r`, and `u` is carried through.
pub fn nondimensionalize(d: &DimensionalParams) -> Result<(Params, Scales), ModelError> {
    for (name, value) in [("r", d.r), ("k", d.k)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(ModelError::InvalidParameter { name, value });
        }
    }
    let p = Params::new(
        d.a1 * d.k / d.r,
        d.a2 * d.k / d.r,
        d.a3 * d.k / d.r,
        d.b / d.r,
        d.c / d.r,
        d.d1 / d.r,
        d.d2 / d.r,
        d.d3 / d.r,
        d.u,
    )?;
    Ok((
        p,
        Scales {
            time: 1.0 / d.r,
            state: d.k,
        },
    ))
}

/// Inverse of [`nondimensionalize`] for fixed `r` and `K`.
pub fn dimensionalize(p: &Params, scales: &Scales) -> DimensionalParams {
    let r = 1.0 / scales.time;
    let k = scales.state;
    DimensionalParams {
        r,
        k,
        a1: p.a1 * r / k,
        a2: p.a2 * r / k,
        a3: p.a3 * r / k,
        b: p.b * r,
        c: p.c * r,
        d1: p.d1 * r,
        d2: p.d2 * r,
        d3: p.d3 * r,
        u: p.u,
    }
}

/// Absorbing region of the flow.
///
/// With `zeta = min(d1, d2, d3)`, the comparison function
/// `w = u x + y1 + y2 + y3` satisfies `w' <= u x (1 - x) + u x zeta - zeta w`,
/// whose supremum bounds the total predator biomass by
/// `u (1 - zeta)^2 / (4 zeta)`. The bound is meaningful for `zeta < 1`;
/// the formula is still evaluated otherwise (callers may warn).
pub fn absorbing_region(p: &Params) -> AbsorbingRegion {
    let zeta = p.d1.min(p.d2).min(p.d3);
    AbsorbingRegion {
        x_max: 1.0,
        predator_sum_max: p.u * (1.0 - zeta) * (1.0 - zeta) / (4.0 * zeta),
        zeta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut impl Rng) -> State {
        State::new(rng.gen(), rng.gen(), rng.gen(), rng.gen())
    }

    #[test]
    fn rhs_vanishes_at_extinction_and_prey_only() {
        for p in [Params::table1(), Params::table2()] {
            assert_eq!(rhs(&State::new(0.0, 0.0, 0.0, 0.0), &p).norm(), 0.0);
            assert_eq!(rhs(&State::new(1.0, 0.0, 0.0, 0.0), &p).norm(), 0.0);
        }
    }

    #[test]
    fn rhs_nearly_vanishes_at_published_interior_point() {
        // The four digits are rounded in the published coordinates, hence
        // the 1e-3 slack.
        let s = State::new(0.762, 0.30159, 0.23419, 0.207);
        let r = rhs(&s, &Params::table1());
        for i in 0..4 {
            assert!(r[i].abs() < 1e-3, "component {i}: {}", r[i]);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let h = 1e-6;
        for p in [Params::table1(), Params::table2()] {
            for _ in 0..100 {
                let s = random_state(&mut rng);
                let j = jacobian(&s, &p);
                let base = s.as_vector();
                for col in 0..4 {
                    let mut fwd = base;
                    let mut bwd = base;
                    fwd[col] += h;
                    bwd[col] -= h;
                    let df = (rhs(&State::from_vector(&fwd), &p)
                        - rhs(&State::from_vector(&bwd), &p))
                        / (2.0 * h);
                    for row in 0..4 {
                        assert!(
                            (j[(row, col)] - df[row]).abs() < 1e-6,
                            "entry ({row},{col}): analytic {} vs fd {}",
                            j[(row, col)],
                            df[row]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_at_extinction_is_lower_triangular() {
        // The stage-transition terms b and c survive at the origin, so
        // the Jacobian there is triangular with the death rates on the
        // diagonal — its eigenvalues are read off directly.
        let p = Params::table1();
        let j = jacobian(&State::new(0.0, 0.0, 0.0, 0.0), &p);
        let expected = Matrix4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, -p.b - p.d1, 0.0, 0.0, //
            0.0, p.b, -p.c - p.d2, 0.0, //
            0.0, 0.0, p.c, -p.d3,
        );
        assert_eq!(j, expected);
    }

    #[test]
    fn jacobian_prey_only_first_row() {
        let p = Params::table1();
        let j = jacobian(&State::new(1.0, 0.0, 0.0, 0.0), &p);
        assert_eq!(j[(0, 0)], -1.0);
        assert_eq!(j[(0, 1)], 0.0);
        assert_eq!(j[(0, 2)], -p.a1);
        assert_eq!(j[(0, 3)], -p.a2);
    }

    #[test]
    fn quadratic_form_reproduces_taylor_remainder_exactly() {
        // The field is quadratic: rhs(s+h) - rhs(s) - J(s) h = Q(h, h)
        // must hold to round-off for *any* s, h, not just small h.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for p in [Params::table1(), Params::table2()] {
            for _ in 0..50 {
                let s = random_state(&mut rng);
                let h = Vector4::new(
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                );
                let moved = State::from_vector(&(s.as_vector() + h));
                let remainder = rhs(&moved, &p) - rhs(&s, &p) - jacobian(&s, &p) * h;
                let q = quadratic_form(&p, &h, &h);
                assert!((remainder - q).norm() < 1e-12, "residual {}", (remainder - q).norm());
            }
        }
    }

    #[test]
    fn quadratic_form_is_symmetric_bilinear() {
        let p = Params::table2();
        let xi = Vector4::new(0.3, -0.7, 0.2, 0.9);
        let eta = Vector4::new(-0.1, 0.4, 0.8, -0.5);
        let q_xy = quadratic_form(&p, &xi, &eta);
        let q_yx = quadratic_form(&p, &eta, &xi);
        assert_eq!(q_xy, q_yx);
        // bilinearity in the first slot
        let q_scaled = quadratic_form(&p, &(2.0 * xi), &eta);
        assert!((q_scaled - 2.0 * q_xy).norm() < 1e-15);
    }

    #[test]
    fn param_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        let p = Params::table2();
        let h = 1e-7;
        for _ in 0..20 {
            let s = random_state(&mut rng);
            for id in ParamId::ALL {
                let v = p.get(id);
                let df = (rhs(&s, &p.with(id, v + h)) - rhs(&s, &p.with(id, v - h))) / (2.0 * h);
                let exact = rhs_param_derivative(&s, &p, id);
                assert!(
                    (df - exact).norm() < 1e-7,
                    "parameter {id}: fd {df:?} vs exact {exact:?}"
                );
            }
        }
    }

    #[test]
    fn nondimensionalize_identity_scaling() {
        let t1 = Params::table1();
        let d = DimensionalParams {
            r: 1.0,
            k: 1.0,
            a1: t1.a1,
            a2: t1.a2,
            a3: t1.a3,
            b: t1.b,
            c: t1.c,
            d1: t1.d1,
            d2: t1.d2,
            d3: t1.d3,
            u: t1.u,
        };
        let (p, scales) = nondimensionalize(&d).unwrap();
        assert_eq!(p, t1);
        assert_eq!(scales, Scales { time: 1.0, state: 1.0 });
    }

    #[test]
    fn nondimensionalize_direct_ratio() {
        let d = DimensionalParams {
            r: 2.0,
            k: 1.0,
            a1: 0.92,
            a2: 1.0,
            a3: 0.1,
            b: 0.2,
            c: 0.2,
            d1: 0.2,
            d2: 0.2,
            d3: 0.2,
            u: 0.8,
        };
        let (p, _) = nondimensionalize(&d).unwrap();
        assert_abs_diff_eq!(p.a1, 0.46, epsilon = 1e-15);
    }

    #[test]
    fn nondimensionalize_round_trip() {
        let d = DimensionalParams {
            r: 3.7,
            k: 120.0,
            a1: 0.01,
            a2: 0.002,
            a3: 0.0005,
            b: 0.4,
            c: 0.33,
            d1: 0.555,
            d2: 0.37,
            d3: 0.185,
            u: 0.82,
        };
        let (p, scales) = nondimensionalize(&d).unwrap();
        let back = dimensionalize(&p, &scales);
        for (got, want) in [
            (back.r, d.r),
            (back.k, d.k),
            (back.a1, d.a1),
            (back.a2, d.a2),
            (back.a3, d.a3),
            (back.b, d.b),
            (back.c, d.c),
            (back.d1, d.d1),
            (back.d2, d.d2),
            (back.d3, d.d3),
            (back.u, d.u),
        ] {
            assert!((got - want).abs() <= 1e-14 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn nondimensionalize_rejects_nonpositive_scaling() {
        let mut d = DimensionalParams {
            r: 0.0,
            k: 1.0,
            a1: 1.0,
            a2: 1.0,
            a3: 1.0,
            b: 1.0,
            c: 1.0,
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            u: 1.0,
        };
        assert!(nondimensionalize(&d).is_err());
        d.r = 1.0;
        d.k = -2.0;
        assert!(nondimensionalize(&d).is_err());
    }

    #[test]
    fn absorbing_region_benchmarks() {
        let r1 = absorbing_region(&Params::table1());
        assert_eq!(r1.zeta, 0.05);
        assert_abs_diff_eq!(r1.predator_sum_max, 3.61, epsilon = 1e-12);

        let r2 = absorbing_region(&Params::table2());
        assert_eq!(r2.zeta, 0.013);

        let mut p = Params::table1();
        p.d1 = 1.0;
        p.d2 = 1.0;
        p.d3 = 1.0;
        assert_eq!(absorbing_region(&p).predator_sum_max, 0.0);
    }

    #[test]
    fn params_validation_rejects_nonpositive_and_nonfinite() {
        let mut p = Params::table1();
        p.d2 = 0.0;
        assert_eq!(
            p.validate(),
            Err(ModelError::InvalidParameter { name: "d2", value: 0.0 })
        );
        let mut q = Params::table1();
        q.a1 = f64::NAN;
        assert!(q.validate().is_err());
    }

    #[test]
    fn param_id_round_trips_through_strings() {
        for id in ParamId::ALL {
            let parsed: ParamId = id.name().parse().unwrap();
            assert_eq!(parsed, id);
        }
        assert!("a4".parse::<ParamId>().is_err());
    }
}

//! Simulation and bifurcation-analysis toolkit for a four-dimensional
//! stage-structured predator–prey system.
//!
//! The model couples a logistic prey population `x` with a three-stage
//! predator population (infant `y1`, juvenile `y2`, adult `y3`):
//!
//! ```text
//! x'  = x(1 - x) - a1 x y2 - a2 x y3
//! y1' = u a2 x y3 - (b + d1) y1
//! y2' = b y1 - (c - a3 x) y2 - d2 y2
//! y3' = (c - a3 x) y2 - d3 y3
//! ```
//!
//! Juveniles hunt but do not reproduce; hunting dangerous prey injures them,
//! which delays maturation: the effective juvenile→adult transition rate is
//! `c - a3 x`, decreasing with prey density.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] — parameters, states, vector field, analytic Jacobian,
//!   scaling map, absorbing region.
//! * [`equilibria`] — closed-form equilibria, existence report, Newton
//!   refinement, Lyapunov-function stability predicates.
//! * [`stability`] — characteristic polynomial, eigenvalues, Routh–Hurwitz
//!   verdicts, prey-only classification, Hopf discriminant.
//! * [`simulate`] — adaptive Dormand–Prince integration, attractor
//!   detection, cycle metrics.
//! * [`continuation`] — pseudo-arclength equilibrium continuation with
//!   fold/branch/Hopf test functions and branch switching.
//! * [`normalform`] — Hopf normal form (first Lyapunov coefficient) and
//!   Sotomayor verifications for transcritical and fold points.
//! * [`codim2`] — two-parameter fold/Hopf curves, cusp / Bogdanov–Takens /
//!   Bautin detection, region classification maps.
//! * [`io`] — deterministic CSV/SVG/JSON emitters.
//! * [`cli`] — command-line front end (see the `stagehunt` binary).

pub mod cli;
pub mod codim2;
pub mod continuation;
pub mod equilibria;
pub mod io;
pub mod model;
pub mod normalform;
mod reproduce;
pub mod simulate;
pub mod stability;

pub use model::{Params, State};

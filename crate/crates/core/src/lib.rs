//! Continuous-time optimizer dynamics whose convergence rate is a design input.
//!
//! A problem is encoded as a *stationarity vector* `S(z)` whose zeros are its
//! first-order optimality points. The crate drives the plant `ż = u` with a
//! feedback `u` chosen so that the quadratic Lyapunov function
//! `V(z) = ½‖S(z)‖²` follows a selected decay law `V̇ = -σ(V, t)`
//! (exponential, finite-time, fixed-time or prescribed-time).
//!
//! Module map:
//!
//! * [`law`]: the decay templates `σ(V, t)` and their settling-time bounds.
//! * [`model`]: the [`StationarityModel`](model::StationarityModel) contract,
//!   `V`, `∇V`, finite-difference Jacobian checks, block residuals.
//! * [`dynamics`]: the Hessian-gradient, Newton and gradient feedback laws.
//! * [`encodings`]: stationarity vectors for unconstrained, constrained
//!   (smoothed Fischer–Burmeister and exact), minimax and v-GNE problems.
//! * [`integrate`]: adaptive Dormand–Prince driver with stop events,
//!   trajectory recording and decay verification.
//! * [`problems`]: benchmark builders and affine/enumerative KKT oracles.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::many_single_char_names)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod dynamics;
pub mod encodings;
pub mod integrate;
pub mod law;
pub mod linalg;
pub mod maps;
pub mod model;
pub mod problems;

pub use dynamics::{FieldError, Realization, RealizationKind};
pub use integrate::{solve, verify_decay, SolveConfig, SolveReport, Status, Trajectory};
pub use law::{DecayLaw, LawError, LawKind};
pub use linalg::{Matrix, Vector};
pub use model::{BlockLayout, ModelError, StationarityModel};

//! Numerical laboratory for one-dimensional non-autonomous convex
//! variational problems of linear growth.
//!
//! The crate solves
//!
//! ```text
//!     minimize  int_a^b w(x) f(u'(x)) dx   over u with u(a)=y1, u(b)=y2
//! ```
//!
//! for the mu-elliptic profile f and the Hoelder weight w = 1 + |x|^alpha,
//! relaxed to BV so minimizers may carry jump atoms. It provides
//!
//! - the integrand family with executable growth/ellipticity/Hoelder
//!   hypothesis checks ([`integrand`]),
//! - a discrete BV data model and the relaxed energy with its
//!   absolutely-continuous, jump and boundary parts ([`bv_model`]),
//! - the vanishing-viscosity sequence solved per step by a first-integral
//!   shooting method and independently verified by a damped Newton
//!   minimizer ([`viscosity`]),
//! - closed-form/semianalytic ground truth: the critical boundary mass
//!   M0, Sobolev and jump branches ([`oracle`]),
//! - regularity diagnostics: closed-form threshold constants, L^p sweeps,
//!   Nikolskii seminorms and jump detection ([`probe`]).
//!
//! The crate is `no_std` (with `alloc`); all float transcendentals come
//! from libm, so results are bit-reproducible across platforms.

#![no_std]
// validations use negated comparisons deliberately: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bv_model;
pub mod integrand;
pub mod math;
pub mod oracle;
pub mod probe;
pub mod quad;
pub mod rng;
pub mod viscosity;

pub use bv_model::{BVFunction1D, EnergyBreakdown, Grid1D};
pub use integrand::{
    DomainError, HoelderWeight, HypothesisReport, MuEllipticProfile, NonAutonomousIntegrand,
    SampleSpec, VerifyOverrides,
};
pub use oracle::{BranchError, OracleKind, OracleSolution};
pub use probe::{JumpOutcome, NikolskiiReport, Thresholds};
pub use viscosity::{AkSurrogate, SolverError, ViscosityConfig, ViscosityReport, ViscosityState};

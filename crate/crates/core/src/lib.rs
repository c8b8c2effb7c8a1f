//! Minimal supersolutions of constrained BSDEs on a binary Brownian tree,
//! the dynamic convex risk measures they induce, and optimal risk transfer
//! through inf-convolution of coefficients.
//!
//! The usual entry points are [`solve_constrained`] for
//! `E_t^{g,phi}(xi)`, [`RiskMeasure`] for `rho(xi) = E_0^{g,phi}(-xi)`, and
//! [`transfer_sweep`] / [`optimal_transfer_construct`] for risk sharing.

// `!(x > 0.0)` style checks are used to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drivers;
pub mod error;
pub mod lattice;
pub mod minimize;
pub mod risk;
pub mod solver;
pub mod verify;

pub use drivers::{
    builtin_constraint, builtin_driver, Constraint, ConstraintFlags, ConstraintSpec, Driver, DriverFlags,
    DriverSpec, InfConvOptions, LowerAffine,
};
pub use error::{Error, Result};
pub use lattice::{build_lattice, build_recombining, Claim, Lattice, Layout};
pub use risk::{
    alpha_grid, axiom_suite, dynamic_rho, optimal_transfer_construct, rho, split_value,
    transfer_proportional_optimum, transfer_sweep, ClaimSampler, HypothesisCheck, PropertyCheck,
    PropertyReport, RiskMeasure, SweepResult, TransferResult,
};
pub use solver::{
    evaluate_at, solve_constrained, solve_g, solve_penalized, MinimalSolution, Solution, SolverConfig,
};
pub use verify::run_property_suite;

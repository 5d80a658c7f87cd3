//! Pseudo-spectral toolkit for viscoelastic fluid systems of Oldroyd-B type
//! on the 2π-periodic torus in two or three dimensions.
//!
//! The crate provides immutable spectral fields and exact mode-wise operators
//! ([`ops`]), Littlewood–Paley analysis and Besov/Sobolev norms ([`lp`]),
//! right-hand sides, auxiliary quantities and energy ledgers for the model
//! variants ([`dynamics`]), integrating-factor Runge–Kutta time stepping
//! ([`integrator`]), and harmonic-analysis inequality probes ([`lab`]).
//!
//! Everything is deterministic: seeded random fields, fixed summation orders,
//! and bit-exact checkpoints.

pub mod checkpoint;
pub mod dynamics;
pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod lab;
pub mod lp;
pub mod ops;
pub mod params;
pub mod random;

pub use dynamics::{EnergyLedger, EnergyRow, State};
pub use error::{Error, Result};
pub use field::{
    inner_l2, max_pointwise_norm, norm_l2, sym_index, FieldLike, Repr, ScalarField, SymTensorField,
    TensorField, VectorField,
};
pub use grid::Grid;
pub use integrator::{
    evolve, integrate, integrate_observed, planned_steps, step, Scheme, StepperConfig, Trajectory,
};
pub use lab::{
    block_ratio_ensemble, bony_check, kato_ponce_ratio, lambda_commutator_ratio,
    lambda_ratio_ensemble, refinement_change, EnsembleSpec, InequalityReport, SampleRow,
};
pub use lp::{besov_block_ledger, besov_norm, high_low_split, sobolev_norm, DyadicCutoff};
pub use params::{ModelParams, Variant};
pub use random::{random_divfree_field, random_scalar_field, random_symtensor_field, Band};

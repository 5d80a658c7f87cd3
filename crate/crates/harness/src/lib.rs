//! Experiment harness around the solver core: strict-TOML configs, the five
//! experiment drivers, and their CSV / TOML / checkpoint reporting.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{parse_config, parse_config_str, ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiments::{
    run_besov_norm, run_commutator_test, run_energy_audit, run_nu_sweep, run_simulate,
};
pub use report::{load_checkpoint, save_checkpoint, CheckpointMeta};

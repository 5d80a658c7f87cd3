//! Strict TOML experiment configuration.
//!
//! Parsing rejects unknown keys, then `materialize` fills every default in
//! explicitly and cross-checks the file against the CLI subcommand. The
//! materialized config is what runs, what the echo-back copy beside the
//! outputs records, and what checkpoint sidecars embed, so a run directory
//! is always self-describing.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use oldroyd_core::{
    random_divfree_field, random_symtensor_field, sobolev_norm, Band, FieldLike, Grid, ModelParams,
    Scheme, State, StepperConfig, Variant,
};

use crate::error::{HarnessError, Result};

/// Spectral-regularity proxy used to normalize initial data: plain H^s with
/// this exponent. Band-limited data is smooth regardless; the exponent only
/// fixes the meaning of `initial.amplitude`.
pub const NORMALIZATION_EXPONENT: f64 = 6.0;

/// Sobolev exponents for sweep differences must sit two below the
/// normalization exponent.
pub const MAX_S_DIFF: f64 = NORMALIZATION_EXPONENT - 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    EnergyAudit,
    NuSweep,
    BesovNorm,
    CommutatorTest,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::EnergyAudit => "energy-audit",
            ExperimentKind::NuSweep => "nu-sweep",
            ExperimentKind::BesovNorm => "besov-norm",
            ExperimentKind::CommutatorTest => "commutator-test",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Also write every recorded snapshot as a checkpoint pair (heavy;
    /// energy rows and the final checkpoint are always written).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub save_snapshots: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_list: Option<Vec<f64>>,
    /// Sobolev exponent the member-minus-reference differences are measured
    /// in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_diff: Option<f64>,
    /// Optional CI gate: fitted slope must land inside [lo, hi].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_slope: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kato_ponce_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Rerun the ensembles on a grid of doubled size and report the change
    /// of each max ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    /// Optional CI gate: every refinement change must stay below this
    /// fraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    /// Exit with the threshold-failure code when the growth flag trips,
    /// instead of only recording it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fail_on_flag: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional in the file; the CLI subcommand is authoritative and a
    /// mismatch is a config error.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub grid: GridSection,
    pub params: ParamsSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lab: Option<LabSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besov: Option<BesovSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSection>,
}

fn bad(msg: String) -> HarnessError {
    HarnessError::Config(msg)
}

impl ExperimentConfig {
    /// Fills every default in explicitly and validates the result. After
    /// this, all scalar options relevant to `kind` are `Some` and emitting
    /// the config reproduces the run exactly.
    pub fn materialize(&mut self, kind: ExperimentKind) -> Result<()> {
        match self.experiment {
            None => self.experiment = Some(kind),
            Some(k) if k == kind => {}
            Some(k) => {
                return Err(bad(format!(
                    "experiment: config file says {k}, but the subcommand is {kind}"
                )))
            }
        }

        let gnd = self.params.variant == Variant::GeneralizedNoDamping;
        self.params.nu.get_or_insert(if gnd { 1.0 } else { 0.0 });
        self.params.alpha.get_or_insert(if gnd { 1.5 } else { 2.0 });
        self.params.k1.get_or_insert(1.0);
        self.params.k2.get_or_insert(1.0);
        self.params.b.get_or_insert(0.0);

        self.stepper.dt.get_or_insert(1e-2);
        self.stepper.scheme.get_or_insert(Scheme::Ifrk2);
        self.stepper.t_end.get_or_insert(1.0);
        self.stepper.output_every.get_or_insert(1);
        self.stepper.cfl_safety.get_or_insert(0.9);

        self.initial.seed.get_or_insert(0);
        self.initial.band.get_or_insert([1.0, 4.0]);
        self.initial.amplitude.get_or_insert(1e-2);

        self.output
            .dir
            .get_or_insert_with(|| PathBuf::from(format!("runs/{kind}")));
        self.output.save_snapshots.get_or_insert(false);

        if kind == ExperimentKind::NuSweep && self.sweep.is_none() {
            self.sweep = Some(SweepSection::default());
        }
        if let Some(sweep) = &mut self.sweep {
            sweep
                .nu_list
                .get_or_insert_with(|| vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]);
            sweep.s_diff.get_or_insert(1.0);
        }

        if kind == ExperimentKind::CommutatorTest && self.lab.is_none() {
            self.lab = Some(LabSection::default());
        }
        let half_dim = self.grid.dim as f64 / 2.0;
        if let Some(lab) = &mut self.lab {
            lab.s_values.get_or_insert_with(|| {
                let mut s = vec![-1.0, 0.0, 1.0, half_dim, 2.0];
                s.sort_by(f64::total_cmp);
                s.dedup();
                s
            });
            lab.kato_ponce_s.get_or_insert_with(|| vec![1.0, 2.0, 3.0]);
            lab.samples.get_or_insert(4);
            lab.refine.get_or_insert(true);
        }

        if let Some(besov) = &mut self.besov {
            besov.s.get_or_insert(0.0);
        }

        if kind == ExperimentKind::EnergyAudit && self.audit.is_none() {
            self.audit = Some(AuditSection::default());
        }
        if let Some(audit) = &mut self.audit {
            audit.fail_on_flag.get_or_insert(false);
        }

        self.validate()
    }

    /// Every constraint with its key path; assumes `materialize` ran.
    fn validate(&self) -> Result<()> {
        let kind = self.experiment.expect("materialized");
        let grid = self.grid()?;
        self.model_params()?;
        self.stepper_config()?;

        let amp = self.initial.amplitude.expect("materialized");
        if !(amp > 0.0 && amp.is_finite()) {
            return Err(bad(format!(
                "initial.amplitude: must be positive and finite, got {amp}"
            )));
        }
        let seed = self.initial.seed.expect("materialized");
        if seed > i64::MAX as u64 {
            // TOML integers are signed 64-bit; a larger seed could never
            // round-trip through a config file or the echo.
            return Err(bad(format!(
                "initial.seed: must fit in a TOML integer (at most {}), got {seed}",
                i64::MAX
            )));
        }
        let band = self.band()?;
        let nyquist = (grid.size() / 2) as f64;
        if band.hi() >= nyquist {
            return Err(bad(format!(
                "initial.band: upper edge {} is not resolvable on a size-{} grid (needs hi < {})",
                band.hi(),
                grid.size(),
                nyquist
            )));
        }

        match kind {
            ExperimentKind::NuSweep => {
                if self.params.variant != Variant::ViscousDiffusive {
                    return Err(bad(
                        "params.variant: nu-sweep runs the viscous-diffusive family \
                         (members take each nu, the reference runs at nu = 0)"
                            .into(),
                    ));
                }
            }
            ExperimentKind::EnergyAudit => {
                if self.params.variant != Variant::GeneralizedNoDamping {
                    return Err(bad(
                        "params.variant: energy-audit runs the generalized-no-damping system"
                            .into(),
                    ));
                }
            }
            ExperimentKind::BesovNorm => {
                if self.besov.as_ref().and_then(|b| b.input.as_ref()).is_none() {
                    return Err(bad(
                        "besov.input: a field checkpoint path is required for besov-norm".into(),
                    ));
                }
            }
            ExperimentKind::Simulate | ExperimentKind::CommutatorTest => {}
        }

        if let Some(sweep) = &self.sweep {
            let nu_list = sweep.nu_list.as_ref().expect("materialized");
            if nu_list.len() < 3 {
                return Err(bad(format!(
                    "sweep.nu_list: the rate fit needs at least 3 viscosities, got {}",
                    nu_list.len()
                )));
            }
            if nu_list.iter().any(|&nu| !(nu > 0.0 && nu.is_finite())) {
                return Err(bad(
                    "sweep.nu_list: every viscosity must be positive and finite".into(),
                ));
            }
            if nu_list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(bad(
                    "sweep.nu_list: viscosities must be strictly decreasing".into(),
                ));
            }
            let s_diff = sweep.s_diff.expect("materialized");
            if !(0.0..=MAX_S_DIFF).contains(&s_diff) {
                return Err(bad(format!(
                    "sweep.s_diff: must lie in [0, {MAX_S_DIFF}] (two below the H^{NORMALIZATION_EXPONENT} \
                     normalization of the initial data), got {s_diff}"
                )));
            }
            if let Some([lo, hi]) = sweep.expect_slope {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(bad(format!(
                        "sweep.expect_slope: needs an ordered finite pair, got [{lo}, {hi}]"
                    )));
                }
            }
        }

        if let Some(lab) = &self.lab {
            if lab.samples.expect("materialized") == 0 {
                return Err(bad("lab.samples: must be at least 1".into()));
            }
            let s_values = lab.s_values.as_ref().expect("materialized");
            if s_values.is_empty() {
                return Err(bad("lab.s_values: must not be empty".into()));
            }
            let s_cap = 1.0 + self.grid.dim as f64 / 2.0;
            for &s in s_values {
                if !(s.is_finite() && (-1.0..=s_cap).contains(&s)) {
                    return Err(bad(format!(
                        "lab.s_values: each exponent must lie in [-1, {s_cap}] \
                         (both commutator probes are defined there), got {s}"
                    )));
                }
            }
            for &s in lab.kato_ponce_s.as_ref().expect("materialized") {
                if !(s.is_finite() && s >= 0.0) {
                    return Err(bad(format!(
                        "lab.kato_ponce_s: exponents must be nonnegative, got {s}"
                    )));
                }
            }
            if let Some(tol) = lab.refine_tolerance {
                if !(tol > 0.0 && tol.is_finite()) {
                    return Err(bad(format!(
                        "lab.refine_tolerance: must be positive, got {tol}"
                    )));
                }
            }
        }

        if let Some(besov) = &self.besov {
            let s = besov.s.expect("materialized");
            if !s.is_finite() {
                return Err(bad(format!("besov.s: must be finite, got {s}")));
            }
        }

        Ok(())
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.expect("materialized")
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.size).map_err(|e| bad(format!("grid: {e}")))
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let p = ModelParams {
            variant: self.params.variant,
            nu: self.params.nu.expect("materialized"),
            alpha: self.params.alpha.expect("materialized"),
            k1: self.params.k1.expect("materialized"),
            k2: self.params.k2.expect("materialized"),
            b: self.params.b.expect("materialized"),
        };
        p.validate().map_err(|e| bad(format!("params: {e}")))?;
        Ok(p)
    }

    pub fn stepper_config(&self) -> Result<StepperConfig> {
        let s = StepperConfig {
            dt: self.stepper.dt.expect("materialized"),
            scheme: self.stepper.scheme.expect("materialized"),
            t_end: self.stepper.t_end.expect("materialized"),
            output_every: self.stepper.output_every.expect("materialized"),
            cfl_safety: self.stepper.cfl_safety.expect("materialized"),
        };
        s.validate().map_err(|e| bad(format!("stepper: {e}")))?;
        Ok(s)
    }

    pub fn band(&self) -> Result<Band> {
        let [lo, hi] = self.initial.band.expect("materialized");
        Band::new(lo, hi).map_err(|e| bad(format!("initial.band: {e}")))
    }

    pub fn seed(&self) -> u64 {
        self.initial.seed.expect("materialized")
    }

    pub fn amplitude(&self) -> f64 {
        self.initial.amplitude.expect("materialized")
    }

    pub fn out_dir(&self) -> &Path {
        self.output.dir.as_deref().expect("materialized")
    }

    /// The seeded band-limited initial state this config describes.
    pub fn initial_state(&self) -> Result<State> {
        build_initial_state(self.grid()?, self.seed(), self.band()?, self.amplitude())
    }
}

/// Random divergence-free u and symmetric mean-zero tau on the band, each
/// rescaled so its H^6 norm equals `amplitude`. Smoothness comes from the
/// band limit; the amplitude knob alone sets how small the data is.
pub fn build_initial_state(grid: Grid, seed: u64, band: Band, amplitude: f64) -> Result<State> {
    let u = random_divfree_field(grid, seed, -1.0, band)?;
    let tau = random_symtensor_field(grid, seed ^ 0x9e37_79b9_7f4a_7c15, -1.0, band)?;
    let norm_u = sobolev_norm(&u, NORMALIZATION_EXPONENT)?;
    let norm_tau = sobolev_norm(&tau, NORMALIZATION_EXPONENT)?;
    if norm_u == 0.0 || norm_tau == 0.0 {
        return Err(HarnessError::Other(
            "seeded initial data came out identically zero".into(),
        ));
    }
    Ok(State::new(
        u.scale(amplitude / norm_u),
        tau.scale(amplitude / norm_tau),
        0.0,
    )?)
}

/// Parse, then materialize against the subcommand.
pub fn parse_config(path: &Path, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, kind)
}

pub fn parse_config_str(text: &str, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
    cfg.materialize(kind)?;
    Ok(cfg)
}

/// The echo-back text: a materialized config serialized with every default
/// explicit. `parse_config_str(emit_config(c), c.kind()) == c`.
pub fn emit_config(cfg: &ExperimentConfig) -> Result<String> {
    Ok(toml::to_string_pretty(cfg)?)
}

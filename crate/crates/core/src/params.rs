//! Model variants and their parameter envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which linear terms the momentum and stress equations carry.
///
/// - `GeneralizedNoDamping`: fractional velocity dissipation νΛ^α u, no
///   stress diffusion, rotation/stretching term Q active.
/// - `ViscousDiffusive`: full Laplacian νΔu plus stress diffusion Δτ,
///   unit couplings, Q omitted.
/// - `InviscidDiffusive`: stress diffusion Δτ only, ν forced to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    GeneralizedNoDamping,
    ViscousDiffusive,
    InviscidDiffusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: Variant,
    /// Velocity dissipation strength.
    pub nu: f64,
    /// Order of the fractional dissipation Λ^α; fixed at 2 for the
    /// diffusive variants (their velocity term is a plain Laplacian).
    pub alpha: f64,
    /// Coupling in front of div τ in the momentum equation.
    pub k1: f64,
    /// Coupling in front of D(u) in the stress equation.
    pub k2: f64,
    /// Slip parameter inside Q; b = 0 is the corotational case.
    pub b: f64,
}

impl ModelParams {
    pub fn generalized(nu: f64, alpha: f64) -> ModelParams {
        ModelParams {
            variant: Variant::GeneralizedNoDamping,
            nu,
            alpha,
            k1: 1.0,
            k2: 1.0,
            b: 0.0,
        }
    }

    pub fn with_coupling(mut self, k1: f64, k2: f64, b: f64) -> ModelParams {
        self.k1 = k1;
        self.k2 = k2;
        self.b = b;
        self
    }

    pub fn viscous_diffusive(nu: f64) -> ModelParams {
        ModelParams {
            variant: Variant::ViscousDiffusive,
            nu,
            alpha: 2.0,
            k1: 1.0,
            k2: 1.0,
            b: 0.0,
        }
    }

    pub fn inviscid_diffusive() -> ModelParams {
        ModelParams {
            variant: Variant::InviscidDiffusive,
            nu: 0.0,
            alpha: 2.0,
            k1: 1.0,
            k2: 1.0,
            b: 0.0,
        }
    }

    /// Rejects parameter sets outside the variant's envelope. Every
    /// constructor above passes; deserialized configs go through here.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu, self.alpha, self.k1, self.k2, self.b]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        match self.variant {
            Variant::GeneralizedNoDamping => {
                if self.nu <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "generalized-no-damping needs nu > 0, got {}",
                        self.nu
                    )));
                }
                if !(self.alpha > 1.0 && self.alpha <= 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "generalized-no-damping needs alpha in (1, 2], got {}",
                        self.alpha
                    )));
                }
                if self.k1 <= 0.0 || self.k2 <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "couplings must be positive, got k1 = {}, k2 = {}",
                        self.k1, self.k2
                    )));
                }
                if self.b.abs() > 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "slip parameter must satisfy |b| <= 1, got {}",
                        self.b
                    )));
                }
            }
            Variant::ViscousDiffusive | Variant::InviscidDiffusive => {
                if self.variant == Variant::InviscidDiffusive && self.nu != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "inviscid-diffusive forces nu = 0, got {}",
                        self.nu
                    )));
                }
                if self.nu < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "nu must be nonnegative, got {}",
                        self.nu
                    )));
                }
                if self.alpha != 2.0 {
                    return Err(Error::InvalidParameter(format!(
                        "diffusive variants fix alpha = 2 (Laplacian), got {}",
                        self.alpha
                    )));
                }
                if self.k1 != 1.0 || self.k2 != 1.0 || self.b != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "diffusive variants fix k1 = k2 = 1, b = 0; got k1 = {}, k2 = {}, b = {}",
                        self.k1, self.k2, self.b
                    )));
                }
            }
        }
        Ok(())
    }

    /// Integrating-factor symbol for the velocity equation at squared
    /// wavenumber |k|².
    pub fn lambda_u(&self, k2: f64) -> f64 {
        match self.variant {
            Variant::GeneralizedNoDamping => self.nu * k2.powf(self.alpha / 2.0),
            Variant::ViscousDiffusive => self.nu * k2,
            Variant::InviscidDiffusive => 0.0,
        }
    }

    /// Integrating-factor symbol for the stress equation.
    pub fn lambda_tau(&self, k2: f64) -> f64 {
        match self.variant {
            Variant::GeneralizedNoDamping => 0.0,
            Variant::ViscousDiffusive | Variant::InviscidDiffusive => k2,
        }
    }

    /// Whether Q(τ, ∇u) participates in the stress equation.
    pub fn q_active(&self) -> bool {
        self.variant == Variant::GeneralizedNoDamping
    }
}

//! Integrating-factor Runge–Kutta time stepping.
//!
//! The stiff linear terms (νΛ^α on u, Δ on τ where the variant has it) are
//! integrated exactly per mode through the multiplier e^{−λ(k)h}; only the
//! transport, stretching, and coupling terms go through the explicit tableau.
//! Dissipation therefore imposes no step-size restriction; the CFL bound on
//! transport is re-validated every step.

use serde::{Deserialize, Serialize};

use crate::dynamics::{explicit_rhs, EnergyLedger, State};
use crate::error::{Error, Result};
use crate::field::{max_pointwise_norm, FieldLike, SymTensorField, VectorField};
use crate::ops::{leray_project, map_modes};
use crate::params::ModelParams;

/// Explicit tableau applied to the integrating-factor-transformed system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Heun's method on the transformed variables; second order.
    Ifrk2,
    /// Classical four-stage tableau on the transformed variables.
    Ifrk4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Ifrk2 => 2,
            Scheme::Ifrk4 => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    /// Steps between stored snapshots (and observer calls).
    pub output_every: usize,
    /// Fraction of the CFL estimate the step size must stay under.
    pub cfl_safety: f64,
}

impl StepperConfig {
    pub fn new(dt: f64, scheme: Scheme, t_end: f64) -> StepperConfig {
        StepperConfig {
            dt,
            scheme,
            t_end,
            output_every: 1,
            cfl_safety: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive and finite, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative and finite, got {}",
                self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidParameter(
                "output_every must be at least 1".into(),
            ));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        Ok(())
    }
}

/// Largest transport-stable step dx / (max |u| + ε). The guard keeps the
/// estimate finite for u = 0, where any configured dt is admissible.
pub fn cfl_estimate(state: &State) -> Result<f64> {
    let dx = state.u().grid().dx();
    Ok(dx / (max_pointwise_norm(&state.u().to_physical())? + 1e-12))
}

fn check_cfl(state: &State, dt: f64, cfl_safety: f64) -> Result<()> {
    let admissible = cfl_safety * cfl_estimate(state)?;
    if dt > admissible {
        return Err(Error::CflViolation { dt, admissible });
    }
    Ok(())
}

struct Pair {
    u: VectorField,
    tau: SymTensorField,
}

impl Pair {
    fn lin(&self, a: f64, rhs: &Pair, b: f64) -> Result<Pair> {
        Ok(Pair {
            u: self.u.lin(a, &rhs.u, b)?,
            tau: self.tau.lin(a, &rhs.tau, b)?,
        })
    }

    /// Applies the exact linear propagator over a time h to both fields.
    fn decay(&self, params: &ModelParams, h: f64) -> Result<Pair> {
        Ok(Pair {
            u: map_modes(&self.u, |_, k2| (-params.lambda_u(k2) * h).exp())?,
            tau: map_modes(&self.tau, |_, k2| (-params.lambda_tau(k2) * h).exp())?,
        })
    }
}

/// One step of size h with the nonlinear operator supplied by the caller.
/// Tests pass a zeroed operator to isolate the integrating factor.
fn step_with<N>(y: &Pair, params: &ModelParams, h: f64, scheme: Scheme, n: N) -> Result<Pair>
where
    N: Fn(&Pair) -> Result<Pair>,
{
    match scheme {
        Scheme::Ifrk2 => {
            // y⁺ = E y + h/2 (E k1 + k2), k2 = N(E(y + h k1))
            let k1 = n(y)?;
            let k2 = n(&y.lin(1.0, &k1, h)?.decay(params, h)?)?;
            let ey = y.decay(params, h)?;
            let ek1 = k1.decay(params, h)?;
            ey.lin(1.0, &ek1, 0.5 * h)?.lin(1.0, &k2, 0.5 * h)
        }
        Scheme::Ifrk4 => {
            // classical RK4 on z(t) = e^{λ(t−t0)} y(t), written back in y
            let h2 = 0.5 * h;
            let k1 = n(y)?;
            let k2 = n(&y.lin(1.0, &k1, h2)?.decay(params, h2)?)?;
            let ey2 = y.decay(params, h2)?;
            let k3 = n(&ey2.lin(1.0, &k2, h2)?)?;
            let ey = y.decay(params, h)?;
            let ek3 = k3.decay(params, h2)?;
            let k4 = n(&ey.lin(1.0, &ek3, h)?)?;
            let ek1 = k1.decay(params, h)?;
            let ek2 = k2.decay(params, h2)?;
            ey.lin(1.0, &ek1, h / 6.0)?
                .lin(1.0, &ek2, h / 3.0)?
                .lin(1.0, &k3.decay(params, h2)?, h / 3.0)?
                .lin(1.0, &k4, h / 6.0)
        }
    }
}

fn nonlinear(pair: &Pair, params: &ModelParams) -> Result<Pair> {
    let state = State::assemble_unchecked(pair.u.clone(), pair.tau.clone(), 0.0);
    let (du, dtau) = explicit_rhs(&state, params)?;
    Ok(Pair { u: du, tau: dtau })
}

fn advance(
    state: &State,
    params: &ModelParams,
    h: f64,
    scheme: Scheme,
    t_next: f64,
) -> Result<State> {
    let y = Pair {
        u: state.u().clone(),
        tau: state.tau().clone(),
    };
    let next = step_with(&y, params, h, scheme, |p| nonlinear(p, params))?;
    // re-project so solenoidal drift cannot accumulate across many steps
    let u = leray_project(&next.u)?;
    Ok(State::assemble_unchecked(u, next.tau, t_next))
}

/// Advances one step of config.dt. The linear part is exact; the CFL bound
/// is checked against the current velocity before stepping.
pub fn step(state: &State, params: &ModelParams, config: &StepperConfig) -> Result<State> {
    params.validate()?;
    config.validate()?;
    check_cfl(state, config.dt, config.cfl_safety)?;
    let next = advance(
        state,
        params,
        config.dt,
        config.scheme,
        state.t() + config.dt,
    )?;
    if !next.is_finite() {
        return Err(Error::BlowUp {
            t_last_valid: state.t(),
        });
    }
    Ok(next)
}

/// A stored run: snapshots every `output_every` steps (the initial state
/// first, the final state always included) plus the energy ledger sampled at
/// the same cadence.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<State>,
    pub ledger: EnergyLedger,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(State::t).collect()
    }

    pub fn final_state(&self) -> &State {
        self.snapshots
            .last()
            .expect("at least the initial snapshot")
    }
}

/// Full steps in a span, and whether a shorter trailing step follows. The
/// tolerances absorb accumulated rounding in span/dt so an intended integer
/// step count is never off by one.
fn split_span(span: f64, dt: f64) -> (u64, bool) {
    let n_full = ((span / dt) * (1.0 + 1e-12)).floor() as u64;
    let remainder = span - n_full as f64 * dt;
    (n_full, remainder > 1e-9 * dt)
}

/// How many steps a run from t0 to t_end with this dt will take, counting
/// the trailing partial step. Shares [`evolve`]'s arithmetic, so checkpoint
/// metadata and the actual run cannot disagree.
pub fn planned_steps(t0: f64, t_end: f64, dt: f64) -> u64 {
    let span = t_end - t0;
    if span <= 0.0 {
        return 0;
    }
    let (n_full, partial) = split_span(span, dt);
    n_full + u64::from(partial)
}

/// Repeated [`step`] from `state0.t()` to `config.t_end`, with a trailing
/// shorter step when the span is not a multiple of dt. `on_record` runs on
/// the initial state and then at every `output_every`-th step (the final
/// state always included); nothing is accumulated, so arbitrarily long runs
/// stay O(1) in memory. Returns the final state.
pub fn evolve<O>(
    state0: &State,
    params: &ModelParams,
    config: &StepperConfig,
    mut on_record: O,
) -> Result<State>
where
    O: FnMut(&State) -> Result<()>,
{
    params.validate()?;
    config.validate()?;
    let t0 = state0.t();
    let span = config.t_end - t0;

    on_record(state0)?;
    if span <= 0.0 {
        return Ok(state0.clone());
    }

    let (n_full, partial) = split_span(span, config.dt);
    let remainder = span - n_full as f64 * config.dt;

    let mut state = state0.clone();
    for i in 1..=n_full {
        check_cfl(&state, config.dt, config.cfl_safety)?;
        let t_next = if i == n_full && !partial {
            config.t_end
        } else {
            t0 + i as f64 * config.dt
        };
        state = advance(&state, params, config.dt, config.scheme, t_next)?;
        if !state.is_finite() {
            return Err(Error::BlowUp {
                t_last_valid: t_next - config.dt,
            });
        }
        if i % config.output_every as u64 == 0 || (i == n_full && !partial) {
            on_record(&state)?;
        }
    }
    if partial {
        check_cfl(&state, remainder, config.cfl_safety)?;
        let t_prev = state.t();
        state = advance(&state, params, remainder, config.scheme, config.t_end)?;
        if !state.is_finite() {
            return Err(Error::BlowUp {
                t_last_valid: t_prev,
            });
        }
        on_record(&state)?;
    }
    Ok(state)
}

/// [`evolve`] that additionally collects every recorded snapshot and keeps
/// the energy ledger, calling the observer after each record. Convenient for
/// short runs; for long ones prefer [`evolve`] with a streaming observer.
pub fn integrate_observed<O>(
    state0: &State,
    params: &ModelParams,
    config: &StepperConfig,
    mut observer: O,
) -> Result<Trajectory>
where
    O: FnMut(&State) -> Result<()>,
{
    params.validate()?;
    config.validate()?;
    let mut ledger = EnergyLedger::new(state0, params)?;
    let mut snapshots: Vec<State> = Vec::new();
    evolve(state0, params, config, |state| {
        if !snapshots.is_empty() {
            ledger.record(state, params)?;
        }
        snapshots.push(state.clone());
        observer(state)
    })?;
    Ok(Trajectory { snapshots, ledger })
}

pub fn integrate(
    state0: &State,
    params: &ModelParams,
    config: &StepperConfig,
) -> Result<Trajectory> {
    integrate_observed(state0, params, config, |_| Ok(()))
}

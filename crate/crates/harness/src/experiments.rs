//! The five experiment drivers behind the CLI subcommands.
//!
//! Each driver takes a materialized config, writes its artifacts (config
//! echo, CSV ledgers, summary record, checkpoints) into the config's output
//! directory, and returns the summary it wrote. Runs that end in blow-up
//! still leave their partial artifacts behind before the error propagates.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use oldroyd_core::checkpoint::{load_any, save_field, AnyField};
use oldroyd_core::lp::trapezoid;
use oldroyd_core::{
    besov_block_ledger, block_ratio_ensemble, evolve, kato_ponce_ratio, lambda_ratio_ensemble,
    planned_steps, random_divfree_field, refinement_change, sobolev_norm, DyadicCutoff,
    EnergyLedger, EnsembleSpec, Error as CoreError, FieldLike, Grid, ModelParams, State,
    StepperConfig,
};

use crate::config::{emit_config, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::report::{csv_to_string, save_checkpoint, write_csv, write_toml, CheckpointMeta};

/// Seed offset pairing the second field of a sample with the first, the same
/// pairing the ensemble runners use.
const PAIR_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

fn prepare_out(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let out = cfg.out_dir().to_path_buf();
    fs::create_dir_all(&out)?;
    fs::write(out.join("config_echo.toml"), emit_config(cfg)?)?;
    Ok(out)
}

fn status_of(err: &CoreError) -> (&'static str, Option<f64>) {
    match err {
        CoreError::BlowUp { t_last_valid } => ("blow-up", Some(*t_last_valid)),
        CoreError::CflViolation { .. } => ("cfl-violation", None),
        _ => ("error", None),
    }
}

struct LedgeredRun {
    ledger: EnergyLedger,
    outcome: oldroyd_core::Result<State>,
}

/// Evolve while keeping the harness's own energy ledger, so partial rows
/// survive a run that dies. `extra` sees every record with its ordinal.
fn evolve_ledgered<F>(
    state0: &State,
    params: &ModelParams,
    stepper: &StepperConfig,
    mut extra: F,
) -> Result<LedgeredRun>
where
    F: FnMut(usize, &State) -> oldroyd_core::Result<()>,
{
    let mut ledger = EnergyLedger::new(state0, params)?;
    let mut idx = 0usize;
    let outcome = evolve(state0, params, stepper, |s| {
        if idx > 0 {
            ledger.record(s, params)?;
        }
        extra(idx, s)?;
        idx += 1;
        Ok(())
    });
    Ok(LedgeredRun { ledger, outcome })
}

#[derive(Clone, Copy, Debug, Serialize)]
struct SnapshotIndexRow {
    record: usize,
    t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateSummary {
    pub experiment: String,
    pub status: String,
    /// Last recorded time; equals the configured t_end on a clean finish.
    pub t_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_count: Option<u64>,
    pub energy_rows: usize,
    pub e0: f64,
    pub e1_initial: f64,
    pub e1_sup: f64,
    pub energy_total_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_last_valid: Option<f64>,
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulateSummary> {
    let out = prepare_out(cfg)?;
    let params = cfg.model_params()?;
    let stepper = cfg.stepper_config()?;
    let state0 = cfg.initial_state()?;

    // clear artifacts a failed rerun would otherwise inherit from a
    // previous run in the same directory
    for name in ["final-u.oldb", "final-tau.oldb", "final.toml"] {
        let stale = out.join(name);
        if stale.exists() {
            fs::remove_file(stale)?;
        }
    }
    let snap_dir = out.join("snapshots");
    if snap_dir.exists() {
        fs::remove_dir_all(&snap_dir)?;
    }
    let save_snapshots = cfg.output.save_snapshots.expect("materialized");
    if save_snapshots {
        fs::create_dir_all(&snap_dir)?;
    }
    let mut index = Vec::new();
    let run = evolve_ledgered(&state0, &params, &stepper, |record, s| {
        if save_snapshots {
            save_field(&snap_dir.join(format!("record-{record:06}-u.oldb")), s.u())?;
            save_field(
                &snap_dir.join(format!("record-{record:06}-tau.oldb")),
                s.tau(),
            )?;
            index.push(SnapshotIndexRow { record, t: s.t() });
        }
        Ok(())
    })?;

    write_csv(&out.join("energy.csv"), run.ledger.rows())?;
    if save_snapshots {
        write_csv(&snap_dir.join("index.csv"), &index)?;
    }

    let rows = run.ledger.rows();
    let mut summary = SimulateSummary {
        experiment: cfg.kind().to_string(),
        status: "ok".into(),
        t_final: rows.last().expect("seeded row").t,
        step_count: None,
        energy_rows: rows.len(),
        e0: run.ledger.e0(),
        e1_initial: rows[0].e1,
        e1_sup: rows.last().expect("seeded row").e1,
        energy_total_final: run.ledger.latest_total(),
        t_last_valid: None,
    };
    match run.outcome {
        Ok(final_state) => {
            let step_count = planned_steps(state0.t(), stepper.t_end, stepper.dt);
            summary.step_count = Some(step_count);
            let meta = CheckpointMeta {
                t: final_state.t(),
                step_count,
                config: cfg.clone(),
            };
            save_checkpoint(&out, "final", &final_state, &meta)?;
            write_toml(&out.join("summary.toml"), &summary)?;
            Ok(summary)
        }
        Err(e) => {
            let (status, t_last) = status_of(&e);
            summary.status = status.into();
            summary.t_last_valid = t_last;
            write_toml(&out.join("summary.toml"), &summary)?;
            Err(e.into())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub experiment: String,
    pub status: String,
    pub e0: f64,
    /// Smallest C with E(t) <= C (E0 + E(t)^2) along the run.
    pub fitted_c2: f64,
    pub bound_holds_at_fitted: bool,
    pub initial_total: f64,
    pub max_total: f64,
    /// Whether the running energy ever exceeded twice its initial value,
    /// the discrete stand-in for leaving the small-data regime.
    pub growth_flag: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_last_valid: Option<f64>,
}

pub fn run_energy_audit(cfg: &ExperimentConfig) -> Result<AuditSummary> {
    let out = prepare_out(cfg)?;
    let params = cfg.model_params()?;
    let stepper = cfg.stepper_config()?;
    let state0 = cfg.initial_state()?;

    let run = evolve_ledgered(&state0, &params, &stepper, |_, _| Ok(()))?;
    write_csv(&out.join("energy.csv"), run.ledger.rows())?;

    let rows = run.ledger.rows();
    let initial_total = rows[0].total();
    let max_total = rows.iter().map(|r| r.total()).fold(0.0, f64::max);
    let fitted_c2 = run.ledger.fitted_c2();
    let mut summary = AuditSummary {
        experiment: cfg.kind().to_string(),
        status: "ok".into(),
        e0: run.ledger.e0(),
        fitted_c2,
        bound_holds_at_fitted: run.ledger.bound_holds(fitted_c2),
        initial_total,
        max_total,
        growth_flag: max_total > 2.0 * initial_total,
        t_last_valid: None,
    };
    match run.outcome {
        Ok(_) => {
            write_toml(&out.join("summary.toml"), &summary)?;
            let fail_on_flag = cfg
                .audit
                .as_ref()
                .and_then(|a| a.fail_on_flag)
                .unwrap_or(false);
            if fail_on_flag && summary.growth_flag {
                return Err(HarnessError::Threshold(format!(
                    "energy grew to {max_total:.6e}, more than twice its initial {initial_total:.6e}"
                )));
            }
            Ok(summary)
        }
        Err(e) => {
            let (status, t_last) = status_of(&e);
            summary.status = status.into();
            summary.t_last_valid = t_last;
            write_toml(&out.join("summary.toml"), &summary)?;
            Err(e.into())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct BlockRow {
    j: String,
    weighted_l2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BesovSummary {
    pub experiment: String,
    pub field_kind: String,
    pub s: f64,
    pub total: f64,
    pub blocks: usize,
}

/// Returns the summary and the CSV text (also written to disk) so the CLI
/// can print the ledger.
pub fn run_besov_norm(cfg: &ExperimentConfig) -> Result<(BesovSummary, String)> {
    let out = prepare_out(cfg)?;
    let besov = cfg.besov.as_ref().expect("validated");
    let input = besov.input.as_ref().expect("validated");
    let s = besov.s.expect("materialized");

    let any = load_any(input)?;
    let grid = match &any {
        AnyField::Scalar(f) => f.grid(),
        AnyField::Vector(f) => f.grid(),
        AnyField::SymTensor(f) => f.grid(),
        AnyField::Tensor(f) => f.grid(),
    };
    let cfg_grid = cfg.grid()?;
    if grid.dim() != cfg_grid.dim() || grid.size() != cfg_grid.size() {
        return Err(HarnessError::Config(format!(
            "besov.input: stored field is {}d size {}, config grid is {}d size {}",
            grid.dim(),
            grid.size(),
            cfg_grid.dim(),
            cfg_grid.size()
        )));
    }

    fn blocks<F: FieldLike>(f: &F, s: f64) -> oldroyd_core::Result<Vec<(i32, f64)>> {
        let cut = DyadicCutoff::new(f.grid());
        besov_block_ledger(&cut, f, s)
    }
    let ledger = match &any {
        AnyField::Scalar(f) => blocks(f, s)?,
        AnyField::Vector(f) => blocks(f, s)?,
        AnyField::SymTensor(f) => blocks(f, s)?,
        AnyField::Tensor(f) => blocks(f, s)?,
    };
    let total: f64 = ledger.iter().map(|&(_, w)| w).sum();
    let mut rows: Vec<BlockRow> = ledger
        .iter()
        .map(|&(j, w)| BlockRow {
            j: j.to_string(),
            weighted_l2: w,
        })
        .collect();
    rows.push(BlockRow {
        j: "total".into(),
        weighted_l2: total,
    });

    write_csv(&out.join("blocks.csv"), &rows)?;
    let summary = BesovSummary {
        experiment: cfg.kind().to_string(),
        field_kind: any.kind().to_string(),
        s,
        total,
        blocks: ledger.len(),
    };
    write_toml(&out.join("summary.toml"), &summary)?;
    Ok((summary, csv_to_string(&rows)?))
}

#[derive(Clone, Debug, Serialize)]
struct LabRow {
    op: &'static str,
    grid: usize,
    seed: u64,
    s: f64,
    // None renders as an empty CSV cell for ops without separate sides
    lhs: Option<f64>,
    rhs: Option<f64>,
    ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabOpSummary {
    pub op: String,
    pub s: f64,
    pub max_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio_refined: Option<f64>,
    /// |refined - base| / base of the max ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement_change: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorSummary {
    pub experiment: String,
    pub grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_grid: Option<usize>,
    pub samples: usize,
    pub admissible: bool,
    pub ops: Vec<LabOpSummary>,
}

pub fn run_commutator_test(cfg: &ExperimentConfig) -> Result<CommutatorSummary> {
    let out = prepare_out(cfg)?;
    let lab = cfg.lab.as_ref().expect("materialized");
    let grid = cfg.grid()?;
    let band = cfg.band()?;
    let samples = lab.samples.expect("materialized");
    let s_values = lab.s_values.clone().expect("materialized");
    let kp_s = lab.kato_ponce_s.clone().expect("materialized");
    let base = cfg.seed();

    let spec = EnsembleSpec::with_sequential_seeds(base, samples, grid, band, s_values.clone());
    let lambda = lambda_ratio_ensemble(&spec)?;
    let block = block_ratio_ensemble(&spec)?;

    let mut kp_rows: Vec<(u64, f64, f64)> = Vec::new();
    for i in 0..samples as u64 {
        let seed = base + i;
        let u = random_divfree_field(grid, seed, -1.0, band)?;
        let v = random_divfree_field(grid, seed ^ PAIR_SEED, -1.0, band)?;
        for &s in &kp_s {
            kp_rows.push((seed, s, kato_ponce_ratio(&u, &v, s)?));
        }
    }

    let refined = if lab.refine.expect("materialized") {
        let fine = Grid::new(grid.dim(), grid.size() * 2)?;
        let fine_spec = EnsembleSpec {
            grid: fine,
            ..spec.clone()
        };
        Some((
            fine,
            lambda_ratio_ensemble(&fine_spec)?,
            block_ratio_ensemble(&fine_spec)?,
        ))
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut push_ensemble =
        |op: &'static str, g: usize, report: &oldroyd_core::InequalityReport| {
            for r in &report.rows {
                rows.push(LabRow {
                    op,
                    grid: g,
                    seed: r.seed,
                    s: r.s,
                    lhs: Some(r.lhs),
                    rhs: Some(r.rhs),
                    ratio: r.ratio,
                });
            }
        };
    push_ensemble("lambda-commutator", grid.size(), &lambda);
    push_ensemble("block-commutator", grid.size(), &block);
    if let Some((fine, lambda_f, block_f)) = &refined {
        push_ensemble("lambda-commutator", fine.size(), lambda_f);
        push_ensemble("block-commutator", fine.size(), block_f);
    }
    for &(seed, s, ratio) in &kp_rows {
        rows.push(LabRow {
            op: "kato-ponce",
            grid: grid.size(),
            seed,
            s,
            lhs: None,
            rhs: None,
            ratio,
        });
    }
    write_csv(&out.join("rows.csv"), &rows)?;

    let mut ops = Vec::new();
    for &s in &s_values {
        for (op, base_report, fine_report) in [
            (
                "lambda-commutator",
                &lambda,
                refined.as_ref().map(|(_, l, _)| l),
            ),
            (
                "block-commutator",
                &block,
                refined.as_ref().map(|(_, _, b)| b),
            ),
        ] {
            ops.push(LabOpSummary {
                op: op.to_string(),
                s,
                max_ratio: base_report.max_ratio_at(s),
                max_ratio_refined: fine_report.map(|f| f.max_ratio_at(s)),
                refinement_change: fine_report.map(|f| refinement_change(base_report, f, s)),
            });
        }
    }
    for &s in &kp_s {
        let max = kp_rows
            .iter()
            .filter(|&&(_, rs, _)| rs == s)
            .map(|&(_, _, r)| r)
            .fold(0.0, f64::max);
        ops.push(LabOpSummary {
            op: "kato-ponce".into(),
            s,
            max_ratio: max,
            max_ratio_refined: None,
            refinement_change: None,
        });
    }

    let admissible = lambda.admissible
        && block.admissible
        && kp_rows.iter().all(|&(_, _, r)| r.is_finite())
        && refined
            .as_ref()
            .is_none_or(|(_, l, b)| l.admissible && b.admissible);
    let summary = CommutatorSummary {
        experiment: cfg.kind().to_string(),
        grid: grid.size(),
        refined_grid: refined.as_ref().map(|(g, _, _)| g.size()),
        samples,
        admissible,
        ops,
    };
    write_toml(&out.join("summary.toml"), &summary)?;

    if let Some(tol) = lab.refine_tolerance {
        let worst = summary
            .ops
            .iter()
            .filter_map(|o| o.refinement_change.map(|c| (o.op.clone(), o.s, c)))
            .fold(None::<(String, f64, f64)>, |acc, item| match acc {
                Some(best) if best.2 >= item.2 => Some(best),
                _ => Some(item),
            });
        if let Some((op, s, change)) = worst {
            if change > tol {
                return Err(HarnessError::Threshold(format!(
                    "{op} max ratio at s = {s} moved {change:.3} under refinement (tolerance {tol})"
                )));
            }
        }
    }
    if !admissible {
        return Err(HarnessError::Threshold(
            "a commutator ratio came out non-finite".into(),
        ));
    }
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberRow {
    pub nu: f64,
    pub max_g: f64,
    pub status: String,
    pub included: bool,
    /// Empty unless the member failed or was excluded.
    pub note: String,
}

#[derive(Clone, Copy, Debug, Serialize)]
struct GCurveRow {
    nu: f64,
    t: f64,
    g: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
struct ReferenceRow {
    t: f64,
    /// H^{s+1} size of the reference pair, the growth-rate weight.
    m: f64,
    /// H^6 size of the reference velocity, the forcing weight.
    h6_u: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateSummary {
    pub experiment: String,
    pub grid: usize,
    pub t_end: f64,
    pub dt: f64,
    pub s_diff: f64,
    pub slope: f64,
    pub intercept: f64,
    pub fit_rms: f64,
    pub members_in_fit: usize,
    /// Constants of the fitted small-viscosity threshold; both empirical,
    /// c1 assumed 1.
    pub c1_assumed: f64,
    pub c2_empirical: f64,
    pub nu0_empirical: f64,
    pub control_nu: f64,
    pub control_rel_change: f64,
    pub warnings: Vec<String>,
    pub members: Vec<MemberRow>,
}

struct MemberOutcome {
    nu: f64,
    g: Vec<(f64, f64)>,
    max_g: f64,
    failure: Option<(String, f64)>,
}

fn collect_states(
    state0: &State,
    params: &ModelParams,
    stepper: &StepperConfig,
) -> Result<Vec<State>> {
    let mut v = Vec::new();
    evolve(state0, params, stepper, |s| {
        v.push(s.clone());
        Ok(())
    })?;
    Ok(v)
}

/// One viscous member against the stored reference samples. Difference norms
/// are taken at matching record times; misalignment is a programming error
/// surfaced as such. Blow-up and step-size rejection mark the member
/// invalid instead of failing the sweep.
fn run_member(
    nu: f64,
    state0: &State,
    stepper: &StepperConfig,
    reference: &[State],
    s_diff: f64,
) -> Result<MemberOutcome> {
    let params = ModelParams::viscous_diffusive(nu);
    let mut g = Vec::new();
    let mut k = 0usize;
    let res = evolve(state0, &params, stepper, |st| {
        let rs = reference.get(k).ok_or_else(|| {
            CoreError::InvalidParameter("internal: sweep sampling misaligned".into())
        })?;
        if st.t() != rs.t() {
            return Err(CoreError::InvalidParameter(format!(
                "internal: member time {} vs reference time {}",
                st.t(),
                rs.t()
            )));
        }
        let du = st.u().lin(1.0, rs.u(), -1.0)?;
        let dtau = st.tau().lin(1.0, rs.tau(), -1.0)?;
        g.push((
            st.t(),
            sobolev_norm(&du, s_diff)? + sobolev_norm(&dtau, s_diff)?,
        ));
        k += 1;
        Ok(())
    });
    let max_g = g.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    match res {
        Ok(_) => Ok(MemberOutcome {
            nu,
            g,
            max_g,
            failure: None,
        }),
        Err(CoreError::BlowUp { t_last_valid }) => Ok(MemberOutcome {
            nu,
            g,
            max_g,
            failure: Some(("blow-up".into(), t_last_valid)),
        }),
        Err(CoreError::CflViolation { .. }) => {
            let t = g.last().map_or(state0.t(), |&(t, _)| t);
            Ok(MemberOutcome {
                nu,
                g,
                max_g,
                failure: Some(("cfl-violation".into(), t)),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let rms = (pts
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Evolves the zero-viscosity reference once, then every viscous member on
/// identical grids and steps, measures G(t) = |u_nu - u|_{H^s} +
/// |tau_nu - tau|_{H^s} at record times, and fits log max_t G against
/// log nu. The smallest viscosity is rerun at half the step as the
/// time-discretization control: above 20% relative change it is excluded
/// from the fit, above 5% it draws a warning.
pub fn run_nu_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RateSummary> {
    let out = prepare_out(cfg)?;
    let sweep = cfg.sweep.as_ref().expect("materialized");
    let nu_list = sweep.nu_list.clone().expect("materialized");
    let s_diff = sweep.s_diff.expect("materialized");
    let stepper = cfg.stepper_config()?;
    let grid = cfg.grid()?;
    let state0 = cfg.initial_state()?;
    let ref_params = ModelParams::inviscid_diffusive();

    let reference = collect_states(&state0, &ref_params, &stepper)?;
    let ref_rows = reference
        .iter()
        .map(|st| {
            Ok(ReferenceRow {
                t: st.t(),
                m: sobolev_norm(st.u(), s_diff + 1.0)? + sobolev_norm(st.tau(), s_diff + 1.0)?,
                h6_u: sobolev_norm(st.u(), 6.0)?,
            })
        })
        .collect::<oldroyd_core::Result<Vec<_>>>()?;
    write_csv(&out.join("reference.csv"), &ref_rows)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Other(format!("worker pool: {e}")))?;
    let members: Vec<MemberOutcome> = pool.install(|| {
        nu_list
            .par_iter()
            .map(|&nu| run_member(nu, &state0, &stepper, &reference, s_diff))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut warnings = Vec::new();

    // time-discretization control on the smallest viscosity
    let control_nu = *nu_list.last().expect("validated nonempty");
    let smallest = members.last().expect("one per nu");
    let mut exclude_control = false;
    let control_rel_change = if smallest.failure.is_none() {
        let mut half = stepper;
        half.dt *= 0.5;
        half.output_every *= 2;
        let ref_half = collect_states(&state0, &ref_params, &half)?;
        let member_half = run_member(control_nu, &state0, &half, &ref_half, s_diff)?;
        if let Some((status, t)) = &member_half.failure {
            warnings.push(format!(
                "control rerun at dt/2 failed ({status} near t = {t}); smallest nu excluded"
            ));
            exclude_control = true;
            f64::NAN
        } else {
            let rel =
                (member_half.max_g - smallest.max_g).abs() / (smallest.max_g + f64::MIN_POSITIVE);
            if rel > 0.20 {
                warnings.push(format!(
                    "time-discretization error {:.1}% of G at nu = {control_nu}; excluded from the fit",
                    100.0 * rel
                ));
                exclude_control = true;
            } else if rel > 0.05 {
                warnings.push(format!(
                    "time-discretization error {:.1}% of G at nu = {control_nu} (kept; above the 5% comfort line)",
                    100.0 * rel
                ));
            }
            rel
        }
    } else {
        warnings.push(format!(
            "smallest viscosity nu = {control_nu} did not finish; no control run"
        ));
        f64::NAN
    };

    let mut rows: Vec<MemberRow> = Vec::new();
    let mut curve_rows: Vec<GCurveRow> = Vec::new();
    for m in &members {
        let is_control = m.nu == control_nu;
        let (status, mut note) = match &m.failure {
            None => ("ok".to_string(), String::new()),
            Some((what, t)) => (what.clone(), format!("failed near t = {t}")),
        };
        let included = m.failure.is_none() && !(is_control && exclude_control) && m.max_g > 0.0;
        if is_control && exclude_control && m.failure.is_none() {
            note = "excluded by the dt/2 control".into();
        }
        rows.push(MemberRow {
            nu: m.nu,
            max_g: m.max_g,
            status,
            included,
            note,
        });
        for &(t, g) in &m.g {
            curve_rows.push(GCurveRow { nu: m.nu, t, g });
        }
    }
    write_csv(&out.join("rate.csv"), &rows)?;
    write_csv(&out.join("g_curves.csv"), &curve_rows)?;

    // monotone trend across included members, largest nu first
    let included: Vec<&MemberRow> = rows.iter().filter(|r| r.included).collect();
    for pair in included.windows(2) {
        if pair[1].max_g > pair[0].max_g {
            warnings.push(format!(
                "max_t G rose from {:.6e} to {:.6e} as nu fell {} -> {}",
                pair[0].max_g, pair[1].max_g, pair[0].nu, pair[1].nu
            ));
        }
    }

    let pts: Vec<(f64, f64)> = included.iter().map(|r| (r.nu.ln(), r.max_g.ln())).collect();
    let fit = if pts.len() >= 3 {
        Some(least_squares(&pts))
    } else {
        None
    };
    let (slope, intercept, fit_rms) = fit.unwrap_or((f64::NAN, f64::NAN, f64::NAN));

    // fitted small-viscosity threshold from the reference run:
    // 1 / (8 c2 int_0^T h6_u(t') exp(int_t'^T m) dt')
    let times: Vec<f64> = ref_rows.iter().map(|r| r.t).collect();
    let m_vals: Vec<f64> = ref_rows.iter().map(|r| r.m).collect();
    let total_m = trapezoid(&times, &m_vals);
    let mut prefix = 0.0;
    let integrand: Vec<f64> = ref_rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if i > 0 {
                prefix += 0.5 * (m_vals[i] + m_vals[i - 1]) * (times[i] - times[i - 1]);
            }
            r.h6_u * (total_m - prefix).exp()
        })
        .collect();
    let forcing_integral = trapezoid(&times, &integrand);
    let c2_empirical = intercept.exp();
    let nu0_empirical = 1.0 / (8.0 * c2_empirical * forcing_integral);

    let summary = RateSummary {
        experiment: cfg.kind().to_string(),
        grid: grid.size(),
        t_end: stepper.t_end,
        dt: stepper.dt,
        s_diff,
        slope,
        intercept,
        fit_rms,
        members_in_fit: pts.len(),
        c1_assumed: 1.0,
        c2_empirical,
        nu0_empirical,
        control_nu,
        control_rel_change,
        warnings,
        members: rows,
    };
    write_toml(&out.join("summary.toml"), &summary)?;

    if pts.len() < 3 {
        return Err(HarnessError::Threshold(format!(
            "rate fit needs at least 3 valid members, have {}",
            pts.len()
        )));
    }
    if let Some([lo, hi]) = sweep.expect_slope {
        if !(lo..=hi).contains(&summary.slope) {
            return Err(HarnessError::Threshold(format!(
                "fitted slope {:.4} outside expected [{lo}, {hi}]",
                summary.slope
            )));
        }
    }
    Ok(summary)
}

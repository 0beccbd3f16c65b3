//! SNR sweeps: power allocation, closed forms and simulation side by side.
//!
//! One CSV row is produced per (grid point, outage constraint, relay count),
//! always in that nesting order. Rows are evaluated in parallel.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{
    asep_scenario_a, outage_capacity, solve_relay_power, solve_secondary_source_power, AsepPath,
    FallbackReason, Metric, PrimaryOutageInputs, SecondaryCdfInputs,
};
use crate::config::{ExperimentConfig, SweepPlan};
use crate::error::{Error, Result};
use crate::model::{ModulationSpec, NetworkScenario, PowerProfile, Scenario};
use crate::montecarlo::{estimate_asep, estimate_outage, Estimate, SimulationSpec};

/// Column header of every sweep CSV.
pub const CSV_HEADER: &str =
    "x_db,threshold,k,analytic_oc,mc_oc,mc_oc_ci,analytic_asep,mc_asep,mc_asep_ci,gamma_s,gamma_r,flags";

/// Which halves of a row are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub analytic: bool,
    pub monte_carlo: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            analytic: true,
            monte_carlo: true,
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x_db: f64,
    /// Primary outage constraint `P^Thr`.
    pub threshold: f64,
    pub k: usize,
    pub analytic_oc: Option<f64>,
    pub mc_oc: Option<Estimate>,
    pub analytic_asep: Option<f64>,
    pub mc_asep: Option<Estimate>,
    /// Solved source SNR, zero when the constraint cannot be met.
    pub gamma_s: f64,
    /// Solved relay SNR, zero when the constraint cannot be met.
    pub gamma_r: f64,
    pub flags: Vec<String>,
}

impl SweepRow {
    pub fn is_infeasible(&self) -> bool {
        self.flags.iter().any(|f| f == "infeasible")
    }

    pub fn to_csv_line(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let est = |e: &Option<Estimate>| (f(e.map(|e| e.value)), f(e.map(|e| e.ci_half_width)));
        let (mc_oc, mc_oc_ci) = est(&self.mc_oc);
        let (mc_asep, mc_asep_ci) = est(&self.mc_asep);
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            f(Some(self.x_db)),
            f(Some(self.threshold)),
            self.k,
            f(self.analytic_oc),
            mc_oc,
            mc_oc_ci,
            f(self.analytic_asep),
            mc_asep,
            mc_asep_ci,
            f(Some(self.gamma_s)),
            f(Some(self.gamma_r)),
            self.flags.join(";"),
        )
    }
}

/// Evaluate every row of `plan`, in grid order.
pub fn evaluate_sweep(config: &ExperimentConfig, plan: &SweepPlan, options: RunOptions) -> Result<Vec<SweepRow>> {
    let network = config.network()?;
    for &k in &plan.relay_counts {
        network.with_relay_count(k)?;
    }
    if options.monte_carlo && plan.trials < crate::montecarlo::MIN_TRIALS {
        return Err(Error::Config(format!(
            "at least {} trials are required, got {}",
            crate::montecarlo::MIN_TRIALS,
            plan.trials
        )));
    }
    let points: Vec<(f64, f64, usize)> = plan
        .grid_db
        .iter()
        .flat_map(|&x| {
            plan.thresholds
                .iter()
                .flat_map(move |&t| plan.relay_counts.iter().map(move |&k| (x, t, k)))
        })
        .collect();
    let ctx = Context {
        config,
        network: &network,
        plan,
        options,
        modulation: config.modulation(),
        metric: config.metric(),
    };
    Ok(points.into_par_iter().map(|(x, t, k)| ctx.row(x, t, k)).collect())
}

/// Evaluate `plan` and render it as CSV text with LF line endings.
pub fn run_sweep(config: &ExperimentConfig, plan: &SweepPlan, options: RunOptions) -> Result<String> {
    let rows = evaluate_sweep(config, plan, options)?;
    Ok(render_csv(&rows))
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 256);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    out
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    network: &'a NetworkScenario<f64>,
    plan: &'a SweepPlan,
    options: RunOptions,
    modulation: ModulationSpec<f64>,
    metric: Metric,
}

impl Context<'_> {
    fn row(&self, x_db: f64, threshold: f64, k: usize) -> SweepRow {
        let mut row = SweepRow {
            x_db,
            threshold,
            k,
            analytic_oc: None,
            mc_oc: None,
            analytic_asep: None,
            mc_asep: None,
            gamma_s: 0.0,
            gamma_r: 0.0,
            flags: Vec::new(),
        };
        if let Err(e) = self.fill(&mut row) {
            row.analytic_oc = None;
            row.mc_oc = None;
            row.analytic_asep = None;
            row.mc_asep = None;
            row.flags.push(format!("error={}", sanitize(&e.to_string())));
        }
        row
    }

    fn fill(&self, row: &mut SweepRow) -> Result<()> {
        let net = self.network.with_relay_count(row.k)?;
        let (primary, cap_s, cap_r) = self.config.powers_at(self.plan.x_axis, row.x_db);
        let caps = PowerProfile::at_caps(primary, cap_s, cap_r)?;
        let is_a = net.scenario == Scenario::A;
        let Some((gs, gr)) = solve_powers(&net, &caps, row.threshold)? else {
            row.flags.push("infeasible".into());
            self.fill_silent(row, is_a);
            return Ok(());
        };
        row.gamma_s = gs;
        row.gamma_r = gr;
        if gs == cap_s {
            row.flags.push("source_at_cap".into());
        }
        if gr == cap_r {
            row.flags.push("relay_at_cap".into());
        }
        let powers = caps.with_secondary(gs, gr)?;
        let theta = net.secondary_threshold;
        if self.options.analytic {
            row.analytic_oc = Some(outage_capacity(&net, &powers, theta, self.metric)?);
            if is_a {
                let inputs = SecondaryCdfInputs::from_scenario(&net, &powers, 0)?;
                let asep = asep_scenario_a(&inputs, &self.modulation)?;
                if let AsepPath::Quadrature(reason) = asep.path {
                    row.flags.push(format!("asep_fallback={}", fallback_name(reason)));
                }
                row.analytic_asep = Some(asep.value);
            }
        }
        if self.options.monte_carlo {
            let spec = SimulationSpec::new(self.plan.trials, self.plan.seed)
                .with_sinr(self.plan.sinr)
                .with_metric(self.metric);
            row.mc_oc = Some(estimate_outage(&net, &powers, theta, &spec)?);
            if is_a {
                let spec = spec.with_metric(Metric::SourceOne);
                row.mc_asep = Some(estimate_asep(&net, &powers, &self.modulation, &spec)?);
            }
        }
        Ok(())
    }

    /// Secondary network silenced: certain outage, and the SEP of a zero SINR.
    fn fill_silent(&self, row: &mut SweepRow, is_a: bool) {
        let silent = |value: f64| Estimate {
            value,
            trials: self.plan.trials,
            ci_half_width: 0.0,
            seed: self.plan.seed,
        };
        let sep = 0.5 * self.modulation.a;
        if self.options.analytic {
            row.analytic_oc = Some(1.0);
            if is_a {
                row.analytic_asep = Some(sep);
            }
        }
        if self.options.monte_carlo {
            row.mc_oc = Some(silent(1.0));
            if is_a {
                row.mc_asep = Some(silent(sep));
            }
        }
    }
}

/// Largest source and relay SNRs meeting the primary outage constraint.
///
/// The relay SNR is shared by all `K` relays, so it is the smallest of the
/// per-relay solutions. `None` when no positive power meets the constraint.
pub fn solve_powers(
    network: &NetworkScenario<f64>,
    caps: &PowerProfile<f64>,
    threshold: f64,
) -> Result<Option<(f64, f64)>> {
    let infeasible = |r: Result<f64>| match r {
        Ok(p) if p > 0.0 => Ok(Some(p)),
        Ok(_) | Err(Error::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let inputs = PrimaryOutageInputs::from_scenario(network, caps, 0)?;
    let Some(source) = infeasible(solve_secondary_source_power(&inputs, threshold, caps.max_source))? else {
        return Ok(None);
    };
    let mut relay = caps.max_relay;
    for k in 0..network.relay_count() {
        let inputs = PrimaryOutageInputs::from_scenario(network, caps, k)?;
        match infeasible(solve_relay_power(&inputs, threshold, caps.max_relay))? {
            Some(p) => relay = relay.min(p),
            None => return Ok(None),
        }
    }
    Ok(Some((source, relay)))
}

fn fallback_name(reason: FallbackReason) -> &'static str {
    match reason {
        FallbackReason::NearDegeneratePoles => "near_degenerate_poles",
        FallbackReason::IllConditioned => "ill_conditioned",
        FallbackReason::SpecialFunction => "special_function",
    }
}

fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| if c == ',' || c == ';' || c.is_control() { ' ' } else { c })
        .collect()
}

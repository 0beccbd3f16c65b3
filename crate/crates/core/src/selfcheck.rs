//! Closed forms against their quadrature oracles on a small fixed set of
//! networks, plus the special-function primitives they rest on.
//!
//! `perturbation` scales every closed-form value by `1 + perturbation`
//! before comparison; a nonzero value must make the suite fail.

use std::fmt;

use crate::analytic::{
    asep_scenario_a, cdf_scenario_a, cdf_scenario_a_e2e, cdf_scenario_b, primary_outage,
    relay_phase_outage, solve_relay_power, solve_secondary_source_power, PrimaryOutageInputs,
    SecondaryCdfInputs,
};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::model::{FadingLink, ModulationSpec, PowerProfile, Scenario};
use crate::oracle::{
    asep_oracle, cdf_oracle_scenario_a, cdf_oracle_scenario_a_e2e, primary_outage_oracle,
    relay_phase_oracle, selection_oracle, MAX_ORACLE_RELAYS,
};
use crate::quadrature::{integrate_semi_infinite, QuadratureSpec};
use crate::specfun::{
    ln_gamma, partial_fractions, tricomi_u, upper_incomplete_gamma_int, Pole,
    PoleSet,
};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Largest relative discrepancy seen; infinite when evaluation failed.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} (max rel err {:.3e}, tol {:.0e})", self.name, self.worst, self.tolerance)?;
        if let Some(d) = &self.detail {
            write!(f, ": {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckResult>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

impl fmt::Display for SelfCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    let d = (got - want).abs();
    if d == 0.0 {
        0.0
    } else {
        d / want.abs().max(f64::MIN_POSITIVE)
    }
}

/// Runs `cases`, keeping the worst relative error and the first failure.
fn check<C>(name: &str, tolerance: f64, cases: &[C], mut f: impl FnMut(&C) -> Result<(f64, f64)>) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut detail = None;
    for (i, c) in cases.iter().enumerate() {
        match f(c) {
            Ok((got, want)) => {
                let e = rel_err(got, want);
                if !(e <= worst) {
                    worst = if e.is_nan() { f64::INFINITY } else { e };
                }
                if !(e <= tolerance) && detail.is_none() {
                    detail = Some(format!("case {i}: closed form {got:.17e}, reference {want:.17e}"));
                }
            }
            Err(e) => {
                worst = f64::INFINITY;
                detail.get_or_insert_with(|| format!("case {i}: {e}"));
            }
        }
    }
    CheckResult {
        name: name.to_string(),
        worst,
        tolerance,
        detail,
    }
}

fn link(m: u32, g: f64) -> FadingLink<f64> {
    FadingLink { m, mean_gain: g }
}

fn primary_cases() -> Vec<PrimaryOutageInputs<f64>> {
    vec![
        PrimaryOutageInputs {
            e: link(1, 1.0),
            f: link(1, 1.0),
            g: link(1, 1.0),
            l: link(1, 1.0),
            primary: 10.0,
            source1: 1.0,
            source2: 1.0,
            relay: 1.0,
            threshold: 1.0,
        },
        PrimaryOutageInputs {
            e: link(2, 1.5),
            f: link(3, 0.4),
            g: link(1, 0.7),
            l: link(2, 0.3),
            primary: 20.0,
            source1: 3.0,
            source2: 3.0,
            relay: 5.0,
            threshold: 3.0,
        },
        PrimaryOutageInputs {
            e: link(3, 0.8),
            f: link(2, 0.2),
            g: link(2, 0.9),
            l: link(3, 1.2),
            primary: 50.0,
            source1: 10.0,
            source2: 10.0,
            relay: 8.0,
            threshold: 7.0,
        },
    ]
}

fn secondary_cases() -> Vec<SecondaryCdfInputs<f64>> {
    vec![
        SecondaryCdfInputs {
            x: link(1, 1.0),
            w: link(1, 1.0),
            y: link(1, 1.0),
            z: link(1, 1.0),
            v: link(1, 1.0),
            primary: 10.0,
            source: 10.0,
            relay: 10.0,
            threshold: 2.0,
        },
        SecondaryCdfInputs {
            x: link(2, 1.5),
            w: link(3, 0.8),
            y: link(1, 0.5),
            z: link(2, 0.3),
            v: link(1, 0.7),
            primary: 5.0,
            source: 8.0,
            relay: 12.0,
            threshold: 1.5,
        },
    ]
}

fn selection_cases() -> Vec<Vec<SecondaryCdfInputs<f64>>> {
    let base = SecondaryCdfInputs {
        x: link(2, 1.0),
        w: link(1, 1.3),
        y: link(1, 0.6),
        z: link(1, 1.0),
        v: link(1, 1.0),
        primary: 10.0,
        source: 6.0,
        relay: 9.0,
        threshold: 2.0,
    };
    let mut second = base;
    second.x = link(1, 0.7);
    second.w = link(3, 2.0);
    second.y = link(2, 0.4);
    let mut third = base;
    third.x = link(3, 1.8);
    third.y = link(1, 1.1);
    vec![vec![base], vec![base, second], vec![base, second, third]]
}

/// Runs every check. `config`, when given, adds its network at the power caps.
pub fn run_selfcheck(config: Option<&ExperimentConfig>, perturbation: f64) -> SelfCheckReport {
    let scale = 1.0 + perturbation;
    let tight = QuadratureSpec::with_relative_tolerance(1e-10);
    let e2e_spec = QuadratureSpec::with_relative_tolerance(1e-8);
    let mut primary = primary_cases();
    let mut secondary = secondary_cases();
    let mut selection = selection_cases();
    if let Some(cfg) = config {
        if let Ok(extra) = configured_cases(cfg) {
            primary.push(extra.0);
            match extra.1 {
                ConfiguredSecondary::A(i) => secondary.push(i),
                ConfiguredSecondary::B(v) => selection.push(v),
            }
        }
    }
    let modulation = ModulationSpec::mpsk(4).expect("valid order");
    let mut checks = vec![
        check("primary outage, both sources transmitting", 1e-6, &primary, |i| {
            Ok((primary_outage(i)? * scale, primary_outage_oracle(i, &tight)?))
        }),
        check("primary outage, relay transmitting", 1e-6, &primary, |i| {
            Ok((relay_phase_outage(i)? * scale, relay_phase_oracle(i, &tight)?))
        }),
        check("source power solver fixed point", 1e-9, &primary, |i| {
            solver_case(i, scale, Solved::Source)
        }),
        check("relay power solver fixed point", 1e-9, &primary, |i| {
            solver_case(i, scale, Solved::Relay)
        }),
        check("S1 bounded-SINR cdf", 1e-6, &secondary, |i| {
            Ok((cdf_scenario_a(i)? * scale, cdf_oracle_scenario_a(i, i.threshold, &tight)?))
        }),
        check("end-to-end bounded-SINR cdf", 1e-6, &secondary, |i| {
            Ok((cdf_scenario_a_e2e(i)? * scale, cdf_oracle_scenario_a_e2e(i, i.threshold, &e2e_spec)?))
        }),
        check("S1 average symbol error probability", 1e-5, &secondary, |i| {
            Ok((asep_scenario_a(i, &modulation)?.value * scale, asep_oracle(i, &modulation, &tight)?))
        }),
        check("best-relay selection cdf", 1e-5, &selection, |v| {
            Ok((cdf_scenario_b(v)? * scale, selection_oracle(v, v[0].threshold, &tight)?))
        }),
    ];
    checks.extend(special_function_checks(scale));
    SelfCheckReport { checks }
}

enum Solved {
    Source,
    Relay,
}

/// Re-evaluates the constraint at the solved power: it must reproduce the
/// target, unless the cap was returned with nonnegative slack.
fn solver_case(i: &PrimaryOutageInputs<f64>, scale: f64, which: Solved) -> Result<(f64, f64)> {
    let target = 0.5 * (primary_outage(i)? + relay_phase_outage(i)?);
    let cap = 100.0;
    let (p, at) = match which {
        Solved::Source => {
            let p = solve_secondary_source_power(i, target, cap)?;
            let mut j = *i;
            j.source1 = p;
            j.source2 = p;
            (p, primary_outage(&j)?)
        }
        Solved::Relay => {
            let p = solve_relay_power(i, target, cap)?;
            let mut j = *i;
            j.relay = p;
            (p, relay_phase_outage(&j)?)
        }
    };
    let at = at * scale;
    if p == cap && at <= target {
        Ok((target, target))
    } else {
        Ok((at, target))
    }
}

enum ConfiguredSecondary {
    A(SecondaryCdfInputs<f64>),
    B(Vec<SecondaryCdfInputs<f64>>),
}

fn configured_cases(cfg: &ExperimentConfig) -> Result<(PrimaryOutageInputs<f64>, ConfiguredSecondary)> {
    let net = cfg.network()?;
    let powers = PowerProfile::at_caps(
        cfg.primary.snr_db.linear(),
        cfg.secondary.max_source_snr_db.linear(),
        cfg.secondary.max_relay_snr_db.linear(),
    )?;
    let primary = PrimaryOutageInputs::from_scenario(&net, &powers, 0)?;
    let secondary = match net.scenario {
        Scenario::A => ConfiguredSecondary::A(SecondaryCdfInputs::from_scenario(&net, &powers, 0)?),
        Scenario::B => ConfiguredSecondary::B(
            (0..net.relay_count().min(MAX_ORACLE_RELAYS))
                .map(|k| SecondaryCdfInputs::from_scenario(&net, &powers, k))
                .collect::<Result<_>>()?,
        ),
    };
    Ok((primary, secondary))
}

fn special_function_checks(scale: f64) -> Vec<CheckResult> {
    let pole_sets = vec![
        vec![(0.5, 2), (1.7, 3)],
        vec![(0.2, 1), (3.0, 4), (9.0, 2)],
        vec![(2.0, 5), (2.5, 1)],
    ];
    let partial = check("partial-fraction reconstruction", 1e-9, &pole_sets, |ps| {
        let set = PoleSet::new(ps.iter().map(|&(location, multiplicity)| Pole { location, multiplicity }).collect())?;
        let terms = partial_fractions(&set)?;
        let mut worst: f64 = 0.0;
        let span = 3.0 * ps.iter().map(|p| p.0).fold(0.0, f64::max);
        for i in 0..50 {
            let x = span * i as f64 / 49.0;
            let sum: f64 = terms
                .iter()
                .map(|t| t.coefficient * (x + set.poles()[t.pole].location).powi(-(t.order as i32)))
                .sum();
            worst = worst.max(rel_err(sum * scale, set.evaluate(x)));
        }
        Ok((1.0 + worst, 1.0))
    });

    let spec = QuadratureSpec::with_relative_tolerance(1e-13);
    let gamma_cases = [(1u32, 0.3), (3, 2.5), (5, 12.0), (8, 0.7), (12, 30.0)];
    let incomplete = check("upper incomplete gamma, series vs integral", 1e-12, &gamma_cases, |&(n, x)| {
        let lg = ln_gamma(n as f64)?;
        let integral = integrate_semi_infinite(
            |t: f64| ((n as f64 - 1.0) * (x + t).ln() - (x + t) - lg).exp(),
            &[0.0, n as f64, 4.0 * n as f64],
            &spec,
        )?;
        Ok((upper_incomplete_gamma_int(n, x)? * scale, lg.exp() * integral.value))
    });

    let psi_cases = [(0.5, 0.5, 0.3), (1.5, 2.5, 4.0), (2.5, 1.0, 0.05), (0.5, 0.5, 40.0), (3.5, 4.5, 7.0)];
    let tricomi = check("Tricomi function vs defining integral", 1e-8, &psi_cases, |&(a, b, z)| {
        let lg = ln_gamma(a)?;
        let integral = integrate_semi_infinite(
            |t: f64| (-z * t + (a - 1.0) * t.ln() + (b - a - 1.0) * t.ln_1p() - lg).exp(),
            &tricomi_breaks(z),
            &spec,
        )?;
        Ok((tricomi_u(a, b, z)? * scale, integral.value))
    });
    vec![partial, incomplete, tricomi]
}

fn tricomi_breaks(z: f64) -> Vec<f64> {
    let mut b = vec![0.0, 1e-6, 1e-3, 0.1, 1.0, 1.0 / z, 10.0 / z];
    b.sort_by(f64::total_cmp);
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_functions_pass_and_perturbation_fails() {
        assert!(special_function_checks(1.0).iter().all(CheckResult::passed));
        assert!(special_function_checks(1.0 + 1e-4).iter().all(|c| !c.passed()));
    }

    #[test]
    #[ignore = "slow; covered by the acceptance target"]
    fn full_suite_passes() {
        let r = run_selfcheck(None, 0.0);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn report_format() {
        let r = CheckResult {
            name: "x".into(),
            worst: 1e-3,
            tolerance: 1e-6,
            detail: None,
        };
        assert!(r.to_string().starts_with("FAIL x"));
    }
}

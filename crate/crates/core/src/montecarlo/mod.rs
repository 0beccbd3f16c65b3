//! Seeded Monte Carlo simulation of the signal model.
//!
//! Trials are split into fixed-size chunks that are evaluated in parallel
//! and reduced in chunk order, so results are bit-identical for any thread
//! count.

mod rng;

pub use rng::{philox4x32, LinkStream};

use rayon::prelude::*;

use crate::analytic::{Metric, PrimaryOutageInputs};
use crate::error::{Error, Result};
use crate::model::{FadingLink, ModulationSpec, NetworkScenario, PowerProfile, Scenario};
use crate::num::Real;
use crate::specfun::erfc_scaled_q;

/// Default number of trials per estimate.
pub const DEFAULT_TRIALS: u64 = 100_000;
/// Smallest accepted trial count.
pub const MIN_TRIALS: u64 = 1_000;
const CHUNK: u64 = 4096;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Link identifiers used as the third counter word.
pub mod link_id {
    pub const PT_PX: u32 = 0;
    pub const S1_PX: u32 = 1;
    pub const S2_PX: u32 = 2;
    pub const PT_S1: u32 = 3;
    pub const PT_S2: u32 = 4;
    const RELAY_BASE: u32 = 8;
    pub const fn pt_r(k: usize) -> u32 {
        RELAY_BASE + 4 * k as u32
    }
    pub const fn s1_r(k: usize) -> u32 {
        RELAY_BASE + 4 * k as u32 + 1
    }
    pub const fn s2_r(k: usize) -> u32 {
        RELAY_BASE + 4 * k as u32 + 2
    }
    pub const fn r_px(k: usize) -> u32 {
        RELAY_BASE + 4 * k as u32 + 3
    }
}

/// Random source for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRng {
    pub seed: u64,
    pub trial: u64,
}

impl TrialRng {
    /// `|h|²` of `link` drawn from its Gamma law.
    pub fn gain<T: Real>(&self, link: &FadingLink<T>, id: u32) -> T {
        let mut s = LinkStream::new(self.seed, self.trial, id);
        T::of(s.gamma(link.m, link.mean_gain.to_f64_lossy() / link.m as f64))
    }
}

/// Squared envelopes of the links attached to one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayDraw<T> {
    pub pt_r: T,
    pub s1_r: T,
    pub s2_r: T,
    pub r_px: T,
}

/// One channel realization of the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw<T> {
    pub pt_px: T,
    pub s1_px: T,
    pub s2_px: T,
    pub pt_s1: T,
    pub pt_s2: T,
    pub relays: Vec<RelayDraw<T>>,
}

/// Draws every link gain of `scenario` for one trial.
pub fn draw_gains<T: Real>(scenario: &NetworkScenario<T>, rng: &TrialRng) -> TrialDraw<T> {
    TrialDraw {
        pt_px: rng.gain(&scenario.pt_px, link_id::PT_PX),
        s1_px: rng.gain(&scenario.s1_px, link_id::S1_PX),
        s2_px: rng.gain(&scenario.s2_px, link_id::S2_PX),
        pt_s1: rng.gain(&scenario.pt_s1, link_id::PT_S1),
        pt_s2: rng.gain(&scenario.pt_s2, link_id::PT_S2),
        relays: scenario
            .relays
            .iter()
            .enumerate()
            .map(|(k, r)| RelayDraw {
                pt_r: rng.gain(&r.pt_r, link_id::pt_r(k)),
                s1_r: rng.gain(&r.s1_r, link_id::s1_r(k)),
                s2_r: rng.gain(&r.s2_r, link_id::s2_r(k)),
                r_px: rng.gain(&r.r_px, link_id::r_px(k)),
            })
            .collect(),
    }
}

/// Which SINR a trial evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SinrKind {
    /// SINR of the amplify-and-forward signal model.
    #[default]
    Exact,
    /// Min-form upper bound whose cdf the closed forms give.
    Bounded,
}

/// Instantaneous SINR at the destination source of one direction.
///
/// `desired` is the hop carrying the far source to the relay, `local` the
/// relay → destination hop, `interference` the PT → destination gain (zero
/// when the sources see AWGN only).
#[derive(Debug, Clone, Copy)]
struct Direction<T> {
    desired: T,
    local: T,
    interference: T,
}

fn direction_sinr<T: Real>(d: Direction<T>, pt_r: T, powers: &PowerProfile<T>, kind: SinrKind) -> T {
    let (pp, ps, pr) = (powers.primary, powers.source, powers.relay);
    let one = T::one();
    let z = pp * d.interference;
    match kind {
        SinrKind::Exact => {
            // (Z+1) G⁻² + P_R W (P_PT Y' + 1), G⁻² = P_PT Y' + P_S W + P_S X + 1
            let inv_gain2 = pp * pt_r + ps * d.local + ps * d.desired + one;
            let den = (z + one) * inv_gain2 + pr * d.local * (pp * pt_r + one);
            pr * ps * d.desired * d.local / den
        }
        SinrKind::Bounded => {
            let y = pr * pp / ps * pt_r;
            let c0 = pr / ps + one;
            pr * (d.desired / (z + y + c0)).min(d.local / (z + one))
        }
    }
}

/// SINR at S1 for relay `k` of `draw`.
pub fn sinr_s1<T: Real>(
    draw: &TrialDraw<T>,
    powers: &PowerProfile<T>,
    scenario: Scenario,
    k: usize,
    kind: SinrKind,
) -> T {
    let r = &draw.relays[k];
    let interference = if scenario == Scenario::A { draw.pt_s1 } else { T::zero() };
    let d = Direction {
        desired: r.s2_r,
        local: r.s1_r,
        interference,
    };
    direction_sinr(d, r.pt_r, powers, kind)
}

/// SINR at S2 for relay `k` of `draw`.
pub fn sinr_s2<T: Real>(
    draw: &TrialDraw<T>,
    powers: &PowerProfile<T>,
    scenario: Scenario,
    k: usize,
    kind: SinrKind,
) -> T {
    let r = &draw.relays[k];
    let interference = if scenario == Scenario::A { draw.pt_s2 } else { T::zero() };
    let d = Direction {
        desired: r.s1_r,
        local: r.s2_r,
        interference,
    };
    direction_sinr(d, r.pt_r, powers, kind)
}

/// Exact SINR at S1 in scenario A.
pub fn exact_sinr_s1<T: Real>(draw: &TrialDraw<T>, powers: &PowerProfile<T>) -> T {
    sinr_s1(draw, powers, Scenario::A, 0, SinrKind::Exact)
}

/// Bounded SINR at S1 in scenario A.
pub fn bounded_sinr_s1<T: Real>(draw: &TrialDraw<T>, powers: &PowerProfile<T>) -> T {
    sinr_s1(draw, powers, Scenario::A, 0, SinrKind::Bounded)
}

/// End-to-end SINR: `min(γ_S1, γ_S2)` maximized over the relays.
pub fn e2e_sinr<T: Real>(
    draw: &TrialDraw<T>,
    powers: &PowerProfile<T>,
    scenario: Scenario,
    kind: SinrKind,
) -> T {
    (0..draw.relays.len())
        .map(|k| sinr_s1(draw, powers, scenario, k, kind).min(sinr_s2(draw, powers, scenario, k, kind)))
        .fold(T::neg_infinity(), T::max)
}

/// SINR selected by `metric`.
pub fn metric_sinr<T: Real>(
    draw: &TrialDraw<T>,
    powers: &PowerProfile<T>,
    scenario: Scenario,
    kind: SinrKind,
    metric: Metric,
) -> T {
    match metric {
        Metric::EndToEnd => e2e_sinr(draw, powers, scenario, kind),
        Metric::SourceOne => sinr_s1(draw, powers, scenario, 0, kind),
    }
}

/// Monte Carlo point estimate with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub trials: u64,
    pub ci_half_width: f64,
    pub seed: u64,
}

impl Estimate {
    /// Standard error implied by the interval.
    pub fn standard_error(&self) -> f64 {
        self.ci_half_width / Z95
    }
}

/// Trial budget and stream selection for an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSpec {
    pub trials: u64,
    pub seed: u64,
    pub sinr: SinrKind,
    pub metric: Metric,
}

impl SimulationSpec {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            sinr: SinrKind::Exact,
            metric: Metric::EndToEnd,
        }
    }

    pub fn with_sinr(mut self, sinr: SinrKind) -> Self {
        self.sinr = sinr;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Domain(format!(
                "at least {MIN_TRIALS} trials are required, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// Mean and 95% half-width of `f(trial)` over `trials` trials.
fn mean_over_trials<F>(trials: u64, seed: u64, f: F) -> Estimate
where
    F: Fn(u64) -> f64 + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut s, mut s2) = (0.0, 0.0);
            for t in (c * CHUNK)..((c + 1) * CHUNK).min(trials) {
                let x = f(t);
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect();
    let (mut s, mut s2) = (0.0, 0.0);
    for (a, b) in partial {
        s += a;
        s2 += b;
    }
    let n = trials as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Estimate {
        value: mean,
        trials,
        ci_half_width: Z95 * (var / n).sqrt(),
        seed,
    }
}

/// Fraction of trials whose SINR falls below `threshold`.
pub fn estimate_outage<T: Real>(
    scenario: &NetworkScenario<T>,
    powers: &PowerProfile<T>,
    threshold: T,
    spec: &SimulationSpec,
) -> Result<Estimate> {
    Ok(estimate_outage_curve(scenario, powers, &[threshold], spec)?.remove(0))
}

/// Outage estimates at several thresholds from the same trials.
pub fn estimate_outage_curve<T: Real>(
    scenario: &NetworkScenario<T>,
    powers: &PowerProfile<T>,
    thresholds: &[T],
    spec: &SimulationSpec,
) -> Result<Vec<Estimate>> {
    scenario.validate()?;
    powers.validate()?;
    spec.validate()?;
    let sinrs: Vec<Vec<T>> = sinr_samples(scenario, powers, spec);
    Ok(thresholds
        .iter()
        .map(|&th| {
            mean_over_trials(spec.trials, spec.seed, |t| {
                let (c, o) = ((t / CHUNK) as usize, (t % CHUNK) as usize);
                if sinrs[c][o] < th {
                    1.0
                } else {
                    0.0
                }
            })
        })
        .collect())
}

fn sinr_samples<T: Real>(
    scenario: &NetworkScenario<T>,
    powers: &PowerProfile<T>,
    spec: &SimulationSpec,
) -> Vec<Vec<T>> {
    let chunks = spec.trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            ((c * CHUNK)..((c + 1) * CHUNK).min(spec.trials))
                .map(|trial| {
                    let draw = draw_gains(scenario, &TrialRng { seed: spec.seed, trial });
                    metric_sinr(&draw, powers, scenario.scenario, spec.sinr, spec.metric)
                })
                .collect()
        })
        .collect()
}

/// Mean conditional SEP `a · (1/2) erfc(√(bγ))` over the trials.
pub fn estimate_asep<T: Real>(
    scenario: &NetworkScenario<T>,
    powers: &PowerProfile<T>,
    modulation: &ModulationSpec<T>,
    spec: &SimulationSpec,
) -> Result<Estimate> {
    scenario.validate()?;
    powers.validate()?;
    spec.validate()?;
    let (a, b) = (modulation.a, modulation.b);
    erfc_scaled_q(b, T::zero())?;
    Ok(mean_over_trials(spec.trials, spec.seed, |trial| {
        let draw = draw_gains(scenario, &TrialRng { seed: spec.seed, trial });
        let g = metric_sinr(&draw, powers, scenario.scenario, spec.sinr, spec.metric);
        (a * erfc_scaled_q(b, g).expect("validated kernel arguments")).to_f64_lossy()
    }))
}

/// Simulated primary outage with both sources transmitting.
pub fn estimate_primary_outage<T: Real>(
    inputs: &PrimaryOutageInputs<T>,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    inputs.validate()?;
    SimulationSpec::new(trials, seed).validate()?;
    Ok(mean_over_trials(trials, seed, |trial| {
        let rng = TrialRng { seed, trial };
        let e = rng.gain(&inputs.e, link_id::PT_PX);
        let f = rng.gain(&inputs.f, link_id::S1_PX);
        let g = rng.gain(&inputs.g, link_id::S2_PX);
        let sinr = inputs.primary * e / (inputs.source1 * f + inputs.source2 * g + T::one());
        if sinr < inputs.threshold {
            1.0
        } else {
            0.0
        }
    }))
}

/// Simulated primary outage during the relay broadcast phase.
pub fn estimate_relay_phase_outage<T: Real>(
    inputs: &PrimaryOutageInputs<T>,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    inputs.validate()?;
    SimulationSpec::new(trials, seed).validate()?;
    Ok(mean_over_trials(trials, seed, |trial| {
        let rng = TrialRng { seed, trial };
        let e = rng.gain(&inputs.e, link_id::PT_PX);
        let l = rng.gain(&inputs.l, link_id::r_px(0));
        let sinr = inputs.primary * e / (inputs.relay * l + T::one());
        if sinr < inputs.threshold {
            1.0
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelayLinks;

    fn network(scenario: Scenario, relays: usize) -> NetworkScenario<f64> {
        let l = FadingLink::new(2, 1.0).unwrap();
        NetworkScenario {
            scenario,
            primary_rate: 1.0,
            secondary_threshold: 2.0,
            pt_px: l,
            s1_px: l,
            s2_px: l,
            pt_s1: l,
            pt_s2: l,
            relays: vec![
                RelayLinks {
                    pt_r: l,
                    s1_r: l,
                    s2_r: l,
                    r_px: l
                };
                relays
            ],
        }
    }

    fn powers() -> PowerProfile<f64> {
        PowerProfile::at_caps(10.0, 10.0, 10.0).unwrap()
    }

    #[test]
    fn unit_gain_exact_sinr() {
        let d = TrialDraw {
            pt_px: 1.0,
            s1_px: 1.0,
            s2_px: 1.0,
            pt_s1: 1.0,
            pt_s2: 1.0,
            relays: vec![RelayDraw {
                pt_r: 1.0,
                s1_r: 1.0,
                s2_r: 1.0,
                r_px: 1.0,
            }],
        };
        // 10·10 / (11·31 + 10·11) = 100 / 451
        assert!((exact_sinr_s1(&d, &powers()) - 100.0 / 451.0).abs() < 1e-15);
        // 10 · min(1/(10+10+2), 1/11) = 10/22
        assert!((bounded_sinr_s1(&d, &powers()) - 10.0 / 22.0).abs() < 1e-15);
    }

    #[test]
    fn bound_dominates_exact_per_draw() {
        for scenario in [Scenario::A, Scenario::B] {
            let net = network(scenario, 2);
            for trial in 0..20_000 {
                let d = draw_gains(&net, &TrialRng { seed: 5, trial });
                for k in 0..2 {
                    for f in [sinr_s1::<f64>, sinr_s2::<f64>] {
                        let ex = f(&d, &powers(), scenario, k, SinrKind::Exact);
                        let bd = f(&d, &powers(), scenario, k, SinrKind::Bounded);
                        assert!(bd >= ex * (1.0 - 1e-14));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_threshold_gives_zero_outage() {
        let spec = SimulationSpec::new(2000, 1);
        let e = estimate_outage(&network(Scenario::A, 1), &powers(), 0.0, &spec).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.ci_half_width, 0.0);
        let e = estimate_outage(&network(Scenario::A, 1), &powers(), 1e300, &spec).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn estimates_are_deterministic() {
        let spec = SimulationSpec::new(10_000, 42);
        let a = estimate_outage(&network(Scenario::B, 3), &powers(), 2.0, &spec).unwrap();
        let b = estimate_outage(&network(Scenario::B, 3), &powers(), 2.0, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_tiny_trial_counts() {
        let spec = SimulationSpec::new(10, 42);
        assert!(estimate_outage(&network(Scenario::A, 1), &powers(), 2.0, &spec).is_err());
    }
}

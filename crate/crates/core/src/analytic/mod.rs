//! Closed-form outage, SINR-cdf and ASEP expressions.
//!
//! Every finite sum is assembled term by term in the log domain and summed
//! with compensation. Survival probabilities are computed first and the cdf
//! is formed as their complement.

mod asep;
mod polyexp;
mod primary;
mod scenario_a;
mod scenario_b;

pub use asep::{
    asep_scenario_a, asep_scenario_a_closed_form, asep_scenario_a_decoupled, AsepEvaluation, AsepPath,
    ClosedFormAsep, FallbackReason,
};
pub use primary::{
    primary_outage, relay_phase_outage, solve_relay_power, solve_secondary_source_power,
};
pub use scenario_a::{
    cdf_scenario_a, cdf_scenario_a_decoupled, cdf_scenario_a_e2e, cdf_scenario_a_e2e_decoupled,
    upsilon_pair,
};
pub use scenario_b::{cdf_scenario_b, relay_survival_scenario_b, MAX_RELAYS};

use crate::error::{Error, Result};
use crate::model::{FadingLink, NetworkScenario, PowerProfile, Scenario};
use crate::num::{CompensatedSum, Real};
use crate::specfun::LnFactorials;

/// Inputs of the primary-network outage expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryOutageInputs<T> {
    /// PT → PX.
    pub e: FadingLink<T>,
    /// S1 → PX.
    pub f: FadingLink<T>,
    /// S2 → PX.
    pub g: FadingLink<T>,
    /// Relay → PX.
    pub l: FadingLink<T>,
    pub primary: T,
    pub source1: T,
    pub source2: T,
    pub relay: T,
    /// Primary SINR threshold `γ_th`.
    pub threshold: T,
}

impl<T: Real> PrimaryOutageInputs<T> {
    /// Inputs for relay `k` of `scenario` at the given powers.
    pub fn from_scenario(
        scenario: &NetworkScenario<T>,
        powers: &PowerProfile<T>,
        k: usize,
    ) -> Result<Self> {
        let relay = scenario
            .relays
            .get(k)
            .ok_or_else(|| Error::InvalidModel(format!("no relay with index {k}")))?;
        Ok(Self {
            e: scenario.pt_px,
            f: scenario.s1_px,
            g: scenario.s2_px,
            l: relay.r_px,
            primary: powers.primary,
            source1: powers.source,
            source2: powers.source,
            relay: powers.relay,
            threshold: scenario.primary_threshold(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for l in [&self.e, &self.f, &self.g, &self.l] {
            l.validate()?;
        }
        if !(self.primary > T::zero()) || !self.primary.is_finite() {
            return Err(Error::InvalidModel("primary power must be positive".into()));
        }
        for (name, v) in [
            ("source1", self.source1),
            ("source2", self.source2),
            ("relay", self.relay),
            ("threshold", self.threshold),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Inputs of the secondary SINR cdf for one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondaryCdfInputs<T> {
    /// Relay ↔ S2.
    pub x: FadingLink<T>,
    /// Relay ↔ S1.
    pub w: FadingLink<T>,
    /// PT → relay.
    pub y: FadingLink<T>,
    /// PT → S1.
    pub z: FadingLink<T>,
    /// PT → S2.
    pub v: FadingLink<T>,
    pub primary: T,
    pub source: T,
    pub relay: T,
    /// Secondary SINR threshold `Θ`.
    pub threshold: T,
}

impl<T: Real> SecondaryCdfInputs<T> {
    pub fn from_scenario(
        scenario: &NetworkScenario<T>,
        powers: &PowerProfile<T>,
        k: usize,
    ) -> Result<Self> {
        let relay = scenario
            .relays
            .get(k)
            .ok_or_else(|| Error::InvalidModel(format!("no relay with index {k}")))?;
        Ok(Self {
            x: relay.s2_r,
            w: relay.s1_r,
            y: relay.pt_r,
            z: scenario.pt_s1,
            v: scenario.pt_s2,
            primary: powers.primary,
            source: powers.source,
            relay: powers.relay,
            threshold: scenario.secondary_threshold,
        })
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.threshold = threshold;
        self
    }

    /// Same network seen from the other source: `x ↔ w`, `z ↔ v`.
    pub fn swapped(mut self) -> Self {
        std::mem::swap(&mut self.x, &mut self.w);
        std::mem::swap(&mut self.z, &mut self.v);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for l in [&self.x, &self.w, &self.y, &self.z, &self.v] {
            l.validate()?;
        }
        for (name, v) in [("primary", self.primary), ("source", self.source)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} power must be positive, got {v}")));
            }
        }
        if !(self.relay >= T::zero()) || !self.relay.is_finite() {
            return Err(Error::InvalidModel("relay power must be >= 0".into()));
        }
        if !(self.threshold >= T::zero()) || self.threshold.is_nan() {
            return Err(Error::InvalidModel("secondary threshold must be >= 0".into()));
        }
        Ok(())
    }

    /// `γ̄_R / γ̄_S`.
    pub(crate) fn power_ratio(&self) -> T {
        self.relay / self.source
    }

    /// Gamma law of `Y = (γ̄_R γ̄_P / γ̄_S) |h_y|²`.
    pub(crate) fn law_y(&self) -> GammaLaw<T> {
        GammaLaw::scaled(&self.y, self.relay * self.primary / self.source)
    }

    /// Gamma law of `Z = γ̄_P |h_z|²`.
    pub(crate) fn law_z(&self) -> GammaLaw<T> {
        GammaLaw::scaled(&self.z, self.primary)
    }

    /// Gamma law of `V = γ̄_P |h_v|²`.
    pub(crate) fn law_v(&self) -> GammaLaw<T> {
        GammaLaw::scaled(&self.v, self.primary)
    }

    /// Saturation cases shared by all cdfs: `Some(F)` when the answer is trivial.
    pub(crate) fn trivial_cdf(&self) -> Option<T> {
        if self.threshold == T::zero() {
            Some(T::zero())
        } else if self.threshold.is_infinite() || self.relay == T::zero() {
            Some(T::one())
        } else {
            None
        }
    }
}

/// Which secondary outage event the dispatcher evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    /// `min(γ_S1, γ_S2)` (scenario A) or the selected relay (scenario B).
    #[default]
    EndToEnd,
    /// `γ_S1` alone (scenario A).
    SourceOne,
}

/// Outage capacity lower bound: the cdf of the bounded SINR at `threshold`.
pub fn outage_capacity<T: Real>(
    scenario: &NetworkScenario<T>,
    powers: &PowerProfile<T>,
    threshold: T,
    metric: Metric,
) -> Result<T> {
    scenario.validate()?;
    match scenario.scenario {
        Scenario::A => {
            let inputs = SecondaryCdfInputs::from_scenario(scenario, powers, 0)?.with_threshold(threshold);
            match metric {
                Metric::EndToEnd => cdf_scenario_a_e2e(&inputs),
                Metric::SourceOne => cdf_scenario_a(&inputs),
            }
        }
        Scenario::B => {
            let per_relay = (0..scenario.relay_count())
                .map(|k| {
                    SecondaryCdfInputs::from_scenario(scenario, powers, k)
                        .map(|i| i.with_threshold(threshold))
                })
                .collect::<Result<Vec<_>>>()?;
            cdf_scenario_b(&per_relay)
        }
    }
}

/// Gamma law with integer shape and rate, `f(t) ∝ t^{m-1} e^{-rate t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GammaLaw<T> {
    pub shape: usize,
    pub rate: T,
}

impl<T: Real> GammaLaw<T> {
    /// Law of `scale · |h|²` for a fading link.
    pub fn scaled(link: &FadingLink<T>, scale: T) -> Self {
        Self {
            shape: link.m as usize,
            rate: link.rate() / scale,
        }
    }

    /// `ln E[U^j e^{-sU}] = ln Γ(m+j)/Γ(m) + m ln λ - (m+j) ln(λ+s)`.
    #[inline]
    pub fn ln_moment(&self, j: usize, s: T, lf: &LnFactorials<T>) -> T {
        let m = self.shape;
        lf.ln_rising(m, j) + T::of_usize(m) * self.rate.ln()
            - T::of_usize(m + j) * (self.rate + s).ln()
    }
}

/// Accumulates positive terms given by their logarithms.
#[derive(Debug, Clone, Default)]
pub(crate) struct LogSum<T> {
    terms: Vec<T>,
}

impl<T: Real> LogSum<T> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, ln_term: T) {
        if ln_term > T::neg_infinity() {
            self.terms.push(ln_term);
        }
    }

    /// `ln Σ exp(terms)`; `-∞` for an empty sum.
    pub fn ln_value(&self) -> T {
        let max = self.terms.iter().copied().fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            return max;
        }
        let s: CompensatedSum<T> = self.terms.iter().map(|&t| (t - max).exp()).collect();
        max + s.value().ln()
    }

    pub fn value(&self) -> T {
        self.ln_value().exp()
    }
}

/// Admissible rounding excess before a probability is reported unstable.
pub(crate) const CLAMP_TOLERANCE: f64 = 1e-12;

/// Clamps `p` into `[0, 1]` when it leaves the interval by rounding only.
pub(crate) fn clamp_probability<T: Real>(p: T, context: &'static str) -> Result<T> {
    let tol = T::of(CLAMP_TOLERANCE).max(T::epsilon() * T::of(16.0));
    if p.is_nan() || p < -tol || p > T::one() + tol {
        return Err(Error::NumericalInstability {
            context,
            value: p.to_f64_lossy(),
        });
    }
    Ok(p.max(T::zero()).min(T::one()))
}

/// `1 - S` for a survival probability `S`, with the clamp check.
pub(crate) fn complement<T: Real>(survival: T, context: &'static str) -> Result<T> {
    clamp_probability(T::one() - clamp_probability(survival, context)?, context)
}

/// Size of the log-factorial table the closed forms need for the given links.
pub(crate) fn factorial_table<T: Real>(links: &[&FadingLink<T>]) -> LnFactorials<T> {
    let total: usize = links.iter().map(|l| l.m as usize).sum();
    LnFactorials::new(4 * total + 8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_kernel_matches_exponential_case() {
        let lf = LnFactorials::<f64>::new(16);
        let law = GammaLaw { shape: 1, rate: 2.0 };
        // E[U e^{-U}] with U ~ Exp(2): 2 / 3²
        assert!((law.ln_moment(1, 1.0, &lf).exp() - 2.0 / 9.0).abs() < 1e-15);
        assert!((law.ln_moment(0, 0.0, &lf).exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_sum_handles_underflow() {
        let mut s = LogSum::<f64>::new();
        s.push(-1000.0);
        s.push(-1000.0);
        assert!((s.ln_value() - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(LogSum::<f64>::new().value(), 0.0);
    }

    #[test]
    fn clamp_rejects_large_excess() {
        assert_eq!(clamp_probability(1.0 + 1e-14, "t").unwrap(), 1.0);
        assert_eq!(clamp_probability(-1e-14, "t").unwrap(), 0.0);
        assert!(clamp_probability(1.0 + 1e-9, "t").is_err());
        assert!(clamp_probability(f64::NAN, "t").is_err());
    }
}

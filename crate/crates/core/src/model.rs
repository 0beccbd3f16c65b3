//! Network description shared by the closed forms and the simulator.
//!
//! Powers are transmit SNRs with the noise floor normalized to one; link
//! gains are the mean `E|h|²` of Gamma-distributed squared envelopes.

use crate::error::{Error, Result};
use crate::num::Real;

/// One Nakagami-m link: `|h|² ~ Gamma(m, mean_gain / m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingLink<T> {
    pub m: u32,
    pub mean_gain: T,
}

impl<T: Real> FadingLink<T> {
    pub fn new(m: u32, mean_gain: T) -> Result<Self> {
        let link = Self { m, mean_gain };
        link.validate()?;
        Ok(link)
    }

    /// Rayleigh link (`m = 1`).
    pub fn rayleigh(mean_gain: T) -> Result<Self> {
        Self::new(1, mean_gain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidModel("fading severity m must be >= 1".into()));
        }
        if !(self.mean_gain > T::zero()) || !self.mean_gain.is_finite() {
            return Err(Error::InvalidModel(format!(
                "mean gain must be positive and finite, got {}",
                self.mean_gain
            )));
        }
        Ok(())
    }

    /// Rate parameter `m / mean_gain` of the Gamma law.
    #[inline]
    pub fn rate(&self) -> T {
        T::of(self.m as f64) / self.mean_gain
    }
}

/// Links attached to one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayLinks<T> {
    /// PT → relay interference.
    pub pt_r: FadingLink<T>,
    /// S1 ↔ relay.
    pub s1_r: FadingLink<T>,
    /// S2 ↔ relay.
    pub s2_r: FadingLink<T>,
    /// Relay → PX interference.
    pub r_px: FadingLink<T>,
}

impl<T: Real> RelayLinks<T> {
    fn validate(&self) -> Result<()> {
        for l in [&self.pt_r, &self.s1_r, &self.s2_r, &self.r_px] {
            l.validate()?;
        }
        Ok(())
    }
}

/// Transmit SNRs and their caps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile<T> {
    /// Primary transmitter SNR `γ̄_P`.
    pub primary: T,
    /// Secondary source SNR `γ̄_S`, shared by both sources.
    pub source: T,
    /// Relay SNR `γ̄_R`.
    pub relay: T,
    pub max_source: T,
    pub max_relay: T,
}

impl<T: Real> PowerProfile<T> {
    /// Profile with the sources and relay transmitting at their caps.
    pub fn at_caps(primary: T, max_source: T, max_relay: T) -> Result<Self> {
        let p = Self {
            primary,
            source: max_source,
            relay: max_relay,
            max_source,
            max_relay,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("primary", self.primary),
            ("source", self.source),
            ("relay", self.relay),
            ("max_source", self.max_source),
            ("max_relay", self.max_relay),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} power must be positive, got {v}")));
            }
        }
        if self.source > self.max_source || self.relay > self.max_relay {
            return Err(Error::InvalidModel("transmit power exceeds its cap".into()));
        }
        Ok(())
    }

    pub fn with_secondary(mut self, source: T, relay: T) -> Result<Self> {
        self.source = source;
        self.relay = relay;
        self.validate()?;
        Ok(self)
    }
}

/// Whether the PT also interferes at the secondary sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Single relay; the sources see PT interference.
    A,
    /// Best-relay selection over `K` relays; the sources see AWGN only.
    B,
}

/// Complete topology and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario<T> {
    pub scenario: Scenario,
    /// Primary rate `R_P` in bits/s/Hz.
    pub primary_rate: T,
    /// Secondary SINR threshold `Θ` (linear).
    pub secondary_threshold: T,
    pub pt_px: FadingLink<T>,
    pub s1_px: FadingLink<T>,
    pub s2_px: FadingLink<T>,
    /// PT → S1 interference (scenario A only).
    pub pt_s1: FadingLink<T>,
    /// PT → S2 interference (scenario A only).
    pub pt_s2: FadingLink<T>,
    pub relays: Vec<RelayLinks<T>>,
}

impl<T: Real> NetworkScenario<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.primary_rate > T::zero()) || !self.primary_rate.is_finite() {
            return Err(Error::InvalidModel("primary rate must be positive".into()));
        }
        if !(self.secondary_threshold > T::zero()) || !self.secondary_threshold.is_finite() {
            return Err(Error::InvalidModel("secondary threshold must be positive".into()));
        }
        for l in [&self.pt_px, &self.s1_px, &self.s2_px, &self.pt_s1, &self.pt_s2] {
            l.validate()?;
        }
        if self.relays.is_empty() {
            return Err(Error::InvalidModel("at least one relay is required".into()));
        }
        if self.scenario == Scenario::A && self.relays.len() != 1 {
            return Err(Error::InvalidModel(format!(
                "scenario A has exactly one relay, got {}",
                self.relays.len()
            )));
        }
        for r in &self.relays {
            r.validate()?;
        }
        Ok(())
    }

    pub fn relay_count(&self) -> usize {
        self.relays.len()
    }

    /// Primary SINR threshold `2^{R_P} - 1`.
    pub fn primary_threshold(&self) -> T {
        primary_threshold(self.primary_rate)
    }

    /// Copy restricted to the first `k` relays.
    pub fn with_relay_count(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.relays.len() {
            return Err(Error::InvalidModel(format!(
                "relay count {k} outside 1..={}",
                self.relays.len()
            )));
        }
        let mut out = self.clone();
        out.relays.truncate(k);
        Ok(out)
    }
}

/// `2^{rate} - 1`.
pub fn primary_threshold<T: Real>(rate: T) -> T {
    (rate * T::LN_2()).exp_m1()
}

/// MPSK conditional SEP constants `(a, b)` with `SEP(γ) ≈ a/2 erfc(√(bγ))`.
pub fn mpsk_constants<T: Real>(order: u32) -> Result<(T, T)> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::InvalidModel(format!(
            "MPSK order must be a power of two >= 2, got {order}"
        )));
    }
    if order == 2 {
        return Ok((T::one(), T::one()));
    }
    let s = (T::PI() / T::of(order as f64)).sin();
    Ok((T::of(2.0), s * s))
}

/// Modulation constants for the conditional SEP kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec<T> {
    pub order: u32,
    pub a: T,
    pub b: T,
}

impl<T: Real> ModulationSpec<T> {
    pub fn mpsk(order: u32) -> Result<Self> {
        let (a, b) = mpsk_constants(order)?;
        Ok(Self { order, a, b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primary_threshold_values() {
        assert_eq!(primary_threshold(1.0f64), 1.0);
        assert_eq!(primary_threshold(2.0f64), 3.0);
        assert!((primary_threshold(0.5f64) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn mpsk_values() {
        assert_eq!(mpsk_constants::<f64>(2).unwrap(), (1.0, 1.0));
        let (a, b) = mpsk_constants::<f64>(4).unwrap();
        assert_eq!(a, 2.0);
        assert!((b - 0.5).abs() < 1e-15);
        let (_, b8) = mpsk_constants::<f64>(8).unwrap();
        assert!((b8 - (std::f64::consts::PI / 8.0).sin().powi(2)).abs() < 1e-15);
        assert!(mpsk_constants::<f64>(6).is_err());
        assert!(mpsk_constants::<f64>(1).is_err());
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(FadingLink::new(0, 1.0f64).is_err());
        assert!(FadingLink::new(1, 0.0f64).is_err());
        assert!(FadingLink::new(1, -2.0f64).is_err());
        assert!(PowerProfile::at_caps(0.0f64, 1.0, 1.0).is_err());
        assert!(PowerProfile::at_caps(1.0f64, 1.0, 1.0)
            .unwrap()
            .with_secondary(2.0, 1.0)
            .is_err());
    }
}

//! Experiment configuration files.
//!
//! The file is TOML. Every SNR and threshold is written in dB and converted
//! to linear scale here, so nothing downstream sees dB values. Unknown keys
//! are rejected and every error carries the line it refers to.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::analytic::Metric;
use crate::error::{Error, Result};
use crate::model::{FadingLink, ModulationSpec, NetworkScenario, RelayLinks, Scenario};
use crate::montecarlo::{SinrKind, DEFAULT_TRIALS};
use crate::num::db_to_linear;

/// Default secondary SINR threshold `γ_th` in dB.
pub const DEFAULT_THRESHOLD_DB: f64 = 3.0;
/// Default MPSK order.
pub const DEFAULT_MODULATION: u32 = 4;
/// Default Monte Carlo seed.
pub const DEFAULT_SEED: u64 = 1;

/// Strictly positive finite number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Positive(f64);

impl TryFrom<f64> for Positive {
    type Error = String;

    fn try_from(v: f64) -> std::result::Result<Self, String> {
        if v > 0.0 && v.is_finite() {
            Ok(Self(v))
        } else {
            Err(format!("expected a positive finite number, got {v}"))
        }
    }
}

impl From<Positive> for f64 {
    fn from(v: Positive) -> f64 {
        v.0
    }
}

impl Positive {
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl TryFrom<f64> for Probability {
    type Error = String;

    fn try_from(v: f64) -> std::result::Result<Self, String> {
        if (0.0..=1.0).contains(&v) {
            Ok(Self(v))
        } else {
            Err(format!("expected a probability in [0, 1], got {v}"))
        }
    }
}

impl From<Probability> for f64 {
    fn from(v: Probability) -> f64 {
        v.0
    }
}

impl Probability {
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Nakagami severity `m >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Severity(u32);

impl TryFrom<u32> for Severity {
    type Error = String;

    fn try_from(v: u32) -> std::result::Result<Self, String> {
        if v >= 1 {
            Ok(Self(v))
        } else {
            Err("fading severity m must be >= 1".into())
        }
    }
}

impl From<Severity> for u32 {
    fn from(v: Severity) -> u32 {
        v.0
    }
}

/// Finite dB value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Decibels(f64);

impl TryFrom<f64> for Decibels {
    type Error = String;

    fn try_from(v: f64) -> std::result::Result<Self, String> {
        if v.is_finite() {
            Ok(Self(v))
        } else {
            Err(format!("expected a finite dB value, got {v}"))
        }
    }
}

impl From<Decibels> for f64 {
    fn from(v: Decibels) -> f64 {
        v.0
    }
}

impl Decibels {
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn linear(self) -> f64 {
        db_to_linear(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    #[default]
    E2e,
    S1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XAxis {
    /// Sweep `γ̄_P`; the secondary caps stay fixed.
    PrimarySnrDb,
    /// Sweep both secondary caps together; `γ̄_P` stays fixed.
    SecondarySnrDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McSinr {
    #[default]
    Exact,
    Bounded,
}

impl From<McSinr> for SinrKind {
    fn from(v: McSinr) -> Self {
        match v {
            McSinr::Exact => SinrKind::Exact,
            McSinr::Bounded => SinrKind::Bounded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimarySection {
    /// Target rate `R_P` in bits/s/Hz.
    pub rate: Positive,
    pub snr_db: Decibels,
}

fn default_threshold_db() -> Decibels {
    Decibels(DEFAULT_THRESHOLD_DB)
}

fn default_modulation() -> Spanned<u32> {
    Spanned::new(0..0, DEFAULT_MODULATION)
}

fn default_metric() -> Spanned<MetricName> {
    Spanned::new(0..0, MetricName::E2e)
}

fn default_relays() -> Spanned<u32> {
    Spanned::new(0..0, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondarySection {
    pub scenario: Spanned<ScenarioName>,
    #[serde(default = "default_relays")]
    pub relays: Spanned<u32>,
    /// Secondary SINR threshold `γ_th`.
    #[serde(default = "default_threshold_db")]
    pub threshold_db: Decibels,
    pub max_source_snr_db: Decibels,
    pub max_relay_snr_db: Decibels,
    #[serde(default = "default_modulation")]
    pub modulation: Spanned<u32>,
    #[serde(default = "default_metric")]
    pub metric: Spanned<MetricName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub m: Severity,
    pub mean_gain: Positive,
}

impl LinkSection {
    fn link(&self) -> FadingLink<f64> {
        FadingLink {
            m: self.m.0,
            mean_gain: self.mean_gain.0,
        }
    }
}

/// Network-wide links plus the default shared by every unlisted link.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pt_px: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1_px: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2_px: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pt_s1: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pt_s2: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pt_r: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1_r: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2_r: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_px: Option<LinkSection>,
}

/// Links attached to one relay; unset entries fall back to `[links]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pt_r: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1_r: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2_r: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_px: Option<LinkSection>,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub x_axis: XAxis,
    pub start_db: Spanned<Decibels>,
    pub stop_db: Decibels,
    pub step_db: Positive,
    /// Primary outage constraints `P^Thr`.
    pub thresholds: Vec<Probability>,
    /// Relay counts; defaults to `[secondary] relays`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relays: Option<Spanned<Vec<u32>>>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub mc_sinr: McSinr,
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub primary: PrimarySection,
    pub secondary: SecondarySection,
    #[serde(default)]
    pub links: LinksSection,
    /// Per-relay overrides keyed by the 1-based relay index.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relay: BTreeMap<Spanned<String>, RelaySection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, SweepSection>,
}

/// Sweep with every quantity resolved to linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub name: String,
    pub x_axis: XAxis,
    /// Grid abscissae in dB.
    pub grid_db: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub relay_counts: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub sinr: SinrKind,
}

/// Position of an error inside the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)
    }
}

fn line_of(source: &str, offset: usize) -> Location {
    let offset = offset.min(source.len());
    Location {
        line: source[..offset].bytes().filter(|&b| b == b'\n').count() + 1,
    }
}

fn config_error(source: &str, span: std::ops::Range<usize>, msg: impl fmt::Display) -> Error {
    if span.is_empty() && span.start == 0 {
        Error::Config(msg.to_string())
    } else {
        Error::Config(format!("{}: {msg}", line_of(source, span.start)))
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(source: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(source).map_err(|e| {
            let msg = e.message().to_string();
            match e.span() {
                Some(span) => config_error(source, span, msg),
                None => Error::Config(msg),
            }
        })?;
        cfg.check(source)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn check(&self, source: &str) -> Result<()> {
        let s = &self.secondary;
        let relays = *s.relays.get_ref();
        if relays == 0 {
            return Err(config_error(source, s.relays.span(), "at least one relay is required"));
        }
        if *s.scenario.get_ref() == ScenarioName::A && relays != 1 {
            return Err(config_error(source, s.relays.span(), "scenario a has exactly one relay"));
        }
        if relays as usize > crate::analytic::MAX_RELAYS {
            return Err(config_error(
                source,
                s.relays.span(),
                format!("at most {} relays are supported", crate::analytic::MAX_RELAYS),
            ));
        }
        ModulationSpec::<f64>::mpsk(*s.modulation.get_ref())
            .map_err(|e| config_error(source, s.modulation.span(), e))?;
        if *s.scenario.get_ref() == ScenarioName::B && *s.metric.get_ref() == MetricName::S1 {
            return Err(config_error(source, s.metric.span(), "metric s1 applies to scenario a only"));
        }
        for key in self.relay.keys() {
            let ok = key.get_ref().parse::<u32>().is_ok_and(|k| k >= 1 && k <= relays);
            if !ok {
                return Err(config_error(
                    source,
                    key.span(),
                    format!("relay override `{}` is not an index in 1..={relays}", key.get_ref()),
                ));
            }
        }
        for (name, sw) in &self.sweep {
            if let Some(list) = &sw.relays {
                for &k in list.get_ref() {
                    if k == 0 || k > relays {
                        return Err(config_error(
                            source,
                            list.span(),
                            format!("sweep `{name}`: relay count {k} outside 1..={relays}"),
                        ));
                    }
                }
            }
            let n = grid_len(sw.start_db.get_ref().get(), sw.stop_db.get(), sw.step_db.get());
            if n > MAX_GRID_POINTS {
                return Err(config_error(
                    source,
                    sw.start_db.span(),
                    format!("sweep `{name}` has {n} grid points, more than {MAX_GRID_POINTS}"),
                ));
            }
        }
        self.network()?;
        Ok(())
    }

    /// Network topology with every relay present.
    pub fn network(&self) -> Result<NetworkScenario<f64>> {
        let l = &self.links;
        let pick = |own: &Option<LinkSection>, name: &str| -> Result<FadingLink<f64>> {
            own.or(l.default)
                .map(|s| s.link())
                .ok_or_else(|| Error::Config(format!("link `{name}` has no entry and no [links.default]")))
        };
        let relays = (1..=*self.secondary.relays.get_ref())
            .map(|k| {
                let o = self.relay.get(k.to_string().as_str()).cloned().unwrap_or_default();
                Ok(RelayLinks {
                    pt_r: pick(&o.pt_r.or(l.pt_r), "pt_r")?,
                    s1_r: pick(&o.s1_r.or(l.s1_r), "s1_r")?,
                    s2_r: pick(&o.s2_r.or(l.s2_r), "s2_r")?,
                    r_px: pick(&o.r_px.or(l.r_px), "r_px")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let net = NetworkScenario {
            scenario: match self.secondary.scenario.get_ref() {
                ScenarioName::A => Scenario::A,
                ScenarioName::B => Scenario::B,
            },
            primary_rate: self.primary.rate.get(),
            secondary_threshold: self.secondary.threshold_db.linear(),
            pt_px: pick(&l.pt_px, "pt_px")?,
            s1_px: pick(&l.s1_px, "s1_px")?,
            s2_px: pick(&l.s2_px, "s2_px")?,
            pt_s1: pick(&l.pt_s1, "pt_s1")?,
            pt_s2: pick(&l.pt_s2, "pt_s2")?,
            relays,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn metric(&self) -> Metric {
        match self.secondary.metric.get_ref() {
            MetricName::E2e => Metric::EndToEnd,
            MetricName::S1 => Metric::SourceOne,
        }
    }

    pub fn modulation(&self) -> ModulationSpec<f64> {
        ModulationSpec::mpsk(*self.secondary.modulation.get_ref()).expect("checked at parse time")
    }

    /// `(γ̄_P, γ̄_S^max, γ̄_R^max)` in linear scale at sweep abscissa `x_db`.
    pub fn powers_at(&self, axis: XAxis, x_db: f64) -> (f64, f64, f64) {
        let x = db_to_linear(x_db);
        match axis {
            XAxis::PrimarySnrDb => (
                x,
                self.secondary.max_source_snr_db.linear(),
                self.secondary.max_relay_snr_db.linear(),
            ),
            XAxis::SecondarySnrDb => (self.primary.snr_db.linear(), x, x),
        }
    }

    pub fn sweep_names(&self) -> Vec<&str> {
        self.sweep.keys().map(String::as_str).collect()
    }

    /// Resolve sweep `name`; `None` selects the only sweep in the file.
    pub fn sweep_plan(&self, name: Option<&str>) -> Result<SweepPlan> {
        let (name, sw) = match name {
            Some(n) => (
                n,
                self.sweep.get(n).ok_or_else(|| {
                    Error::Config(format!("no sweep named `{n}`; available: {}", self.sweep_names().join(", ")))
                })?,
            ),
            None if self.sweep.len() == 1 => {
                let (n, s) = self.sweep.iter().next().expect("one entry");
                (n.as_str(), s)
            }
            None => {
                return Err(Error::Config(format!(
                    "select a sweep with --sweep; available: {}",
                    self.sweep_names().join(", ")
                )))
            }
        };
        let (start, stop, step) = (sw.start_db.get_ref().get(), sw.stop_db.get(), sw.step_db.get());
        let grid_db = (0..grid_len(start, stop, step)).map(|i| start + i as f64 * step).collect();
        let relay_counts = match &sw.relays {
            Some(list) => list.get_ref().iter().map(|&k| k as usize).collect(),
            None => vec![*self.secondary.relays.get_ref() as usize],
        };
        Ok(SweepPlan {
            name: name.to_string(),
            x_axis: sw.x_axis,
            grid_db,
            thresholds: sw.thresholds.iter().map(|p| p.get()).collect(),
            relay_counts,
            trials: sw.trials,
            seed: sw.seed,
            sinr: sw.mc_sinr.into(),
        })
    }
}

const MAX_GRID_POINTS: usize = 100_000;

/// Number of points `start + i·step` not exceeding `stop`; zero when `start > stop`.
fn grid_len(start: f64, stop: f64, step: f64) -> usize {
    if start > stop {
        return 0;
    }
    let n = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor();
    if n.is_finite() && n < MAX_GRID_POINTS as f64 {
        n as usize + 1
    } else {
        MAX_GRID_POINTS + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[primary]
rate = 1.0
snr_db = 10.0

[secondary]
scenario = "b"
relays = 3
max_source_snr_db = 10.0
max_relay_snr_db = 12.0

[links.default]
m = 2
mean_gain = 1.0

[links.pt_px]
m = 1
mean_gain = 0.5

[relay.2.s1_r]
m = 3
mean_gain = 2.0

[sweep.fig]
x_axis = "secondary_snr_db"
start_db = 0.0
stop_db = 30.0
step_db = 5.0
thresholds = [0.01, 0.1]
relays = [1, 2, 3]
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let net = cfg.network().unwrap();
        assert_eq!(net.relay_count(), 3);
        assert_eq!(net.pt_px.m, 1);
        assert_eq!(net.relays[1].s1_r.m, 3);
        assert_eq!(net.relays[0].s1_r.m, 2);
        assert!((net.secondary_threshold - 10f64.powf(0.3)).abs() < 1e-15);
        let plan = cfg.sweep_plan(None).unwrap();
        assert_eq!(plan.grid_db, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(plan.trials, DEFAULT_TRIALS);
        assert_eq!(plan.relay_counts, vec![1, 2, 3]);
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back.network().unwrap(), cfg.network().unwrap());
        assert_eq!(back.sweep_plan(None).unwrap(), cfg.sweep_plan(None).unwrap());
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn unknown_key_reports_line() {
        let bad = SAMPLE.replace("snr_db = 10.0", "snr_db = 10.0\nbogus = 1");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("line 5"), "{err}");
    }

    #[test]
    fn invalid_value_reports_line() {
        let bad = SAMPLE.replace("thresholds = [0.01, 0.1]", "thresholds = [0.01, 1.5]");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("line 29"), "{err}");
        let bad = SAMPLE.replace("m = 3", "m = 0");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("line 21"), "{err}");
    }

    #[test]
    fn cross_field_errors_report_line() {
        let bad = SAMPLE.replace("[relay.2.s1_r]", "[relay.7.s1_r]");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("line 20"), "{err}");
        let bad = SAMPLE.replace("scenario = \"b\"", "scenario = \"a\"");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("line 8"), "{err}");
    }

    #[test]
    fn missing_link_is_an_error() {
        let bad = SAMPLE.replace("[links.default]\nm = 2\nmean_gain = 1.0\n", "");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn reversed_range_is_empty() {
        assert_eq!(grid_len(5.0, 0.0, 1.0), 0);
        assert_eq!(grid_len(0.0, 0.0, 1.0), 1);
        assert_eq!(grid_len(0.0, 1.0, 0.1), 11);
    }
}

//! Simulation configuration, loaded from TOML. Every field has a default, so
//! an empty file is a valid configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escalation::{Contact, PlanParams, Position, DEFAULT_DEDUP_WINDOW_MS};
use crate::fusion::FusionParams;
use crate::inference::QuietHours;
use crate::risk::RiskConfig;
use crate::sim::channel::ChannelModels;
use crate::window::WindowConfig;

/// Fixed per-stage processing latencies in ms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageLatencies {
    /// Sensor → gateway radio hop.
    pub ble_ms: u64,
    pub fusion_ms: u64,
    pub inference_ms: u64,
    pub risk_ms: u64,
    pub dispatch_ms: u64,
}

impl Default for StageLatencies {
    fn default() -> Self {
        Self {
            ble_ms: 30,
            fusion_ms: 15,
            inference_ms: 5,
            risk_ms: 10,
            dispatch_ms: 5,
        }
    }
}

impl StageLatencies {
    /// Deep-learning inference mode latency, for what-if runs.
    pub const DL_INFERENCE_MS: u64 = 100;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outage {
    pub start_ms: u64,
    pub end_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UplinkConfig {
    pub latency_ms: u64,
    pub capacity: usize,
    pub heartbeat_interval_ms: u64,
}

impl Default for UplinkConfig {
    fn default() -> Self {
        Self {
            latency_ms: 50,
            capacity: crate::uplink::OFFLINE_CAPACITY,
            heartbeat_interval_ms: 60_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EscalationConfig {
    pub elder_position: Position,
    pub volunteer_radius_m: f64,
    pub volunteer_accept_probability: f64,
    pub volunteer_response_ms: u64,
    pub dedup_window_ms: u64,
}

impl Default for EscalationConfig {
    fn default() -> Self {
        Self {
            elder_position: Position::default(),
            volunteer_radius_m: crate::escalation::DEFAULT_VOLUNTEER_RADIUS_M,
            volunteer_accept_probability: 0.7,
            volunteer_response_ms: 30_000,
            dedup_window_ms: DEFAULT_DEDUP_WINDOW_MS,
        }
    }
}

impl EscalationConfig {
    pub fn plan_params(&self) -> PlanParams {
        PlanParams {
            elder_position: self.elder_position,
            volunteer_radius_m: self.volunteer_radius_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub gateway_id: String,
    pub elder_id: String,
    /// Time of day at trace t=0, "HH:MM". Only used for quiet hours.
    pub clock_anchor: String,
    pub quiet_start: String,
    pub quiet_end: String,
    pub window: WindowConfig,
    pub fusion: FusionParams,
    pub risk: RiskConfig,
    pub escalation: EscalationConfig,
    #[serde(deserialize_with = "crate::sim::channel::deserialize_partial")]
    pub channels: ChannelModels,
    pub stages: StageLatencies,
    pub uplink: UplinkConfig,
    pub outages: Vec<Outage>,
    /// Panic-button presses, trace ms.
    pub manual_triggers: Vec<u64>,
    pub contacts: Vec<Contact>,
}

impl Default for SimConfig {
    fn default() -> Self {
        let fusion = FusionParams {
            rooms: default_rooms(),
            ..FusionParams::default()
        };
        Self {
            seed: 0,
            gateway_id: "gw1".into(),
            elder_id: "elder1".into(),
            clock_anchor: "09:00".into(),
            quiet_start: "22:00".into(),
            quiet_end: "07:00".into(),
            window: WindowConfig::default(),
            fusion,
            risk: RiskConfig::default(),
            escalation: EscalationConfig::default(),
            channels: ChannelModels::default(),
            stages: StageLatencies::default(),
            uplink: UplinkConfig::default(),
            outages: Vec::new(),
            manual_triggers: Vec::new(),
            contacts: default_contacts(),
        }
    }
}

fn default_rooms() -> BTreeMap<String, String> {
    [
        ("motion-living", "living_room"),
        ("motion-bedroom", "bedroom"),
        ("door-front", "hallway"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

fn default_contacts() -> Vec<Contact> {
    vec![
        Contact::family("family-daughter", true),
        Contact::family("family-son", false),
        Contact::doctor("doctor-community", true),
        Contact::volunteer("volunteer-a", Position::new(120.0, 80.0), true),
        Contact::volunteer("volunteer-b", Position::new(-300.0, 250.0), true),
        Contact::volunteer("volunteer-c", Position::new(900.0, 900.0), true),
    ]
}

/// Parses "HH:MM" into ms after midnight.
pub fn parse_time_of_day(s: &str) -> Result<u64> {
    let bad = || Error::Config(format!("time of day `{s}` is not HH:MM"));
    let (h, m) = s.split_once(':').ok_or_else(bad)?;
    let h: u64 = h.trim().parse().map_err(|_| bad())?;
    let m: u64 = m.trim().parse().map_err(|_| bad())?;
    if h >= 24 || m >= 60 {
        return Err(bad());
    }
    Ok((h * 60 + m) * 60_000)
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn quiet_hours(&self) -> Result<QuietHours> {
        Ok(QuietHours {
            start_ms: parse_time_of_day(&self.quiet_start)?,
            end_ms: parse_time_of_day(&self.quiet_end)?,
        })
    }

    pub fn clock_anchor_ms(&self) -> Result<u64> {
        parse_time_of_day(&self.clock_anchor)
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.fusion.validate()?;
        self.risk.validate()?;
        self.channels.validate()?;
        self.quiet_hours()?;
        self.clock_anchor_ms()?;
        if self.gateway_id.is_empty() || self.gateway_id.contains('/') {
            return Err(Error::Config("gateway_id must be non-empty and contain no '/'".into()));
        }
        let esc = &self.escalation;
        if esc.volunteer_radius_m.is_nan() || esc.volunteer_radius_m <= 0.0 {
            return Err(Error::Config("volunteer_radius_m must be positive".into()));
        }
        if !(0.0..=1.0).contains(&esc.volunteer_accept_probability) {
            return Err(Error::Config("volunteer_accept_probability must be in [0, 1]".into()));
        }
        if self.uplink.capacity == 0 {
            return Err(Error::Config("uplink capacity must be positive".into()));
        }
        for o in &self.outages {
            if o.end_ms <= o.start_ms {
                return Err(Error::Config(format!("outage {}..{} is empty", o.start_ms, o.end_ms)));
            }
        }
        for c in &self.contacts {
            c.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_is_default() {
        assert_eq!(SimConfig::from_toml_str("").unwrap(), SimConfig::default());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = SimConfig::default();
        assert_eq!(SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn partial_override() {
        let cfg = SimConfig::from_toml_str(
            "seed = 7\n[risk.thresholds]\nyellow = 0.25\n[channels.sms]\nsuccess_probability = 0.9\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.risk.thresholds.yellow, 0.25);
        assert_eq!(cfg.risk.thresholds.orange, 0.6);
        assert_eq!(cfg.channels.sms.success_probability, 0.9);
        assert_eq!(cfg.channels.sms.mean_ms, 1500);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(SimConfig::from_toml_str("[risk.thresholds]\nyellow = 0.7\n").is_err());
        assert!(SimConfig::from_toml_str("[fusion.weights]\ncamera = 1.5\n").is_err());
        assert!(SimConfig::from_toml_str("[channels.push]\njitter_ms = 900\n").is_err());
        assert!(SimConfig::from_toml_str("quiet_start = \"25:00\"\n").is_err());
        assert!(SimConfig::from_toml_str("[[outages]]\nstart_ms = 5\nend_ms = 5\n").is_err());
        assert!(SimConfig::from_toml_str("unknown_key = [").is_err());
    }

    #[test]
    fn time_of_day() {
        assert_eq!(parse_time_of_day("22:00").unwrap(), 22 * 3_600_000);
        assert_eq!(parse_time_of_day("07:30").unwrap(), 7 * 3_600_000 + 30 * 60_000);
        assert!(parse_time_of_day("7").is_err());
    }
}

//! Notification channel model: uniform jitter around a mean latency and a
//! Bernoulli delivery outcome.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escalation::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub mean_ms: u64,
    /// Half-width of the uniform jitter.
    pub jitter_ms: u64,
    pub success_probability: f64,
}

impl ChannelModel {
    pub const fn new(mean_ms: u64, jitter_ms: u64, success_probability: f64) -> Self {
        Self {
            mean_ms,
            jitter_ms,
            success_probability,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.mean_ms == 0 {
            return Err(Error::Config(format!("channel {name}: mean_ms must be positive")));
        }
        if self.jitter_ms >= self.mean_ms {
            return Err(Error::Config(format!(
                "channel {name}: jitter_ms must be below mean_ms"
            )));
        }
        if !(0.0..=1.0).contains(&self.success_probability) {
            return Err(Error::Config(format!(
                "channel {name}: success_probability not in [0, 1]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModels {
    pub sms: ChannelModel,
    pub push: ChannelModel,
    pub call: ChannelModel,
}

impl Default for ChannelModels {
    fn default() -> Self {
        Self {
            sms: ChannelModel::new(1500, 300, 0.985),
            push: ChannelModel::new(800, 200, 0.995),
            call: ChannelModel::new(3000, 500, 0.95),
        }
    }
}

impl ChannelModels {
    pub fn get(&self, channel: Channel) -> &ChannelModel {
        match channel {
            Channel::Sms => &self.sms,
            Channel::Push => &self.push,
            Channel::Call => &self.call,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sms.validate("sms")?;
        self.push.validate("push")?;
        self.call.validate("call")
    }
}

// Deserializing a partially specified channel table fills the gaps from the
// per-channel defaults rather than a single generic default.
mod partial {
    use super::*;

    #[derive(Deserialize)]
    struct Partial {
        mean_ms: Option<u64>,
        jitter_ms: Option<u64>,
        success_probability: Option<f64>,
    }

    #[derive(Deserialize)]
    struct PartialModels {
        sms: Option<Partial>,
        push: Option<Partial>,
        call: Option<Partial>,
    }

    fn merge(base: ChannelModel, p: Option<Partial>) -> ChannelModel {
        match p {
            None => base,
            Some(p) => ChannelModel {
                mean_ms: p.mean_ms.unwrap_or(base.mean_ms),
                jitter_ms: p.jitter_ms.unwrap_or(base.jitter_ms),
                success_probability: p.success_probability.unwrap_or(base.success_probability),
            },
        }
    }

    pub(crate) fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ChannelModels, D::Error> {
        let p = PartialModels::deserialize(d)?;
        let base = ChannelModels::default();
        Ok(ChannelModels {
            sms: merge(base.sms, p.sms),
            push: merge(base.push, p.push),
            call: merge(base.call, p.call),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelOutcome {
    pub latency_ms: u64,
    pub delivered: bool,
}

/// Draws latency first, then the delivery outcome. Failed sends still take
/// their latency before the failure receipt arrives.
pub fn simulate_channel<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> ChannelOutcome {
    let jitter = model.jitter_ms as i64;
    let offset = if jitter == 0 {
        0
    } else {
        rng.random_range(-jitter..=jitter)
    };
    let latency_ms = (model.mean_ms as i64 + offset).max(0) as u64;
    let delivered = rng.random::<f64>() < model.success_probability;
    ChannelOutcome { latency_ms, delivered }
}

pub(crate) use partial::deserialize as deserialize_partial;

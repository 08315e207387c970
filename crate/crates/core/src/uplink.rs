//! Gateway → cloud envelopes over the `<gateway_id>/{status,data,alert,cmd}`
//! topic tree, with a bounded offline buffer replayed in order on reconnect.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const OFFLINE_CAPACITY: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicKind {
    Status,
    Data,
    Alert,
    Cmd,
}

impl TopicKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopicKind::Status => "status",
            TopicKind::Data => "data",
            TopicKind::Alert => "alert",
            TopicKind::Cmd => "cmd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Topic {
    pub gateway_id: String,
    pub kind: TopicKind,
}

impl Topic {
    pub fn new(gateway_id: impl Into<String>, kind: TopicKind) -> Self {
        Self {
            gateway_id: gateway_id.into(),
            kind,
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.gateway_id, self.kind.as_str())
    }
}

impl FromStr for Topic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (gw, suffix) = s.rsplit_once('/').ok_or_else(|| format!("topic `{s}` has no suffix"))?;
        if gw.is_empty() {
            return Err(format!("topic `{s}` has no gateway id"));
        }
        let kind = match suffix {
            "status" => TopicKind::Status,
            "data" => TopicKind::Data,
            "alert" => TopicKind::Alert,
            "cmd" => TopicKind::Cmd,
            other => return Err(format!("unknown topic suffix `{other}`")),
        };
        Ok(Topic::new(gw, kind))
    }
}

impl From<Topic> for String {
    fn from(t: Topic) -> Self {
        t.to_string()
    }
}

impl TryFrom<String> for Topic {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UplinkEnvelope {
    pub topic: Topic,
    pub sequence: u64,
    pub enqueued_at: u64,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkState {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PublishOutcome {
    Sent,
    Buffered,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Publish {
    Sent(UplinkEnvelope),
    Buffered { evicted: Option<UplinkEnvelope> },
}

impl Publish {
    pub fn outcome(&self) -> PublishOutcome {
        match self {
            Publish::Sent(_) => PublishOutcome::Sent,
            Publish::Buffered { .. } => PublishOutcome::Buffered,
        }
    }
}

/// FIFO of envelopes held while the link is down; evicts oldest when full.
#[derive(Debug, Clone)]
pub struct OfflineBuffer {
    queue: VecDeque<UplinkEnvelope>,
    capacity: usize,
    dropped: u64,
}

impl OfflineBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            queue: VecDeque::with_capacity(capacity.min(OFFLINE_CAPACITY)),
            capacity,
            dropped: 0,
        }
    }

    /// Returns the evicted envelope, if any.
    pub fn push(&mut self, envelope: UplinkEnvelope) -> Option<UplinkEnvelope> {
        let evicted = if self.queue.len() >= self.capacity {
            self.dropped += 1;
            self.queue.pop_front()
        } else {
            None
        };
        self.queue.push_back(envelope);
        evicted
    }

    pub fn drain(&mut self) -> Vec<UplinkEnvelope> {
        self.queue.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

impl Default for OfflineBuffer {
    fn default() -> Self {
        Self::new(OFFLINE_CAPACITY)
    }
}

/// One gateway's uplink: sequence numbering, link state and offline buffer.
#[derive(Debug, Clone)]
pub struct Uplink {
    gateway_id: String,
    next_sequence: u64,
    link: LinkState,
    buffer: OfflineBuffer,
    started_at: u64,
}

impl Uplink {
    pub fn new(gateway_id: impl Into<String>, started_at: u64) -> Self {
        Self::with_capacity(gateway_id, started_at, OFFLINE_CAPACITY)
    }

    pub fn with_capacity(gateway_id: impl Into<String>, started_at: u64, capacity: usize) -> Self {
        Self {
            gateway_id: gateway_id.into(),
            next_sequence: 1,
            link: LinkState::Up,
            buffer: OfflineBuffer::new(capacity),
            started_at,
        }
    }

    pub fn gateway_id(&self) -> &str {
        &self.gateway_id
    }

    pub fn link(&self) -> LinkState {
        self.link
    }

    pub fn buffer(&self) -> &OfflineBuffer {
        &self.buffer
    }

    /// Stamps a new envelope with the next sequence number.
    pub fn envelope(&mut self, kind: TopicKind, payload: serde_json::Value, now: u64) -> UplinkEnvelope {
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        UplinkEnvelope {
            topic: Topic::new(self.gateway_id.clone(), kind),
            sequence,
            enqueued_at: now,
            payload,
        }
    }

    pub fn heartbeat_payload(&self, now: u64) -> serde_json::Value {
        serde_json::json!({
            "uptime_ms": now.saturating_sub(self.started_at),
            "buffer_depth": self.buffer.len(),
        })
    }

    pub fn heartbeat(&mut self, now: u64) -> UplinkEnvelope {
        let payload = self.heartbeat_payload(now);
        self.envelope(TopicKind::Status, payload, now)
    }

    /// Sends when the link is up, otherwise buffers (possibly evicting the
    /// oldest buffered envelope).
    pub fn publish(&mut self, envelope: UplinkEnvelope) -> Publish {
        match self.link {
            LinkState::Up => Publish::Sent(envelope),
            LinkState::Down => Publish::Buffered {
                evicted: self.buffer.push(envelope),
            },
        }
    }

    pub fn set_link_down(&mut self) {
        self.link = LinkState::Down;
    }

    /// Brings the link up and returns everything buffered, oldest first.
    pub fn replay_on_reconnect(&mut self) -> Vec<UplinkEnvelope> {
        self.link = LinkState::Up;
        self.buffer.drain()
    }
}

//! Three-level notification: family, community doctors, nearby volunteers.
//!
//! [`plan_notifications`] is pure. [`dispatch`] turns a plan into
//! [`NotificationRecord`]s and [`RecordStore`] tracks their delivery
//! lifecycle with a forward-only state machine and an audit trail.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::risk::{AlertLevel, RiskDetail};

pub const DEFAULT_VOLUNTEER_RADIUS_M: f64 = 1_000.0;
pub const MAX_VOLUNTEERS: usize = 2;
pub const DEFAULT_DEDUP_WINDOW_MS: u64 = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Family,
    Doctor,
    Volunteer,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub contact_id: String,
    pub role: Role,
    #[serde(default)]
    pub phone: String,
    #[serde(default)]
    pub has_app: bool,
    /// Volunteers only.
    #[serde(default)]
    pub location: Option<Position>,
    /// Volunteers only.
    #[serde(default = "default_true")]
    pub available: bool,
}

fn default_true() -> bool {
    true
}

impl Contact {
    pub fn family(id: impl Into<String>, has_app: bool) -> Self {
        Self {
            contact_id: id.into(),
            role: Role::Family,
            phone: String::new(),
            has_app,
            location: None,
            available: true,
        }
    }

    pub fn doctor(id: impl Into<String>, has_app: bool) -> Self {
        Self {
            role: Role::Doctor,
            ..Self::family(id, has_app)
        }
    }

    pub fn volunteer(id: impl Into<String>, at: Position, available: bool) -> Self {
        Self {
            contact_id: id.into(),
            role: Role::Volunteer,
            phone: String::new(),
            has_app: true,
            location: Some(at),
            available,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.role == Role::Volunteer && self.location.is_none() {
            return Err(Error::Config(format!("volunteer {} has no location", self.contact_id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertSource {
    Automatic,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub alert_id: String,
    pub elder_id: String,
    pub created_at: u64,
    pub level: AlertLevel,
    pub source: AlertSource,
    pub risk_detail: RiskDetail,
    pub location: Option<String>,
}

impl Alert {
    pub fn validate(&self) -> Result<()> {
        if self.level == AlertLevel::None {
            return Err(Error::InvalidAlert("alert level cannot be NONE".into()));
        }
        if self.source == AlertSource::Manual && self.level != AlertLevel::Red {
            return Err(Error::InvalidAlert("manual alerts are always RED".into()));
        }
        Ok(())
    }

    /// Short stable digest of what recipients are told.
    pub fn content_digest(&self) -> String {
        let body =
            serde_json::to_string(&(&self.level, &self.risk_detail, &self.location)).expect("alert content serializes");
        let hash = Sha256::digest(body.as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Sms,
    Push,
    Call,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Sms => "sms",
            Channel::Push => "push",
            Channel::Call => "call",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryStatus {
    Pending,
    Delivered,
    Read,
    Ringing,
    Answered,
    Voicemail,
    Failed,
}

impl DeliveryStatus {
    pub fn initial(channel: Channel) -> Self {
        match channel {
            Channel::Sms | Channel::Push => DeliveryStatus::Pending,
            Channel::Call => DeliveryStatus::Ringing,
        }
    }

    pub fn can_transition(self, to: DeliveryStatus, channel: Channel) -> bool {
        use DeliveryStatus::*;
        match channel {
            Channel::Sms | Channel::Push => {
                matches!((self, to), (Pending, Delivered) | (Pending, Failed) | (Delivered, Read))
            }
            Channel::Call => matches!(
                (self, to),
                (Ringing, Answered) | (Ringing, Voicemail) | (Ringing, Failed)
            ),
        }
    }

    /// Whether the recipient was reached.
    pub fn is_success(self) -> bool {
        matches!(
            self,
            DeliveryStatus::Delivered | DeliveryStatus::Read | DeliveryStatus::Answered | DeliveryStatus::Voicemail
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeliveryStatus::Pending => "pending",
            DeliveryStatus::Delivered => "delivered",
            DeliveryStatus::Read => "read",
            DeliveryStatus::Ringing => "ringing",
            DeliveryStatus::Answered => "answered",
            DeliveryStatus::Voicemail => "voicemail",
            DeliveryStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlanEntry {
    pub recipient: String,
    pub role: Role,
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NotificationPlan {
    pub alert_id: String,
    pub entries: Vec<PlanEntry>,
    pub warnings: Vec<String>,
}

/// Available volunteers within `radius` of the elder, nearest first (ties by
/// id), at most two.
pub fn select_volunteers(elder: Position, volunteers: &[Contact], radius: f64) -> Vec<&Contact> {
    let mut candidates: Vec<(f64, &Contact)> = volunteers
        .iter()
        .filter(|c| c.role == Role::Volunteer && c.available)
        .filter_map(|c| c.location.map(|p| (elder.distance(p), c)))
        .filter(|(d, _)| *d <= radius)
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.contact_id.cmp(&b.1.contact_id)));
    candidates.into_iter().take(MAX_VOLUNTEERS).map(|(_, c)| c).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanParams {
    pub elder_position: Position,
    pub volunteer_radius_m: f64,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            elder_position: Position::default(),
            volunteer_radius_m: DEFAULT_VOLUNTEER_RADIUS_M,
        }
    }
}

fn sms_and_push(c: &Contact, out: &mut Vec<PlanEntry>) {
    out.push(PlanEntry {
        recipient: c.contact_id.clone(),
        role: c.role,
        channel: Channel::Sms,
    });
    if c.has_app {
        out.push(PlanEntry {
            recipient: c.contact_id.clone(),
            role: c.role,
            channel: Channel::Push,
        });
    }
}

/// Graduated recipient list: family from YELLOW, doctors from ORANGE, doctor
/// calls and volunteers at RED.
pub fn plan_notifications(alert: &Alert, directory: &[Contact], params: &PlanParams) -> Result<NotificationPlan> {
    alert.validate()?;
    let mut plan = NotificationPlan {
        alert_id: alert.alert_id.clone(),
        ..Default::default()
    };
    if directory.is_empty() {
        plan.warnings.push("contact directory is empty".into());
        return Ok(plan);
    }
    let of_role = |r: Role| directory.iter().filter(move |c| c.role == r);

    for c in of_role(Role::Family) {
        sms_and_push(c, &mut plan.entries);
    }
    if alert.level >= AlertLevel::Orange {
        for c in of_role(Role::Doctor) {
            sms_and_push(c, &mut plan.entries);
        }
    }
    if alert.level == AlertLevel::Red {
        for c in of_role(Role::Doctor) {
            plan.entries.push(PlanEntry {
                recipient: c.contact_id.clone(),
                role: Role::Doctor,
                channel: Channel::Call,
            });
        }
        let chosen = select_volunteers(params.elder_position, directory, params.volunteer_radius_m);
        if chosen.is_empty() {
            plan.warnings.push("no available volunteer within radius".into());
        }
        for c in chosen {
            plan.entries.push(PlanEntry {
                recipient: c.contact_id.clone(),
                role: Role::Volunteer,
                channel: Channel::Push,
            });
        }
    }
    if plan.entries.is_empty() {
        plan.warnings.push(format!("no recipients for {} alert", alert.level));
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotificationRecord {
    pub record_id: String,
    pub alert_id: String,
    pub recipient: String,
    pub role: Role,
    pub channel: Channel,
    pub content_digest: String,
    pub sent_at: u64,
    pub status: DeliveryStatus,
    pub status_updated_at: u64,
}

impl NotificationRecord {
    pub fn make_id(alert_id: &str, recipient: &str, channel: Channel) -> String {
        format!("{alert_id}:{recipient}:{channel}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelState {
    Open,
    Closed,
}

/// One record per plan entry, pending (sms/push) or ringing (call); all
/// failed when the channel layer is closed.
pub fn dispatch(alert: &Alert, plan: &NotificationPlan, channels: ChannelState, now: u64) -> Vec<NotificationRecord> {
    let digest = alert.content_digest();
    plan.entries
        .iter()
        .map(|e| {
            let status = match channels {
                ChannelState::Open => DeliveryStatus::initial(e.channel),
                ChannelState::Closed => DeliveryStatus::Failed,
            };
            NotificationRecord {
                record_id: NotificationRecord::make_id(&alert.alert_id, &e.recipient, e.channel),
                alert_id: alert.alert_id.clone(),
                recipient: e.recipient.clone(),
                role: e.role,
                channel: e.channel,
                content_digest: digest.clone(),
                sent_at: now,
                status,
                status_updated_at: now,
            }
        })
        .collect()
}

/// Applies a delivery receipt, rejecting backward or cross-channel moves.
pub fn update_status(record: &mut NotificationRecord, to: DeliveryStatus, at: u64) -> Result<()> {
    if !record.status.can_transition(to, record.channel) {
        return Err(Error::Transition {
            record_id: record.record_id.clone(),
            from: record.status.as_str().into(),
            to: to.as_str().into(),
        });
    }
    record.status = to;
    record.status_updated_at = at.max(record.status_updated_at);
    Ok(())
}

/// Audit log line; field order is the log's column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub record_id: String,
    pub alert_id: String,
    pub recipient: String,
    pub channel: Channel,
    pub status: DeliveryStatus,
    pub sent_at: u64,
    pub status_updated_at: u64,
}

impl From<&NotificationRecord> for AuditEntry {
    fn from(r: &NotificationRecord) -> Self {
        Self {
            record_id: r.record_id.clone(),
            alert_id: r.alert_id.clone(),
            recipient: r.recipient.clone(),
            channel: r.channel,
            status: r.status,
            sent_at: r.sent_at,
            status_updated_at: r.status_updated_at,
        }
    }
}

/// Per-elder notification records with an append-only audit trail.
#[derive(Debug, Clone, Default)]
pub struct RecordStore {
    records: BTreeMap<String, NotificationRecord>,
    audit: Vec<AuditEntry>,
}

/// Store shared with a receipt handler running on another context.
pub type SharedRecordStore = Arc<Mutex<RecordStore>>;

impl RecordStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shared() -> SharedRecordStore {
        Arc::new(Mutex::new(Self::new()))
    }

    pub fn insert(&mut self, record: NotificationRecord) -> Result<()> {
        if self.records.contains_key(&record.record_id) {
            return Err(Error::InvalidAlert(format!("duplicate record {}", record.record_id)));
        }
        self.audit.push(AuditEntry::from(&record));
        self.records.insert(record.record_id.clone(), record);
        Ok(())
    }

    pub fn update_status(&mut self, record_id: &str, to: DeliveryStatus, at: u64) -> Result<&NotificationRecord> {
        let record = self.records.get_mut(record_id).ok_or_else(|| Error::Transition {
            record_id: record_id.into(),
            from: "missing".into(),
            to: to.as_str().into(),
        })?;
        update_status(record, to, at)?;
        self.audit.push(AuditEntry::from(&*record));
        Ok(record)
    }

    pub fn get(&self, record_id: &str) -> Option<&NotificationRecord> {
        self.records.get(record_id)
    }

    pub fn records(&self) -> impl Iterator<Item = &NotificationRecord> {
        self.records.values()
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Allocates alert ids and suppresses repeated automatic alerts of the same
/// level inside the dedup window.
#[derive(Debug, Clone)]
pub struct AlertIssuer {
    elder_id: String,
    dedup_window_ms: u64,
    next_seq: u64,
    last_auto: Option<(AlertLevel, u64)>,
    suppressed: u64,
}

impl AlertIssuer {
    pub fn new(elder_id: impl Into<String>, dedup_window_ms: u64) -> Self {
        Self {
            elder_id: elder_id.into(),
            dedup_window_ms,
            next_seq: 0,
            last_auto: None,
            suppressed: 0,
        }
    }

    pub fn suppressed(&self) -> u64 {
        self.suppressed
    }

    fn next_id(&mut self, now: u64) -> String {
        self.next_seq += 1;
        format!("{}-{:06}-{}", self.elder_id, self.next_seq, now)
    }

    /// Returns `None` for NONE-level scores and for suppressed duplicates.
    pub fn automatic(
        &mut self,
        level: AlertLevel,
        detail: RiskDetail,
        location: Option<String>,
        now: u64,
    ) -> Option<Alert> {
        if level == AlertLevel::None {
            return None;
        }
        if let Some((last_level, at)) = self.last_auto {
            if last_level == level && now.saturating_sub(at) < self.dedup_window_ms {
                self.suppressed += 1;
                return None;
            }
        }
        self.last_auto = Some((level, now));
        Some(Alert {
            alert_id: self.next_id(now),
            elder_id: self.elder_id.clone(),
            created_at: now,
            level,
            source: AlertSource::Automatic,
            risk_detail: detail,
            location,
        })
    }

    /// Panic-button alert: always RED, never suppressed.
    pub fn manual_trigger(&mut self, now: u64, location: Option<String>) -> Alert {
        Alert {
            alert_id: self.next_id(now),
            elder_id: self.elder_id.clone(),
            created_at: now,
            level: AlertLevel::Red,
            source: AlertSource::Manual,
            risk_detail: RiskDetail::manual(),
            location,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alert(level: AlertLevel) -> Alert {
        Alert {
            alert_id: "a1".into(),
            elder_id: "e1".into(),
            created_at: 0,
            level,
            source: AlertSource::Automatic,
            risk_detail: RiskDetail::default(),
            location: None,
        }
    }

    fn count(plan: &NotificationPlan, role: Role, channel: Channel) -> usize {
        plan.entries
            .iter()
            .filter(|e| e.role == role && e.channel == channel)
            .count()
    }

    #[test]
    fn yellow_notifies_family_only() {
        let dir = vec![
            Contact::family("f1", true),
            Contact::family("f2", false),
            Contact::doctor("d1", true),
        ];
        let plan = plan_notifications(&alert(AlertLevel::Yellow), &dir, &PlanParams::default()).unwrap();
        assert_eq!(count(&plan, Role::Family, Channel::Sms), 2);
        assert_eq!(count(&plan, Role::Family, Channel::Push), 1);
        assert_eq!(plan.entries.len(), 3);
    }

    #[test]
    fn orange_adds_doctor_without_call() {
        let dir = vec![Contact::family("f1", true), Contact::doctor("d1", true)];
        let plan = plan_notifications(&alert(AlertLevel::Orange), &dir, &PlanParams::default()).unwrap();
        assert_eq!(plan.entries.len(), 4);
        assert_eq!(count(&plan, Role::Doctor, Channel::Call), 0);
    }

    #[test]
    fn red_calls_doctor() {
        let dir = vec![Contact::doctor("d1", true)];
        let plan = plan_notifications(&alert(AlertLevel::Red), &dir, &PlanParams::default()).unwrap();
        let channels: Vec<Channel> = plan.entries.iter().map(|e| e.channel).collect();
        assert_eq!(channels, vec![Channel::Sms, Channel::Push, Channel::Call]);
    }

    #[test]
    fn empty_directory_warns() {
        let plan = plan_notifications(&alert(AlertLevel::Red), &[], &PlanParams::default()).unwrap();
        assert!(plan.entries.is_empty());
        assert_eq!(plan.warnings.len(), 1);
    }

    #[test]
    fn none_level_cannot_be_planned() {
        assert!(plan_notifications(&alert(AlertLevel::None), &[], &PlanParams::default()).is_err());
    }

    #[test]
    fn volunteer_selection() {
        let vols = vec![
            Contact::volunteer("v3", Position::new(2000.0, 0.0), true),
            Contact::volunteer("v2", Position::new(0.0, 200.0), true),
            Contact::volunteer("v1", Position::new(100.0, 0.0), true),
        ];
        let ids: Vec<&str> = select_volunteers(Position::default(), &vols, 1000.0)
            .iter()
            .map(|c| c.contact_id.as_str())
            .collect();
        assert_eq!(ids, vec!["v1", "v2"]);
        assert!(select_volunteers(Position::default(), &vols[..1], 1000.0).is_empty());
        let one = vec![
            Contact::volunteer("v1", Position::new(10.0, 0.0), true),
            Contact::volunteer("v2", Position::new(20.0, 0.0), false),
        ];
        assert_eq!(select_volunteers(Position::default(), &one, 1000.0).len(), 1);
    }

    #[test]
    fn volunteer_ties_break_by_id() {
        let vols = vec![
            Contact::volunteer("vb", Position::new(0.0, 50.0), true),
            Contact::volunteer("vc", Position::new(50.0, 0.0), true),
            Contact::volunteer("va", Position::new(-50.0, 0.0), true),
        ];
        let ids: Vec<&str> = select_volunteers(Position::default(), &vols, 100.0)
            .iter()
            .map(|c| c.contact_id.as_str())
            .collect();
        assert_eq!(ids, vec!["va", "vb"]);
    }

    #[test]
    fn dispatch_creates_one_record_per_entry() {
        let dir = vec![
            Contact::family("f1", true),
            Contact::doctor("d1", false),
            Contact::volunteer("v1", Position::new(10.0, 0.0), true),
            Contact::volunteer("v2", Position::new(20.0, 0.0), true),
        ];
        let a = alert(AlertLevel::Red);
        let plan = plan_notifications(&a, &dir, &PlanParams::default()).unwrap();
        let records = dispatch(&a, &plan, ChannelState::Open, 500);
        // family sms+push, doctor sms+call, two volunteers
        assert_eq!(records.len(), 2 + 2 + 2);
        assert!(records.iter().all(|r| r.sent_at == 500));
        assert!(records
            .iter()
            .all(|r| matches!(r.status, DeliveryStatus::Pending | DeliveryStatus::Ringing)));

        let failed = dispatch(&a, &plan, ChannelState::Closed, 500);
        assert!(failed.iter().all(|r| r.status == DeliveryStatus::Failed));
    }

    #[test]
    fn status_lifecycle_is_forward_only() {
        let a = alert(AlertLevel::Red);
        let plan = plan_notifications(&a, &[Contact::doctor("d1", false)], &PlanParams::default()).unwrap();
        let mut store = RecordStore::new();
        for r in dispatch(&a, &plan, ChannelState::Open, 0) {
            store.insert(r).unwrap();
        }
        let sms = NotificationRecord::make_id("a1", "d1", Channel::Sms);
        let call = NotificationRecord::make_id("a1", "d1", Channel::Call);
        store.update_status(&sms, DeliveryStatus::Delivered, 10).unwrap();
        store.update_status(&sms, DeliveryStatus::Read, 20).unwrap();
        assert!(store.update_status(&sms, DeliveryStatus::Pending, 30).is_err());
        assert_eq!(store.get(&sms).unwrap().status, DeliveryStatus::Read);
        store.update_status(&call, DeliveryStatus::Voicemail, 40).unwrap();
        assert_eq!(store.audit().len(), 2 + 3);
    }

    #[test]
    fn manual_trigger_is_red_with_distinct_ids() {
        let mut issuer = AlertIssuer::new("e1", DEFAULT_DEDUP_WINDOW_MS);
        let a = issuer.manual_trigger(5_000, None);
        let b = issuer.manual_trigger(6_000, None);
        assert_eq!(a.level, AlertLevel::Red);
        assert_eq!(a.created_at, 5_000);
        assert_eq!(a.source, AlertSource::Manual);
        assert_ne!(a.alert_id, b.alert_id);
        assert!(a.validate().is_ok());
    }

    #[test]
    fn repeated_automatic_alerts_are_suppressed() {
        let mut issuer = AlertIssuer::new("e1", 60_000);
        assert!(issuer
            .automatic(AlertLevel::Yellow, RiskDetail::default(), None, 0)
            .is_some());
        assert!(issuer
            .automatic(AlertLevel::Yellow, RiskDetail::default(), None, 30_000)
            .is_none());
        assert!(issuer
            .automatic(AlertLevel::Orange, RiskDetail::default(), None, 31_000)
            .is_some());
        assert!(issuer
            .automatic(AlertLevel::None, RiskDetail::default(), None, 32_000)
            .is_none());
        assert_eq!(issuer.suppressed(), 1);
    }
}

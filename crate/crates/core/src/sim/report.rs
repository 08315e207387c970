//! Run metrics and the plain-text latency / delivery report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const METRICS_FILE: &str = "metrics.json";
pub const REPORT_FILE: &str = "report.txt";

/// Order of rows in the latency table.
pub const STAGES: [&str; 10] = [
    "ble",
    "alignment",
    "fusion",
    "inference",
    "risk",
    "dispatch",
    "channel",
    "end_to_end",
    "first_notification",
    "uplink",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: usize,
    pub p50: u64,
    pub p95: u64,
    pub max: u64,
}

impl LatencySummary {
    /// Nearest-rank percentiles over `samples`.
    pub fn from_samples(samples: &[u64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        Self {
            count: sorted.len(),
            p50: percentile(&sorted, 50),
            p95: percentile(&sorted, 95),
            max: *sorted.last().unwrap(),
        }
    }
}

/// Nearest-rank percentile of an ascending, non-empty slice.
pub fn percentile(sorted: &[u64], pct: u32) -> u64 {
    let n = sorted.len();
    let rank = (pct as usize * n).div_ceil(100).max(1);
    sorted[rank.min(n) - 1]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: String,
    #[serde(flatten)]
    pub summary: LatencySummary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertCounts {
    pub yellow: u64,
    pub orange: u64,
    pub red: u64,
    /// Manual alerts are also counted under `red`.
    pub manual: u64,
    pub suppressed: u64,
}

impl AlertCounts {
    pub fn total(&self) -> u64 {
        self.yellow + self.orange + self.red
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DeliveryStats {
    pub sent: u64,
    pub succeeded: u64,
    pub success_rate: f64,
}

impl DeliveryStats {
    pub fn record(&mut self, success: bool) {
        self.sent += 1;
        self.succeeded += u64::from(success);
        self.success_rate = self.succeeded as f64 / self.sent as f64;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NotificationMetrics {
    pub overall: DeliveryStats,
    pub per_channel: BTreeMap<String, DeliveryStats>,
    pub volunteer_responses: u64,
    pub volunteer_accepted: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UplinkMetrics {
    pub published: u64,
    pub sent: u64,
    pub buffered: u64,
    pub replayed: u64,
    pub dropped: u64,
    pub cloud_received: u64,
    /// Cloud-side sequence numbers strictly increase and their gaps add up
    /// to `dropped`.
    pub cloud_sequence_ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub windows: u64,
    pub readings_ingested: u64,
    pub readings_rejected: u64,
    pub readings_overflow_dropped: u64,
    pub latency: Vec<StageRow>,
    pub alerts: AlertCounts,
    pub notifications: NotificationMetrics,
    pub uplink: UplinkMetrics,
    /// Every alert's end-to-end latency equals the sum of its stages.
    pub e2e_identity_ok: bool,
    pub event_order_violations: u64,
    pub digest: String,
}

impl RunMetrics {
    pub fn stage(&self, name: &str) -> Option<&LatencySummary> {
        self.latency.iter().find(|r| r.stage == name).map(|r| &r.summary)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}

pub fn render_report(m: &RunMetrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "edgecare simulation report");
    let _ = writeln!(out, "seed: {}", m.seed);
    let _ = writeln!(out, "windows: {}", m.windows);
    let _ = writeln!(
        out,
        "readings: {} ingested, {} rejected, {} overflow-dropped",
        m.readings_ingested, m.readings_rejected, m.readings_overflow_dropped
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "latency breakdown (ms, per alert; uplink per envelope)");
    let _ = writeln!(
        out,
        "{:<20} {:>7} {:>7} {:>7} {:>7}",
        "stage", "count", "p50", "p95", "max"
    );
    for row in &m.latency {
        let s = &row.summary;
        let _ = writeln!(
            out,
            "{:<20} {:>7} {:>7} {:>7} {:>7}",
            row.stage, s.count, s.p50, s.p95, s.max
        );
    }
    let _ = writeln!(out);
    let a = &m.alerts;
    let _ = writeln!(out, "alerts");
    let _ = writeln!(out, "{:<20} {:>7}", "YELLOW", a.yellow);
    let _ = writeln!(out, "{:<20} {:>7}", "ORANGE", a.orange);
    let _ = writeln!(out, "{:<20} {:>7}", "RED", a.red);
    let _ = writeln!(out, "{:<20} {:>7}", "of which manual", a.manual);
    let _ = writeln!(out, "{:<20} {:>7}", "suppressed", a.suppressed);
    let _ = writeln!(out);
    let n = &m.notifications;
    let _ = writeln!(out, "delivery");
    let _ = writeln!(out, "{:<20} {:>7} {:>9} {:>8}", "channel", "sent", "succeeded", "rate");
    for (name, s) in &n.per_channel {
        let _ = writeln!(
            out,
            "{:<20} {:>7} {:>9} {:>8.4}",
            name, s.sent, s.succeeded, s.success_rate
        );
    }
    let o = &n.overall;
    let _ = writeln!(
        out,
        "{:<20} {:>7} {:>9} {:>8.4}",
        "all", o.sent, o.succeeded, o.success_rate
    );
    let _ = writeln!(
        out,
        "volunteer responses: {} ({} accepted)",
        n.volunteer_responses, n.volunteer_accepted
    );
    let _ = writeln!(out);
    let u = &m.uplink;
    let _ = writeln!(out, "uplink");
    let _ = writeln!(
        out,
        "published {} / sent {} / buffered {} / replayed {} / dropped {}",
        u.published, u.sent, u.buffered, u.replayed, u.dropped
    );
    let _ = writeln!(
        out,
        "cloud received {} (sequence check: {})",
        u.cloud_received,
        if u.cloud_sequence_ok { "ok" } else { "FAILED" }
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "e2e accounting identity: {}",
        if m.e2e_identity_ok { "ok" } else { "FAILED" }
    );
    let _ = writeln!(out, "event order violations: {}", m.event_order_violations);
    let _ = writeln!(out, "digest: {}", m.digest);
    out
}

/// Writes `metrics.json` and `report.txt` into `out_dir`, creating it if needed.
pub fn report(metrics: &RunMetrics, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join(METRICS_FILE), metrics.to_json())?;
    std::fs::write(out_dir.join(REPORT_FILE), render_report(metrics))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank() {
        let v: Vec<u64> = (1..=100).collect();
        assert_eq!(percentile(&v, 50), 50);
        assert_eq!(percentile(&v, 95), 95);
        assert_eq!(percentile(&[7], 95), 7);
        let s = LatencySummary::from_samples(&[3, 1, 2]);
        assert_eq!((s.count, s.p50, s.p95, s.max), (3, 2, 3, 3));
    }

    #[test]
    fn zero_alert_report_has_table() {
        let m = RunMetrics {
            latency: STAGES
                .iter()
                .map(|s| StageRow {
                    stage: s.to_string(),
                    summary: LatencySummary::default(),
                })
                .collect(),
            ..Default::default()
        };
        let text = render_report(&m);
        assert!(text.contains("latency breakdown"));
        assert!(text.contains("end_to_end"));
        assert!(text.contains("RED                        0"));
    }

    #[test]
    fn metrics_json_round_trip() {
        let mut m = RunMetrics::default();
        m.notifications.overall.record(true);
        m.notifications.overall.record(false);
        assert_eq!(RunMetrics::from_json(&m.to_json()).unwrap(), m);
    }
}

//! Four-dimensional risk scoring, dynamic and trend adjustments, alert level
//! mapping, post-fall escalation and the per-alert risk detail report.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{AnomalyFlag, FusionResult, HR_HIGH, HR_LOW, SPO2_LOW};
use crate::inference::{BehaviorFlag, FallIndicator, FusionHistory, HealthFlag, InferenceBundle, STILL_INTENSITY};
use crate::types::{Activity, Posture};

pub const RISK_HISTORY_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskWeights {
    pub fall: f64,
    pub health: f64,
    pub behavior: f64,
    pub anomaly: f64,
}

impl Default for RiskWeights {
    fn default() -> Self {
        Self {
            fall: 0.4,
            health: 0.4,
            behavior: 0.15,
            anomaly: 0.05,
        }
    }
}

impl RiskWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.fall, self.health, self.behavior, self.anomaly];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config("risk weights must be finite and non-negative".into()));
        }
        if all.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::Config("risk weights must sum to at most 1".into()));
        }
        Ok(())
    }
}

/// Additive adjustment constants applied after the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Adjustments {
    pub fall_trigger: f64,
    pub fall_bonus: f64,
    pub hr_bonus: f64,
    pub spo2_bonus: f64,
    pub behavior_bonus: f64,
    pub anomaly_factor: f64,
    pub trend_bonus: f64,
    pub trend_threshold: f64,
}

impl Default for Adjustments {
    fn default() -> Self {
        Self {
            fall_trigger: 0.7,
            fall_bonus: 0.2,
            hr_bonus: 0.15,
            spo2_bonus: 0.2,
            behavior_bonus: 0.1,
            anomaly_factor: 0.1,
            trend_bonus: 0.2,
            trend_threshold: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlertThresholds {
    pub yellow: f64,
    pub orange: f64,
    pub red: f64,
}

impl Default for AlertThresholds {
    fn default() -> Self {
        Self {
            yellow: 0.3,
            orange: 0.6,
            red: 0.8,
        }
    }
}

impl AlertThresholds {
    pub fn new(yellow: f64, orange: f64, red: f64) -> Result<Self> {
        let t = Self { yellow, orange, red };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.yellow && self.yellow < self.orange && self.orange < self.red && self.red <= 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "alert thresholds must satisfy 0 < yellow < orange < red <= 1, got {}/{}/{}",
                self.yellow, self.orange, self.red
            )))
        }
    }
}

/// Post-fall escalation timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EscalationRule {
    pub fall_lookback_ms: u64,
    pub min_lying_ms: u64,
}

impl Default for EscalationRule {
    fn default() -> Self {
        Self {
            fall_lookback_ms: 120_000,
            min_lying_ms: 60_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AlertLevel {
    None,
    Yellow,
    Orange,
    Red,
}

impl AlertLevel {
    pub fn step_up(self) -> Self {
        match self {
            AlertLevel::None => AlertLevel::Yellow,
            AlertLevel::Yellow => AlertLevel::Orange,
            AlertLevel::Orange | AlertLevel::Red => AlertLevel::Red,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlertLevel::None => "NONE",
            AlertLevel::Yellow => "YELLOW",
            AlertLevel::Orange => "ORANGE",
            AlertLevel::Red => "RED",
        }
    }
}

impl fmt::Display for AlertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Rising,
    Falling,
    Stable,
}

/// Last five adjusted scores, newest last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RiskHistory {
    scores: VecDeque<f64>,
}

impl RiskHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_scores(scores: &[f64]) -> Self {
        let mut h = Self::new();
        for &s in scores {
            h.push(s);
        }
        h
    }

    pub fn push(&mut self, score: f64) {
        self.scores.push_back(score);
        while self.scores.len() > RISK_HISTORY_LEN {
            self.scores.pop_front();
        }
    }

    pub fn scores(&self) -> Vec<f64> {
        self.scores.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn base_score(bundle: &InferenceBundle, fusion: &FusionResult, weights: &RiskWeights) -> f64 {
    let behavior = if bundle.behavior_flags.is_empty() { 0.0 } else { 1.0 };
    weights.fall * bundle.fall_probability
        + weights.health * bundle.health_risk
        + weights.behavior * behavior
        + weights.anomaly * fusion.anomaly_score
}

pub fn apply_adjustments(
    base: f64,
    bundle: &InferenceBundle,
    fusion: &FusionResult,
    trend: Trend,
    adj: &Adjustments,
) -> f64 {
    let mut score = base;
    if bundle.fall_probability > adj.fall_trigger {
        score += adj.fall_bonus;
    }
    if bundle.health_flags.contains(&HealthFlag::Hr) {
        score += adj.hr_bonus;
    }
    if bundle.health_flags.contains(&HealthFlag::Spo2) {
        score += adj.spo2_bonus;
    }
    if !bundle.behavior_flags.is_empty() {
        score += adj.behavior_bonus;
    }
    if fusion.is_anomalous() {
        score += fusion.anomaly_score * adj.anomaly_factor;
    }
    match trend {
        Trend::Rising => score += adj.trend_bonus,
        Trend::Falling => score -= adj.trend_bonus,
        Trend::Stable => {}
    }
    score.clamp(0.0, 1.0)
}

/// Newest minus oldest across a full five-score window.
pub fn classify_trend(history: &RiskHistory, threshold: f64) -> Trend {
    if history.len() < RISK_HISTORY_LEN {
        return Trend::Stable;
    }
    let delta = history.scores[history.len() - 1] - history.scores[0];
    if delta > threshold {
        Trend::Rising
    } else if delta < -threshold {
        Trend::Falling
    } else {
        Trend::Stable
    }
}

pub fn determine_level(score: f64, t: &AlertThresholds) -> AlertLevel {
    if score >= t.red {
        AlertLevel::Red
    } else if score >= t.orange {
        AlertLevel::Orange
    } else if score >= t.yellow {
        AlertLevel::Yellow
    } else {
        AlertLevel::None
    }
}

/// Length in ms of the trailing run of lying-posture windows, with the
/// window that started it.
fn trailing_lying(history: &FusionHistory) -> Option<(u64, u64)> {
    let latest = history.latest()?;
    let start = history
        .iter()
        .rev()
        .take_while(|e| e.posture == Posture::Lying)
        .last()?
        .window_end;
    Some((start, latest.window_end - start))
}

/// Raises the level one step when the person has stayed lying for a while
/// after a recent fall.
pub fn post_fall_escalation(history: &FusionHistory, level: AlertLevel, rule: &EscalationRule) -> AlertLevel {
    let Some(latest) = history.latest() else {
        return level;
    };
    let Some((lying_start, lying_ms)) = trailing_lying(history) else {
        return level;
    };
    let fall_at = history
        .iter()
        .rev()
        .find(|e| e.activity == Activity::Falling && e.window_end <= lying_start)
        .map(|e| e.window_end);
    match fall_at {
        Some(t) if latest.window_end - t <= rule.fall_lookback_ms && lying_ms >= rule.min_lying_ms => level.step_up(),
        _ => level,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallDetail {
    pub probability: f64,
    pub sequence_confirmed: bool,
    pub impact_detected: bool,
    pub posture_before: Option<Posture>,
    pub posture_after: Posture,
    pub stillness_ms: u64,
    pub indicators: BTreeSet<FallIndicator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalDeviation {
    pub vital: String,
    pub value: f64,
    pub limit: f64,
    /// Signed distance past the violated limit.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthDetail {
    pub risk: f64,
    pub abnormal: Vec<VitalDeviation>,
    pub trends: Vec<HealthFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDetail {
    pub patterns: BTreeSet<BehaviorFlag>,
    /// How long the latest flagged behavior has persisted, in ms.
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorDetail {
    pub anomaly_score: f64,
    pub flags: BTreeSet<AnomalyFlag>,
}

/// Human-readable explanation of an assessment. Sections are present only
/// when that dimension contributed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskDetail {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fall: Option<FallDetail>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub health: Option<HealthDetail>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub behavior: Option<BehaviorDetail>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sensor: Option<SensorDetail>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl RiskDetail {
    pub fn is_empty(&self) -> bool {
        self.fall.is_none() && self.health.is_none() && self.behavior.is_none() && self.sensor.is_none()
    }

    pub fn manual() -> Self {
        Self {
            note: Some("user-initiated emergency".into()),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub window_end: u64,
    pub base_score: f64,
    pub adjusted_score: f64,
    pub trend: Trend,
    /// Level from the score alone, before post-fall escalation.
    pub score_level: AlertLevel,
    pub level: AlertLevel,
    pub detail: RiskDetail,
}

const FALL_DETAIL_MIN_PROBABILITY: f64 = 0.5;

fn fall_detail(bundle: &InferenceBundle, history: &FusionHistory, fusion: &FusionResult) -> Option<FallDetail> {
    if !(bundle.sequence_confirmed || bundle.fall_probability >= FALL_DETAIL_MIN_PROBABILITY) {
        return None;
    }
    let entries: Vec<&FusionResult> = history.iter().collect();
    // most recent transition from an upright posture into a down posture
    let posture_before = entries
        .windows(2)
        .rev()
        .find(|w| w[0].posture.is_upright() && w[1].posture.is_down())
        .map(|w| w[0].posture);
    let still: Vec<&&FusionResult> = entries
        .iter()
        .rev()
        .take_while(|e| e.motion_intensity < STILL_INTENSITY)
        .collect();
    let stillness_ms = match (still.first(), still.last()) {
        (Some(newest), Some(oldest)) => newest.window_end - oldest.window_end,
        _ => 0,
    };
    let impact_detected = history
        .recent(crate::inference::SEQUENCE_LOOKBACK)
        .any(|e| e.motion_intensity >= crate::inference::IMPACT_INTENSITY)
        || fusion.accel_drop;
    Some(FallDetail {
        probability: bundle.fall_probability,
        sequence_confirmed: bundle.sequence_confirmed,
        impact_detected,
        posture_before,
        posture_after: fusion.posture,
        stillness_ms,
        indicators: bundle.fall_indicators.clone(),
    })
}

fn health_detail(bundle: &InferenceBundle, fusion: &FusionResult) -> Option<HealthDetail> {
    if bundle.health_flags.is_empty() {
        return None;
    }
    let mut abnormal = Vec::new();
    if let Some(hr) = fusion.heart_rate {
        if hr > HR_HIGH {
            abnormal.push(VitalDeviation {
                vital: "heart_rate".into(),
                value: hr,
                limit: HR_HIGH,
                deviation: hr - HR_HIGH,
            });
        } else if hr < HR_LOW {
            abnormal.push(VitalDeviation {
                vital: "heart_rate".into(),
                value: hr,
                limit: HR_LOW,
                deviation: hr - HR_LOW,
            });
        }
    }
    if let Some(s) = fusion.spo2 {
        if s < SPO2_LOW {
            abnormal.push(VitalDeviation {
                vital: "spo2".into(),
                value: s,
                limit: SPO2_LOW,
                deviation: s - SPO2_LOW,
            });
        }
    }
    let breached: BTreeSet<&str> = abnormal.iter().map(|d| d.vital.as_str()).collect();
    let trends = bundle
        .health_flags
        .iter()
        .copied()
        .filter(|f| match f {
            HealthFlag::Hr => !breached.contains("heart_rate"),
            HealthFlag::Spo2 => !breached.contains("spo2"),
        })
        .collect();
    Some(HealthDetail {
        risk: bundle.health_risk,
        abnormal,
        trends,
    })
}

fn behavior_detail(bundle: &InferenceBundle, history: &FusionHistory) -> Option<BehaviorDetail> {
    if bundle.behavior_flags.is_empty() {
        return None;
    }
    let latest = history.latest()?;
    let earliest = history.iter().next()?;
    let duration_ms = if bundle.behavior_flags.contains(&BehaviorFlag::ProlongedInactivity) {
        let start = history
            .iter()
            .rev()
            .take_while(|e| e.activity == Activity::Stationary)
            .last()
            .map_or(latest.window_end, |e| e.window_end);
        latest.window_end - start
    } else {
        let lookback = history
            .recent(crate::inference::AGITATION_LOOKBACK)
            .next()
            .unwrap_or(earliest);
        latest.window_end - lookback.window_end
    };
    Some(BehaviorDetail {
        patterns: bundle.behavior_flags.clone(),
        duration_ms,
    })
}

pub fn generate_risk_detail(bundle: &InferenceBundle, fusion: &FusionResult, history: &FusionHistory) -> RiskDetail {
    RiskDetail {
        fall: fall_detail(bundle, history, fusion),
        health: health_detail(bundle, fusion),
        behavior: behavior_detail(bundle, history),
        sensor: (!fusion.anomaly_flags.is_empty()).then(|| SensorDetail {
            anomaly_score: fusion.anomaly_score,
            flags: fusion.anomaly_flags.clone(),
        }),
        note: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskConfig {
    pub weights: RiskWeights,
    pub adjustments: Adjustments,
    pub thresholds: AlertThresholds,
    pub escalation: EscalationRule,
}

impl RiskConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.thresholds.validate()
    }
}

/// Per-elder scorer holding the rolling risk history.
#[derive(Debug, Clone, Default)]
pub struct RiskAssessor {
    config: RiskConfig,
    history: RiskHistory,
}

impl RiskAssessor {
    pub fn new(config: RiskConfig) -> Self {
        Self {
            config,
            history: RiskHistory::new(),
        }
    }

    pub fn config(&self) -> &RiskConfig {
        &self.config
    }

    pub fn history(&self) -> &RiskHistory {
        &self.history
    }

    /// Scores the latest window. The trend comes from the scores before this
    /// one; the adjusted score is then appended to the history.
    pub fn assess(
        &mut self,
        bundle: &InferenceBundle,
        fusion: &FusionResult,
        fusion_history: &FusionHistory,
    ) -> RiskAssessment {
        let cfg = &self.config;
        let base = base_score(bundle, fusion, &cfg.weights);
        let trend = classify_trend(&self.history, cfg.adjustments.trend_threshold);
        let adjusted = apply_adjustments(base, bundle, fusion, trend, &cfg.adjustments);
        let score_level = determine_level(adjusted, &cfg.thresholds);
        let level = post_fall_escalation(fusion_history, score_level, &cfg.escalation);
        let detail = generate_risk_detail(bundle, fusion, fusion_history);
        self.history.push(adjusted);
        RiskAssessment {
            window_end: fusion.window_end,
            base_score: base,
            adjusted_score: adjusted,
            trend,
            score_level,
            level,
            detail,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn bundle(p_fall: f64, health: f64) -> InferenceBundle {
        InferenceBundle {
            fall_probability: p_fall,
            health_risk: health,
            ..Default::default()
        }
    }

    fn fusion(anomaly: f64) -> FusionResult {
        let mut f = FusionResult::empty(3000);
        f.anomaly_score = anomaly;
        f
    }

    #[test]
    fn base_score_examples() {
        let w = RiskWeights::default();
        assert!((base_score(&bundle(1.0, 0.0), &fusion(0.0), &w) - 0.4).abs() < EPS);
        let mut full = bundle(1.0, 1.0);
        full.behavior_flags.insert(BehaviorFlag::Agitation);
        assert!((base_score(&full, &fusion(1.0), &w) - 1.0).abs() < EPS);
        assert!((base_score(&bundle(0.5, 0.5), &fusion(0.2), &w) - 0.41).abs() < EPS);
    }

    #[test]
    fn adjustment_examples() {
        let a = Adjustments::default();
        let f = fusion(0.0);
        assert!((apply_adjustments(0.5, &bundle(0.8, 0.0), &f, Trend::Stable, &a) - 0.7).abs() < EPS);
        let mut b = bundle(0.0, 0.0);
        b.health_flags = BTreeSet::from([HealthFlag::Hr, HealthFlag::Spo2]);
        assert_eq!(apply_adjustments(0.9, &b, &f, Trend::Stable, &a), 1.0);
        assert!((apply_adjustments(0.5, &bundle(0.0, 0.0), &f, Trend::Falling, &a) - 0.3).abs() < EPS);
    }

    #[test]
    fn trend_examples() {
        let t = |s: &[f64]| classify_trend(&RiskHistory::from_scores(s), 0.2);
        assert_eq!(t(&[0.1, 0.2, 0.3, 0.35, 0.4]), Trend::Rising);
        assert_eq!(t(&[0.5; 5]), Trend::Stable);
        assert_eq!(t(&[0.8, 0.7, 0.6, 0.55, 0.5]), Trend::Falling);
        assert_eq!(t(&[0.0, 0.9]), Trend::Stable);
    }

    #[test]
    fn level_examples() {
        let th = AlertThresholds::default();
        assert_eq!(determine_level(0.25, &th), AlertLevel::None);
        assert_eq!(determine_level(0.45, &th), AlertLevel::Yellow);
        assert_eq!(determine_level(0.70, &th), AlertLevel::Orange);
        assert_eq!(determine_level(0.85, &th), AlertLevel::Red);
        assert_eq!(determine_level(0.30, &th), AlertLevel::Yellow);
        assert_eq!(determine_level(0.80, &th), AlertLevel::Red);
    }

    #[test]
    fn thresholds_must_be_ordered() {
        assert!(AlertThresholds::new(0.3, 0.6, 0.8).is_ok());
        assert!(AlertThresholds::new(0.6, 0.3, 0.8).is_err());
        assert!(AlertThresholds::new(0.0, 0.3, 0.8).is_err());
        assert!(AlertThresholds::new(0.3, 0.6, 1.2).is_err());
    }

    fn entry(t_s: u64, activity: Activity, posture: Posture) -> FusionResult {
        let mut r = FusionResult::empty(t_s * 1000);
        r.activity = activity;
        r.posture = posture;
        r
    }

    fn lying_after_fall(lying_s: u64) -> FusionHistory {
        let mut v = vec![
            entry(1, Activity::Walking, Posture::Standing),
            entry(2, Activity::Falling, Posture::Lying),
        ];
        for t in 3..=(2 + lying_s) {
            v.push(entry(t, Activity::Lying, Posture::Lying));
        }
        FusionHistory::from_results(v).unwrap()
    }

    #[test]
    fn post_fall_escalation_examples() {
        let rule = EscalationRule::default();
        assert_eq!(
            post_fall_escalation(&lying_after_fall(60), AlertLevel::Yellow, &rule),
            AlertLevel::Orange
        );
        assert_eq!(
            post_fall_escalation(&lying_after_fall(60), AlertLevel::Red, &rule),
            AlertLevel::Red
        );
        assert_eq!(
            post_fall_escalation(&lying_after_fall(30), AlertLevel::Yellow, &rule),
            AlertLevel::Yellow
        );
        let no_fall = FusionHistory::from_results((1..=70).map(|t| entry(t, Activity::Lying, Posture::Lying))).unwrap();
        assert_eq!(
            post_fall_escalation(&no_fall, AlertLevel::Yellow, &rule),
            AlertLevel::Yellow
        );
    }

    #[test]
    fn detail_examples() {
        let h = FusionHistory::from_results([entry(1, Activity::Walking, Posture::Standing)]).unwrap();
        let f = h.latest().unwrap().clone();
        assert!(generate_risk_detail(&InferenceBundle::default(), &f, &h).is_empty());

        let mut hot = f.clone();
        hot.heart_rate = Some(130.0);
        let b = InferenceBundle {
            health_flags: BTreeSet::from([HealthFlag::Hr]),
            health_risk: 3.0 / 7.0,
            ..Default::default()
        };
        let d = generate_risk_detail(&b, &hot, &h);
        let hd = d.health.unwrap();
        assert_eq!(hd.abnormal[0].vital, "heart_rate");
        assert!((hd.abnormal[0].deviation - 10.0).abs() < EPS);

        let fallen = FusionHistory::from_results([
            entry(1, Activity::Walking, Posture::Standing),
            entry(2, Activity::Falling, Posture::Lying),
        ])
        .unwrap();
        let b = InferenceBundle {
            fall_probability: 0.77,
            sequence_confirmed: true,
            ..Default::default()
        };
        let d = generate_risk_detail(&b, fallen.latest().unwrap(), &fallen);
        let fd = d.fall.unwrap();
        assert_eq!(fd.posture_before, Some(Posture::Standing));
        assert_eq!(fd.posture_after, Posture::Lying);
    }

    #[test]
    fn assess_composition() {
        let h = FusionHistory::from_results([entry(1, Activity::Walking, Posture::Standing)]).unwrap();
        let f = h.latest().unwrap().clone();
        let mut r = RiskAssessor::default();
        let a = r.assess(&InferenceBundle::default(), &f, &h);
        assert_eq!(a.adjusted_score, 0.0);
        assert_eq!(a.level, AlertLevel::None);

        let b = InferenceBundle {
            fall_probability: 0.9,
            sequence_confirmed: true,
            health_flags: BTreeSet::from([HealthFlag::Hr]),
            ..Default::default()
        };
        let mut r = RiskAssessor::default();
        let a = r.assess(&b, &f, &h);
        assert!((a.adjusted_score - 0.71).abs() < 1e-9);
        assert_eq!(a.level, AlertLevel::Orange);

        let mut rising = RiskAssessor::default();
        for s in [0.0, 0.1, 0.2, 0.3, 0.4] {
            rising.history.push(s);
        }
        let a = rising.assess(&b, &f, &h);
        assert_eq!(a.trend, Trend::Rising);
        assert!((a.adjusted_score - 0.91).abs() < 1e-9);
        assert_eq!(a.level, AlertLevel::Red);
    }
}

//! Rule-based inference over the recent fusion history: fall detection,
//! health prediction and behavior analysis.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{
    hr_variability_exceeded, spo2_decline_exceeded, FusionResult, HR_HIGH, HR_HISTORY_LEN, HR_LOW, SPO2_HISTORY_LEN,
    SPO2_LOW,
};
use crate::types::{Activity, Posture};

pub const HISTORY_CAPACITY: usize = 100;

pub const W_FALLING_ACTIVITY: f64 = 0.9;
pub const W_FALLEN_POSTURE: f64 = 0.7;
pub const W_POST_FALL_STILLNESS: f64 = 0.8;
pub const W_ORIENTATION_CHANGE: f64 = 0.6;
pub const W_HIGH_INTENSITY: f64 = 0.5;
pub const FALL_WEIGHT_TOTAL: f64 =
    W_FALLING_ACTIVITY + W_FALLEN_POSTURE + W_POST_FALL_STILLNESS + W_ORIENTATION_CHANGE + W_HIGH_INTENSITY;

pub const FALLEN_POSTURE_WINDOW_MS: u64 = 10_000;
pub const STILL_INTENSITY: f64 = 0.1;
pub const STILL_MIN_WINDOWS: usize = 2;
pub const ORIENTATION_DELTA_DEG: f64 = 45.0;
pub const HIGH_INTENSITY: f64 = 0.8;
pub const IMPACT_INTENSITY: f64 = 0.5;
pub const SEQUENCE_LOOKBACK: usize = 5;
pub const SEQUENCE_MIN_RAW: f64 = 0.5;
pub const UNCONFIRMED_FACTOR: f64 = 0.5;

pub const HR_BREACH_SUB: f64 = 1.0;
pub const HR_VARIABILITY_SUB: f64 = 0.5;
pub const HR_TREND_SUB: f64 = 0.3;
pub const HR_TREND_LIMIT: f64 = 20.0;
pub const HR_TREND_SAMPLES: usize = 5;
pub const SPO2_BREACH_SUB: f64 = 1.0;
pub const SPO2_DECLINE_SUB: f64 = 0.5;
pub const HR_HEALTH_WEIGHT: f64 = 3.0;
pub const SPO2_HEALTH_WEIGHT: f64 = 4.0;

pub const INACTIVITY_LOOKBACK: usize = 10;
pub const INACTIVITY_MIN_STATIONARY: usize = 8;
pub const AGITATION_LOOKBACK: usize = 6;
pub const AGITATION_MIN_DISTINCT: usize = 4;
pub const LOCATION_ANOMALY_INTENSITY: f64 = 0.5;

pub const DAY_MS: u64 = 86_400_000;

/// Ring buffer of the most recent fusion results, newest last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FusionHistory {
    entries: VecDeque<FusionResult>,
}

impl FusionHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_results(results: impl IntoIterator<Item = FusionResult>) -> Result<Self> {
        let mut h = Self::new();
        for r in results {
            h.push(r)?;
        }
        Ok(h)
    }

    pub fn push(&mut self, result: FusionResult) -> Result<usize> {
        if let Some(newest) = self.entries.back() {
            if result.window_end <= newest.window_end {
                return Err(Error::Ordering {
                    newest: newest.window_end,
                    incoming: result.window_end,
                });
            }
        }
        self.entries.push_back(result);
        if self.entries.len() > HISTORY_CAPACITY {
            self.entries.pop_front();
        }
        Ok(self.entries.len())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn latest(&self) -> Option<&FusionResult> {
        self.entries.back()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &FusionResult> + ExactSizeIterator {
        self.entries.iter()
    }

    /// The last `n` entries, oldest first.
    pub fn recent(&self, n: usize) -> impl Iterator<Item = &FusionResult> {
        self.entries.iter().skip(self.entries.len().saturating_sub(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallIndicator {
    FallingActivity,
    FallenPosture,
    PostFallStillness,
    OrientationChange,
    HighIntensity,
}

impl FallIndicator {
    pub const ALL: [FallIndicator; 5] = [
        FallIndicator::FallingActivity,
        FallIndicator::FallenPosture,
        FallIndicator::PostFallStillness,
        FallIndicator::OrientationChange,
        FallIndicator::HighIntensity,
    ];

    pub fn weight(self) -> f64 {
        match self {
            FallIndicator::FallingActivity => W_FALLING_ACTIVITY,
            FallIndicator::FallenPosture => W_FALLEN_POSTURE,
            FallIndicator::PostFallStillness => W_POST_FALL_STILLNESS,
            FallIndicator::OrientationChange => W_ORIENTATION_CHANGE,
            FallIndicator::HighIntensity => W_HIGH_INTENSITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthFlag {
    Hr,
    Spo2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorFlag {
    ProlongedInactivity,
    Agitation,
    LocationAnomaly,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FallAssessment {
    pub probability: f64,
    pub raw_score: f64,
    pub indicators: BTreeSet<FallIndicator>,
    pub sequence_confirmed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HealthAssessment {
    pub health_risk: f64,
    pub hr_sub: f64,
    pub spo2_sub: f64,
    pub flags: BTreeSet<HealthFlag>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InferenceBundle {
    pub fall_probability: f64,
    pub fall_indicators: BTreeSet<FallIndicator>,
    pub sequence_confirmed: bool,
    pub health_risk: f64,
    pub health_flags: BTreeSet<HealthFlag>,
    pub behavior_flags: BTreeSet<BehaviorFlag>,
}

/// Normalized fall score for an indicator set, before sequence gating.
pub fn fall_raw_score(indicators: &BTreeSet<FallIndicator>) -> f64 {
    indicators.iter().fold(0.0, |acc, i| acc + i.weight()) / FALL_WEIGHT_TOTAL
}

pub fn fall_probability(raw_score: f64, sequence_confirmed: bool) -> f64 {
    if sequence_confirmed {
        raw_score
    } else {
        raw_score * UNCONFIRMED_FACTOR
    }
}

fn fall_indicators(history: &FusionHistory) -> BTreeSet<FallIndicator> {
    let mut set = BTreeSet::new();
    let Some(latest) = history.latest() else {
        return set;
    };
    let entries: Vec<&FusionResult> = history.iter().collect();

    if latest.activity == Activity::Falling {
        set.insert(FallIndicator::FallingActivity);
    }

    let recent_fall = entries
        .iter()
        .rev()
        .any(|e| e.activity == Activity::Falling && latest.window_end - e.window_end <= FALLEN_POSTURE_WINDOW_MS);
    if latest.posture.is_down() && recent_fall {
        set.insert(FallIndicator::FallenPosture);
    }

    let still_run = entries
        .iter()
        .rev()
        .take_while(|e| e.motion_intensity < STILL_INTENSITY)
        .count();
    if still_run >= STILL_MIN_WINDOWS {
        let run_start = entries[entries.len() - still_run].window_end;
        let fell_before = entries[..entries.len() - still_run]
            .iter()
            .rev()
            .any(|e| e.activity == Activity::Falling && run_start - e.window_end <= FALLEN_POSTURE_WINDOW_MS);
        if fell_before {
            set.insert(FallIndicator::PostFallStillness);
        }
    }

    if let [.., prev, cur] = entries.as_slice() {
        let changed =
            prev.posture != cur.posture && prev.posture != Posture::Unknown && cur.posture != Posture::Unknown;
        let delta = match (prev.tilt_deg, cur.tilt_deg) {
            (Some(a), Some(b)) => (b - a).abs(),
            _ => 0.0,
        };
        if changed && delta > ORIENTATION_DELTA_DEG {
            set.insert(FallIndicator::OrientationChange);
        }
    }

    if latest.motion_intensity >= HIGH_INTENSITY {
        set.insert(FallIndicator::HighIntensity);
    }
    set
}

/// Impact-then-stillness, or an upright→lying transition with a strong score.
fn sequence_confirmed(history: &FusionHistory, raw_score: f64) -> bool {
    let Some(latest) = history.latest() else {
        return false;
    };
    let recent: Vec<&FusionResult> = history.recent(SEQUENCE_LOOKBACK).collect();
    let impact_then_still =
        latest.motion_intensity < STILL_INTENSITY && recent.iter().any(|e| e.motion_intensity >= IMPACT_INTENSITY);
    let upright_to_lying = raw_score >= SEQUENCE_MIN_RAW
        && recent
            .windows(2)
            .any(|w| w[0].posture.is_upright() && w[1].posture == Posture::Lying);
    impact_then_still || upright_to_lying
}

pub fn assess_fall(history: &FusionHistory) -> FallAssessment {
    let indicators = fall_indicators(history);
    let raw_score = fall_raw_score(&indicators);
    let confirmed = sequence_confirmed(history, raw_score);
    FallAssessment {
        probability: fall_probability(raw_score, confirmed),
        raw_score,
        indicators,
        sequence_confirmed: confirmed,
    }
}

pub fn health_risk(hr_sub: f64, spo2_sub: f64) -> f64 {
    (HR_HEALTH_WEIGHT * hr_sub + SPO2_HEALTH_WEIGHT * spo2_sub) / (HR_HEALTH_WEIGHT + SPO2_HEALTH_WEIGHT)
}

fn tail<T>(v: &[T], n: usize) -> &[T] {
    &v[v.len().saturating_sub(n)..]
}

pub fn assess_health(history: &FusionHistory) -> HealthAssessment {
    let hr: Vec<f64> = history.iter().filter_map(|e| e.heart_rate).collect();
    let spo2: Vec<f64> = history.iter().filter_map(|e| e.spo2).collect();
    let latest = history.latest();

    let mut hr_sub: f64 = 0.0;
    if let Some(v) = latest.and_then(|e| e.heart_rate) {
        if !(HR_LOW..=HR_HIGH).contains(&v) {
            hr_sub = hr_sub.max(HR_BREACH_SUB);
        }
    }
    if hr_variability_exceeded(tail(&hr, HR_HISTORY_LEN)) {
        hr_sub = hr_sub.max(HR_VARIABILITY_SUB);
    }
    let trend = tail(&hr, HR_TREND_SAMPLES);
    if trend.len() == HR_TREND_SAMPLES && (trend[trend.len() - 1] - trend[0]).abs() > HR_TREND_LIMIT {
        hr_sub = hr_sub.max(HR_TREND_SUB);
    }

    let mut spo2_sub: f64 = 0.0;
    if latest.and_then(|e| e.spo2).is_some_and(|v| v < SPO2_LOW) {
        spo2_sub = spo2_sub.max(SPO2_BREACH_SUB);
    }
    if spo2_decline_exceeded(tail(&spo2, SPO2_HISTORY_LEN)) {
        spo2_sub = spo2_sub.max(SPO2_DECLINE_SUB);
    }

    let mut flags = BTreeSet::new();
    if hr_sub > 0.0 {
        flags.insert(HealthFlag::Hr);
    }
    if spo2_sub > 0.0 {
        flags.insert(HealthFlag::Spo2);
    }
    HealthAssessment {
        health_risk: health_risk(hr_sub, spo2_sub),
        hr_sub,
        spo2_sub,
        flags,
    }
}

/// Half-open time-of-day interval in milliseconds after midnight; wraps
/// around midnight when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuietHours {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Default for QuietHours {
    fn default() -> Self {
        Self {
            start_ms: 22 * 3_600_000,
            end_ms: 7 * 3_600_000,
        }
    }
}

impl QuietHours {
    pub fn contains(&self, time_of_day_ms: u64) -> bool {
        let t = time_of_day_ms % DAY_MS;
        if self.start_ms <= self.end_ms {
            (self.start_ms..self.end_ms).contains(&t)
        } else {
            t >= self.start_ms || t < self.end_ms
        }
    }
}

pub fn assess_behavior(history: &FusionHistory, time_of_day_ms: u64, quiet: QuietHours) -> BTreeSet<BehaviorFlag> {
    let mut flags = BTreeSet::new();
    let Some(latest) = history.latest() else {
        return flags;
    };

    let stationary = history
        .recent(INACTIVITY_LOOKBACK)
        .filter(|e| e.activity == Activity::Stationary)
        .count();
    if stationary >= INACTIVITY_MIN_STATIONARY && !quiet.contains(time_of_day_ms) {
        flags.insert(BehaviorFlag::ProlongedInactivity);
    }

    let distinct: BTreeSet<Activity> = history.recent(AGITATION_LOOKBACK).map(|e| e.activity).collect();
    if distinct.len() >= AGITATION_MIN_DISTINCT {
        flags.insert(BehaviorFlag::Agitation);
    }

    if latest.location.is_none() && latest.motion_intensity > LOCATION_ANOMALY_INTENSITY {
        flags.insert(BehaviorFlag::LocationAnomaly);
    }
    flags
}

/// Runs the three assessors over a history that already contains the
/// current result.
pub fn infer(history: &FusionHistory, time_of_day_ms: u64, quiet: QuietHours) -> InferenceBundle {
    let fall = assess_fall(history);
    let health = assess_health(history);
    InferenceBundle {
        fall_probability: fall.probability,
        fall_indicators: fall.indicators,
        sequence_confirmed: fall.sequence_confirmed,
        health_risk: health.health_risk,
        health_flags: health.flags,
        behavior_flags: assess_behavior(history, time_of_day_ms, quiet),
    }
}

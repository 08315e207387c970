//! Per-window feature fusion: weighted vitals, confidence, motion intensity,
//! posture, activity and multi-factor anomaly scoring.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Activity, Payload, Posture, SensorReading, SensorType, Vec3, GRAVITY};
use crate::window::FusionWindow;

pub const CONFIDENCE_BASE: f64 = 0.5;
pub const CONFIDENCE_PER_SOURCE: f64 = 0.1;
pub const CONFIDENCE_CAP: f64 = 0.95;

/// Mean |Δ‖a‖| (m/s²) at which motion intensity saturates.
pub const INTENSITY_SATURATION: f64 = 5.0;

pub const ACCEL_DROP_THRESHOLD: f64 = 15.0;
pub const ACCEL_DROP_MIN_MS: u64 = 100;
pub const POSTURE_WINDOW_MS: u64 = 500;
pub const FREE_FALL_G: f64 = 0.5;
pub const ACCEL_VOTE_WEIGHT: f64 = 1.0;

pub const HR_LOW: f64 = 50.0;
pub const HR_HIGH: f64 = 120.0;
pub const HR_STDDEV_LIMIT: f64 = 20.0;
pub const HR_HISTORY_LEN: usize = 10;
pub const SPO2_LOW: f64 = 90.0;
pub const SPO2_DROP_LIMIT: f64 = 3.0;
pub const SPO2_HISTORY_LEN: usize = 5;
pub const RAW_INTENSITY_LIMIT: f64 = 2.0;
pub const PREV_INTENSITY_LEN: usize = 3;
pub const ACTIVE_MEAN_INTENSITY: f64 = 0.4;
pub const ABRUPT_STILL_INTENSITY: f64 = 0.05;

pub const HR_ANOMALY_WEIGHT: f64 = 0.3;
pub const SPO2_ANOMALY_WEIGHT: f64 = 0.4;
pub const MOTION_ANOMALY_WEIGHT: f64 = 0.5;
pub const ANOMALY_CAP: f64 = 1.0;
pub const ANOMALY_THRESHOLD: f64 = 0.5;

/// Static per-type reliability weights. Door sensors carry no fusion weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorWeightTable {
    pub wristband: f64,
    pub camera: f64,
    pub motion: f64,
    pub bed: f64,
}

impl Default for SensorWeightTable {
    fn default() -> Self {
        Self {
            wristband: 1.0,
            camera: 0.9,
            motion: 0.8,
            bed: 0.6,
        }
    }
}

impl SensorWeightTable {
    pub fn weight(&self, sensor_type: SensorType) -> Option<f64> {
        match sensor_type {
            SensorType::Wristband => Some(self.wristband),
            SensorType::Camera => Some(self.camera),
            SensorType::Motion => Some(self.motion),
            SensorType::Bed => Some(self.bed),
            SensorType::Door => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("wristband", self.wristband),
            ("camera", self.camera),
            ("motion", self.motion),
            ("bed", self.bed),
        ] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Config(format!("sensor weight {name}={w} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Tunables for [`fuse_window`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionParams {
    pub weights: SensorWeightTable,
    /// ‖a‖ below this for `accel_drop_min_ms` counts as an acceleration drop.
    pub accel_drop_threshold: f64,
    pub accel_drop_min_ms: u64,
    pub posture_window_ms: u64,
    /// Room label per motion / door sensor id.
    pub rooms: BTreeMap<String, String>,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            weights: SensorWeightTable::default(),
            accel_drop_threshold: ACCEL_DROP_THRESHOLD,
            accel_drop_min_ms: ACCEL_DROP_MIN_MS,
            posture_window_ms: POSTURE_WINDOW_MS,
            rooms: BTreeMap::new(),
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.accel_drop_threshold.is_nan() || self.accel_drop_threshold <= 0.0 {
            return Err(Error::Config("accel_drop_threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyFlag {
    HeartRate,
    Spo2,
    Motion,
}

impl AnomalyFlag {
    pub fn contribution(self) -> f64 {
        match self {
            AnomalyFlag::HeartRate => HR_ANOMALY_WEIGHT,
            AnomalyFlag::Spo2 => SPO2_ANOMALY_WEIGHT,
            AnomalyFlag::Motion => MOTION_ANOMALY_WEIGHT,
        }
    }
}

/// Fused features for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub window_end: u64,
    pub activity: Activity,
    pub posture: Posture,
    pub heart_rate: Option<f64>,
    pub spo2: Option<f64>,
    pub motion_intensity: f64,
    pub raw_intensity: f64,
    /// Angle in degrees between the trailing mean acceleration and vertical.
    pub tilt_deg: Option<f64>,
    pub accel_drop: bool,
    /// Room label; `None` means unknown.
    pub location: Option<String>,
    pub anomaly_score: f64,
    pub anomaly_flags: BTreeSet<AnomalyFlag>,
    pub confidence: f64,
    pub n_sources: usize,
}

impl FusionResult {
    /// Result for a window with no usable data.
    pub fn empty(window_end: u64) -> Self {
        Self {
            window_end,
            activity: Activity::Stationary,
            posture: Posture::Unknown,
            heart_rate: None,
            spo2: None,
            motion_intensity: 0.0,
            raw_intensity: 0.0,
            tilt_deg: None,
            accel_drop: false,
            location: None,
            anomaly_score: 0.0,
            anomaly_flags: BTreeSet::new(),
            confidence: compute_confidence(0),
            n_sources: 0,
        }
    }

    pub fn is_anomalous(&self) -> bool {
        self.anomaly_score >= ANOMALY_THRESHOLD
    }
}

/// Weighted mean Σwᵢmᵢ / Σwᵢ.
pub fn fuse_scalar(measurements: &[(f64, f64)]) -> Result<f64> {
    if measurements.is_empty() {
        return Err(Error::NoData);
    }
    let (num, den) = measurements
        .iter()
        .fold((0.0, 0.0), |(n, d), &(m, w)| (n + w * m, d + w));
    if den <= 0.0 {
        return Err(Error::NoData);
    }
    // clamp guards against rounding just outside [min, max]
    let (lo, hi) = measurements
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(m, _)| {
            (lo.min(m), hi.max(m))
        });
    Ok((num / den).clamp(lo, hi))
}

pub fn compute_confidence(n_sources: usize) -> f64 {
    (CONFIDENCE_BASE + n_sources as f64 * CONFIDENCE_PER_SOURCE).min(CONFIDENCE_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Intensity {
    pub clipped: f64,
    pub raw: f64,
}

impl Intensity {
    pub fn from_raw(raw: f64) -> Self {
        Self {
            clipped: raw.min(1.0),
            raw,
        }
    }
}

/// Mean absolute change of ‖a‖ between consecutive samples, over 5 m/s².
pub fn motion_intensity(accel_series: &[Vec3]) -> Intensity {
    if accel_series.len() < 2 {
        return Intensity::default();
    }
    let total: f64 = accel_series
        .windows(2)
        .map(|pair| (pair[1].norm() - pair[0].norm()).abs())
        .sum();
    let mean = total / (accel_series.len() - 1) as f64;
    Intensity::from_raw(mean / INTENSITY_SATURATION)
}

/// True when ‖a‖ stays below `threshold` over a contiguous run of samples
/// spanning at least `min_ms`.
pub fn detect_accel_drop_with(series: &[(u64, Vec3)], threshold: f64, min_ms: u64) -> bool {
    let mut run_start: Option<u64> = None;
    for &(t, a) in series {
        if a.norm() < threshold {
            let start = *run_start.get_or_insert(t);
            if t - start >= min_ms {
                return true;
            }
        } else {
            run_start = None;
        }
    }
    false
}

pub fn detect_accel_drop(series: &[(u64, Vec3)]) -> bool {
    detect_accel_drop_with(series, ACCEL_DROP_THRESHOLD, ACCEL_DROP_MIN_MS)
}

/// Angle in degrees between `a` and the vertical axis.
pub fn tilt_angle_deg(a: Vec3) -> Option<f64> {
    let n = a.norm();
    if n == 0.0 {
        return None;
    }
    Some((a.z / n).clamp(-1.0, 1.0).acos().to_degrees())
}

pub fn posture_from_angle(theta_deg: f64) -> Posture {
    if theta_deg < 30.0 {
        Posture::Standing
    } else if theta_deg <= 60.0 {
        Posture::Sitting
    } else {
        Posture::Lying
    }
}

/// Accelerometer-only posture vote over a short trailing window.
pub fn accel_posture(accel_series: &[Vec3]) -> Option<Posture> {
    if accel_series.is_empty() {
        return None;
    }
    let mean_norm = accel_series.iter().map(|a| a.norm()).sum::<f64>() / accel_series.len() as f64;
    if mean_norm < FREE_FALL_G * GRAVITY {
        return Some(Posture::Falling);
    }
    let mean = Vec3::mean(accel_series)?;
    tilt_angle_deg(mean).map(posture_from_angle)
}

/// Combines the accelerometer vote (weight 1.0) with weighted camera votes.
/// The posture with the largest total weight wins; ties go to the
/// accelerometer's posture, then to enum order.
pub fn estimate_posture(accel_series: &[Vec3], camera_votes: &[(Posture, f64)]) -> Posture {
    let accel_vote = accel_posture(accel_series);
    let mut totals: BTreeMap<Posture, f64> = BTreeMap::new();
    if let Some(p) = accel_vote {
        *totals.entry(p).or_default() += ACCEL_VOTE_WEIGHT;
    }
    for &(p, w) in camera_votes {
        if p != Posture::Unknown && w > 0.0 {
            *totals.entry(p).or_default() += w;
        }
    }
    let mut best: Option<(Posture, f64)> = None;
    for (&p, &w) in &totals {
        let better = match best {
            None => true,
            Some((bp, bw)) => w > bw || (w == bw && Some(p) == accel_vote && Some(bp) != accel_vote),
        };
        if better {
            best = Some((p, w));
        }
    }
    best.map(|(p, _)| p).unwrap_or(Posture::Unknown)
}

pub fn classify_activity(intensity: f64, drop: bool, posture: Posture) -> Activity {
    if drop {
        Activity::Falling
    } else if posture == Posture::Lying && intensity < 0.1 {
        Activity::Lying
    } else if intensity < 0.1 {
        Activity::Stationary
    } else if intensity < 0.3 {
        Activity::Sitting
    } else if intensity < 0.5 {
        Activity::Walking
    } else {
        Activity::Running
    }
}

/// Inputs to the multi-factor anomaly check. Histories are oldest first and
/// include the current window's value when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnomalyInputs {
    pub current_hr: Option<f64>,
    pub hr_history: Vec<f64>,
    pub current_spo2: Option<f64>,
    pub spo2_history: Vec<f64>,
    pub raw_intensity: f64,
    /// Clipped intensities of the preceding windows, oldest first.
    pub prev_intensities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnomalyAssessment {
    pub score: f64,
    pub flags: BTreeSet<AnomalyFlag>,
    pub anomalous: bool,
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn tail(values: &[f64], n: usize) -> &[f64] {
    &values[values.len().saturating_sub(n)..]
}

pub fn hr_variability_exceeded(hr_history: &[f64]) -> bool {
    hr_history.len() >= HR_HISTORY_LEN && std_dev(tail(hr_history, HR_HISTORY_LEN)) > HR_STDDEV_LIMIT
}

/// SpO₂ decline in percentage points across the last five samples.
pub fn spo2_decline_exceeded(spo2_history: &[f64]) -> bool {
    if spo2_history.len() < SPO2_HISTORY_LEN {
        return false;
    }
    let recent = tail(spo2_history, SPO2_HISTORY_LEN);
    recent[0] - recent[recent.len() - 1] > SPO2_DROP_LIMIT
}

pub fn anomaly_score(flags: &BTreeSet<AnomalyFlag>) -> f64 {
    flags
        .iter()
        .map(|f| f.contribution())
        .fold(0.0, |acc, c| acc + c)
        .min(ANOMALY_CAP)
}

pub fn detect_anomalies(input: &AnomalyInputs) -> AnomalyAssessment {
    let mut flags = BTreeSet::new();

    let hr_breach = input.current_hr.is_some_and(|hr| !(HR_LOW..=HR_HIGH).contains(&hr));
    if hr_breach || hr_variability_exceeded(&input.hr_history) {
        flags.insert(AnomalyFlag::HeartRate);
    }

    let spo2_breach = input.current_spo2.is_some_and(|s| s < SPO2_LOW);
    if spo2_breach || spo2_decline_exceeded(&input.spo2_history) {
        flags.insert(AnomalyFlag::Spo2);
    }

    let clipped = input.raw_intensity.min(1.0);
    let prev = tail(&input.prev_intensities, PREV_INTENSITY_LEN);
    let abrupt_stop = prev.len() == PREV_INTENSITY_LEN
        && prev.iter().sum::<f64>() / prev.len() as f64 > ACTIVE_MEAN_INTENSITY
        && clipped < ABRUPT_STILL_INTENSITY;
    if input.raw_intensity > RAW_INTENSITY_LIMIT || abrupt_stop {
        flags.insert(AnomalyFlag::Motion);
    }

    let score = anomaly_score(&flags);
    AnomalyAssessment {
        score,
        flags,
        anomalous: score >= ANOMALY_THRESHOLD,
    }
}

/// Rolling per-elder feature history consumed by [`fuse_window`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VitalsHistory {
    hr: VecDeque<f64>,
    spo2: VecDeque<f64>,
    intensity: VecDeque<f64>,
}

impl VitalsHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hr(&self) -> Vec<f64> {
        self.hr.iter().copied().collect()
    }

    pub fn spo2(&self) -> Vec<f64> {
        self.spo2.iter().copied().collect()
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.intensity.iter().copied().collect()
    }

    pub fn record(&mut self, result: &FusionResult) {
        fn push(buf: &mut VecDeque<f64>, v: f64, cap: usize) {
            buf.push_back(v);
            while buf.len() > cap {
                buf.pop_front();
            }
        }
        if let Some(hr) = result.heart_rate {
            push(&mut self.hr, hr, HR_HISTORY_LEN);
        }
        if let Some(s) = result.spo2 {
            push(&mut self.spo2, s, SPO2_HISTORY_LEN);
        }
        push(&mut self.intensity, result.motion_intensity, PREV_INTENSITY_LEN);
    }
}

/// Picks the body-relevant IMU stream: wristband if present, else ambient
/// motion sensors.
fn body_imu(window: &FusionWindow) -> Vec<(u64, Vec3)> {
    let from = |t: SensorType| -> Vec<(u64, Vec3)> {
        window
            .readings(t)
            .iter()
            .filter_map(|r| r.accel().map(|a| (r.timestamp, a)))
            .collect()
    };
    let wrist = from(SensorType::Wristband);
    if wrist.is_empty() {
        from(SensorType::Motion)
    } else {
        wrist
    }
}

fn per_source_accel(window: &FusionWindow) -> BTreeMap<(SensorType, &str), Vec<Vec3>> {
    let mut sources: BTreeMap<(SensorType, &str), Vec<Vec3>> = BTreeMap::new();
    for t in [SensorType::Wristband, SensorType::Motion] {
        for r in window.readings(t) {
            if let Some(a) = r.accel() {
                sources.entry((t, r.sensor_id.as_str())).or_default().push(a);
            }
        }
    }
    sources
}

fn fused_vital(
    window: &FusionWindow,
    weights: &SensorWeightTable,
    pick: impl Fn(&SensorReading) -> Option<f64>,
) -> Option<f64> {
    let mut latest: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for (&t, readings) in &window.readings_by_type {
        let Some(w) = weights.weight(t) else { continue };
        for r in readings {
            if let Some(v) = pick(r) {
                latest.insert(r.sensor_id.as_str(), (v, w));
            }
        }
    }
    let measurements: Vec<(f64, f64)> = latest.into_values().collect();
    fuse_scalar(&measurements).ok()
}

fn camera_vote(window: &FusionWindow, since: u64, weight: f64) -> Option<(Posture, f64)> {
    let estimates: Vec<(u64, Posture, f64)> = window
        .readings(SensorType::Camera)
        .iter()
        .filter_map(|r| match r.payload {
            Payload::PostureEstimate { posture, confidence } => Some((r.timestamp, posture, confidence)),
            _ => None,
        })
        .collect();
    let mut recent: Vec<_> = estimates.iter().filter(|e| e.0 >= since).collect();
    if recent.is_empty() {
        recent.extend(estimates.last());
    }
    let mut tally: BTreeMap<Posture, f64> = BTreeMap::new();
    for &&(_, p, c) in &recent {
        *tally.entry(p).or_default() += c;
    }
    let mut best: Option<(Posture, f64)> = None;
    for (p, c) in tally {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((p, c));
        }
    }
    best.map(|(p, _)| (p, weight))
}

fn location(window: &FusionWindow, rooms: &BTreeMap<String, String>) -> Option<String> {
    [SensorType::Motion, SensorType::Door]
        .into_iter()
        .flat_map(|t| window.readings(t))
        .max_by_key(|r| r.timestamp)
        .and_then(|r| rooms.get(&r.sensor_id).cloned())
}

/// Converts one aligned window into a [`FusionResult`]. `history` holds the
/// previous windows' fused values and is not modified.
pub fn fuse_window(window: &FusionWindow, params: &FusionParams, history: &VitalsHistory) -> FusionResult {
    let weights = &params.weights;
    let mut result = FusionResult::empty(window.window_end);

    result.n_sources = window.readings_by_type.values().filter(|v| !v.is_empty()).count();
    result.confidence = compute_confidence(result.n_sources);

    result.heart_rate = fused_vital(window, weights, |r| match r.payload {
        Payload::Vitals { heart_rate, .. } => heart_rate,
        _ => None,
    });
    result.spo2 = fused_vital(window, weights, |r| match r.payload {
        Payload::Vitals { spo2, .. } => spo2,
        _ => None,
    });

    let per_source: Vec<(f64, f64)> = per_source_accel(window)
        .into_iter()
        .filter_map(|((t, _), series)| {
            let w = weights.weight(t)?;
            (series.len() >= 2).then(|| (motion_intensity(&series).raw, w))
        })
        .collect();
    let intensity = Intensity::from_raw(fuse_scalar(&per_source).unwrap_or(0.0));
    result.raw_intensity = intensity.raw;
    result.motion_intensity = intensity.clipped;

    let body = body_imu(window);
    result.accel_drop = detect_accel_drop_with(&body, params.accel_drop_threshold, params.accel_drop_min_ms);

    let since = window.window_end.saturating_sub(params.posture_window_ms);
    let trailing: Vec<Vec3> = body
        .iter()
        .filter(|(t, _)| *t >= since && *t <= window.window_end)
        .map(|&(_, a)| a)
        .collect();
    result.tilt_deg = Vec3::mean(&trailing).and_then(tilt_angle_deg);
    let votes: Vec<(Posture, f64)> = camera_vote(window, since, weights.camera).into_iter().collect();
    result.posture = estimate_posture(&trailing, &votes);

    result.activity = classify_activity(intensity.clipped, result.accel_drop, result.posture);
    result.location = location(window, &params.rooms);

    let mut hr_history = history.hr();
    hr_history.extend(result.heart_rate);
    let mut spo2_history = history.spo2();
    spo2_history.extend(result.spo2);
    let anomaly = detect_anomalies(&AnomalyInputs {
        current_hr: result.heart_rate,
        hr_history,
        current_spo2: result.spo2,
        spo2_history,
        raw_intensity: intensity.raw,
        prev_intensities: history.intensities(),
    });
    result.anomaly_score = anomaly.score;
    result.anomaly_flags = anomaly.flags;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn fuse_scalar_examples() {
        assert_eq!(fuse_scalar(&[(80.0, 1.0)]).unwrap(), 80.0);
        assert!((fuse_scalar(&[(80.0, 1.0), (90.0, 0.6)]).unwrap() - (80.0 + 54.0) / 1.6).abs() < EPS);
        assert_eq!(fuse_scalar(&[(42.5, 0.3), (42.5, 0.9)]).unwrap(), 42.5);
        assert!(matches!(fuse_scalar(&[]), Err(Error::NoData)));
    }

    #[test]
    fn confidence_examples() {
        assert!((compute_confidence(1) - 0.6).abs() < EPS);
        assert!((compute_confidence(4) - 0.9).abs() < EPS);
        assert_eq!(compute_confidence(5), 0.95);
        assert_eq!(compute_confidence(10), 0.95);
        assert_eq!(compute_confidence(0), 0.5);
    }

    /// Series whose consecutive ‖a‖ alternate by `step`.
    fn alternating(step: f64, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| Vec3::new(0.0, 0.0, 10.0 + if i % 2 == 0 { 0.0 } else { step }))
            .collect()
    }

    #[test]
    fn motion_intensity_examples() {
        assert_eq!(motion_intensity(&[Vec3::new(0.0, 0.0, 9.81); 10]), Intensity::default());
        let i = motion_intensity(&alternating(2.5, 11));
        assert!((i.clipped - 0.5).abs() < EPS && (i.raw - 0.5).abs() < EPS);
        let i = motion_intensity(&alternating(7.0, 11));
        assert_eq!(i.clipped, 1.0);
        assert!((i.raw - 1.4).abs() < EPS);
        assert_eq!(motion_intensity(&[Vec3::new(1.0, 2.0, 3.0)]), Intensity::default());
    }

    fn constant_series(norm: f64, from: u64, to: u64, step: u64) -> Vec<(u64, Vec3)> {
        (from..=to)
            .step_by(step as usize)
            .map(|t| (t, Vec3::new(0.0, 0.0, norm)))
            .collect()
    }

    #[test]
    fn accel_drop_examples() {
        assert!(detect_accel_drop(&constant_series(9.81, 0, 3000, 10)));
        assert!(!detect_accel_drop(&constant_series(20.0, 0, 3000, 10)));
        let mut s = constant_series(20.0, 0, 1000, 10);
        for (t, a) in s.iter_mut() {
            if (500..550).contains(t) {
                *a = Vec3::new(0.0, 0.0, 5.0);
            }
        }
        assert!(!detect_accel_drop(&s));
    }

    #[test]
    fn posture_examples() {
        assert_eq!(estimate_posture(&[Vec3::new(0.0, 0.0, 9.81)], &[]), Posture::Standing);
        assert_eq!(estimate_posture(&[Vec3::new(9.81, 0.0, 0.0)], &[]), Posture::Lying);
        assert_eq!(estimate_posture(&[Vec3::new(0.0, 0.0, 4.0)], &[]), Posture::Falling);
        assert_eq!(estimate_posture(&[], &[]), Posture::Unknown);
    }

    #[test]
    fn camera_votes_need_agreement_to_beat_accelerometer() {
        let standing = [Vec3::new(0.0, 0.0, 9.81)];
        assert_eq!(
            estimate_posture(&standing, &[(Posture::Sitting, 0.9)]),
            Posture::Standing
        );
        assert_eq!(
            estimate_posture(&standing, &[(Posture::Sitting, 0.9), (Posture::Sitting, 0.9)]),
            Posture::Sitting
        );
        assert_eq!(estimate_posture(&[], &[(Posture::Lying, 0.9)]), Posture::Lying);
    }

    #[test]
    fn activity_examples() {
        assert_eq!(classify_activity(0.0, true, Posture::Standing), Activity::Falling);
        assert_eq!(classify_activity(0.4, false, Posture::Standing), Activity::Walking);
        assert_eq!(classify_activity(0.05, false, Posture::Lying), Activity::Lying);
        assert_eq!(classify_activity(0.05, false, Posture::Standing), Activity::Stationary);
        assert_eq!(classify_activity(1.0, false, Posture::Lying), Activity::Running);
    }

    #[test]
    fn anomaly_examples() {
        let low_hr = detect_anomalies(&AnomalyInputs {
            current_hr: Some(45.0),
            hr_history: vec![45.0],
            ..Default::default()
        });
        assert_eq!(low_hr.score, 0.3);
        assert_eq!(low_hr.flags, BTreeSet::from([AnomalyFlag::HeartRate]));
        assert!(!low_hr.anomalous);

        let all = detect_anomalies(&AnomalyInputs {
            current_hr: Some(45.0),
            hr_history: vec![45.0],
            current_spo2: Some(88.0),
            spo2_history: vec![88.0],
            raw_intensity: 2.5,
            prev_intensities: vec![],
        });
        assert_eq!(all.score, 1.0);
        assert!(all.anomalous);

        let none = detect_anomalies(&AnomalyInputs {
            current_hr: Some(72.0),
            hr_history: vec![72.0; 10],
            current_spo2: Some(97.0),
            spo2_history: vec![97.0; 5],
            raw_intensity: 0.3,
            prev_intensities: vec![0.3; 3],
        });
        assert_eq!(none.score, 0.0);
        assert!(none.flags.is_empty());
    }

    #[test]
    fn variability_needs_ten_samples() {
        let swing: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { 60.0 } else { 110.0 }).collect();
        assert!(!hr_variability_exceeded(&swing));
        let mut ten = swing.clone();
        ten.push(110.0);
        assert!(hr_variability_exceeded(&ten));
    }

    #[test]
    fn abrupt_stillness_after_activity_flags_motion() {
        let a = detect_anomalies(&AnomalyInputs {
            raw_intensity: 0.01,
            prev_intensities: vec![0.5, 0.6, 0.5],
            ..Default::default()
        });
        assert!(a.flags.contains(&AnomalyFlag::Motion));
        let b = detect_anomalies(&AnomalyInputs {
            raw_intensity: 0.01,
            prev_intensities: vec![0.3, 0.3, 0.3],
            ..Default::default()
        });
        assert!(b.flags.is_empty());
    }

    fn vitals(t: u64, hr: f64, spo2: f64) -> SensorReading {
        SensorReading::new(
            t,
            "wb",
            SensorType::Wristband,
            Payload::Vitals {
                heart_rate: Some(hr),
                spo2: Some(spo2),
            },
        )
    }

    fn window_with(readings: Vec<SensorReading>) -> FusionWindow {
        let mut w = FusionWindow::empty(0, 3000);
        for r in readings {
            w.readings_by_type.entry(r.sensor_type).or_default().push(r);
        }
        w
    }

    #[test]
    fn fuse_window_wristband_vitals_only() {
        let w = window_with(vec![vitals(1000, 72.0, 97.0)]);
        let r = fuse_window(&w, &FusionParams::default(), &VitalsHistory::new());
        assert_eq!(r.heart_rate, Some(72.0));
        assert_eq!(r.spo2, Some(97.0));
        assert!((r.confidence - 0.6).abs() < EPS);
    }

    #[test]
    fn fuse_window_empty() {
        let r = fuse_window(
            &FusionWindow::empty(0, 3000),
            &FusionParams::default(),
            &VitalsHistory::new(),
        );
        assert_eq!(r.confidence, 0.5);
        assert_eq!(r.heart_rate, None);
        assert_eq!(r.posture, Posture::Unknown);
        assert_eq!(r.activity, Activity::Stationary);
    }

    #[test]
    fn fuse_window_three_types() {
        let imu = |id: &str, t: SensorType, ts: u64| {
            SensorReading::new(
                ts,
                id,
                t,
                Payload::Imu {
                    accel: Vec3::new(0.0, 0.0, 9.81),
                    gyro: Vec3::default(),
                },
            )
        };
        let cam = SensorReading::new(
            2900,
            "cam",
            SensorType::Camera,
            Payload::PostureEstimate {
                posture: Posture::Standing,
                confidence: 0.8,
            },
        );
        let mut params = FusionParams::default();
        params.rooms.insert("pir".into(), "kitchen".into());
        let w = window_with(vec![
            imu("wb", SensorType::Wristband, 2800),
            imu("wb", SensorType::Wristband, 2900),
            imu("pir", SensorType::Motion, 2950),
            cam,
        ]);
        let r = fuse_window(&w, &params, &VitalsHistory::new());
        assert!((r.confidence - 0.8).abs() < EPS);
        assert_eq!(r.location.as_deref(), Some("kitchen"));
        assert_eq!(r.posture, Posture::Standing);
    }
}

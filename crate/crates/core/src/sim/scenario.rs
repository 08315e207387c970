//! Synthetic trace generator.
//!
//! Every scenario shares the same sensor layout: a wristband IMU at 10 Hz,
//! wristband vitals at 1 Hz, and, while the person is in the living room, a
//! motion sensor mirroring body acceleration plus a camera posture estimate
//! at 1 Hz.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::posture_from_angle;
use crate::sim::config::Outage;
use crate::sim::trace::TraceFile;
use crate::types::{Payload, Posture, SensorReading, SensorType, Vec3, GRAVITY};

pub const WRISTBAND_ID: &str = "wristband-1";
pub const MOTION_ID: &str = "motion-living";
pub const CAMERA_ID: &str = "camera-living";

const IMU_PERIOD_MS: u64 = 100;
const VITALS_PERIOD_MS: u64 = 1_000;
const IMU_NOISE: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Normal,
    Fall,
    Hypoxia,
    Wandering,
    Outage,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Normal,
        ScenarioKind::Fall,
        ScenarioKind::Hypoxia,
        ScenarioKind::Wandering,
        ScenarioKind::Outage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Normal => "normal",
            ScenarioKind::Fall => "fall",
            ScenarioKind::Hypoxia => "hypoxia",
            ScenarioKind::Wandering => "wandering",
            ScenarioKind::Outage => "outage",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// Body motion over one stretch of time.
#[derive(Debug, Clone, PartialEq)]
enum Motion {
    /// Upright, ‖a‖ alternating between `lo` and `hi` every sample.
    Alternate { lo: f64, hi: f64 },
    /// Motionless at `tilt_deg` from vertical.
    Still { tilt_deg: f64 },
    /// Explicit samples at the IMU rate.
    Samples(Vec<Vec3>),
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    duration_ms: u64,
    motion: Motion,
    in_living_room: bool,
}

impl Segment {
    fn new(duration_ms: u64, motion: Motion) -> Self {
        Self {
            duration_ms,
            motion,
            in_living_room: true,
        }
    }

    fn away(mut self) -> Self {
        self.in_living_room = false;
        self
    }

    fn accel(&self, k: u64) -> Vec3 {
        match &self.motion {
            Motion::Alternate { lo, hi } => Vec3::new(0.0, 0.0, if k.is_multiple_of(2) { *lo } else { *hi }),
            Motion::Still { tilt_deg } => tilted(*tilt_deg),
            Motion::Samples(s) => s[(k as usize).min(s.len() - 1)],
        }
    }

    fn posture(&self) -> Posture {
        match &self.motion {
            Motion::Alternate { .. } => Posture::Standing,
            Motion::Still { tilt_deg } => posture_from_angle(*tilt_deg),
            Motion::Samples(_) => Posture::Falling,
        }
    }
}

/// Gravity vector rotated `deg` away from vertical about the y axis.
fn tilted(deg: f64) -> Vec3 {
    let r = deg.to_radians();
    Vec3::new(GRAVITY * r.sin(), 0.0, GRAVITY * r.cos())
}

/// On the floor, on one side with a slight lean.
const LYING_TILT_DEG: f64 = 87.0;

const WALK: Motion = Motion::Alternate { lo: 8.91, hi: 10.71 };

/// 60 s daily-living loop: walk, sit, stand.
fn daily_loop(total_ms: u64) -> Vec<Segment> {
    let cycle = [
        Segment::new(20_000, WALK),
        Segment::new(20_000, Motion::Still { tilt_deg: 45.0 }),
        Segment::new(20_000, Motion::Still { tilt_deg: 0.0 }),
    ];
    let mut out = Vec::new();
    let mut t = 0;
    'outer: loop {
        for s in &cycle {
            if t >= total_ms {
                break 'outer;
            }
            let mut s = s.clone();
            s.duration_ms = s.duration_ms.min(total_ms - t);
            t += s.duration_ms;
            out.push(s);
        }
    }
    out
}

fn fall_segments(total_ms: u64, fall_at: u64) -> Vec<Segment> {
    let impact = vec![
        // free fall, impact with rebounds, then settling
        Vec3::new(0.5, 0.2, 1.9),
        Vec3::new(3.0, 2.0, 31.5),
        Vec3::new(0.4, 0.3, 2.0),
        Vec3::new(4.0, 3.0, 32.0),
        Vec3::new(0.6, 0.1, 1.8),
        Vec3::new(2.0, 1.0, 31.0),
        Vec3::new(0.5, 0.2, 1.9),
    ];
    let impact_ms = impact.len() as u64 * IMU_PERIOD_MS;
    vec![
        Segment::new(fall_at, WALK),
        Segment::new(impact_ms, Motion::Samples(impact)),
        Segment::new(
            total_ms.saturating_sub(fall_at + impact_ms),
            Motion::Still {
                tilt_deg: LYING_TILT_DEG,
            },
        ),
    ]
}

/// Restless pacing away from every mapped room: an 8 s loop of pause,
/// shuffle and hurry, all at ‖a‖ ≥ 16 so no acceleration drop fires.
fn wandering_segments(total_ms: u64) -> Vec<Segment> {
    let cycle = [
        (3_500, Motion::Alternate { lo: 16.0, hi: 16.0 }),
        (2_000, Motion::Alternate { lo: 16.0, hi: 18.5 }),
        (2_500, Motion::Alternate { lo: 16.0, hi: 20.5 }),
    ];
    let mut out = Vec::new();
    let mut t = 0;
    for (d, m) in cycle.iter().cycle() {
        if t >= total_ms {
            break;
        }
        let d = (*d).min(total_ms - t);
        out.push(Segment::new(d, m.clone()).away());
        t += d;
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum VitalsProfile {
    Steady,
    /// HR climbs to `peak` over `rise_ms` starting at `from_ms`.
    Tachycardia {
        from_ms: u64,
        rise_ms: u64,
        peak: f64,
    },
    /// SpO2 falls from 97 to 86 over 5 s starting at `from_ms`, then holds.
    Desaturation {
        from_ms: u64,
    },
}

fn ramp(t: u64, from: u64, span: u64, a: f64, b: f64) -> f64 {
    if t <= from {
        a
    } else if t >= from + span {
        b
    } else {
        a + (b - a) * (t - from) as f64 / span as f64
    }
}

fn vitals_at(profile: VitalsProfile, t: u64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let hr_noise = rng.random_range(-2.0..=2.0);
    let spo2_noise = rng.random_range(-0.3..=0.3);
    let (hr, spo2) = match profile {
        VitalsProfile::Steady => (72.0, 97.0),
        VitalsProfile::Tachycardia { from_ms, rise_ms, peak } => (ramp(t, from_ms, rise_ms, 72.0, peak), 97.0),
        VitalsProfile::Desaturation { from_ms } => (72.0, ramp(t, from_ms, 5_000, 97.0, 86.0)),
    };
    let round = |v: f64| (v * 10.0).round() / 10.0;
    (round(hr + hr_noise), round((spo2 + spo2_noise).min(100.0)))
}

fn render(segments: &[Segment], vitals: VitalsProfile, seed: u64) -> Vec<SensorReading> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: u64 = segments.iter().map(|s| s.duration_ms).sum();
    let mut readings = Vec::with_capacity((total / IMU_PERIOD_MS * 2 + total / VITALS_PERIOD_MS * 2) as usize);
    let noise = |rng: &mut ChaCha8Rng| rng.random_range(-IMU_NOISE..=IMU_NOISE);

    let mut seg_start: u64 = 0;
    for seg in segments {
        let mut t = seg_start.next_multiple_of(IMU_PERIOD_MS);
        while t < seg_start + seg.duration_ms {
            let k = (t - seg_start) / IMU_PERIOD_MS;
            let a = seg.accel(k);
            let a = Vec3::new(a.x + noise(&mut rng), a.y + noise(&mut rng), a.z + noise(&mut rng));
            let round = |v: f64| (v * 1000.0).round() / 1000.0;
            let a = Vec3::new(round(a.x), round(a.y), round(a.z));
            readings.push(SensorReading::new(
                t,
                WRISTBAND_ID,
                SensorType::Wristband,
                Payload::Imu {
                    accel: a,
                    gyro: Vec3::default(),
                },
            ));
            if seg.in_living_room {
                readings.push(SensorReading::new(
                    t,
                    MOTION_ID,
                    SensorType::Motion,
                    Payload::Imu {
                        accel: a,
                        gyro: Vec3::default(),
                    },
                ));
            }
            if t.is_multiple_of(VITALS_PERIOD_MS) {
                let (hr, spo2) = vitals_at(vitals, t, &mut rng);
                readings.push(SensorReading::new(
                    t,
                    WRISTBAND_ID,
                    SensorType::Wristband,
                    Payload::Vitals {
                        heart_rate: Some(hr),
                        spo2: Some(spo2),
                    },
                ));
                if seg.in_living_room {
                    readings.push(SensorReading::new(
                        t,
                        CAMERA_ID,
                        SensorType::Camera,
                        Payload::PostureEstimate {
                            posture: seg.posture(),
                            confidence: 0.85,
                        },
                    ));
                }
            }
            t += IMU_PERIOD_MS;
        }
        seg_start += seg.duration_ms;
    }
    readings
}

/// Deterministic synthetic trace for `kind`, `duration_s` long.
pub fn generate_scenario(kind: ScenarioKind, duration_s: u64, seed: u64) -> Result<TraceFile> {
    if duration_s == 0 {
        return Err(Error::Config("scenario duration must be positive".into()));
    }
    let total = duration_s * 1_000;
    let mut outages = Vec::new();
    let readings = match kind {
        ScenarioKind::Normal => render(&daily_loop(total), VitalsProfile::Steady, seed),
        ScenarioKind::Fall => {
            let fall_at = (total / 6).clamp(5_000, 30_000).min(total);
            // startle response: HR past 120 within a second of impact
            let vitals = VitalsProfile::Tachycardia {
                from_ms: fall_at,
                rise_ms: 1_000,
                peak: 128.0,
            };
            render(&fall_segments(total, fall_at), vitals, seed)
        }
        ScenarioKind::Hypoxia => {
            let from_ms = (total / 6).clamp(5_000, 20_000).min(total);
            render(&daily_loop(total), VitalsProfile::Desaturation { from_ms }, seed)
        }
        ScenarioKind::Wandering => render(&wandering_segments(total), VitalsProfile::Steady, seed),
        ScenarioKind::Outage => {
            outages.push(Outage {
                start_ms: total / 4,
                end_ms: (total / 2).max(total / 4 + 1),
            });
            render(&daily_loop(total), VitalsProfile::Steady, seed)
        }
    };
    Ok(TraceFile {
        readings,
        rejected_lines: 0,
        outages,
        manual_triggers: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = generate_scenario(ScenarioKind::Fall, 60, 7).unwrap();
        let b = generate_scenario(ScenarioKind::Fall, 60, 7).unwrap();
        let c = generate_scenario(ScenarioKind::Fall, 60, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn readings_are_sorted_and_valid() {
        for kind in ScenarioKind::ALL {
            let t = generate_scenario(kind, 30, 1).unwrap();
            assert!(t.readings.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
            assert!(t.readings.iter().all(|r| r.validate().is_ok()));
            assert!(t.readings.last().unwrap().timestamp < 30_000);
        }
    }

    #[test]
    fn fall_has_spike_then_free_fall() {
        let t = generate_scenario(ScenarioKind::Fall, 180, 1).unwrap();
        let norms: Vec<f64> = t
            .readings
            .iter()
            .filter(|r| r.sensor_id == WRISTBAND_ID)
            .filter_map(|r| r.accel())
            .map(|a| a.norm())
            .collect();
        let spike = norms.iter().position(|&n| n >= 3.0 * GRAVITY).unwrap();
        assert!(norms[spike..].iter().any(|&n| n < 0.5 * GRAVITY));
    }

    #[test]
    fn wandering_has_no_room_sensor() {
        let t = generate_scenario(ScenarioKind::Wandering, 30, 1).unwrap();
        assert!(t.readings.iter().all(|r| r.sensor_type == SensorType::Wristband));
        assert!(t.readings.iter().filter_map(|r| r.accel()).all(|a| a.norm() >= 15.0));
    }

    #[test]
    fn outage_scenario_schedules_link_down() {
        let t = generate_scenario(ScenarioKind::Outage, 120, 1).unwrap();
        assert_eq!(
            t.outages,
            vec![Outage {
                start_ms: 30_000,
                end_ms: 60_000
            }]
        );
    }

    #[test]
    fn zero_duration_rejected() {
        assert!(generate_scenario(ScenarioKind::Normal, 0, 1).is_err());
        assert!("sleep".parse::<ScenarioKind>().is_err());
        assert_eq!("fall".parse::<ScenarioKind>().unwrap(), ScenarioKind::Fall);
    }
}

//! Shared domain types: sensor readings and the activity / posture vocabularies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard gravity in m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorType {
    Wristband,
    Motion,
    Camera,
    Door,
    Bed,
}

impl SensorType {
    pub const ALL: [SensorType; 5] = [
        SensorType::Wristband,
        SensorType::Motion,
        SensorType::Camera,
        SensorType::Door,
        SensorType::Bed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorType::Wristband => "wristband",
            SensorType::Motion => "motion",
            SensorType::Camera => "camera",
            SensorType::Door => "door",
            SensorType::Bed => "bed",
        }
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SensorType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown sensor type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posture {
    Standing,
    Sitting,
    Lying,
    Falling,
    Unknown,
}

impl Posture {
    pub fn as_str(self) -> &'static str {
        match self {
            Posture::Standing => "standing",
            Posture::Sitting => "sitting",
            Posture::Lying => "lying",
            Posture::Falling => "falling",
            Posture::Unknown => "unknown",
        }
    }

    /// Upright postures a fall transitions out of.
    pub fn is_upright(self) -> bool {
        matches!(self, Posture::Standing | Posture::Sitting)
    }

    pub fn is_down(self) -> bool {
        matches!(self, Posture::Lying | Posture::Falling)
    }
}

impl fmt::Display for Posture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Posture {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            Posture::Standing,
            Posture::Sitting,
            Posture::Lying,
            Posture::Falling,
            Posture::Unknown,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| format!("unknown posture `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Stationary,
    Sitting,
    Walking,
    Running,
    Falling,
    Lying,
}

impl Activity {
    pub const ALL: [Activity; 6] = [
        Activity::Stationary,
        Activity::Sitting,
        Activity::Walking,
        Activity::Running,
        Activity::Falling,
        Activity::Lying,
    ];
}

/// Plain 3-vector used for accelerometer and gyroscope samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn mean(samples: &[Vec3]) -> Option<Vec3> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let sum = samples.iter().fold(Vec3::default(), |acc, v| {
            Vec3::new(acc.x + v.x, acc.y + v.y, acc.z + v.z)
        });
        Some(Vec3::new(sum.x / n, sum.y / n, sum.z / n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Imu { accel: Vec3, gyro: Vec3 },
    Vitals { heart_rate: Option<f64>, spo2: Option<f64> },
    PostureEstimate { posture: Posture, confidence: f64 },
    DoorEvent { opened: bool },
    BedPresence { present: bool },
}

impl Payload {
    fn tag(&self) -> &'static str {
        match self {
            Payload::Imu { .. } => "imu",
            Payload::Vitals { .. } => "vitals",
            Payload::PostureEstimate { .. } => "posture_estimate",
            Payload::DoorEvent { .. } => "door_event",
            Payload::BedPresence { .. } => "bed_presence",
        }
    }
}

/// One timestamped measurement from one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    /// Milliseconds since trace epoch.
    pub timestamp: u64,
    pub sensor_id: String,
    pub sensor_type: SensorType,
    pub payload: Payload,
}

impl SensorReading {
    pub fn new(timestamp: u64, sensor_id: impl Into<String>, sensor_type: SensorType, payload: Payload) -> Self {
        Self {
            timestamp,
            sensor_id: sensor_id.into(),
            sensor_type,
            payload,
        }
    }

    /// Checks that the payload kind is one the sensor type can produce and
    /// that numeric fields are finite.
    pub fn validate(&self) -> Result<()> {
        let consistent = matches!(
            (self.sensor_type, &self.payload),
            (SensorType::Wristband, Payload::Imu { .. })
                | (SensorType::Wristband, Payload::Vitals { .. })
                | (SensorType::Motion, Payload::Imu { .. })
                | (SensorType::Camera, Payload::PostureEstimate { .. })
                | (SensorType::Door, Payload::DoorEvent { .. })
                | (SensorType::Bed, Payload::BedPresence { .. })
        );
        if !consistent {
            return Err(self.reject(format!(
                "{} sensor cannot carry a {} payload",
                self.sensor_type,
                self.payload.tag()
            )));
        }
        let finite = match &self.payload {
            Payload::Imu { accel, gyro } => [accel.x, accel.y, accel.z, gyro.x, gyro.y, gyro.z]
                .iter()
                .all(|v| v.is_finite()),
            Payload::Vitals { heart_rate, spo2 } => {
                heart_rate.is_none_or(|v| v.is_finite() && v >= 0.0)
                    && spo2.is_none_or(|v| v.is_finite() && (0.0..=100.0).contains(&v))
            }
            Payload::PostureEstimate { confidence, .. } => (0.0..=1.0).contains(confidence),
            _ => true,
        };
        if !finite {
            return Err(self.reject("payload value out of range".to_string()));
        }
        Ok(())
    }

    fn reject(&self, reason: String) -> Error {
        Error::RejectedReading {
            sensor_id: self.sensor_id.clone(),
            reason,
        }
    }

    pub fn accel(&self) -> Option<Vec3> {
        match self.payload {
            Payload::Imu { accel, .. } => Some(accel),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn camera_with_imu_payload_is_rejected() {
        let r = SensorReading::new(
            0,
            "cam1",
            SensorType::Camera,
            Payload::Imu {
                accel: Vec3::new(0.0, 0.0, GRAVITY),
                gyro: Vec3::default(),
            },
        );
        assert!(matches!(r.validate(), Err(Error::RejectedReading { .. })));
    }

    #[test]
    fn wristband_accepts_both_payload_kinds() {
        let imu = SensorReading::new(
            0,
            "wb",
            SensorType::Wristband,
            Payload::Imu {
                accel: Vec3::default(),
                gyro: Vec3::default(),
            },
        );
        let vitals = SensorReading::new(
            0,
            "wb",
            SensorType::Wristband,
            Payload::Vitals {
                heart_rate: Some(70.0),
                spo2: None,
            },
        );
        assert!(imu.validate().is_ok());
        assert!(vitals.validate().is_ok());
    }

    #[test]
    fn sensor_type_round_trips_through_str() {
        for t in SensorType::ALL {
            assert_eq!(t.as_str().parse::<SensorType>().unwrap(), t);
        }
        assert!("lidar".parse::<SensorType>().is_err());
    }
}

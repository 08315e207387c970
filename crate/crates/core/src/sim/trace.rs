//! Text trace format, one reading per line:
//!
//! ```text
//! # comment / header
//! # outage=START_MS-END_MS
//! # manual=T_MS
//! t_ms,sensor_id,sensor_type,key=value;key=value;...
//! ```
//!
//! Payload keys: imu `ax,ay,az,gx,gy,gz`; vitals `hr,spo2`; camera
//! `posture,conf`; door `opened` (0/1); bed `present` (0/1).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::config::Outage;
use crate::types::{Payload, Posture, SensorReading, SensorType, Vec3};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceFile {
    pub readings: Vec<SensorReading>,
    /// Lines skipped because their sensor type is unknown.
    pub rejected_lines: usize,
    pub outages: Vec<Outage>,
    pub manual_triggers: Vec<u64>,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_directive(body: &str, line: usize, trace: &mut TraceFile) -> Result<()> {
    let Some((key, value)) = body.trim().split_once('=') else {
        return Ok(());
    };
    match key.trim() {
        "outage" => {
            let (a, b) = value
                .split_once('-')
                .ok_or_else(|| parse_err(line, "outage directive must be START-END"))?;
            let start_ms = a.trim().parse().map_err(|_| parse_err(line, "bad outage start"))?;
            let end_ms = b.trim().parse().map_err(|_| parse_err(line, "bad outage end"))?;
            trace.outages.push(Outage { start_ms, end_ms });
        }
        "manual" => {
            let t = value
                .trim()
                .parse()
                .map_err(|_| parse_err(line, "bad manual trigger time"))?;
            trace.manual_triggers.push(t);
        }
        _ => {}
    }
    Ok(())
}

fn parse_payload(sensor_type: SensorType, fields: &str, line: usize) -> Result<Payload> {
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for part in fields.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("payload field `{part}` is not key=value")))?;
        kv.insert(k.trim(), v.trim());
    }
    let num = |k: &str| -> Result<Option<f64>> {
        kv.get(k)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| parse_err(line, format!("`{k}` is not a number")))
            })
            .transpose()
    };
    let req = |k: &str| -> Result<f64> { num(k)?.ok_or_else(|| parse_err(line, format!("missing `{k}`"))) };
    let flag = |k: &str| -> Result<bool> {
        match kv.get(k).copied() {
            Some("1") => Ok(true),
            Some("0") => Ok(false),
            Some(other) => Err(parse_err(line, format!("`{k}` must be 0 or 1, got `{other}`"))),
            None => Err(parse_err(line, format!("missing `{k}`"))),
        }
    };

    let imu = || -> Result<Payload> {
        Ok(Payload::Imu {
            accel: Vec3::new(req("ax")?, req("ay")?, req("az")?),
            gyro: Vec3::new(
                num("gx")?.unwrap_or(0.0),
                num("gy")?.unwrap_or(0.0),
                num("gz")?.unwrap_or(0.0),
            ),
        })
    };
    match sensor_type {
        SensorType::Wristband if kv.contains_key("ax") => imu(),
        SensorType::Wristband => {
            let heart_rate = num("hr")?;
            let spo2 = num("spo2")?;
            if heart_rate.is_none() && spo2.is_none() {
                return Err(parse_err(line, "wristband line has neither imu nor vitals keys"));
            }
            Ok(Payload::Vitals { heart_rate, spo2 })
        }
        SensorType::Motion => imu(),
        SensorType::Camera => {
            let posture: Posture = kv
                .get("posture")
                .ok_or_else(|| parse_err(line, "missing `posture`"))?
                .parse()
                .map_err(|e: String| parse_err(line, e))?;
            Ok(Payload::PostureEstimate {
                posture,
                confidence: req("conf")?,
            })
        }
        SensorType::Door => Ok(Payload::DoorEvent {
            opened: flag("opened")?,
        }),
        SensorType::Bed => Ok(Payload::BedPresence {
            present: flag("present")?,
        }),
    }
}

/// Parses trace text. Unknown sensor types are skipped and counted; any
/// other malformed line is an error naming its 1-based line number.
pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut trace = TraceFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(body) = content.strip_prefix('#') {
            parse_directive(body, line, &mut trace)?;
            continue;
        }
        let cols: Vec<&str> = content.split(',').collect();
        if cols.len() != 4 {
            return Err(parse_err(line, format!("expected 4 columns, found {}", cols.len())));
        }
        let timestamp: u64 = cols[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad timestamp `{}`", cols[0])))?;
        let sensor_id = cols[1].trim();
        if sensor_id.is_empty() {
            return Err(parse_err(line, "empty sensor id"));
        }
        let Ok(sensor_type) = cols[2].trim().parse::<SensorType>() else {
            trace.rejected_lines += 1;
            continue;
        };
        let payload = parse_payload(sensor_type, cols[3], line)?;
        trace
            .readings
            .push(SensorReading::new(timestamp, sensor_id, sensor_type, payload));
    }
    trace.readings.sort_by_key(|r| r.timestamp);
    Ok(trace)
}

pub fn load_trace(path: &Path) -> Result<TraceFile> {
    parse_trace(&std::fs::read_to_string(path)?)
}

fn format_payload(p: &Payload) -> String {
    match p {
        Payload::Imu { accel, gyro } => format!(
            "ax={};ay={};az={};gx={};gy={};gz={}",
            accel.x, accel.y, accel.z, gyro.x, gyro.y, gyro.z
        ),
        Payload::Vitals { heart_rate, spo2 } => {
            let mut parts = Vec::new();
            if let Some(hr) = heart_rate {
                parts.push(format!("hr={hr}"));
            }
            if let Some(s) = spo2 {
                parts.push(format!("spo2={s}"));
            }
            parts.join(";")
        }
        Payload::PostureEstimate { posture, confidence } => format!("posture={posture};conf={confidence}"),
        Payload::DoorEvent { opened } => format!("opened={}", u8::from(*opened)),
        Payload::BedPresence { present } => format!("present={}", u8::from(*present)),
    }
}

pub fn format_reading(r: &SensorReading) -> String {
    format!(
        "{},{},{},{}",
        r.timestamp,
        r.sensor_id,
        r.sensor_type,
        format_payload(&r.payload)
    )
}

/// Renders a trace; `header` lines are written as `#` comments.
pub fn write_trace(trace: &TraceFile, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for o in &trace.outages {
        let _ = writeln!(out, "# outage={}-{}", o.start_ms, o.end_ms);
    }
    for t in &trace.manual_triggers {
        let _ = writeln!(out, "# manual={t}");
    }
    for r in &trace.readings {
        out.push_str(&format_reading(r));
        out.push('\n');
    }
    out
}

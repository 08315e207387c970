//! Time alignment: buffers readings per sensor type and cuts fixed-size
//! fusion windows that advance in discrete hops.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{SensorReading, SensorType};

pub const DEFAULT_WINDOW_MS: u64 = 3_000;
pub const DEFAULT_HOP_MS: u64 = 1_000;
pub const DEFAULT_TOLERANCE_MS: u64 = 100;
pub const DEFAULT_BUFFER_PER_TYPE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub window_ms: u64,
    pub hop_ms: u64,
    pub tolerance_ms: u64,
    pub buffer_per_type: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window_ms: DEFAULT_WINDOW_MS,
            hop_ms: DEFAULT_HOP_MS,
            tolerance_ms: DEFAULT_TOLERANCE_MS,
            buffer_per_type: DEFAULT_BUFFER_PER_TYPE,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_ms == 0 || self.hop_ms == 0 {
            return Err(Error::Config("window and hop must be positive".into()));
        }
        if self.buffer_per_type == 0 {
            return Err(Error::Config("buffer_per_type must be positive".into()));
        }
        Ok(())
    }
}

/// Readings aligned to one `[window_start, window_end]` slice, grouped by type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionWindow {
    pub window_start: u64,
    pub window_end: u64,
    pub readings_by_type: BTreeMap<SensorType, Vec<SensorReading>>,
}

impl FusionWindow {
    pub fn empty(window_start: u64, window_end: u64) -> Self {
        Self {
            window_start,
            window_end,
            readings_by_type: BTreeMap::new(),
        }
    }

    pub fn readings(&self, sensor_type: SensorType) -> &[SensorReading] {
        self.readings_by_type
            .get(&sensor_type)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.readings_by_type.values().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.readings_by_type.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowStats {
    pub accepted: u64,
    pub rejected: u64,
    pub overflow_dropped: u64,
    pub expired: u64,
}

/// Single-writer reading buffer owned by one pipeline.
#[derive(Debug, Clone)]
pub struct WindowManager {
    config: WindowConfig,
    buffers: BTreeMap<SensorType, VecDeque<SensorReading>>,
    last_end: Option<u64>,
    last_advance: u64,
    stats: WindowStats,
}

impl WindowManager {
    pub fn new(config: WindowConfig) -> Self {
        Self {
            config,
            buffers: BTreeMap::new(),
            last_end: None,
            last_advance: 0,
            stats: WindowStats::default(),
        }
    }

    pub fn config(&self) -> &WindowConfig {
        &self.config
    }

    pub fn stats(&self) -> WindowStats {
        self.stats
    }

    pub fn buffered(&self) -> usize {
        self.buffers.values().map(VecDeque::len).sum()
    }

    pub fn last_window_end(&self) -> Option<u64> {
        self.last_end
    }

    /// Stores a reading, keeping each per-type buffer sorted by timestamp.
    ///
    /// Malformed readings are counted and returned as an error; the buffer is
    /// left untouched.
    pub fn ingest(&mut self, reading: SensorReading) -> Result<usize> {
        if let Err(e) = reading.validate() {
            self.stats.rejected += 1;
            return Err(e);
        }
        let buf = self.buffers.entry(reading.sensor_type).or_default();
        let pos = if buf.back().is_none_or(|b| b.timestamp <= reading.timestamp) {
            buf.len()
        } else {
            buf.partition_point(|r| r.timestamp <= reading.timestamp)
        };
        buf.insert(pos, reading);
        if buf.len() > self.config.buffer_per_type {
            buf.pop_front();
            self.stats.overflow_dropped += 1;
        }
        self.stats.accepted += 1;
        Ok(self.buffered())
    }

    /// Emits the next window once a full hop has elapsed since the previous one.
    ///
    /// The first window ends at `now` (which must be at least one window
    /// long); later windows end exactly one hop after their predecessor, so a
    /// caller that falls behind receives one window per call until caught up.
    pub fn advance(&mut self, now: u64) -> Option<FusionWindow> {
        debug_assert!(now >= self.last_advance, "advance time went backwards");
        self.last_advance = self.last_advance.max(now);

        let end = match self.last_end {
            None if now >= self.config.window_ms => now,
            None => return None,
            Some(prev) if now >= prev + self.config.hop_ms => prev + self.config.hop_ms,
            Some(_) => return None,
        };
        self.last_end = Some(end);
        Some(self.cut(end))
    }

    fn cut(&mut self, end: u64) -> FusionWindow {
        let start = end - self.config.window_ms;
        let tol = self.config.tolerance_ms;
        let lo = start.saturating_sub(tol);
        let hi = end + tol;
        // readings before `start - tol` can never belong to a later window
        let expire_before = start as i128 - tol as i128;

        let mut window = FusionWindow::empty(start, end);
        for (&sensor_type, buf) in self.buffers.iter_mut() {
            while buf.front().is_some_and(|r| (r.timestamp as i128) < expire_before) {
                buf.pop_front();
                self.stats.expired += 1;
            }
            let members: Vec<SensorReading> = buf
                .iter()
                .take_while(|r| r.timestamp <= hi)
                .filter(|r| r.timestamp >= lo)
                .cloned()
                .collect();
            if !members.is_empty() {
                window.readings_by_type.insert(sensor_type, members);
            }
        }
        window
    }
}

impl Default for WindowManager {
    fn default() -> Self {
        Self::new(WindowConfig::default())
    }
}

//! Edge-gateway pipeline for in-home elderly monitoring.
//!
//! Sensor readings flow through a fixed chain of stages:
//!
//! 1. [`window`] buffers readings and emits time-aligned fusion windows.
//! 2. [`fusion`] turns a window into a [`fusion::FusionResult`].
//! 3. [`inference`] runs rule-based fall, health and behavior assessors.
//! 4. [`risk`] scores the four risk dimensions and picks an alert level.
//! 5. [`escalation`] plans and tracks family / doctor / volunteer notifications.
//! 6. [`uplink`] ships summaries to the cloud with offline store-and-forward.
//!
//! [`sim`] drives the whole chain over recorded or synthetic traces in
//! simulated time.

pub mod error;
pub mod escalation;
pub mod fusion;
pub mod inference;
pub mod risk;
pub mod sim;
pub mod types;
pub mod uplink;
pub mod window;

pub use error::{Error, Result};
pub use types::{Activity, Payload, Posture, SensorReading, SensorType, Vec3};

use std::collections::BTreeSet;

use proptest::prelude::*;

use edgecare::escalation::{Channel, DeliveryStatus};
use edgecare::fusion::{anomaly_score, compute_confidence, fuse_scalar, motion_intensity, AnomalyFlag, CONFIDENCE_CAP};
use edgecare::risk::{determine_level, AlertThresholds};
use edgecare::sim::{self, Outage, ScenarioKind, SimConfig, TraceFile};
use edgecare::uplink::{Publish, TopicKind, Uplink};
use edgecare::window::{WindowConfig, WindowManager};
use edgecare::{Payload, Posture, SensorReading, SensorType, Vec3};

fn vec3() -> impl Strategy<Value = Vec3> {
    (-40.0..40.0f64, -40.0..40.0f64, -40.0..40.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn reading() -> impl Strategy<Value = SensorReading> {
    let ts = 0u64..60_000;
    prop_oneof![
        (ts.clone(), vec3(), vec3()).prop_map(|(t, accel, gyro)| {
            SensorReading::new(t, "wb", SensorType::Wristband, Payload::Imu { accel, gyro })
        }),
        (
            ts.clone(),
            proptest::option::of(30.0..180.0f64),
            proptest::option::of(70.0..100.0f64)
        )
            .prop_filter("vitals need a value", |(_, hr, spo2)| hr.is_some() || spo2.is_some())
            .prop_map(|(t, heart_rate, spo2)| {
                SensorReading::new(t, "wb", SensorType::Wristband, Payload::Vitals { heart_rate, spo2 })
            }),
        (ts.clone(), vec3()).prop_map(|(t, accel)| {
            SensorReading::new(
                t,
                "motion-living",
                SensorType::Motion,
                Payload::Imu {
                    accel,
                    gyro: Vec3::default(),
                },
            )
        }),
        (ts.clone(), 0usize..4, 0.0..=1.0f64).prop_map(|(t, p, confidence)| {
            let posture = [Posture::Standing, Posture::Sitting, Posture::Lying, Posture::Unknown][p];
            SensorReading::new(
                t,
                "cam",
                SensorType::Camera,
                Payload::PostureEstimate { posture, confidence },
            )
        }),
        (ts.clone(), any::<bool>()).prop_map(|(t, opened)| SensorReading::new(
            t,
            "door-front",
            SensorType::Door,
            Payload::DoorEvent { opened }
        )),
        (ts, any::<bool>()).prop_map(|(t, present)| SensorReading::new(
            t,
            "bed",
            SensorType::Bed,
            Payload::BedPresence { present }
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn window_members_lie_within_tolerance(
        mut readings in proptest::collection::vec(reading(), 0..300),
        window_ms in 1_000u64..5_000,
        hop_ms in 200u64..2_000,
        tolerance_ms in 0u64..300,
    ) {
        readings.sort_by_key(|r| r.timestamp);
        let cfg = WindowConfig { window_ms, hop_ms, tolerance_ms, buffer_per_type: 10_000 };
        let mut wm = WindowManager::new(cfg);
        let mut next = 0;
        let mut now = 0;
        while now <= 62_000 {
            while next < readings.len() && readings[next].timestamp <= now {
                wm.ingest(readings[next].clone()).unwrap();
                next += 1;
            }
            while let Some(w) = wm.advance(now) {
                prop_assert_eq!(w.window_end - w.window_start, window_ms);
                for (ty, members) in &w.readings_by_type {
                    for r in members {
                        prop_assert_eq!(r.sensor_type, *ty);
                        prop_assert!(r.timestamp + tolerance_ms >= w.window_start);
                        prop_assert!(r.timestamp <= w.window_end + tolerance_ms);
                    }
                    prop_assert!(members.windows(2).all(|p| p[0].timestamp <= p[1].timestamp));
                }
            }
            now += 100;
        }
    }

    #[test]
    fn buffer_never_exceeds_capacity(readings in proptest::collection::vec(reading(), 0..400), cap in 1usize..40) {
        let cfg = WindowConfig { buffer_per_type: cap, ..WindowConfig::default() };
        let mut wm = WindowManager::new(cfg);
        for r in readings {
            let total = wm.ingest(r).unwrap();
            prop_assert!(total <= cap * SensorType::ALL.len());
        }
        let s = wm.stats();
        prop_assert_eq!(s.accepted as usize, wm.buffered() + s.overflow_dropped as usize);
    }

    #[test]
    fn fused_value_between_extremes(m in proptest::collection::vec((-500.0..500.0f64, 0.01..10.0f64), 1..12)) {
        let v = fuse_scalar(&m).unwrap();
        let lo = m.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = m.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo && v <= hi);
    }

    #[test]
    fn confidence_is_capped_and_monotone(n in 0usize..100) {
        let c = compute_confidence(n);
        prop_assert!(c <= CONFIDENCE_CAP);
        prop_assert!(compute_confidence(n + 1) >= c);
    }

    #[test]
    fn intensity_is_clipped(series in proptest::collection::vec(vec3(), 0..50)) {
        let i = motion_intensity(&series);
        prop_assert!(i.raw >= 0.0);
        prop_assert!((0.0..=1.0).contains(&i.clipped));
        prop_assert_eq!(i.clipped, i.raw.min(1.0));
    }

    #[test]
    fn anomaly_score_at_most_one(hr in any::<bool>(), spo2 in any::<bool>(), motion in any::<bool>()) {
        let mut flags = BTreeSet::new();
        if hr { flags.insert(AnomalyFlag::HeartRate); }
        if spo2 { flags.insert(AnomalyFlag::Spo2); }
        if motion { flags.insert(AnomalyFlag::Motion); }
        let s = anomaly_score(&flags);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn alert_level_monotone_in_score(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let t = AlertThresholds::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(determine_level(lo, &t) <= determine_level(hi, &t));
    }

    #[test]
    fn delivery_status_never_moves_backwards(steps in proptest::collection::vec(0usize..7, 0..10), call in any::<bool>()) {
        use DeliveryStatus::*;
        let all = [Pending, Delivered, Read, Ringing, Answered, Voicemail, Failed];
        let channel = if call { Channel::Call } else { Channel::Sms };
        let mut status = DeliveryStatus::initial(channel);
        let mut seen = vec![status];
        for i in steps {
            let to = all[i];
            if status.can_transition(to, channel) {
                prop_assert!(!seen.contains(&to), "{:?} revisited", to);
                status = to;
                seen.push(to);
            }
        }
        prop_assert!(seen.len() <= 3);
    }

    #[test]
    fn uplink_sequence_and_fifo_eviction(ops in proptest::collection::vec(0u8..10, 0..300), cap in 1usize..20) {
        let mut up = Uplink::with_capacity("gw1", 0, cap);
        let mut cloud: Vec<u64> = Vec::new();
        let mut evicted: Vec<u64> = Vec::new();
        let mut published = 0u64;
        for (t, op) in ops.into_iter().enumerate() {
            let now = t as u64 * 10;
            match op {
                0 => up.set_link_down(),
                1 => cloud.extend(up.replay_on_reconnect().into_iter().map(|e| e.sequence)),
                _ => {
                    let env = up.envelope(TopicKind::Data, serde_json::json!({ "t": now }), now);
                    published += 1;
                    match up.publish(env) {
                        Publish::Sent(e) => cloud.push(e.sequence),
                        Publish::Buffered { evicted: Some(e) } => evicted.push(e.sequence),
                        Publish::Buffered { evicted: None } => {}
                    }
                    prop_assert!(up.buffer().len() <= cap);
                }
            }
        }
        cloud.extend(up.replay_on_reconnect().into_iter().map(|e| e.sequence));
        prop_assert!(cloud.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(evicted.windows(2).all(|p| p[0] < p[1]));
        prop_assert_eq!(cloud.len() as u64 + evicted.len() as u64, published);
        prop_assert_eq!(evicted.len() as u64, up.buffer().dropped());
        prop_assert!(sim::engine::check_cloud_sequence(&cloud, published, evicted.len() as u64));
    }

    #[test]
    fn trace_round_trip(
        mut readings in proptest::collection::vec(reading(), 0..60),
        outages in proptest::collection::vec((0u64..10_000, 1u64..10_000), 0..3),
        manual in proptest::collection::vec(0u64..60_000, 0..3),
    ) {
        readings.sort_by_key(|r| r.timestamp);
        let trace = TraceFile {
            readings,
            rejected_lines: 0,
            outages: outages.into_iter().map(|(s, d)| Outage { start_ms: s, end_ms: s + d }).collect(),
            manual_triggers: manual,
        };
        let text = sim::write_trace(&trace, &["generated".to_string()]);
        prop_assert_eq!(sim::parse_trace(&text).unwrap(), trace);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_invariants(
        kind in 0usize..ScenarioKind::ALL.len(),
        seed in 0u64..1_000,
        manual in proptest::collection::vec(3_000u64..60_000, 0..3),
        outage in proptest::option::of((5_000u64..40_000, 1_000u64..20_000)),
    ) {
        let mut trace = sim::generate_scenario(ScenarioKind::ALL[kind], 60, seed).unwrap();
        trace.manual_triggers.extend(manual);
        if let Some((start, len)) = outage {
            trace.outages.push(Outage { start_ms: start, end_ms: start + len });
        }
        let cfg = SimConfig { seed, ..SimConfig::default() };
        let a = sim::run(&cfg, &trace).unwrap();
        let m = &a.metrics;
        prop_assert_eq!(m.event_order_violations, 0);
        prop_assert!(m.e2e_identity_ok);
        prop_assert!(m.uplink.cloud_sequence_ok);
        prop_assert_eq!(m.uplink.cloud_received + m.uplink.dropped, m.uplink.published);
        for rec in &a.alerts {
            prop_assert_eq!(rec.end_to_end_ms, rec.stages.sum());
        }
        let b = sim::run(&cfg, &trace).unwrap();
        prop_assert_eq!(&a.logs, &b.logs);
        prop_assert_eq!(&a.metrics, &b.metrics);
    }
}

//! Buffers three seconds of wristband, motion and camera data and fuses the
//! resulting window.

use edgecare::fusion::{fuse_window, FusionParams, VitalsHistory};
use edgecare::window::WindowManager;
use edgecare::{Payload, Posture, SensorReading, SensorType, Vec3};

fn main() -> edgecare::Result<()> {
    let mut wm = WindowManager::default();
    let mut params = FusionParams::default();
    params.rooms.insert("motion-living".into(), "living_room".into());

    for i in 0..=30u64 {
        let t = i * 100;
        // gentle arm swing while walking
        let z = if i % 2 == 0 { 8.9 } else { 10.7 };
        let accel = Vec3::new(0.3, 0.2, z);
        wm.ingest(SensorReading::new(
            t,
            "wristband-1",
            SensorType::Wristband,
            Payload::Imu {
                accel,
                gyro: Vec3::default(),
            },
        ))?;
        wm.ingest(SensorReading::new(
            t,
            "motion-living",
            SensorType::Motion,
            Payload::Imu {
                accel,
                gyro: Vec3::default(),
            },
        ))?;
        if i % 10 == 0 {
            let vitals = Payload::Vitals {
                heart_rate: Some(78.0),
                spo2: Some(97.0),
            };
            wm.ingest(SensorReading::new(t, "wristband-1", SensorType::Wristband, vitals))?;
            let estimate = Payload::PostureEstimate {
                posture: Posture::Standing,
                confidence: 0.85,
            };
            wm.ingest(SensorReading::new(t, "camera-living", SensorType::Camera, estimate))?;
        }
    }

    let window = wm.advance(3_000).expect("first window is due at 3 s");
    println!(
        "window [{}, {}] ms with {} readings",
        window.window_start,
        window.window_end,
        window.len()
    );
    let result = fuse_window(&window, &params, &VitalsHistory::new());
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

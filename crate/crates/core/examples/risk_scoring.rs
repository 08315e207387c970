//! Drives window, fusion, inference and risk stages by hand over a synthetic
//! fall trace and prints each change of alert level.

use edgecare::fusion::{fuse_window, VitalsHistory};
use edgecare::inference::{infer, FusionHistory, QuietHours};
use edgecare::risk::{AlertLevel, RiskAssessor, RiskConfig};
use edgecare::sim::{generate_scenario, ScenarioKind, SimConfig};
use edgecare::window::WindowManager;

fn main() -> edgecare::Result<()> {
    let cfg = SimConfig::default();
    let trace = generate_scenario(ScenarioKind::Fall, 60, 1)?;

    let mut wm = WindowManager::new(cfg.window);
    let mut vitals = VitalsHistory::new();
    let mut history = FusionHistory::new();
    let mut assessor = RiskAssessor::new(RiskConfig::default());
    let day_start = 9 * 3_600_000;

    let mut last_level = AlertLevel::None;
    let mut readings = trace.readings.iter().peekable();
    for now in (cfg.window.window_ms..=60_000).step_by(cfg.window.hop_ms as usize) {
        while let Some(r) = readings.next_if(|r| r.timestamp <= now + cfg.window.tolerance_ms) {
            wm.ingest(r.clone())?;
        }
        let Some(window) = wm.advance(now) else { continue };
        let fused = fuse_window(&window, &cfg.fusion, &vitals);
        vitals.record(&fused);
        history.push(fused.clone())?;
        let bundle = infer(&history, day_start + now, QuietHours::default());
        let assessment = assessor.assess(&bundle, &fused, &history);
        if assessment.level != last_level {
            last_level = assessment.level;
            println!(
                "t={:>6} ms  {:<7} score {:.3}  activity {:?}  posture {:?}  P(fall) {:.2}",
                now,
                assessment.level,
                assessment.adjusted_score,
                fused.activity,
                fused.posture,
                bundle.fall_probability
            );
        }
    }
    Ok(())
}

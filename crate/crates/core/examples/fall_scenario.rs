//! Generates a fall scenario, replays it through the simulator and prints
//! the report plus each alert's latency breakdown.

use edgecare::sim::{self, ScenarioKind, SimConfig};

fn main() -> edgecare::Result<()> {
    let trace = sim::generate_scenario(ScenarioKind::Fall, 120, 7)?;
    let cfg = SimConfig {
        seed: 7,
        ..SimConfig::default()
    };
    let out = sim::run(&cfg, &trace)?;

    print!("{}", sim::render_report(&out.metrics));
    println!();
    for rec in &out.alerts {
        let s = &rec.stages;
        println!(
            "{} {:<6} e2e {:>4} ms = ble {} + align {} + fusion {} + inference {} + risk {} + dispatch {} + channel {}",
            rec.alert.alert_id,
            rec.alert.level,
            rec.end_to_end_ms,
            s.ble,
            s.alignment,
            s.fusion,
            s.inference,
            s.risk,
            s.dispatch,
            s.channel
        );
    }
    Ok(())
}

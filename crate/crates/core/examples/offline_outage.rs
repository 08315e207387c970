//! Runs a normal day-segment with a cloud outage and a panic-button press
//! during it; alerts still go out locally while uplink traffic is buffered.

use edgecare::sim::{self, Outage, ScenarioKind, SimConfig};

fn main() -> edgecare::Result<()> {
    let mut trace = sim::generate_scenario(ScenarioKind::Normal, 300, 3)?;
    trace.outages.push(Outage {
        start_ms: 60_000,
        end_ms: 180_000,
    });
    trace.manual_triggers.push(120_000);

    let out = sim::run(&SimConfig::default(), &trace)?;
    let u = &out.metrics.uplink;
    println!(
        "uplink: published {}, sent {}, buffered {}, replayed {}, dropped {}, sequence ok: {}",
        u.published, u.sent, u.buffered, u.replayed, u.dropped, u.cloud_sequence_ok
    );
    for rec in &out.alerts {
        println!(
            "{} {} at {} ms, first notification after {:?} ms",
            rec.alert.alert_id, rec.alert.level, rec.alert.created_at, rec.first_notification_ms
        );
    }
    Ok(())
}

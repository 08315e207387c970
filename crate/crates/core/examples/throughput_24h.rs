//! Replays a full 24-hour normal-activity trace and reports wall-clock
//! throughput. Build with `--release` for representative numbers.

use edgecare::sim::{self, ScenarioKind, SimConfig};

fn main() -> edgecare::Result<()> {
    // three extra seconds so the first 3 s window plus 86 399 hops fit
    let trace = sim::generate_scenario(ScenarioKind::Normal, 86_400 + 3, 0)?;
    println!("{} readings generated", trace.readings.len());
    let out = sim::run(&SimConfig::default(), &trace)?;
    let secs = out.host_elapsed.as_secs_f64();
    println!(
        "{} windows in {:.2} s ({:.0} windows/s), {} alerts",
        out.metrics.windows,
        secs,
        out.metrics.windows as f64 / secs,
        out.metrics.alerts.total()
    );
    Ok(())
}

//! Prints the default configuration as TOML, loads a partial override, and
//! round-trips a short generated trace through the text format.

use edgecare::sim::{self, ScenarioKind, SimConfig};

fn main() -> edgecare::Result<()> {
    let defaults = SimConfig::default();
    println!("{}", defaults.to_toml_string());

    let custom = SimConfig::from_toml_str(
        r#"
        seed = 42
        clock_anchor = "23:30"
        manual_triggers = [15000]

        [risk.thresholds]
        yellow = 0.35
        "#,
    )?;
    println!(
        "seed {} anchor {} yellow {}",
        custom.seed, custom.clock_anchor, custom.risk.thresholds.yellow
    );

    let trace = sim::generate_scenario(ScenarioKind::Hypoxia, 10, 1)?;
    let text = sim::write_trace(&trace, &["hypoxia sample".to_string()]);
    for line in text.lines().take(6) {
        println!("{line}");
    }
    let parsed = sim::parse_trace(&text)?;
    assert_eq!(parsed, trace);
    println!("{} readings round-tripped", parsed.readings.len());
    Ok(())
}

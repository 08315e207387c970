//! Plans notifications for each alert level, dispatches them and applies
//! delivery receipts to the record store.

use edgecare::escalation::{dispatch, plan_notifications, AlertIssuer, ChannelState, DeliveryStatus, RecordStore};
use edgecare::risk::{AlertLevel, RiskDetail};
use edgecare::sim::SimConfig;

fn main() -> edgecare::Result<()> {
    let cfg = SimConfig::default();
    let params = cfg.escalation.plan_params();
    let mut issuer = AlertIssuer::new(cfg.elder_id.clone(), cfg.escalation.dedup_window_ms);
    let mut store = RecordStore::new();

    for (i, level) in [AlertLevel::Yellow, AlertLevel::Orange, AlertLevel::Red]
        .into_iter()
        .enumerate()
    {
        let now = i as u64 * 120_000;
        let alert = issuer
            .automatic(level, RiskDetail::default(), Some("living_room".into()), now)
            .expect("alerts are two minutes apart");
        let plan = plan_notifications(&alert, &cfg.contacts, &params)?;
        println!("{level}: {} notifications", plan.entries.len());
        for e in &plan.entries {
            println!("  {:<18} {:<10?} {}", e.recipient, e.role, e.channel);
        }
        for record in dispatch(&alert, &plan, ChannelState::Open, now) {
            store.insert(record)?;
        }
    }

    let manual = issuer.manual_trigger(400_000, None);
    println!(
        "manual press -> {} ({} recipients)",
        manual.level,
        plan_notifications(&manual, &cfg.contacts, &params)?.entries.len()
    );

    let first = store
        .records()
        .next()
        .expect("records were dispatched")
        .record_id
        .clone();
    store.update_status(&first, DeliveryStatus::Delivered, 1_000)?;
    store.update_status(&first, DeliveryStatus::Read, 5_000)?;
    match store.update_status(&first, DeliveryStatus::Pending, 6_000) {
        Ok(_) => println!("unexpected backward transition"),
        Err(e) => println!("rejected: {e}"),
    }
    println!("{} records, {} audit entries", store.len(), store.audit().len());
    Ok(())
}

//! Publishes through a link outage: envelopes are buffered, the oldest are
//! evicted once the buffer is full, and the rest replay in order.

use edgecare::uplink::{Publish, TopicKind, Uplink};

fn main() {
    let mut up = Uplink::with_capacity("gw1", 0, 5);
    let mut cloud = Vec::new();

    for t in 0..12u64 {
        if t == 2 {
            up.set_link_down();
            println!("link down");
        }
        let env = up.envelope(TopicKind::Data, serde_json::json!({ "t": t }), t * 1_000);
        match up.publish(env) {
            Publish::Sent(e) => {
                println!("seq {:>2} sent", e.sequence);
                cloud.push(e.sequence);
            }
            Publish::Buffered { evicted } => match evicted {
                Some(old) => println!("buffered, evicted seq {}", old.sequence),
                None => println!("buffered ({} held)", up.buffer().len()),
            },
        }
    }

    let replay = up.replay_on_reconnect();
    println!("link up, replaying {} envelopes", replay.len());
    cloud.extend(replay.iter().map(|e| e.sequence));
    println!("cloud received {:?}, {} dropped", cloud, up.buffer().dropped());
}

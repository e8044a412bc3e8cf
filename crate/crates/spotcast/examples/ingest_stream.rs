//! Parse a small JSONL stream, detect self-reports, and unify near
//! duplicate posts.
//!
//! ```bash
//! cargo run --example ingest_stream
//! ```

use spotcast::ingest::{dedup_stream, is_self_report, normalize_text, parse_tuple};

fn main() {
    let stream = r#"{"user":"ada","ts":1700000000,"text":"I'm at Blue Bottle w/ 2 others","lang":"en"}
{"user":"ada","ts":1700000300,"text":"I'm at Blue Bottel w/ 2 others","lang":"en"}
{"user":"bob","ts":1700000500,"text":"nice walk by the river","lang":"en","lat":51.5,"lon":-0.12}
{"user":"cyd","ts":1700000900,"text":"lunch! https://4sq.com/abc123","lang":"en"}"#;

    let tuples: Vec<_> = stream.lines().map(|l| parse_tuple(l).expect("valid line")).collect();
    for t in &tuples {
        println!(
            "{} @{} self_report={} text={:?}",
            t.user_id,
            t.timestamp,
            is_self_report(t),
            normalize_text(&t.text).unwrap_or_default()
        );
    }

    let kept = dedup_stream(&tuples, 2);
    println!("\n{} tuples in, {} after dedup (typo variant unified)", tuples.len(), kept.len());
}

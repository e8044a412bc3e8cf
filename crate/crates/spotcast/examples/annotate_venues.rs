//! Extract venue references from posts and resolve them to the 10-way
//! category taxonomy through a directory fixture.
//!
//! ```bash
//! cargo run --example annotate_venues
//! ```

use spotcast::annotate::{annotate_stream, extract_venue_ref, VenueDirectory};
use spotcast::ingest::parse_tuple;

fn main() {
    let stream = r#"{"user":"ada","ts":1700000000,"text":"I'm at Blue Bottle w/ 2 others https://4sq.com/xyz"}
{"user":"bob","ts":1700000100,"text":"I'm at Central Park"}
{"user":"cyd","ts":1700000200,"text":"new tunes on repeat"}"#;
    let tuples: Vec<_> = stream.lines().map(|l| parse_tuple(l).unwrap()).collect();

    for t in &tuples {
        println!("{}: ref = {:?}", t.user_id, extract_venue_ref(t));
    }

    let mut directory =
        VenueDirectory::in_memory(&[("4sq.com/xyz", "food"), ("central park", "outdoors")]);
    let out = annotate_stream(&tuples, &mut directory);
    println!("\nlabeled {}, dropped {}", out.labeled.len(), out.dropped);
    for (t, cat) in &out.labeled {
        println!("  {} -> {}", t.user_id, cat.top_level);
    }
}

//! Regenerate the bundled synthetic fixture: a 1,000-tuple stream with
//! planted geo communities, the venue directory, and the ground truth.
//!
//! ```bash
//! cargo run --example generate_fixture -- crates/spotcast/fixtures
//! ```

use std::path::PathBuf;

use spotcast::synth::{generate, write_fixture, SynthConfig};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    let fixture = generate(&SynthConfig::default());
    write_fixture(&fixture, &dir).expect("writable directory");
    println!(
        "wrote {} tuples, {} venues, {} users to {}",
        fixture.tuples.len(),
        fixture.venues.len(),
        fixture.geo_truth.len(),
        dir.display()
    );
}

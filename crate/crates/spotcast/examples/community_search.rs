//! Run the opinion, language, and temporal community searches over a
//! synthetic stream, then apply the blocking rules.
//!
//! ```bash
//! cargo run --example community_search
//! ```

use spotcast::affect::SentimentLexicon;
use spotcast::community::{
    block_filter, language_search, opinion_search, temporal_search, BlockThresholds,
};
use spotcast::synth::{generate, SynthConfig};

fn main() {
    let fixture = generate(&SynthConfig::default());
    println!("stream: {} tuples, {} users", fixture.tuples.len(), fixture.geo_truth.len());

    let lexicon = SentimentLexicon::builtin();
    let opinions = opinion_search(&fixture.tuples, &lexicon);
    println!("\nopinion communities:");
    for c in &opinions.communities {
        println!("  {:<9} {} users", c.label, c.members.len());
    }

    println!("\nlanguage (continent) communities:");
    for c in language_search(&fixture.tuples) {
        println!(
            "  {:<14} {} users, csl={:.3}",
            c.label,
            c.members.len(),
            c.csl_index.unwrap_or_default()
        );
    }

    println!("\ntemporal (session) communities:");
    let temporal = temporal_search(&fixture.tuples, 2);
    for c in &temporal {
        println!("  {:<9} {} users", c.label, c.members.len());
    }

    let outcome = block_filter(temporal, BlockThresholds::default());
    println!(
        "\nblocking with defaults: {} allowed, {} blocked",
        outcome.allowed.len(),
        outcome.blocked.len()
    );
    for (c, reasons) in &outcome.blocked {
        let codes: Vec<&str> = reasons.iter().map(|r| r.code()).collect();
        println!("  blocked {} -> {:?}", c.key(), codes);
    }
}

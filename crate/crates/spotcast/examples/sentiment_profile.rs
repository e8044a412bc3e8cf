//! Score text sentiment with the bundled lexicon, route it into an
//! opinion class, and build a personality profile from a user's posts.
//!
//! ```bash
//! cargo run --example sentiment_profile
//! ```

use spotcast::affect::{
    classify_opinion, profile, score_text, PersonalityLexicon, SentimentLexicon,
    PERSONALITY_COMPONENTS,
};

fn main() {
    let lexicon = SentimentLexicon::builtin();
    for text in ["what a great awesome day", "awful service, bad coffee", "waiting for the bus"] {
        let r = score_text(text, &lexicon).expect("lexicon loaded");
        println!(
            "{:?} -> magnitude={:.2} score={:+.2} opinion={}",
            text,
            r.magnitude,
            r.score,
            classify_opinion(r).label()
        );
    }

    let posts: Vec<String> = [
        "i love trying new food with friends",
        "so curious about the new gallery downtown",
        "structure and planning keep my week stable",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let p = profile(&posts, &PersonalityLexicon::builtin()).expect("non-empty corpus");
    println!("\ntop personality components:");
    let mut scored: Vec<(&str, f64)> = PERSONALITY_COMPONENTS
        .iter()
        .copied()
        .zip(p.components())
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (name, v) in scored.iter().take(5) {
        println!("  {name:<18} {v:6.1}");
    }
}

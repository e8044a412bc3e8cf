//! Rank candidate venue names against a query with normalized edit
//! distance.
//!
//! ```bash
//! cargo run --example similarity_ranking
//! ```

use spotcast::textsim::{levenshtein, similarity, validate_candidates};

fn main() {
    println!("levenshtein(kitten, sitting) = {}", levenshtein("kitten", "sitting"));
    println!("similarity(kitten, sitting) = {:.3}", similarity("kitten", "sitting").value());

    let candidates = vec![
        ("v1".to_string(), "Blue Bottle Coffee".to_string()),
        ("v2".to_string(), "Blue Bottel Cafe".to_string()),
        ("v3".to_string(), "Red Rooster Diner".to_string()),
        ("v4".to_string(), "blue bottle".to_string()),
    ];
    let ranked = validate_candidates("Blue Bottle", &candidates, 0.3, 3);
    println!("\ntop matches for \"Blue Bottle\":");
    for (id, score) in ranked {
        println!("  {id} score={:.3}", score.value());
    }
}

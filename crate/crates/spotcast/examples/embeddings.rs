//! Train document and word embeddings on a toy corpus and assemble a
//! full feature vector for one tuple.
//!
//! ```bash
//! cargo run --example embeddings
//! ```

use spotcast::affect::{profile, PersonalityLexicon};
use spotcast::embed::{
    assemble_features, embed_text, onehot_hour, onehot_weekday, train_text_embeddings,
    EmbedConfig, EmbedMode, FeatureLayout, Variant,
};

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn main() {
    let corpus: Vec<String> = [
        "i'm at the coffee shop downtown",
        "i'm at the coffee shop downtown",
        "great espresso at the coffee shop",
        "evening run through the park trails",
        "park trails are quiet this evening",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    let cfg = EmbedConfig { dim: 16, epochs: 60, ..EmbedConfig::default() };
    let model = train_text_embeddings(&corpus, &cfg).expect("non-empty corpus");
    println!("vocabulary: {} tokens, {} documents", model.vocab.len(), model.doc_vectors.len());

    let a = embed_text(&model, &corpus[0], EmbedMode::Document);
    let b = embed_text(&model, &corpus[1], EmbedMode::Document);
    let c = embed_text(&model, &corpus[3], EmbedMode::Document);
    println!("cosine(identical docs)   = {:.3}", cosine(&a, &b));
    println!("cosine(unrelated docs)   = {:.3}", cosine(&a, &c));

    let layout = FeatureLayout::default_v1();
    println!("\ndefault V1 layout: {} dims", layout.total());

    let text_vec = embed_text(&model, &corpus[0], Variant::V1.text_mode());
    let personality = profile(&corpus, &PersonalityLexicon::builtin()).expect("corpus");
    let ts = 1_700_000_000;
    let fv = assemble_features(
        Variant::V1,
        &text_vec,
        Some(&personality),
        &onehot_weekday(ts, 0),
        &onehot_hour(ts, 0),
    )
    .expect("consistent dims");
    println!(
        "assembled: text={} personality={} weekday={} hour={}",
        fv.text().len(),
        fv.personality().len(),
        fv.weekday().len(),
        fv.hour().len()
    );
}

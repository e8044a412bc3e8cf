//! Fixed-length feature vectors: document/word text embeddings trained
//! with negative sampling, timestamp one-hots, and the four assembly
//! variants.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affect::PersonalityVector;
use crate::ingest::normalize_text_lossy;
use crate::timeutil::{local_hour, local_weekday};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmbedError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

/// The four input-feature variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// personality + weekday + hour + document embedding
    V1,
    /// personality + weekday + hour + word-average embedding
    V2,
    /// weekday + hour + word-average embedding
    V3,
    /// weekday + hour + document embedding
    V4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::V1, Variant::V2, Variant::V3, Variant::V4];

    pub fn name(self) -> &'static str {
        match self {
            Variant::V1 => "V1",
            Variant::V2 => "V2",
            Variant::V3 => "V3",
            Variant::V4 => "V4",
        }
    }

    pub fn uses_personality(self) -> bool {
        matches!(self, Variant::V1 | Variant::V2)
    }

    pub fn text_mode(self) -> EmbedMode {
        match self {
            Variant::V1 | Variant::V4 => EmbedMode::Document,
            Variant::V2 | Variant::V3 => EmbedMode::WordAverage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedMode {
    Document,
    WordAverage,
}

/// Block layout of an assembled feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub text_dim: usize,
    pub personality_dim: usize,
    pub weekday_dim: usize,
    pub hour_dim: usize,
}

impl FeatureLayout {
    /// The default V1 layout: 56 + 22 + 7 + 24 = 109.
    pub fn default_v1() -> Self {
        FeatureLayout { text_dim: 56, personality_dim: 22, weekday_dim: 7, hour_dim: 24 }
    }

    pub fn total(&self) -> usize {
        self.text_dim + self.personality_dim + self.weekday_dim + self.hour_dim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
    pub variant: Variant,
}

impl FeatureVector {
    pub fn text(&self) -> &[f64] {
        &self.values[..self.layout.text_dim]
    }

    pub fn personality(&self) -> &[f64] {
        let s = self.layout.text_dim;
        &self.values[s..s + self.layout.personality_dim]
    }

    pub fn weekday(&self) -> &[f64] {
        let s = self.layout.text_dim + self.layout.personality_dim;
        &self.values[s..s + self.layout.weekday_dim]
    }

    pub fn hour(&self) -> &[f64] {
        let s = self.layout.text_dim + self.layout.personality_dim + self.layout.weekday_dim;
        &self.values[s..s + self.layout.hour_dim]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub dim: usize,
    pub epochs: usize,
    pub seed: u64,
    pub negative: usize,
    pub window: usize,
    pub learning_rate: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig { dim: 56, epochs: 100, seed: 7, negative: 5, window: 5, learning_rate: 0.05 }
    }
}

/// Trained text embedding model: per-token and per-document vectors of a
/// uniform dimension, plus the shared output layer used for inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextEmbeddingModel {
    pub version: u32,
    pub config: EmbedConfig,
    pub vocab: Vec<String>,
    #[serde(skip)]
    vocab_index: BTreeMap<String, usize>,
    counts: Vec<u64>,
    pub word_vectors: Vec<Vec<f64>>,
    out_vectors: Vec<Vec<f64>>,
    pub doc_vectors: Vec<Vec<f64>>,
    pub loss_history: Vec<f64>,
}

impl TextEmbeddingModel {
    pub fn vocab_id(&self, token: &str) -> Option<usize> {
        self.vocab_index.get(token).copied()
    }

    fn rebuild_index(&mut self) {
        self.vocab_index =
            self.vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let mut m: TextEmbeddingModel = serde_json::from_str(json)?;
        m.rebuild_index();
        Ok(m)
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    normalize_text_lossy(text)
        .split_whitespace()
        .map(|t| t.to_string())
        .collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// cumulative unigram^(3/4) table for negative sampling
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[u64]) -> Self {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = 0.0;
        for &c in counts {
            acc += (c as f64).powf(0.75);
            cumulative.push(acc);
        }
        NegativeTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocab");
        let x: f64 = rng.gen_range(0.0..total);
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

// one positive + k negative logistic updates against the shared output
// layer; returns the loss contribution. `freeze_out` leaves the output
// vectors untouched (used at inference time).
#[allow(clippy::too_many_arguments)]
fn train_pair(
    input: &mut [f64],
    out_vectors: &mut [Vec<f64>],
    target: usize,
    table: &NegativeTable,
    k: usize,
    lr: f64,
    rng: &mut ChaCha8Rng,
    freeze_out: bool,
) -> f64 {
    let dim = input.len();
    let mut grad_input = vec![0.0; dim];
    let mut loss = 0.0;
    let apply = |label: f64, idx: usize, grad_input: &mut [f64], out_vectors: &mut [Vec<f64>]| {
        let o = &mut out_vectors[idx];
        let dot: f64 = input.iter().zip(o.iter()).map(|(a, b)| a * b).sum();
        let p = sigmoid(dot);
        let g = (p - label) * lr;
        for d in 0..dim {
            grad_input[d] += g * o[d];
        }
        if !freeze_out {
            for d in 0..dim {
                o[d] -= g * input[d];
            }
        }
        if label > 0.5 {
            -p.max(1e-10).ln()
        } else {
            -(1.0 - p).min(1.0).max(1e-10).ln()
        }
    };
    loss += apply(1.0, target, &mut grad_input, out_vectors);
    for _ in 0..k {
        let neg = table.sample(rng);
        if neg == target {
            continue;
        }
        loss += apply(0.0, neg, &mut grad_input, out_vectors);
    }
    for d in 0..dim {
        input[d] -= grad_input[d];
    }
    loss
}

/// Train document vectors (predicting each document's tokens against
/// sampled negatives) and skip-gram word vectors in the same loop.
/// Deterministic given the seed.
pub fn train_text_embeddings(
    corpus: &[String],
    config: &EmbedConfig,
) -> Result<TextEmbeddingModel, EmbedError> {
    assert!(config.dim >= 2 && config.epochs >= 1);
    let docs: Vec<Vec<String>> = corpus.iter().map(|t| tokenize(t)).collect();
    if docs.is_empty() || docs.iter().all(|d| d.is_empty()) {
        return Err(EmbedError::EmptyCorpus);
    }

    let mut vocab_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut vocab: Vec<String> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for doc in &docs {
        for token in doc {
            match vocab_index.get(token) {
                Some(&i) => counts[i] += 1,
                None => {
                    vocab_index.insert(token.clone(), vocab.len());
                    vocab.push(token.clone());
                    counts.push(1);
                }
            }
        }
    }
    let doc_ids: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().map(|t| vocab_index[t]).collect())
        .collect();

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| (rng.gen::<f64>() - 0.5) / dim as f64).collect()
    };
    let mut word_vectors: Vec<Vec<f64>> = (0..vocab.len()).map(|_| init(&mut rng)).collect();
    let mut out_vectors: Vec<Vec<f64>> = vec![vec![0.0; dim]; vocab.len()];
    let mut doc_vectors: Vec<Vec<f64>> = (0..docs.len()).map(|_| init(&mut rng)).collect();

    let table = NegativeTable::new(&counts);
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let lr = config.learning_rate
            * (1.0 - epoch as f64 / config.epochs as f64).max(0.02);
        let mut epoch_loss = 0.0;
        let mut updates = 0usize;
        for (d, ids) in doc_ids.iter().enumerate() {
            for (i, &w) in ids.iter().enumerate() {
                epoch_loss += train_pair(
                    &mut doc_vectors[d],
                    &mut out_vectors,
                    w,
                    &table,
                    config.negative,
                    lr,
                    &mut rng,
                    false,
                );
                updates += 1;
                // skip-gram over the surrounding window
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window + 1).min(ids.len());
                for j in lo..hi {
                    if j == i {
                        continue;
                    }
                    let target = ids[j];
                    epoch_loss += train_pair(
                        &mut word_vectors[w],
                        &mut out_vectors,
                        target,
                        &table,
                        config.negative,
                        lr,
                        &mut rng,
                        false,
                    );
                    updates += 1;
                }
            }
        }
        loss_history.push(epoch_loss / updates.max(1) as f64);
    }

    Ok(TextEmbeddingModel {
        version: 1,
        config: config.clone(),
        vocab,
        vocab_index,
        counts,
        word_vectors,
        out_vectors,
        doc_vectors,
        loss_history,
    })
}

const INFERENCE_STEPS: usize = 20;

// stable 64-bit FNV-1a over the token sequence; keys the inference rng so
// identical texts always infer identically
fn token_hash(tokens: &[String]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for t in tokens {
        for b in t.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Embed a text with a trained model.
///
/// Document mode infers a fresh doc vector with the output layer frozen;
/// word-average mode takes the mean of in-vocabulary word vectors (zero
/// vector if none).
pub fn embed_text(model: &TextEmbeddingModel, text: &str, mode: EmbedMode) -> Vec<f64> {
    let tokens = tokenize(text);
    let ids: Vec<usize> = tokens.iter().filter_map(|t| model.vocab_id(t)).collect();
    let dim = model.config.dim;
    match mode {
        EmbedMode::WordAverage => {
            if ids.is_empty() {
                return vec![0.0; dim];
            }
            let mut acc = vec![0.0; dim];
            for &i in &ids {
                for d in 0..dim {
                    acc[d] += model.word_vectors[i][d];
                }
            }
            for v in &mut acc {
                *v /= ids.len() as f64;
            }
            acc
        }
        EmbedMode::Document => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(model.config.seed ^ token_hash(&tokens));
            let mut vec: Vec<f64> =
                (0..dim).map(|_| (rng.gen::<f64>() - 0.5) / dim as f64).collect();
            if ids.is_empty() {
                return vec;
            }
            let table = NegativeTable::new(&model.counts);
            let mut frozen_out = model.out_vectors.clone();
            for step in 0..INFERENCE_STEPS {
                let lr = model.config.learning_rate
                    * (1.0 - step as f64 / INFERENCE_STEPS as f64).max(0.05);
                for &w in &ids {
                    train_pair(
                        &mut vec,
                        &mut frozen_out,
                        w,
                        &table,
                        model.config.negative,
                        lr,
                        &mut rng,
                        true,
                    );
                }
            }
            vec
        }
    }
}

/// Weekday one-hot, index 0 = Monday, using local time.
pub fn onehot_weekday(epoch_secs: i64, utc_offset_secs: i64) -> [f64; 7] {
    let mut v = [0.0; 7];
    v[local_weekday(epoch_secs, utc_offset_secs)] = 1.0;
    v
}

/// Hour-of-day one-hot using local time.
pub fn onehot_hour(epoch_secs: i64, utc_offset_secs: i64) -> [f64; 24] {
    let mut v = [0.0; 24];
    v[local_hour(epoch_secs, utc_offset_secs)] = 1.0;
    v
}

/// Concatenate `[text | personality? | weekday | hour]`, rescaling
/// personality components from 0..100 to 0..1.
pub fn assemble_features(
    variant: Variant,
    text_vec: &[f64],
    personality: Option<&PersonalityVector>,
    weekday: &[f64; 7],
    hour: &[f64; 24],
) -> Result<FeatureVector, EmbedError> {
    let personality_dim = if variant.uses_personality() {
        let p = personality.ok_or_else(|| {
            EmbedError::DimMismatch(format!("variant {} requires personality", variant.name()))
        })?;
        p.components().len()
    } else {
        0
    };
    let layout = FeatureLayout {
        text_dim: text_vec.len(),
        personality_dim,
        weekday_dim: 7,
        hour_dim: 24,
    };
    let mut values = Vec::with_capacity(layout.total());
    values.extend_from_slice(text_vec);
    if variant.uses_personality() {
        values.extend(personality.unwrap().components().iter().map(|c| c / 100.0));
    }
    values.extend_from_slice(weekday);
    values.extend_from_slice(hour);
    debug_assert_eq!(values.len(), layout.total());
    Ok(FeatureVector { values, layout, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy_corpus() -> Vec<String> {
        vec![
            "coffee shop espresso latte coffee beans".to_string(),
            "coffee shop espresso latte coffee beans".to_string(),
            "mountain trail hiking summit ridge climb".to_string(),
            "museum gallery painting exhibit sculpture art".to_string(),
        ]
    }

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn toy_config() -> EmbedConfig {
        EmbedConfig { dim: 8, epochs: 50, seed: 7, ..EmbedConfig::default() }
    }

    #[test]
    fn identical_docs_closer_than_disjoint() {
        let model = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        let same = cosine(&model.doc_vectors[0], &model.doc_vectors[1]);
        let disjoint = cosine(&model.doc_vectors[0], &model.doc_vectors[2]);
        assert!(same > disjoint, "same={same} disjoint={disjoint}");
    }

    #[test]
    fn single_doc_sanity() {
        let cfg = EmbedConfig { dim: 2, epochs: 1, seed: 1, ..EmbedConfig::default() };
        let model = train_text_embeddings(&["hello tiny world".to_string()], &cfg).unwrap();
        let norm: f64 = model.doc_vectors[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm.is_finite() && norm > 0.0);
        for v in model.word_vectors.iter().chain(model.doc_vectors.iter()) {
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn training_deterministic() {
        let a = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        let b = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(
            train_text_embeddings(&[], &toy_config()).unwrap_err(),
            EmbedError::EmptyCorpus
        );
        assert_eq!(
            train_text_embeddings(&["   ".to_string()], &toy_config()).unwrap_err(),
            EmbedError::EmptyCorpus
        );
    }

    #[test]
    fn word_average_oov_is_zero() {
        let model = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        let v = embed_text(&model, "qqq zzz", EmbedMode::WordAverage);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn document_inference_close_to_training_vector() {
        let model = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        let inferred = embed_text(&model, &toy_corpus()[2], EmbedMode::Document);
        let c = cosine(&inferred, &model.doc_vectors[2]);
        assert!(c >= 0.7, "cosine {c}");
    }

    #[test]
    fn embedding_deterministic() {
        let model = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        for mode in [EmbedMode::Document, EmbedMode::WordAverage] {
            let a = embed_text(&model, "coffee ridge art", mode);
            let b = embed_text(&model, "coffee ridge art", mode);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn model_json_roundtrip() {
        let model = train_text_embeddings(&toy_corpus(), &toy_config()).unwrap();
        let back = TextEmbeddingModel::from_json(&model.to_json()).unwrap();
        assert_eq!(model, back);
        assert_eq!(back.vocab_id("coffee"), model.vocab_id("coffee"));
    }

    #[test]
    fn onehot_anchoring() {
        // Monday 2017-07-17 00:30 UTC
        let ts = 1_500_251_400;
        let wk = onehot_weekday(ts, 0);
        assert_eq!(wk, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let hr = onehot_hour(ts, 0);
        assert_eq!(hr[0], 1.0);
        // Sunday 23:30 UTC
        let ts = 1_500_247_800;
        assert_eq!(onehot_weekday(ts, 0)[6], 1.0);
        assert_eq!(onehot_hour(ts, 0)[23], 1.0);
    }

    #[test]
    fn v1_assembles_to_109() {
        let personality = PersonalityVector::from_components(&[50.0; 22]).unwrap();
        let text = vec![0.1; 56];
        let fv = assemble_features(
            Variant::V1,
            &text,
            Some(&personality),
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            &{
                let mut h = [0.0; 24];
                h[3] = 1.0;
                h
            },
        )
        .unwrap();
        assert_eq!(fv.values.len(), 109);
        assert_eq!(fv.layout.total(), 109);
        assert_eq!(fv.personality(), &[0.5; 22]);
    }

    #[test]
    fn v3_assembles_without_personality() {
        let text = vec![0.0; 56];
        let fv = assemble_features(Variant::V3, &text, None, &[0.0; 7], &[0.0; 24]).unwrap();
        assert_eq!(fv.values.len(), 87);
        assert_eq!(fv.personality().len(), 0);
    }

    #[test]
    fn missing_personality_rejected() {
        let err = assemble_features(Variant::V1, &[0.0; 4], None, &[0.0; 7], &[0.0; 24]);
        assert!(matches!(err, Err(EmbedError::DimMismatch(_))));
    }

    #[test]
    fn slicing_recovers_blocks() {
        let personality = PersonalityVector::from_components(&[100.0; 22]).unwrap();
        let text: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let wk = onehot_weekday(1_500_251_400, 0);
        let hr = onehot_hour(1_500_251_400, 0);
        let fv = assemble_features(Variant::V2, &text, Some(&personality), &wk, &hr).unwrap();
        assert_eq!(fv.text(), text.as_slice());
        assert_eq!(fv.personality(), &[1.0; 22]);
        assert_eq!(fv.weekday(), wk.as_slice());
        assert_eq!(fv.hour(), hr.as_slice());
    }

    proptest! {
        #[test]
        fn onehots_sum_to_one(ts in 1i64..2_000_000_000, lon in proptest::option::of(-179.9f64..179.9)) {
            let off = crate::timeutil::utc_offset_secs(lon);
            let wk = onehot_weekday(ts, off);
            let hr = onehot_hour(ts, off);
            prop_assert_eq!(wk.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(hr.iter().sum::<f64>(), 1.0);
        }
    }
}

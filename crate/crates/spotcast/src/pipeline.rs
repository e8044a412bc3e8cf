//! End-to-end orchestration: ingest, the four community searches,
//! blocking and normalization, annotation, feature embedding, per
//! community training of the neural classifier and baselines, and the
//! evaluation reports. Deterministic for a fixed (input, config, seed).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affect::{PersonalityLexicon, PersonalityProvider, PersonalityVector, SentimentLexicon};
use crate::annotate::{extract_venue_ref, VenueDirectory, TOP_LEVEL_CATEGORIES};
use crate::baselines::{
    Classifier, DecisionTree, GaussianNb, LogRegConfig, LogisticRegression, TreeConfig,
};
use crate::community::{
    block_filter, language_search, normalize_community, opinion_search, temporal_search,
    BlockThresholds, Community, CommunityReport,
};
use crate::embed::{
    assemble_features, embed_text, onehot_hour, onehot_weekday, train_text_embeddings,
    EmbedConfig, TextEmbeddingModel, Variant,
};
use crate::eval::{
    algorithm_table_csv, community_table_csv, kfold, mean_avg_precision_recall,
    mean_classification_accuracy, split_train_test, weekly_hourly_report, AccuracyRecord,
    AlgoMetrics, CommunityMetrics, EvalError, EvalReport, RankedRecord, TimedRecord,
};
use crate::geonet::{geonet_search, GeoNetConfig};
use crate::ingest::{dedup_stream, parse_tuple, StreamTuple};
use crate::nn::{self, MlpModel, TrainConfig};
use crate::timeutil;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no tuples in input")]
    NoTuples,
    #[error("config error: {0}")]
    Config(String),
    #[error("embedding error: {0}")]
    Embed(#[from] crate::embed::EmbedError),
    #[error("training error: {0}")]
    Nn(#[from] crate::nn::NnError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("annotation error: {0}")]
    Annotate(#[from] crate::annotate::AnnotateError),
    #[error("model serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("unknown user: {0}")]
    UnknownUser(String),
    #[error("user {0} belongs to no allowed community")]
    NoCommunity(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub venues: PathBuf,
    pub model_dir: PathBuf,
    pub report_dir: PathBuf,
    pub diversity: usize,
    pub per_day: f64,
    pub dedup_max_dist: usize,
    pub min_score: f64,
    pub radius_m: f64,
    pub per_domain_cap: usize,
    pub embed_dim: usize,
    pub embed_epochs: usize,
    pub nn_hidden: usize,
    pub nn_epochs: usize,
    pub kfold: usize,
    pub split_ratio: f64,
    pub min_history_days: i64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::from("stream.jsonl"),
            venues: PathBuf::from("venues.tsv"),
            model_dir: PathBuf::from("models"),
            report_dir: PathBuf::from("reports"),
            diversity: 100,
            per_day: 5.0,
            dedup_max_dist: 2,
            min_score: 0.5,
            radius_m: 140.0,
            per_domain_cap: 200,
            embed_dim: 56,
            embed_epochs: 100,
            nn_hidden: 900,
            nn_epochs: 300,
            kfold: 1,
            split_ratio: 0.8,
            min_history_days: 30,
            seed: 7,
        }
    }
}

impl PipelineConfig {
    /// Parse a flat `key = value` file; `#` starts a comment. Relative
    /// paths are resolved against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let mut cfg = PipelineConfig::default();
        let content = std::fs::read_to_string(path)?;
        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PipelineError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let bad = |e: &dyn std::fmt::Display| PipelineError::Config(format!("{key}: {e}"));
        match key {
            "input" => self.input = PathBuf::from(value),
            "venues" => self.venues = PathBuf::from(value),
            "model_dir" => self.model_dir = PathBuf::from(value),
            "report_dir" => self.report_dir = PathBuf::from(value),
            "diversity" => self.diversity = value.parse().map_err(|e| bad(&e))?,
            "per_day" => self.per_day = value.parse().map_err(|e| bad(&e))?,
            "dedup_max_dist" => self.dedup_max_dist = value.parse().map_err(|e| bad(&e))?,
            "min_score" => self.min_score = value.parse().map_err(|e| bad(&e))?,
            "radius_m" => self.radius_m = value.parse().map_err(|e| bad(&e))?,
            "per_domain_cap" => self.per_domain_cap = value.parse().map_err(|e| bad(&e))?,
            "embed_dim" => self.embed_dim = value.parse().map_err(|e| bad(&e))?,
            "embed_epochs" => self.embed_epochs = value.parse().map_err(|e| bad(&e))?,
            "nn_hidden" => self.nn_hidden = value.parse().map_err(|e| bad(&e))?,
            "nn_epochs" => self.nn_epochs = value.parse().map_err(|e| bad(&e))?,
            "kfold" => self.kfold = value.parse().map_err(|e| bad(&e))?,
            "split_ratio" => self.split_ratio = value.parse().map_err(|e| bad(&e))?,
            "min_history_days" => self.min_history_days = value.parse().map_err(|e| bad(&e))?,
            "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
            other => return Err(PipelineError::Config(format!("unknown key: {other}"))),
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let positive = [
            ("per_day", self.per_day),
            ("radius_m", self.radius_m),
            ("split_ratio", self.split_ratio),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(PipelineError::Config(format!("{name} must be positive")));
            }
        }
        if self.diversity == 0 || self.per_domain_cap == 0 || self.kfold == 0 {
            return Err(PipelineError::Config(
                "diversity, per_domain_cap, kfold must be positive".into(),
            ));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.input, &mut self.venues, &mut self.model_dir, &mut self.report_dir] {
            if p.is_relative() {
                *p = base.join(&p);
            }
        }
    }

    /// Full key=value echo, embedded in every report for provenance.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("input".into(), self.input.display().to_string());
        m.insert("venues".into(), self.venues.display().to_string());
        m.insert("model_dir".into(), self.model_dir.display().to_string());
        m.insert("report_dir".into(), self.report_dir.display().to_string());
        m.insert("diversity".into(), self.diversity.to_string());
        m.insert("per_day".into(), self.per_day.to_string());
        m.insert("dedup_max_dist".into(), self.dedup_max_dist.to_string());
        m.insert("min_score".into(), self.min_score.to_string());
        m.insert("radius_m".into(), self.radius_m.to_string());
        m.insert("per_domain_cap".into(), self.per_domain_cap.to_string());
        m.insert("embed_dim".into(), self.embed_dim.to_string());
        m.insert("embed_epochs".into(), self.embed_epochs.to_string());
        m.insert("nn_hidden".into(), self.nn_hidden.to_string());
        m.insert("nn_epochs".into(), self.nn_epochs.to_string());
        m.insert("kfold".into(), self.kfold.to_string());
        m.insert("split_ratio".into(), self.split_ratio.to_string());
        m.insert("min_history_days".into(), self.min_history_days.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// Per-stage accounting; every input tuple ends up in exactly one of
/// parsed/parse_errors, and parsed splits into kept/duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct StageCounters {
    pub input_lines: usize,
    pub parsed: usize,
    pub parse_errors: usize,
    pub duplicates_removed: usize,
    pub kept: usize,
    pub opinion_skipped: usize,
    pub communities_total: usize,
    pub communities_allowed: usize,
    pub communities_blocked: usize,
    pub labeled_tuples: usize,
    pub unresolvable_tuples: usize,
    pub trained_models: usize,
    pub skipped_model_slots: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserRecord {
    pub communities: Vec<String>,
    pub latest_text: String,
    pub latest_timestamp: i64,
    pub latest_lon: Option<f64>,
    pub personality: Option<PersonalityVector>,
}

/// Everything forecast-time needs, persisted under `model_dir`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PipelineArtifacts {
    pub embed_model: TextEmbeddingModel,
    /// Community key -> V1 neural model.
    pub community_models: BTreeMap<String, MlpModel>,
    pub users: BTreeMap<String, UserRecord>,
}

#[derive(Debug, Serialize)]
pub struct PipelineReport {
    pub config: BTreeMap<String, String>,
    pub counters: StageCounters,
    pub eval: EvalReport,
    pub kfold_accuracy: Option<Vec<f64>>,
    pub communities: Vec<CommunityReport>,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub report: PipelineReport,
    pub artifacts: PipelineArtifacts,
}

pub const ALGORITHMS: [&str; 4] =
    ["Neural Network", "Gaussian Naive Bayes", "Logistic Regression", "Decision Tree"];

fn label_index(top_level: &str) -> Option<usize> {
    TOP_LEVEL_CATEGORIES.iter().position(|(_, n)| *n == top_level)
}

fn tuple_key(t: &StreamTuple) -> (String, i64, String) {
    (t.user_id.clone(), t.timestamp, t.text.clone())
}

struct FeatureContext<'a> {
    embed_model: &'a TextEmbeddingModel,
    personalities: &'a BTreeMap<String, PersonalityVector>,
}

impl FeatureContext<'_> {
    fn features(&self, t: &StreamTuple, variant: Variant) -> Result<Vec<f64>, PipelineError> {
        let text_vec = embed_text(self.embed_model, &t.text, variant.text_mode());
        let offset = timeutil::utc_offset_secs(t.geo.map(|g| g.lon));
        let weekday = onehot_weekday(t.timestamp, offset);
        let hour = onehot_hour(t.timestamp, offset);
        let personality = self.personalities.get(&t.user_id);
        let fv = assemble_features(variant, &text_vec, personality, &weekday, &hour)?;
        Ok(fv.values)
    }
}

fn train_community_models(
    cfg: &PipelineConfig,
    ctx: &FeatureContext,
    communities: &[Community],
    labels: &BTreeMap<(String, i64, String), String>,
    train_users: &std::collections::BTreeSet<String>,
    test_users: &std::collections::BTreeSet<String>,
    counters: &mut StageCounters,
) -> Result<EvalOutputs, PipelineError> {
    let mut out = EvalOutputs::default();
    let label_names: Vec<String> =
        TOP_LEVEL_CATEGORIES.iter().map(|(_, n)| n.to_string()).collect();
    for community in communities {
        let key = community.key();
        let cluster_label = community.clusters[0].label.clone();
        // per test user: their latest labeled tuple in this community
        let mut latest_test: BTreeMap<&str, &StreamTuple> = BTreeMap::new();
        let mut labeled: Vec<(&StreamTuple, usize)> = Vec::new();
        for t in community.tuples() {
            let Some(label) = labels.get(&tuple_key(t)) else { continue };
            let Some(idx) = label_index(label) else { continue };
            labeled.push((t, idx));
            if test_users.contains(&t.user_id) {
                let e = latest_test.entry(t.user_id.as_str()).or_insert(t);
                if t.timestamp > e.timestamp {
                    *e = t;
                }
            }
        }
        for variant in Variant::ALL {
            let mut dataset: Vec<(Vec<f64>, usize)> = Vec::new();
            for (t, idx) in &labeled {
                if train_users.contains(&t.user_id) {
                    dataset.push((ctx.features(t, variant)?, *idx));
                }
            }
            let classes: std::collections::BTreeSet<usize> =
                dataset.iter().map(|(_, y)| *y).collect();
            if classes.len() < 2 || latest_test.is_empty() {
                counters.skipped_model_slots += 1;
                continue;
            }
            let input_dim = dataset[0].0.len();
            let mut model = nn::init_model(input_dim, &[cfg.nn_hidden], label_names.len(), cfg.seed);
            model.label_map = label_names.clone();
            let train_cfg = TrainConfig {
                max_epochs: cfg.nn_epochs,
                seed: cfg.seed,
                ..TrainConfig::default()
            };
            nn::train(&mut model, &dataset, &train_cfg)?;
            let gnb = GaussianNb::fit(&dataset).map_err(|e| PipelineError::Config(e.to_string()))?;
            let lr_cfg = LogRegConfig { max_iters: 200, ..LogRegConfig::default() };
            let lr = LogisticRegression::fit(&dataset, &lr_cfg)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            let tree = DecisionTree::fit(&dataset, &TreeConfig::default())
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            counters.trained_models += 4;

            for (&user, &t) in &latest_test {
                let truth = labels[&tuple_key(t)].clone();
                let x = ctx.features(t, variant)?;
                let rankings: [(usize, Vec<usize>); 4] = [
                    (0, nn::rank_classes(&model, &x)?),
                    (1, gnb.rank(&x).map_err(|e| PipelineError::Config(e.to_string()))?),
                    (2, lr.rank(&x).map_err(|e| PipelineError::Config(e.to_string()))?),
                    (3, tree.rank(&x).map_err(|e| PipelineError::Config(e.to_string()))?),
                ];
                for (algo, order) in &rankings {
                    let ranked: Vec<String> =
                        order.iter().map(|&i| label_names[i].clone()).collect();
                    out.ranked
                        .entry((ALGORITHMS[*algo].to_string(), variant.name().to_string()))
                        .or_default()
                        .push(RankedRecord {
                            user: user.to_string(),
                            community: key.clone(),
                            cluster: cluster_label.clone(),
                            ranked,
                            truth: truth.clone(),
                        });
                }
                if variant == Variant::V1 {
                    let (pred_idx, _) = nn::predict_top(&model, &x)?;
                    out.accuracy.push(AccuracyRecord {
                        user: user.to_string(),
                        community: key.clone(),
                        cluster: cluster_label.clone(),
                        predicted: label_names[pred_idx].clone(),
                        truth: truth.clone(),
                    });
                    out.timed.push(TimedRecord {
                        community_kind: community.kind.name().to_string(),
                        timestamp: t.timestamp,
                        lon: t.geo.map(|g| g.lon),
                        correct: label_names[pred_idx] == truth,
                    });
                }
            }
            if variant == Variant::V1 {
                out.v1_models.insert(key.clone(), model);
                out.v1_datasets.entry(key.clone()).or_insert(dataset);
            }
        }
    }
    Ok(out)
}

#[derive(Default)]
struct EvalOutputs {
    ranked: BTreeMap<(String, String), Vec<RankedRecord>>,
    accuracy: Vec<AccuracyRecord>,
    timed: Vec<TimedRecord>,
    v1_models: BTreeMap<String, MlpModel>,
    v1_datasets: BTreeMap<String, Vec<(Vec<f64>, usize)>>,
}

/// Run every stage and write reports plus artifacts to disk.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    let mut counters = StageCounters::default();

    let content = std::fs::read_to_string(&cfg.input)?;
    let mut tuples = Vec::new();
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        counters.input_lines += 1;
        match parse_tuple(line) {
            Ok(t) => {
                counters.parsed += 1;
                tuples.push(t);
            }
            Err(_) => counters.parse_errors += 1,
        }
    }
    if tuples.is_empty() {
        return Err(PipelineError::NoTuples);
    }
    tuples.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.user_id.cmp(&b.user_id)));
    let deduped = dedup_stream(&tuples, cfg.dedup_max_dist);
    counters.duplicates_removed = tuples.len() - deduped.len();
    counters.kept = deduped.len();

    let sentiment = SentimentLexicon::builtin();
    let opinion = opinion_search(&deduped, &sentiment);
    counters.opinion_skipped = opinion.skipped;
    let mut communities = opinion.communities;
    communities.extend(language_search(&deduped));
    let geo_cfg = GeoNetConfig { radius_m: cfg.radius_m, seed: cfg.seed, ..GeoNetConfig::default() };
    communities.extend(geonet_search(&deduped, &geo_cfg));
    communities.extend(temporal_search(&deduped, cfg.dedup_max_dist));
    counters.communities_total = communities.len();

    let thresholds = BlockThresholds { diversity: cfg.diversity, per_day: cfg.per_day };
    let outcome = block_filter(communities, thresholds);
    counters.communities_allowed = outcome.allowed.len();
    counters.communities_blocked = outcome.blocked.len();

    let mut directory = VenueDirectory::from_fixture(&cfg.venues)?;
    let mut labels: BTreeMap<(String, i64, String), String> = BTreeMap::new();
    for t in &deduped {
        let resolved = extract_venue_ref(t)
            .and_then(|r| directory.lookup_category(&r).ok())
            .map(|c| c.top_level);
        match resolved {
            Some(label) => {
                labels.insert(tuple_key(t), label);
                counters.labeled_tuples += 1;
            }
            None => counters.unresolvable_tuples += 1,
        }
    }

    let domain_of = |t: &StreamTuple| labels.get(&tuple_key(t)).cloned();
    let normalized: Vec<Community> = outcome
        .allowed
        .iter()
        .map(|c| normalize_community(c, cfg.per_domain_cap, domain_of))
        .collect();

    let corpus: Vec<String> = deduped.iter().map(|t| t.text.clone()).collect();
    let embed_cfg = EmbedConfig {
        dim: cfg.embed_dim,
        epochs: cfg.embed_epochs,
        seed: cfg.seed,
        ..EmbedConfig::default()
    };
    let embed_model = train_text_embeddings(&corpus, &embed_cfg)?;

    let personality_lexicon = PersonalityLexicon::builtin();
    let mut texts_by_user: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in &deduped {
        texts_by_user.entry(t.user_id.clone()).or_default().push(t.text.clone());
    }
    let mut personalities: BTreeMap<String, PersonalityVector> = BTreeMap::new();
    for (user, texts) in &texts_by_user {
        if let Ok(p) = personality_lexicon.profile(texts) {
            personalities.insert(user.clone(), p);
        }
    }

    let histories: Vec<(String, Vec<i64>)> = {
        let mut m: BTreeMap<String, Vec<i64>> = BTreeMap::new();
        for t in &deduped {
            m.entry(t.user_id.clone()).or_default().push(t.timestamp);
        }
        m.into_iter().collect()
    };
    let (train_users, test_users) =
        split_train_test(&histories, cfg.split_ratio, cfg.min_history_days, cfg.seed)?;
    let train_users: std::collections::BTreeSet<String> = train_users.into_iter().collect();
    let test_users: std::collections::BTreeSet<String> = test_users.into_iter().collect();

    let ctx = FeatureContext { embed_model: &embed_model, personalities: &personalities };
    let outputs = train_community_models(
        cfg,
        &ctx,
        &normalized,
        &labels,
        &train_users,
        &test_users,
        &mut counters,
    )?;

    let acc = mean_classification_accuracy(&outputs.accuracy)?;
    let mut per_algorithm: BTreeMap<String, AlgoMetrics> = BTreeMap::new();
    for ((algo, variant), records) in &outputs.ranked {
        let pr = mean_avg_precision_recall(records)?;
        per_algorithm.insert(
            format!("{algo} ({variant})"),
            AlgoMetrics { precision: pr.precision, recall: pr.recall },
        );
    }
    let nn_v1 = &outputs.ranked[&("Neural Network".to_string(), "V1".to_string())];
    let pr_v1 = mean_avg_precision_recall(nn_v1)?;
    let per_community: BTreeMap<String, CommunityMetrics> = pr_v1
        .precision_per_community
        .iter()
        .map(|(c, &p)| (c.clone(), CommunityMetrics::from_pr(p, pr_v1.recall_per_community[c])))
        .collect();
    let time_buckets = weekly_hourly_report(&outputs.timed);

    let kfold_accuracy = if cfg.kfold >= 2 {
        Some(kfold_nn_accuracy(cfg, &outputs.v1_datasets)?)
    } else {
        None
    };

    let eval = EvalReport { mca: acc.overall, per_algorithm, per_community, time_buckets };

    let mut community_reports: Vec<CommunityReport> =
        normalized.iter().map(|c| CommunityReport::new(c, None)).collect();
    community_reports.extend(
        outcome.blocked.iter().map(|(c, reasons)| CommunityReport::new(c, Some(reasons))),
    );

    let mut users: BTreeMap<String, UserRecord> = BTreeMap::new();
    for (user, _) in &histories {
        let latest = deduped
            .iter()
            .filter(|t| &t.user_id == user)
            .max_by_key(|t| t.timestamp)
            .expect("user has tuples");
        let member_of: Vec<String> = normalized
            .iter()
            .filter(|c| c.members.contains(user))
            .map(|c| c.key())
            .collect();
        users.insert(
            user.clone(),
            UserRecord {
                communities: member_of,
                latest_text: latest.text.clone(),
                latest_timestamp: latest.timestamp,
                latest_lon: latest.geo.map(|g| g.lon),
                personality: personalities.get(user).cloned(),
            },
        );
    }

    let artifacts = PipelineArtifacts {
        embed_model,
        community_models: outputs.v1_models,
        users,
    };
    let report = PipelineReport {
        config: cfg.echo(),
        counters,
        eval,
        kfold_accuracy,
        communities: community_reports,
    };
    write_outputs(cfg, &report, &artifacts)?;
    Ok(PipelineOutcome { report, artifacts })
}

fn kfold_nn_accuracy(
    cfg: &PipelineConfig,
    datasets: &BTreeMap<String, Vec<(Vec<f64>, usize)>>,
) -> Result<Vec<f64>, PipelineError> {
    // pooled per-fold accuracy over the largest community's V1 dataset
    let Some(dataset) = datasets.values().max_by_key(|d| d.len()) else {
        return Ok(Vec::new());
    };
    let folds = kfold(dataset.len(), cfg.kfold, cfg.seed)?;
    let mut out = Vec::with_capacity(folds.len());
    for (train_idx, val_idx) in folds {
        let train: Vec<(Vec<f64>, usize)> =
            train_idx.iter().map(|&i| dataset[i].clone()).collect();
        let classes: std::collections::BTreeSet<usize> =
            train.iter().map(|(_, y)| *y).collect();
        if classes.len() < 2 {
            out.push(0.0);
            continue;
        }
        let mut model = nn::init_model(
            dataset[0].0.len(),
            &[cfg.nn_hidden],
            TOP_LEVEL_CATEGORIES.len(),
            cfg.seed,
        );
        let train_cfg =
            TrainConfig { max_epochs: cfg.nn_epochs, seed: cfg.seed, ..TrainConfig::default() };
        nn::train(&mut model, &train, &train_cfg)?;
        let correct = val_idx
            .iter()
            .filter(|&&i| nn::predict_top(&model, &dataset[i].0).map(|(p, _)| p) == Ok(dataset[i].1))
            .count();
        out.push(correct as f64 / val_idx.len() as f64);
    }
    Ok(out)
}

fn write_outputs(
    cfg: &PipelineConfig,
    report: &PipelineReport,
    artifacts: &PipelineArtifacts,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&cfg.report_dir)?;
    std::fs::create_dir_all(&cfg.model_dir)?;
    std::fs::write(
        cfg.report_dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    std::fs::write(cfg.report_dir.join("algorithms.csv"), algorithm_table_csv(&report.eval))?;
    std::fs::write(cfg.report_dir.join("communities.csv"), community_table_csv(&report.eval))?;
    std::fs::write(
        cfg.model_dir.join("embedding.json"),
        artifacts.embed_model.to_json(),
    )?;
    std::fs::write(
        cfg.model_dir.join("community_models.json"),
        serde_json::to_string(&artifacts.community_models)?,
    )?;
    std::fs::write(cfg.model_dir.join("users.json"), serde_json::to_string(&artifacts.users)?)?;
    Ok(())
}

/// Reload persisted artifacts for forecasting.
pub fn load_artifacts(model_dir: &Path) -> Result<PipelineArtifacts, PipelineError> {
    let embed_model =
        TextEmbeddingModel::from_json(&std::fs::read_to_string(model_dir.join("embedding.json"))?)?;
    let community_models = serde_json::from_str(&std::fs::read_to_string(
        model_dir.join("community_models.json"),
    )?)?;
    let users = serde_json::from_str(&std::fs::read_to_string(model_dir.join("users.json"))?)?;
    Ok(PipelineArtifacts { embed_model, community_models, users })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forecast {
    pub category: String,
    pub confidence: f64,
    pub community: String,
}

/// Venue-category forecast for a user at the given local weekday/hour:
/// queries the model of every community the user belongs to and keeps
/// the maximum-confidence answer.
pub fn forecast_user(
    artifacts: &PipelineArtifacts,
    user_id: &str,
    weekday: usize,
    hour: usize,
) -> Result<Forecast, PipelineError> {
    assert!(weekday < 7 && hour < 24);
    let record = artifacts
        .users
        .get(user_id)
        .ok_or_else(|| PipelineError::UnknownUser(user_id.to_string()))?;
    let text_vec = embed_text(&artifacts.embed_model, &record.latest_text, Variant::V1.text_mode());
    let mut weekday_onehot = [0.0f64; 7];
    weekday_onehot[weekday] = 1.0;
    let mut hour_onehot = [0.0f64; 24];
    hour_onehot[hour] = 1.0;
    let mut best: Option<Forecast> = None;
    for key in &record.communities {
        let Some(model) = artifacts.community_models.get(key) else { continue };
        let fv = assemble_features(
            Variant::V1,
            &text_vec,
            record.personality.as_ref(),
            &weekday_onehot,
            &hour_onehot,
        )?;
        let (idx, confidence) = nn::predict_top(model, &fv.values)?;
        let candidate = Forecast {
            category: model.label_map.get(idx).cloned().unwrap_or_else(|| idx.to_string()),
            confidence,
            community: key.clone(),
        };
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.confidence > b.confidence
                    || (candidate.confidence == b.confidence && candidate.community < b.community)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| PipelineError::NoCommunity(user_id.to_string()))
}

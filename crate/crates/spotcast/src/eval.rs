//! Evaluation protocol: mean classification accuracy, mean average
//! precision/recall over ranked predictions, the 80/20 history-aware
//! user split, k-fold partitioning, and weekly/hourly breakdowns.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeutil;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no predictions to evaluate")]
    EmptyPredictions,
    #[error("not enough users with sufficient history: need {needed}, have {eligible}")]
    InsufficientEligibleUsers { needed: usize, eligible: usize },
    #[error("too few samples for {k} folds: {n}")]
    TooFewSamples { n: usize, k: usize },
}

/// One top-1 forecast with its community/cluster assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub user: String,
    pub community: String,
    pub cluster: String,
    pub predicted: String,
    pub truth: String,
}

/// One ranked forecast list with its community/cluster assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedRecord {
    pub user: String,
    pub community: String,
    pub cluster: String,
    pub ranked: Vec<String>,
    pub truth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyBreakdown {
    /// Mean over communities of the mean over clusters.
    pub overall: f64,
    pub per_community: BTreeMap<String, f64>,
    pub per_cluster: BTreeMap<String, BTreeMap<String, f64>>,
}

fn nested_mean(per_cluster: &BTreeMap<String, BTreeMap<String, f64>>) -> (f64, BTreeMap<String, f64>) {
    let per_community: BTreeMap<String, f64> = per_cluster
        .iter()
        .map(|(c, clusters)| {
            let m = clusters.values().sum::<f64>() / clusters.len() as f64;
            (c.clone(), m)
        })
        .collect();
    let overall = per_community.values().sum::<f64>() / per_community.len() as f64;
    (overall, per_community)
}

fn cluster_means<R>(
    records: &[R],
    key: impl for<'a> Fn(&'a R) -> (&'a str, &'a str),
    value: impl Fn(&R) -> f64,
) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for r in records {
        let (c, cl) = key(r);
        let e = sums.entry((c.to_string(), cl.to_string())).or_insert((0.0, 0));
        e.0 += value(r);
        e.1 += 1;
    }
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for ((c, cl), (sum, n)) in sums {
        out.entry(c).or_default().insert(cl, sum / n as f64);
    }
    out
}

/// Per-cluster accuracy averaged up to communities, then overall.
pub fn mean_classification_accuracy(
    records: &[AccuracyRecord],
) -> Result<AccuracyBreakdown, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let per_cluster = cluster_means(
        records,
        |r| (r.community.as_str(), r.cluster.as_str()),
        |r| f64::from(r.predicted == r.truth),
    );
    let (overall, per_community) = nested_mean(&per_cluster);
    Ok(AccuracyBreakdown { overall, per_community, per_cluster })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrBreakdown {
    pub precision: f64,
    pub recall: f64,
    pub precision_per_community: BTreeMap<String, f64>,
    pub recall_per_community: BTreeMap<String, f64>,
}

fn rank_of(ranked: &[String], truth: &str) -> Option<usize> {
    ranked.iter().position(|l| l == truth).map(|p| p + 1)
}

/// Precision is the reciprocal rank of the true label (0 when absent);
/// recall is the presence indicator. Both are averaged per cluster,
/// then per community, then overall.
pub fn mean_avg_precision_recall(records: &[RankedRecord]) -> Result<PrBreakdown, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    fn key(r: &RankedRecord) -> (&str, &str) {
        (r.community.as_str(), r.cluster.as_str())
    }
    let pr_clusters = cluster_means(records, key, |r| {
        rank_of(&r.ranked, &r.truth).map_or(0.0, |k| 1.0 / k as f64)
    });
    let rel_clusters = cluster_means(records, key, |r| {
        f64::from(rank_of(&r.ranked, &r.truth).is_some())
    });
    let (precision, precision_per_community) = nested_mean(&pr_clusters);
    let (recall, recall_per_community) = nested_mean(&rel_clusters);
    Ok(PrBreakdown { precision, recall, precision_per_community, recall_per_community })
}

/// 80/20 user split where the test side only holds users whose
/// timestamps span at least `min_history_days` days.
pub fn split_train_test(
    users: &[(String, Vec<i64>)],
    ratio: f64,
    min_history_days: i64,
    seed: u64,
) -> Result<(Vec<String>, Vec<String>), EvalError> {
    assert!((0.0..=1.0).contains(&ratio));
    let n = users.len();
    let test_size = n - (n as f64 * ratio).round() as usize;
    let eligible: Vec<&String> = users
        .iter()
        .filter(|(_, ts)| {
            match (ts.iter().min(), ts.iter().max()) {
                (Some(lo), Some(hi)) => hi - lo >= min_history_days * 86_400,
                _ => false,
            }
        })
        .map(|(u, _)| u)
        .collect();
    if eligible.len() < test_size {
        return Err(EvalError::InsufficientEligibleUsers {
            needed: test_size,
            eligible: eligible.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = eligible;
    pool.shuffle(&mut rng);
    let test: std::collections::BTreeSet<String> =
        pool[..test_size].iter().map(|u| (*u).clone()).collect();
    let train = users
        .iter()
        .map(|(u, _)| u.clone())
        .filter(|u| !test.contains(u))
        .collect();
    Ok((train, test.into_iter().collect()))
}

/// Seeded k-fold index partition: `(train, validation)` pairs with fold
/// sizes differing by at most one.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>, EvalError> {
    if n < k || k == 0 {
        return Err(EvalError::TooFewSamples { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let validation: Vec<usize> = order[start..start + size].to_vec();
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(order[start + size..].iter())
            .copied()
            .collect();
        folds.push((train, validation));
        start += size;
    }
    Ok(folds)
}

/// A forecast outcome with enough context for time bucketing.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedRecord {
    pub community_kind: String,
    pub timestamp: i64,
    pub lon: Option<f64>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TimeBuckets {
    /// Accuracy per local weekday (0 = Monday); None when no data.
    pub weekly: Vec<Option<f64>>,
    /// Accuracy per local hour; None when no data.
    pub hourly: Vec<Option<f64>>,
}

/// Accuracy bucketed by local weekday and hour, per community kind.
pub fn weekly_hourly_report(records: &[TimedRecord]) -> BTreeMap<String, TimeBuckets> {
    let mut acc: BTreeMap<String, ([(usize, usize); 7], [(usize, usize); 24])> = BTreeMap::new();
    for r in records {
        let offset = timeutil::utc_offset_secs(r.lon);
        let wd = timeutil::local_weekday(r.timestamp, offset);
        let h = timeutil::local_hour(r.timestamp, offset);
        let e = acc.entry(r.community_kind.clone()).or_insert(([(0, 0); 7], [(0, 0); 24]));
        e.0[wd].0 += usize::from(r.correct);
        e.0[wd].1 += 1;
        e.1[h].0 += usize::from(r.correct);
        e.1[h].1 += 1;
    }
    acc.into_iter()
        .map(|(kind, (wk, hr))| {
            let bucket = |(c, n): (usize, usize)| {
                if n == 0 { None } else { Some(c as f64 / n as f64) }
            };
            let buckets = TimeBuckets {
                weekly: wk.iter().copied().map(bucket).collect(),
                hourly: hr.iter().copied().map(bucket).collect(),
            };
            (kind, buckets)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoMetrics {
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityMetrics {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

impl CommunityMetrics {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        CommunityMetrics { f1, precision, recall }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mca: f64,
    pub per_algorithm: BTreeMap<String, AlgoMetrics>,
    pub per_community: BTreeMap<String, CommunityMetrics>,
    pub time_buckets: BTreeMap<String, TimeBuckets>,
}

/// Algorithms that appear in the per-algorithm table but are out of
/// scope; rendered as "n/a" rows.
pub const UNIMPLEMENTED_ALGORITHMS: [&str; 2] = ["SVM (RBF kernel)", "Random Forest"];

fn fmt_metric(v: f64) -> String {
    format!("{v:.4}")
}

/// CSV with columns Algorithm,Precision,Recall; out-of-scope rows
/// render as n/a.
pub fn algorithm_table_csv(report: &EvalReport) -> String {
    let mut out = String::from("Algorithm,Precision,Recall\n");
    for (algo, m) in &report.per_algorithm {
        out.push_str(&format!("{algo},{},{}\n", fmt_metric(m.precision), fmt_metric(m.recall)));
    }
    for algo in UNIMPLEMENTED_ALGORITHMS {
        out.push_str(&format!("{algo},n/a,n/a\n"));
    }
    out
}

/// CSV with columns Community,F1,Precision,Recall.
pub fn community_table_csv(report: &EvalReport) -> String {
    let mut out = String::from("Community,F1,Precision,Recall\n");
    for (name, m) in &report.per_community {
        out.push_str(&format!(
            "{name},{},{},{}\n",
            fmt_metric(m.f1),
            fmt_metric(m.precision),
            fmt_metric(m.recall)
        ));
    }
    out
}

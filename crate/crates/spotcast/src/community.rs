//! Dynamic community search methods (opinions, language, temporal),
//! community normalization, and the pipeline blocking rules.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::affect::{classify_opinion, Opinion, SentimentProvider};
use crate::ingest::{dedup_stream, is_self_report, StreamTuple};
use crate::timeutil::{local_date, local_hour, utc_offset_secs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CommunityKind {
    Opinions,
    Language,
    GeoNets,
    Temporal,
}

impl CommunityKind {
    pub fn name(self) -> &'static str {
        match self {
            CommunityKind::Opinions => "Opinions",
            CommunityKind::Language => "Language",
            CommunityKind::GeoNets => "Geo-Nets",
            CommunityKind::Temporal => "Temporal",
        }
    }
}

/// A labeled group of tuples inside a community, sorted by timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: String,
    pub tuples: Vec<StreamTuple>,
    pub distinct_users: usize,
}

impl Cluster {
    pub fn new(label: impl Into<String>, mut tuples: Vec<StreamTuple>) -> Self {
        tuples.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.user_id.cmp(&b.user_id)));
        let distinct_users = tuples.iter().map(|t| t.user_id.as_str()).collect::<BTreeSet<_>>().len();
        Cluster { label: label.into(), tuples, distinct_users }
    }

    /// Mean tuples per active (local calendar) day.
    pub fn tuples_per_active_day(&self) -> f64 {
        if self.tuples.is_empty() {
            return 0.0;
        }
        let days: BTreeSet<_> = self
            .tuples
            .iter()
            .map(|t| local_date(t.timestamp, utc_offset_secs(t.geo.map(|g| g.lon))))
            .collect();
        self.tuples.len() as f64 / days.len() as f64
    }
}

/// A community produced by one search method.
#[derive(Debug, Clone, PartialEq)]
pub struct Community {
    pub kind: CommunityKind,
    pub label: String,
    pub members: BTreeSet<String>,
    pub clusters: Vec<Cluster>,
    pub csl_index: Option<f64>,
}

impl Community {
    pub fn from_single_cluster(kind: CommunityKind, label: impl Into<String>, tuples: Vec<StreamTuple>) -> Self {
        let label = label.into();
        let cluster = Cluster::new(label.clone(), tuples);
        let members = cluster.tuples.iter().map(|t| t.user_id.clone()).collect();
        Community { kind, label, members, clusters: vec![cluster], csl_index: None }
    }

    pub fn tuples(&self) -> impl Iterator<Item = &StreamTuple> {
        self.clusters.iter().flat_map(|c| c.tuples.iter())
    }

    pub fn key(&self) -> String {
        format!("{}/{}", self.kind.name(), self.label)
    }
}

/// Outcome of the opinion search: up to three communities plus the count
/// of tuples skipped because the sentiment provider failed on them.
#[derive(Debug)]
pub struct OpinionSearchResult {
    pub communities: Vec<Community>,
    pub skipped: usize,
}

/// Route each tuple into Positive/Neutral/Negative by sentiment.
pub fn opinion_search(tuples: &[StreamTuple], scorer: &dyn SentimentProvider) -> OpinionSearchResult {
    let mut routed: BTreeMap<Opinion, Vec<StreamTuple>> = BTreeMap::new();
    let mut skipped = 0usize;
    for t in tuples {
        match scorer.score(&t.text) {
            Ok(r) => routed.entry(classify_opinion(r)).or_default().push(t.clone()),
            Err(_) => skipped += 1,
        }
    }
    let communities = [Opinion::Positive, Opinion::Neutral, Opinion::Negative]
        .into_iter()
        .filter_map(|op| {
            let ts = routed.remove(&op)?;
            (!ts.is_empty()).then(|| Community::from_single_cluster(CommunityKind::Opinions, op.label(), ts))
        })
        .collect();
    OpinionSearchResult { communities, skipped }
}

/// The seven continent communities and their native language codes.
/// A code may map to several continents.
pub const CONTINENT_LANGS: [(&str, &[&str]); 7] = [
    ("Africa", &["pt", "es", "zu", "za", "eu"]),
    ("Antarctica", &["en"]),
    (
        "Asia",
        &["id", "tl", "tr", "vi", "zh", "hi", "ru", "th", "ar", "ko", "he", "ja"],
    ),
    ("Australia", &["en"]),
    (
        "Europe",
        &[
            "da", "es", "fr", "pl", "et", "de", "tr", "pt", "sv", "cs", "nl", "sl", "el", "no",
            "it", "lv", "ro", "cy", "hu", "is", "ru", "uk", "eu", "lt", "bg", "fi",
        ],
    ),
    ("North America", &["ht"]),
    ("South America", &["en"]),
];

/// Continents a language code belongs to, in fixed emission order.
pub fn continents_for_lang(lang: &str) -> Vec<&'static str> {
    let lang = lang.to_ascii_lowercase();
    CONTINENT_LANGS
        .iter()
        .filter(|(_, codes)| codes.contains(&lang.as_str()))
        .map(|(name, _)| *name)
        .collect()
}

/// Map tuples to continent communities by language code; unmapped codes
/// join no community. The CSL index is computed for every emitted
/// community.
pub fn language_search(tuples: &[StreamTuple]) -> Vec<Community> {
    let mut routed: BTreeMap<&'static str, Vec<StreamTuple>> = BTreeMap::new();
    for t in tuples {
        for continent in continents_for_lang(&t.lang) {
            routed.entry(continent).or_default().push(t.clone());
        }
    }
    CONTINENT_LANGS
        .iter()
        .filter_map(|(name, _)| {
            let ts = routed.remove(name)?;
            let mut c = Community::from_single_cluster(CommunityKind::Language, *name, ts);
            c.csl_index = Some(csl_index(&c));
            Some(c)
        })
        .collect()
}

/// Distinct language codes over the community's tuples divided by
/// distinct users.
pub fn csl_index(c: &Community) -> f64 {
    let langs: BTreeSet<&str> = c.tuples().map(|t| t.lang.as_str()).collect();
    let users: BTreeSet<&str> = c.tuples().map(|t| t.user_id.as_str()).collect();
    assert!(!users.is_empty(), "csl_index requires at least one distinct user");
    langs.len() as f64 / users.len() as f64
}

/// Session label for a local hour of day. Half-open intervals.
pub fn session_for_hour(hour: usize) -> &'static str {
    match hour {
        0..=11 => "Morning",
        12..=15 => "Afternoon",
        16..=19 => "Evening",
        _ => "Night",
    }
}

/// Route tuples into the four day sessions by local hour, after unifying
/// duplicate texts with the same Levenshtein rule as the ingest dedup.
pub fn temporal_search(tuples: &[StreamTuple], dedup_max_dist: usize) -> Vec<Community> {
    let unified = dedup_stream(tuples, dedup_max_dist);
    let mut routed: BTreeMap<&'static str, Vec<StreamTuple>> = BTreeMap::new();
    for t in unified {
        let hour = local_hour(t.timestamp, utc_offset_secs(t.geo.map(|g| g.lon)));
        routed.entry(session_for_hour(hour)).or_default().push(t);
    }
    ["Morning", "Afternoon", "Evening", "Night"]
        .into_iter()
        .filter_map(|label| {
            let ts = routed.remove(label)?;
            Some(Community::from_single_cluster(CommunityKind::Temporal, label, ts))
        })
        .collect()
}

/// Cap each venue-category domain at `per_domain_cap` tuples, keeping the
/// most recent ones; tuples without a resolvable domain pass through.
pub fn normalize_community<F>(c: &Community, per_domain_cap: usize, domain_of: F) -> Community
where
    F: Fn(&StreamTuple) -> Option<String>,
{
    assert!(per_domain_cap >= 1);
    // pick the kept tuple set community-wide, newest first per domain
    let all: Vec<&StreamTuple> = c.tuples().collect();
    let mut by_domain: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, t) in all.iter().enumerate() {
        if let Some(d) = domain_of(t) {
            by_domain.entry(d).or_default().push(i);
        }
    }
    let mut dropped: BTreeSet<usize> = BTreeSet::new();
    for (_, mut idxs) in by_domain {
        if idxs.len() > per_domain_cap {
            // newest (highest timestamp, then later position) survive
            idxs.sort_by_key(|&i| (std::cmp::Reverse(all[i].timestamp), std::cmp::Reverse(i)));
            for &i in &idxs[per_domain_cap..] {
                dropped.insert(i);
            }
        }
    }
    let mut offset = 0usize;
    let clusters: Vec<Cluster> = c
        .clusters
        .iter()
        .map(|cl| {
            let kept: Vec<StreamTuple> = cl
                .tuples
                .iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(&(offset + i)))
                .map(|(_, t)| t.clone())
                .collect();
            offset += cl.tuples.len();
            Cluster::new(cl.label.clone(), kept)
        })
        .collect();
    let members = clusters
        .iter()
        .flat_map(|cl| cl.tuples.iter().map(|t| t.user_id.clone()))
        .collect();
    Community { kind: c.kind, label: c.label.clone(), members, clusters, csl_index: c.csl_index }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockReason {
    NoSelfReport,
    NoLbsnLink,
    LowDiversity,
    SparseActivity,
}

impl BlockReason {
    pub fn code(self) -> &'static str {
        match self {
            BlockReason::NoSelfReport => "NoSelfReport",
            BlockReason::NoLbsnLink => "NoLbsnLink",
            BlockReason::LowDiversity => "LowDiversity",
            BlockReason::SparseActivity => "SparseActivity",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BlockThresholds {
    /// Minimum distinct users per cluster.
    pub diversity: usize,
    /// Minimum mean tuples per active day per cluster.
    pub per_day: f64,
}

impl Default for BlockThresholds {
    fn default() -> Self {
        BlockThresholds { diversity: 100, per_day: 5.0 }
    }
}

#[derive(Debug)]
pub struct BlockFilterOutcome {
    pub allowed: Vec<Community>,
    pub blocked: Vec<(Community, Vec<BlockReason>)>,
}

/// Apply the four sanity rules; a community failing any rule is blocked
/// with all applicable reason codes.
pub fn block_filter(communities: Vec<Community>, thresholds: BlockThresholds) -> BlockFilterOutcome {
    let mut allowed = Vec::new();
    let mut blocked = Vec::new();
    for c in communities {
        let mut reasons = Vec::new();
        if !c.tuples().any(is_self_report) {
            reasons.push(BlockReason::NoSelfReport);
        }
        if !c.tuples().any(|t| t.venue_ref.is_some()) {
            reasons.push(BlockReason::NoLbsnLink);
        }
        if c.clusters.iter().any(|cl| cl.distinct_users < thresholds.diversity) {
            reasons.push(BlockReason::LowDiversity);
        }
        if c.clusters.iter().any(|cl| cl.tuples_per_active_day() < thresholds.per_day) {
            reasons.push(BlockReason::SparseActivity);
        }
        if reasons.is_empty() {
            allowed.push(c);
        } else {
            blocked.push((c, reasons));
        }
    }
    BlockFilterOutcome { allowed, blocked }
}

/// JSON-facing community summary.
#[derive(Debug, Serialize, Deserialize)]
pub struct CommunityReport {
    pub kind: String,
    pub label: String,
    pub member_count: usize,
    pub clusters: Vec<ClusterStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csl_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocked_reasons: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterStats {
    pub label: String,
    pub tuple_count: usize,
    pub distinct_users: usize,
    pub tuples_per_active_day: f64,
}

impl CommunityReport {
    pub fn new(c: &Community, reasons: Option<&[BlockReason]>) -> Self {
        CommunityReport {
            kind: c.kind.name().to_string(),
            label: c.label.clone(),
            member_count: c.members.len(),
            clusters: c
                .clusters
                .iter()
                .map(|cl| ClusterStats {
                    label: cl.label.clone(),
                    tuple_count: cl.tuples.len(),
                    distinct_users: cl.distinct_users,
                    tuples_per_active_day: cl.tuples_per_active_day(),
                })
                .collect(),
            csl_index: c.csl_index,
            blocked_reasons: reasons.map(|rs| rs.iter().map(|r| r.code().to_string()).collect()),
        }
    }
}

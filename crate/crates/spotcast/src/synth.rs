//! Deterministic synthetic stream generator: planted geo communities,
//! balanced languages, sentiments, sessions, and venue categories, plus
//! the matching venue directory and ground-truth files.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annotate::TOP_LEVEL_CATEGORIES;
use crate::ingest::{serialize_tuple, GeoPoint, Network, StreamTuple};
use crate::timeutil;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub cities: usize,
    pub users_per_city: usize,
    pub tuples_per_user: usize,
    /// Days between a user's first and last tuple.
    pub history_span_days: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            cities: 10,
            users_per_city: 50,
            tuples_per_user: 2,
            history_span_days: 31,
            seed: 7,
        }
    }
}

#[derive(Debug)]
pub struct SynthFixture {
    pub tuples: Vec<StreamTuple>,
    /// user_id -> planted city index.
    pub geo_truth: BTreeMap<String, usize>,
    /// venue ref -> category id entries for the directory TSV.
    pub venues: Vec<(String, String)>,
}

const CITY_CENTERS: [(f64, f64); 10] = [
    (40.71, -74.00),
    (51.50, -0.12),
    (35.68, 139.69),
    (-33.87, 151.21),
    (-23.55, -46.63),
    (28.61, 77.21),
    (6.52, 3.37),
    (59.93, 30.32),
    (19.43, -99.13),
    (-1.29, 36.82),
];

const LANGS: [&str; 4] = ["en", "tr", "ht", "es"];
const SESSION_HOURS: [usize; 4] = [9, 13, 17, 21];
const SENTIMENT_PHRASES: [&str; 3] = ["great awesome place", "awful bad place", "regular stop"];

// 2017-07-03 00:00 UTC, a Monday
const DAY0: i64 = 1_499_040_000;

/// Generate the planted-structure stream. Every tuple is a self-report
/// with a venue link; users never leave their planted city.
pub fn generate(cfg: &SynthConfig) -> SynthFixture {
    assert!(cfg.cities <= CITY_CENTERS.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tuples = Vec::new();
    let mut geo_truth = BTreeMap::new();
    let mut venues: BTreeMap<String, String> = BTreeMap::new();

    for city in 0..cfg.cities {
        let (clat, clon) = CITY_CENTERS[city];
        for i in 0..cfg.users_per_city {
            let u = city * cfg.users_per_city + i;
            let user_id = format!("user{u:04}");
            geo_truth.insert(user_id.clone(), city);
            let lang = LANGS[u % LANGS.len()];
            let hour = SESSION_HOURS[u % SESSION_HOURS.len()];
            let phrase = SENTIMENT_PHRASES[u % SENTIMENT_PHRASES.len()];
            for k in 0..cfg.tuples_per_user {
                let lat = clat + rng.gen_range(-0.0003..0.0003);
                let lon = clon + rng.gen_range(-0.0003..0.0003);
                let cat = (u + k) % TOP_LEVEL_CATEGORIES.len();
                let (cat_id, cat_name) = TOP_LEVEL_CATEGORIES[cat];
                let venue_ref = format!("4sq.com/c{city}{cat_id}");
                venues.insert(venue_ref.clone(), cat_id.to_string());
                let offset = timeutil::utc_offset_secs(Some(lon));
                let day = DAY0
                    + (k as i64) * cfg.history_span_days * 86_400 / (cfg.tuples_per_user as i64 - 1).max(1);
                let timestamp = day - offset + (hour as i64) * 3600 + (i as i64) * 60;
                let text = format!(
                    "i'm at {} {} number {} {} https://{}",
                    cat_name.to_lowercase(),
                    city,
                    k,
                    phrase,
                    venue_ref
                );
                tuples.push(StreamTuple {
                    user_id: user_id.clone(),
                    timestamp,
                    text,
                    lang: lang.to_string(),
                    geo: Some(GeoPoint { lat, lon }),
                    venue_ref: Some(venue_ref),
                    network: Network::Microblog,
                });
            }
        }
    }
    tuples.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.user_id.cmp(&b.user_id)));
    SynthFixture { tuples, geo_truth, venues: venues.into_iter().collect() }
}

/// Write `stream.jsonl`, `venues.tsv`, and `geo_truth.tsv` into `dir`.
pub fn write_fixture(fixture: &SynthFixture, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut stream = std::fs::File::create(dir.join("stream.jsonl"))?;
    for t in &fixture.tuples {
        writeln!(stream, "{}", serialize_tuple(t))?;
    }
    let mut venues = std::fs::File::create(dir.join("venues.tsv"))?;
    for (r, id) in &fixture.venues {
        writeln!(venues, "{r}\t{id}")?;
    }
    let mut truth = std::fs::File::create(dir.join("geo_truth.tsv"))?;
    for (u, c) in &fixture.geo_truth {
        writeln!(truth, "{u}\t{c}")?;
    }
    Ok(())
}

/// Load a `user<TAB>cluster` ground-truth file.
pub fn load_geo_truth(path: &Path) -> std::io::Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for line in std::fs::read_to_string(path)?.lines() {
        if let Some((u, c)) = line.trim().split_once('\t') {
            if let Ok(c) = c.parse() {
                out.insert(u.to_string(), c);
            }
        }
    }
    Ok(out)
}

/// Rand-index style pairwise agreement between two clusterings over the
/// users present in both.
pub fn pairwise_agreement(
    truth: &BTreeMap<String, usize>,
    predicted: &BTreeMap<String, usize>,
) -> f64 {
    let common: Vec<&String> = truth.keys().filter(|u| predicted.contains_key(*u)).collect();
    let n = common.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let same_truth = truth[common[i]] == truth[common[j]];
            let same_pred = predicted[common[i]] == predicted[common[j]];
            agree += usize::from(same_truth == same_pred);
            total += 1;
        }
    }
    agree as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affect::SentimentLexicon;
    use crate::annotate::{annotate_stream, VenueDirectory};
    use crate::community::{
        language_search, opinion_search, temporal_search, BlockThresholds,
    };
    use crate::geonet::{geonet_search, GeoNetConfig};
    use crate::ingest::is_self_report;

    #[test]
    fn shape_and_determinism() {
        let cfg = SynthConfig::default();
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.tuples.len(), 1000);
        assert_eq!(a.geo_truth.len(), 500);
        assert_eq!(a.tuples, b.tuples);
        assert!(a.tuples.iter().all(is_self_report));
        assert!(a.tuples.iter().all(|t| t.venue_ref.is_some() && t.geo.is_some()));
    }

    #[test]
    fn users_have_full_history_span() {
        let f = generate(&SynthConfig::default());
        let mut spans: BTreeMap<&str, (i64, i64)> = BTreeMap::new();
        for t in &f.tuples {
            let e = spans.entry(t.user_id.as_str()).or_insert((t.timestamp, t.timestamp));
            e.0 = e.0.min(t.timestamp);
            e.1 = e.1.max(t.timestamp);
        }
        assert!(spans.values().all(|(lo, hi)| hi - lo >= 30 * 86_400));
    }

    #[test]
    fn community_structure_matches_plant() {
        let f = generate(&SynthConfig::default());
        let lex = SentimentLexicon::builtin();
        let opinions = opinion_search(&f.tuples, &lex);
        assert_eq!(opinions.communities.len(), 3);

        let langs = language_search(&f.tuples);
        assert!(langs.len() <= 7);
        assert_eq!(langs.len(), 7);
        for c in &langs {
            assert!(c.clusters[0].distinct_users >= 40, "{}: {}", c.label, c.clusters[0].distinct_users);
        }

        let temporal = temporal_search(&f.tuples, 2);
        assert_eq!(temporal.len(), 4);
        for c in &temporal {
            assert!(c.clusters[0].distinct_users >= 100, "{}", c.label);
        }
    }

    #[test]
    fn geonet_recovers_planted_cities() {
        let f = generate(&SynthConfig::default());
        let communities = geonet_search(&f.tuples, &GeoNetConfig::default());
        assert!(communities.len() <= 10);
        let mut predicted = BTreeMap::new();
        for (i, c) in communities.iter().enumerate() {
            for m in &c.members {
                predicted.insert(m.clone(), i);
            }
        }
        let agreement = pairwise_agreement(&f.geo_truth, &predicted);
        assert!(agreement >= 0.9, "agreement {agreement}");
        assert_eq!(predicted.len(), 500);
    }

    #[test]
    fn tuples_per_active_day_clears_threshold() {
        let f = generate(&SynthConfig::default());
        let temporal = temporal_search(&f.tuples, 2);
        let thresholds = BlockThresholds { diversity: 40, per_day: 5.0 };
        for c in &temporal {
            assert!(c.clusters[0].tuples_per_active_day() >= thresholds.per_day);
        }
    }

    #[test]
    fn venues_resolve_to_all_ten_categories() {
        let f = generate(&SynthConfig::default());
        let entries: Vec<(&str, &str)> =
            f.venues.iter().map(|(r, id)| (r.as_str(), id.as_str())).collect();
        let mut dir = VenueDirectory::in_memory(&entries);
        let out = annotate_stream(&f.tuples, &mut dir);
        assert_eq!(out.dropped, 0);
        let labels: std::collections::BTreeSet<&str> =
            out.labeled.iter().map(|(_, c)| c.top_level.as_str()).collect();
        assert_eq!(labels.len(), 10);
    }

    #[test]
    fn fixture_files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let f = generate(&SynthConfig::default());
        write_fixture(&f, dir.path()).unwrap();
        let truth = load_geo_truth(&dir.path().join("geo_truth.tsv")).unwrap();
        assert_eq!(truth, f.geo_truth);
        let stream = std::fs::read_to_string(dir.path().join("stream.jsonl")).unwrap();
        assert_eq!(stream.lines().count(), f.tuples.len());
        let first: StreamTuple = crate::ingest::parse_tuple(stream.lines().next().unwrap()).unwrap();
        assert_eq!(&first, &f.tuples[0]);
    }

    #[test]
    fn pairwise_agreement_extremes() {
        let truth: BTreeMap<String, usize> =
            [("a", 0), ("b", 0), ("c", 1)].map(|(u, c)| (u.to_string(), c)).into();
        assert_eq!(pairwise_agreement(&truth, &truth), 1.0);
        let flipped: BTreeMap<String, usize> =
            [("a", 0), ("b", 1), ("c", 0)].map(|(u, c)| (u.to_string(), c)).into();
        assert!(pairwise_agreement(&truth, &flipped) < 1.0);
    }
}

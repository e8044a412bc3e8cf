//! Parsing, filtering, normalization and deduplication of microblog
//! stream tuples.
//!
//! The wire format is JSONL: one JSON object per line with fields
//! `{user, ts, text, lang?, lat?, lon?, venue?, network?}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textsim::levenshtein;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Network {
    #[default]
    Microblog,
    Lbsn,
}

/// One self-position-reporting microblog post.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamTuple {
    pub user_id: String,
    /// UTC epoch seconds, strictly positive.
    pub timestamp: i64,
    pub text: String,
    /// ISO-639-1 code, lowercase; `"und"` when unknown.
    pub lang: String,
    pub geo: Option<GeoPoint>,
    pub venue_ref: Option<String>,
    pub network: Network,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing required field: {0}")]
    MissingField(&'static str),
    #[error("range violation: {0}")]
    RangeViolation(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("normalized text shorter than 3 characters")]
pub struct TooShort;

#[derive(Serialize, Deserialize)]
struct WireTuple {
    user: String,
    ts: i64,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    network: Option<Network>,
}

/// Parse one JSONL line into a tuple. Unknown keys are ignored.
pub fn parse_tuple(line: &str) -> Result<StreamTuple, ParseError> {
    let wire: WireTuple = serde_json::from_str(line).map_err(|e| {
        if e.to_string().contains("missing field") {
            let msg = e.to_string();
            for f in ["user", "ts", "text"] {
                if msg.contains(&format!("`{f}`")) {
                    return ParseError::MissingField(match f {
                        "user" => "user",
                        "ts" => "ts",
                        _ => "text",
                    });
                }
            }
            ParseError::MalformedJson(msg)
        } else {
            ParseError::MalformedJson(e.to_string())
        }
    })?;
    if wire.ts <= 0 {
        return Err(ParseError::RangeViolation(format!("ts={} must be > 0", wire.ts)));
    }
    if wire.text.is_empty() {
        return Err(ParseError::RangeViolation("text is empty".into()));
    }
    let geo = match (wire.lat, wire.lon) {
        (Some(lat), Some(lon)) => {
            if !(-90.0..=90.0).contains(&lat) {
                return Err(ParseError::RangeViolation(format!("lat={lat} out of [-90,90]")));
            }
            if !(-180.0..=180.0).contains(&lon) {
                return Err(ParseError::RangeViolation(format!("lon={lon} out of [-180,180]")));
            }
            Some(GeoPoint { lat, lon })
        }
        (None, None) => None,
        _ => return Err(ParseError::RangeViolation("lat/lon must come in pairs".into())),
    };
    Ok(StreamTuple {
        user_id: wire.user,
        timestamp: wire.ts,
        text: wire.text,
        lang: wire.lang.map(|l| l.to_ascii_lowercase()).unwrap_or_else(|| "und".into()),
        geo,
        venue_ref: wire.venue,
        network: wire.network.unwrap_or_default(),
    })
}

/// Serialize a tuple back to its JSONL object form.
pub fn serialize_tuple(t: &StreamTuple) -> String {
    let wire = WireTuple {
        user: t.user_id.clone(),
        ts: t.timestamp,
        text: t.text.clone(),
        lang: if t.lang == "und" { None } else { Some(t.lang.clone()) },
        lat: t.geo.map(|g| g.lat),
        lon: t.geo.map(|g| g.lon),
        venue: t.venue_ref.clone(),
        network: if t.network == Network::Microblog { None } else { Some(t.network) },
    };
    serde_json::to_string(&wire).expect("tuple serialization cannot fail")
}

/// True iff the tuple announces the author's current venue: text mentions
/// "i'm at" (ASCII or U+2019 apostrophe, case-insensitive) or "4sq.com",
/// or a venue reference is attached.
pub fn is_self_report(t: &StreamTuple) -> bool {
    if t.venue_ref.is_some() {
        return true;
    }
    let lower = t.text.to_lowercase();
    lower.contains("i'm at") || lower.contains("i\u{2019}m at") || lower.contains("4sq.com")
}

/// Lowercase, keep printable ASCII (0x20..=0x7E), trim and collapse
/// whitespace. Never fails; may return an empty string.
pub fn normalize_text_lossy(s: &str) -> String {
    let lowered = s.to_lowercase();
    let ascii: String = lowered
        .chars()
        .filter(|c| (' '..='~').contains(c))
        .collect();
    ascii.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalization with the minimum-length gate: results shorter than 3
/// characters are rejected.
pub fn normalize_text(s: &str) -> Result<String, TooShort> {
    let out = normalize_text_lossy(s);
    if out.chars().count() < 3 {
        Err(TooShort)
    } else {
        Ok(out)
    }
}

/// Drop near-duplicate tuples per user.
///
/// Tuples are scanned in timestamp order (ties by input position); a tuple
/// is dropped iff an earlier kept tuple from the same user has
/// normalized-text Levenshtein distance `<= max_dist`. Output preserves
/// the input order of the kept tuples.
pub fn dedup_stream(tuples: &[StreamTuple], max_dist: usize) -> Vec<StreamTuple> {
    let mut order: Vec<usize> = (0..tuples.len()).collect();
    order.sort_by_key(|&i| (tuples[i].timestamp, i));

    let normalized: Vec<String> =
        tuples.iter().map(|t| normalize_text_lossy(&t.text)).collect();

    let mut kept_by_user: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut keep = vec![false; tuples.len()];
    for &i in &order {
        let user = tuples[i].user_id.as_str();
        let earlier = kept_by_user.entry(user).or_default();
        let ni = &normalized[i];
        let dup = earlier.iter().any(|&j| {
            let nj = &normalized[j];
            // length gap alone already exceeds the threshold
            ni.chars().count().abs_diff(nj.chars().count()) <= max_dist
                && levenshtein(ni, nj) <= max_dist
        });
        if !dup {
            earlier.push(i);
            keep[i] = true;
        }
    }
    tuples
        .iter()
        .zip(keep)
        .filter_map(|(t, k)| k.then(|| t.clone()))
        .collect()
}

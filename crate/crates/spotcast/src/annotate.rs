//! Venue-category annotation: resolve venue references against a
//! pluggable directory (offline TSV fixture plus optional remote
//! client with a durable cache) and label self-report tuples.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::StreamTuple;

/// The fixed label space: the 10 canonical top-level venue categories,
/// paired with their directory ids.
pub const TOP_LEVEL_CATEGORIES: [(&str, &str); 10] = [
    ("arts", "Arts & Entertainment"),
    ("college", "College & University"),
    ("event", "Event"),
    ("food", "Food"),
    ("nightlife", "Nightlife Spot"),
    ("outdoors", "Outdoors & Recreation"),
    ("professional", "Professional & Other Places"),
    ("residence", "Residence"),
    ("shop", "Shop & Service"),
    ("travel", "Travel & Transport"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueCategory {
    pub id: String,
    pub name: String,
    pub top_level: String,
}

/// Category for a directory id, or None when the id is not one of the
/// 10 canonical ids.
pub fn category_for_id(id: &str) -> Option<VenueCategory> {
    TOP_LEVEL_CATEGORIES
        .iter()
        .find(|(cid, _)| *cid == id)
        .map(|(cid, name)| VenueCategory {
            id: (*cid).to_string(),
            name: (*name).to_string(),
            top_level: (*name).to_string(),
        })
}

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("venue reference not found: {0}")]
    NotFound(String),
    #[error("remote directory unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("unknown category id in directory: {0}")]
    UnknownCategoryId(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Venue mention pulled out of a tuple: the explicit `venue_ref` field,
/// else the first 4sq.com shortlink in the text, else the lowercased
/// name following "i'm at" up to the first " w/" or URL.
pub fn extract_venue_ref(t: &StreamTuple) -> Option<String> {
    if let Some(v) = &t.venue_ref {
        return Some(v.clone());
    }
    let lower = t.text.to_lowercase().replace('\u{2019}', "'");
    if let Some(pos) = lower.find("4sq.com/") {
        let tail = &lower[pos..];
        let end = tail
            .find(|c: char| c.is_whitespace())
            .unwrap_or(tail.len());
        let link = tail[..end].trim_end_matches(|c: char| !c.is_alphanumeric());
        if link.len() > "4sq.com/".len() {
            return Some(link.to_string());
        }
    }
    if let Some(pos) = lower.find("i'm at ") {
        let tail = &lower[pos + "i'm at ".len()..];
        let mut end = tail.len();
        for stop in [" w/", "http://", "https://"] {
            if let Some(p) = tail.find(stop) {
                end = end.min(p);
            }
        }
        let name = tail[..end].trim();
        if !name.is_empty() {
            return Some(name.to_string());
        }
    }
    None
}

/// Remote venue-directory lookup; returns the category id for a ref.
pub trait RemoteVenueClient {
    fn lookup(&self, venue_ref: &str) -> Result<String, AnnotateError>;
}

/// HTTP remote client: GET `{base_url}/venues/{ref}` with the API key
/// from the `VENUE_API_KEY` environment variable, expecting a JSON body
/// `{"category_id": "..."}`.
pub struct HttpVenueClient {
    pub base_url: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct VenueResponse {
    category_id: String,
}

impl HttpVenueClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpVenueClient { base_url: base_url.into(), client: reqwest::blocking::Client::new() }
    }
}

impl RemoteVenueClient for HttpVenueClient {
    fn lookup(&self, venue_ref: &str) -> Result<String, AnnotateError> {
        let key = std::env::var("VENUE_API_KEY").unwrap_or_default();
        let url = format!("{}/venues/{}", self.base_url.trim_end_matches('/'), venue_ref);
        let resp = self
            .client
            .get(&url)
            .query(&[("key", key.as_str())])
            .send()
            .map_err(|e| AnnotateError::RemoteUnavailable(e.to_string()))?;
        if resp.status() == reqwest::StatusCode::NOT_FOUND {
            return Err(AnnotateError::NotFound(venue_ref.to_string()));
        }
        let body: VenueResponse = resp
            .error_for_status()
            .map_err(|e| AnnotateError::RemoteUnavailable(e.to_string()))?
            .json()
            .map_err(|e| AnnotateError::RemoteUnavailable(e.to_string()))?;
        Ok(body.category_id)
    }
}

/// Venue directory backed by a TSV cache (`ref<TAB>category_id`, one
/// entry per line, append-only) with an optional remote client for
/// misses.
pub struct VenueDirectory {
    cache: BTreeMap<String, String>,
    cache_path: Option<PathBuf>,
    remote: Option<Box<dyn RemoteVenueClient>>,
}

impl VenueDirectory {
    /// Offline directory loaded from a fixture TSV.
    pub fn from_fixture(path: &Path) -> Result<Self, AnnotateError> {
        let mut dir = VenueDirectory {
            cache: BTreeMap::new(),
            cache_path: Some(path.to_path_buf()),
            remote: None,
        };
        let content = std::fs::read_to_string(path)?;
        for line in content.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((r, id)) = line.split_once('\t') {
                dir.cache.insert(r.to_string(), id.to_string());
            }
        }
        Ok(dir)
    }

    pub fn in_memory(entries: &[(&str, &str)]) -> Self {
        VenueDirectory {
            cache: entries.iter().map(|(r, id)| (r.to_string(), id.to_string())).collect(),
            cache_path: None,
            remote: None,
        }
    }

    pub fn with_remote(mut self, remote: Box<dyn RemoteVenueClient>) -> Self {
        self.remote = Some(remote);
        self
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    /// Resolve a venue reference to its category. Cache hits are served
    /// offline; misses go to the remote client when one is configured and
    /// successful answers are appended to the cache file.
    pub fn lookup_category(&mut self, venue_ref: &str) -> Result<VenueCategory, AnnotateError> {
        if let Some(id) = self.cache.get(venue_ref) {
            return category_for_id(id)
                .ok_or_else(|| AnnotateError::UnknownCategoryId(id.clone()));
        }
        let Some(remote) = &self.remote else {
            return Err(AnnotateError::NotFound(venue_ref.to_string()));
        };
        let id = remote.lookup(venue_ref)?;
        let category =
            category_for_id(&id).ok_or_else(|| AnnotateError::UnknownCategoryId(id.clone()))?;
        self.cache.insert(venue_ref.to_string(), id.clone());
        if let Some(path) = &self.cache_path {
            let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{venue_ref}\t{id}")?;
        }
        Ok(category)
    }
}

#[derive(Debug)]
pub struct AnnotateResult {
    pub labeled: Vec<(StreamTuple, VenueCategory)>,
    pub dropped: usize,
}

/// Label every tuple whose venue reference resolves; unresolvable
/// tuples are dropped and counted.
pub fn annotate_stream(tuples: &[StreamTuple], directory: &mut VenueDirectory) -> AnnotateResult {
    let mut labeled = Vec::new();
    let mut dropped = 0usize;
    for t in tuples {
        let resolved = extract_venue_ref(t)
            .and_then(|r| directory.lookup_category(&r).ok());
        match resolved {
            Some(cat) => labeled.push((t.clone(), cat)),
            None => dropped += 1,
        }
    }
    AnnotateResult { labeled, dropped }
}

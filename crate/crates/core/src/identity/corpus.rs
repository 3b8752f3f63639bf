use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::wire::claim_from_value;
use super::{Claim, ClaimKind, Status};
use crate::error::{Error, Result};

/// Environment variable naming a directory that replaces the bundled corpus.
pub const CORPUS_ENV: &str = "SERIESLAB_CORPUS";

const BUNDLED: &[(&str, &str)] = &[
    ("manifest.json", include_str!("../../corpus/manifest.json")),
    ("series-proven.json", include_str!("../../corpus/series-proven.json")),
    ("series-open.json", include_str!("../../corpus/series-open.json")),
    ("congruences.json", include_str!("../../corpus/congruences.json")),
    ("certificates.json", include_str!("../../corpus/certificates.json")),
];

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ManifestFile {
    files: Vec<String>,
    /// Expected number of entries per status.
    counts: BTreeMap<Status, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub kind: ClaimKind,
    pub status: Status,
    pub section: String,
    pub anchor: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    claims: Vec<Claim>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_claims(claims: Vec<Claim>) -> Result<Corpus> {
        let mut index = HashMap::new();
        for (i, c) in claims.iter().enumerate() {
            if index.insert(c.id().to_string(), i).is_some() {
                return Err(Error::Corpus(format!("duplicate id `{}`", c.id())));
            }
        }
        Ok(Corpus { claims, index })
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&Claim> {
        self.index
            .get(id)
            .map(|&i| &self.claims[i])
            .ok_or_else(|| Error::Unknown { kind: "claim", name: id.to_string() })
    }

    pub fn series(&self, id: &str) -> Result<&super::SeriesIdentity> {
        self.get(id)?.as_series().ok_or_else(|| Error::InvalidArgument(format!("`{id}` is not a series identity")))
    }
}

/// Selects claims by status, kind, section prefix and id.
#[derive(Clone, Debug, Default)]
pub struct Filter {
    pub statuses: Vec<Status>,
    pub kinds: Vec<ClaimKind>,
    pub section: Option<String>,
    pub ids: Vec<String>,
}

impl Filter {
    pub fn status(s: Status) -> Self {
        Filter { statuses: vec![s], ..Default::default() }
    }

    pub fn kind(k: ClaimKind) -> Self {
        Filter { kinds: vec![k], ..Default::default() }
    }

    pub fn with_kind(mut self, k: ClaimKind) -> Self {
        self.kinds.push(k);
        self
    }

    pub fn matches(&self, c: &Claim) -> bool {
        let m = c.meta();
        (self.statuses.is_empty() || self.statuses.contains(&m.status))
            && (self.kinds.is_empty() || self.kinds.contains(&c.kind()))
            && self.section.as_ref().is_none_or(|s| m.section.starts_with(s.as_str()))
            && (self.ids.is_empty() || self.ids.iter().any(|i| i == &m.id))
    }
}

pub fn corpus_filter<'a>(corpus: &'a Corpus, filter: &Filter) -> Vec<&'a Claim> {
    corpus.claims.iter().filter(|c| filter.matches(c)).collect()
}

fn parse_file(name: &str, text: &str) -> Result<Vec<Claim>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Corpus(format!("{name}: {e}")))?;
    let items = match v {
        Value::Array(a) => a,
        _ => return Err(Error::Corpus(format!("{name}: expected a JSON array"))),
    };
    items.into_iter().map(claim_from_value).collect::<Result<Vec<_>>>().map_err(|e| Error::Corpus(format!("{name}: {e}")))
}

fn load(read: impl Fn(&str) -> Result<String>) -> Result<Corpus> {
    let manifest: ManifestFile =
        serde_json::from_str(&read("manifest.json")?).map_err(|e| Error::Corpus(format!("manifest.json: {e}")))?;
    let mut claims = Vec::new();
    for f in &manifest.files {
        claims.extend(parse_file(f, &read(f)?)?);
    }
    let corpus = Corpus::from_claims(claims)?;
    let mut counts: BTreeMap<Status, usize> = BTreeMap::new();
    for c in &corpus.claims {
        *counts.entry(c.meta().status).or_default() += 1;
    }
    for (s, &n) in &manifest.counts {
        let got = counts.get(s).copied().unwrap_or(0);
        if got != n {
            return Err(Error::Corpus(format!("manifest expects {n} {s} entries, found {got}")));
        }
    }
    Ok(corpus)
}

/// Loads the bundled corpus, or the directory named by [`CORPUS_ENV`].
pub fn corpus_load() -> Result<Corpus> {
    match std::env::var_os(CORPUS_ENV) {
        Some(dir) => corpus_load_from(Path::new(&dir)),
        None => load(|name| {
            BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| t.to_string())
                .ok_or_else(|| Error::Corpus(format!("no bundled file `{name}`")))
        }),
    }
}

/// Loads a corpus directory containing a `manifest.json`.
pub fn corpus_load_from(dir: &Path) -> Result<Corpus> {
    load(|name| std::fs::read_to_string(dir.join(name)).map_err(|e| Error::Corpus(format!("{}: {e}", dir.join(name).display()))))
}

pub fn manifest(corpus: &Corpus) -> Vec<ManifestEntry> {
    corpus
        .claims
        .iter()
        .map(|c| {
            let m = c.meta();
            ManifestEntry {
                id: m.id.clone(),
                kind: c.kind(),
                status: m.status,
                section: m.section.clone(),
                anchor: m.anchor.clone(),
                flags: m.flags.clone(),
            }
        })
        .collect()
}

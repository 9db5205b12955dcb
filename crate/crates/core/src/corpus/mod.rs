//! Immutable citation corpus store and time-filtered snapshots.
//!
//! Papers, authors and venues are interned into dense indices at build time.
//! External identifiers (the `#index` value of a paper, the exact author name,
//! the normalized venue string) are kept alongside for lookup and reporting.
//!
//! Citations carry no timestamp of their own; each citation edge is dated by
//! the publication year of the citing paper.

mod cache;
mod parse;
mod snapshot;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{load_cache, read_cache_header, write_cache, CacheHeader, CACHE_FORMAT_VERSION, CACHE_MAGIC};
pub use parse::{parse_corpus, parse_corpus_bytes, write_aminer, ParseReport, RecordError, RecordErrorKind};
pub use snapshot::CorpusSnapshot;

pub type Year = i32;

/// Dense index of a paper inside a [`CorpusStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PaperIdx(pub u32);

/// Dense index of an author inside a [`CorpusStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AuthorIdx(pub u32);

/// Dense index of a venue inside a [`CorpusStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VenueIdx(pub u32);

impl PaperIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl AuthorIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl VenueIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus source contains no valid paper records")]
    Empty,
    #[error("paper {0} is not visible at year {1}")]
    NotVisible(String, Year),
    #[error("unknown paper id {0}")]
    UnknownPaper(String),
    #[error("unknown author {0}")]
    UnknownAuthor(String),
    #[error("unknown or empty venue {0}")]
    UnknownVenue(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus cache error: {0}")]
    Cache(String),
}

/// One paper as stored. Author and reference lists are resolved to indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    pub abstract_text: String,
    /// First entry is the first author.
    pub author_ids: Vec<AuthorIdx>,
    pub venue_id: Option<VenueIdx>,
    pub year: Year,
    /// Deduplicated, self-references removed, dangling targets excluded.
    pub reference_ids: Vec<PaperIdx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRecord {
    /// Exact author name; doubles as the external author identifier.
    pub name: String,
    /// Authored papers, ordered by (year, index).
    pub paper_ids: Vec<PaperIdx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenueRecord {
    /// Case-folded, trimmed venue string.
    pub key: String,
    /// First spelling seen in the source.
    pub name: String,
}

/// A reference edge whose target is not in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingReference {
    pub citing: PaperIdx,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub citing: PaperIdx,
    pub year: Year,
}

/// Unresolved paper record, as read from a source file or built by hand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawPaper {
    pub paper_id: String,
    pub title: String,
    pub abstract_text: String,
    pub authors: Vec<String>,
    pub venue: String,
    pub year: Year,
    pub references: Vec<String>,
}

impl RawPaper {
    pub fn new(paper_id: impl Into<String>, year: Year) -> Self {
        RawPaper {
            paper_id: paper_id.into(),
            title: String::new(),
            year,
            ..Default::default()
        }
    }

    pub fn title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn abstract_text(mut self, text: impl Into<String>) -> Self {
        self.abstract_text = text.into();
        self
    }

    pub fn authors<S: AsRef<str>>(mut self, authors: &[S]) -> Self {
        self.authors = authors.iter().map(|a| a.as_ref().to_string()).collect();
        self
    }

    pub fn venue(mut self, venue: impl Into<String>) -> Self {
        self.venue = venue.into();
        self
    }

    pub fn cites<S: AsRef<str>>(mut self, refs: &[S]) -> Self {
        self.references = refs.iter().map(|r| r.as_ref().to_string()).collect();
        self
    }
}

/// Normalizes a venue string: trimmed and case-folded.
pub fn normalize_venue(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// The full, immutable corpus with an inverse citation index.
#[derive(Debug, Clone)]
pub struct CorpusStore {
    papers: Vec<PaperRecord>,
    paper_index: HashMap<String, PaperIdx>,
    authors: Vec<AuthorRecord>,
    author_index: HashMap<String, AuthorIdx>,
    venues: Vec<VenueRecord>,
    venue_index: HashMap<String, VenueIdx>,
    venue_papers: Vec<Vec<PaperIdx>>,
    in_citations: Vec<Vec<Citation>>,
    dangling: Vec<DanglingReference>,
    checksum: String,
}

/// Serializable core of a store; the indexes are rebuilt on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct StoreParts {
    pub papers: Vec<PaperRecord>,
    pub authors: Vec<String>,
    pub venues: Vec<VenueRecord>,
    pub dangling: Vec<DanglingReference>,
    pub checksum: String,
}

impl CorpusStore {
    /// Resolves raw records into a store. Records whose id repeats an earlier
    /// record are dropped and reported by position.
    pub fn from_raw(raw: Vec<RawPaper>, checksum: impl Into<String>) -> Result<(Self, Vec<usize>), CorpusError> {
        let mut paper_index: HashMap<String, PaperIdx> = HashMap::with_capacity(raw.len());
        let mut kept = Vec::with_capacity(raw.len());
        let mut duplicates = Vec::new();
        for (pos, r) in raw.into_iter().enumerate() {
            if paper_index.contains_key(&r.paper_id) {
                duplicates.push(pos);
                continue;
            }
            paper_index.insert(r.paper_id.clone(), PaperIdx(kept.len() as u32));
            kept.push(r);
        }
        if kept.is_empty() {
            return Err(CorpusError::Empty);
        }

        let mut author_names: Vec<String> = Vec::new();
        let mut author_index: HashMap<String, AuthorIdx> = HashMap::new();
        let mut venues: Vec<VenueRecord> = Vec::new();
        let mut venue_index: HashMap<String, VenueIdx> = HashMap::new();
        let mut dangling = Vec::new();
        let mut papers = Vec::with_capacity(kept.len());

        for (i, r) in kept.into_iter().enumerate() {
            let me = PaperIdx(i as u32);
            let mut author_ids: Vec<AuthorIdx> = Vec::with_capacity(r.authors.len());
            for name in &r.authors {
                let name = name.trim();
                if name.is_empty() {
                    continue;
                }
                let idx = match author_index.get(name) {
                    Some(&a) => a,
                    None => {
                        let a = AuthorIdx(author_names.len() as u32);
                        author_names.push(name.to_string());
                        author_index.insert(name.to_string(), a);
                        a
                    }
                };
                if !author_ids.contains(&idx) {
                    author_ids.push(idx);
                }
            }

            let key = normalize_venue(&r.venue);
            let venue_id = if key.is_empty() {
                None
            } else {
                Some(*venue_index.entry(key.clone()).or_insert_with(|| {
                    venues.push(VenueRecord {
                        key: key.clone(),
                        name: r.venue.trim().to_string(),
                    });
                    VenueIdx((venues.len() - 1) as u32)
                }))
            };

            let mut reference_ids: Vec<PaperIdx> = Vec::with_capacity(r.references.len());
            let mut seen_dangling: Vec<&str> = Vec::new();
            for target in &r.references {
                let target = target.trim();
                if target.is_empty() {
                    continue;
                }
                match paper_index.get(target) {
                    Some(&p) if p == me => {}
                    Some(&p) => {
                        if !reference_ids.contains(&p) {
                            reference_ids.push(p);
                        }
                    }
                    None => {
                        if !seen_dangling.contains(&target) {
                            seen_dangling.push(target);
                            dangling.push(DanglingReference {
                                citing: me,
                                target: target.to_string(),
                            });
                        }
                    }
                }
            }

            papers.push(PaperRecord {
                paper_id: r.paper_id,
                title: r.title,
                abstract_text: r.abstract_text,
                author_ids,
                venue_id,
                year: r.year,
                reference_ids,
            });
        }

        let parts = StoreParts {
            papers,
            authors: author_names,
            venues,
            dangling,
            checksum: checksum.into(),
        };
        Ok((Self::from_parts(parts), duplicates))
    }

    /// Builds a store from raw records, panicking on duplicate ids. Test and
    /// generator convenience.
    pub fn from_records(raw: Vec<RawPaper>) -> Result<Self, CorpusError> {
        let (store, dups) = Self::from_raw(raw, String::new())?;
        assert!(dups.is_empty(), "duplicate paper ids at positions {dups:?}");
        Ok(store)
    }

    pub(crate) fn from_parts(parts: StoreParts) -> Self {
        let StoreParts {
            papers,
            authors: author_names,
            venues,
            dangling,
            checksum,
        } = parts;

        let paper_index = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.paper_id.clone(), PaperIdx(i as u32)))
            .collect();
        let author_index = author_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), AuthorIdx(i as u32)))
            .collect();
        let venue_index = venues
            .iter()
            .enumerate()
            .map(|(i, v)| (v.key.clone(), VenueIdx(i as u32)))
            .collect();

        let mut author_papers: Vec<Vec<PaperIdx>> = vec![Vec::new(); author_names.len()];
        let mut venue_papers: Vec<Vec<PaperIdx>> = vec![Vec::new(); venues.len()];
        let mut in_citations: Vec<Vec<Citation>> = vec![Vec::new(); papers.len()];
        for (i, p) in papers.iter().enumerate() {
            let me = PaperIdx(i as u32);
            for a in &p.author_ids {
                author_papers[a.index()].push(me);
            }
            if let Some(v) = p.venue_id {
                venue_papers[v.index()].push(me);
            }
            for r in &p.reference_ids {
                in_citations[r.index()].push(Citation {
                    citing: me,
                    year: p.year,
                });
            }
        }
        let by_year = |list: &mut Vec<PaperIdx>| list.sort_by_key(|p| (papers[p.index()].year, *p));
        author_papers.iter_mut().for_each(by_year);
        venue_papers.iter_mut().for_each(by_year);
        for list in &mut in_citations {
            list.sort_by_key(|c| (c.year, c.citing));
        }

        let authors = author_names
            .into_iter()
            .zip(author_papers)
            .map(|(name, paper_ids)| AuthorRecord { name, paper_ids })
            .collect();

        CorpusStore {
            papers,
            paper_index,
            authors,
            author_index,
            venues,
            venue_index,
            venue_papers,
            in_citations,
            dangling,
            checksum,
        }
    }

    pub(crate) fn to_parts(&self) -> StoreParts {
        StoreParts {
            papers: self.papers.clone(),
            authors: self.authors.iter().map(|a| a.name.clone()).collect(),
            venues: self.venues.clone(),
            dangling: self.dangling.clone(),
            checksum: self.checksum.clone(),
        }
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn paper(&self, idx: PaperIdx) -> &PaperRecord {
        &self.papers[idx.index()]
    }

    pub fn paper_idx(&self, paper_id: &str) -> Option<PaperIdx> {
        self.paper_index.get(paper_id).copied()
    }

    pub fn num_papers(&self) -> usize {
        self.papers.len()
    }

    pub fn authors(&self) -> &[AuthorRecord] {
        &self.authors
    }

    pub fn author(&self, idx: AuthorIdx) -> &AuthorRecord {
        &self.authors[idx.index()]
    }

    pub fn author_idx(&self, name: &str) -> Option<AuthorIdx> {
        self.author_index.get(name.trim()).copied()
    }

    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    pub fn author_indices(&self) -> impl Iterator<Item = AuthorIdx> {
        (0..self.authors.len() as u32).map(AuthorIdx)
    }

    pub fn paper_indices(&self) -> impl Iterator<Item = PaperIdx> {
        (0..self.papers.len() as u32).map(PaperIdx)
    }

    pub fn venues(&self) -> &[VenueRecord] {
        &self.venues
    }

    pub fn venue(&self, idx: VenueIdx) -> &VenueRecord {
        &self.venues[idx.index()]
    }

    /// Looks a venue up by any spelling that normalizes to the same key.
    pub fn venue_idx(&self, name: &str) -> Option<VenueIdx> {
        self.venue_index.get(&normalize_venue(name)).copied()
    }

    /// Venue papers ordered by (year, index).
    pub fn venue_papers(&self, venue: VenueIdx) -> &[PaperIdx] {
        &self.venue_papers[venue.index()]
    }

    /// Citing papers of `paper`, ordered by (citing year, citing index).
    pub fn in_citations(&self, paper: PaperIdx) -> &[Citation] {
        &self.in_citations[paper.index()]
    }

    pub fn dangling_references(&self) -> &[DanglingReference] {
        &self.dangling
    }

    /// Total number of resolved (non-dangling) reference edges.
    pub fn num_citation_edges(&self) -> usize {
        self.in_citations.iter().map(Vec::len).sum()
    }

    /// SHA-256 of the source bytes, hex encoded; empty for hand-built stores.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn year_range(&self) -> Option<(Year, Year)> {
        let min = self.papers.iter().map(|p| p.year).min()?;
        let max = self.papers.iter().map(|p| p.year).max()?;
        Some((min, max))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_corpus(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectKind {
    DanglingReference,
    MissingAbstract,
    EmptyAuthorList,
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefectKind::DanglingReference => "dangling-reference",
            DefectKind::MissingAbstract => "missing-abstract",
            DefectKind::EmptyAuthorList => "empty-author-list",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub paper_id: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub num_papers: usize,
    pub num_authors: usize,
    pub num_venues: usize,
    pub num_citation_edges: usize,
    pub year_range: Option<(Year, Year)>,
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn count(&self, kind: DefectKind) -> usize {
        self.defects.iter().filter(|d| d.kind == kind).count()
    }

    pub fn is_clean(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("papers              {}\n", self.num_papers));
        out.push_str(&format!("authors             {}\n", self.num_authors));
        out.push_str(&format!("venues              {}\n", self.num_venues));
        out.push_str(&format!("citation edges      {}\n", self.num_citation_edges));
        match self.year_range {
            Some((lo, hi)) => out.push_str(&format!("years               {lo}-{hi}\n")),
            None => out.push_str("years               -\n"),
        }
        for kind in [
            DefectKind::DanglingReference,
            DefectKind::MissingAbstract,
            DefectKind::EmptyAuthorList,
        ] {
            out.push_str(&format!("{:<20}{}\n", kind.to_string(), self.count(kind)));
        }
        out
    }
}

/// Report-only consistency pass over a store.
pub fn validate_corpus(store: &CorpusStore) -> ValidationReport {
    let mut defects = Vec::new();
    for d in store.dangling_references() {
        defects.push(Defect {
            kind: DefectKind::DanglingReference,
            paper_id: store.paper(d.citing).paper_id.clone(),
            detail: d.target.clone(),
        });
    }
    for p in store.papers() {
        if p.abstract_text.trim().is_empty() {
            defects.push(Defect {
                kind: DefectKind::MissingAbstract,
                paper_id: p.paper_id.clone(),
                detail: String::new(),
            });
        }
        if p.author_ids.is_empty() {
            defects.push(Defect {
                kind: DefectKind::EmptyAuthorList,
                paper_id: p.paper_id.clone(),
                detail: String::new(),
            });
        }
    }
    ValidationReport {
        num_papers: store.num_papers(),
        num_authors: store.num_authors(),
        num_venues: store.venues().len(),
        num_citation_edges: store.num_citation_edges(),
        year_range: store.year_range(),
        defects,
    }
}

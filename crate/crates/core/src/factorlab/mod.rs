//! Factor vectors for papers and authors, labels, and the experimental
//! datasets built from them.

mod assemble;
mod context;
mod dataset;

use std::fmt;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub use assemble::{
    assemble_factors, author_factors, existing_factors, reference_factors, select_primary_author, temporal_factors,
    Assembled, AuthorFactors, AuthorRef, ManualAuthor, PaperView, ReferenceFactors, TemporalFactors, VenueRef,
};
pub use context::{SnapshotContext, TEMPORAL_WINDOW};
pub use dataset::{
    author_features, build_author_dataset, build_dataset, observed_future_h, AuthorDataset, AuthorExample, Dataset, LabeledExample,
    AUTHOR_FEATURES,
};

use crate::corpus::{CorpusError, Year};
use crate::topicmodel::TopicError;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("paper {0} has no authors")]
    NoAuthors(String),
    #[error("missing context artifact: {0}")]
    Dependency(String),
    #[error("paper {paper} (year {year}) is not before t = {t}")]
    SetMismatch { paper: String, year: Year, t: Year },
    #[error("corpus covers years {first}..={last}; requested {requested}")]
    Range { first: Year, last: Year, requested: Year },
    #[error("dataset format error: {0}")]
    Format(String),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimaryMode {
    /// Listed author with the highest h-index at `t`; ties go to the earliest.
    #[default]
    #[serde(alias = "max")]
    MaxH,
    First,
}

impl fmt::Display for PrimaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimaryMode::MaxH => "max",
            PrimaryMode::First => "first",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaperSet {
    /// Papers published in year `t`.
    #[default]
    New,
    /// Papers published before `t`.
    Old,
}

impl fmt::Display for PaperSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaperSet::New => "new",
            PaperSet::Old => "old",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FutureHSource {
    #[default]
    Observed,
    Predicted,
}

/// How A-first-ratio and A-max-ratio are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMode {
    /// Fraction of the author's prior papers cited at least the primary
    /// author's h-index times.
    #[default]
    Threshold,
    /// Primary author's h-index divided by the author's prior paper count.
    HOverPapers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub t: Year,
    pub delta_t: u32,
    pub mode: PrimaryMode,
    pub set: PaperSet,
    pub min_h: u32,
    pub future_h_source: FutureHSource,
    #[serde(default)]
    pub ratio_mode: RatioMode,
    /// Emit missing-data indicator factors alongside the catalog.
    #[serde(default)]
    pub include_flags: bool,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            t: 2007,
            delta_t: 5,
            mode: PrimaryMode::MaxH,
            set: PaperSet::New,
            min_h: 10,
            future_h_source: FutureHSource::Observed,
            ratio_mode: RatioMode::Threshold,
            include_flags: false,
        }
    }
}

impl DatasetSpec {
    pub fn horizon(&self) -> Year {
        self.t + self.delta_t as Year
    }
}

pub const PAPER_FACTORS: [&str; 24] = [
    "A-first-max",
    "A-ave-max",
    "A-sum-max",
    "A-first-ratio",
    "A-max-ratio",
    "A-num-authors",
    "C-popularity",
    "C-novelty",
    "C-diversity",
    "C-authority-first",
    "C-authority-max",
    "C-authority-ave",
    "V-h-index",
    "V-citation",
    "S-degree",
    "S-pagerank",
    "S-h-coauthor",
    "S-h-weight",
    "R-h-index",
    "R-citation",
    "T-ave-h",
    "T-max-h",
    "T-h-first",
    "T-h-max",
];

pub const EXISTING_FACTORS: [&str; 3] = ["E-numc", "E-numc-ave", "E-num-years"];

/// Missing-data indicators, each filed under the group whose factors it
/// qualifies.
pub const FLAG_FACTORS: [&str; 6] = [
    "A-no-prior-first",
    "A-no-prior-max",
    "C-no-references",
    "C-oov-text",
    "V-missing",
    "R-no-references",
];

/// Factor names for a dataset, in catalog order.
pub fn factor_names(set: PaperSet, include_flags: bool) -> Vec<&'static str> {
    let mut names: Vec<&'static str> = PAPER_FACTORS.to_vec();
    if set == PaperSet::Old {
        names.extend(EXISTING_FACTORS);
    }
    if include_flags {
        names.extend(FLAG_FACTORS);
    }
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FactorGroup {
    A,
    C,
    V,
    S,
    R,
    T,
    E,
}

impl FactorGroup {
    pub const ALL: [FactorGroup; 7] = [
        FactorGroup::A,
        FactorGroup::C,
        FactorGroup::V,
        FactorGroup::S,
        FactorGroup::R,
        FactorGroup::T,
        FactorGroup::E,
    ];

    pub fn of(name: &str) -> Option<FactorGroup> {
        let (prefix, _) = name.split_once('-')?;
        Some(match prefix {
            "A" => FactorGroup::A,
            "C" => FactorGroup::C,
            "V" => FactorGroup::V,
            "S" => FactorGroup::S,
            "R" => FactorGroup::R,
            "T" => FactorGroup::T,
            "E" => FactorGroup::E,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            FactorGroup::A => "author",
            FactorGroup::C => "content",
            FactorGroup::V => "venue",
            FactorGroup::S => "social",
            FactorGroup::R => "reference",
            FactorGroup::T => "temporal",
            FactorGroup::E => "existing",
        }
    }
}

impl fmt::Display for FactorGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Named factor values in catalog order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorVector {
    entries: Vec<(String, f64)>,
}

impl From<Vec<(String, f64)>> for FactorVector {
    fn from(entries: Vec<(String, f64)>) -> Self {
        FactorVector { entries }
    }
}

impl Serialize for FactorVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl FactorVector {
    pub fn push(&mut self, name: &str, value: f64) {
        debug_assert!(self.get(name).is_none(), "duplicate factor {name}");
        self.entries.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Values for the given names, in that order.
    pub fn select(&self, names: &[&str]) -> Option<Vec<f64>> {
        names.iter().map(|n| self.get(n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_sizes() {
        assert_eq!(factor_names(PaperSet::New, false).len(), 24);
        assert_eq!(factor_names(PaperSet::Old, false).len(), 27);
        assert_eq!(factor_names(PaperSet::Old, true).len(), 33);
    }

    #[test]
    fn every_factor_has_a_group() {
        for name in factor_names(PaperSet::Old, true) {
            assert!(FactorGroup::of(name).is_some(), "{name}");
        }
        assert_eq!(FactorGroup::of("V-h-index"), Some(FactorGroup::V));
        assert_eq!(FactorGroup::of("h-index"), None);
    }

    #[test]
    fn factor_vector_serializes_in_order() {
        let mut v = FactorVector::default();
        v.push("b", 1.0);
        v.push("a", 2.5);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"b":1.0,"a":2.5}"#);
        assert_eq!(v.select(&["a", "b"]), Some(vec![2.5, 1.0]));
        assert_eq!(v.select(&["c"]), None);
    }

    #[test]
    fn mode_names() {
        assert_eq!(serde_json::from_str::<PrimaryMode>("\"max\"").unwrap(), PrimaryMode::MaxH);
        assert_eq!(serde_json::from_str::<PrimaryMode>("\"max-h\"").unwrap(), PrimaryMode::MaxH);
        assert_eq!(PrimaryMode::First.to_string(), "first");
    }
}

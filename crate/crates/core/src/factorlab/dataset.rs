use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    assemble_factors, factor_names, select_primary_author, DatasetSpec, FactorError, PaperSet, PaperView,
    SnapshotContext,
};
use crate::corpus::{AuthorIdx, CorpusSnapshot, CorpusStore, PaperIdx, Year};
use crate::persist::write_atomic_with;
use crate::scholarmetrics::{author_profile, AuthorProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub paper_id: String,
    pub primary_author: String,
    /// Aligned with [`Dataset::feature_names`].
    pub factors: Vec<f64>,
    pub label: bool,
    /// Threshold the label was computed against.
    pub future_h: f64,
    /// Citations received by `t + delta_t`.
    pub future_citations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub feature_names: Vec<String>,
    pub examples: Vec<LabeledExample>,
}

fn check_range(store: &CorpusStore, requested: Year) -> Result<(), FactorError> {
    let (first, last) = store.year_range().ok_or(FactorError::Range {
        first: 0,
        last: 0,
        requested,
    })?;
    if requested > last || requested < first {
        return Err(FactorError::Range { first, last, requested });
    }
    Ok(())
}

/// Observed h-index at `t + delta_t`, for use as the label threshold.
pub fn observed_future_h(store: &Arc<CorpusStore>, spec: &DatasetSpec) -> Result<CorpusSnapshot, FactorError> {
    check_range(store, spec.horizon())?;
    Ok(CorpusSnapshot::build(store.clone(), spec.horizon()))
}

/// Labeled examples for one spec, sorted by paper id.
///
/// `future_h` gives the label threshold for a primary author: the observed
/// h-index at the horizon or a regressor's prediction.
pub fn build_dataset<F>(ctx: &SnapshotContext, spec: &DatasetSpec, future_h: F) -> Result<Dataset, FactorError>
where
    F: Fn(AuthorIdx) -> f64 + Sync,
{
    if spec.t != ctx.t() {
        return Err(FactorError::Dependency(format!(
            "context is built at {} but the dataset asks for t = {}",
            ctx.t(),
            spec.t
        )));
    }
    let store_arc = ctx.snapshot.store_arc().clone();
    let store = store_arc.as_ref();
    check_range(store, spec.horizon())?;
    let future = CorpusSnapshot::build(store_arc.clone(), spec.horizon());
    let snap = &ctx.snapshot;

    let candidates: Vec<PaperIdx> = store
        .paper_indices()
        .filter(|p| {
            let rec = store.paper(*p);
            let in_set = match spec.set {
                PaperSet::New => rec.year == spec.t,
                PaperSet::Old => rec.year < spec.t,
            };
            in_set && !rec.author_ids.is_empty()
        })
        .collect();

    let names = factor_names(spec.set, spec.include_flags);
    let built: Vec<Option<LabeledExample>> = candidates
        .par_iter()
        .map(|p| {
            let rec = store.paper(*p);
            let hs: Vec<u32> = rec.author_ids.iter().map(|a| snap.author_h(*a)).collect();
            let primary = select_primary_author(&hs, spec.mode).expect("authors are non-empty");
            if hs[primary] < spec.min_h {
                return Ok(None);
            }
            let view = PaperView::from_corpus(ctx, *p)?;
            let assembled = assemble_factors(&view, spec, ctx)?;
            let author = rec.author_ids[assembled.primary];
            let threshold = future_h(author);
            let future_citations = future.citations(*p);
            Ok(Some(LabeledExample {
                paper_id: rec.paper_id.clone(),
                primary_author: store.author(author).name.clone(),
                factors: assembled.factors.select(&names).expect("assembled factors follow the catalog"),
                label: f64::from(future_citations) >= threshold,
                future_h: threshold,
                future_citations,
            }))
        })
        .collect::<Result<_, FactorError>>()?;
    let mut examples: Vec<LabeledExample> = built.into_iter().flatten().collect();
    examples.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    if examples.is_empty() {
        log::warn!("dataset for t = {} ({} set) is empty", spec.t, spec.set);
    }
    Ok(Dataset {
        spec: spec.clone(),
        feature_names: names.into_iter().map(str::to_string).collect(),
        examples,
    })
}

const META_COLUMNS: [&str; 8] = [
    "paper_id",
    "primary_author",
    "t",
    "delta_t",
    "mode",
    "set",
    "future_h",
    "future_citations",
];

fn spec_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".spec.json");
    PathBuf::from(s)
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.examples.iter().map(|e| e.factors.clone()).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn positive_rate(&self) -> f64 {
        if self.examples.is_empty() {
            return 0.0;
        }
        self.examples.iter().filter(|e| e.label).count() as f64 / self.examples.len() as f64
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.feature_names.iter().position(|n| n == name)?;
        Some(self.examples.iter().map(|e| e.factors[j]).collect())
    }

    /// A copy restricted to the named features, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Dataset, FactorError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| FactorError::Format(format!("unknown factor {n}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Dataset {
            spec: self.spec.clone(),
            feature_names: names.to_vec(),
            examples: self
                .examples
                .iter()
                .map(|e| LabeledExample {
                    factors: idx.iter().map(|j| e.factors[*j]).collect(),
                    ..e.clone()
                })
                .collect(),
        })
    }

    /// Delimited text with a header row. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FactorError> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = META_COLUMNS
            .iter()
            .copied()
            .chain(self.feature_names.iter().map(String::as_str))
            .chain(["label"])
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        let s = &self.spec;
        for e in &self.examples {
            let mut row = vec![
                e.paper_id.clone(),
                e.primary_author.clone(),
                s.t.to_string(),
                s.delta_t.to_string(),
                s.mode.to_string(),
                s.set.to_string(),
                e.future_h.to_string(),
                e.future_citations.to_string(),
            ];
            row.extend(e.factors.iter().map(f64::to_string));
            row.push(u8::from(e.label).to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, spec: DatasetSpec) -> Result<Dataset, FactorError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        let n = header.len();
        if n < META_COLUMNS.len() + 1
            || header.iter().take(META_COLUMNS.len()).ne(META_COLUMNS.iter().copied())
            || &header[n - 1] != "label"
        {
            return Err(FactorError::Format("unexpected dataset header".into()));
        }
        let feature_names: Vec<String> = header.iter().skip(META_COLUMNS.len()).take(n - 1 - META_COLUMNS.len()).map(str::to_string).collect();
        let mut examples = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let bad = |what: &str| FactorError::Format(format!("row {}: bad {what}", line + 1));
            let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(&header[i]));
            let factors = (META_COLUMNS.len()..n - 1).map(num).collect::<Result<Vec<_>, _>>()?;
            examples.push(LabeledExample {
                paper_id: rec[0].to_string(),
                primary_author: rec[1].to_string(),
                factors,
                label: match &rec[n - 1] {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad("label")),
                },
                future_h: num(6)?,
                future_citations: rec[7].parse().map_err(|_| bad("future_citations"))?,
            });
        }
        Ok(Dataset {
            spec,
            feature_names,
            examples,
        })
    }

    /// Writes the CSV and a `.spec.json` sidecar.
    pub fn save(&self, path: &Path) -> Result<(), FactorError> {
        write_atomic_with(path, |f| {
            self.write_csv(std::io::BufWriter::new(f)).map_err(std::io::Error::other)
        })?;
        let spec = serde_json::to_vec_pretty(&self.spec).map_err(|e| FactorError::Format(e.to_string()))?;
        write_atomic_with(&spec_path(path), |f| f.write_all(&spec))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dataset, FactorError> {
        let spec_raw = std::fs::read(spec_path(path))?;
        let spec: DatasetSpec = serde_json::from_slice(&spec_raw).map_err(|e| FactorError::Format(e.to_string()))?;
        Dataset::read_csv(std::fs::File::open(path)?, spec)
    }
}

fn csv_err(e: csv::Error) -> FactorError {
    FactorError::Format(e.to_string())
}

pub const AUTHOR_FEATURES: [&str; 5] = ["h-index", "num-papers", "num-citations", "num-co", "num-years"];

/// Values of [`AUTHOR_FEATURES`] for one profile.
pub fn author_features(p: &AuthorProfile) -> Vec<f64> {
    vec![
        f64::from(p.h_index),
        f64::from(p.num_papers),
        p.num_citations,
        f64::from(p.num_co),
        f64::from(p.num_years),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorExample {
    pub author: String,
    /// Values of [`AUTHOR_FEATURES`] at `t`.
    pub features: Vec<f64>,
    pub current_h: f64,
    /// h-index at `t + delta_t`.
    pub future_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorDataset {
    pub t: Year,
    pub delta_t: u32,
    pub min_h: u32,
    pub examples: Vec<AuthorExample>,
}

impl AuthorDataset {
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.examples.iter().map(|e| e.features.clone()).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.examples.iter().map(|e| e.future_h).collect()
    }

    pub fn current_h(&self) -> Vec<f64> {
        self.examples.iter().map(|e| e.current_h).collect()
    }
}

/// Future h-index regression examples: every author active at `t` with
/// h-index at least `min_h`, sorted by name.
pub fn build_author_dataset(
    store: &Arc<CorpusStore>,
    t: Year,
    delta_t: u32,
    min_h: u32,
) -> Result<AuthorDataset, FactorError> {
    let horizon = t + delta_t as Year;
    check_range(store, t)?;
    check_range(store, horizon)?;
    let now = CorpusSnapshot::build(store.clone(), t);
    let future = CorpusSnapshot::build(store.clone(), horizon);
    let mut examples: Vec<AuthorExample> = now
        .active_authors()
        .filter(|a| now.author_h(*a) >= min_h)
        .map(|a| {
            let profile = author_profile(&now, a).expect("active author is known");
            AuthorExample {
                author: store.author(a).name.clone(),
                features: author_features(&profile),
                current_h: f64::from(profile.h_index),
                future_h: f64::from(future.author_h(a)),
            }
        })
        .collect();
    examples.sort_by(|a, b| a.author.cmp(&b.author));
    Ok(AuthorDataset {
        t,
        delta_t,
        min_h,
        examples,
    })
}

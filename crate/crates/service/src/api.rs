//! Request and response bodies and the pure prediction functions behind the
//! endpoints.

use hforecast::corpus::{PaperIdx, Year};
use hforecast::factorlab::{
    assemble_factors, AuthorRef, DatasetSpec, FactorVector, ManualAuthor, PaperSet, PaperView, PrimaryMode, VenueRef,
};
use hforecast::learners::predict_linear;
use hforecast::pipeline::predict_author_h;
use hforecast::topicmodel::{infer_doc_topics, tokenize};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::artifacts::{Artifacts, MAX_HORIZON};
use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HIndexQuery {
    pub current_h: u32,
    pub num_papers: u32,
    pub avg_citations: f64,
    pub num_coauthors: u32,
    pub years_active: u32,
    pub horizon_years: u32,
}

impl HIndexQuery {
    pub const FIELDS: [&'static str; 6] =
        ["current_h", "num_papers", "avg_citations", "num_coauthors", "years_active", "horizon_years"];

    /// Row in the regressor's feature order.
    pub fn features(&self) -> Vec<f64> {
        vec![
            f64::from(self.current_h),
            f64::from(self.num_papers),
            self.avg_citations,
            f64::from(self.num_coauthors),
            f64::from(self.years_active),
        ]
    }

    /// Parses and range-checks a JSON body, naming the first bad field.
    pub fn from_json(body: &[u8]) -> Result<Self, ApiError> {
        let value: Value = serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(ApiError::bad_request("body must be a JSON object"));
        };
        if let Some(k) = map.keys().find(|k| !Self::FIELDS.contains(&k.as_str())) {
            return Err(ApiError::validation(k.clone(), "unknown field"));
        }
        let q = HIndexQuery {
            current_h: uint_field(&map, "current_h", u32::MAX)?,
            num_papers: uint_field(&map, "num_papers", u32::MAX)?,
            avg_citations: real_field(&map, "avg_citations")?,
            num_coauthors: uint_field(&map, "num_coauthors", u32::MAX)?,
            years_active: uint_field(&map, "years_active", u32::MAX)?,
            horizon_years: uint_field(&map, "horizon_years", MAX_HORIZON)?,
        };
        if q.horizon_years == 0 {
            return Err(ApiError::validation("horizon_years", format!("must be between 1 and {MAX_HORIZON}")));
        }
        Ok(q)
    }
}

fn uint_field(map: &Map<String, Value>, name: &str, max: u32) -> Result<u32, ApiError> {
    let v = map.get(name).ok_or_else(|| ApiError::validation(name, "is required"))?;
    let n = v
        .as_u64()
        .or_else(|| v.as_f64().filter(|f| f.fract() == 0.0 && *f >= 0.0).map(|f| f as u64))
        .ok_or_else(|| ApiError::validation(name, "must be a non-negative integer"))?;
    if n > u64::from(max) {
        return Err(ApiError::validation(name, format!("must be at most {max}")));
    }
    Ok(n as u32)
}

fn real_field(map: &Map<String, Value>, name: &str) -> Result<f64, ApiError> {
    let v = map.get(name).ok_or_else(|| ApiError::validation(name, "is required"))?;
    match v.as_f64() {
        Some(f) if f.is_finite() && f >= 0.0 => Ok(f),
        _ => Err(ApiError::validation(name, "must be a non-negative number")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HIndexResponse {
    pub predicted_h: f64,
    /// Regressor output before flooring at the current h-index.
    pub raw_prediction: f64,
    pub clipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
    pub horizon: u32,
    pub model_version: String,
}

pub fn predict_hindex(a: &Artifacts, q: &HIndexQuery) -> Result<HIndexResponse, ApiError> {
    if a.hindex.is_empty() {
        return Err(ApiError::unavailable("h-index model"));
    }
    let m = a.hindex.get(&q.horizon_years).ok_or_else(|| {
        let have: Vec<String> = a.hindex.keys().map(u32::to_string).collect();
        ApiError::new(
            axum::http::StatusCode::UNPROCESSABLE_ENTITY,
            "no_model_for_horizon",
            format!("no h-index model for horizon {} (available: {})", q.horizon_years, have.join(", ")),
        )
        .with_field("horizon_years")
    })?;
    let p = predict_linear(&m.model, &q.features(), f64::from(q.current_h)).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(HIndexResponse {
        predicted_h: p.value,
        raw_prediction: p.raw,
        clipped: p.clipped,
        notice: p
            .clipped
            .then(|| format!("model score {:.4} is below the current h-index; clipped to {}", p.raw, q.current_h)),
        horizon: q.horizon_years,
        model_version: m.version.clone(),
    })
}

/// Manual author profile for authors the corpus cannot resolve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManualProfile {
    pub h_index: u32,
    /// Citation counts of the author's earlier papers.
    #[serde(default)]
    pub prior_citations: Vec<u32>,
    #[serde(default)]
    pub delta_h: u32,
    #[serde(default)]
    pub num_coauthors: u32,
    #[serde(default)]
    pub years_active: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthorDescriptor {
    pub name: String,
    /// Corpus author key; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ManualProfile>,
}

/// A corpus venue by name, or manual venue statistics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VenueDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_citations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperQuery {
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<AuthorDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<VenueDescriptor>,
    /// Defaults to the snapshot year.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<Year>,
    /// Defaults to the mode the classifier was trained with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<PrimaryMode>,
    /// Corpus paper ids the paper cites.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
}

impl PaperQuery {
    pub fn from_json(body: &[u8]) -> Result<Self, ApiError> {
        serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid paper query: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimaryAuthor {
    pub index: usize,
    pub name: String,
    pub h_index: u32,
    /// Regressor estimate of the author's h-index at the classifier's horizon.
    pub predicted_future_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaperResponse {
    pub probability: f64,
    pub factor_breakdown: FactorVector,
    pub primary_author: PrimaryAuthor,
    /// No token of the title or abstract is in the topic vocabulary; topics
    /// fall back to uniform.
    pub all_oov: bool,
    pub topic_distribution: Vec<f64>,
    pub venue_resolved: bool,
    pub ignored_references: Vec<String>,
    pub t: Year,
    pub horizon: u32,
    pub model_version: String,
    pub hindex_model_version: Option<String>,
}

fn manual(name: &str, p: &ManualProfile) -> ManualAuthor {
    ManualAuthor {
        name: name.to_string(),
        h_index: p.h_index,
        prior_citations: p.prior_citations.clone(),
        delta_h: p.delta_h,
        num_coauthors: p.num_coauthors,
        years_active: p.years_active,
    }
}

fn manual_features(m: &ManualAuthor) -> Vec<f64> {
    let n = m.prior_citations.len();
    let mean = if n == 0 {
        0.0
    } else {
        m.prior_citations.iter().map(|c| f64::from(*c)).sum::<f64>() / n as f64
    };
    vec![
        f64::from(m.h_index),
        n as f64,
        mean,
        f64::from(m.num_coauthors),
        f64::from(m.years_active),
    ]
}

fn finite_non_negative(field: &str, v: f64) -> Result<f64, ApiError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ApiError::validation(field, "must be a non-negative number"))
    }
}

pub fn predict_paper(a: &Artifacts, q: &PaperQuery) -> Result<PaperResponse, ApiError> {
    let ctx = a.context.as_deref().ok_or_else(|| ApiError::unavailable("snapshot context"))?;
    let clf = a.classifier.as_ref().ok_or_else(|| ApiError::unavailable("paper model"))?;
    let store = ctx.store();
    let snap = &ctx.snapshot;
    let t = ctx.t();

    if q.title.trim().is_empty() && q.abstract_text.trim().is_empty() {
        return Err(ApiError::validation("title", "title and abstract are both empty"));
    }
    if q.authors.is_empty() {
        return Err(ApiError::validation("authors", "at least one author is required"));
    }
    let year = q.year.unwrap_or(t);
    if year < t {
        return Err(ApiError::validation("year", format!("must be at least the snapshot year {t}")));
    }

    let mut authors = Vec::with_capacity(q.authors.len());
    for (i, d) in q.authors.iter().enumerate() {
        let name = d.name.trim();
        if name.is_empty() {
            return Err(ApiError::validation(format!("authors[{i}].name"), "must not be empty"));
        }
        if let Some(p) = &d.profile {
            authors.push(AuthorRef::Manual(manual(name, p)));
            continue;
        }
        let key = d.author_id.as_deref().unwrap_or(name);
        match store.author_idx(key).filter(|a| !snap.author_papers(*a).is_empty()) {
            Some(idx) => authors.push(AuthorRef::Corpus(idx)),
            None => {
                return Err(ApiError::new(
                    axum::http::StatusCode::UNPROCESSABLE_ENTITY,
                    "unresolved_author",
                    format!("author '{name}' is not in the corpus at t = {t}; supply a manual profile"),
                )
                .with_field(format!("authors[{i}]")))
            }
        }
    }

    let (venue, venue_resolved) = match &q.venue {
        None => (VenueRef::Missing, false),
        Some(VenueDescriptor { h_index: Some(h), avg_citations: Some(c), .. }) => (
            VenueRef::Manual {
                h_index: finite_non_negative("venue.h_index", *h)?,
                avg_citations: finite_non_negative("venue.avg_citations", *c)?,
            },
            true,
        ),
        Some(VenueDescriptor { h_index: Some(_), avg_citations: None, .. }) => {
            return Err(ApiError::validation("venue.avg_citations", "is required with venue.h_index"))
        }
        Some(VenueDescriptor { h_index: None, avg_citations: Some(_), .. }) => {
            return Err(ApiError::validation("venue.h_index", "is required with venue.avg_citations"))
        }
        Some(VenueDescriptor { name: Some(n), .. }) => match store.venue_idx(n) {
            Some(v) => (VenueRef::Corpus(v), true),
            None => (VenueRef::Missing, false),
        },
        Some(_) => (VenueRef::Missing, false),
    };

    let mut references: Vec<PaperIdx> = Vec::new();
    let mut ignored_references = Vec::new();
    for id in &q.references {
        match store.paper_idx(id.trim()).filter(|p| snap.is_visible(*p)) {
            Some(p) if !references.contains(&p) => references.push(p),
            Some(_) => {}
            None => ignored_references.push(id.clone()),
        }
    }

    let topics = infer_doc_topics(&ctx.model, &tokenize(&q.title, &q.abstract_text));
    let view = PaperView {
        paper_id: None,
        year,
        authors,
        venue,
        topics,
        references,
        citations: None,
    };
    let spec = DatasetSpec {
        t,
        mode: q.mode.unwrap_or(clf.spec.mode),
        set: PaperSet::New,
        ..clf.spec.clone()
    };
    let assembled = assemble_factors(&view, &spec, ctx).map_err(|e| ApiError::internal(e.to_string()))?;
    let names: Vec<&str> = clf.model.model.feature_names.iter().map(String::as_str).collect();
    let row = assembled
        .factors
        .select(&names)
        .ok_or_else(|| ApiError::internal("paper model expects factors the assembler does not produce"))?;
    let probability = clf
        .model
        .model
        .predict_proba(&row)
        .map_err(|e| ApiError::internal(e.to_string()))?;

    let primary_ref = &view.authors[assembled.primary];
    let hmodel = a.hindex.get(&spec.delta_t);
    let predicted_future_h = match hmodel {
        None => None,
        Some(m) => Some(match primary_ref {
            AuthorRef::Corpus(idx) => {
                predict_author_h(&m.model, snap, *idx).map_err(|e| ApiError::internal(e.to_string()))?
            }
            AuthorRef::Manual(p) => {
                predict_linear(&m.model, &manual_features(p), f64::from(p.h_index))
                    .map_err(|e| ApiError::internal(e.to_string()))?
                    .value
            }
        }),
    };

    Ok(PaperResponse {
        probability,
        factor_breakdown: assembled.factors,
        primary_author: PrimaryAuthor {
            index: assembled.primary,
            name: q.authors[assembled.primary].name.trim().to_string(),
            h_index: assembled.primary_h,
            predicted_future_h,
        },
        all_oov: assembled.all_oov,
        topic_distribution: view.topics.probs.clone(),
        venue_resolved,
        ignored_references,
        t,
        horizon: spec.delta_t,
        model_version: clf.model.version.clone(),
        hindex_model_version: hmodel.map(|m| m.version.clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HealthResponse {
    pub status: &'static str,
    pub model_versions: crate::artifacts::ModelVersions,
    pub corpus_checksum: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

pub fn health(a: &Artifacts) -> HealthResponse {
    HealthResponse {
        status: if a.is_complete() { "ok" } else { "unavailable" },
        model_versions: a.model_versions(),
        corpus_checksum: a.corpus_checksum().map(str::to_string),
        missing: a.missing.clone(),
    }
}

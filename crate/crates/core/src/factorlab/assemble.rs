use serde::{Deserialize, Serialize};

use super::{DatasetSpec, FactorError, FactorVector, PaperSet, PrimaryMode, RatioMode, SnapshotContext};
use crate::collabnet::{author_social_stats, SocialStats};
use crate::corpus::{AuthorIdx, PaperIdx, VenueIdx, Year};
use crate::topicmodel::{authority_vector, c_authority, c_diversity, c_novelty, c_popularity, TopicDistribution};

/// An author described by hand rather than looked up in the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManualAuthor {
    pub name: String,
    pub h_index: u32,
    /// Citation counts of the author's earlier papers.
    #[serde(default)]
    pub prior_citations: Vec<u32>,
    /// h-index growth over the temporal window.
    #[serde(default)]
    pub delta_h: u32,
    #[serde(default)]
    pub num_coauthors: u32,
    #[serde(default)]
    pub years_active: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuthorRef {
    Corpus(AuthorIdx),
    Manual(ManualAuthor),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VenueRef {
    Corpus(VenueIdx),
    Manual { h_index: f64, avg_citations: f64 },
    Missing,
}

/// The inputs factor assembly needs about one paper, whether it comes from
/// the corpus or from a what-if query.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperView {
    pub paper_id: Option<String>,
    pub year: Year,
    pub authors: Vec<AuthorRef>,
    pub venue: VenueRef,
    pub topics: TopicDistribution,
    /// Corpus papers this paper cites.
    pub references: Vec<PaperIdx>,
    /// Citations received by `t`; required for existing factors.
    pub citations: Option<u32>,
}

impl PaperView {
    pub fn from_corpus(ctx: &SnapshotContext, paper: PaperIdx) -> Result<Self, FactorError> {
        let store = ctx.store();
        let rec = store.paper(paper);
        let topics = ctx.doc_topics.require(store, paper)?.clone();
        Ok(PaperView {
            paper_id: Some(rec.paper_id.clone()),
            year: rec.year,
            authors: rec.author_ids.iter().map(|a| AuthorRef::Corpus(*a)).collect(),
            venue: rec.venue_id.map_or(VenueRef::Missing, VenueRef::Corpus),
            topics,
            references: rec.reference_ids.clone(),
            citations: ctx.snapshot.is_visible(paper).then(|| ctx.snapshot.citations(paper)),
        })
    }

    fn label(&self) -> String {
        self.paper_id.clone().unwrap_or_else(|| "<query>".to_string())
    }
}

/// Author-level inputs resolved against the context.
#[derive(Debug, Clone)]
struct AuthorInfo {
    h: u32,
    /// Citations at `t` of papers published before the target paper.
    prior: Vec<u32>,
    delta_h: u32,
    social: SocialStats,
    authority: Vec<f64>,
}

fn resolve_author(ctx: &SnapshotContext, author: &AuthorRef, year: Year) -> Result<AuthorInfo, FactorError> {
    match author {
        AuthorRef::Corpus(a) => {
            let snap = &ctx.snapshot;
            let store = snap.store();
            let prior_papers: Vec<PaperIdx> = snap
                .author_papers(*a)
                .iter()
                .copied()
                .filter(|p| store.paper(*p).year < year)
                .collect();
            Ok(AuthorInfo {
                h: snap.author_h(*a),
                prior: prior_papers.iter().map(|p| snap.citations(*p)).collect(),
                delta_h: snap.author_h(*a).saturating_sub(ctx.past.author_h(*a)),
                social: author_social_stats(&ctx.graph, &ctx.pagerank, snap, *a),
                authority: authority_vector(snap, &ctx.doc_topics, prior_papers)?,
            })
        }
        AuthorRef::Manual(m) => Ok(AuthorInfo {
            h: m.h_index,
            prior: m.prior_citations.clone(),
            delta_h: m.delta_h,
            social: SocialStats::default(),
            authority: vec![0.0; ctx.model.k],
        }),
    }
}

/// Position of the primary author in the author list.
pub fn select_primary_author(h_indices: &[u32], mode: PrimaryMode) -> Option<usize> {
    if h_indices.is_empty() {
        return None;
    }
    Some(match mode {
        PrimaryMode::First => 0,
        PrimaryMode::MaxH => {
            let mut best = 0;
            for (i, h) in h_indices.iter().enumerate() {
                if *h > h_indices[best] {
                    best = i;
                }
            }
            best
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthorFactors {
    pub first_max: f64,
    pub ave_max: f64,
    pub sum_max: f64,
    pub first_ratio: f64,
    pub max_ratio: f64,
    pub num_authors: f64,
    pub no_prior_first: bool,
    pub no_prior_max: bool,
}

fn prior_ratio(prior: &[u32], primary_h: u32, mode: RatioMode) -> f64 {
    if prior.is_empty() {
        return 0.0;
    }
    match mode {
        RatioMode::Threshold => prior.iter().filter(|c| **c >= primary_h).count() as f64 / prior.len() as f64,
        RatioMode::HOverPapers => f64::from(primary_h) / prior.len() as f64,
    }
}

/// A-* factors. `priors[i]` holds the citation counts of author `i`'s
/// earlier papers.
pub fn author_factors(h_indices: &[u32], priors: &[&[u32]], primary: usize, ratio_mode: RatioMode) -> AuthorFactors {
    let sum: f64 = h_indices.iter().map(|h| f64::from(*h)).sum();
    let primary_h = h_indices[primary];
    AuthorFactors {
        first_max: f64::from(h_indices[0]),
        ave_max: sum / h_indices.len() as f64,
        sum_max: sum,
        first_ratio: prior_ratio(priors[0], primary_h, ratio_mode),
        max_ratio: prior_ratio(priors[primary], primary_h, ratio_mode),
        num_authors: h_indices.len() as f64,
        no_prior_first: priors[0].is_empty(),
        no_prior_max: priors[primary].is_empty(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFactors {
    pub h_index: f64,
    pub citation: f64,
    pub no_references: bool,
}

/// R-h-index and R-citation from the citation counts of visible references.
pub fn reference_factors(reference_citations: &[u32], primary_h: u32) -> ReferenceFactors {
    if reference_citations.is_empty() {
        return ReferenceFactors {
            h_index: 0.0,
            citation: 0.0,
            no_references: true,
        };
    }
    let n = reference_citations.len() as f64;
    ReferenceFactors {
        h_index: reference_citations.iter().filter(|c| **c >= primary_h).count() as f64 / n,
        citation: reference_citations.iter().map(|c| f64::from(*c)).sum::<f64>() / n,
        no_references: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalFactors {
    pub ave_h: f64,
    pub max_h: f64,
    pub h_first: f64,
    pub h_max: f64,
}

/// T-* factors from per-author h-index growth; `max_h_author` is the
/// position of the highest-h author.
pub fn temporal_factors(deltas: &[u32], max_h_author: usize) -> TemporalFactors {
    TemporalFactors {
        ave_h: deltas.iter().map(|d| f64::from(*d)).sum::<f64>() / deltas.len() as f64,
        max_h: f64::from(deltas.iter().copied().max().unwrap_or(0)),
        h_first: f64::from(deltas[0]),
        h_max: f64::from(deltas[max_h_author]),
    }
}

/// E-numc, E-numc-ave, E-num-years for a paper published before `t`.
pub fn existing_factors(citations: u32, year: Year, t: Year) -> Option<[f64; 3]> {
    if year >= t {
        return None;
    }
    let years = f64::from(t - year);
    let numc = f64::from(citations);
    Some([numc, numc / years.max(1.0), years])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub factors: FactorVector,
    /// Position of the primary author in the paper's author list.
    pub primary: usize,
    pub primary_h: u32,
    pub all_oov: bool,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Builds the factor vector of one paper at the context's snapshot year.
pub fn assemble_factors(view: &PaperView, spec: &DatasetSpec, ctx: &SnapshotContext) -> Result<Assembled, FactorError> {
    if view.authors.is_empty() {
        return Err(FactorError::NoAuthors(view.label()));
    }
    let t = ctx.t();
    let snap = &ctx.snapshot;
    let infos: Vec<AuthorInfo> = view
        .authors
        .iter()
        .map(|a| resolve_author(ctx, a, view.year))
        .collect::<Result<_, _>>()?;
    let hs: Vec<u32> = infos.iter().map(|i| i.h).collect();
    let primary = select_primary_author(&hs, spec.mode).expect("authors are non-empty");
    let max_h_author = select_primary_author(&hs, PrimaryMode::MaxH).expect("authors are non-empty");
    let primary_h = hs[primary];

    let priors: Vec<&[u32]> = infos.iter().map(|i| i.prior.as_slice()).collect();
    let af = author_factors(&hs, &priors, primary, spec.ratio_mode);

    let d = &view.topics;
    let visible_refs: Vec<PaperIdx> = view.references.iter().copied().filter(|r| snap.is_visible(*r)).collect();
    let ref_topics = visible_refs
        .iter()
        .map(|r| ctx.doc_topics.require(snap.store(), *r))
        .collect::<Result<Vec<_>, _>>()?;
    let novelty = c_novelty(d, &ref_topics)?;
    let mut authority = Vec::with_capacity(infos.len());
    for info in &infos {
        authority.push(c_authority(d, &info.authority)?);
    }

    let (v_h, v_c, v_missing) = match &view.venue {
        VenueRef::Corpus(v) => match ctx.venues.get(*v) {
            Some(s) => (f64::from(s.h_index), s.avg_citations, false),
            None => (0.0, 0.0, true),
        },
        VenueRef::Manual { h_index, avg_citations } => (*h_index, *avg_citations, false),
        VenueRef::Missing => (0.0, 0.0, true),
    };

    let social = infos.iter().map(|i| i.social).fold(SocialStats::default(), SocialStats::max);
    let ref_counts: Vec<u32> = visible_refs.iter().map(|r| snap.citations(*r)).collect();
    let rf = reference_factors(&ref_counts, primary_h);
    let deltas: Vec<u32> = infos.iter().map(|i| i.delta_h).collect();
    let tf = temporal_factors(&deltas, max_h_author);

    let mut f = FactorVector::default();
    f.push("A-first-max", af.first_max);
    f.push("A-ave-max", af.ave_max);
    f.push("A-sum-max", af.sum_max);
    f.push("A-first-ratio", af.first_ratio);
    f.push("A-max-ratio", af.max_ratio);
    f.push("A-num-authors", af.num_authors);
    f.push("C-popularity", c_popularity(d, &ctx.popularity)?);
    f.push("C-novelty", novelty.value);
    f.push("C-diversity", c_diversity(d));
    f.push("C-authority-first", authority[0]);
    f.push("C-authority-max", authority[primary]);
    f.push("C-authority-ave", authority.iter().sum::<f64>() / authority.len() as f64);
    f.push("V-h-index", v_h);
    f.push("V-citation", v_c);
    f.push("S-degree", social.degree);
    f.push("S-pagerank", social.pagerank);
    f.push("S-h-coauthor", social.h_coauthor);
    f.push("S-h-weight", social.h_weight);
    f.push("R-h-index", rf.h_index);
    f.push("R-citation", rf.citation);
    f.push("T-ave-h", tf.ave_h);
    f.push("T-max-h", tf.max_h);
    f.push("T-h-first", tf.h_first);
    f.push("T-h-max", tf.h_max);
    if spec.set == PaperSet::Old {
        let mismatch = || FactorError::SetMismatch {
            paper: view.label(),
            year: view.year,
            t,
        };
        let citations = view.citations.ok_or_else(mismatch)?;
        let [numc, ave, years] = existing_factors(citations, view.year, t).ok_or_else(mismatch)?;
        f.push("E-numc", numc);
        f.push("E-numc-ave", ave);
        f.push("E-num-years", years);
    }
    if spec.include_flags {
        f.push("A-no-prior-first", flag(af.no_prior_first));
        f.push("A-no-prior-max", flag(af.no_prior_max));
        f.push("C-no-references", flag(novelty.no_references));
        f.push("C-oov-text", flag(d.all_oov));
        f.push("V-missing", flag(v_missing));
        f.push("R-no-references", flag(rf.no_references));
    }
    Ok(Assembled {
        factors: f,
        primary,
        primary_h,
        all_oov: d.all_oov,
    })
}

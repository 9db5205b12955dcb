//! h-index and related author/venue impact measures relative to a snapshot.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AuthorIdx, CorpusSnapshot, CorpusStore, VenueIdx, Year};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("unknown author index {0}")]
    UnknownAuthor(u32),
    #[error("venue {0} is unknown or has no visible papers")]
    EmptyVenue(u32),
}

/// Largest `h` such that at least `h` of the counts are `>= h`.
pub fn h_index(counts: &[u32]) -> u32 {
    let n = counts.len();
    if n == 0 {
        return 0;
    }
    // bucket[k] = number of counts equal to k, with everything >= n folded into n.
    let mut bucket = vec![0usize; n + 1];
    for &c in counts {
        bucket[(c as usize).min(n)] += 1;
    }
    let mut at_least = 0usize;
    for h in (0..=n).rev() {
        at_least += bucket[h];
        if at_least >= h {
            return h as u32;
        }
    }
    0
}

fn check_author(snapshot: &CorpusSnapshot, author: AuthorIdx) -> Result<(), MetricsError> {
    if author.index() < snapshot.store().num_authors() {
        Ok(())
    } else {
        Err(MetricsError::UnknownAuthor(author.0))
    }
}

pub fn author_h_index(snapshot: &CorpusSnapshot, author: AuthorIdx) -> Result<u32, MetricsError> {
    check_author(snapshot, author)?;
    Ok(snapshot.author_h(author))
}

/// The five author-level predictors of future h-index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub h_index: u32,
    pub num_papers: u32,
    /// Mean citations per visible paper.
    pub num_citations: f64,
    /// Unique co-authors over visible papers.
    pub num_co: u32,
    /// `t` minus the year of the first visible paper.
    pub num_years: u32,
}

pub fn author_profile(snapshot: &CorpusSnapshot, author: AuthorIdx) -> Result<AuthorProfile, MetricsError> {
    check_author(snapshot, author)?;
    let papers = snapshot.author_papers(author);
    let store = snapshot.store();
    let total: u64 = papers.iter().map(|p| u64::from(snapshot.citations(*p))).sum();
    let mut coauthors = HashSet::new();
    for p in papers {
        for a in &store.paper(*p).author_ids {
            if *a != author {
                coauthors.insert(*a);
            }
        }
    }
    let num_years = papers
        .first()
        .map(|p| (snapshot.t() - store.paper(*p).year).max(0) as u32)
        .unwrap_or(0);
    Ok(AuthorProfile {
        h_index: snapshot.author_h(author),
        num_papers: papers.len() as u32,
        num_citations: if papers.is_empty() { 0.0 } else { total as f64 / papers.len() as f64 },
        num_co: coauthors.len() as u32,
        num_years,
    })
}

fn venue_counts(snapshot: &CorpusSnapshot, venue: VenueIdx) -> Result<Vec<u32>, MetricsError> {
    let store = snapshot.store();
    if venue.index() >= store.venues().len() {
        return Err(MetricsError::EmptyVenue(venue.0));
    }
    let counts: Vec<u32> = store
        .venue_papers(venue)
        .iter()
        .take_while(|p| store.paper(**p).year <= snapshot.t())
        .map(|p| snapshot.citations(*p))
        .collect();
    if counts.is_empty() {
        return Err(MetricsError::EmptyVenue(venue.0));
    }
    Ok(counts)
}

pub fn venue_h_index(snapshot: &CorpusSnapshot, venue: VenueIdx) -> Result<u32, MetricsError> {
    Ok(h_index(&venue_counts(snapshot, venue)?))
}

pub fn venue_avg_citations(snapshot: &CorpusSnapshot, venue: VenueIdx) -> Result<f64, MetricsError> {
    let counts = venue_counts(snapshot, venue)?;
    Ok(counts.iter().map(|c| f64::from(*c)).sum::<f64>() / counts.len() as f64)
}

/// Fraction of the venue's visible papers with at least `threshold` citations.
pub fn venue_hit_ratio(snapshot: &CorpusSnapshot, venue: VenueIdx, threshold: u32) -> Result<f64, MetricsError> {
    let counts = venue_counts(snapshot, venue)?;
    Ok(counts.iter().filter(|c| **c >= threshold).count() as f64 / counts.len() as f64)
}

/// Per-venue h-index and mean citations for every venue of a snapshot.
#[derive(Debug, Clone)]
pub struct VenueStatsTable {
    stats: Vec<Option<VenueStats>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VenueStats {
    pub h_index: u32,
    pub avg_citations: f64,
    pub num_papers: u32,
}

impl VenueStatsTable {
    pub fn build(snapshot: &CorpusSnapshot) -> Self {
        let stats = (0..snapshot.store().venues().len() as u32)
            .map(|v| {
                venue_counts(snapshot, VenueIdx(v)).ok().map(|counts| VenueStats {
                    h_index: h_index(&counts),
                    avg_citations: counts.iter().map(|c| f64::from(*c)).sum::<f64>() / counts.len() as f64,
                    num_papers: counts.len() as u32,
                })
            })
            .collect();
        VenueStatsTable { stats }
    }

    pub fn get(&self, venue: VenueIdx) -> Option<&VenueStats> {
        self.stats.get(venue.index()).and_then(Option::as_ref)
    }
}

/// h-index growth between two snapshots of the same store.
pub fn delta_h_between(now: &CorpusSnapshot, past: &CorpusSnapshot, author: AuthorIdx) -> Result<u32, MetricsError> {
    check_author(now, author)?;
    Ok(now.author_h(author).saturating_sub(past.author_h(author)))
}

/// `h(t) - h(t - window)`. Years before the corpus start yield an empty
/// snapshot, so authors absent at `t - window` contribute `h(t) - 0`.
pub fn delta_h(store: &Arc<CorpusStore>, author: AuthorIdx, t: Year, window: u32) -> Result<u32, MetricsError> {
    let now = CorpusSnapshot::build(store.clone(), t);
    let past = CorpusSnapshot::build(store.clone(), t - window as Year);
    delta_h_between(&now, &past, author)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HIndexSeries {
    pub author: String,
    pub values: BTreeMap<Year, u32>,
}

pub fn h_index_series(store: &Arc<CorpusStore>, author: AuthorIdx, years: &[Year]) -> Result<HIndexSeries, MetricsError> {
    if author.index() >= store.num_authors() {
        return Err(MetricsError::UnknownAuthor(author.0));
    }
    let values = years
        .iter()
        .map(|&y| (y, CorpusSnapshot::build(store.clone(), y).author_h(author)))
        .collect();
    Ok(HIndexSeries {
        author: store.author(author).name.clone(),
        values,
    })
}

/// Mean with a one-standard-error band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Band {
    pub fn from_values(values: &[f64]) -> Band {
        let n = values.len();
        if n == 0 {
            return Band { mean: 0.0, stderr: 0.0, lower: 0.0, upper: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Band { mean, stderr, lower: mean - stderr, upper: mean + stderr }
    }
}

/// Per-h-index averages of the author profile fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HTrendRow {
    pub h_index: u32,
    pub num_authors: usize,
    pub num_papers: Band,
    pub avg_citations: Band,
    pub num_coauthors: Band,
    pub num_years: Band,
    pub h_over_papers: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub t: Year,
    pub num_papers: usize,
    pub num_authors: usize,
    pub paper_citation_threshold: u32,
    pub papers_above_threshold: usize,
    pub papers_above_fraction: f64,
    pub author_h_threshold: u32,
    pub authors_above_threshold: usize,
    pub authors_above_fraction: f64,
    /// citation count -> number of visible papers
    pub citation_histogram: BTreeMap<u32, usize>,
    /// h-index -> number of active authors
    pub h_histogram: BTreeMap<u32, usize>,
    pub h_trends: Vec<HTrendRow>,
}

impl DistributionReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "snapshot year                 {}", self.t);
        let _ = writeln!(s, "visible papers                {}", self.num_papers);
        let _ = writeln!(s, "active authors                {}", self.num_authors);
        let _ = writeln!(
            s,
            "papers > {:<3} citations       {} ({:.2}%)",
            self.paper_citation_threshold,
            self.papers_above_threshold,
            100.0 * self.papers_above_fraction
        );
        let _ = writeln!(
            s,
            "authors with h > {:<3}         {} ({:.4}%)",
            self.author_h_threshold,
            self.authors_above_threshold,
            100.0 * self.authors_above_fraction
        );
        let _ = writeln!(s, "\n# citations\tpapers");
        for (c, n) in &self.citation_histogram {
            let _ = writeln!(s, "{c}\t{n}");
        }
        let _ = writeln!(s, "\n# h-index\tauthors");
        for (h, n) in &self.h_histogram {
            let _ = writeln!(s, "{h}\t{n}");
        }
        let _ = writeln!(s, "\n# h-index\tauthors\tpapers\tpapers_se\tavg_cit\tavg_cit_se\tcoauthors\tcoauthors_se\tyears\tyears_se\th_over_papers\th_over_papers_se");
        for r in &self.h_trends {
            let _ = writeln!(
                s,
                "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                r.h_index,
                r.num_authors,
                r.num_papers.mean,
                r.num_papers.stderr,
                r.avg_citations.mean,
                r.avg_citations.stderr,
                r.num_coauthors.mean,
                r.num_coauthors.stderr,
                r.num_years.mean,
                r.num_years.stderr,
                r.h_over_papers.mean,
                r.h_over_papers.stderr
            );
        }
        s
    }
}

pub fn distribution_stats(snapshot: &CorpusSnapshot) -> DistributionReport {
    distribution_stats_with(snapshot, 50, 60)
}

/// Citation and h-index distributions. Papers count when they have strictly
/// more than `paper_threshold` citations; authors when `h > h_threshold`.
pub fn distribution_stats_with(snapshot: &CorpusSnapshot, paper_threshold: u32, h_threshold: u32) -> DistributionReport {
    let mut citation_histogram = BTreeMap::new();
    let mut num_papers = 0;
    let mut papers_above = 0;
    for p in snapshot.visible_papers() {
        let c = snapshot.citations(p);
        num_papers += 1;
        *citation_histogram.entry(c).or_insert(0) += 1;
        if c > paper_threshold {
            papers_above += 1;
        }
    }

    let mut h_histogram = BTreeMap::new();
    let mut by_h: BTreeMap<u32, Vec<AuthorProfile>> = BTreeMap::new();
    let mut num_authors = 0;
    let mut authors_above = 0;
    for a in snapshot.active_authors() {
        let profile = author_profile(snapshot, a).expect("active author is known");
        num_authors += 1;
        *h_histogram.entry(profile.h_index).or_insert(0) += 1;
        if profile.h_index > h_threshold {
            authors_above += 1;
        }
        by_h.entry(profile.h_index).or_default().push(profile);
    }
    let h_trends = by_h
        .into_iter()
        .map(|(h, profiles)| {
            let col = |f: &dyn Fn(&AuthorProfile) -> f64| Band::from_values(&profiles.iter().map(f).collect::<Vec<_>>());
            HTrendRow {
                h_index: h,
                num_authors: profiles.len(),
                num_papers: col(&|p| f64::from(p.num_papers)),
                avg_citations: col(&|p| p.num_citations),
                num_coauthors: col(&|p| f64::from(p.num_co)),
                num_years: col(&|p| f64::from(p.num_years)),
                h_over_papers: col(&|p| f64::from(p.h_index) / f64::from(p.num_papers.max(1))),
            }
        })
        .collect();

    let frac = |k: usize, n: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    DistributionReport {
        t: snapshot.t(),
        num_papers,
        num_authors,
        paper_citation_threshold: paper_threshold,
        papers_above_threshold: papers_above,
        papers_above_fraction: frac(papers_above, num_papers),
        author_h_threshold: h_threshold,
        authors_above_threshold: authors_above,
        authors_above_fraction: frac(authors_above, num_authors),
        citation_histogram,
        h_histogram,
        h_trends,
    }
}

/// Distinct co-authors of `author` among visible papers, in index order.
pub fn coauthors(snapshot: &CorpusSnapshot, author: AuthorIdx) -> BTreeSet<AuthorIdx> {
    let store = snapshot.store();
    snapshot
        .author_papers(author)
        .iter()
        .flat_map(|p| store.paper(*p).author_ids.iter().copied())
        .filter(|a| *a != author)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RawPaper;
    use proptest::prelude::*;

    fn brute_h(counts: &[u32]) -> u32 {
        (0..=counts.len() as u32)
            .filter(|h| counts.iter().filter(|c| **c >= *h).count() as u32 >= *h)
            .max()
            .unwrap()
    }

    #[test]
    fn hirsch_examples() {
        assert_eq!(h_index(&[]), 0);
        assert_eq!(h_index(&[10, 8, 5, 4, 3]), 4);
        assert_eq!(h_index(&[0, 0]), 0);
        assert_eq!(h_index(&[5, 5, 5]), 3);
        assert_eq!(h_index(&[100]), 1);
    }

    proptest! {
        #[test]
        fn h_index_matches_scan(counts in prop::collection::vec(0u32..300, 0..200)) {
            prop_assert_eq!(h_index(&counts), brute_h(&counts));
        }

        #[test]
        fn h_index_bounded_and_permutation_invariant(mut counts in prop::collection::vec(0u32..50, 1..60)) {
            let h = h_index(&counts);
            prop_assert!(h as usize <= counts.len());
            prop_assert!(h <= *counts.iter().max().unwrap());
            counts.reverse();
            prop_assert_eq!(h_index(&counts), h);
        }

        #[test]
        fn adding_a_citation_never_lowers_h(counts in prop::collection::vec(0u32..50, 1..60), i in 0usize..60) {
            let h = h_index(&counts);
            let mut more = counts.clone();
            let i = i % more.len();
            more[i] += 1;
            prop_assert!(h_index(&more) >= h);
        }
    }

    /// Author "a" has two papers in year 2000 cited 10 and 2 times by 2004.
    fn profile_store() -> Arc<CorpusStore> {
        let mut raw = vec![
            RawPaper::new("p1", 2000).title("p1").authors(&["a", "b"]).venue("V"),
            RawPaper::new("p2", 2001).title("p2").authors(&["a", "c"]).venue("V"),
        ];
        for i in 0..10 {
            let refs: Vec<&str> = if i < 2 { vec!["p1", "p2"] } else { vec!["p1"] };
            raw.push(RawPaper::new(format!("c{i}"), 2003).title("c").authors(&["z"]).cites(&refs).venue("W"));
        }
        Arc::new(CorpusStore::from_records(raw).unwrap())
    }

    #[test]
    fn author_profile_arithmetic() {
        let store = profile_store();
        let a = store.author_idx("a").unwrap();
        let snap = CorpusSnapshot::build(store, 2004);
        let p = author_profile(&snap, a).unwrap();
        assert_eq!(p, AuthorProfile { h_index: 2, num_papers: 2, num_citations: 6.0, num_co: 2, num_years: 4 });
    }

    #[test]
    fn fresh_author_profile() {
        let store = profile_store();
        let b = store.author_idx("b").unwrap();
        let snap = CorpusSnapshot::build(store, 2000);
        let p = author_profile(&snap, b).unwrap();
        assert_eq!(p, AuthorProfile { h_index: 0, num_papers: 1, num_citations: 0.0, num_co: 1, num_years: 0 });
    }

    #[test]
    fn unknown_author_is_an_error() {
        let snap = CorpusSnapshot::build(profile_store(), 2004);
        assert_eq!(author_h_index(&snap, AuthorIdx(999)), Err(MetricsError::UnknownAuthor(999)));
        assert!(author_profile(&snap, AuthorIdx(999)).is_err());
    }

    #[test]
    fn venue_measures() {
        let store = profile_store();
        let v = store.venue_idx("V").unwrap();
        let snap = CorpusSnapshot::build(store.clone(), 2004);
        assert_eq!(venue_h_index(&snap, v).unwrap(), 2);
        assert_eq!(venue_avg_citations(&snap, v).unwrap(), 6.0);
        assert_eq!(venue_hit_ratio(&snap, v, 0).unwrap(), 1.0);
        assert_eq!(venue_hit_ratio(&snap, v, 3).unwrap(), 0.5);
        let early = CorpusSnapshot::build(store.clone(), 1999);
        assert!(venue_h_index(&early, v).is_err());
        let table = VenueStatsTable::build(&snap);
        assert_eq!(table.get(v).unwrap().h_index, 2);
    }

    #[test]
    fn venue_hit_ratio_non_increasing() {
        let store = profile_store();
        let v = store.venue_idx("V").unwrap();
        let snap = CorpusSnapshot::build(store, 2004);
        let ratios: Vec<f64> = (0..15).map(|t| venue_hit_ratio(&snap, v, t).unwrap()).collect();
        assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn delta_h_over_window() {
        let store = profile_store();
        let a = store.author_idx("a").unwrap();
        assert_eq!(delta_h(&store, a, 2004, 3).unwrap(), 2);
        assert_eq!(delta_h(&store, a, 2010, 3).unwrap(), 0);
        // window reaching before the corpus start
        assert_eq!(delta_h(&store, a, 2003, 10).unwrap(), 2);
    }

    #[test]
    fn series_is_non_decreasing() {
        let store = profile_store();
        let a = store.author_idx("a").unwrap();
        let s = h_index_series(&store, a, &[1999, 2000, 2002, 2003, 2010]).unwrap();
        let v: Vec<u32> = s.values.values().copied().collect();
        assert_eq!(v, vec![0, 0, 0, 2, 2]);
    }

    #[test]
    fn empty_snapshot_stats_are_zero() {
        let snap = CorpusSnapshot::build(profile_store(), 1990);
        let r = distribution_stats(&snap);
        assert_eq!((r.num_papers, r.num_authors, r.papers_above_threshold, r.authors_above_threshold), (0, 0, 0, 0));
        assert_eq!(r.papers_above_fraction, 0.0);
        assert!(r.citation_histogram.is_empty());
    }

    #[test]
    fn stats_thresholds_are_strict() {
        let snap = CorpusSnapshot::build(profile_store(), 2004);
        let r = distribution_stats_with(&snap, 2, 1);
        // p1 has 10 citations, p2 has 2
        assert_eq!(r.papers_above_threshold, 1);
        // only "a" has h = 2 > 1
        assert_eq!(r.authors_above_threshold, 1);
        assert_eq!(r.citation_histogram[&0], 10);
        assert!(r.to_text().contains("papers > 2"));
    }
}

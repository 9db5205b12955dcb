use std::sync::Arc;

use super::{AuthorIdx, CorpusError, CorpusStore, PaperIdx, Year};
use crate::scholarmetrics::h_index;

/// The corpus as observed at the end of year `t`.
///
/// A paper is visible when it was published in or before `t`; its citation
/// count only includes citing papers published in or before `t`. Author
/// h-indices are computed once at construction and read lock-free afterwards.
#[derive(Debug, Clone)]
pub struct CorpusSnapshot {
    t: Year,
    store: Arc<CorpusStore>,
    counts: Vec<u32>,
    author_h: Vec<u32>,
    num_visible: usize,
}

impl CorpusSnapshot {
    pub fn build(store: Arc<CorpusStore>, t: Year) -> Self {
        let mut counts = vec![0u32; store.num_papers()];
        let mut num_visible = 0;
        for (i, p) in store.papers().iter().enumerate() {
            if p.year <= t {
                num_visible += 1;
                let cites = store.in_citations(PaperIdx(i as u32));
                counts[i] = cites.partition_point(|c| c.year <= t) as u32;
            }
        }
        let mut scratch = Vec::new();
        let author_h = store
            .authors()
            .iter()
            .map(|a| {
                scratch.clear();
                scratch.extend(
                    a.paper_ids
                        .iter()
                        .take_while(|p| store.paper(**p).year <= t)
                        .map(|p| counts[p.index()]),
                );
                h_index(&scratch)
            })
            .collect();
        if num_visible == 0 {
            log::warn!("snapshot at {t} precedes every publication; it is empty");
        }
        CorpusSnapshot {
            t,
            store,
            counts,
            author_h,
            num_visible,
        }
    }

    pub fn t(&self) -> Year {
        self.t
    }

    pub fn store(&self) -> &CorpusStore {
        &self.store
    }

    pub fn store_arc(&self) -> &Arc<CorpusStore> {
        &self.store
    }

    pub fn is_visible(&self, paper: PaperIdx) -> bool {
        self.store.paper(paper).year <= self.t
    }

    pub fn num_visible(&self) -> usize {
        self.num_visible
    }

    pub fn is_empty(&self) -> bool {
        self.num_visible == 0
    }

    pub fn visible_papers(&self) -> impl Iterator<Item = PaperIdx> + '_ {
        self.store.paper_indices().filter(move |p| self.is_visible(*p))
    }

    /// Cumulative citations of a visible paper up to `t`.
    pub fn citation_count_at(&self, paper: PaperIdx) -> Result<u32, CorpusError> {
        if !self.is_visible(paper) {
            return Err(CorpusError::NotVisible(self.store.paper(paper).paper_id.clone(), self.t));
        }
        Ok(self.counts[paper.index()])
    }

    /// Unchecked variant; 0 for invisible papers.
    pub fn citations(&self, paper: PaperIdx) -> u32 {
        self.counts[paper.index()]
    }

    /// The author's papers visible at `t`, oldest first.
    pub fn author_papers(&self, author: AuthorIdx) -> &[PaperIdx] {
        let all = &self.store.author(author).paper_ids;
        let n = all.partition_point(|p| self.store.paper(*p).year <= self.t);
        &all[..n]
    }

    /// Precomputed h-index of an author at `t`.
    pub fn author_h(&self, author: AuthorIdx) -> u32 {
        self.author_h[author.index()]
    }

    /// Authors with at least one visible paper.
    pub fn active_authors(&self) -> impl Iterator<Item = AuthorIdx> + '_ {
        self.store.author_indices().filter(move |a| !self.author_papers(*a).is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RawPaper;

    fn abc() -> Arc<CorpusStore> {
        Arc::new(
            CorpusStore::from_records(vec![
                RawPaper::new("A", 2000).title("A").authors(&["x"]),
                RawPaper::new("B", 2005).title("B").authors(&["y"]).cites(&["A"]),
                RawPaper::new("C", 2010).title("C").authors(&["y"]).cites(&["A", "B"]),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn time_filter_counts_only_visible_citers() {
        let store = abc();
        let a = store.paper_idx("A").unwrap();
        assert_eq!(CorpusSnapshot::build(store.clone(), 2007).citation_count_at(a).unwrap(), 1);
        assert_eq!(CorpusSnapshot::build(store.clone(), 2012).citation_count_at(a).unwrap(), 2);
    }

    #[test]
    fn snapshot_before_first_year_is_empty() {
        let snap = CorpusSnapshot::build(abc(), 1999);
        assert!(snap.is_empty());
        assert_eq!(snap.visible_papers().count(), 0);
    }

    #[test]
    fn invisible_paper_is_an_error() {
        let store = abc();
        let c = store.paper_idx("C").unwrap();
        let snap = CorpusSnapshot::build(store, 2007);
        assert!(matches!(snap.citation_count_at(c), Err(CorpusError::NotVisible(..))));
    }

    #[test]
    fn uncited_visible_paper_counts_zero() {
        let store = abc();
        let c = store.paper_idx("C").unwrap();
        assert_eq!(CorpusSnapshot::build(store, 2012).citation_count_at(c).unwrap(), 0);
    }

    #[test]
    fn author_papers_are_truncated_at_t() {
        let store = abc();
        let y = store.author_idx("y").unwrap();
        let snap = CorpusSnapshot::build(store, 2007);
        assert_eq!(snap.author_papers(y).len(), 1);
        assert_eq!(snap.author_h(y), 0);
    }
}

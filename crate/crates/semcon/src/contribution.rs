//! The contribution measure: mean pairwise semantic distance from the
//! publications a paper cites to the publications citing it.
//!
//! For a publication p with text-bearing cited set A′ and citing set B′
//! (p excluded from both), the score is
//!
//! ```text
//! contribution(p) = (1 / (|A′|·|B′|)) · Σ_{a∈A′} Σ_{b∈B′} distance(vec(a), vec(b))
//! ```
//!
//! — a high score means p bridges semantically distant literature. The score
//! is *undefined* (never zero) when either side has no text-bearing members:
//! conflating "no evidence" with "zero contribution" would distort every
//! downstream distribution and correlation.
//!
//! Because distance = 1 − dot for unit vectors, the double loop collapses:
//!
//! ```text
//! contribution(p) = 1 − dot(Σ_{a∈A′} vec(a), Σ_{b∈B′} vec(b)) / (|A′|·|B′|)
//! ```
//!
//! so each paper costs two sparse vector sums and one dot product instead of
//! |A′|·|B′| cosines. The dot product is Kahan-compensated, keeping the
//! optimized form within 1e-12 of the naive double loop.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Doi};
use crate::graph::CitationGraph;
use crate::numeric::{clamp_unit, significant, KahanSum, Real};
use crate::textmodel::{DocumentVector, VectorSet};

/// Why a paper's contribution cannot be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    /// The DOI appears nowhere: no edges touch it and it has no vector.
    PaperUnknown,
    /// No cited paper has a usable vector (A′ empty).
    NoCitedTexts,
    /// No citing paper has a usable vector (B′ empty).
    NoCitingTexts,
}

/// Outcome of scoring one paper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContributionScore<R: Real = f64> {
    Defined { value: R, a_used: u32, b_used: u32 },
    Undefined(UndefinedReason),
}

impl<R: Real> ContributionScore<R> {
    pub fn value(&self) -> Option<R> {
        match self {
            ContributionScore::Defined { value, .. } => Some(*value),
            ContributionScore::Undefined(_) => None,
        }
    }

    /// |A′|·|B′| — the number of pairs averaged over.
    pub fn pair_count(&self) -> Option<u64> {
        match self {
            ContributionScore::Defined { a_used, b_used, .. } => {
                Some(u64::from(*a_used) * u64::from(*b_used))
            }
            ContributionScore::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, ContributionScore::Defined { .. })
    }
}

/// Sum a side's vectors into one sparse accumulator, keyed by term id.
///
/// Vectors are visited in ascending-DOI order and components accumulate in
/// that fixed order, so the result is identical across runs and platforms.
fn side_sum<'a, R: Real + 'a>(
    members: impl Iterator<Item = &'a DocumentVector<R>>,
    expected_len: usize,
) -> Vec<(u32, R)> {
    let mut acc: BTreeMap<u32, R> = BTreeMap::new();
    let mut seen = 0usize;
    for vector in members {
        seen += 1;
        for &(id, w) in vector.weights() {
            *acc.entry(id).or_insert_with(R::zero) += w;
        }
    }
    debug_assert_eq!(seen, expected_len);
    acc.into_iter().collect()
}

/// Kahan-compensated sparse dot product over two id-sorted weight lists.
fn compensated_dot<R: Real>(a: &[(u32, R)], b: &[(u32, R)]) -> R {
    let mut acc = KahanSum::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                acc.add(a[i].1 * b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    acc.total()
}

/// Score one publication.
///
/// A′ is the subset of `cited_set(p)` with vectors, B′ the subset of
/// `citing_set(p)` with vectors; p itself is excluded from both sides as
/// defense-in-depth beyond self-edge rejection at ingest. Papers appearing
/// on both sides (citation cycles through p) participate on both sides.
///
/// Undefined statuses, in precedence order: `PaperUnknown` when the graph
/// has no edge touching p and p has no vector; then `NoCitedTexts` when A′
/// is empty; then `NoCitingTexts` when B′ is empty.
pub fn contribution<R: Real>(
    p: &Doi,
    graph: &CitationGraph,
    vectors: &VectorSet<R>,
) -> ContributionScore<R> {
    if !graph.knows(p) && !vectors.contains_key(p) {
        return ContributionScore::Undefined(UndefinedReason::PaperUnknown);
    }
    let a_side: Vec<&DocumentVector<R>> = graph
        .cited_set(p)
        .iter()
        .filter(|doi| *doi != p)
        .filter_map(|doi| vectors.get(doi))
        .collect();
    if a_side.is_empty() {
        return ContributionScore::Undefined(UndefinedReason::NoCitedTexts);
    }
    let b_side: Vec<&DocumentVector<R>> = graph
        .citing_set(p)
        .iter()
        .filter(|doi| *doi != p)
        .filter_map(|doi| vectors.get(doi))
        .collect();
    if b_side.is_empty() {
        return ContributionScore::Undefined(UndefinedReason::NoCitingTexts);
    }

    let sum_a = side_sum(a_side.iter().copied(), a_side.len());
    let sum_b = side_sum(b_side.iter().copied(), b_side.len());
    let pairs = R::from_usize(a_side.len() * b_side.len()).expect("pair count fits scalar");
    let mean_cosine = compensated_dot(&sum_a, &sum_b) / pairs;
    ContributionScore::Defined {
        value: clamp_unit(R::one() - mean_cosine),
        a_used: a_side.len() as u32,
        b_used: b_side.len() as u32,
    }
}

/// One row of the metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow<R: Real = f64> {
    pub doi: Doi,
    pub citations: u64,
    pub readers: u64,
    /// Defined contribution value, or `None` for undefined.
    pub contribution: Option<R>,
}

/// Per-paper metric rows in ascending DOI order — the hand-off between the
/// compute and analyze stages.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTable<R: Real = f64> {
    rows: Vec<MetricRow<R>>,
}

/// Tally of score statuses over one `contribution_all` run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionSummary {
    pub defined: u64,
    pub no_cited_texts: u64,
    pub no_citing_texts: u64,
    pub paper_unknown: u64,
}

impl ContributionSummary {
    pub fn undefined(&self) -> u64 {
        self.no_cited_texts + self.no_citing_texts + self.paper_unknown
    }

    pub fn total(&self) -> u64 {
        self.defined + self.undefined()
    }

    fn record<R: Real>(&mut self, score: &ContributionScore<R>) {
        match score {
            ContributionScore::Defined { .. } => self.defined += 1,
            ContributionScore::Undefined(UndefinedReason::NoCitedTexts) => {
                self.no_cited_texts += 1;
            }
            ContributionScore::Undefined(UndefinedReason::NoCitingTexts) => {
                self.no_citing_texts += 1;
            }
            ContributionScore::Undefined(UndefinedReason::PaperUnknown) => {
                self.paper_unknown += 1;
            }
        }
    }
}

/// Score every corpus paper and assemble the metric table.
///
/// Rows are emitted in ascending DOI order, one per corpus paper; citation
/// counts come from the graph, reader counts from the paper records.
/// Per-paper scoring runs in parallel; the result is identical regardless
/// of scheduling because rows are independent and ordering is by DOI.
pub fn contribution_all<R: Real>(
    graph: &CitationGraph,
    vectors: &VectorSet<R>,
    corpus: &Corpus,
) -> (MetricTable<R>, ContributionSummary) {
    let papers: Vec<_> = corpus.papers().values().collect();
    let scored: Vec<(MetricRow<R>, ContributionScore<R>)> = papers
        .par_iter()
        .map(|record| {
            let score = contribution(&record.doi, graph, vectors);
            let row = MetricRow {
                doi: record.doi.clone(),
                citations: graph.citation_count(&record.doi) as u64,
                readers: record.reader_count,
                contribution: score.value(),
            };
            (row, score)
        })
        .collect();
    let mut summary = ContributionSummary::default();
    let mut rows = Vec::with_capacity(scored.len());
    for (row, score) in scored {
        summary.record(&score);
        rows.push(row);
    }
    (MetricTable { rows }, summary)
}

/// Errors from metric-table file I/O.
#[derive(Debug, Error)]
pub enum MetricTableError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(
        "metric table must start with header `doi,citations,readers,contribution`, found {found:?}"
    )]
    Header { found: String },
    #[error("metric table record {index}: {problem}")]
    Record { index: usize, problem: String },
}

const TABLE_HEADER: [&str; 4] = ["doi", "citations", "readers", "contribution"];

impl<R: Real> MetricTable<R> {
    pub fn from_rows(mut rows: Vec<MetricRow<R>>) -> Self {
        rows.sort_by(|a, b| a.doi.cmp(&b.doi));
        MetricTable { rows }
    }

    pub fn rows(&self) -> &[MetricRow<R>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn defined_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.contribution.is_some())
            .count()
    }

    /// Write as CSV: header `doi,citations,readers,contribution`, LF line
    /// endings, contribution empty for undefined rows, reals at 12
    /// significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<(), MetricTableError> {
        let io_err = |source| MetricTableError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        let csv_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(source) => MetricTableError::Io {
                path: path.display().to_string(),
                source,
            },
            other => MetricTableError::Record {
                index: 0,
                problem: format!("{other:?}"),
            },
        };
        writer.write_record(TABLE_HEADER).map_err(csv_err)?;
        for row in &self.rows {
            let contribution = match row.contribution {
                Some(v) => significant(v.to_f64().expect("scalar converts to f64"), 12),
                None => String::new(),
            };
            writer
                .write_record([
                    row.doi.as_str(),
                    &row.citations.to_string(),
                    &row.readers.to_string(),
                    &contribution,
                ])
                .map_err(csv_err)?;
        }
        writer.flush().map_err(io_err)?;
        Ok(())
    }

    /// Read a table previously written by [`MetricTable::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self, MetricTableError> {
        let file = File::open(path).map_err(|source| MetricTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(BufReader::new(file));
        let headers = reader.headers().map_err(|e| MetricTableError::Header {
            found: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != TABLE_HEADER {
            return Err(MetricTableError::Header {
                found: headers.iter().collect::<Vec<_>>().join(","),
            });
        }
        let mut rows = Vec::new();
        for (index, record) in reader.into_records().enumerate() {
            let record = record.map_err(|e| MetricTableError::Record {
                index,
                problem: e.to_string(),
            })?;
            let field = |i: usize| -> Result<&str, MetricTableError> {
                record.get(i).ok_or(MetricTableError::Record {
                    index,
                    problem: format!("missing column {}", TABLE_HEADER[i]),
                })
            };
            let doi = Doi::parse(field(0)?).map_err(|e| MetricTableError::Record {
                index,
                problem: e.to_string(),
            })?;
            let citations = field(1)?.parse().map_err(|e| MetricTableError::Record {
                index,
                problem: format!("citations: {e}"),
            })?;
            let readers = field(2)?.parse().map_err(|e| MetricTableError::Record {
                index,
                problem: format!("readers: {e}"),
            })?;
            let raw = field(3)?;
            let contribution = if raw.is_empty() {
                None
            } else {
                let value = raw.parse::<R>().map_err(|e| MetricTableError::Record {
                    index,
                    problem: format!("contribution: {e}"),
                })?;
                Some(value)
            };
            rows.push(MetricRow {
                doi,
                citations,
                readers,
                contribution,
            });
        }
        Ok(MetricTable { rows })
    }
}

/// Write a short human-readable compute report next to the table.
pub fn write_summary(summary: &ContributionSummary, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "papers scored:     {}", summary.total())?;
    writeln!(out, "defined:           {}", summary.defined)?;
    writeln!(out, "no cited texts:    {}", summary.no_cited_texts)?;
    writeln!(out, "no citing texts:   {}", summary.no_citing_texts)?;
    writeln!(out, "unknown papers:    {}", summary.paper_unknown)?;
    Ok(())
}

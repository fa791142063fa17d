//! Corpus ingest: paper metadata, citation edges, identifier normalization,
//! deduplication, and the serialized corpus file.
//!
//! Input formats:
//! - papers: line-delimited JSON, one object per line, fields `doi`
//!   (required), `title`, `abstract`, `reader_count` (all optional; unknown
//!   fields ignored);
//! - edges: CSV with header `citing_doi,cited_doi`.
//!
//! Per-record problems (bad DOI, unparseable line, self-citation) are counted
//! in the ingest report and never abort the run; only unreadable sources are
//! fatal. Accounting holds exactly: accepted + duplicate + malformed equals
//! the number of input records on both streams.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textmodel::tokenize;

/// Errors from corpus ingest and corpus-file round-trips.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("edges file must start with header `citing_doi,cited_doi`, found {found:?}")]
    EdgeHeader { found: String },
    #[error("corpus file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("corpus file contains duplicate DOI {0}")]
    DuplicateDoi(String),
    #[error("corpus file record {doi}: {problem}")]
    InvalidRecord { doi: String, problem: String },
}

/// A normalized DOI: lowercase, prefix-free, shaped `10.<digits>/<suffix>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Doi(String);

/// Raw text does not reduce to a valid DOI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed DOI: {raw:?}")]
pub struct MalformedDoi {
    pub raw: String,
}

const RESOLVER_PREFIXES: [&str; 5] = [
    "doi:",
    "http://doi.org/",
    "https://doi.org/",
    "http://dx.doi.org/",
    "https://dx.doi.org/",
];

impl Doi {
    /// Normalize raw text into a DOI.
    ///
    /// Trims surrounding whitespace, strips one leading resolver prefix
    /// (case-insensitive), lowercases the remainder, and validates the
    /// `10.<digits>/<non-empty suffix>` shape.
    pub fn parse(raw: &str) -> Result<Doi, MalformedDoi> {
        let trimmed = raw.trim();
        let mut body = trimmed;
        for prefix in RESOLVER_PREFIXES {
            // byte-wise compare: indexing the str could split a multibyte
            // char; a full byte match against an ASCII prefix proves the
            // boundary is ASCII, so the re-slice below cannot panic
            let p = prefix.as_bytes();
            if body.len() >= p.len() && body.as_bytes()[..p.len()].eq_ignore_ascii_case(p) {
                body = &body[p.len()..];
                break;
            }
        }
        let lowered = body.to_lowercase();
        if Self::has_doi_shape(&lowered) {
            Ok(Doi(lowered))
        } else {
            Err(MalformedDoi {
                raw: raw.to_string(),
            })
        }
    }

    fn has_doi_shape(s: &str) -> bool {
        let Some(rest) = s.strip_prefix("10.") else {
            return false;
        };
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return false;
        }
        match rest[digits..].strip_prefix('/') {
            Some(suffix) => !suffix.is_empty(),
            None => false,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Doi {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// One publication: normalized DOI, title/abstract text, reader count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub doi: Doi,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub reader_count: u64,
    /// True iff title + abstract tokenizes to at least one token.
    pub has_text: bool,
}

impl PaperRecord {
    pub fn new(doi: Doi, title: String, abstract_text: String, reader_count: u64) -> Self {
        let has_text = !tokenize(&format!("{title} {abstract_text}")).is_empty();
        PaperRecord {
            doi,
            title,
            abstract_text,
            reader_count,
            has_text,
        }
    }

    /// The text the vector model sees for this record.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.abstract_text)
    }
}

/// One directed citation link: `citing` cites `cited`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationEdge {
    pub citing: Doi,
    pub cited: Doi,
}

/// Paper-stream accounting. `accepted + duplicate + malformed` equals the
/// number of input records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordCounts {
    pub accepted: u64,
    pub duplicate: u64,
    pub malformed: u64,
}

impl RecordCounts {
    pub fn total(&self) -> u64 {
        self.accepted + self.duplicate + self.malformed
    }
}

/// Edge-stream accounting. Self-citations are rejected edges and count
/// toward `malformed`; `self_citation` tallies them separately, so
/// `accepted + duplicate + malformed` equals the number of input records
/// here too.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub accepted: u64,
    pub duplicate: u64,
    pub malformed: u64,
    pub self_citation: u64,
}

impl EdgeCounts {
    pub fn total(&self) -> u64 {
        self.accepted + self.duplicate + self.malformed
    }
}

/// Combined ingest report for one corpus build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub papers: RecordCounts,
    pub edges: EdgeCounts,
}

/// Immutable ingested corpus: deduplicated papers plus retained edges.
///
/// Edges may reference DOIs that have no paper record; such neighbors still
/// contribute to citation counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    papers: BTreeMap<Doi, PaperRecord>,
    edges: Vec<CitationEdge>,
    ingest_report: IngestReport,
}

#[derive(Deserialize)]
struct RawPaper {
    doi: String,
    #[serde(default)]
    title: String,
    #[serde(rename = "abstract", default)]
    r#abstract: String,
    #[serde(default)]
    reader_count: u64,
}

/// Ingest a line-delimited paper stream.
///
/// First occurrence of a normalized DOI wins; later duplicates are dropped
/// and counted. Lines that fail to parse or carry a malformed DOI are
/// counted as malformed. Blank lines are skipped without counting.
pub fn ingest_papers<R: BufRead>(
    source: R,
) -> Result<(BTreeMap<Doi, PaperRecord>, RecordCounts), CorpusError> {
    let mut papers = BTreeMap::new();
    let mut counts = RecordCounts::default();
    for line in source.lines() {
        let line = line.map_err(|source| CorpusError::Io {
            path: "<paper stream>".to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawPaper = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(_) => {
                counts.malformed += 1;
                continue;
            }
        };
        let doi = match Doi::parse(&raw.doi) {
            Ok(doi) => doi,
            Err(_) => {
                counts.malformed += 1;
                continue;
            }
        };
        if papers.contains_key(&doi) {
            counts.duplicate += 1;
            continue;
        }
        let record = PaperRecord::new(doi.clone(), raw.title, raw.r#abstract, raw.reader_count);
        papers.insert(doi, record);
        counts.accepted += 1;
    }
    Ok((papers, counts))
}

/// Ingest a citation-edge CSV with header `citing_doi,cited_doi`.
///
/// Both endpoints are normalized. Edges that are malformed on either end or
/// self-referential are dropped and counted (self-citations count in both
/// `malformed` and `self_citation`); exact duplicate edges are dropped and
/// counted; everything else is retained in first-occurrence order, whether
/// or not the endpoints have paper records.
pub fn ingest_edges<R: std::io::Read>(
    source: R,
) -> Result<(Vec<CitationEdge>, EdgeCounts), CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::EdgeHeader {
            found: e.to_string(),
        })?
        .clone();
    // An empty file (or one holding only a blank line) is a legitimate way to
    // say "no citation data": accept it as zero edges rather than demanding a
    // header for rows that do not exist.
    if headers.iter().all(str::is_empty) {
        return Ok((Vec::new(), EdgeCounts::default()));
    }
    let expected = ["citing_doi", "cited_doi"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CorpusError::EdgeHeader {
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut edges = Vec::new();
    let mut seen: BTreeSet<(Doi, Doi)> = BTreeSet::new();
    let mut counts = EdgeCounts::default();
    for record in reader.into_records() {
        let record = match record {
            Ok(record) => record,
            Err(_) => {
                counts.malformed += 1;
                continue;
            }
        };
        if record.len() != 2 {
            counts.malformed += 1;
            continue;
        }
        let (citing, cited) = match (Doi::parse(&record[0]), Doi::parse(&record[1])) {
            (Ok(citing), Ok(cited)) => (citing, cited),
            _ => {
                counts.malformed += 1;
                continue;
            }
        };
        if citing == cited {
            counts.malformed += 1;
            counts.self_citation += 1;
            continue;
        }
        if !seen.insert((citing.clone(), cited.clone())) {
            counts.duplicate += 1;
            continue;
        }
        edges.push(CitationEdge { citing, cited });
        counts.accepted += 1;
    }
    Ok((edges, counts))
}

impl Corpus {
    /// Build a corpus from open paper and edge streams.
    pub fn from_readers<P: BufRead, E: std::io::Read>(
        papers: P,
        edges: E,
    ) -> Result<Corpus, CorpusError> {
        let (papers, paper_counts) = ingest_papers(papers)?;
        let (edges, edge_counts) = ingest_edges(edges)?;
        Ok(Corpus {
            papers,
            edges,
            ingest_report: IngestReport {
                papers: paper_counts,
                edges: edge_counts,
            },
        })
    }

    /// Build a corpus from a papers file and an edges file.
    pub fn from_files(papers_path: &Path, edges_path: &Path) -> Result<Corpus, CorpusError> {
        let papers = File::open(papers_path).map_err(|source| CorpusError::Io {
            path: papers_path.display().to_string(),
            source,
        })?;
        let edges = File::open(edges_path).map_err(|source| CorpusError::Io {
            path: edges_path.display().to_string(),
            source,
        })?;
        Corpus::from_readers(BufReader::new(papers), BufReader::new(edges))
    }

    pub fn papers(&self) -> &BTreeMap<Doi, PaperRecord> {
        &self.papers
    }

    pub fn edges(&self) -> &[CitationEdge] {
        &self.edges
    }

    pub fn ingest_report(&self) -> &IngestReport {
        &self.ingest_report
    }

    pub fn contains(&self, doi: &Doi) -> bool {
        self.papers.contains_key(doi)
    }

    /// Number of papers whose title + abstract carries at least one token.
    pub fn text_bearing_count(&self) -> usize {
        self.papers.values().filter(|p| p.has_text).count()
    }

    /// Serialize to a self-contained JSON corpus file.
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let file = File::create(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer
            .write_all(b"\n")
            .and_then(|()| writer.flush())
            .map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
        Ok(())
    }

    /// Load a corpus file, revalidating the invariants it is supposed to
    /// carry: unique normalized DOIs, accurate `has_text`, no self-edges.
    pub fn load(path: &Path) -> Result<Corpus, CorpusError> {
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let corpus: Corpus = serde_json::from_reader(BufReader::new(file))?;
        for (doi, record) in &corpus.papers {
            if doi != &record.doi {
                return Err(CorpusError::InvalidRecord {
                    doi: doi.to_string(),
                    problem: format!("keyed as {doi} but record says {}", record.doi),
                });
            }
            if Doi::parse(doi.as_str()).as_ref() != Ok(doi) {
                return Err(CorpusError::InvalidRecord {
                    doi: doi.to_string(),
                    problem: "DOI is not in normalized form".to_string(),
                });
            }
            let expected = !tokenize(&record.text()).is_empty();
            if record.has_text != expected {
                return Err(CorpusError::InvalidRecord {
                    doi: doi.to_string(),
                    problem: "has_text flag disagrees with tokenizer".to_string(),
                });
            }
        }
        if corpus.ingest_report.papers.accepted != corpus.papers.len() as u64 {
            return Err(CorpusError::InvalidRecord {
                doi: String::new(),
                problem: "ingest report does not match paper count".to_string(),
            });
        }
        for edge in &corpus.edges {
            if edge.citing == edge.cited {
                return Err(CorpusError::InvalidRecord {
                    doi: edge.citing.to_string(),
                    problem: "corpus contains a self-citation edge".to_string(),
                });
            }
        }
        Ok(corpus)
    }
}

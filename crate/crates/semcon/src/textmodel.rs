//! Text vectorization: tokenizer, corpus vocabulary statistics, tf-idf
//! document vectors, and cosine similarity/distance.
//!
//! The vector space is built once per corpus over every text-bearing paper
//! (title + abstract). Weights are `tf · ln(N/df)`; terms present in every
//! document carry zero information and are dropped; vectors are
//! L2-normalized so cosine reduces to a sparse dot product. There are no
//! stopword lists and no stemming — idf already downweights ubiquitous
//! terms, and staying rule-based keeps the pipeline language-agnostic.
//!
//! Determinism: term ids are assigned in lexicographic term order, vector
//! entries are stored sorted by id, and dot products merge the two sorted
//! lists, so every sum is accumulated in one fixed order regardless of
//! platform, thread count, or argument order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Corpus, Doi, PaperRecord};
use crate::numeric::{clamp_unit, Real};

/// Errors from vocabulary construction and vector arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextModelError {
    #[error("corpus has no text-bearing documents; vocabulary undefined")]
    EmptyVocabulary,
    #[error("cannot vectorize text-free record {doi}")]
    TextFreeRecord { doi: String },
    #[error("cosine is undefined for an empty vector")]
    EmptyVector,
}

/// Corpus-level term statistics: document count and per-term document
/// frequency, plus the term-id assignment shared by all vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabularyStats {
    doc_count: u32,
    /// term → (id, document frequency); ids follow lexicographic term order.
    terms: BTreeMap<String, (u32, u32)>,
}

impl VocabularyStats {
    /// Number of text-bearing documents the statistics were built over.
    pub fn doc_count(&self) -> u32 {
        self.doc_count
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Document frequency of a term, if it occurs in the corpus.
    pub fn doc_freq(&self, term: &str) -> Option<u32> {
        self.terms.get(term).map(|&(_, df)| df)
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.terms.get(term).map(|&(id, _)| id)
    }
}

/// Sparse, L2-normalized tf-idf vector: `(term id, weight)` sorted by id.
///
/// An empty vector means the document carries no information under the
/// current vocabulary (text-free, or every term occurs in all documents);
/// empty vectors are excluded from similarity arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentVector<R: Real = f64> {
    weights: Vec<(u32, R)>,
}

impl<R: Real> DocumentVector<R> {
    pub fn weights(&self) -> &[(u32, R)] {
        &self.weights
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }
}

/// Every vectorized paper of a corpus, keyed by DOI.
///
/// Contains exactly the papers whose vector is non-empty; papers absent here
/// are invisible to the similarity model.
pub type VectorSet<R> = BTreeMap<Doi, DocumentVector<R>>;

/// Split text into lowercase tokens.
///
/// Splits on every character that is not a letter or digit, keeps tokens of
/// at least two characters, drops tokens consisting only of digits, and
/// preserves order and multiplicity.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|token| token.chars().count() >= 2)
        .filter(|token| !token.chars().all(|c| c.is_numeric()))
        .map(str::to_string)
        .collect()
}

/// Count documents and per-term document frequencies over every text-bearing
/// paper of the corpus.
pub fn build_vocabulary(corpus: &Corpus) -> Result<VocabularyStats, TextModelError> {
    let mut doc_freq: BTreeMap<String, u32> = BTreeMap::new();
    let mut doc_count: u32 = 0;
    for record in corpus.papers().values().filter(|p| p.has_text) {
        doc_count += 1;
        let unique: BTreeSet<String> = tokenize(&record.text()).into_iter().collect();
        for term in unique {
            *doc_freq.entry(term).or_insert(0) += 1;
        }
    }
    if doc_count == 0 {
        return Err(TextModelError::EmptyVocabulary);
    }
    let terms = doc_freq
        .into_iter()
        .enumerate()
        .map(|(id, (term, df))| (term, (id as u32, df)))
        .collect();
    Ok(VocabularyStats { doc_count, terms })
}

/// Build the tf-idf vector of one text-bearing record.
///
/// Raw weight per term is `tf · ln(N/df)`; terms with `df == N` and terms
/// unknown to the vocabulary are dropped; the remainder is L2-normalized.
/// When idf annihilates every term the result is the empty vector, which
/// downstream code treats like a text-free record.
pub fn vectorize<R: Real>(
    record: &PaperRecord,
    stats: &VocabularyStats,
) -> Result<DocumentVector<R>, TextModelError> {
    if !record.has_text {
        return Err(TextModelError::TextFreeRecord {
            doi: record.doi.to_string(),
        });
    }
    let mut tf: BTreeMap<String, u32> = BTreeMap::new();
    for token in tokenize(&record.text()) {
        *tf.entry(token).or_insert(0) += 1;
    }
    let n = R::from_u32(stats.doc_count).expect("doc count fits scalar");
    // tf iterates terms lexicographically and ids follow the same order, so
    // the entries come out already sorted by id.
    let mut weights: Vec<(u32, R)> = Vec::with_capacity(tf.len());
    for (term, count) in &tf {
        let Some(&(id, df)) = stats.terms.get(term) else {
            continue;
        };
        if df == stats.doc_count {
            continue;
        }
        let idf = (n / R::from_u32(df).expect("df fits scalar")).real_ln();
        weights.push((id, R::from_u32(*count).expect("tf fits scalar") * idf));
    }
    let norm_sq = weights.iter().fold(R::zero(), |acc, &(_, w)| acc + w * w);
    if norm_sq == R::zero() {
        return Ok(DocumentVector {
            weights: Vec::new(),
        });
    }
    let norm = norm_sq.sqrt();
    for (_, w) in &mut weights {
        *w /= norm;
    }
    Ok(DocumentVector { weights })
}

/// Build the vocabulary and the vector of every text-bearing paper.
///
/// Papers whose vector comes out empty are omitted from the set.
pub fn build_vectors<R: Real>(
    corpus: &Corpus,
) -> Result<(VocabularyStats, VectorSet<R>), TextModelError> {
    let stats = build_vocabulary(corpus)?;
    let text_bearing: Vec<&PaperRecord> = corpus.papers().values().filter(|p| p.has_text).collect();
    let pairs: Vec<(Doi, DocumentVector<R>)> = text_bearing
        .par_iter()
        .map(|record| {
            let vector = vectorize(record, &stats).expect("record gated on has_text");
            (record.doi.clone(), vector)
        })
        .collect();
    let mut vectors = VectorSet::new();
    for (doi, vector) in pairs {
        if !vector.is_empty() {
            vectors.insert(doi, vector);
        }
    }
    Ok((stats, vectors))
}

/// Cosine similarity of two non-empty normalized vectors, clamped to [0, 1].
///
/// A merge join over the two sorted entry lists fixes the summation order by
/// term id, making the result exactly symmetric in its arguments.
pub fn cosine<R: Real>(u: &DocumentVector<R>, v: &DocumentVector<R>) -> Result<R, TextModelError> {
    if u.is_empty() || v.is_empty() {
        return Err(TextModelError::EmptyVector);
    }
    let (a, b) = (&u.weights, &v.weights);
    let mut acc = R::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(clamp_unit(acc))
}

/// Semantic distance: `1 − cosine(u, v)`, in [0, 1].
pub fn distance<R: Real>(
    u: &DocumentVector<R>,
    v: &DocumentVector<R>,
) -> Result<R, TextModelError> {
    Ok(R::one() - cosine(u, v)?)
}

//! Independent re-implementations of the numeric pipeline, used as oracles
//! by the integration suites.
//!
//! Everything here is deliberately written from the formulas, not from the
//! library: hash-map vectors instead of sorted id lists, textbook two-pass
//! statistics instead of compensated streaming sums, double-double
//! accumulation where the comparison tolerance demands headroom. Agreement
//! between two structurally different implementations is the evidence the
//! tests are after.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semcon::Corpus;

/// Relative-or-absolute closeness: |a − b| ≤ tol · max(1, |a|, |b|).
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        close(a, b, tol),
        "{what}: {a} vs {b} differ by {} (tol {tol})",
        (a - b).abs()
    );
}

// ---------------------------------------------------------------------------
// Naive contribution oracle
// ---------------------------------------------------------------------------

/// Tokenizer mirror: Unicode lowercase, split on non-alphanumeric, keep
/// tokens of at least two characters that are not purely numeric.
pub fn naive_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out.retain(|t| t.chars().count() >= 2 && !t.chars().all(char::is_numeric));
    out
}

/// tf-idf vectors rebuilt from scratch: `tf · ln(N/df)` over text-bearing
/// papers, terms present everywhere dropped, L2-normalized. Documents whose
/// every term is annihilated by idf get no vector, matching how the library
/// treats them as text-free.
pub fn naive_vectors(corpus: &Corpus) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut docs: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (doi, record) in corpus.papers() {
        let tokens = naive_tokens(&format!("{} {}", record.title, record.abstract_text));
        if !tokens.is_empty() {
            docs.insert(doi.to_string(), tokens);
        }
    }
    let doc_count = docs.len();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for tokens in docs.values() {
        let unique: BTreeSet<&String> = tokens.iter().collect();
        for term in unique {
            *df.entry(term.clone()).or_insert(0) += 1;
        }
    }
    let mut out = BTreeMap::new();
    for (doi, tokens) in &docs {
        let mut tf: BTreeMap<&str, f64> = BTreeMap::new();
        for token in tokens {
            *tf.entry(token).or_insert(0.0) += 1.0;
        }
        let mut weights: BTreeMap<String, f64> = BTreeMap::new();
        for (term, count) in tf {
            let d = df[term];
            if d == doc_count {
                continue;
            }
            weights.insert(term.to_string(), count * (doc_count as f64 / d as f64).ln());
        }
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for w in weights.values_mut() {
                *w /= norm;
            }
            out.insert(doi.clone(), weights);
        }
    }
    out
}

fn naive_dot(u: &BTreeMap<String, f64>, v: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let mut dot = 0.0;
    for (term, w) in small {
        if let Some(w2) = large.get(term) {
            dot += w * w2;
        }
    }
    dot
}

/// Contribution by the definition: mean over all (cited, citing) vector
/// pairs of `1 − cosine`, computed with an explicit double loop. `None`
/// covers every undefined case.
pub fn naive_contribution(
    p: &str,
    corpus: &Corpus,
    vectors: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Option<f64> {
    let mut cited: BTreeSet<String> = BTreeSet::new();
    let mut citing: BTreeSet<String> = BTreeSet::new();
    for edge in corpus.edges() {
        if edge.citing.as_str() == p {
            cited.insert(edge.cited.to_string());
        }
        if edge.cited.as_str() == p {
            citing.insert(edge.citing.to_string());
        }
    }
    let a: Vec<&BTreeMap<String, f64>> = cited
        .iter()
        .filter(|d| d.as_str() != p)
        .filter_map(|d| vectors.get(d))
        .collect();
    let b: Vec<&BTreeMap<String, f64>> = citing
        .iter()
        .filter(|d| d.as_str() != p)
        .filter_map(|d| vectors.get(d))
        .collect();
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for va in &a {
        for vb in &b {
            total += 1.0 - naive_dot(va, vb);
        }
    }
    Some((total / (a.len() * b.len()) as f64).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Double-double Pearson oracle
// ---------------------------------------------------------------------------

/// An unevaluated sum of two doubles, giving ~32 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct TwoFloat {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> TwoFloat {
    let s = a + b;
    let v = s - a;
    TwoFloat {
        hi: s,
        lo: (a - (s - v)) + (b - v),
    }
}

/// Requires |a| ≥ |b| or a == 0.
fn quick_two_sum(a: f64, b: f64) -> TwoFloat {
    let s = a + b;
    TwoFloat {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod(a: f64, b: f64) -> TwoFloat {
    let p = a * b;
    TwoFloat {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl TwoFloat {
    pub fn add(self, other: TwoFloat) -> TwoFloat {
        let s = two_sum(self.hi, other.hi);
        let t = two_sum(self.lo, other.lo);
        let r = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(r.hi, r.lo + t.lo)
    }

    pub fn add_f64(self, x: f64) -> TwoFloat {
        self.add(TwoFloat { hi: x, lo: 0.0 })
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Pearson's r with double-double accumulation: exact enough that any
/// disagreement beyond ~1e-13 is the other side's error.
pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "oracle_pearson needs paired samples");
    let n = x.len() as f64;
    let mut sx = TwoFloat::default();
    let mut sy = TwoFloat::default();
    for (&a, &b) in x.iter().zip(y) {
        sx = sx.add_f64(a);
        sy = sy.add_f64(b);
    }
    let mx = sx.value() / n;
    let my = sy.value() / n;
    let mut sxy = TwoFloat::default();
    let mut sxx = TwoFloat::default();
    let mut syy = TwoFloat::default();
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy = sxy.add(two_prod(dx, dy));
        sxx = sxx.add(two_prod(dx, dx));
        syy = syy.add(two_prod(dy, dy));
    }
    let r = sxy.value() / (sxx.value() * syy.value()).sqrt();
    r.clamp(-1.0, 1.0)
}

// ---------------------------------------------------------------------------
// Sort-and-slice bucket oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBucket {
    pub size: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub mean: f64,
    pub std: f64,
}

/// The bucket protocol done the obvious way: sort rows by `(x, doi)`, slice
/// the first `n mod k` buckets one row larger, take plain two-pass mean and
/// population standard deviation per slice.
pub fn oracle_buckets(rows: &[(f64, f64, String)], k: usize) -> Vec<OracleBucket> {
    let mut rows: Vec<&(f64, f64, String)> = rows.iter().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.2.cmp(&b.2)));
    let n = rows.len();
    assert!(n >= k, "oracle_buckets needs at least k rows");
    let base = n / k;
    let extra = n % k;
    let mut out = Vec::with_capacity(k);
    let mut pos = 0;
    for index in 0..k {
        let size = if index < extra { base + 1 } else { base };
        let slice = &rows[pos..pos + size];
        pos += size;
        let mean = slice.iter().map(|r| r.1).sum::<f64>() / size as f64;
        let var = slice.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / size as f64;
        out.push(OracleBucket {
            size,
            x_min: slice.first().unwrap().0,
            x_max: slice.last().unwrap().0,
            mean,
            std: var.sqrt(),
        });
    }
    assert_eq!(pos, n);
    out
}

// ---------------------------------------------------------------------------
// Misc statistics
// ---------------------------------------------------------------------------

/// Moment skewness g₁ = m₃ / m₂^(3/2).
pub fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

// ---------------------------------------------------------------------------
// Binary + fixture plumbing
// ---------------------------------------------------------------------------

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_fixture_corpus() -> Corpus {
    Corpus::from_files(&fixture_path("papers.jsonl"), &fixture_path("edges.csv"))
        .expect("fixture corpus ingests")
}

/// Run the CLI binary, returning its full output. Panics on spawn failure
/// only; callers inspect status and streams.
pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semcon"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

/// Read every file under `dir` (recursively) into a sorted map keyed by
/// relative path, for byte-level comparisons between runs.
pub fn dir_snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("under root")
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

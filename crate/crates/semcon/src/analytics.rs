//! Comparative statistics over the metric table: Pearson correlations,
//! equal-size bucket studies, and metric distributions.
//!
//! The protocol mirrors a three-way comparison of citation counts, reader
//! counts, and contribution: every metric pair is correlated, every metric
//! gets a distribution histogram, and every directed metric pair gets a
//! bucket study (sort by one metric, split into k equal buckets, summarize
//! the other metric per bucket with mean and population standard deviation,
//! plus the grand mean across buckets).
//!
//! Rows with undefined contribution are excluded from every statistic that
//! involves contribution — never imputed — and the exclusion is counted in
//! the report. Statistics whose preconditions fail (too few rows, zero
//! variance) are skipped with a recorded reason rather than aborting the
//! whole report.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contribution::{MetricRow, MetricTable};
use crate::numeric::{significant, KahanSum, Real};

/// The three studied metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Citations,
    Readers,
    Contribution,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Citations, Metric::Readers, Metric::Contribution];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Citations => "citations",
            Metric::Readers => "readers",
            Metric::Contribution => "contribution",
        }
    }

    /// True for count-valued metrics, the ones eligible for log transforms
    /// and log2 binning.
    pub fn is_count(self) -> bool {
        !matches!(self, Metric::Contribution)
    }

    fn extract<R: Real>(self, row: &MetricRow<R>) -> Option<R> {
        match self {
            Metric::Citations => Some(R::from_u64(row.citations).expect("count fits scalar")),
            Metric::Readers => Some(R::from_u64(row.readers).expect("count fits scalar")),
            Metric::Contribution => row.contribution,
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Errors from statistical operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("sequence lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 2 points, got {n}")]
    TooFewPoints { n: usize },
    #[error("{side} sequence is constant; correlation undefined")]
    ZeroVariance { side: &'static str },
    #[error("{rows} usable rows cannot fill {buckets} buckets")]
    TooFewRows { rows: usize, buckets: usize },
    #[error("bucket count must be at least 2, got {0}")]
    InvalidBucketCount(usize),
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("no values to bin")]
    EmptyValues,
    #[error("metric table has no usable rows")]
    EmptyTable,
}

/// Pearson product-moment correlation of two equal-length sequences.
///
/// Two-pass form with compensated accumulation: means first, then centered
/// moments. The result is clamped into [−1, 1] to absorb rounding at the
/// boundaries.
pub fn pearson<R: Real>(x: &[R], y: &[R]) -> Result<R, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(AnalyticsError::TooFewPoints { n: x.len() });
    }
    let mean_x = mean(x);
    let mean_y = mean(y);
    let mut sxy = KahanSum::new();
    let mut sxx = KahanSum::new();
    let mut syy = KahanSum::new();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    if sxx.total() == R::zero() {
        return Err(AnalyticsError::ZeroVariance { side: "x" });
    }
    if syy.total() == R::zero() {
        return Err(AnalyticsError::ZeroVariance { side: "y" });
    }
    let r = sxy.total() / (sxx.total().sqrt() * syy.total().sqrt());
    Ok(r.max(-R::one()).min(R::one()))
}

fn mean<R: Real>(values: &[R]) -> R {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total() / R::from_usize(values.len()).expect("length fits scalar")
}

/// One computed correlation, with its sample size and the metrics involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CorrelationResult<R: Real = f64> {
    pub metric_x: Metric,
    pub metric_y: Metric,
    pub r: R,
    pub n: u64,
}

/// One bar of a bucket study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BucketSummary<R: Real = f64> {
    pub bucket_index: usize,
    pub size: usize,
    pub x_min: R,
    pub x_max: R,
    pub y_mean: R,
    /// Population standard deviation of the target metric in this bucket.
    pub y_std: R,
}

/// A full bucket study: k buckets sorted by `x`, each summarizing `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BucketStudy<R: Real = f64> {
    pub x: Metric,
    pub y: Metric,
    pub buckets: Vec<BucketSummary<R>>,
    /// Mean of the bucket means (the study's horizontal reference line).
    pub grand_mean: R,
}

/// Sort usable rows by `(x, doi)` and split them into `k` contiguous buckets
/// of near-equal size: the first `n mod k` buckets take `⌈n/k⌉` rows, the
/// rest `⌊n/k⌋`. The DOI tie-break makes the split total and deterministic
/// even when the sorting metric is heavily tied.
pub fn bucketize<R: Real>(
    table: &MetricTable<R>,
    x: Metric,
    y: Metric,
    k: usize,
) -> Result<BucketStudy<R>, AnalyticsError> {
    if k < 2 {
        return Err(AnalyticsError::InvalidBucketCount(k));
    }
    let mut rows: Vec<(R, R, &str)> = table
        .rows()
        .iter()
        .filter_map(|row| {
            let xv = x.extract(row)?;
            let yv = y.extract(row)?;
            Some((xv, yv, row.doi.as_str()))
        })
        .collect();
    let n = rows.len();
    if n < k {
        return Err(AnalyticsError::TooFewRows {
            rows: n,
            buckets: k,
        });
    }
    rows.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.2.cmp(b.2))
    });

    let base = n / k;
    let remainder = n % k;
    let mut buckets = Vec::with_capacity(k);
    let mut grand = KahanSum::new();
    let mut start = 0usize;
    for index in 0..k {
        let size = base + usize::from(index < remainder);
        let slice = &rows[start..start + size];
        start += size;
        let ys: Vec<R> = slice.iter().map(|&(_, y, _)| y).collect();
        let y_mean = mean(&ys);
        let mut dev = KahanSum::new();
        for &y in &ys {
            let d = y - y_mean;
            dev.add(d * d);
        }
        let y_std = (dev.total() / R::from_usize(size).expect("size fits scalar")).sqrt();
        grand.add(y_mean);
        buckets.push(BucketSummary {
            bucket_index: index,
            size,
            x_min: slice.first().expect("bucket non-empty").0,
            x_max: slice.last().expect("bucket non-empty").0,
            y_mean,
            y_std,
        });
    }
    debug_assert_eq!(start, n);
    Ok(BucketStudy {
        x,
        y,
        buckets,
        grand_mean: grand.total() / R::from_usize(k).expect("k fits scalar"),
    })
}

/// How to bin a metric's values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound = "")]
pub enum BinningSpec<R: Real = f64> {
    /// Equal-width bins spanning [min, max].
    Linear { min: R, max: R, bins: usize },
    /// Geometric bins from min (≥ 1) to max, `bins_per_doubling` per octave.
    Log2 {
        min: R,
        max: R,
        bins_per_doubling: usize,
    },
}

/// Binned counts: half-open bins `[edge_i, edge_i+1)`, last bin closed,
/// out-of-range values tallied in `underflow`/`overflow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Histogram<R: Real = f64> {
    pub bin_edges: Vec<R>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl<R: Real> Histogram<R> {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

fn build_edges<R: Real>(spec: &BinningSpec<R>) -> Result<Vec<R>, AnalyticsError> {
    let edges = match *spec {
        BinningSpec::Linear { min, max, bins } => {
            if bins < 1 {
                return Err(AnalyticsError::InvalidBinning("bins < 1".to_string()));
            }
            if min.partial_cmp(&max) != Some(Ordering::Less) {
                return Err(AnalyticsError::InvalidBinning(format!(
                    "min {min} must be below max {max}"
                )));
            }
            let width = max - min;
            let denom = R::from_usize(bins).expect("bins fits scalar");
            let mut edges: Vec<R> = (0..bins)
                .map(|i| min + width * R::from_usize(i).expect("index fits scalar") / denom)
                .collect();
            edges.push(max);
            edges
        }
        BinningSpec::Log2 {
            min,
            max,
            bins_per_doubling,
        } => {
            if bins_per_doubling < 1 {
                return Err(AnalyticsError::InvalidBinning(
                    "bins_per_doubling < 1".to_string(),
                ));
            }
            if min < R::one() {
                return Err(AnalyticsError::InvalidBinning(format!(
                    "log2 binning requires min ≥ 1, got {min}"
                )));
            }
            if min.partial_cmp(&max) != Some(Ordering::Less) {
                return Err(AnalyticsError::InvalidBinning(format!(
                    "min {min} must be below max {max}"
                )));
            }
            let denom = R::from_usize(bins_per_doubling).expect("bins fits scalar");
            let mut edges = Vec::new();
            let mut j = 0u32;
            loop {
                let edge = min * (R::from_u32(j).expect("step fits scalar") / denom).real_exp2();
                if edge >= max {
                    break;
                }
                edges.push(edge);
                j += 1;
                if j > 64 * bins_per_doubling as u32 {
                    return Err(AnalyticsError::InvalidBinning(
                        "binning spans more than 64 doublings".to_string(),
                    ));
                }
            }
            edges.push(max);
            edges
        }
    };
    if edges.len() < 2
        || edges
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(AnalyticsError::InvalidBinning(
            "edges are not strictly increasing".to_string(),
        ));
    }
    Ok(edges)
}

/// Bin a value sequence.
pub fn histogram<R: Real>(
    values: &[R],
    spec: &BinningSpec<R>,
) -> Result<Histogram<R>, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::EmptyValues);
    }
    let bin_edges = build_edges(spec)?;
    let bins = bin_edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let mut underflow = 0u64;
    let mut overflow = 0u64;
    let first = bin_edges[0];
    let last = *bin_edges.last().expect("at least two edges");
    for &v in values {
        if v < first {
            underflow += 1;
        } else if v > last {
            overflow += 1;
        } else if v == last {
            counts[bins - 1] += 1;
        } else {
            // last edge with edge <= v; edges strictly increasing
            let idx = bin_edges.partition_point(|&e| e <= v) - 1;
            counts[idx] += 1;
        }
    }
    Ok(Histogram {
        bin_edges,
        counts,
        underflow,
        overflow,
    })
}

/// Analysis switches, mirroring the CLI flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    /// Buckets per study.
    pub bucket_count: usize,
    /// Drop rows with zero readers from the whole table before any statistic.
    pub exclude_zero_readers: bool,
    /// Correlate ln(1+count) instead of raw counts (contribution is never
    /// transformed). Applies to correlations only; buckets and histograms
    /// always see raw values.
    pub log_transform: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            bucket_count: 20,
            exclude_zero_readers: false,
            log_transform: false,
        }
    }
}

/// Row accounting for one analysis run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCounts {
    pub rows_input: u64,
    pub zero_reader_rows_excluded: u64,
    pub rows_used: u64,
    pub defined_contribution: u64,
    pub undefined_contribution_excluded: u64,
}

/// A statistic that could not be computed, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedStatistic {
    pub statistic: String,
    pub reason: String,
}

/// A histogram tagged with the metric it summarizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MetricHistogram<R: Real = f64> {
    pub metric: Metric,
    pub histogram: Histogram<R>,
}

/// Everything the analyze stage produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnalysisReport<R: Real = f64> {
    pub options: AnalyzeOptions,
    pub counts: RowCounts,
    pub correlations: Vec<CorrelationResult<R>>,
    pub histograms: Vec<MetricHistogram<R>>,
    pub bucket_studies: Vec<BucketStudy<R>>,
    pub skipped: Vec<SkippedStatistic>,
}

/// Run the full protocol: three correlations, three histograms, six
/// directed bucket studies.
///
/// Fatal errors are reserved for tables that cannot support even the
/// count-only statistics; anything narrower (undefined contribution,
/// constant metric) downgrades to a `skipped` entry.
pub fn analyze<R: Real>(
    table: &MetricTable<R>,
    options: &AnalyzeOptions,
) -> Result<AnalysisReport<R>, AnalyticsError> {
    if options.bucket_count < 2 {
        return Err(AnalyticsError::InvalidBucketCount(options.bucket_count));
    }
    let rows_input = table.len();
    let kept: Vec<MetricRow<R>> = table
        .rows()
        .iter()
        .filter(|row| !(options.exclude_zero_readers && row.readers == 0))
        .cloned()
        .collect();
    let used = MetricTable::from_rows(kept);
    if used.is_empty() {
        return Err(AnalyticsError::EmptyTable);
    }
    if used.len() < options.bucket_count {
        return Err(AnalyticsError::TooFewRows {
            rows: used.len(),
            buckets: options.bucket_count,
        });
    }
    let counts = RowCounts {
        rows_input: rows_input as u64,
        zero_reader_rows_excluded: (rows_input - used.len()) as u64,
        rows_used: used.len() as u64,
        defined_contribution: used.defined_count() as u64,
        undefined_contribution_excluded: (used.len() - used.defined_count()) as u64,
    };

    let mut report = AnalysisReport {
        options: *options,
        counts,
        correlations: Vec::new(),
        histograms: Vec::new(),
        bucket_studies: Vec::new(),
        skipped: Vec::new(),
    };

    let pairs = [
        (Metric::Citations, Metric::Readers),
        (Metric::Citations, Metric::Contribution),
        (Metric::Readers, Metric::Contribution),
    ];
    for (mx, my) in pairs {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for row in used.rows() {
            let (Some(xv), Some(yv)) = (mx.extract(row), my.extract(row)) else {
                continue;
            };
            xs.push(transform_for_correlation(mx, xv, options.log_transform));
            ys.push(transform_for_correlation(my, yv, options.log_transform));
        }
        match pearson(&xs, &ys) {
            Ok(r) => report.correlations.push(CorrelationResult {
                metric_x: mx,
                metric_y: my,
                r,
                n: xs.len() as u64,
            }),
            Err(e) => report.skipped.push(SkippedStatistic {
                statistic: format!("correlation_{}_vs_{}", mx.name(), my.name()),
                reason: e.to_string(),
            }),
        }
    }

    for metric in Metric::ALL {
        let values: Vec<R> = used
            .rows()
            .iter()
            .filter_map(|r| metric.extract(r))
            .collect();
        let spec = match default_binning(metric, &values) {
            Ok(spec) => spec,
            Err(e) => {
                report.skipped.push(SkippedStatistic {
                    statistic: format!("hist_{}", metric.name()),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match histogram(&values, &spec) {
            Ok(hist) => report.histograms.push(MetricHistogram {
                metric,
                histogram: hist,
            }),
            Err(e) => report.skipped.push(SkippedStatistic {
                statistic: format!("hist_{}", metric.name()),
                reason: e.to_string(),
            }),
        }
    }

    for mx in Metric::ALL {
        for my in Metric::ALL {
            if mx == my {
                continue;
            }
            match bucketize(&used, mx, my, options.bucket_count) {
                Ok(study) => report.bucket_studies.push(study),
                Err(e) => report.skipped.push(SkippedStatistic {
                    statistic: format!("fig_{}_vs_{}", mx.name(), my.name()),
                    reason: e.to_string(),
                }),
            }
        }
    }

    Ok(report)
}

fn transform_for_correlation<R: Real>(metric: Metric, value: R, log_transform: bool) -> R {
    if log_transform && metric.is_count() {
        (R::one() + value).real_ln()
    } else {
        value
    }
}

/// Default binning per metric: geometric (log2) bins for the long-tailed
/// count metrics, 20 linear bins over [0, 1] for contribution.
fn default_binning<R: Real>(
    metric: Metric,
    values: &[R],
) -> Result<BinningSpec<R>, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::EmptyValues);
    }
    if metric.is_count() {
        let max = values
            .iter()
            .copied()
            .fold(R::zero(), |a, b| if b > a { b } else { a });
        if max < R::one() {
            return Err(AnalyticsError::InvalidBinning(format!(
                "all {} values are zero; log2 binning needs a positive maximum",
                metric.name()
            )));
        }
        Ok(BinningSpec::Log2 {
            min: R::one(),
            max: max + R::one(),
            bins_per_doubling: 1,
        })
    } else {
        Ok(BinningSpec::Linear {
            min: R::zero(),
            max: R::one(),
            bins: 20,
        })
    }
}

/// Write one bucket study as a plot-ready CSV:
/// `bucket,x_min,x_max,y_mean,y_std,grand_mean`.
pub fn write_bucket_csv<R: Real, W: Write>(
    study: &BucketStudy<R>,
    mut out: W,
) -> std::io::Result<()> {
    let sig = |v: R| significant(v.to_f64().expect("scalar converts to f64"), 12);
    writeln!(out, "bucket,x_min,x_max,y_mean,y_std,grand_mean")?;
    for b in &study.buckets {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            b.bucket_index,
            sig(b.x_min),
            sig(b.x_max),
            sig(b.y_mean),
            sig(b.y_std),
            sig(study.grand_mean),
        )?;
    }
    Ok(())
}

/// Write one histogram as a plot-ready CSV: `bin,lower,upper,count`, with
/// underflow/overflow rows first and last (their open side left empty).
pub fn write_histogram_csv<R: Real, W: Write>(
    hist: &Histogram<R>,
    mut out: W,
) -> std::io::Result<()> {
    let sig = |v: R| significant(v.to_f64().expect("scalar converts to f64"), 12);
    writeln!(out, "bin,lower,upper,count")?;
    writeln!(
        out,
        "underflow,,{},{}",
        sig(hist.bin_edges[0]),
        hist.underflow
    )?;
    for (i, count) in hist.counts.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            i,
            sig(hist.bin_edges[i]),
            sig(hist.bin_edges[i + 1]),
            count
        )?;
    }
    let last = hist.bin_edges.last().expect("at least two edges");
    writeln!(out, "overflow,{},,{}", sig(*last), hist.overflow)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Doi;
    use approx::assert_abs_diff_eq;

    fn row(doi: &str, citations: u64, readers: u64, contribution: Option<f64>) -> MetricRow {
        MetricRow {
            doi: Doi::parse(doi).unwrap(),
            citations,
            readers,
            contribution,
        }
    }

    fn table(rows: Vec<MetricRow>) -> MetricTable {
        MetricTable::from_rows(rows)
    }

    #[test]
    fn pearson_perfect_lines() {
        let x: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_abs_diff_eq!(pearson(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &neg).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_rejects_bad_input() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(AnalyticsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(AnalyticsError::TooFewPoints { n: 1 })
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(AnalyticsError::ZeroVariance { side: "x" })
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]),
            Err(AnalyticsError::ZeroVariance { side: "y" })
        ));
    }

    #[test]
    fn pearson_affine_invariance() {
        let x = [0.3, 1.7, 2.2, 4.9, 5.1, 8.0];
        let y = [2.0, 1.0, 4.0, 3.5, 7.0, 6.0];
        let base = pearson(&x, &y).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| 3.5 * v + 11.0).collect();
        assert_abs_diff_eq!(pearson(&scaled, &y).unwrap(), base, epsilon = 1e-10);
        let flipped: Vec<f64> = x.iter().map(|v| -2.0 * v).collect();
        assert_abs_diff_eq!(pearson(&flipped, &y).unwrap(), -base, epsilon = 1e-10);
    }

    #[test]
    fn pearson_is_symmetric() {
        let x = [0.3f64, 1.7, 2.2, 4.9, 5.1];
        let y = [2.0f64, 1.0, 4.0, 3.5, 7.0];
        assert_eq!(
            pearson(&x, &y).unwrap().to_bits(),
            pearson(&y, &x).unwrap().to_bits()
        );
    }

    fn synthetic_rows(n: usize) -> Vec<MetricRow> {
        // deterministic but irregular values, including heavy citation ties
        (0..n)
            .map(|i| {
                row(
                    &format!("10.1/r{i:05}"),
                    (i * 7 % 13) as u64,
                    (i * 31 % 97) as u64,
                    Some(((i * 17 % 100) as f64) / 100.0),
                )
            })
            .collect()
    }

    #[test]
    fn bucket_sizes_follow_remainder_rule() {
        let t = table(synthetic_rows(43));
        let study = bucketize(&t, Metric::Citations, Metric::Readers, 20).unwrap();
        let sizes: Vec<usize> = study.buckets.iter().map(|b| b.size).collect();
        let expected: Vec<usize> = (0..20).map(|i| if i < 3 { 3 } else { 2 }).collect();
        assert_eq!(sizes, expected);

        let t40 = table(synthetic_rows(40));
        let study40 = bucketize(&t40, Metric::Citations, Metric::Readers, 20).unwrap();
        assert!(study40.buckets.iter().all(|b| b.size == 2));
    }

    #[test]
    fn bucket_concatenation_is_sorted_and_complete() {
        let t = table(synthetic_rows(101));
        let study = bucketize(&t, Metric::Readers, Metric::Contribution, 20).unwrap();
        assert_eq!(study.buckets.iter().map(|b| b.size).sum::<usize>(), 101);
        for pair in study.buckets.windows(2) {
            assert!(pair[0].x_max <= pair[1].x_min);
        }
        for b in &study.buckets {
            assert!(b.x_min <= b.x_max);
        }
        let grand: f64 =
            study.buckets.iter().map(|b| b.y_mean).sum::<f64>() / study.buckets.len() as f64;
        assert_abs_diff_eq!(study.grand_mean, grand, epsilon = 1e-12);
    }

    #[test]
    fn bucket_shift_moves_means_not_stds() {
        let rows = synthetic_rows(60);
        let shifted: Vec<MetricRow> = rows
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.contribution = r.contribution.map(|v| v + 5.0);
                s
            })
            .collect();
        let base = bucketize(&table(rows), Metric::Citations, Metric::Contribution, 12).unwrap();
        let moved =
            bucketize(&table(shifted), Metric::Citations, Metric::Contribution, 12).unwrap();
        for (b, m) in base.buckets.iter().zip(&moved.buckets) {
            assert_abs_diff_eq!(m.y_mean, b.y_mean + 5.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.y_std, b.y_std, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(moved.grand_mean, base.grand_mean + 5.0, epsilon = 1e-12);
    }

    #[test]
    fn bucketize_excludes_undefined_and_checks_size() {
        let mut rows = synthetic_rows(25);
        for r in rows.iter_mut().take(10) {
            r.contribution = None;
        }
        let t = table(rows);
        let study = bucketize(&t, Metric::Contribution, Metric::Citations, 5).unwrap();
        assert_eq!(study.buckets.iter().map(|b| b.size).sum::<usize>(), 15);
        assert!(matches!(
            bucketize(&t, Metric::Contribution, Metric::Citations, 16),
            Err(AnalyticsError::TooFewRows {
                rows: 15,
                buckets: 16
            })
        ));
        assert!(matches!(
            bucketize(&t, Metric::Citations, Metric::Readers, 1),
            Err(AnalyticsError::InvalidBucketCount(1))
        ));
    }

    #[test]
    fn histogram_linear_basics() {
        let spec = BinningSpec::Linear {
            min: 0.0,
            max: 4.0,
            bins: 4,
        };
        let hist = histogram(&[0.0, 1.0, 2.0, 3.0], &spec).unwrap();
        assert_eq!(hist.counts, [1, 1, 1, 1]);
        assert_eq!(hist.underflow, 0);
        assert_eq!(hist.overflow, 0);
        assert_eq!(hist.total(), 4);
        // last bin is closed, values beyond the range spill over
        let edge_cases = histogram(&[4.0, 4.1, -0.5], &spec).unwrap();
        assert_eq!(edge_cases.counts, [0, 0, 0, 1]);
        assert_eq!(edge_cases.overflow, 1);
        assert_eq!(edge_cases.underflow, 1);
    }

    #[test]
    fn histogram_out_of_range_only() {
        let spec = BinningSpec::Linear {
            min: 10.0,
            max: 20.0,
            bins: 2,
        };
        let hist = histogram(&[1.0, 2.0, 3.0], &spec).unwrap();
        assert_eq!(hist.counts, [0, 0]);
        assert_eq!(hist.underflow, 3);
        assert_eq!(hist.total(), 3);
    }

    #[test]
    fn histogram_log2_edges_double() {
        let spec = BinningSpec::Log2 {
            min: 1.0,
            max: 17.0,
            bins_per_doubling: 1,
        };
        let hist = histogram(&[1.0, 1.5, 2.0, 3.0, 9.0, 16.0, 0.0], &spec).unwrap();
        assert_eq!(hist.bin_edges, [1.0, 2.0, 4.0, 8.0, 16.0, 17.0]);
        assert_eq!(hist.counts, [2, 2, 0, 1, 1]);
        assert_eq!(hist.underflow, 1);
    }

    #[test]
    fn histogram_rejects_bad_specs() {
        for spec in [
            BinningSpec::Linear {
                min: 4.0,
                max: 4.0,
                bins: 4,
            },
            BinningSpec::Linear {
                min: 5.0,
                max: 4.0,
                bins: 4,
            },
            BinningSpec::Linear {
                min: 0.0,
                max: 4.0,
                bins: 0,
            },
            BinningSpec::Log2 {
                min: 0.5,
                max: 4.0,
                bins_per_doubling: 1,
            },
            BinningSpec::Log2 {
                min: 1.0,
                max: 4.0,
                bins_per_doubling: 0,
            },
        ] {
            assert!(histogram(&[1.0], &spec).is_err(), "accepted {spec:?}");
        }
        assert!(matches!(
            histogram::<f64>(
                &[],
                &BinningSpec::Linear {
                    min: 0.0,
                    max: 1.0,
                    bins: 2
                }
            ),
            Err(AnalyticsError::EmptyValues)
        ));
    }

    #[test]
    fn analyze_full_report_shape() {
        let t = table(synthetic_rows(120));
        let report = analyze(&t, &AnalyzeOptions::default()).unwrap();
        assert_eq!(report.correlations.len(), 3);
        assert_eq!(report.histograms.len(), 3);
        assert_eq!(report.bucket_studies.len(), 6);
        assert!(report.skipped.is_empty());
        assert_eq!(report.counts.rows_used, 120);
        assert_eq!(report.counts.defined_contribution, 120);
        for c in &report.correlations {
            assert!(c.r.abs() <= 1.0);
            assert_eq!(c.n, 120);
        }
    }

    #[test]
    fn analyze_skips_contribution_when_all_undefined() {
        let rows: Vec<MetricRow> = synthetic_rows(60)
            .into_iter()
            .map(|mut r| {
                r.contribution = None;
                r
            })
            .collect();
        let report = analyze(&table(rows), &AnalyzeOptions::default()).unwrap();
        assert_eq!(report.correlations.len(), 1);
        assert_eq!(report.correlations[0].metric_x, Metric::Citations);
        assert_eq!(report.correlations[0].metric_y, Metric::Readers);
        assert_eq!(report.histograms.len(), 2);
        assert_eq!(report.bucket_studies.len(), 2);
        assert_eq!(report.counts.undefined_contribution_excluded, 60);
        // 2 correlations + 1 histogram + 4 bucket studies involve contribution
        assert_eq!(report.skipped.len(), 7);
    }

    #[test]
    fn analyze_zero_reader_exclusion_is_table_wide() {
        let mut rows = synthetic_rows(50);
        for r in rows.iter_mut().take(10) {
            r.readers = 0;
        }
        let opts = AnalyzeOptions {
            exclude_zero_readers: true,
            bucket_count: 5,
            ..AnalyzeOptions::default()
        };
        let report = analyze(&table(rows), &opts).unwrap();
        assert_eq!(report.counts.rows_input, 50);
        assert_eq!(report.counts.zero_reader_rows_excluded, 10);
        assert_eq!(report.counts.rows_used, 40);
        for c in &report.correlations {
            assert_eq!(c.n, 40);
        }
    }

    #[test]
    fn analyze_log_transform_changes_count_correlations_only() {
        let t = table(synthetic_rows(80));
        let raw = analyze(&t, &AnalyzeOptions::default()).unwrap();
        let logged = analyze(
            &t,
            &AnalyzeOptions {
                log_transform: true,
                ..AnalyzeOptions::default()
            },
        )
        .unwrap();
        assert_ne!(raw.correlations[0].r, logged.correlations[0].r);
        // bucket studies and histograms see raw values either way
        assert_eq!(raw.bucket_studies, logged.bucket_studies);
        assert_eq!(raw.histograms, logged.histograms);
    }

    #[test]
    fn analyze_rejects_tiny_tables() {
        let t = table(synthetic_rows(10));
        assert!(matches!(
            analyze(&t, &AnalyzeOptions::default()),
            Err(AnalyticsError::TooFewRows {
                rows: 10,
                buckets: 20
            })
        ));
        let empty = table(Vec::new());
        assert!(matches!(
            analyze(&empty, &AnalyzeOptions::default()),
            Err(AnalyticsError::EmptyTable)
        ));
    }

    #[test]
    fn analyze_is_deterministic() {
        let t = table(synthetic_rows(90));
        let a = analyze(&t, &AnalyzeOptions::default()).unwrap();
        let b = analyze(&t, &AnalyzeOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn bucket_csv_layout() {
        let t = table(synthetic_rows(40));
        let study = bucketize(&t, Metric::Citations, Metric::Readers, 4).unwrap();
        let mut out = Vec::new();
        write_bucket_csv(&study, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bucket,x_min,x_max,y_mean,y_std,grand_mean");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn histogram_csv_layout() {
        let spec = BinningSpec::Linear {
            min: 0.0,
            max: 2.0,
            bins: 2,
        };
        let hist = histogram(&[0.5, 1.5, 3.0], &spec).unwrap();
        let mut out = Vec::new();
        write_histogram_csv(&hist, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin,lower,upper,count");
        assert_eq!(lines[1], "underflow,,0,0");
        assert_eq!(lines[2], "0,0,1.00000000000,1");
        assert_eq!(lines[3], "1,1.00000000000,2.00000000000,1");
        assert_eq!(lines[4], "overflow,2.00000000000,,1");
    }
}

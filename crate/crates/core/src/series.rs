//! Base domain types: time series, segments, motif sets, and the segment-level
//! statistics used by the constraint catalogue.
//!
//! Segments are 0-based inclusive intervals `[start:end]` everywhere in this
//! crate, including all file formats.

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// A time series of `n` samples, each with `dim` dimensions.
///
/// Values are stored row-major (`values[i * dim + k]` is dimension `k` of
/// sample `i`). Construction rejects NaN and infinite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    n: usize,
    dim: usize,
}

impl TimeSeries {
    /// Builds a series from row-major values.
    pub fn new(values: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSeries(format!("need at least 2 samples, got {n}")));
        }
        if dim < 1 {
            return Err(Error::InvalidSeries("dimensionality must be at least 1".into()));
        }
        if values.len() != n * dim {
            return Err(Error::InvalidSeries(format!(
                "expected {} values for {n} samples x {dim} dimensions, got {}",
                n * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at sample {}, dimension {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(TimeSeries { values, n, dim })
    }

    /// Convenience constructor for univariate series.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        TimeSeries::new(values, n, 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 2 by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `i`-th sample as a slice of `dim` values.
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Squared Euclidean distance between samples `i` and `j`.
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        let a = self.sample(i);
        let b = self.sample(j);
        let mut acc = 0.0;
        for k in 0..self.dim {
            let d = a[k] - b[k];
            acc += d * d;
        }
        acc
    }

    fn check_segment(&self, beta: Segment) -> Result<()> {
        if beta.end() >= self.n {
            return Err(Error::SegmentOutOfBounds { start: beta.start(), end: beta.end(), n: self.n });
        }
        Ok(())
    }
}

/// An inclusive interval of time indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    start: usize,
    end: usize,
}

impl Segment {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidSegment { start, end });
        }
        Ok(Segment { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // start <= end by construction
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.start <= idx && idx <= self.end
    }

    /// Number of time indices shared with `other`.
    pub fn intersection_len(&self, other: Segment) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo > hi {
            0
        } else {
            hi - lo + 1
        }
    }

    pub fn union_len(&self, other: Segment) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }

    pub fn is_subset_of(&self, other: Segment) -> bool {
        other.start <= self.start && self.end <= other.end
    }
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}:{}]", self.start, self.end)
    }
}

/// A set of motifs: the occurrences of one repeating pattern.
///
/// When produced by discovery, motifs are sorted by descending alignment
/// score and `motifs[0]` is the representative segment.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifSet {
    pub motifs: Vec<Segment>,
    pub scores: Vec<f64>,
}

impl MotifSet {
    pub fn new(motifs: Vec<Segment>, scores: Vec<f64>) -> Self {
        debug_assert_eq!(motifs.len(), scores.len());
        MotifSet { motifs, scores }
    }

    /// A motif set without scores (all zero); used for ad-hoc sets in
    /// constraint evaluation and tests.
    pub fn from_segments(motifs: Vec<Segment>) -> Self {
        let scores = vec![0.0; motifs.len()];
        MotifSet { motifs, scores }
    }

    pub fn cardinality(&self) -> usize {
        self.motifs.len()
    }

    /// The representative segment (first motif), if any.
    pub fn representative(&self) -> Option<Segment> {
        self.motifs.first().copied()
    }
}

/// Number of distinct time indices covered by the motifs of `m`.
pub fn coverage(m: &MotifSet) -> Result<usize> {
    if m.motifs.is_empty() {
        return Err(Error::EmptyMotifSet);
    }
    let mut segs: Vec<Segment> = m.motifs.clone();
    segs.sort();
    let mut total = 0usize;
    let mut cur = segs[0];
    for &s in &segs[1..] {
        if s.start() <= cur.end() + 1 && s.start() >= cur.start() {
            // overlapping or adjacent: extend
            if s.end() > cur.end() {
                cur = Segment::new(cur.start(), s.end()).expect("sorted merge");
            }
        } else if s.start() > cur.end() + 1 {
            total += cur.len();
            cur = s;
        }
    }
    total += cur.len();
    Ok(total)
}

/// Whether `beta` is nu-coincident to `beta_prime`: the shared index count
/// strictly exceeds `nu * |beta_prime|`. Note the asymmetry: the overlap is
/// normalized by the length of the *second* segment.
pub fn is_coincident(beta: Segment, beta_prime: Segment, nu: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidOverlapParameter(nu));
    }
    let overlap = beta.intersection_len(beta_prime) as f64;
    Ok(overlap > nu * beta_prime.len() as f64)
}

/// Mean sample of `x` over `beta`, one value per dimension.
fn segment_mean(x: &TimeSeries, beta: Segment) -> Vec<f64> {
    let mut mean = vec![0.0; x.dim()];
    for i in beta.start()..=beta.end() {
        let s = x.sample(i);
        for k in 0..x.dim() {
            mean[k] += s[k];
        }
    }
    let len = beta.len() as f64;
    for v in &mut mean {
        *v /= len;
    }
    mean
}

/// Standard deviation of the subsequence of `x` over `beta`.
///
/// For multivariate series this is the square root of the mean squared
/// Euclidean deviation from the segment mean, which reduces to the population
/// standard deviation when `dim == 1`.
pub fn subsequence_std(x: &TimeSeries, beta: Segment) -> Result<f64> {
    x.check_segment(beta)?;
    let mean = segment_mean(x, beta);
    let mut acc = 0.0;
    for i in beta.start()..=beta.end() {
        let s = x.sample(i);
        for k in 0..x.dim() {
            let d = s[k] - mean[k];
            acc += d * d;
        }
    }
    Ok((acc / beta.len() as f64).sqrt())
}

/// Sample skewness (biased moment ratio m3 / m2^1.5) of the univariate
/// subsequence of `x` over `beta`.
pub fn subsequence_skewness(x: &TimeSeries, beta: Segment) -> Result<f64> {
    x.check_segment(beta)?;
    if x.dim() != 1 {
        return Err(Error::MultivariateSkewness(x.dim()));
    }
    let len = beta.len() as f64;
    let mean = segment_mean(x, beta)[0];
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    for i in beta.start()..=beta.end() {
        let d = x.sample(i)[0] - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= len;
    m3 /= len;
    if m2 <= 0.0 {
        return Err(Error::DegenerateSkewness);
    }
    Ok(m3 / m2.powf(1.5))
}

/// Size of the unconstrained search space when discovering `kappa` motif sets
/// over a series of length `n`, reported as decimal digit counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSpaceSize {
    /// Digit count of `(2^((n^2+n)/2) - (n^2+n)/2 - 1)^kappa`, the exact
    /// number of ordered lists of kappa motif sets.
    pub exact_digits: usize,
    /// Digit count of `2^(kappa * n^2)`, the big-O form of the same quantity.
    pub big_o_digits: usize,
    /// True when no motif set of cardinality >= 2 exists (n = 1); the exact
    /// count is then 0 and `exact_digits` reports 1 for the single digit "0".
    pub empty: bool,
}

fn decimal_digits(v: &BigUint) -> usize {
    v.to_str_radix(10).len()
}

/// Counts the decimal digits of the exact search-space size and of its
/// `2^(kappa * n^2)` bound.
pub fn search_space_digit_count(n: u64, kappa: u32) -> SearchSpaceSize {
    assert!(n >= 1 && kappa >= 1, "n and kappa must be positive");
    let n = BigUint::from(n);
    let n_segments = (&n * &n + &n) / 2u32;
    let seg_bits: u64 = (&n_segments)
        .try_into()
        .expect("segment count exceeds u64; series far beyond supported size");
    let motif_sets = (BigUint::from(1u32) << seg_bits) - &n_segments - 1u32;
    let empty = motif_sets == BigUint::from(0u32);
    let exact = motif_sets.pow(kappa);
    let exact_digits = if empty { 1 } else { decimal_digits(&exact) };

    let bound_bits: u64 = (&n * &n * kappa)
        .try_into()
        .expect("bound exponent exceeds u64");
    let big_o = BigUint::from(1u32) << bound_bits;
    SearchSpaceSize { exact_digits, big_o_digits: decimal_digits(&big_o), empty }
}

//! Local-concurrence extraction: builds a self-similarity structure over the
//! series and pulls out the set of local warping paths that relate similar
//! segments to each other.
//!
//! A cumulative matrix accumulates similarity in excess of a strictness
//! threshold; paths are read off by repeated best-first traceback with
//! corridor masking, Smith-Waterman style. Only the upper triangle is
//! computed; every kept path is mirrored to the lower triangle, and the
//! identity self-path is always present.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{Segment, TimeSeries};

/// Parameters of the path-extraction step.
#[derive(Debug, Clone)]
pub struct LocoParams {
    /// Strictness in [0, 1]: how similar two segments must be to be related
    /// by a path.
    pub rho: f64,
    /// Whether nondiagonal (time-warping) steps are allowed.
    pub warping: bool,
    /// Minimum path length in cells; also the half-width of the excluded
    /// band around the main diagonal.
    pub l_min_path: usize,
    /// Bandwidth of the similarity kernel `exp(-gamma * ||x_i - x_j||^2)`.
    pub gamma: f64,
    /// Penalty for each nondiagonal step; `None` defaults to
    /// `max(0, 0.5 * (1 - tau))` where `tau` is the strictness threshold.
    pub delta_penalty: Option<f64>,
}

impl Default for LocoParams {
    fn default() -> Self {
        LocoParams { rho: 0.5, warping: true, l_min_path: 5, gamma: 1.0, delta_penalty: None }
    }
}

impl LocoParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParam(format!("rho must lie in [0, 1], got {}", self.rho)));
        }
        if self.l_min_path < 2 {
            return Err(Error::InvalidParam(format!(
                "l_min_path must be at least 2, got {}",
                self.l_min_path
            )));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidGamma(self.gamma));
        }
        if let Some(d) = self.delta_penalty {
            if d < 0.0 {
                return Err(Error::InvalidParam(format!("delta_penalty must be >= 0, got {d}")));
            }
        }
        Ok(())
    }
}

/// Dense symmetric matrix of pairwise sample similarities in (0, 1].
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Computes `S[i][j] = exp(-gamma * ||x_i - x_j||^2)`.
pub fn self_similarity(x: &TimeSeries, gamma: f64) -> Result<SimilarityMatrix> {
    if gamma <= 0.0 {
        return Err(Error::InvalidGamma(gamma));
    }
    let n = x.len();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (-gamma * x.sq_dist(i, j)).exp();
        }
    });
    Ok(SimilarityMatrix { n, data })
}

/// The strictness threshold: linear interpolation between the smallest and
/// largest off-diagonal entries of `s`, `tau = lo + rho * (hi - lo)`.
///
/// rho = 0 admits every entry, rho = 1 only the single most similar pair,
/// and a constant series (all entries 1) yields tau = 1 for any rho. The
/// interpolation runs over the similarity range rather than its quantiles:
/// on aperiodic data almost all similarities pile up near zero, which would
/// pin any mid-range quantile to ~0 and flood path extraction with
/// meaningless near-zero-score paths.
pub fn strictness_threshold(s: &SimilarityMatrix, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParam(format!("rho must lie in [0, 1], got {rho}")));
    }
    let n = s.n;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = s.get(i, j);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    Ok(lo + rho * (hi - lo))
}

/// A monotone alignment between two similar segments of the same series.
///
/// `pairs` ascend with steps (1,1), and additionally (1,0)/(0,1) when warping
/// is enabled; both axis projections are contiguous index intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingPath {
    pairs: Vec<(u32, u32)>,
    /// Prefix sums of per-cell similarities; `sim_prefix[k]` is the sum over
    /// the first `k` cells, so the total score is the last entry.
    sim_prefix: Vec<f64>,
}

impl WarpingPath {
    /// Builds a path from cell coordinates and their similarities.
    pub fn new(pairs: Vec<(u32, u32)>, sims: &[f64]) -> Self {
        debug_assert_eq!(pairs.len(), sims.len());
        debug_assert!(!pairs.is_empty());
        let mut sim_prefix = Vec::with_capacity(sims.len() + 1);
        sim_prefix.push(0.0);
        let mut acc = 0.0;
        for &v in sims {
            acc += v;
            sim_prefix.push(acc);
        }
        WarpingPath { pairs, sim_prefix }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one cell by construction
    }

    /// Accumulated similarity over all cells.
    pub fn score(&self) -> f64 {
        *self.sim_prefix.last().unwrap()
    }

    /// Inclusive row range (projection onto the first axis).
    pub fn row_span(&self) -> (usize, usize) {
        (self.pairs[0].0 as usize, self.pairs[self.pairs.len() - 1].0 as usize)
    }

    /// The same path with both axes swapped.
    pub fn mirrored(&self) -> WarpingPath {
        let pairs = self.pairs.iter().map(|&(i, j)| (j, i)).collect();
        WarpingPath { pairs, sim_prefix: self.sim_prefix.clone() }
    }

    /// True when this is the identity path {(i, i)}.
    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|&(i, j)| i == j)
    }
}

/// A subpath projection: the segment induced on the column axis by
/// restricting a path to the rows of a representative segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub segment: Segment,
    /// Sum of similarities over the subpath cells.
    pub subscore: f64,
    /// Number of cells in the subpath.
    pub cells: usize,
}

/// Restricts `p` to the rows of `alpha` and projects onto the column axis.
/// Returns `None` unless the path's row projection fully covers `alpha`.
pub fn project_path(p: &WarpingPath, alpha: Segment) -> Option<Projection> {
    let (r0, r1) = p.row_span();
    if r0 > alpha.start() || r1 < alpha.end() {
        return None;
    }
    let b = alpha.start() as u32;
    let e = alpha.end() as u32;
    // rows are nondecreasing along the path
    let lo = p.pairs.partition_point(|&(i, _)| i < b);
    let hi = p.pairs.partition_point(|&(i, _)| i <= e);
    debug_assert!(lo < hi);
    let seg = Segment::new(p.pairs[lo].1 as usize, p.pairs[hi - 1].1 as usize)
        .expect("columns are nondecreasing along a path");
    let subscore = p.sim_prefix[hi] - p.sim_prefix[lo];
    Some(Projection { segment: seg, subscore, cells: hi - lo })
}

const DIR_START: u8 = 0;
const DIR_DIAG: u8 = 1;
const DIR_UP: u8 = 2;
const DIR_LEFT: u8 = 3;

struct Cumulative {
    n: usize,
    l: Vec<f64>,
    dir: Vec<u8>,
    row_max: Vec<f64>,
}

impl Cumulative {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    fn build(s: &SimilarityMatrix, tau: f64, delta: f64, warping: bool, band: usize) -> Self {
        let n = s.n();
        let mut l = vec![0.0; n * n];
        let mut dir = vec![DIR_START; n * n];
        for i in 0..n {
            for j in (i + band)..n {
                let gain = s.get(i, j) - tau;
                let mut best = 0.0;
                let mut d = DIR_START;
                if i >= 1 && j >= 1 {
                    let v = l[(i - 1) * n + (j - 1)];
                    if v > best {
                        best = v;
                        d = DIR_DIAG;
                    }
                }
                if warping {
                    if i >= 1 {
                        let v = l[(i - 1) * n + j] - delta;
                        if v > best {
                            best = v;
                            d = DIR_UP;
                        }
                    }
                    if j >= 1 && j > i + band {
                        let v = l[i * n + (j - 1)] - delta;
                        if v > best {
                            best = v;
                            d = DIR_LEFT;
                        }
                    }
                }
                let v = best + gain;
                if v > 0.0 {
                    l[i * n + j] = v;
                    dir[i * n + j] = d;
                }
            }
        }
        let mut cum = Cumulative { n, l, dir, row_max: vec![0.0; n] };
        for i in 0..n {
            cum.refresh_row_max(i);
        }
        cum
    }

    fn refresh_row_max(&mut self, i: usize) {
        let row = &self.l[i * self.n..(i + 1) * self.n];
        self.row_max[i] = row.iter().cloned().fold(0.0, f64::max);
    }

    /// Position of the global maximum, smallest (i, j) in row-major order on
    /// ties. `None` when the matrix is all zero.
    fn argmax(&self) -> Option<(usize, usize)> {
        let mut best = 0.0;
        let mut best_row = None;
        for (i, &m) in self.row_max.iter().enumerate() {
            if m > best {
                best = m;
                best_row = Some(i);
            }
        }
        let i = best_row?;
        let row = &self.l[i * self.n..(i + 1) * self.n];
        let j = row.iter().position(|&v| v == best).expect("row max present");
        Some((i, j))
    }

    /// Walks back from `(i, j)` to the first zero cell; returns the cells of
    /// the path in ascending order.
    fn traceback(&self, mut i: usize, mut j: usize) -> Vec<(u32, u32)> {
        let mut cells = Vec::new();
        loop {
            cells.push((i as u32, j as u32));
            let (pi, pj) = match self.dir[i * self.n + j] {
                DIR_DIAG => (i - 1, j - 1),
                DIR_UP => (i - 1, j),
                DIR_LEFT => (i, j - 1),
                _ => break,
            };
            if self.get(pi, pj) == 0.0 {
                break;
            }
            i = pi;
            j = pj;
        }
        cells.reverse();
        cells
    }

    /// Zeroes a corridor of half-width 1 around every cell of `cells`.
    fn mask_corridor(&mut self, cells: &[(u32, u32)]) {
        let n = self.n;
        let mut touched_lo = usize::MAX;
        let mut touched_hi = 0;
        for &(ci, cj) in cells {
            let (ci, cj) = (ci as usize, cj as usize);
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let i = ci as i64 + di;
                    let j = cj as i64 + dj;
                    if i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && j >= i {
                        self.l[i as usize * n + j as usize] = 0.0;
                        touched_lo = touched_lo.min(i as usize);
                        touched_hi = touched_hi.max(i as usize);
                    }
                }
            }
        }
        if touched_lo != usize::MAX {
            for i in touched_lo..=touched_hi {
                self.refresh_row_max(i);
            }
        }
    }
}

/// Extracts the set of local warping paths of `x`.
///
/// The identity self-path comes first; every other kept path appears together
/// with its mirror image on the lower triangle. Extraction is deterministic:
/// ties in the running maximum break toward the smallest (i, j) in row-major
/// order.
pub fn compute_local_warping_paths(x: &TimeSeries, params: &LocoParams) -> Result<Vec<WarpingPath>> {
    params.validate()?;
    let s = self_similarity(x, params.gamma)?;
    let tau = strictness_threshold(&s, params.rho)?;
    let delta = params.delta_penalty.unwrap_or_else(|| (0.5 * (1.0 - tau)).max(0.0));
    let n = x.len();

    let mut paths = Vec::new();
    // identity self-path: every sample relates to itself with similarity 1
    let self_pairs: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, i)).collect();
    let self_sims = vec![1.0; n];
    paths.push(WarpingPath::new(self_pairs, &self_sims));

    // cells with a lag below l_min_path are trivial self-overlap matches and
    // stay excluded from the cumulative matrix
    let mut cum = Cumulative::build(&s, tau, delta, params.warping, params.l_min_path);

    while let Some((i, j)) = cum.argmax() {
        let cells = cum.traceback(i, j);
        let keep = cells.len() >= params.l_min_path;
        cum.mask_corridor(&cells);
        if keep {
            let sims: Vec<f64> =
                cells.iter().map(|&(a, b)| s.get(a as usize, b as usize)).collect();
            let path = WarpingPath::new(cells, &sims);
            let mirror = path.mirrored();
            paths.push(path);
            paths.push(mirror);
        }
    }
    Ok(paths)
}

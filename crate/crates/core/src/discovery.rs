//! Greedy discovery of multiple constrained motif sets: scan all admissible
//! representative segments, generate and filter candidate motif sets, score
//! the survivors by fitness times desirability, and repeatedly commit the
//! best one while folding pairwise constraints into the remaining searches.

use rayon::prelude::*;

use crate::candidates::{fitness, generate_candidate_motif_set, CandidateMotifSet};
use crate::constraints::{
    fold_pairwise, DesirabilityFn, HardConstraintBundle, MotifPairPredicate, MotifPredicate,
    PairwiseConstraint,
};
use crate::error::Result;
use crate::loco::{compute_local_warping_paths, LocoParams, WarpingPath};
use crate::series::{MotifSet, Segment, TimeSeries};

/// Full configuration of a discovery run.
#[derive(Debug, Clone)]
pub struct DiscoveryConfig {
    /// Maximum number of motif sets to discover.
    pub kappa: usize,
    pub loco: LocoParams,
    /// Stride of the representative grid; 1 tries every (b, e).
    pub stride: usize,
    pub bundles: Vec<HardConstraintBundle>,
    pub desirabilities: Vec<DesirabilityFn>,
    pub pairwise: Vec<PairwiseConstraint>,
    /// All indices share identical constraints, so one search per iteration
    /// serves them all.
    pub same_for_all: bool,
}

impl DiscoveryConfig {
    /// An unconstrained configuration (only useful as a starting point).
    pub fn unconstrained(kappa: usize, loco: LocoParams) -> Self {
        DiscoveryConfig {
            kappa,
            loco,
            stride: 1,
            bundles: vec![HardConstraintBundle::permissive(); kappa],
            desirabilities: vec![DesirabilityFn::constant_one(); kappa],
            pairwise: Vec::new(),
            same_for_all: true,
        }
    }

    fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.kappa == 0 {
            return Err(Error::InvalidParam("kappa must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParam("stride must be at least 1".into()));
        }
        if self.bundles.len() != self.kappa || self.desirabilities.len() != self.kappa {
            return Err(Error::InvalidParam(format!(
                "expected {} bundles and desirabilities, got {} and {}",
                self.kappa,
                self.bundles.len(),
                self.desirabilities.len()
            )));
        }
        for pc in &self.pairwise {
            if pc.i >= self.kappa || pc.j >= self.kappa || pc.i == pc.j {
                return Err(Error::InvalidParam(format!(
                    "pairwise constraint indices ({}, {}) invalid for kappa = {}",
                    pc.i, pc.j, self.kappa
                )));
            }
        }
        Ok(())
    }
}

/// A motif set committed by discovery, with its scores at selection time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveredSet {
    pub motif_set: MotifSet,
    pub fitness: f64,
    pub desirability: f64,
    pub weighted_quality: f64,
}

impl DiscoveredSet {
    pub fn representative(&self) -> Segment {
        self.motif_set.motifs[0]
    }
}

/// Search statistics for one greedy iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IterationTrace {
    /// Index committed this iteration, if any.
    pub selected: Option<usize>,
    /// Representatives whose candidate was generated and evaluated.
    pub evaluated: u64,
    /// Representatives rejected before generation (h_mot or h_mot_repr).
    pub rejected_representative: u64,
    /// Candidates rejected after filtering left fewer than two motifs.
    pub rejected_filtered: u64,
    /// Candidates rejected by whole-set constraints.
    pub rejected_set_constraint: u64,
    /// Candidates rejected for zero weighted quality.
    pub rejected_zero_quality: u64,
}

/// Result of a discovery run: one optional motif set per index plus the
/// per-iteration trace.
#[derive(Debug, Clone)]
pub struct DiscoveryResult {
    pub motif_sets: Vec<Option<DiscoveredSet>>,
    pub trace: Vec<IterationTrace>,
}

/// Greedy pass of the candidate filter: motifs are taken in their similarity
/// order and appended while the cardinality cap, the per-motif predicate, and
/// the within-pair predicate against all already-kept motifs hold.
pub fn filter_candidate_motif_set(
    c: &CandidateMotifSet,
    h_mot: &dyn Fn(Segment) -> bool,
    h_mots_same: &dyn Fn(Segment, Segment) -> bool,
    k_max_discard: Option<usize>,
) -> CandidateMotifSet {
    let cap = k_max_discard.unwrap_or(usize::MAX);
    let mut motifs = Vec::new();
    let mut subscores = Vec::new();
    let mut cells = Vec::new();
    for ((&beta, &sub), &cell) in c.motifs.iter().zip(&c.subscores).zip(&c.cells) {
        if motifs.len() < cap && h_mot(beta) && motifs.iter().all(|&prev| h_mots_same(beta, prev)) {
            motifs.push(beta);
            subscores.push(sub);
            cells.push(cell);
        }
    }
    CandidateMotifSet { motifs, subscores, cells }
}

fn filter_with_bundle(c: &CandidateMotifSet, bundle: &HardConstraintBundle) -> CandidateMotifSet {
    filter_candidate_motif_set(
        c,
        &|beta| bundle.motif_ok(beta),
        &|beta, prev| bundle.pair_ok(beta, prev),
        bundle.k_max_discard(),
    )
}

/// The best admissible candidate found by a grid search, with counters.
#[derive(Debug, Clone)]
pub struct BestSearch {
    pub best: Option<DiscoveredSet>,
    pub trace: IterationTrace,
}

struct ScanHit {
    quality: f64,
    b: usize,
    e: usize,
    set: DiscoveredSet,
}

/// True when `a` beats `b` under the deterministic ordering: larger weighted
/// quality, then smaller b, then smaller e.
fn better(a: &ScanHit, b: &ScanHit) -> bool {
    if a.quality != b.quality {
        return a.quality > b.quality;
    }
    (a.b, a.e) < (b.b, b.e)
}

/// Scans every representative segment `[b:e]` with `|alpha| >= l_min_path`
/// (strided by `stride`), generates and filters its candidate motif set, and
/// returns the admissible candidate with the highest fitness times
/// desirability. Deterministic regardless of thread count.
pub fn find_best_admissible_motif_set(
    bundle: &HardConstraintBundle,
    desirability: &DesirabilityFn,
    paths: &[WarpingPath],
    n: usize,
    l_min_path: usize,
    stride: usize,
) -> BestSearch {
    let starts: Vec<usize> = (0..n).step_by(stride).collect();
    let (hit, trace) = starts
        .par_iter()
        .map(|&b| {
            let mut local_best: Option<ScanHit> = None;
            let mut tr = IterationTrace::default();
            let mut e = b + l_min_path - 1;
            while e < n {
                let alpha = Segment::new(b, e).expect("b <= e");
                scan_representative(alpha, bundle, desirability, paths, n, &mut local_best, &mut tr);
                e += stride;
            }
            (local_best, tr)
        })
        .reduce(
            || (None, IterationTrace::default()),
            |(a, ta), (b, tb)| {
                let merged = match (a, b) {
                    (Some(x), Some(y)) => Some(if better(&x, &y) { x } else { y }),
                    (x, None) => x,
                    (None, y) => y,
                };
                let t = IterationTrace {
                    selected: None,
                    evaluated: ta.evaluated + tb.evaluated,
                    rejected_representative: ta.rejected_representative + tb.rejected_representative,
                    rejected_filtered: ta.rejected_filtered + tb.rejected_filtered,
                    rejected_set_constraint: ta.rejected_set_constraint + tb.rejected_set_constraint,
                    rejected_zero_quality: ta.rejected_zero_quality + tb.rejected_zero_quality,
                };
                (merged, t)
            },
        );
    BestSearch { best: hit.map(|h| h.set), trace }
}

fn scan_representative(
    alpha: Segment,
    bundle: &HardConstraintBundle,
    desirability: &DesirabilityFn,
    paths: &[WarpingPath],
    n: usize,
    local_best: &mut Option<ScanHit>,
    tr: &mut IterationTrace,
) {
    // the representative is itself a motif; it must pass both checks
    if !(bundle.motif_ok(alpha) && bundle.representative_ok(alpha)) {
        tr.rejected_representative += 1;
        return;
    }
    let candidate = generate_candidate_motif_set(alpha, paths);
    let filtered = filter_with_bundle(&candidate, bundle);
    tr.evaluated += 1;
    if filtered.cardinality() < 2 {
        tr.rejected_filtered += 1;
        return;
    }
    let as_set = filtered.to_motif_set();
    if !bundle.whole_set_ok(&as_set) {
        tr.rejected_set_constraint += 1;
        return;
    }
    let phi = fitness(&filtered, n).expect("cardinality checked above");
    let d = desirability.eval(&as_set);
    let quality = phi * d;
    if quality <= 0.0 {
        tr.rejected_zero_quality += 1;
        return;
    }
    let hit = ScanHit {
        quality,
        b: alpha.start(),
        e: alpha.end(),
        set: DiscoveredSet { motif_set: as_set, fitness: phi, desirability: d, weighted_quality: quality },
    };
    if local_best.as_ref().is_none_or(|cur| better(&hit, cur)) {
        *local_best = Some(hit);
    }
}

/// Runs the full greedy loop: extract paths once, then repeatedly find the
/// best admissible motif set among the undiscovered indices, commit it, and
/// fold the pairwise constraints it participates in into the remaining
/// bundles.
pub fn discover(x: &TimeSeries, config: &DiscoveryConfig) -> Result<DiscoveryResult> {
    config.validate()?;
    let paths = compute_local_warping_paths(x, &config.loco)?;
    discover_with_paths(x, config, &paths)
}

/// Same as [`discover`] but reuses precomputed paths.
pub fn discover_with_paths(
    x: &TimeSeries,
    config: &DiscoveryConfig,
    paths: &[WarpingPath],
) -> Result<DiscoveryResult> {
    config.validate()?;
    let n = x.len();
    let kappa = config.kappa;
    let mut bundles = config.bundles.clone();
    let mut pending: Vec<usize> = (0..kappa).collect();
    let mut motif_sets: Vec<Option<DiscoveredSet>> = vec![None; kappa];
    let mut trace = Vec::new();

    // with identical constraints everywhere, one search per iteration serves
    // every pending index
    let uniform = config.same_for_all;

    while !pending.is_empty() {
        let mut best: Option<(usize, DiscoveredSet)> = None;
        let mut iter_trace = IterationTrace::default();

        if uniform {
            let i = pending[0];
            let search = find_best_admissible_motif_set(
                &bundles[i],
                &config.desirabilities[i],
                paths,
                n,
                config.loco.l_min_path,
                config.stride,
            );
            accumulate(&mut iter_trace, &search.trace);
            best = search.best.map(|s| (i, s));
        } else {
            for &i in &pending {
                let search = find_best_admissible_motif_set(
                    &bundles[i],
                    &config.desirabilities[i],
                    paths,
                    n,
                    config.loco.l_min_path,
                    config.stride,
                );
                accumulate(&mut iter_trace, &search.trace);
                if let Some(s) = search.best {
                    // pending ascends, so on quality ties the smaller index wins
                    let replace = best
                        .as_ref()
                        .is_none_or(|(_, cur)| s.weighted_quality > cur.weighted_quality);
                    if replace {
                        best = Some((i, s));
                    }
                }
            }
        }

        let Some((i_star, set)) = best else {
            trace.push(iter_trace);
            break;
        };
        iter_trace.selected = Some(i_star);
        trace.push(iter_trace);

        pending.retain(|&i| i != i_star);
        for &j in &pending {
            bundles[j] = fold_pairwise(&bundles[j], &config.pairwise, j, i_star, &set.motif_set);
        }
        motif_sets[i_star] = Some(set);
    }

    Ok(DiscoveryResult { motif_sets, trace })
}

fn accumulate(into: &mut IterationTrace, from: &IterationTrace) {
    into.evaluated += from.evaluated;
    into.rejected_representative += from.rejected_representative;
    into.rejected_filtered += from.rejected_filtered;
    into.rejected_set_constraint += from.rejected_set_constraint;
    into.rejected_zero_quality += from.rejected_zero_quality;
}

/// Convenience wrapper for tests and bindings: builds per-index closures from
/// plain functions.
pub fn motif_predicate(f: impl Fn(Segment) -> bool + Send + Sync + 'static) -> MotifPredicate {
    std::sync::Arc::new(f)
}

pub fn pair_predicate(
    f: impl Fn(Segment, Segment) -> bool + Send + Sync + 'static,
) -> MotifPairPredicate {
    std::sync::Arc::new(f)
}

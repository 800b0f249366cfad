//! Ground-truth evaluation: match discovered motif sets to labeled GT groups
//! and score them with precision, recall, and F1, plus derivation of
//! benchmark-style constraints from ground truth.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{AppliesTo, ConstraintKind, ConstraintSpec, Mask, Mode};
use crate::error::{Error, Result};
use crate::series::{MotifSet, Segment};

/// Labeled ground-truth motif groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub groups: Vec<GtGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtGroup {
    pub label: String,
    pub motifs: Vec<Segment>,
}

impl GroundTruth {
    pub fn new(groups: Vec<GtGroup>) -> Result<Self> {
        if groups.is_empty() || groups.iter().any(|g| g.motifs.is_empty()) {
            return Err(Error::EmptyGroundTruth);
        }
        Ok(GroundTruth { groups })
    }

    pub fn total_motifs(&self) -> usize {
        self.groups.iter().map(|g| g.motifs.len()).sum()
    }
}

/// Evaluation scores and the per-set assignment that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// For each discovered set, the label of the GT group it was assigned to.
    pub per_set_assignment: Vec<Option<String>>,
    /// Discovered indices excluded from precision (only populated when
    /// falsely-discovered sets are ignored).
    pub ignored_sets: Vec<usize>,
}

/// Whether two segments match: Jaccard similarity of their index sets at or
/// above `threshold`.
pub fn match_motif(beta: Segment, beta_gt: Segment, threshold: f64) -> bool {
    jaccard(beta, beta_gt) >= threshold
}

fn jaccard(a: Segment, b: Segment) -> f64 {
    a.intersection_len(b) as f64 / a.union_len(b) as f64
}

/// Greedy one-to-one motif matching between a discovered set and a GT group:
/// pairs in descending Jaccard order (ties by index), each motif used once,
/// counting pairs at or above the threshold.
fn pair_match_count(d: &MotifSet, g: &GtGroup, threshold: f64) -> usize {
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &dm) in d.motifs.iter().enumerate() {
        for (j, &gm) in g.motifs.iter().enumerate() {
            let jac = jaccard(dm, gm);
            if jac >= threshold {
                edges.push((jac, i, j));
            }
        }
    }
    edges.sort_by(|a, b| {
        b.0.partial_cmp(&a.0).expect("finite jaccard").then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
    });
    let mut used_d = vec![false; d.motifs.len()];
    let mut used_g = vec![false; g.motifs.len()];
    let mut matched = 0;
    for (_, i, j) in edges {
        if !used_d[i] && !used_g[j] {
            used_d[i] = true;
            used_g[j] = true;
            matched += 1;
        }
    }
    matched
}

/// Maximum-weight one-to-one assignment of discovered sets to GT groups.
/// Exhaustive (bitmask DP over GT groups) when there are at most 8 groups,
/// greedy otherwise. Returns `assignment[d] = Some(g)`.
#[allow(clippy::needless_range_loop)]
fn assign(weights: &[Vec<f64>], n_groups: usize) -> Vec<Option<usize>> {
    let n_d = weights.len();
    if n_groups <= 8 {
        // dp over discovered sets with a bitmask of used groups
        let full = 1usize << n_groups;
        let neg = f64::NEG_INFINITY;
        let mut dp = vec![vec![neg; full]; n_d + 1];
        let mut choice = vec![vec![usize::MAX; full]; n_d + 1];
        dp[0][0] = 0.0;
        for d in 0..n_d {
            for mask in 0..full {
                let cur = dp[d][mask];
                if cur == neg {
                    continue;
                }
                // leave set d unassigned
                if cur > dp[d + 1][mask] {
                    dp[d + 1][mask] = cur;
                    choice[d + 1][mask] = usize::MAX;
                }
                for g in 0..n_groups {
                    if mask & (1 << g) != 0 || weights[d][g] <= 0.0 {
                        continue;
                    }
                    let next = mask | (1 << g);
                    let v = cur + weights[d][g];
                    if v > dp[d + 1][next] {
                        dp[d + 1][next] = v;
                        choice[d + 1][next] = g;
                    }
                }
            }
        }
        let (mut best_mask, mut best_v) = (0usize, neg);
        for mask in 0..full {
            if dp[n_d][mask] > best_v {
                best_v = dp[n_d][mask];
                best_mask = mask;
            }
        }
        let mut out = vec![None; n_d];
        let mut mask = best_mask;
        for d in (0..n_d).rev() {
            let g = choice[d + 1][mask];
            if g != usize::MAX {
                out[d] = Some(g);
                mask &= !(1 << g);
            }
        }
        out
    } else {
        let mut edges: Vec<(f64, usize, usize)> = Vec::new();
        for (d, row) in weights.iter().enumerate() {
            for (g, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    edges.push((w, d, g));
                }
            }
        }
        edges.sort_by(|a, b| {
            b.0.partial_cmp(&a.0).expect("finite weight").then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
        });
        let mut out = vec![None; n_d];
        let mut used_g = vec![false; n_groups];
        for (_, d, g) in edges {
            if out[d].is_none() && !used_g[g] {
                out[d] = Some(g);
                used_g[g] = true;
            }
        }
        out
    }
}

/// Scores discovered motif sets against ground truth.
///
/// Discovered sets are assigned one-to-one to GT groups by maximizing the
/// total pairwise F1 of the within-pair motif matchings. Precision counts
/// matched discovered motifs over all discovered motifs (excluding unassigned
/// sets when `ignore_unmatched_sets`); recall counts matched GT motifs over
/// all GT motifs.
pub fn evaluate(
    discovered: &[MotifSet],
    gt: &GroundTruth,
    ignore_unmatched_sets: bool,
    threshold: f64,
) -> Result<EvalReport> {
    if gt.groups.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let n_d = discovered.len();
    let n_g = gt.groups.len();

    let mut matches = vec![vec![0usize; n_g]; n_d];
    let mut weights = vec![vec![0.0f64; n_g]; n_d];
    for (d, dset) in discovered.iter().enumerate() {
        for (g, group) in gt.groups.iter().enumerate() {
            let m = pair_match_count(dset, group, threshold);
            matches[d][g] = m;
            // pair F1 = 2m / (|d| + |g|)
            if m > 0 {
                weights[d][g] = 2.0 * m as f64 / (dset.motifs.len() + group.motifs.len()) as f64;
            }
        }
    }

    let assignment = assign(&weights, n_g);

    let mut matched_total = 0usize;
    let mut ignored_sets = Vec::new();
    let mut discovered_total = 0usize;
    for (d, dset) in discovered.iter().enumerate() {
        match assignment[d] {
            Some(g) => {
                matched_total += matches[d][g];
                discovered_total += dset.motifs.len();
            }
            None => {
                if ignore_unmatched_sets {
                    ignored_sets.push(d);
                } else {
                    discovered_total += dset.motifs.len();
                }
            }
        }
    }

    let gt_total = gt.total_motifs();
    let precision =
        if discovered_total == 0 { 0.0 } else { matched_total as f64 / discovered_total as f64 };
    let recall = if gt_total == 0 { 0.0 } else { matched_total as f64 / gt_total as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let per_set_assignment = assignment
        .iter()
        .map(|a| a.map(|g| gt.groups[g].label.clone()))
        .collect();

    Ok(EvalReport { precision, recall, f1, per_set_assignment, ignored_sets })
}

fn avg_len(motifs: &[Segment]) -> f64 {
    motifs.iter().map(|m| m.len() as f64).sum::<f64>() / motifs.len() as f64
}

fn window_mask(n: usize, points: impl Iterator<Item = usize>, half_width: usize) -> Mask {
    let mut values = vec![0.0; n];
    for p in points {
        let lo = p.saturating_sub(half_width);
        let hi = (p + half_width).min(n - 1);
        for v in &mut values[lo..=hi] {
            *v = 1.0;
        }
    }
    Mask::new(values).expect("binary mask")
}

/// Trapezoidal soft mask: 1 inside each motif, with linear transitions of
/// width `w` centered at the original boundaries; overlapping motifs combine
/// by maximum.
fn trapezoid_mask(n: usize, motifs: &[Segment], w: f64) -> Mask {
    let mut values = vec![0.0; n];
    for (i, v) in values.iter_mut().enumerate() {
        let t = i as f64;
        let mut best: f64 = 0.0;
        for m in motifs {
            let rise = if w > 0.0 { (t - (m.start() as f64 - w / 2.0)) / w } else { 1.0 };
            let fall = if w > 0.0 { ((m.end() as f64 + w / 2.0) - t) / w } else { 1.0 };
            best = best.max(rise.min(fall).clamp(0.0, 1.0));
        }
        *v = best;
    }
    Mask::new(values).expect("values clamped to [0, 1]")
}

/// Derives per-GT-set constraint specs in the style of the benchmark
/// experiments. `which` names the constraint; the positive-region variants
/// pick a random GT motif using `seed`.
pub fn derive_benchmark_constraints(
    gt: &GroundTruth,
    which: &str,
    n: usize,
    seed: u64,
) -> Result<Vec<ConstraintSpec>> {
    let mut specs = Vec::new();
    match which {
        "exact_cardinality" => {
            for (i, g) in gt.groups.iter().enumerate() {
                specs.push(ConstraintSpec::hard(
                    ConstraintKind::ExactCardinality { k: g.motifs.len() },
                    AppliesTo::Index(i),
                ));
            }
        }
        "max_cardinality" => {
            for (i, g) in gt.groups.iter().enumerate() {
                specs.push(ConstraintSpec::hard(
                    ConstraintKind::MaxCardinalityDiscard { k_max: g.motifs.len() },
                    AppliesTo::Index(i),
                ));
            }
        }
        "start_end_points" => {
            for (i, g) in gt.groups.iter().enumerate() {
                let delta_l = (avg_len(&g.motifs) / 4.0).round() as usize;
                let begin = window_mask(n, g.motifs.iter().map(|m| m.start()), delta_l);
                let end = window_mask(n, g.motifs.iter().map(|m| m.end()), delta_l);
                specs.push(ConstraintSpec::hard(
                    ConstraintKind::StartEndPoints { begin, end },
                    AppliesTo::Index(i),
                ));
            }
        }
        "non_consecutive" => {
            // half the average gap between consecutive motifs, pooled
            let mut all: Vec<Segment> = gt.groups.iter().flat_map(|g| g.motifs.clone()).collect();
            all.sort();
            let mut gaps = Vec::new();
            for w in all.windows(2) {
                gaps.push(w[1].start().saturating_sub(w[0].end() + 1));
            }
            let avg_gap =
                if gaps.is_empty() { 0.0 } else { gaps.iter().sum::<usize>() as f64 / gaps.len() as f64 };
            let l_buffer = (avg_gap / 2.0).round() as usize;
            let kappa = gt.groups.len();
            for i in 0..kappa {
                specs.push(ConstraintSpec::hard(
                    ConstraintKind::NonConsecutive { l_buffer },
                    AppliesTo::Index(i),
                ));
                for j in 0..kappa {
                    if i != j {
                        specs.push(ConstraintSpec::hard(
                            ConstraintKind::NonConsecutive { l_buffer },
                            AppliesTo::Pair(i, j),
                        ));
                    }
                }
            }
        }
        "positive_region" | "positive_region_soft" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (i, g) in gt.groups.iter().enumerate() {
                let m = g.motifs[rng.random_range(0..g.motifs.len())];
                let half = m.len() / 2;
                let theta = Segment::new(
                    m.start().saturating_sub(half),
                    (m.end() + half).min(n - 1),
                )
                .expect("start <= end");
                let kind = if which == "positive_region" {
                    ConstraintKind::PositiveRegionHard { theta }
                } else {
                    ConstraintKind::PositiveRegionSoft { theta }
                };
                let mode = if which == "positive_region" { Mode::Hard } else { Mode::Soft };
                specs.push(ConstraintSpec::new(kind, mode, AppliesTo::Index(i)));
            }
        }
        "length" => {
            for (i, g) in gt.groups.iter().enumerate() {
                let l_min = g.motifs.iter().map(Segment::len).min().unwrap();
                let l_max = g.motifs.iter().map(Segment::len).max().unwrap();
                specs.push(ConstraintSpec::hard(
                    ConstraintKind::LengthRange { l_min, l_max, rho_decay: None },
                    AppliesTo::Index(i),
                ));
            }
        }
        "cardinality_soft" => {
            for (i, g) in gt.groups.iter().enumerate() {
                specs.push(ConstraintSpec::soft(
                    ConstraintKind::CardinalitySoft { k: g.motifs.len(), rho_decay: 0.5 },
                    AppliesTo::Index(i),
                ));
            }
        }
        "soft_mask" => {
            for (i, g) in gt.groups.iter().enumerate() {
                let w = avg_len(&g.motifs) / 2.0;
                let mask = trapezoid_mask(n, &g.motifs, w);
                specs.push(ConstraintSpec::soft(
                    ConstraintKind::SoftMask { mask },
                    AppliesTo::Index(i),
                ));
            }
        }
        "length_soft" => {
            for (i, g) in gt.groups.iter().enumerate() {
                let l_min = g.motifs.iter().map(Segment::len).min().unwrap();
                let l_max = g.motifs.iter().map(Segment::len).max().unwrap();
                specs.push(ConstraintSpec::soft(
                    ConstraintKind::LengthSoft { l_min, l_max },
                    AppliesTo::Index(i),
                ));
            }
        }
        other => {
            return Err(Error::config(
                "derive_benchmark_constraints",
                format!("unknown benchmark constraint \"{other}\""),
            ))
        }
    }
    Ok(specs)
}

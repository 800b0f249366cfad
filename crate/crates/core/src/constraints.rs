//! The constraint framework: hard-constraint bundles in five categories,
//! desirability functions for soft constraints, the declarative constraint
//! catalogue, pairwise constraint folding, and mask construction helpers.
//!
//! Built predicates are total: degenerate inputs (a constant segment where a
//! statistic is undefined, an out-of-range index) evaluate to false or to
//! desirability 0 instead of erroring, so discovery never aborts mid-search.

use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::series::{coverage, is_coincident, subsequence_skewness, subsequence_std, MotifSet, Segment, TimeSeries};

pub type MotifPredicate = Arc<dyn Fn(Segment) -> bool + Send + Sync>;
pub type MotifPairPredicate = Arc<dyn Fn(Segment, Segment) -> bool + Send + Sync>;
pub type MotifSetPredicate = Arc<dyn Fn(&MotifSet) -> bool + Send + Sync>;
type MotifSetPairPredicate = Arc<dyn Fn(&MotifSet, &MotifSet) -> bool + Send + Sync>;

/// A soft constraint: maps a motif set to a desirability in [0, 1].
/// Evaluation of the empty set is 0 by definition.
#[derive(Clone)]
pub struct DesirabilityFn {
    f: Arc<dyn Fn(&MotifSet) -> f64 + Send + Sync>,
}

impl DesirabilityFn {
    pub fn new(f: impl Fn(&MotifSet) -> f64 + Send + Sync + 'static) -> Self {
        DesirabilityFn { f: Arc::new(f) }
    }

    pub fn constant_one() -> Self {
        DesirabilityFn::new(|_| 1.0)
    }

    pub fn eval(&self, m: &MotifSet) -> f64 {
        if m.motifs.is_empty() {
            return 0.0;
        }
        (self.f)(m).clamp(0.0, 1.0)
    }
}

impl std::fmt::Debug for DesirabilityFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("DesirabilityFn")
    }
}

/// Per-motif-set hard constraints, categorized by where the discovery
/// algorithm checks them. Every category is a conjunction of predicates.
#[derive(Clone, Default)]
pub struct HardConstraintBundle {
    h_mot: Vec<MotifPredicate>,
    h_mot_repr: Vec<MotifPredicate>,
    h_mots_same: Vec<MotifPairPredicate>,
    k_max_discard: Option<usize>,
    h_mset_others: Vec<MotifSetPredicate>,
}

impl HardConstraintBundle {
    /// A bundle that accepts everything.
    pub fn permissive() -> Self {
        Self::default()
    }

    pub fn add_motif(&mut self, p: MotifPredicate) {
        self.h_mot.push(p);
    }

    pub fn add_representative(&mut self, p: MotifPredicate) {
        self.h_mot_repr.push(p);
    }

    pub fn add_within_pair(&mut self, p: MotifPairPredicate) {
        self.h_mots_same.push(p);
    }

    pub fn add_whole_set(&mut self, p: MotifSetPredicate) {
        self.h_mset_others.push(p);
    }

    /// Caps the candidate cardinality; multiple caps keep the tightest.
    pub fn cap_discard(&mut self, k: usize) {
        self.k_max_discard = Some(self.k_max_discard.map_or(k, |cur| cur.min(k)));
    }

    pub fn motif_ok(&self, beta: Segment) -> bool {
        self.h_mot.iter().all(|p| p(beta))
    }

    pub fn representative_ok(&self, beta: Segment) -> bool {
        self.h_mot_repr.iter().all(|p| p(beta))
    }

    pub fn pair_ok(&self, beta: Segment, beta_prime: Segment) -> bool {
        self.h_mots_same.iter().all(|p| p(beta, beta_prime))
    }

    pub fn whole_set_ok(&self, m: &MotifSet) -> bool {
        self.h_mset_others.iter().all(|p| p(m))
    }

    pub fn k_max_discard(&self) -> Option<usize> {
        self.k_max_discard
    }
}

impl std::fmt::Debug for HardConstraintBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HardConstraintBundle")
            .field("h_mot", &self.h_mot.len())
            .field("h_mot_repr", &self.h_mot_repr.len())
            .field("h_mots_same", &self.h_mots_same.len())
            .field("k_max_discard", &self.k_max_discard)
            .field("h_mset_others", &self.h_mset_others.len())
            .finish()
    }
}

/// A hard constraint between two motif-set indices. When the constraint is of
/// the per-motif form, `motif_level` carries the underlying predicate and
/// `eval` quantifies it over all cross pairs.
#[derive(Clone)]
pub struct PairwiseConstraint {
    pub i: usize,
    pub j: usize,
    h_msets: MotifSetPairPredicate,
    motif_level: Option<MotifPairPredicate>,
}

impl PairwiseConstraint {
    /// A set-level constraint `h(M_i, M_j)`.
    pub fn set_level(
        i: usize,
        j: usize,
        h: impl Fn(&MotifSet, &MotifSet) -> bool + Send + Sync + 'static,
    ) -> Self {
        PairwiseConstraint { i, j, h_msets: Arc::new(h), motif_level: None }
    }

    /// A per-motif constraint: every motif of `M_i` paired with every motif
    /// of `M_j` must satisfy `p`.
    pub fn motif_level(i: usize, j: usize, p: MotifPairPredicate) -> Self {
        let inner = p.clone();
        let h = move |a: &MotifSet, b: &MotifSet| {
            a.motifs.iter().all(|&x| b.motifs.iter().all(|&y| inner(x, y)))
        };
        PairwiseConstraint { i, j, h_msets: Arc::new(h), motif_level: Some(p) }
    }

    pub fn eval(&self, m_i: &MotifSet, m_j: &MotifSet) -> bool {
        (self.h_msets)(m_i, m_j)
    }

    pub fn motif_level_predicate(&self) -> Option<&MotifPairPredicate> {
        self.motif_level.as_ref()
    }
}

impl std::fmt::Debug for PairwiseConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PairwiseConstraint")
            .field("i", &self.i)
            .field("j", &self.j)
            .field("motif_level", &self.motif_level.is_some())
            .finish()
    }
}

/// A length-n sequence of values in [0, 1] expressing where motifs may (or
/// preferably) start, end, or lie.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    values: Vec<f64>,
    binary: bool,
}

impl Mask {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMask("mask must not be empty".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidMask(format!("value {v} at index {i} outside [0, 1]")));
            }
        }
        let binary = values.iter().all(|&v| v == 0.0 || v == 1.0);
        Ok(Mask { values, binary })
    }

    pub fn ones(n: usize) -> Self {
        Mask { values: vec![1.0; n], binary: true }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    /// The mask value at `i`, or 0 when out of range.
    pub fn get(&self, i: usize) -> f64 {
        self.values.get(i).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Whether a declarative constraint is a requirement or a preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Hard,
    Soft,
}

/// Which motif-set indices a declarative constraint applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppliesTo {
    All,
    Index(usize),
    Indices(Vec<usize>),
    /// An ordered pair (i, j) of distinct motif-set indices.
    Pair(usize, usize),
}

/// The constraint catalogue, with kind-specific parameters.
///
/// `rho_decay` is the exponential decay constant for desirabilities beyond an
/// upper bound; it is required only in soft mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    MinCardinality { k_min: usize },
    MaxCardinality { k_max: usize, rho_decay: Option<f64> },
    MinCoverage { c_min: usize },
    MaxCoverage { c_max: usize, rho_decay: Option<f64> },
    LengthRange { l_min: usize, l_max: usize, rho_decay: Option<f64> },
    MinStd { sigma_min: f64 },
    BeginMask { mask: Mask },
    EndMask { mask: Mask },
    OverlapWithin { nu: f64 },
    OverlapBetween { nu: f64 },
    ExactCardinality { k: usize },
    MaxCardinalityDiscard { k_max: usize },
    StartEndPoints { begin: Mask, end: Mask },
    NonConsecutive { l_buffer: usize },
    PositiveRegionHard { theta: Segment },
    PositiveRegionSoft { theta: Segment },
    SoftMask { mask: Mask },
    LengthSoft { l_min: usize, l_max: usize },
    CardinalitySoft { k: usize, rho_decay: f64 },
    MinSkewnessRepr { gamma_min: f64 },
    PeakCentered,
    MpvMask { mask: Mask },
    SamplingMask { mask: Mask },
    ReprBeginEndMasks { begin: Mask, end: Mask },
}

impl ConstraintKind {
    pub fn name(&self) -> &'static str {
        use ConstraintKind::*;
        match self {
            MinCardinality { .. } => "min_cardinality",
            MaxCardinality { .. } => "max_cardinality",
            MinCoverage { .. } => "min_coverage",
            MaxCoverage { .. } => "max_coverage",
            LengthRange { .. } => "length_range",
            MinStd { .. } => "min_std",
            BeginMask { .. } => "begin_mask",
            EndMask { .. } => "end_mask",
            OverlapWithin { .. } => "overlap_within",
            OverlapBetween { .. } => "overlap_between",
            ExactCardinality { .. } => "exact_cardinality",
            MaxCardinalityDiscard { .. } => "max_cardinality_discard",
            StartEndPoints { .. } => "start_end_points",
            NonConsecutive { .. } => "non_consecutive",
            PositiveRegionHard { .. } => "positive_region_hard",
            PositiveRegionSoft { .. } => "positive_region_soft",
            SoftMask { .. } => "soft_mask",
            LengthSoft { .. } => "length_soft",
            CardinalitySoft { .. } => "cardinality_soft",
            MinSkewnessRepr { .. } => "min_skewness_repr",
            PeakCentered => "peak_centered",
            MpvMask { .. } => "mpv_mask",
            SamplingMask { .. } => "sampling_mask",
            ReprBeginEndMasks { .. } => "repr_begin_end_masks",
        }
    }

    /// The modes this kind admits.
    fn admits(&self, mode: Mode) -> bool {
        use ConstraintKind::*;
        match self {
            // preference-only kinds
            PositiveRegionSoft { .. } | SoftMask { .. } | LengthSoft { .. }
            | CardinalitySoft { .. } | PeakCentered | SamplingMask { .. } => mode == Mode::Soft,
            // requirement-only kinds
            OverlapBetween { .. } | ExactCardinality { .. } | MaxCardinalityDiscard { .. }
            | NonConsecutive { .. } | PositiveRegionHard { .. } | MinSkewnessRepr { .. }
            | ReprBeginEndMasks { .. } => mode == Mode::Hard,
            _ => true,
        }
    }

    pub fn default_mode(&self) -> Mode {
        if self.admits(Mode::Hard) {
            Mode::Hard
        } else {
            Mode::Soft
        }
    }

    /// True for kinds that constrain a pair of motif sets.
    pub fn is_between(&self) -> bool {
        matches!(self, ConstraintKind::OverlapBetween { .. })
    }
}

/// A declarative constraint: kind, mode, and target motif-set indices.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub mode: Mode,
    pub applies_to: AppliesTo,
}

impl ConstraintSpec {
    pub fn new(kind: ConstraintKind, mode: Mode, applies_to: AppliesTo) -> Self {
        ConstraintSpec { kind, mode, applies_to }
    }

    pub fn hard(kind: ConstraintKind, applies_to: AppliesTo) -> Self {
        ConstraintSpec::new(kind, Mode::Hard, applies_to)
    }

    pub fn soft(kind: ConstraintKind, applies_to: AppliesTo) -> Self {
        ConstraintSpec::new(kind, Mode::Soft, applies_to)
    }
}

/// Context handed to constraint builders: the series length and, for
/// statistics-based constraints, the series itself.
#[derive(Clone)]
pub struct BuildContext {
    pub n: usize,
    pub series: Option<Arc<TimeSeries>>,
}

impl BuildContext {
    pub fn new(n: usize) -> Self {
        BuildContext { n, series: None }
    }

    pub fn with_series(series: Arc<TimeSeries>) -> Self {
        BuildContext { n: series.len(), series: Some(series) }
    }

    fn series(&self, kind: &ConstraintKind) -> Result<Arc<TimeSeries>> {
        self.series.clone().ok_or_else(|| {
            Error::config(kind.name(), "constraint requires the time series in the build context")
        })
    }
}

/// A built constraint, tagged with the bundle slot it belongs to.
pub enum BuiltConstraint {
    Motif(MotifPredicate),
    Representative(MotifPredicate),
    WithinPair(MotifPairPredicate),
    WholeSet(MotifSetPredicate),
    Discard(usize),
    /// Routed to a [`PairwiseConstraint`] using the spec's pair target.
    BetweenPair(MotifPairPredicate),
    Desirability(DesirabilityFn),
}

fn require_binary(mask: &Mask, kind: &ConstraintKind) -> Result<()> {
    if !mask.is_binary() {
        return Err(Error::config(
            kind.name(),
            "hard mode requires a binary mask (all values 0 or 1)",
        ));
    }
    Ok(())
}

fn check_mask_len(mask: &Mask, n: usize, kind: &ConstraintKind) -> Result<()> {
    if mask.len() != n {
        return Err(Error::config(
            kind.name(),
            format!("mask length {} does not match series length {n}", mask.len()),
        ));
    }
    Ok(())
}

fn rho_decay_for_soft(rho: Option<f64>, kind: &ConstraintKind) -> Result<f64> {
    let rho = rho.ok_or_else(|| {
        Error::config(kind.name(), "soft mode requires the decay constant rho_decay")
    })?;
    check_rho_decay(rho, kind.name())?;
    Ok(rho)
}

fn check_rho_decay(rho: f64, name: &str) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::config(name, format!("rho_decay must lie in (0, 1), got {rho}")));
    }
    Ok(())
}

/// Per-motif desirability factor for the soft length-range constraint.
fn length_factor(len: usize, l_min: usize, l_max: usize, rho: f64) -> f64 {
    let len_f = len as f64;
    if len < l_min {
        len_f / l_min as f64
    } else if len > l_max {
        rho.powf(len_f / l_max as f64 - 1.0)
    } else {
        1.0
    }
}

/// Builds the predicate or desirability function for one constraint spec.
///
/// Within-pair predicates are applied in both argument orders so that the
/// greedy filter's single-order check yields whole-set soundness over all
/// ordered pairs even for asymmetric predicates.
pub fn build(spec: &ConstraintSpec, ctx: &BuildContext) -> Result<BuiltConstraint> {
    use BuiltConstraint::*;
    use ConstraintKind::*;

    let kind = &spec.kind;
    if !kind.admits(spec.mode) {
        let m = if spec.mode == Mode::Soft { "soft" } else { "hard" };
        return Err(Error::config(
            kind.name(),
            format!("{m} mode is not defined for this constraint kind"),
        ));
    }

    let built = match (kind, spec.mode) {
        (MinCardinality { k_min }, Mode::Hard) => {
            let k = *k_min;
            WholeSet(Arc::new(move |m: &MotifSet| m.cardinality() >= k))
        }
        (MinCardinality { k_min }, Mode::Soft) => {
            let k = *k_min as f64;
            Desirability(DesirabilityFn::new(move |m| {
                let c = m.cardinality() as f64;
                if c < k {
                    c / k
                } else {
                    1.0
                }
            }))
        }
        (MaxCardinality { k_max, .. }, Mode::Hard) => {
            let k = *k_max;
            WholeSet(Arc::new(move |m: &MotifSet| m.cardinality() <= k))
        }
        (MaxCardinality { k_max, rho_decay }, Mode::Soft) => {
            let k = *k_max as f64;
            let rho = rho_decay_for_soft(*rho_decay, kind)?;
            Desirability(DesirabilityFn::new(move |m| {
                let c = m.cardinality() as f64;
                if c > k {
                    rho.powf(c - k)
                } else {
                    1.0
                }
            }))
        }
        (MinCoverage { c_min }, Mode::Hard) => {
            let c = *c_min;
            WholeSet(Arc::new(move |m: &MotifSet| coverage(m).is_ok_and(|cov| cov >= c)))
        }
        (MinCoverage { c_min }, Mode::Soft) => {
            let c = *c_min as f64;
            Desirability(DesirabilityFn::new(move |m| {
                let cov = coverage(m).unwrap_or(0) as f64;
                if cov < c {
                    cov / c
                } else {
                    1.0
                }
            }))
        }
        (MaxCoverage { c_max, .. }, Mode::Hard) => {
            let c = *c_max;
            WholeSet(Arc::new(move |m: &MotifSet| coverage(m).is_ok_and(|cov| cov <= c)))
        }
        (MaxCoverage { c_max, rho_decay }, Mode::Soft) => {
            let c = *c_max as f64;
            let rho = rho_decay_for_soft(*rho_decay, kind)?;
            Desirability(DesirabilityFn::new(move |m| {
                let cov = coverage(m).unwrap_or(0) as f64;
                if cov > c {
                    rho.powf(cov - c)
                } else {
                    1.0
                }
            }))
        }
        (LengthRange { l_min, l_max, .. }, Mode::Hard) => {
            let (lo, hi) = (*l_min, *l_max);
            Motif(Arc::new(move |b: Segment| lo <= b.len() && b.len() <= hi))
        }
        (LengthRange { l_min, l_max, rho_decay }, Mode::Soft) => {
            let (lo, hi) = (*l_min, *l_max);
            let rho = rho_decay_for_soft(*rho_decay, kind)?;
            Desirability(DesirabilityFn::new(move |m| {
                m.motifs.iter().map(|b| length_factor(b.len(), lo, hi, rho)).product()
            }))
        }
        (MinStd { sigma_min }, Mode::Hard) => {
            let sigma = *sigma_min;
            let x = ctx.series(kind)?;
            Motif(Arc::new(move |b: Segment| {
                subsequence_std(&x, b).is_ok_and(|s| s >= sigma)
            }))
        }
        (MinStd { sigma_min }, Mode::Soft) => {
            let sigma = *sigma_min;
            let x = ctx.series(kind)?;
            Desirability(DesirabilityFn::new(move |m| {
                m.motifs
                    .iter()
                    .map(|&b| {
                        let s = subsequence_std(&x, b).unwrap_or(0.0);
                        if s < sigma {
                            s / sigma
                        } else {
                            1.0
                        }
                    })
                    .product()
            }))
        }
        (BeginMask { mask }, Mode::Hard) => {
            check_mask_len(mask, ctx.n, kind)?;
            require_binary(mask, kind)?;
            let mask = mask.clone();
            Motif(Arc::new(move |b: Segment| mask.get(b.start()) == 1.0))
        }
        (BeginMask { mask }, Mode::Soft) => {
            check_mask_len(mask, ctx.n, kind)?;
            let mask = mask.clone();
            Desirability(DesirabilityFn::new(move |m| {
                m.motifs.iter().map(|b| mask.get(b.start())).product()
            }))
        }
        (EndMask { mask }, Mode::Hard) => {
            check_mask_len(mask, ctx.n, kind)?;
            require_binary(mask, kind)?;
            let mask = mask.clone();
            Motif(Arc::new(move |b: Segment| mask.get(b.end()) == 1.0))
        }
        (EndMask { mask }, Mode::Soft) => {
            check_mask_len(mask, ctx.n, kind)?;
            let mask = mask.clone();
            Desirability(DesirabilityFn::new(move |m| {
                m.motifs.iter().map(|b| mask.get(b.end())).product()
            }))
        }
        (OverlapWithin { nu }, Mode::Hard) => {
            let nu = *nu;
            is_coincident(Segment::new(0, 0)?, Segment::new(0, 0)?, nu)?; // validate nu
            WithinPair(Arc::new(move |a: Segment, b: Segment| {
                let fwd = a.intersection_len(b) as f64 > nu * b.len() as f64;
                let bwd = b.intersection_len(a) as f64 > nu * a.len() as f64;
                !fwd && !bwd
            }))
        }
        (OverlapWithin { nu }, Mode::Soft) => {
            let nu = *nu;
            is_coincident(Segment::new(0, 0)?, Segment::new(0, 0)?, nu)?;
            let pred: MotifPairPredicate = Arc::new(move |a: Segment, b: Segment| {
                a.intersection_len(b) as f64 <= nu * b.len() as f64
            });
            Desirability(lift_pairwise_to_desirability(pred))
        }
        (OverlapBetween { nu }, Mode::Hard) => {
            let nu = *nu;
            is_coincident(Segment::new(0, 0)?, Segment::new(0, 0)?, nu)?;
            BetweenPair(Arc::new(move |a: Segment, b: Segment| {
                a.intersection_len(b) as f64 <= nu * b.len() as f64
            }))
        }
        (ExactCardinality { k }, Mode::Hard) => {
            let k = *k;
            WholeSet(Arc::new(move |m: &MotifSet| m.cardinality() == k))
        }
        (MaxCardinalityDiscard { k_max }, Mode::Hard) => Discard(*k_max),
        (StartEndPoints { begin, end }, Mode::Hard) => {
            check_mask_len(begin, ctx.n, kind)?;
            check_mask_len(end, ctx.n, kind)?;
            require_binary(begin, kind)?;
            require_binary(end, kind)?;
            let (begin, end) = (begin.clone(), end.clone());
            Motif(Arc::new(move |b: Segment| {
                begin.get(b.start()) == 1.0 && end.get(b.end()) == 1.0
            }))
        }
        (StartEndPoints { begin, end }, Mode::Soft) => {
            check_mask_len(begin, ctx.n, kind)?;
            check_mask_len(end, ctx.n, kind)?;
            let (begin, end) = (begin.clone(), end.clone());
            Desirability(DesirabilityFn::new(move |m| {
                m.motifs.iter().map(|b| begin.get(b.start()) * end.get(b.end())).product()
            }))
        }
        (NonConsecutive { l_buffer }, Mode::Hard) => {
            let buf = *l_buffer;
            let pred: MotifPairPredicate = Arc::new(move |a: Segment, b: Segment| {
                let fwd = a.start() <= b.start() && b.start() <= a.end() + buf;
                let bwd = b.start() <= a.start() && a.start() <= b.end() + buf;
                !fwd && !bwd
            });
            if matches!(spec.applies_to, AppliesTo::Pair(..)) {
                BetweenPair(pred)
            } else {
                WithinPair(pred)
            }
        }
        (PositiveRegionHard { theta }, Mode::Hard) => {
            let theta = *theta;
            WholeSet(Arc::new(move |m: &MotifSet| m.motifs.iter().any(|b| b.is_subset_of(theta))))
        }
        (PositiveRegionSoft { theta }, Mode::Soft) => {
            let theta = *theta;
            Desirability(DesirabilityFn::new(move |m| {
                m.motifs
                    .iter()
                    .map(|b| b.intersection_len(theta) as f64 / b.len() as f64)
                    .fold(0.0, f64::max)
            }))
        }
        (SoftMask { mask }, Mode::Soft) => {
            check_mask_len(mask, ctx.n, kind)?;
            let mask = mask.clone();
            Desirability(DesirabilityFn::new(move |m| {
                // average of the mask over the union of covered indices
                let mut segs = m.motifs.clone();
                segs.sort();
                let mut sum = 0.0;
                let mut count = 0usize;
                let mut next_free = 0usize;
                for s in segs {
                    let lo = s.start().max(next_free);
                    if lo > s.end() {
                        continue;
                    }
                    for i in lo..=s.end() {
                        sum += mask.get(i);
                    }
                    count += s.end() - lo + 1;
                    next_free = s.end() + 1;
                }
                if count == 0 {
                    0.0
                } else {
                    sum / count as f64
                }
            }))
        }
        (LengthSoft { l_min, l_max }, Mode::Soft) => {
            let (lo, hi) = (*l_min, *l_max);
            let pred: MotifPredicate = Arc::new(move |b: Segment| lo <= b.len() && b.len() <= hi);
            Desirability(lift_motif_to_desirability(pred))
        }
        (CardinalitySoft { k, rho_decay }, Mode::Soft) => {
            check_rho_decay(*rho_decay, kind.name())?;
            let k = *k as f64;
            let rho = *rho_decay;
            Desirability(DesirabilityFn::new(move |m| {
                let c = m.cardinality() as f64;
                if c < k {
                    c / k
                } else if c > k {
                    rho.powf(c - k)
                } else {
                    1.0
                }
            }))
        }
        (MinSkewnessRepr { gamma_min }, Mode::Hard) => {
            let g = *gamma_min;
            let x = ctx.series(kind)?;
            Representative(Arc::new(move |b: Segment| {
                subsequence_skewness(&x, b).is_ok_and(|s| s >= g)
            }))
        }
        (PeakCentered, Mode::Soft) => {
            let x = ctx.series(kind)?;
            Desirability(DesirabilityFn::new(move |m| {
                let Some(rep) = m.representative() else { return 0.0 };
                if rep.end() >= x.len() {
                    return 0.0;
                }
                if rep.len() == 1 {
                    return 1.0;
                }
                let peak_key = |i: usize| -> f64 {
                    if x.dim() == 1 {
                        x.sample(i)[0]
                    } else {
                        x.sample(i).iter().map(|v| v * v).sum::<f64>().sqrt()
                    }
                };
                let mut i_peak = 0usize;
                let mut best = f64::NEG_INFINITY;
                for i in rep.start()..=rep.end() {
                    let v = peak_key(i);
                    if v > best {
                        best = v;
                        i_peak = i - rep.start();
                    }
                }
                let span = (rep.end() - rep.start()) as f64;
                let ip = i_peak as f64;
                if ip <= span / 2.0 {
                    2.0 * ip / span
                } else {
                    2.0 - 2.0 * ip / span
                }
            }))
        }
        (MpvMask { mask }, Mode::Hard) => {
            check_mask_len(mask, ctx.n, kind)?;
            require_binary(mask, kind)?;
            let mask = mask.clone();
            Representative(Arc::new(move |b: Segment| mask.get(b.start()) == 1.0))
        }
        (MpvMask { mask }, Mode::Soft) => {
            check_mask_len(mask, ctx.n, kind)?;
            let mask = mask.clone();
            Desirability(DesirabilityFn::new(move |m| {
                m.representative().map_or(0.0, |rep| mask.get(rep.start()))
            }))
        }
        (SamplingMask { mask }, Mode::Soft) => {
            check_mask_len(mask, ctx.n, kind)?;
            let mask = mask.clone();
            Desirability(DesirabilityFn::new(move |m| {
                m.representative().map_or(0.0, |rep| mask.get(rep.end()))
            }))
        }
        (ReprBeginEndMasks { begin, end }, Mode::Hard) => {
            check_mask_len(begin, ctx.n, kind)?;
            check_mask_len(end, ctx.n, kind)?;
            require_binary(begin, kind)?;
            require_binary(end, kind)?;
            let (begin, end) = (begin.clone(), end.clone());
            Representative(Arc::new(move |b: Segment| {
                begin.get(b.start()) == 1.0 && end.get(b.end()) == 1.0
            }))
        }
        (k, m) => {
            let mode = if m == Mode::Soft { "soft" } else { "hard" };
            return Err(Error::config(
                k.name(),
                format!("{mode} mode is not defined for this constraint kind"),
            ));
        }
    };
    Ok(built)
}

/// Lifts a per-motif hard predicate into a desirability: the proportion of
/// motifs satisfying it.
pub fn lift_motif_to_desirability(h_mot: MotifPredicate) -> DesirabilityFn {
    DesirabilityFn::new(move |m: &MotifSet| {
        if m.motifs.is_empty() {
            return 0.0;
        }
        let sat = m.motifs.iter().filter(|&&b| h_mot(b)).count();
        sat as f64 / m.cardinality() as f64
    })
}

/// Lifts a within-set pairwise hard predicate into a desirability: the
/// proportion of ordered distinct pairs satisfying it. Sets with fewer than
/// two motifs have no pairs to violate and evaluate to 1.
pub fn lift_pairwise_to_desirability(h_mots_same: MotifPairPredicate) -> DesirabilityFn {
    DesirabilityFn::new(move |m: &MotifSet| {
        let k = m.cardinality();
        if k < 2 {
            return 1.0;
        }
        let mut sat = 0usize;
        for (a, &x) in m.motifs.iter().enumerate() {
            for (b, &y) in m.motifs.iter().enumerate() {
                if a != b && h_mots_same(x, y) {
                    sat += 1;
                }
            }
        }
        sat as f64 / (k * k - k) as f64
    })
}

/// Combines desirability functions by product; an empty list is the constant 1.
pub fn compose_desirabilities(fns: Vec<DesirabilityFn>) -> DesirabilityFn {
    if fns.is_empty() {
        return DesirabilityFn::constant_one();
    }
    DesirabilityFn::new(move |m: &MotifSet| fns.iter().map(|f| f.eval(m)).product())
}

/// Substitutes a discovered motif set into every pairwise constraint that
/// involves it, conjoining the residual single-set constraints into the
/// bundle of an undiscovered index `j`.
///
/// Per-motif (mots-diff) constraints are folded into `h_mot` so the greedy
/// filter can salvage candidates by dropping violating motifs; set-level
/// constraints are folded into `h_mset_others`.
pub fn fold_pairwise(
    bundle: &HardConstraintBundle,
    pairwise: &[PairwiseConstraint],
    j: usize,
    i_star: usize,
    discovered: &MotifSet,
) -> HardConstraintBundle {
    let mut out = bundle.clone();
    for pc in pairwise {
        if pc.i == j && pc.j == i_star {
            // constraint declared as h(M_j, M_{i*})
            if let Some(ml) = pc.motif_level_predicate() {
                let ml = ml.clone();
                let disc = discovered.motifs.clone();
                out.add_motif(Arc::new(move |b: Segment| disc.iter().all(|&d| ml(b, d))));
            } else {
                let h = pc.h_msets.clone();
                let disc = discovered.clone();
                out.add_whole_set(Arc::new(move |m: &MotifSet| h(m, &disc)));
            }
        } else if pc.i == i_star && pc.j == j {
            // constraint declared as h(M_{i*}, M_j): mirror the argument order
            if let Some(ml) = pc.motif_level_predicate() {
                let ml = ml.clone();
                let disc = discovered.motifs.clone();
                out.add_motif(Arc::new(move |b: Segment| disc.iter().all(|&d| ml(d, b))));
            } else {
                let h = pc.h_msets.clone();
                let disc = discovered.clone();
                out.add_whole_set(Arc::new(move |m: &MotifSet| h(&disc, m)));
            }
        }
    }
    out
}

/// Everything the discovery loop needs, compiled from declarative specs.
#[derive(Debug, Clone)]
pub struct CompiledConstraints {
    pub bundles: Vec<HardConstraintBundle>,
    pub desirabilities: Vec<DesirabilityFn>,
    pub pairwise: Vec<PairwiseConstraint>,
    /// True when no spec distinguishes individual indices or pairs, so all
    /// per-index searches are interchangeable.
    pub same_for_all: bool,
}

/// Compiles constraint specs into per-index bundles, composed desirabilities,
/// and pairwise constraints for `kappa` motif sets.
pub fn compile(specs: &[ConstraintSpec], kappa: usize, ctx: &BuildContext) -> Result<CompiledConstraints> {
    let mut bundles = vec![HardConstraintBundle::permissive(); kappa];
    let mut desir_parts: Vec<Vec<DesirabilityFn>> = vec![Vec::new(); kappa];
    let mut pairwise = Vec::new();
    let mut same_for_all = true;

    for spec in specs {
        if let AppliesTo::Pair(i, j) = spec.applies_to {
            check_pair(i, j, kappa, spec.kind.name())?;
            same_for_all = false;
            match build(spec, ctx)? {
                BuiltConstraint::BetweenPair(p) | BuiltConstraint::WithinPair(p) => {
                    pairwise.push(PairwiseConstraint::motif_level(i, j, p));
                }
                _ => {
                    return Err(Error::config(
                        spec.kind.name(),
                        "constraint kind cannot target a pair of motif sets",
                    ))
                }
            }
            continue;
        }

        if spec.kind.is_between() {
            // between-set constraint on "all": every ordered pair, uniformly
            if !matches!(spec.applies_to, AppliesTo::All) {
                return Err(Error::config(
                    spec.kind.name(),
                    "between-set constraints take applies_to \"all\" or a {\"pair\": [i, j]}",
                ));
            }
            if let BuiltConstraint::BetweenPair(p) = build(spec, ctx)? {
                for i in 0..kappa {
                    for j in 0..kappa {
                        if i != j {
                            pairwise.push(PairwiseConstraint::motif_level(i, j, p.clone()));
                        }
                    }
                }
            }
            continue;
        }

        let indices: Vec<usize> = match &spec.applies_to {
            AppliesTo::All => (0..kappa).collect(),
            AppliesTo::Index(i) => {
                same_for_all = false;
                check_index(*i, kappa, spec.kind.name())?;
                vec![*i]
            }
            AppliesTo::Indices(v) => {
                same_for_all = false;
                for &i in v {
                    check_index(i, kappa, spec.kind.name())?;
                }
                v.clone()
            }
            AppliesTo::Pair(..) => unreachable!("handled above"),
        };

        let built = build(spec, ctx)?;
        for &i in &indices {
            match &built {
                BuiltConstraint::Motif(p) => bundles[i].add_motif(p.clone()),
                BuiltConstraint::Representative(p) => bundles[i].add_representative(p.clone()),
                BuiltConstraint::WithinPair(p) => bundles[i].add_within_pair(p.clone()),
                BuiltConstraint::WholeSet(p) => bundles[i].add_whole_set(p.clone()),
                BuiltConstraint::Discard(k) => bundles[i].cap_discard(*k),
                BuiltConstraint::Desirability(d) => desir_parts[i].push(d.clone()),
                BuiltConstraint::BetweenPair(_) => unreachable!("handled above"),
            }
        }
    }

    let desirabilities = desir_parts.into_iter().map(compose_desirabilities).collect();
    Ok(CompiledConstraints { bundles, desirabilities, pairwise, same_for_all })
}

fn check_index(i: usize, kappa: usize, name: &str) -> Result<()> {
    if i >= kappa {
        return Err(Error::config(
            name,
            format!("applies_to index {i} out of range for kappa = {kappa}"),
        ));
    }
    Ok(())
}

fn check_pair(i: usize, j: usize, kappa: usize, name: &str) -> Result<()> {
    check_index(i, kappa, name)?;
    check_index(j, kappa, name)?;
    if i == j {
        return Err(Error::config(name, format!("pair indices must differ, got ({i}, {j})")));
    }
    Ok(())
}

// --- declarative JSON parsing -----------------------------------------------
//
// Each spec is {"kind": string, "mode": "hard"|"soft", "applies_to": ...,
// "params": {...}}. Mask parameters arrive as inline value arrays; resolving
// "mask_file" references into arrays is the config loader's job.

fn json_obj<'a>(v: &'a Value, path: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::config(path, "expected an object"))
}

fn get_usize(params: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<usize> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::config(format!("{path}.{key}"), "missing required parameter"))?;
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::config(format!("{path}.{key}"), "expected a nonnegative integer"))
}

fn get_f64(params: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::config(format!("{path}.{key}"), "missing required parameter"))?;
    v.as_f64().ok_or_else(|| Error::config(format!("{path}.{key}"), "expected a number"))
}

fn opt_f64(params: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::config(format!("{path}.{key}"), "expected a number")),
    }
}

fn get_mask(params: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<Mask> {
    let v = params.get(key).ok_or_else(|| {
        Error::config(format!("{path}.{key}"), "missing mask (provide values or a mask_file)")
    })?;
    let arr = v
        .as_array()
        .ok_or_else(|| Error::config(format!("{path}.{key}"), "expected an array of numbers"))?;
    let mut values = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let f = item
            .as_f64()
            .ok_or_else(|| Error::config(format!("{path}.{key}[{i}]"), "expected a number"))?;
        values.push(f);
    }
    Mask::new(values).map_err(|e| Error::config(format!("{path}.{key}"), e.to_string()))
}

fn get_segment(params: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<Segment> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::config(format!("{path}.{key}"), "missing required parameter"))?;
    let obj = json_obj(v, &format!("{path}.{key}"))?;
    let start = get_usize(obj, "start", &format!("{path}.{key}"))?;
    let end = get_usize(obj, "end", &format!("{path}.{key}"))?;
    Segment::new(start, end).map_err(|e| Error::config(format!("{path}.{key}"), e.to_string()))
}

fn applies_to_from_json(v: Option<&Value>, path: &str) -> Result<AppliesTo> {
    let Some(v) = v else { return Ok(AppliesTo::All) };
    match v {
        Value::String(s) if s == "all" => Ok(AppliesTo::All),
        Value::Number(_) => {
            let i = v.as_u64().ok_or_else(|| {
                Error::config(format!("{path}.applies_to"), "expected a nonnegative index")
            })?;
            Ok(AppliesTo::Index(i as usize))
        }
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let i = item.as_u64().ok_or_else(|| {
                    Error::config(format!("{path}.applies_to[{k}]"), "expected an index")
                })?;
                out.push(i as usize);
            }
            Ok(AppliesTo::Indices(out))
        }
        Value::Object(map) => {
            let pair = map.get("pair").ok_or_else(|| {
                Error::config(format!("{path}.applies_to"), "expected {\"pair\": [i, j]}")
            })?;
            let arr = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                Error::config(format!("{path}.applies_to.pair"), "expected exactly two indices")
            })?;
            let i = arr[0].as_u64().ok_or_else(|| {
                Error::config(format!("{path}.applies_to.pair[0]"), "expected an index")
            })?;
            let j = arr[1].as_u64().ok_or_else(|| {
                Error::config(format!("{path}.applies_to.pair[1]"), "expected an index")
            })?;
            Ok(AppliesTo::Pair(i as usize, j as usize))
        }
        _ => Err(Error::config(
            format!("{path}.applies_to"),
            "expected an index, a list of indices, \"all\", or {\"pair\": [i, j]}",
        )),
    }
}

/// Parses one declarative constraint spec from JSON. `path` locates the spec
/// in the enclosing document for diagnostics.
pub fn spec_from_json(v: &Value, path: &str) -> Result<ConstraintSpec> {
    let obj = json_obj(v, path)?;
    let kind_name = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::config(format!("{path}.kind"), "missing constraint kind"))?;
    let empty = serde_json::Map::new();
    let params = match obj.get("params") {
        Some(p) => json_obj(p, &format!("{path}.params"))?,
        None => &empty,
    };
    let ppath = format!("{path}.params");

    let kind = match kind_name {
        "min_cardinality" => ConstraintKind::MinCardinality { k_min: get_usize(params, "k_min", &ppath)? },
        "max_cardinality" => ConstraintKind::MaxCardinality {
            k_max: get_usize(params, "k_max", &ppath)?,
            rho_decay: opt_f64(params, "rho_decay", &ppath)?,
        },
        "min_coverage" => ConstraintKind::MinCoverage { c_min: get_usize(params, "c_min", &ppath)? },
        "max_coverage" => ConstraintKind::MaxCoverage {
            c_max: get_usize(params, "c_max", &ppath)?,
            rho_decay: opt_f64(params, "rho_decay", &ppath)?,
        },
        "length_range" => {
            let l_min = get_usize(params, "l_min", &ppath)?;
            let l_max = get_usize(params, "l_max", &ppath)?;
            if l_min < 1 || l_min > l_max {
                return Err(Error::config(&ppath, format!("need 1 <= l_min <= l_max, got ({l_min}, {l_max})")));
            }
            ConstraintKind::LengthRange { l_min, l_max, rho_decay: opt_f64(params, "rho_decay", &ppath)? }
        }
        "min_std" => ConstraintKind::MinStd { sigma_min: get_f64(params, "sigma_min", &ppath)? },
        "begin_mask" => ConstraintKind::BeginMask { mask: get_mask(params, "mask", &ppath)? },
        "end_mask" => ConstraintKind::EndMask { mask: get_mask(params, "mask", &ppath)? },
        "overlap_within" => ConstraintKind::OverlapWithin { nu: get_f64(params, "nu", &ppath)? },
        "overlap_between" => ConstraintKind::OverlapBetween { nu: get_f64(params, "nu", &ppath)? },
        "exact_cardinality" => ConstraintKind::ExactCardinality { k: get_usize(params, "k", &ppath)? },
        "max_cardinality_discard" => {
            ConstraintKind::MaxCardinalityDiscard { k_max: get_usize(params, "k_max", &ppath)? }
        }
        "start_end_points" => ConstraintKind::StartEndPoints {
            begin: get_mask(params, "begin_mask", &ppath)?,
            end: get_mask(params, "end_mask", &ppath)?,
        },
        "non_consecutive" => {
            ConstraintKind::NonConsecutive { l_buffer: get_usize(params, "l_buffer", &ppath)? }
        }
        "positive_region_hard" => {
            ConstraintKind::PositiveRegionHard { theta: get_segment(params, "theta", &ppath)? }
        }
        "positive_region_soft" => {
            ConstraintKind::PositiveRegionSoft { theta: get_segment(params, "theta", &ppath)? }
        }
        "soft_mask" => ConstraintKind::SoftMask { mask: get_mask(params, "mask", &ppath)? },
        "length_soft" => {
            let l_min = get_usize(params, "l_min", &ppath)?;
            let l_max = get_usize(params, "l_max", &ppath)?;
            if l_min < 1 || l_min > l_max {
                return Err(Error::config(&ppath, format!("need 1 <= l_min <= l_max, got ({l_min}, {l_max})")));
            }
            ConstraintKind::LengthSoft { l_min, l_max }
        }
        "cardinality_soft" => ConstraintKind::CardinalitySoft {
            k: get_usize(params, "k", &ppath)?,
            rho_decay: get_f64(params, "rho_decay", &ppath)?,
        },
        "min_skewness_repr" => {
            ConstraintKind::MinSkewnessRepr { gamma_min: get_f64(params, "gamma_min", &ppath)? }
        }
        "peak_centered" => ConstraintKind::PeakCentered,
        "mpv_mask" => ConstraintKind::MpvMask { mask: get_mask(params, "mask", &ppath)? },
        "sampling_mask" => ConstraintKind::SamplingMask { mask: get_mask(params, "mask", &ppath)? },
        "repr_begin_end_masks" => ConstraintKind::ReprBeginEndMasks {
            begin: get_mask(params, "begin_mask", &ppath)?,
            end: get_mask(params, "end_mask", &ppath)?,
        },
        other => {
            return Err(Error::config(format!("{path}.kind"), format!("unknown constraint kind \"{other}\"")))
        }
    };

    let mode = match obj.get("mode").and_then(Value::as_str) {
        None => kind.default_mode(),
        Some("hard") => Mode::Hard,
        Some("soft") => Mode::Soft,
        Some(other) => {
            return Err(Error::config(
                format!("{path}.mode"),
                format!("expected \"hard\" or \"soft\", got \"{other}\""),
            ))
        }
    };
    let applies_to = applies_to_from_json(obj.get("applies_to"), path)?;
    Ok(ConstraintSpec { kind, mode, applies_to })
}

/// Sliding-window statistic used by [`build_mask_from_signal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMethod {
    /// Standard deviation of the window.
    StdWindow,
    /// Euclidean norm of the first-order differences in the window.
    ComplexityWindow,
    /// Mean of the per-sample Euclidean norms in the window.
    BinaryThreshold,
}

/// Derives a mask from the series: a sliding-window statistic per time index
/// (window right-aligned, clipped at the left boundary), then binarized at
/// `threshold` when given, or min-max normalized into [0, 1] otherwise.
/// `invert` flips the result (1 - value), e.g. to mark low-variance regions.
pub fn build_mask_from_signal(
    x: &TimeSeries,
    method: MaskMethod,
    window: usize,
    threshold: Option<f64>,
    invert: bool,
) -> Result<Mask> {
    if window < 2 {
        return Err(Error::InvalidParam(format!("mask window must be at least 2, got {window}")));
    }
    if window > x.len() {
        return Err(Error::InvalidParam(format!(
            "mask window {window} exceeds series length {}",
            x.len()
        )));
    }
    let n = x.len();
    let mut stat = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(window - 1);
        let seg = Segment::new(lo, i).expect("lo <= i");
        let v = match method {
            MaskMethod::StdWindow => subsequence_std(x, seg)?,
            MaskMethod::ComplexityWindow => {
                let mut acc = 0.0;
                for t in lo..i {
                    acc += x.sq_dist(t, t + 1);
                }
                acc.sqrt()
            }
            MaskMethod::BinaryThreshold => {
                let mut acc = 0.0;
                for t in lo..=i {
                    acc += x.sample(t).iter().map(|v| v * v).sum::<f64>().sqrt();
                }
                acc / seg.len() as f64
            }
        };
        stat.push(v);
    }

    let values: Vec<f64> = match threshold {
        Some(t) => stat
            .iter()
            .map(|&v| {
                let on = v >= t;
                if on != invert {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        None => {
            let lo = stat.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = stat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            if range <= 0.0 {
                vec![0.0; n]
            } else {
                stat.iter()
                    .map(|&v| {
                        let u = (v - lo) / range;
                        if invert {
                            1.0 - u
                        } else {
                            u
                        }
                    })
                    .collect()
            }
        }
    };
    Mask::new(values)
}

//! Constrained variable-length motif discovery for time series.
//!
//! The engine finds repeating patterns (motif sets) in a series while
//! honoring user-declared hard constraints and weighting candidates by soft
//! constraints (desirability functions). Alongside the discovery algorithm
//! it ships a declarative constraint catalogue, a synthetic planted-pattern
//! generator, a ground-truth evaluation harness, and a CLI.

pub mod candidates;
pub mod cli;
pub mod constraints;
pub mod discovery;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod loco;
pub mod series;

pub use candidates::{fitness, generate_candidate_motif_set, CandidateMotifSet};
pub use constraints::{
    build_mask_from_signal, compose_desirabilities, lift_motif_to_desirability,
    lift_pairwise_to_desirability, AppliesTo, BuildContext, ConstraintKind, ConstraintSpec,
    DesirabilityFn, HardConstraintBundle, Mask, MaskMethod, Mode, PairwiseConstraint,
};
pub use discovery::{
    discover, filter_candidate_motif_set, find_best_admissible_motif_set, DiscoveredSet,
    DiscoveryConfig, DiscoveryResult,
};
pub use error::{Error, Result};
pub use evaluation::{derive_benchmark_constraints, evaluate, match_motif, EvalReport, GroundTruth};
pub use loco::{
    compute_local_warping_paths, project_path, self_similarity, strictness_threshold, LocoParams,
    SimilarityMatrix, WarpingPath,
};
pub use series::{
    coverage, is_coincident, search_space_digit_count, subsequence_skewness, subsequence_std,
    MotifSet, SearchSpaceSize, Segment, TimeSeries,
};

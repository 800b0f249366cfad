//! Candidate motif sets: the segments similar to a representative, induced by
//! projecting the local warping paths, plus the fitness metric that scores
//! them.

use crate::error::{Error, Result};
use crate::loco::{project_path, WarpingPath};
use crate::series::{coverage, MotifSet, Segment};

/// A representative segment together with the segments its paths induce,
/// sorted by descending alignment subscore. `motifs[0]` is the representative.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMotifSet {
    pub motifs: Vec<Segment>,
    /// Per-motif sum of similarities along the inducing subpath.
    pub subscores: Vec<f64>,
    /// Per-motif subpath cell count, used to normalize subscores.
    pub cells: Vec<usize>,
}

impl CandidateMotifSet {
    pub fn representative(&self) -> Segment {
        self.motifs[0]
    }

    pub fn cardinality(&self) -> usize {
        self.motifs.len()
    }

    pub fn to_motif_set(&self) -> MotifSet {
        MotifSet::new(self.motifs.clone(), self.subscores.clone())
    }
}

/// Projects every path at `alpha` and collects the induced segments.
///
/// Identical induced segments (mirrored paths produce them by construction)
/// are merged keeping the highest subscore. The identity self-path guarantees
/// `alpha` itself is present; it is kept in front as the representative, and
/// the remaining segments sort by descending subscore with ties broken by
/// ascending (start, end).
pub fn generate_candidate_motif_set(alpha: Segment, paths: &[WarpingPath]) -> CandidateMotifSet {
    let mut induced: Vec<(Segment, f64, usize)> = Vec::new();
    for p in paths {
        if let Some(pr) = project_path(p, alpha) {
            induced.push((pr.segment, pr.subscore, pr.cells));
        }
    }
    // merge duplicates keeping the best subscore
    induced.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.partial_cmp(&a.1).expect("finite subscores"))
            .then(a.2.cmp(&b.2))
    });
    induced.dedup_by_key(|entry| entry.0);

    // representative first, rest by descending subscore
    let rep_pos = induced
        .iter()
        .position(|entry| entry.0 == alpha)
        .expect("the identity self-path always induces alpha");
    let rep = induced.remove(rep_pos);
    induced.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite subscores").then(a.0.cmp(&b.0)));

    let mut motifs = Vec::with_capacity(induced.len() + 1);
    let mut subscores = Vec::with_capacity(induced.len() + 1);
    let mut cells = Vec::with_capacity(induced.len() + 1);
    motifs.push(rep.0);
    subscores.push(rep.1);
    cells.push(rep.2);
    for (seg, sub, c) in induced {
        motifs.push(seg);
        subscores.push(sub);
        cells.push(c);
    }
    CandidateMotifSet { motifs, subscores, cells }
}

/// Fitness of a candidate motif set over a series of length `n`: the harmonic
/// mean of the mean per-cell similarity across motifs and the fraction of the
/// time range covered. Lies in [0, 1]; 1 means perfect similarity and full
/// coverage.
pub fn fitness(c: &CandidateMotifSet, n: usize) -> Result<f64> {
    if c.cardinality() < 2 {
        return Err(Error::NotAMotifSet);
    }
    let mut sim = 0.0;
    for (sub, &cells) in c.subscores.iter().zip(&c.cells) {
        sim += sub / cells as f64;
    }
    sim /= c.cardinality() as f64;
    let cov = coverage(&c.to_motif_set())? as f64 / n as f64;
    if sim <= 0.0 || cov <= 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * sim * cov / (sim + cov))
}

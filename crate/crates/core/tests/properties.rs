//! Property tests for the core invariants.

use motifforge::io::{round12, serialize_result, parse_result, RunMeta};
use motifforge::discovery::{DiscoveredSet, DiscoveryResult};
use motifforge::series::{coverage, is_coincident, MotifSet, Segment};
use proptest::prelude::*;

fn segment_strategy(n: usize) -> impl Strategy<Value = Segment> {
    (0..n).prop_flat_map(move |b| (Just(b), b..n)).prop_map(|(b, e)| Segment::new(b, e).unwrap())
}

fn motif_set_strategy(n: usize) -> impl Strategy<Value = MotifSet> {
    proptest::collection::vec(segment_strategy(n), 1..6).prop_map(MotifSet::from_segments)
}

proptest! {
    #[test]
    fn coverage_is_subadditive(a in motif_set_strategy(120), b in motif_set_strategy(120)) {
        let mut joined = a.motifs.clone();
        joined.extend(b.motifs.iter().copied());
        let cu = coverage(&MotifSet::from_segments(joined)).unwrap();
        prop_assert!(cu <= coverage(&a).unwrap() + coverage(&b).unwrap());
    }

    #[test]
    fn coverage_bounded_by_span(m in motif_set_strategy(120)) {
        let cov = coverage(&m).unwrap();
        let total: usize = m.motifs.iter().map(Segment::len).sum();
        prop_assert!(cov <= total);
        prop_assert!(cov <= 120);
        prop_assert!(cov >= m.motifs.iter().map(Segment::len).max().unwrap());
    }

    #[test]
    fn coincidence_at_zero_iff_intersecting(a in segment_strategy(100), b in segment_strategy(100)) {
        let intersects = a.intersection_len(b) > 0;
        prop_assert_eq!(is_coincident(a, b, 0.0).unwrap(), intersects);
        prop_assert_eq!(is_coincident(b, a, 0.0).unwrap(), intersects);
    }

    #[test]
    fn coincidence_at_one_never_holds(a in segment_strategy(100), b in segment_strategy(100)) {
        prop_assert!(!is_coincident(a, b, 1.0).unwrap());
    }

    #[test]
    fn self_coincident_below_one(a in segment_strategy(100), nu in 0.0f64..0.999) {
        prop_assert!(is_coincident(a, a, nu).unwrap());
    }

    #[test]
    fn round12_idempotent(x in -1e12f64..1e12) {
        let r = round12(x);
        prop_assert_eq!(round12(r), r);
    }

    #[test]
    fn result_serialization_round_trips(
        segs in proptest::collection::vec((0usize..500, 1usize..40, 0.0f64..20.0), 2..6),
        fitness in 0.0f64..1.0,
        desirability in 0.0f64..1.0,
    ) {
        let motifs: Vec<Segment> =
            segs.iter().map(|&(b, len, _)| Segment::new(b, b + len).unwrap()).collect();
        let scores: Vec<f64> = segs.iter().map(|&(_, _, s)| round12(s)).collect();
        let set = DiscoveredSet {
            motif_set: MotifSet::new(motifs, scores),
            fitness: round12(fitness),
            desirability: round12(desirability),
            weighted_quality: round12(fitness * desirability),
        };
        let r = DiscoveryResult { motif_sets: vec![Some(set), None], trace: vec![] };
        let meta = RunMeta::new(2, 0.5, 0.25);
        let json = serialize_result(&r, &meta);
        let doc = parse_result(&json, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(doc, motifforge::io::ResultDoc::from_result(&r, &meta));
    }
}

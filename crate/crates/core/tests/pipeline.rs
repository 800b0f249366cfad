//! Library level pipeline tests: synthetic generation feeding discovery and
//! evaluation, plus the representative-mask emulation.

use std::sync::Arc;

use motifforge::constraints::{compile, AppliesTo, BuildContext, ConstraintKind, ConstraintSpec, Mask};
use motifforge::discovery::{discover, DiscoveryConfig};
use motifforge::evaluation::evaluate;
use motifforge::io::{synthesize, PatternSpec, SynthSpec};
use motifforge::loco::LocoParams;
use motifforge::series::MotifSet;

fn config_with(
    kappa: usize,
    nu: f64,
    l_min: usize,
    l_max: usize,
    extra: Vec<ConstraintSpec>,
    x: Arc<motifforge::TimeSeries>,
) -> DiscoveryConfig {
    let mut specs = vec![
        ConstraintSpec::hard(
            ConstraintKind::LengthRange { l_min, l_max, rho_decay: None },
            AppliesTo::All,
        ),
        ConstraintSpec::hard(ConstraintKind::OverlapWithin { nu }, AppliesTo::All),
    ];
    if kappa > 1 {
        specs.push(ConstraintSpec::hard(ConstraintKind::OverlapBetween { nu }, AppliesTo::All));
    }
    specs.extend(extra);
    let compiled = compile(&specs, kappa, &BuildContext::with_series(x)).unwrap();
    DiscoveryConfig {
        kappa,
        loco: LocoParams { rho: 0.6, warping: false, ..Default::default() },
        stride: 1,
        bundles: compiled.bundles,
        desirabilities: compiled.desirabilities,
        pairwise: compiled.pairwise,
        same_for_all: compiled.same_for_all,
    }
}

#[test]
fn exact_copies_recovered_exactly() {
    // no noise, no warp, no jitter: occurrences are exact copies and
    // discovery without warping recovers them
    let spec = SynthSpec {
        n: 700,
        patterns: vec![PatternSpec {
            template_length: 60,
            occurrences: 4,
            amplitude: 3.0,
            jitter: 0,
            warp: 1.0,
        }],
        noise_sigma: 0.0,
        seed: 99,
    };
    let (x, gt) = synthesize(&spec).unwrap();
    let xarc = Arc::new(x.clone());
    let config = config_with(1, 0.25, 30, 120, vec![], xarc);
    let result = discover(&x, &config).unwrap();
    let set = result.motif_sets[0].as_ref().expect("copies discovered");

    // every planted occurrence is matched by a discovered motif with high overlap
    for gt_motif in &gt.groups[0].motifs {
        let hit = set.motif_set.motifs.iter().any(|m| {
            let inter = m.intersection_len(*gt_motif) as f64;
            inter / m.union_len(*gt_motif) as f64 >= 0.9
        });
        assert!(hit, "planted occurrence {gt_motif} not recovered");
    }

    let report = evaluate(std::slice::from_ref(&set.motif_set), &gt, false, 0.5).unwrap();
    assert!(report.f1 >= 0.99, "exact-copy F1 {}", report.f1);
}

#[test]
fn repr_begin_end_masks_constrain_representatives() {
    let spec = SynthSpec {
        n: 600,
        patterns: vec![PatternSpec {
            template_length: 50,
            occurrences: 3,
            amplitude: 3.0,
            jitter: 0,
            warp: 1.0,
        }],
        noise_sigma: 0.05,
        seed: 17,
    };
    let (x, _) = synthesize(&spec).unwrap();
    let n = x.len();
    let xarc = Arc::new(x.clone());

    // restrict representative starts to even indices and ends to odd ones
    let begin: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let end: Vec<f64> = (0..n).map(|i| if i % 2 == 1 { 1.0 } else { 0.0 }).collect();
    let spec_c = ConstraintSpec::hard(
        ConstraintKind::ReprBeginEndMasks {
            begin: Mask::new(begin.clone()).unwrap(),
            end: Mask::new(end.clone()).unwrap(),
        },
        AppliesTo::All,
    );
    let config = config_with(1, 0.25, 20, 100, vec![spec_c], xarc);
    let result = discover(&x, &config).unwrap();
    if let Some(set) = result.motif_sets[0].as_ref() {
        let rep = set.representative();
        assert_eq!(begin[rep.start()], 1.0);
        assert_eq!(end[rep.end()], 1.0);
    }
}

#[test]
fn sampling_mask_weights_representative_end() {
    let spec = SynthSpec {
        n: 500,
        patterns: vec![PatternSpec {
            template_length: 40,
            occurrences: 3,
            amplitude: 3.0,
            jitter: 0,
            warp: 1.0,
        }],
        noise_sigma: 0.05,
        seed: 23,
    };
    let (x, _) = synthesize(&spec).unwrap();
    let n = x.len();
    let xarc = Arc::new(x.clone());
    let mask: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let spec_c = ConstraintSpec::soft(
        ConstraintKind::SamplingMask { mask: Mask::new(mask.clone()).unwrap() },
        AppliesTo::All,
    );
    let config = config_with(1, 0.25, 20, 80, vec![spec_c], xarc);
    let result = discover(&x, &config).unwrap();
    if let Some(set) = result.motif_sets[0].as_ref() {
        // desirability recorded at selection equals the mask at the
        // representative's end index
        let expected = mask[set.representative().end()];
        assert!((set.desirability - expected).abs() < 1e-12);
    }
}

#[test]
fn discovered_sets_are_sorted_by_score_with_representative_first() {
    let spec = SynthSpec {
        n: 800,
        patterns: vec![
            PatternSpec { template_length: 60, occurrences: 4, amplitude: 3.0, jitter: 0, warp: 1.0 },
        ],
        noise_sigma: 0.1,
        seed: 31,
    };
    let (x, _) = synthesize(&spec).unwrap();
    let xarc = Arc::new(x.clone());
    let config = config_with(1, 0.25, 30, 120, vec![], xarc);
    let result = discover(&x, &config).unwrap();
    let set: &MotifSet = &result.motif_sets[0].as_ref().unwrap().motif_set;
    assert!(set.cardinality() >= 2);
    for w in set.scores.windows(2) {
        assert!(w[0] >= w[1], "scores not nonincreasing: {:?}", set.scores);
    }
}

#[test]
fn warped_occurrences_recovered_with_warping_enabled() {
    // occurrences stretched up to 15% with boundary jitter; discovery with
    // time warping still aligns them to the planted ground truth
    for seed in [11_000u64, 11_001, 11_002] {
        let spec = SynthSpec {
            n: 900,
            patterns: vec![PatternSpec {
                template_length: 60,
                occurrences: 4,
                amplitude: 3.0,
                jitter: 2,
                warp: 1.15,
            }],
            noise_sigma: 0.05,
            seed,
        };
        let (x, gt) = synthesize(&spec).unwrap();
        let xarc = Arc::new(x.clone());
        let mut config = config_with(1, 0.25, 40, 90, vec![], xarc);
        config.loco = LocoParams { rho: 0.55, warping: true, ..Default::default() };
        let result = discover(&x, &config).unwrap();
        let sets: Vec<MotifSet> =
            result.motif_sets.iter().flatten().map(|s| s.motif_set.clone()).collect();
        let f1 = evaluate(&sets, &gt, false, 0.5).unwrap().f1;
        assert!(f1 >= 0.9, "seed {seed}: warped recovery F1 {f1}");
    }
}

#[test]
fn multivariate_series_discovery() {
    // two dimensions carrying a planted pattern over a fast walk background
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let n = 500;
    let copy_len = 50;
    let template: Vec<(f64, f64)> = {
        let (mut a, mut b) = (0.0, 0.0);
        (0..copy_len)
            .map(|_| {
                a += rng.random_range(-1.0..1.0);
                b += rng.random_range(-1.0..1.0);
                (a, b)
            })
            .collect()
    };
    let mut values = Vec::with_capacity(n * 2);
    let (mut a, mut b) = (0.0, 0.0);
    for _ in 0..n {
        a += rng.random_range(-4.0..4.0);
        b += rng.random_range(-4.0..4.0);
        values.push(a);
        values.push(b);
    }
    for &start in &[100usize, 330] {
        for (k, &(ta, tb)) in template.iter().enumerate() {
            values[(start + k) * 2] = ta;
            values[(start + k) * 2 + 1] = tb;
        }
    }
    let x = motifforge::TimeSeries::new(values, n, 2).unwrap();
    let xarc = Arc::new(x.clone());
    let config = config_with(1, 0.25, 30, 80, vec![], xarc);
    let result = discover(&x, &config).unwrap();
    let set = result.motif_sets[0].as_ref().expect("multivariate copies found");
    for &start in &[100usize, 330] {
        assert!(set.motif_set.motifs.iter().any(|m| {
            m.start().abs_diff(start) <= 2 && m.end().abs_diff(start + copy_len - 1) <= 2
        }));
    }
}

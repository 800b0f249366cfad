//! Command-line surface: `discover`, `eval`, `synth`, and `selfcheck`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
//! error.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::{discovery, evaluation, io};

#[derive(Debug, Parser)]
#[command(name = "motifforge", version, about = "Constrained time series motif discovery")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discover motif sets in a CSV series under a JSON config.
    Discover {
        /// Input series CSV (one row per sample, one column per dimension).
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        /// Discovery config JSON.
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        /// Output result JSON.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Optional TSV of discovered spans (start, end, set, rank).
        #[arg(long)]
        spans: Option<PathBuf>,
        /// Bound the parallel candidate scan; output is independent of this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Score a result against ground truth; prints a report JSON on stdout.
    Eval {
        #[arg(short = 'r', long = "result")]
        result: PathBuf,
        #[arg(short = 'g', long = "ground-truth")]
        gt: PathBuf,
        /// Ignore discovered motif sets that match no ground-truth group.
        #[arg(long = "ignore-unmatched")]
        ignore_unmatched: bool,
        /// Jaccard threshold for motif matching.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Generate a synthetic series with planted patterns.
    Synth {
        /// Synthesis spec JSON.
        #[arg(short = 's', long = "spec")]
        spec: PathBuf,
        /// Output series CSV.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Output ground-truth JSON.
        #[arg(short = 'g', long = "ground-truth")]
        gt: PathBuf,
    },
    /// Run the built-in invariant suite.
    Selfcheck,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InfeasibleSynth(_) | Error::InvalidParam(_)
        | Error::InvalidOverlapParameter(_) | Error::InvalidGamma(_) | Error::InvalidMask(_) => 2,
        Error::Data { .. } | Error::InvalidSeries(_) | Error::SeriesTooLong { .. } => 3,
        _ => 4,
    }
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn write_file(path: &PathBuf, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::data(path.clone(), e.to_string()))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Discover { input, config, output, spans, threads } => {
            let series = io::load_time_series(&input)?;
            let cap = io::series_cap();
            if series.len() > cap {
                return Err(Error::SeriesTooLong { n: series.len(), cap });
            }
            let config_text = std::fs::read_to_string(&config)
                .map_err(|e| Error::data(config.clone(), e.to_string()))?;
            let base_dir = config.parent().map(|p| p.to_path_buf()).unwrap_or_default();
            let series = Arc::new(series);
            let (dconfig, meta) = io::parse_config(&config_text, series.clone(), Some(&base_dir))?;

            let result = match threads {
                Some(t) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build()
                        .map_err(|e| Error::Internal(e.to_string()))?;
                    pool.install(|| discovery::discover(&series, &dconfig))?
                }
                None => discovery::discover(&series, &dconfig)?,
            };

            write_file(&output, &io::serialize_result(&result, &meta))?;
            if let Some(spans_path) = spans {
                write_file(&spans_path, &io::spans_tsv(&result))?;
            }
            Ok(())
        }
        Command::Eval { result, gt, ignore_unmatched, threshold } => {
            if !(0.0 < threshold && threshold <= 1.0) {
                return Err(Error::config("--threshold", "threshold must lie in (0, 1]"));
            }
            let text = std::fs::read_to_string(&result)
                .map_err(|e| Error::data(result.clone(), e.to_string()))?;
            let doc = io::parse_result(&text, &result)?;
            let ground_truth = io::load_ground_truth(&gt)?;
            let sets: Vec<crate::series::MotifSet> =
                doc.to_motif_sets()?.into_iter().map(|(_, m)| m).collect();
            let report = evaluation::evaluate(&sets, &ground_truth, ignore_unmatched, threshold)?;
            print!("{}", io::report_to_json(&report));
            Ok(())
        }
        Command::Synth { spec, output, gt } => {
            let synth_spec = io::load_synth_spec(&spec)?;
            let (series, ground_truth) = io::synthesize(&synth_spec)?;
            write_file(&output, &io::series_to_csv(&series))?;
            write_file(&gt, &io::gt_to_json(&ground_truth))?;
            Ok(())
        }
        Command::Selfcheck => selfcheck(),
    }
}

// --- selfcheck --------------------------------------------------------------

fn selfcheck() -> Result<()> {
    let mut failures = 0;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    check("coverage subadditive on random motif sets", check_coverage_subadditive());
    check("nu-coincidence endpoint behavior", check_coincidence());
    check("search-space digit counts", check_search_space());
    check("candidate filter matches its transcription", check_filter_transcription());
    check("discovery is deterministic", check_determinism());

    if failures == 0 {
        Ok(())
    } else {
        Err(Error::Internal(format!("{failures} selfcheck(s) failed")))
    }
}

fn check_coverage_subadditive() -> bool {
    use crate::series::{coverage, MotifSet, Segment};
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let rand_set = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Segment> {
            (0..rng.random_range(1..5))
                .map(|_| {
                    let b = rng.random_range(0..80);
                    Segment::new(b, b + rng.random_range(0..10)).unwrap()
                })
                .collect()
        };
        let a = rand_set(&mut rng);
        let b = rand_set(&mut rng);
        let mut union = a.clone();
        union.extend(b.iter().copied());
        let ca = coverage(&MotifSet::from_segments(a)).unwrap();
        let cb = coverage(&MotifSet::from_segments(b)).unwrap();
        let cu = coverage(&MotifSet::from_segments(union)).unwrap();
        if cu > ca + cb {
            return false;
        }
    }
    true
}

fn check_coincidence() -> bool {
    use crate::series::{is_coincident, Segment};
    let a = Segment::new(0, 9).unwrap();
    let b = Segment::new(5, 14).unwrap();
    let c = Segment::new(20, 24).unwrap();
    is_coincident(a, b, 0.0).unwrap()
        && !is_coincident(a, c, 0.0).unwrap()
        && !is_coincident(a, a, 1.0).unwrap()
        && is_coincident(a, a, 0.99).unwrap()
}

fn check_search_space() -> bool {
    use crate::series::search_space_digit_count;
    search_space_digit_count(100, 2).big_o_digits == 6021
        && search_space_digit_count(2, 1).exact_digits == 1
        && search_space_digit_count(1, 1).empty
}

fn check_filter_transcription() -> bool {
    use crate::candidates::CandidateMotifSet;
    use crate::discovery::filter_candidate_motif_set;
    use crate::series::Segment;
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let k = rng.random_range(1..10);
        let mut subs: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..10.0)).collect();
        subs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let c = CandidateMotifSet {
            motifs: (0..k)
                .map(|_| {
                    let b = rng.random_range(0..60);
                    Segment::new(b, b + rng.random_range(0..8)).unwrap()
                })
                .collect(),
            subscores: subs,
            cells: (0..k).map(|_| rng.random_range(1..9)).collect(),
        };
        let h_mot = |s: Segment| s.len() >= 2;
        let h_same = |a: Segment, b: Segment| a.intersection_len(b) == 0;
        let cap = rng.random_range(1..5usize);
        let got = filter_candidate_motif_set(&c, &h_mot, &h_same, Some(cap));
        // direct transcription of the greedy filter
        let mut kept: Vec<Segment> = Vec::new();
        for &beta in &c.motifs {
            if kept.len() < cap && h_mot(beta) && kept.iter().all(|&p| h_same(beta, p)) {
                kept.push(beta);
            }
        }
        if got.motifs != kept {
            return false;
        }
    }
    true
}

fn check_determinism() -> bool {
    use crate::discovery::{discover, DiscoveryConfig};
    use crate::io::{serialize_result, RunMeta, SynthSpec};
    use crate::loco::LocoParams;
    let spec = SynthSpec {
        n: 300,
        patterns: vec![crate::io::PatternSpec {
            template_length: 40,
            occurrences: 2,
            amplitude: 3.0,
            jitter: 0,
            warp: 1.0,
        }],
        noise_sigma: 0.0,
        seed: 5,
    };
    let Ok((x, _)) = crate::io::synthesize(&spec) else { return false };
    let config = DiscoveryConfig::unconstrained(1, LocoParams { rho: 0.6, ..Default::default() });
    let meta = RunMeta::new(1, 0.6, 0.25);
    let Ok(r1) = discover(&x, &config) else { return false };
    let Ok(r2) = discover(&x, &config) else { return false };
    serialize_result(&r1, &meta) == serialize_result(&r2, &meta)
}

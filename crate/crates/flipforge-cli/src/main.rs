use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use flipforge::approx::{approx_transform, FixedEdgeReport};
use flipforge::comb::{self, CombDoc};
use flipforge::convex::{self, TriangulationDoc};
use flipforge::oracle::{self, Mode};
use flipforge::sortmodels::{quicksort_noncontiguous, Permutation};
use flipforge::{gen, parallel, CombTriangulation, FlipSequence, LabelledTriangulation, SimFlipSequence};

#[derive(Parser)]
#[command(name = "flipforge", version, about = "Flip sequences between edge-labelled triangulations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a random instance as JSON.
    Gen {
        #[arg(value_enum)]
        kind: Kind,
        /// Diagonal count for convex kinds, vertex count for comb.
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute and verify a flip sequence from A to B.
    Transform {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Sequential)]
        algo: Algo,
    },
    /// Exact (small instances) or approximate flip distance.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, conflicts_with = "approx")]
        exact: bool,
        #[arg(long)]
        approx: bool,
    },
    /// Benchmark a suite; CSV on standard output.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sizes: Vec<usize>,
        /// Seeds 0..N.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Write 0 for wall time so output is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Replay a sequence; exit status 0 iff it reaches the target.
    Verify { start: PathBuf, seq: PathBuf, target: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Convex,
    Comb,
    Redblue,
    FanPerm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Sequential,
    Simultaneous,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Sequential,
    Simultaneous,
    Sortmodels,
    Comb,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum Instance {
    Convex(TriangulationDoc),
    Comb(CombDoc),
}

enum State {
    Convex(LabelledTriangulation),
    Comb(CombTriangulation),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnySequence {
    Sim(SimFlipSequence),
    Single(FlipSequence),
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_state(path: &Path) -> Result<State> {
    Ok(match read_json::<Instance>(path)? {
        Instance::Convex(d) => State::Convex(LabelledTriangulation::try_from(&d)?),
        Instance::Comb(d) => State::Comb(CombTriangulation::try_from(&d)?),
    })
}

fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_gen(kind: Kind, size: usize, seed: u64) -> Result<()> {
    let mut rng = gen::rng(seed);
    let doc = match kind {
        Kind::Convex => Instance::Convex((&gen::random_labelled(size + 3, &mut rng)?).into()),
        Kind::FanPerm => Instance::Convex((&gen::random_fan(size, &mut rng)?).into()),
        Kind::Redblue => {
            if size == 0 {
                bail!(flipforge::Error::BadSize("red/blue needs at least one edge".into()));
            }
            Instance::Convex((&parallel::red_blue(size)).into())
        }
        Kind::Comb => Instance::Comb((&gen::random_comb(size, &mut rng)?).into()),
    };
    print_json(&doc)
}

fn cmd_transform(a: &Path, b: &Path, algo: Algo) -> Result<()> {
    match (read_state(a)?, read_state(b)?) {
        (State::Convex(a), State::Convex(b)) => match algo {
            Algo::Sequential => {
                let seq = convex::transform_between(&a, &b)?;
                convex::verify_sequence(&a, &seq, &b).map_err(|f| anyhow::anyhow!("verification failed: {f}"))?;
                print_json(&json!({ "sequence": seq, "cost": seq.cost(), "verified": true }))
            }
            Algo::Simultaneous => {
                let seq = parallel::sim_transform_between(&a, &b)?;
                parallel::verify_sim(&a, &seq, &b).map_err(|f| anyhow::anyhow!("verification failed: {f}"))?;
                print_json(&json!({ "sequence": seq, "cost": seq.cost(), "flips": seq.flips(), "verified": true }))
            }
            Algo::Approx => {
                let (seq, report): (FlipSequence, FixedEdgeReport) = approx_transform(&a, &b)?;
                print_json(&json!({
                    "sequence": seq,
                    "cost": seq.cost(),
                    "lower_bound": report.lower_bound,
                    "report": report,
                    "verified": true,
                }))
            }
        },
        (State::Comb(a), State::Comb(b)) => {
            if algo != Algo::Sequential {
                bail!("combinatorial inputs support only --algo sequential");
            }
            let seq = comb::comb_transform(&a, &b)?;
            let mut end = a.clone();
            end.apply(&seq).map_err(|f| anyhow::anyhow!("verification failed: {f}"))?;
            if !comb::labelled_isomorphic(&end, &b) {
                bail!("verification failed: final state is not isomorphic to the target");
            }
            print_json(&json!({ "sequence": seq, "cost": seq.cost(), "verified": true, "up_to_isomorphism": true }))
        }
        _ => bail!("inputs must both be convex or both combinatorial"),
    }
}

fn cmd_distance(a: &Path, b: &Path, approx: bool) -> Result<()> {
    match (read_state(a)?, read_state(b)?) {
        (State::Convex(a), State::Convex(b)) if approx => {
            let (seq, report) = approx_transform(&a, &b)?;
            print_json(&json!({ "upper": seq.cost(), "lower": report.lower_bound }))
        }
        (State::Convex(a), State::Convex(b)) => {
            let d = oracle::exact_distance(&a, &b, Mode::ConvexLabelled)?;
            print_json(&json!({ "distance": d, "mode": "convex-labelled", "m": a.m() }))
        }
        (State::Comb(a), State::Comb(b)) if !approx => {
            let d = oracle::comb_exact_distance(&a, &b)?;
            print_json(&json!({ "distance": d, "mode": "comb-labelled", "v": a.v() }))
        }
        (State::Comb(_), State::Comb(_)) => bail!("approximate distance is defined for convex inputs only"),
        _ => bail!("inputs must both be convex or both combinatorial"),
    }
}

fn cmd_verify(start: &Path, seq: &Path, target: &Path) -> Result<bool> {
    let seq: AnySequence = read_json(seq)?;
    let verdict = match (read_state(start)?, seq, read_state(target)?) {
        (State::Convex(a), AnySequence::Single(s), State::Convex(b)) => convex::verify_sequence(&a, &s, &b),
        (State::Convex(a), AnySequence::Sim(s), State::Convex(b)) => parallel::verify_sim(&a, &s, &b),
        (State::Comb(a), AnySequence::Single(s), State::Comb(b)) => {
            let mut end = a.clone();
            end.apply(&s).and_then(|()| {
                if end == b {
                    Ok(())
                } else {
                    Err(convex::ReplayFailure { step: None, reason: "final state differs from target".into() })
                }
            })
        }
        _ => bail!("start, sequence and target kinds do not match"),
    };
    match verdict {
        Ok(()) => {
            println!("ok");
            Ok(true)
        }
        Err(f) => {
            println!("failed: {f}");
            Ok(false)
        }
    }
}

struct Row {
    algo: &'static str,
    n: usize,
    seed: u64,
    cost: i64,
    micros: u128,
}

fn bench_cell(suite: Suite, n: usize, seed: u64) -> Vec<Row> {
    let mut rng = gen::rng(seed);
    let mut rows = Vec::new();
    let mut run = |algo: &'static str, f: &mut dyn FnMut() -> flipforge::Result<usize>| {
        let t = Instant::now();
        let cost = match f() {
            Ok(c) => c as i64,
            Err(e) => {
                eprintln!("{algo} n={n} seed={seed}: {e}");
                -1
            }
        };
        rows.push(Row { algo, n, seed, cost, micros: t.elapsed().as_micros() });
    };
    let replay_err = |f: convex::ReplayFailure| flipforge::Error::InvalidTriangulation(f.to_string());
    match suite {
        Suite::Sequential => run("transform_between", &mut || {
            let a = gen::random_labelled(n + 3, &mut rng)?;
            let b = gen::random_labelled(n + 3, &mut rng)?;
            let seq = convex::transform_between(&a, &b)?;
            convex::verify_sequence(&a, &seq, &b).map_err(replay_err)?;
            Ok(seq.cost())
        }),
        Suite::Simultaneous => {
            run("sim_canonicalize_unlabelled", &mut || {
                let a = gen::random_labelled(n + 3, &mut rng)?;
                let (seq, f) = parallel::sim_canonicalize_unlabelled(&a);
                parallel::verify_sim(&a, &seq, &f).map_err(replay_err)?;
                Ok(seq.cost())
            });
            run("sim_sort_fan", &mut || {
                let a = gen::random_fan(n, &mut rng)?;
                let mut s = a.clone();
                let seq = parallel::sim_sort_fan(&mut s)?;
                let sorted: Vec<usize> = (1..=n).collect();
                parallel::verify_sim(&a, &seq, &LabelledTriangulation::from_fan(&sorted)?).map_err(replay_err)?;
                Ok(seq.cost())
            });
        }
        Suite::Sortmodels => run("quicksort_noncontiguous", &mut || {
            let p = Permutation::new(gen::random_permutation(n, &mut rng))?;
            let (s, ledger) = quicksort_noncontiguous(&p);
            if !s.is_sorted() {
                return Err(flipforge::Error::InvalidTriangulation("quicksort did not sort".into()));
            }
            Ok(ledger.total)
        }),
        Suite::Comb => run("comb_canonicalize", &mut || {
            let t = gen::random_comb(n, &mut rng)?;
            let c = comb::comb_canonicalize(&t)?;
            let seq = c.sequence();
            let mut end = t.clone();
            end.apply(&seq).map_err(replay_err)?;
            if !comb::labelled_isomorphic(&end, &comb::double_wheel(n)?) {
                return Err(flipforge::Error::InvalidTriangulation("not the double wheel".into()));
            }
            Ok(seq.cost())
        }),
    }
    rows
}

fn cmd_bench(suite: Suite, sizes: &[usize], seeds: u64, no_timing: bool) -> Result<()> {
    let cells: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| (0..seeds).map(move |s| (n, s))).collect();
    let mut rows: Vec<Row> = cells.par_iter().flat_map(|&(n, s)| bench_cell(suite, n, s)).collect();
    rows.sort_by_key(|r| (r.algo, r.n, r.seed));
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["algo", "n", "seed", "cost", "wall_micros"])?;
    for r in rows {
        let micros = if no_timing { 0 } else { r.micros };
        w.write_record([r.algo.to_string(), r.n.to_string(), r.seed.to_string(), r.cost.to_string(), micros.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Gen { kind, size, seed } => cmd_gen(kind, size, seed).map(|()| true),
        Cmd::Transform { a, b, algo } => cmd_transform(&a, &b, algo).map(|()| true),
        Cmd::Distance { a, b, approx, .. } => cmd_distance(&a, &b, approx).map(|()| true),
        Cmd::Bench { suite, sizes, seeds, no_timing } => cmd_bench(suite, &sizes, seeds, no_timing).map(|()| true),
        Cmd::Verify { start, seq, target } => cmd_verify(&start, &seq, &target),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Acceptance criteria 1 to 9. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::time::Instant;

use rand::Rng;

use flipforge::approx::{approx_transform, ceil_log2};
use flipforge::comb::{comb_canonicalize, double_wheel, labelled_isomorphic};
use flipforge::config;
use flipforge::convex::{transform_between, verify_sequence};
use flipforge::gen;
use flipforge::labelsort::{self, FanBlock, PENTAGON_SCRIPT};
use flipforge::oracle::{self, Mode};
use flipforge::parallel;
use flipforge::sortmodels::{self, Permutation};
use flipforge::{LabelledTriangulation, SimFlipSequence};

const SEEDS: u64 = 200;
const SMALL_SIZES: std::ops::RangeInclusive<usize> = 2..=64;
const SPOT_SIZES: [usize; 3] = [128, 512, 4096];
const BLOCKS: usize = 10_000;
const TRANSLATIONS: usize = 10_000;
const SAMPLED_PAIRS_M7: usize = 1_000;

fn transform_bound(n: usize) -> usize {
    2 * n + 5 * n * (ceil_log2(n) + 1)
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

/// One run of every emitting algorithm at size `n` and a seed.
struct Run {
    n: usize,
    transform_len: usize,
    valid: [bool; 4],
    sim_rounds: usize,
    comb_v: usize,
    comb_labelled: usize,
}

fn run_all(n: usize, seed: u64, comb_v: usize) -> Run {
    let mut rng = gen::rng(seed.wrapping_mul(1_000_003).wrapping_add(n as u64));
    let a = gen::random_labelled(n + 3, &mut rng).unwrap();
    let b = gen::random_labelled(n + 3, &mut rng).unwrap();
    let seq = transform_between(&a, &b).unwrap();
    let v_transform = verify_sequence(&a, &seq, &b).is_ok();
    let v_approx = approx_transform(&a, &b).is_ok_and(|(s, _)| verify_sequence(&a, &s, &b).is_ok());

    let fan = gen::random_fan(n, &mut rng).unwrap();
    let mut s = fan.clone();
    let sim = parallel::sim_sort_fan(&mut s).unwrap();
    let sorted = LabelledTriangulation::from_fan(&(1..=n).collect::<Vec<_>>()).unwrap();
    let v_sim = parallel::verify_sim(&fan, &sim, &sorted).is_ok();

    let c = gen::random_comb(comb_v, &mut rng).unwrap();
    let canon = comb_canonicalize(&c).unwrap();
    let mut end = c.clone();
    let v_comb = end.apply(&canon.sequence()).is_ok() && labelled_isomorphic(&end, &double_wheel(comb_v).unwrap());

    Run {
        n,
        transform_len: seq.cost(),
        valid: [v_transform, v_approx, v_sim, v_comb],
        sim_rounds: sim.cost(),
        comb_v,
        comb_labelled: canon.labelled.len(),
    }
}

fn criterion1(runs: &[Run]) -> Verdict {
    let names = ["transform_between", "approx_transform", "sim_sort_fan", "comb_canonicalize"];
    let bad: Vec<String> = (0..4)
        .filter_map(|k| {
            let f = runs.iter().filter(|r| !r.valid[k]).count();
            (f > 0).then(|| format!("{}: {f} failed", names[k]))
        })
        .collect();
    verdict(bad.is_empty(), format!("{} runs x 4 algorithms; {}", runs.len(), if bad.is_empty() { "all replay-verified".into() } else { bad.join(", ") }))
}

fn criterion2(runs: &[Run]) -> Verdict {
    let mut worst = 0.0f64;
    let mut bad = 0;
    for r in runs {
        let b = transform_bound(r.n);
        worst = worst.max(r.transform_len as f64 / b as f64);
        bad += usize::from(r.transform_len > b);
    }
    verdict(bad == 0, format!("{} runs up to n = 4096; worst length / bound = {worst:.3}", runs.len()))
}

fn criterion3() -> Verdict {
    let mut rng = gen::rng(3);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..BLOCKS {
        let n = rng.gen_range(2..=1024);
        let lo = rng.gen_range(0..n);
        let width = rng.gen_range(1..=n);
        let hi = rng.gen_range(lo..n.min(lo + width));
        let p: f64 = rng.gen();
        let sub: Vec<usize> = (lo..=hi).filter(|_| rng.gen::<f64>() < p).collect();
        let perm = gen::random_permutation(n, &mut rng);
        let mut s = LabelledTriangulation::from_fan(&perm).unwrap();
        let block = FanBlock::new(lo, hi, sub.clone());
        let len = labelsort::reverse_subsequence(&mut s, &block).unwrap().len();
        let mut expect = perm.clone();
        for (i, &x) in sub.iter().enumerate() {
            expect[x] = perm[sub[sub.len() - 1 - i]];
        }
        let size = hi - lo + 1;
        worst = worst.max(len as f64 / (5 * size) as f64);
        bad += usize::from(len > 5 * size || s.fan_permutation().unwrap() != expect);
    }
    verdict(bad == 0, format!("{BLOCKS} blocks; worst length / 5|S| = {worst:.3}"))
}

fn criterion4() -> Verdict {
    let a = LabelledTriangulation::from_fan(&[2, 1]).unwrap();
    let b = LabelledTriangulation::from_fan(&[1, 2]).unwrap();
    let mut s = a.clone();
    let script = labelsort::pentagon_swap(&mut s, 0).unwrap();
    let exact = oracle::exact_distance(&a, &b, Mode::ConvexLabelled).unwrap();
    verdict(
        PENTAGON_SCRIPT.len() == 5 && script.len() == 5 && s == b && exact <= 5,
        format!("gadget length {}, exact distance at m = 5 is {exact}", script.len()),
    )
}

/// Distances from `src` to every labelled state.
fn bfs_all(src: &LabelledTriangulation) -> HashMap<Vec<u8>, usize> {
    let mut dist = HashMap::from([(oracle::state_key(src), 0)]);
    let mut q = VecDeque::from([src.clone()]);
    while let Some(s) = q.pop_front() {
        let d = dist[&oracle::state_key(&s)];
        for (diag, _) in s.entries() {
            let mut t = s.clone();
            t.flip_diagonal(diag).unwrap();
            let k = oracle::state_key(&t);
            if !dist.contains_key(&k) {
                dist.insert(k, d + 1);
                q.push_back(t);
            }
        }
    }
    dist
}

fn criterion5() -> Verdict {
    let mut checked = 0;
    let mut bad = 0;
    let mut worst = 0.0f64;
    let mut check = |a: &LabelledTriangulation, b: &LabelledTriangulation, exact: usize| {
        let (seq, report) = approx_transform(a, b).unwrap();
        let n = a.n();
        let lb = report.lower_bound;
        let len = seq.cost();
        let ok = lb <= exact && exact <= len && len <= (5 * ceil_log2(n) + 7) * lb.max(1);
        if exact > 0 {
            worst = worst.max(len as f64 / exact as f64);
        }
        checked += 1;
        bad += usize::from(!ok);
    };
    for m in [5, 6] {
        let all = oracle::all_labelled(m);
        for a in &all {
            let d = bfs_all(a);
            for b in &all {
                check(a, b, d[&oracle::state_key(b)]);
            }
        }
    }
    let all = oracle::all_labelled(7);
    let mut rng = gen::rng(5);
    let mut by_source: HashMap<usize, Vec<usize>> = HashMap::new();
    for _ in 0..SAMPLED_PAIRS_M7 {
        by_source.entry(rng.gen_range(0..all.len())).or_default().push(rng.gen_range(0..all.len()));
    }
    for (i, targets) in by_source {
        let d = bfs_all(&all[i]);
        for j in targets {
            check(&all[i], &all[j], d[&oracle::state_key(&all[j])]);
        }
    }
    verdict(bad == 0, format!("{checked} pairs at m = 5, 6, 7; worst approx / exact = {worst:.2}"))
}

fn criterion6(runs: &[Run]) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut worst_canon = 0.0f64;
    for &n in &[2usize, 8, 64, 512, 4096] {
        for seed in 0..5 {
            let s = gen::random_labelled(n + 3, &mut gen::rng(seed)).unwrap();
            let (seq, f) = parallel::sim_canonicalize_unlabelled(&s);
            ok &= f.tri().is_fan() && parallel::verify_sim(&s, &seq, &f).is_ok();
            ok &= seq.cost() as f64 <= config::sim_canon_bound(n);
            worst_canon = worst_canon.max(seq.cost() as f64 / config::sim_canon_bound(n));
        }
    }
    notes.push(format!("canonicalize worst rounds / bound = {worst_canon:.2}"));
    let mut worst_sort = 0.0f64;
    for r in runs {
        ok &= r.sim_rounds as f64 <= config::sim_sort_bound(r.n);
        worst_sort = worst_sort.max(r.sim_rounds as f64 / config::sim_sort_bound(r.n));
    }
    notes.push(format!("sort worst rounds / bound = {worst_sort:.2}"));
    let mut cert_ok = true;
    for n in [2usize, 3, 7, 16, 33, 100, 512, 4096] {
        let start = parallel::red_blue(n);
        let mut s = start.clone();
        let seq: SimFlipSequence = parallel::sim_sort_fan(&mut s).unwrap();
        let cert = parallel::check_crossing_certificate(&start, &seq);
        let need = ceil_log2(n + 1).saturating_sub(1);
        cert_ok &= cert.is_ok() && seq.cost() >= need;
        cert_ok &= seq.cost() as f64 <= config::sim_sort_bound(n);
    }
    ok &= cert_ok;
    notes.push(format!("red/blue certificates {}", if cert_ok { "hold" } else { "FAIL" }));
    verdict(ok, notes.join("; "))
}

fn criterion7() -> Verdict {
    let mut ok = true;
    let mut worst = 0.0f64;
    for &n in &[1usize, 2, 3, 8, 100, 1000, 1024, 4096] {
        for seed in 0..10 {
            let p = Permutation::new(gen::random_permutation(n, &mut gen::rng(seed))).unwrap();
            let (s, ledger) = sortmodels::quicksort_noncontiguous(&p);
            let bound = n * (ceil_log2(n) + 1);
            ok &= s.is_sorted() && ledger.total <= bound;
            worst = worst.max(ledger.total as f64 / bound.max(1) as f64);
        }
    }
    let mut rng = gen::rng(7);
    let mut mismatches = 0;
    for _ in 0..TRANSLATIONS {
        let n = rng.gen_range(2..=64);
        let p = Permutation::new(gen::random_permutation(n, &mut rng)).unwrap();
        let i = rng.gen_range(1..n);
        let j = rng.gen_range(i + 1..=n);
        let mut l1 = sortmodels::CostLedger::default();
        let mut l2 = sortmodels::CostLedger::default();
        let mut l3 = sortmodels::CostLedger::default();
        let direct = sortmodels::apply_contiguous_reversal(&p, i, j, &mut l1).unwrap();
        let r = sortmodels::contiguous_as_noncontiguous(i, j);
        let via = sortmodels::apply_noncontiguous_reversal(&p, &r, &mut l2).unwrap();
        let sub: Vec<usize> = (i..=j).filter(|_| rng.gen::<bool>()).collect();
        let r2 = sortmodels::NoncontiguousReversal { interval: (i, j), subsequence: sub };
        let a = sortmodels::apply_noncontiguous_reversal(&p, &r2, &mut l3).unwrap();
        let mut l4 = sortmodels::CostLedger::default();
        let b = sortmodels::apply_swap_set(&p, &sortmodels::noncontiguous_as_swap_set(&r2), &mut l4).unwrap();
        let costs_match = l1.total == l2.total && l3.total == l4.total;
        mismatches += usize::from(direct != via || a != b || !costs_match);
    }
    ok &= mismatches == 0;
    verdict(ok, format!("worst ledger / n(ceil log2 n + 1) = {worst:.2}; {TRANSLATIONS} translations, {mismatches} mismatches"))
}

fn criterion8() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in 3..=8 {
        let catalan = (0..m - 2).fold(1usize, |c, i| c * 2 * (2 * i + 1) / (i + 2));
        let fact: usize = (1..=m - 3).product();
        ok &= oracle::count_labelled_states(m).unwrap() == catalan * fact;
    }
    notes.push("labelled state counts match for m <= 8".to_string());
    let mut diams = Vec::new();
    for m in 4..=14 {
        let d = oracle::diameter(Mode::ConvexUnlabelled, m).unwrap();
        // The bound counts polygon vertices and applies from 13 vertices on.
        if m >= 13 {
            ok &= d <= 2 * m - 10;
        }
        diams.push(format!("{m}:{d}"));
    }
    notes.push(format!("unlabelled diameters {}", diams.join(" ")));
    verdict(ok, notes.join("; "))
}

fn criterion9(runs: &[Run]) -> Verdict {
    let mut worst = 0.0f64;
    let mut bad = 0;
    let mut count = 0;
    for r in runs.iter().filter(|r| r.comb_v <= 64) {
        let b = config::comb_bound(r.comb_v);
        worst = worst.max(r.comb_labelled as f64 / b);
        bad += usize::from(r.comb_labelled as f64 > b || !r.valid[3]);
        count += 1;
    }
    verdict(bad == 0, format!("{count} runs with v <= 64; worst labelled flips / (C v log2 v) = {worst:.3}"))
}

#[test]
fn acceptance() {
    let t = Instant::now();
    let mut runs = Vec::new();
    for n in SMALL_SIZES {
        for seed in 0..SEEDS {
            // Combinatorial sizes 5..=64 cycle with the seed.
            runs.push(run_all(n, seed, 5 + (n - 2 + seed as usize) % 60));
        }
    }
    for &n in &SPOT_SIZES {
        runs.push(run_all(n, 0, n + 3));
    }
    for n in [16usize, 256, 1024, 2048, 4096] {
        for seed in 1..3 {
            let mut rng = gen::rng(seed);
            let a = gen::random_labelled(n + 3, &mut rng).unwrap();
            let b = gen::random_labelled(n + 3, &mut rng).unwrap();
            let seq = transform_between(&a, &b).unwrap();
            runs.push(Run {
                n,
                transform_len: seq.cost(),
                valid: [verify_sequence(&a, &seq, &b).is_ok(), true, true, true],
                sim_rounds: 0,
                comb_v: usize::MAX,
                comb_labelled: 0,
            });
        }
    }
    let validity_runs = SMALL_SIZES.count() * SEEDS as usize + SPOT_SIZES.len();
    let first = t.elapsed();
    let results = [
        criterion1(&runs[..validity_runs]),
        criterion2(&runs),
        criterion3(),
        criterion4(),
        criterion5(),
        criterion6(&runs[..validity_runs]),
        criterion7(),
        criterion8(),
        criterion9(&runs[..validity_runs]),
    ];
    // Bypass libtest capture so the verdicts always reach the console.
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, r) in results.iter().enumerate() {
        writeln!(out, "criterion {}: {} - {}", i + 1, if r.ok { "PASS" } else { "FAIL" }, r.detail).unwrap();
        if !r.ok {
            failed.push(i + 1);
        }
    }
    writeln!(out, "validity runs took {first:.1?}; total {:.1?}", t.elapsed()).unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

//! Exhaustive breadth-first search over small flip graphs.
//!
//! States are keyed by their sorted diagonal list with labels appended, so
//! keys are canonical and comparisons are exact.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;

use crate::comb::CombTriangulation;
use crate::convex::{diag, ConvexTriangulation, Diagonal, Label, LabelledTriangulation};
use crate::error::{Error, Result};
use crate::parallel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    ConvexLabelled,
    ConvexUnlabelled,
    ConvexSimLabelled,
    CombLabelled,
}

impl Mode {
    /// Default cap on visited states.
    pub fn default_budget(self) -> usize {
        match self {
            Mode::ConvexLabelled => 400_000,
            Mode::ConvexUnlabelled => 250_000,
            Mode::ConvexSimLabelled => 20_000,
            Mode::CombLabelled => 2_000_000,
        }
    }

    /// Largest size (polygon vertices, or vertices for comb) searched by default.
    pub fn default_size_limit(self) -> usize {
        match self {
            Mode::ConvexLabelled => 9,
            Mode::ConvexUnlabelled => 14,
            Mode::ConvexSimLabelled => 8,
            Mode::CombLabelled => 7,
        }
    }
}

/// State budget, overridable with `FLIPFORGE_ORACLE_BUDGET`.
pub fn budget(mode: Mode) -> usize {
    std::env::var("FLIPFORGE_ORACLE_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| mode.default_budget())
}

pub fn state_key(s: &LabelledTriangulation) -> Vec<u8> {
    let mut k = Vec::with_capacity(3 * s.n());
    for ((a, b), l) in s.entries() {
        k.extend([a as u8, b as u8, l as u8]);
    }
    k
}

fn unlabelled_key(t: &ConvexTriangulation) -> Vec<u8> {
    t.diagonals().into_iter().flat_map(|(a, b)| [a as u8, b as u8]).collect()
}

/// All rounds (sets of labels) that may be flipped together. Above `m = 7`
/// rounds are limited to three flips.
pub fn valid_rounds(s: &LabelledTriangulation) -> Vec<Vec<Label>> {
    let ds = s.tri().diagonals();
    let tris: Vec<[[usize; 3]; 2]> = ds.iter().map(|&d| s.tri().triangles_of(d).expect("present")).collect();
    let cap = if s.m() <= 7 { usize::MAX } else { 3 };
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(
        i: usize,
        tris: &[[[usize; 3]; 2]],
        cap: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == tris.len() {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        rec(i + 1, tris, cap, cur, out);
        if cur.len() < cap && cur.iter().all(|&j| tris[j].iter().all(|t| !tris[i].contains(t))) {
            cur.push(i);
            rec(i + 1, tris, cap, cur, out);
            cur.pop();
        }
    }
    rec(0, &tris, cap, &mut cur, &mut out);
    out.into_iter()
        .map(|idx| idx.into_iter().map(|j| s.label_of(ds[j]).expect("labelled")).collect())
        .collect()
}

fn labelled_moves(mode: Mode, s: &LabelledTriangulation) -> Vec<Vec<Label>> {
    match mode {
        Mode::ConvexSimLabelled => valid_rounds(s),
        _ => (1..=s.n()).map(|l| vec![l]).collect(),
    }
}

fn apply_move(s: &LabelledTriangulation, mv: &[Label]) -> LabelledTriangulation {
    let mut t = s.clone();
    for &l in mv {
        t.flip_label(l).expect("label present");
    }
    t
}

fn check_size(mode: Mode, size: usize) -> Result<()> {
    if size > mode.default_size_limit() && std::env::var("FLIPFORGE_ORACLE_BUDGET").is_err() {
        return Err(Error::BudgetExceeded(budget(mode)));
    }
    Ok(())
}

/// Is the search exact? Simultaneous search above `m = 7` only uses rounds of
/// at most three flips, so its distances are upper bounds.
pub fn is_exact(mode: Mode, m: usize) -> bool {
    !(mode == Mode::ConvexSimLabelled && m > 7)
}

/// Length of a shortest sequence (fewest rounds in simultaneous mode),
/// found by bidirectional search.
pub fn exact_distance(a: &LabelledTriangulation, b: &LabelledTriangulation, mode: Mode) -> Result<usize> {
    if a.m() != b.m() {
        return Err(Error::SizeMismatch(a.m(), b.m()));
    }
    check_size(mode, a.m())?;
    if mode == Mode::ConvexUnlabelled {
        return unlabelled_distance(a.tri(), b.tri());
    }
    if mode == Mode::CombLabelled {
        return Err(Error::InvalidTriangulation("comb mode needs comb states".into()));
    }
    if a == b {
        return Ok(0);
    }
    let cap = budget(mode);
    let mut seen: [HashMap<Vec<u8>, usize>; 2] = [HashMap::new(), HashMap::new()];
    let mut frontier = [vec![a.clone()], vec![b.clone()]];
    seen[0].insert(state_key(a), 0);
    seen[1].insert(state_key(b), 0);
    let mut depth = [0usize; 2];
    loop {
        let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
        if frontier[side].is_empty() {
            return Err(Error::Unreachable);
        }
        depth[side] += 1;
        let mut next = Vec::new();
        let mut best: Option<usize> = None;
        for s in &frontier[side] {
            for mv in labelled_moves(mode, s) {
                let t = apply_move(s, &mv);
                let k = state_key(&t);
                if let Some(&d) = seen[1 - side].get(&k) {
                    let total = depth[side] + d;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                if !seen[side].contains_key(&k) {
                    seen[side].insert(k, depth[side]);
                    next.push(t);
                }
            }
        }
        if let Some(b) = best {
            return Ok(b);
        }
        if seen[0].len() + seen[1].len() > cap {
            return Err(Error::BudgetExceeded(cap));
        }
        frontier[side] = next;
    }
}

fn unlabelled_distance(a: &ConvexTriangulation, b: &ConvexTriangulation) -> Result<usize> {
    let cap = budget(Mode::ConvexUnlabelled);
    let goal = unlabelled_key(b);
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(unlabelled_key(a), 0);
    queue.push_back(a.clone());
    while let Some(t) = queue.pop_front() {
        let k = unlabelled_key(&t);
        let d = seen[&k];
        if k == goal {
            return Ok(d);
        }
        for dg in t.diagonals() {
            let mut u = t.clone();
            u.flip(dg).expect("present");
            let ku = unlabelled_key(&u);
            if !seen.contains_key(&ku) {
                if seen.len() >= cap {
                    return Err(Error::BudgetExceeded(cap));
                }
                seen.insert(ku, d + 1);
                queue.push_back(u);
            }
        }
    }
    Err(Error::Unreachable)
}

/// Every triangulation of the convex `m`-gon.
pub fn all_triangulations(m: usize) -> Vec<ConvexTriangulation> {
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    let start = ConvexTriangulation::fan(m);
    seen.insert(unlabelled_key(&start), ());
    let mut out = vec![start];
    let mut i = 0;
    while i < out.len() {
        let t = out[i].clone();
        for dg in t.diagonals() {
            let mut u = t.clone();
            u.flip(dg).expect("present");
            if seen.insert(unlabelled_key(&u), ()).is_none() {
                out.push(u);
            }
        }
        i += 1;
    }
    out
}

/// Every permutation of `1..=n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<Label>> {
    let mut out = Vec::new();
    let mut p: Vec<Label> = (1..=n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Every labelled triangulation of the convex `m`-gon.
pub fn all_labelled(m: usize) -> Vec<LabelledTriangulation> {
    let perms = permutations(m - 3);
    all_triangulations(m)
        .into_iter()
        .flat_map(|t| {
            let ds = t.diagonals();
            perms
                .iter()
                .map(move |p| LabelledTriangulation::from_parts(t.m(), &ds, p).expect("valid"))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Number of labelled states reachable from the labelled fan.
pub fn count_labelled_states(m: usize) -> Result<usize> {
    check_size(Mode::ConvexLabelled, m)?;
    let cap = budget(Mode::ConvexLabelled);
    let start = LabelledTriangulation::with_sorted_labels(ConvexTriangulation::fan(m));
    Ok(eccentricity(&start, cap)?.1)
}

/// Largest distance from `s` and the number of reachable states.
fn eccentricity(s: &LabelledTriangulation, cap: usize) -> Result<(usize, usize)> {
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    seen.insert(state_key(s), ());
    let mut frontier = vec![s.clone()];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for t in &frontier {
            for l in 1..=t.n() {
                let mut u = t.clone();
                u.flip_label(l).expect("label present");
                if seen.insert(state_key(&u), ()).is_none() {
                    if seen.len() > cap {
                        return Err(Error::BudgetExceeded(cap));
                    }
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return Ok((depth, seen.len()));
        }
        depth += 1;
        frontier = next;
    }
}

fn dihedral_images(t: &ConvexTriangulation) -> Vec<Vec<Diagonal>> {
    let m = t.m();
    let ds = t.diagonals();
    let mut out = Vec::with_capacity(2 * m);
    for r in 0..m {
        for refl in [false, true] {
            let map = |v: usize| {
                let w = if refl { (m - v) % m } else { v };
                (w + r) % m
            };
            let mut img: Vec<Diagonal> = ds.iter().map(|&(a, b)| diag(map(a), map(b))).collect();
            img.sort_unstable();
            out.push(img);
        }
    }
    out
}

/// One triangulation per orbit of the polygon's symmetry group.
fn orbit_representatives(all: &[ConvexTriangulation]) -> Vec<usize> {
    let mut seen: HashMap<Vec<Diagonal>, ()> = HashMap::new();
    let mut reps = Vec::new();
    for (i, t) in all.iter().enumerate() {
        let images = dihedral_images(t);
        if !seen.contains_key(&t.diagonals()) {
            reps.push(i);
            for img in images {
                seen.insert(img, ());
            }
        }
    }
    reps
}

/// Diameter of the flip graph of the given mode at polygon size `m`.
pub fn diameter(mode: Mode, m: usize) -> Result<usize> {
    check_size(mode, m)?;
    match mode {
        Mode::ConvexUnlabelled => unlabelled_diameter(m),
        Mode::ConvexLabelled => {
            // Relabelling is a symmetry, so one labelling per shape suffices.
            let cap = budget(mode);
            let all = all_triangulations(m);
            let reps = orbit_representatives(&all);
            let ecc: Result<Vec<usize>> = reps
                .par_iter()
                .map(|&i| {
                    let s = LabelledTriangulation::with_sorted_labels(all[i].clone());
                    eccentricity(&s, cap).map(|e| e.0)
                })
                .collect();
            Ok(ecc?.into_iter().max().unwrap_or(0))
        }
        _ => Err(Error::InvalidTriangulation("diameter is defined for convex modes".into())),
    }
}

fn unlabelled_diameter(m: usize) -> Result<usize> {
    let cap = budget(Mode::ConvexUnlabelled);
    let all = all_triangulations(m);
    if all.len() > cap {
        return Err(Error::BudgetExceeded(cap));
    }
    let index: HashMap<Vec<u8>, u32> =
        all.iter().enumerate().map(|(i, t)| (unlabelled_key(t), i as u32)).collect();
    let n = m.saturating_sub(3);
    let adj: Vec<u32> = all
        .par_iter()
        .flat_map_iter(|t| {
            t.diagonals()
                .into_iter()
                .map(|dg| {
                    let mut u = t.clone();
                    u.flip(dg).expect("present");
                    index[&unlabelled_key(&u)]
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let reps = orbit_representatives(&all);
    // Sixty-four sources at a time, one bit per source.
    let ecc = reps
        .par_chunks(64)
        .map(|chunk| {
            let mut reach = vec![0u64; all.len()];
            for (bit, &s) in chunk.iter().enumerate() {
                reach[s] |= 1 << bit;
            }
            let full: u64 = if chunk.len() == 64 { u64::MAX } else { (1 << chunk.len()) - 1 };
            let mut depth = 0;
            loop {
                if reach.iter().all(|&r| r == full) {
                    return depth;
                }
                let next: Vec<u64> = (0..all.len())
                    .map(|v| adj[v * n..(v + 1) * n].iter().fold(reach[v], |acc, &w| acc | reach[w as usize]))
                    .collect();
                reach = next;
                depth += 1;
            }
        })
        .max()
        .unwrap_or(0);
    Ok(ecc)
}

/// Shortest single-flip script from `start` to any of `targets`.
pub fn discover_gadget(start: &LabelledTriangulation, targets: &[LabelledTriangulation]) -> Result<Vec<Label>> {
    let rounds = search(start, targets, Mode::ConvexLabelled)?;
    Ok(rounds.into_iter().flatten().collect())
}

/// Fewest-round simultaneous script from `start` to any of `targets`, each
/// round given as the diagonals flipped.
pub fn discover_sim_gadget(
    start: &LabelledTriangulation,
    targets: &[LabelledTriangulation],
) -> Result<Vec<Vec<Diagonal>>> {
    let rounds = search(start, targets, Mode::ConvexSimLabelled)?;
    let mut s = start.clone();
    let mut out = Vec::new();
    for r in rounds {
        let mut ds: Vec<Diagonal> = r.iter().map(|&l| s.diagonal_of(l).expect("label")).collect();
        ds.sort_unstable();
        parallel::apply_round(&mut s, &r)?;
        out.push(ds);
    }
    Ok(out)
}

fn search(start: &LabelledTriangulation, targets: &[LabelledTriangulation], mode: Mode) -> Result<Vec<Vec<Label>>> {
    let cap = budget(mode);
    let goals: HashMap<Vec<u8>, ()> = targets.iter().map(|t| (state_key(t), ())).collect();
    let mut parent: HashMap<Vec<u8>, Option<(Vec<u8>, Vec<Label>)>> = HashMap::new();
    let k0 = state_key(start);
    parent.insert(k0.clone(), None);
    let mut queue = VecDeque::from([start.clone()]);
    let mut found = goals.contains_key(&k0).then_some(k0);
    while found.is_none() {
        let Some(s) = queue.pop_front() else { return Err(Error::Unreachable) };
        let ks = state_key(&s);
        for mv in labelled_moves(mode, &s) {
            let t = apply_move(&s, &mv);
            let kt = state_key(&t);
            if parent.contains_key(&kt) {
                continue;
            }
            parent.insert(kt.clone(), Some((ks.clone(), mv)));
            if parent.len() > cap {
                return Err(Error::BudgetExceeded(cap));
            }
            if goals.contains_key(&kt) {
                found = Some(kt);
                break;
            }
            queue.push_back(t);
        }
    }
    let mut path = Vec::new();
    let mut cur = found.expect("goal reached");
    while let Some(Some((prev, mv))) = parent.get(&cur) {
        path.push(mv.clone());
        cur = prev.clone();
    }
    path.reverse();
    Ok(path)
}

/// Shortest distance between two labelled combinatorial triangulations on
/// the same vertex set (vertex-exact, not up to isomorphism).
pub fn comb_exact_distance(a: &CombTriangulation, b: &CombTriangulation) -> Result<usize> {
    if a.v() != b.v() {
        return Err(Error::SizeMismatch(a.v(), b.v()));
    }
    check_size(Mode::CombLabelled, a.v())?;
    Ok(comb_search(a, |t| t.state_key() == b.state_key(), |_, _| true, budget(Mode::CombLabelled))?.len())
}

/// Breadth-first search over labelled combinatorial triangulations. `allow`
/// filters flips by the edge removed and the edge inserted. Returns the
/// flipped labels.
pub fn comb_search(
    start: &CombTriangulation,
    is_goal: impl Fn(&CombTriangulation) -> bool,
    allow: impl Fn((usize, usize), (usize, usize)) -> bool,
    cap: usize,
) -> Result<Vec<Label>> {
    let k0 = start.state_key();
    let mut parent: HashMap<Vec<u32>, Option<(Vec<u32>, Label)>> = HashMap::new();
    parent.insert(k0.clone(), None);
    let mut queue = VecDeque::from([start.clone()]);
    let mut found = is_goal(start).then_some(k0);
    while found.is_none() {
        let Some(s) = queue.pop_front() else { return Err(Error::Unreachable) };
        let ks = s.state_key();
        for (e, l) in s.labelled_edges() {
            let Some(new) = s.flip_target(e) else { continue };
            if !allow(e, new) {
                continue;
            }
            let mut t = s.clone();
            t.flip(e).expect("flippable");
            let kt = t.state_key();
            if parent.contains_key(&kt) {
                continue;
            }
            parent.insert(kt.clone(), Some((ks.clone(), l)));
            if parent.len() > cap {
                return Err(Error::BudgetExceeded(cap));
            }
            if is_goal(&t) {
                found = Some(kt);
                break;
            }
            queue.push_back(t);
        }
    }
    let mut path = Vec::new();
    let mut cur = found.expect("goal reached");
    while let Some(Some((prev, l))) = parent.get(&cur) {
        path.push(*l);
        cur = prev.clone();
    }
    path.reverse();
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan(k: usize) -> usize {
        (0..k).fold(1, |c, i| c * 2 * (2 * i + 1) / (i + 2))
    }

    #[test]
    fn counts_match_catalan() {
        for m in 3..=8 {
            let fact: usize = (1..=m - 3).product();
            assert_eq!(count_labelled_states(m).unwrap(), catalan(m - 2) * fact, "m = {m}");
            assert_eq!(all_triangulations(m).len(), catalan(m - 2));
        }
    }

    #[test]
    fn small_distances() {
        let a = LabelledTriangulation::from_parts(4, &[(0, 2)], &[1]).unwrap();
        let b = LabelledTriangulation::from_parts(4, &[(1, 3)], &[1]).unwrap();
        assert_eq!(exact_distance(&a, &a, Mode::ConvexLabelled).unwrap(), 0);
        assert_eq!(exact_distance(&a, &b, Mode::ConvexLabelled).unwrap(), 1);
        assert_eq!(diameter(Mode::ConvexUnlabelled, 5).unwrap(), 2);
    }

    #[test]
    fn pentagon_gadget_is_shortest() {
        let a = LabelledTriangulation::from_fan(&[2, 1]).unwrap();
        let b = LabelledTriangulation::from_fan(&[1, 2]).unwrap();
        assert_eq!(exact_distance(&a, &b, Mode::ConvexLabelled).unwrap(), 5);
        let script = discover_gadget(&a, &[b]).unwrap();
        let roles: Vec<usize> = script.iter().map(|&l| if l == 2 { 0 } else { 1 }).collect();
        assert_eq!(roles, crate::labelsort::PENTAGON_SCRIPT);
    }

    #[test]
    fn flip_is_an_involution_up_to_m8() {
        for m in 4..=8 {
            for t in all_triangulations(m) {
                let s = LabelledTriangulation::with_sorted_labels(t);
                for l in 1..=s.n() {
                    let mut u = s.clone();
                    u.flip_label(l).unwrap();
                    u.flip_label(l).unwrap();
                    assert_eq!(u, s);
                }
            }
        }
    }

    #[test]
    fn permutations_enumerate() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<Label>::new()]);
    }
}

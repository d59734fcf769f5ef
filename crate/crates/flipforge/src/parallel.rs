//! Simultaneous flips.
//!
//! A round flips a set of diagonals whose quadrilaterals share no triangle.
//! Unlabelled canonicalization works on the dual binary tree of a polygon
//! rooted at the edge `(0, last)`: the fan at 0 is the tree with no right
//! children, and a flip is a rotation.
//!
//! Labelled sorting is a quicksort whose blocks exchange their misplaced
//! edges through a zig-zag triangulation of the block, processed as a row
//! of independent hexagons.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::convex::{diag, ConvexTriangulation, Diagonal, Label, LabelledTriangulation, ReplayFailure};
use crate::error::{Error, Result};

/// Rounds of labels flipped together.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename = "labelled")]
pub struct SimFlipSequence {
    pub rounds: Vec<Vec<Label>>,
}

impl SimFlipSequence {
    pub fn cost(&self) -> usize {
        self.rounds.len()
    }

    pub fn flips(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn reversed(&self) -> Self {
        Self { rounds: self.rounds.iter().rev().cloned().collect() }
    }

    pub fn extend(&mut self, other: SimFlipSequence) {
        self.rounds.extend(other.rounds);
    }
}

fn round_triangles(t: &ConvexTriangulation, ds: &[Diagonal]) -> Option<()> {
    let mut seen = HashSet::with_capacity(2 * ds.len());
    for &d in ds {
        for tri in t.triangles_of(d).ok()? {
            if !seen.insert(tri) {
                return None;
            }
        }
    }
    Some(())
}

/// True iff every label exists and the quadrilaterals are triangle-disjoint.
pub fn validate_round(s: &LabelledTriangulation, round: &[Label]) -> bool {
    let ds: Option<Vec<Diagonal>> = round.iter().map(|&l| s.diagonal_of(l)).collect();
    ds.is_some_and(|ds| round_triangles(s.tri(), &ds).is_some())
}

pub fn apply_round(s: &mut LabelledTriangulation, round: &[Label]) -> Result<()> {
    if !validate_round(s, round) {
        return Err(Error::InvalidRound(format!("{round:?}")));
    }
    for &l in round {
        s.flip_label(l)?;
    }
    Ok(())
}

/// Apply a round given by diagonals and return the labels flipped.
fn apply_diagonals(s: &mut LabelledTriangulation, ds: &[Diagonal]) -> Vec<Label> {
    assert!(round_triangles(s.tri(), ds).is_some(), "conflicting round {ds:?}");
    ds.iter()
        .map(|&d| {
            let l = s.label_of(d).expect("diagonal present");
            s.flip_diagonal(d).expect("diagonal present");
            l
        })
        .collect()
}

pub fn replay(start: &LabelledTriangulation, seq: &SimFlipSequence) -> std::result::Result<LabelledTriangulation, ReplayFailure> {
    let mut s = start.clone();
    for (i, r) in seq.rounds.iter().enumerate() {
        apply_round(&mut s, r).map_err(|e| ReplayFailure { step: Some(i), reason: e.to_string() })?;
    }
    Ok(s)
}

pub fn verify_sim(
    start: &LabelledTriangulation,
    seq: &SimFlipSequence,
    target: &LabelledTriangulation,
) -> std::result::Result<(), ReplayFailure> {
    let end = replay(start, seq)?;
    if end != *target {
        return Err(ReplayFailure { step: None, reason: "final state differs from target".into() });
    }
    Ok(())
}

/// Merge independent schedules round by round.
fn merge(parts: Vec<Vec<Vec<Label>>>) -> Vec<Vec<Label>> {
    let len = parts.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![Vec::new(); len];
    for p in parts {
        for (i, r) in p.into_iter().enumerate() {
            out[i].extend(r);
        }
    }
    out
}

const NIL: usize = usize::MAX;

/// Dual tree of the part of a triangulation inside `poly`, an increasing
/// vertex list starting at the apex 0. Nodes are local apex indices.
struct DualTree {
    left: Vec<usize>,
    right: Vec<usize>,
    lo: Vec<usize>,
    hi: Vec<usize>,
    root: usize,
}

impl DualTree {
    fn build(t: &ConvexTriangulation, poly: &[usize]) -> Self {
        let k = poly.len();
        let mut tree = Self { left: vec![NIL; k], right: vec![NIL; k], lo: vec![0; k], hi: vec![0; k], root: NIL };
        let local = |v: usize| poly.binary_search(&v).expect("vertex of the sub-polygon");
        let mut stack = vec![(0, k - 1, NIL, false)];
        while let Some((lo, hi, parent, is_left)) = stack.pop() {
            let (a, b) = (poly[lo], poly[hi]);
            let apex = *t.neighbors(a).range(a + 1..b).next_back().expect("triangle");
            let x = local(apex);
            tree.lo[x] = lo;
            tree.hi[x] = hi;
            if parent == NIL {
                tree.root = x;
            } else if is_left {
                tree.left[parent] = x;
            } else {
                tree.right[parent] = x;
            }
            if x - lo >= 2 {
                stack.push((lo, x, x, true));
            }
            if hi - x >= 2 {
                stack.push((x, hi, x, false));
            }
        }
        tree
    }

    fn heights(&self) -> (Vec<usize>, Vec<usize>) {
        let mut h = vec![0; self.left.len()];
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            order.push(u);
            for c in [self.left[u], self.right[u]] {
                if c != NIL {
                    stack.push(c);
                }
            }
        }
        let ht = |h: &[usize], c: usize| if c == NIL { 0 } else { h[c] };
        for &u in order.iter().rev() {
            h[u] = 1 + ht(&h, self.left[u]).max(ht(&h, self.right[u]));
        }
        (h, order)
    }

    /// Node-disjoint rotations for one round: every spine node with a right
    /// child rotates it onto the spine; elsewhere, tall-over-short subtrees
    /// are rebalanced by a single or double-rotation step.
    fn select(&self) -> Vec<usize> {
        let (h, order) = self.heights();
        let ht = |c: usize| if c == NIL { 0 } else { h[c] };
        let mut used = vec![false; self.left.len()];
        let mut rots = Vec::new();
        let mut s = self.root;
        while s != NIL {
            used[s] = true;
            let r = self.right[s];
            if r != NIL {
                rots.push(r);
                used[r] = true;
            }
            s = self.left[s];
        }
        let mut cand: Vec<usize> = order.into_iter().filter(|&u| !used[u]).collect();
        cand.sort_by_key(|&u| std::cmp::Reverse(h[u]));
        for p in cand {
            if used[p] {
                continue;
            }
            let (l, r) = (self.left[p], self.right[p]);
            let (c, other, c_is_left) = if ht(l) >= ht(r) { (l, r, true) } else { (r, l, false) };
            if c == NIL || used[c] || ht(c) < ht(other) + 2 {
                continue;
            }
            let (outer, inner) =
                if c_is_left { (self.left[c], self.right[c]) } else { (self.right[c], self.left[c]) };
            if ht(outer) >= ht(inner) {
                rots.push(c);
                used[p] = true;
                used[c] = true;
            } else if inner != NIL && !used[inner] {
                rots.push(inner);
                used[c] = true;
                used[inner] = true;
            }
        }
        rots
    }
}

/// Canonicalize the sub-polygon `poly` to the fan at 0 in place; returns
/// each round as the diagonals flipped.
fn fan_rounds(s: &mut LabelledTriangulation, poly: &[usize]) -> Vec<Vec<Diagonal>> {
    let mut out = Vec::new();
    if poly.len() < 4 {
        return out;
    }
    loop {
        let tree = DualTree::build(s.tri(), poly);
        let rots = tree.select();
        if rots.is_empty() {
            return out;
        }
        let ds: Vec<Diagonal> = rots.iter().map(|&x| (poly[tree.lo[x]], poly[tree.hi[x]])).collect();
        apply_diagonals(s, &ds);
        out.push(ds);
    }
}

/// Rounds taking any triangulation to the fan at apex 0.
pub fn sim_canonicalize_unlabelled(s: &LabelledTriangulation) -> (SimFlipSequence, LabelledTriangulation) {
    let mut t = s.clone();
    let poly: Vec<usize> = (0..s.m()).collect();
    let mut rounds = Vec::new();
    for ds in fan_rounds(&mut t.clone(), &poly) {
        rounds.push(apply_diagonals(&mut t, &ds));
    }
    (SimFlipSequence { rounds }, t)
}

/// Per-hexagon scripts. Hexagon corners `0..6` run counter-clockwise:
/// three on the left chain (top to bottom) then three on the right chain
/// (bottom to top). The interior starts as the zig-zag `(2,4)` blue,
/// `(1,4)` red, `(1,5)` blue and ends with one ear `(0,2)` on the left,
/// one ear `(3,5)` on the right and the crossing `(2,5)` blue.
pub const HEX_RED_LEFT: &[&[Diagonal]] = &[&[(1, 5)], &[(1, 4)], &[(0, 4)], &[(2, 4)]];
pub const HEX_BLUE_LEFT: &[&[Diagonal]] = &[&[(2, 4)], &[(1, 4)], &[(1, 3)], &[(1, 5)]];

/// Last step: pentagon `0` (apex), two left corners, two right corners,
/// from the crossing `(2,4)` blue and rung `(1,4)` red to the fan at 0.
pub const PENT_RED_LEFT: &[&[Diagonal]] = &[&[(1, 4)], &[(2, 4)]];
pub const PENT_BLUE_LEFT: &[&[Diagonal]] = &[&[(2, 4)], &[(1, 4)], &[(1, 3)]];

fn zigzag(k: usize) -> LabelledTriangulation {
    // Chains hang off the block's local polygon 0..=2k+2.
    let lv = |j: usize| k + 1 - j;
    let rv = |j: usize| k + 2 + j;
    let mut ds = Vec::new();
    let mut ls = Vec::new();
    for j in 1..=k {
        ds.push(diag(lv(j), rv(j)));
        ls.push(j);
    }
    for j in 0..k {
        ds.push(diag(lv(j), rv(j + 1)));
        ls.push(k + 1 + j);
    }
    LabelledTriangulation::from_parts(2 * k + 3, &ds, &ls).expect("zig-zag is a triangulation")
}

/// From the zig-zag to the fan with reds (rungs) on the left when
/// `red_left`, else blues (crossings). Rounds of diagonals flipped.
fn zigzag_to_fan(k: usize, red_left: bool) -> Vec<Vec<Diagonal>> {
    let mut s = zigzag(k);
    let lv = |j: usize| k + 1 - j;
    let rv = |j: usize| k + 2 + j;
    let (hex, pent) = if red_left { (HEX_RED_LEFT, PENT_RED_LEFT) } else { (HEX_BLUE_LEFT, PENT_BLUE_LEFT) };
    let mut out = Vec::new();
    let mut chain: Vec<usize> = (0..=k).collect();
    while chain.len() > 2 {
        let kk = chain.len() - 1;
        let hexes: Vec<[usize; 6]> = (0..kk / 2)
            .map(|i| {
                let (a, b, c) = (chain[2 * i], chain[2 * i + 1], chain[2 * i + 2]);
                [lv(c), lv(b), lv(a), rv(a), rv(b), rv(c)]
            })
            .collect();
        for round in hex {
            let ds: Vec<Diagonal> =
                hexes.iter().flat_map(|h| round.iter().map(move |&(x, y)| diag(h[x], h[y]))).collect();
            apply_diagonals(&mut s, &ds);
            out.push(ds);
        }
        let mut next: Vec<usize> = chain.iter().step_by(2).copied().collect();
        if kk % 2 == 1 {
            next.push(chain[kk]);
        }
        chain = next;
    }
    if k >= 1 {
        let p = [0, lv(chain[1]), lv(chain[0]), rv(chain[0]), rv(chain[1])];
        for round in pent {
            let ds: Vec<Diagonal> = round.iter().map(|&(x, y)| diag(p[x], p[y])).collect();
            apply_diagonals(&mut s, &ds);
            out.push(ds);
        }
    }
    let left: Vec<usize> = (0..=k + 1).collect();
    let right: Vec<usize> = std::iter::once(0).chain(k + 2..=2 * k + 2).collect();
    let mut a = fan_rounds(&mut s, &left);
    let b = fan_rounds(&mut s, &right);
    a.resize(a.len().max(b.len()), Vec::new());
    for (r, extra) in a.iter_mut().zip(b) {
        r.extend(extra);
    }
    out.extend(a);
    let rho = s.fan_permutation().expect("ends at the fan");
    debug_assert!(rho[..k].iter().all(|&l| (l <= k) == red_left));
    out
}

/// Local rounds exchanging the two halves of a fan of `2k` edges in the
/// polygon `0..=2k+2`: reds on positions `0..k` move right, blues left.
fn exchange_schedule(k: usize) -> Vec<Vec<Diagonal>> {
    let to_red = zigzag_to_fan(k, true);
    let mut s = zigzag(k);
    let mut back = Vec::new();
    for r in &to_red {
        let post: Vec<Diagonal> = r.iter().map(|&d| s.flip_diagonal(d).expect("present")).collect();
        back.push(post);
    }
    back.reverse();
    back.extend(zigzag_to_fan(k, false));
    back
}

fn apex_neighbours_between(s: &LabelledTriangulation, lo: usize, hi: usize) -> Vec<usize> {
    s.tri().neighbors(0).range(lo + 1..hi).copied().collect()
}

/// Separate one block: positions `lo..end` hold exactly the keys `lo..end`;
/// afterwards the first `ceil(size/2)` positions hold the smaller keys.
fn split_block(
    s: &mut LabelledTriangulation,
    key: &[usize],
    lo: usize,
    end: usize,
    cache: &mut HashMap<usize, Vec<Vec<Diagonal>>>,
) -> Vec<Vec<Label>> {
    let mid = lo + (end - lo).div_ceil(2);
    let (fence_lo, fence_hi) = (lo + 1, end + 2);
    let misplaced: HashSet<Label> = (lo..end)
        .map(|p| s.label_of((0, p + 2)).expect("fan edge"))
        .filter(|&l| (key[l] < mid) != (l_pos(s, l) < mid))
        .collect();
    if misplaced.is_empty() {
        return Vec::new();
    }
    let mut park = Vec::new();
    loop {
        let apex = apex_neighbours_between(s, fence_lo, fence_hi);
        let mut round = Vec::new();
        let mut prev = false;
        for v in apex {
            let l = s.label_of((0, v)).expect("apex edge");
            if !misplaced.contains(&l) && !prev {
                round.push((0, v));
                prev = true;
            } else {
                prev = false;
            }
        }
        if round.is_empty() {
            break;
        }
        park.push(apex_round(s, &round));
    }
    let mut poly = vec![0, fence_lo];
    poly.extend(apex_neighbours_between(s, fence_lo, fence_hi));
    poly.push(fence_hi);
    let k = (poly.len() - 3) / 2;
    let sched = cache.entry(k).or_insert_with(|| exchange_schedule(k));
    let mut rounds = park.clone();
    for r in sched.iter() {
        let ds: Vec<Diagonal> = r.iter().map(|&(a, b)| diag(poly[a], poly[b])).collect();
        rounds.push(apply_diagonals(s, &ds));
    }
    for r in park.iter().rev() {
        for &l in r {
            s.flip_label(l).expect("parked label");
        }
        rounds.push(r.clone());
    }
    rounds
}

fn apex_round(s: &mut LabelledTriangulation, ds: &[Diagonal]) -> Vec<Label> {
    apply_diagonals(s, ds)
}

fn l_pos(s: &LabelledTriangulation, l: Label) -> usize {
    s.diagonal_of(l).expect("label").1 - 2
}

/// Sort the fan so that the label `l` ends at position `key[l]`.
pub fn sim_sort_fan_by_key(s: &mut LabelledTriangulation, key: &[usize]) -> Result<SimFlipSequence> {
    s.fan_permutation()?;
    let n = s.n();
    if key.len() != n + 1 {
        return Err(Error::SizeMismatch(key.len(), n + 1));
    }
    let mut cache = HashMap::new();
    let mut rounds = Vec::new();
    let mut blocks = vec![(0usize, n)];
    while !blocks.is_empty() {
        // Neighbouring blocks share a triangle, so alternate blocks run in
        // separate phases.
        for parity in 0..2 {
            let parts: Vec<Vec<Vec<Label>>> = blocks
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == parity)
                .map(|(_, &(lo, end))| split_block(s, key, lo, end, &mut cache))
                .collect();
            rounds.extend(merge(parts));
        }
        blocks = blocks
            .into_iter()
            .flat_map(|(lo, end)| {
                let mid = lo + (end - lo).div_ceil(2);
                [(lo, mid), (mid, end)]
            })
            .filter(|&(lo, end)| end - lo >= 2)
            .collect();
    }
    Ok(SimFlipSequence { rounds })
}

/// Sort the fan reading into ascending order with simultaneous rounds.
pub fn sim_sort_fan(s: &mut LabelledTriangulation) -> Result<SimFlipSequence> {
    let key: Vec<usize> = (0..=s.n()).map(|l| l.saturating_sub(1)).collect();
    sim_sort_fan_by_key(s, &key)
}

/// Simultaneous transformation: canonicalize both ends, sort, undo.
pub fn sim_transform_between(a: &LabelledTriangulation, b: &LabelledTriangulation) -> Result<SimFlipSequence> {
    if a.m() != b.m() {
        return Err(Error::SizeMismatch(a.m(), b.m()));
    }
    if a == b {
        return Ok(SimFlipSequence::default());
    }
    let (mut seq, mut fan_a) = sim_canonicalize_unlabelled(a);
    let (to_b, fan_b) = sim_canonicalize_unlabelled(b);
    let mut key = vec![0; a.n() + 1];
    for (t, l) in fan_b.fan_permutation()?.into_iter().enumerate() {
        key[l] = t;
    }
    seq.extend(sim_sort_fan_by_key(&mut fan_a, &key)?);
    seq.extend(to_b.reversed());
    Ok(seq)
}

/// The red/blue instance: the first `ceil(n/2)` fan positions hold the
/// largest labels in increasing order, the rest hold `1..=floor(n/2)`.
pub fn red_blue(n: usize) -> LabelledTriangulation {
    let half = n / 2;
    let perm: Vec<Label> = (half + 1..=n).chain(1..=half).collect();
    LabelledTriangulation::from_fan(&perm).expect("fan")
}

/// Separator through the apex and the record of labels that crossed it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingCertificate {
    pub split: usize,
    pub counts: Vec<usize>,
}

/// Left fan positions `0..ceil(n/2)` are the vertices `2..=split`.
pub fn separator(n: usize) -> usize {
    n.div_ceil(2) + 1
}

fn crosses(split: usize, (a, b): Diagonal) -> bool {
    a >= 1 && a <= split && split < b
}

/// Replay `seq` from a red/blue start, counting labels that have crossed
/// the separator, and check the per-round growth bound.
pub fn check_crossing_certificate(start: &LabelledTriangulation, seq: &SimFlipSequence) -> Result<CrossingCertificate> {
    let n = start.n();
    let rho = start.fan_permutation().map_err(|_| Error::InvalidStart)?;
    let left = n.div_ceil(2);
    let mut top: Vec<Label> = rho[..left].to_vec();
    top.sort_unstable();
    if top != (n - left + 1..=n).collect::<Vec<_>>() {
        return Err(Error::InvalidStart);
    }
    let split = separator(n);
    let mut crossed = vec![false; n + 1];
    let mut counts = vec![0];
    let mut s = start.clone();
    for (j, r) in seq.rounds.iter().enumerate() {
        apply_round(&mut s, r)?;
        for &l in r {
            if crosses(split, s.diagonal_of(l).expect("label")) {
                crossed[l] = true;
            }
        }
        let c = crossed.iter().filter(|&&x| x).count();
        let prev = counts[j];
        if c - prev > prev + 1 {
            return Err(Error::CertificateViolation { round: j, delta: c - prev, crossed: prev });
        }
        counts.push(c);
    }
    Ok(CrossingCertificate { split, counts })
}

/// Fewest rounds any red/blue exchange can take, from the growth bound.
pub fn certificate_lower_bound(n: usize) -> usize {
    let mut c = 0usize;
    let mut rounds = 0;
    while c < n {
        c = 2 * c + 1;
        rounds += 1;
    }
    rounds
}

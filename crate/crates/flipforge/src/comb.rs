//! Edge-labelled combinatorial triangulations (embedded maximal planar
//! graphs) stored as rotation systems.
//!
//! `rot[u]` lists the neighbours of `u` in counter-clockwise order. The face
//! to the left of the dart `u -> w` continues with `w -> prev(w, u)`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::convex::{diag, transform_between, canonicalize_unlabelled, FlipSequence, Label, LabelledTriangulation, ReplayFailure};
use crate::error::{Error, Result};

pub type Edge = (usize, usize);

#[derive(Clone, Debug)]
pub struct CombTriangulation {
    rot: Vec<Vec<usize>>,
    label: HashMap<Edge, Label>,
    edge: Vec<Edge>,
}

impl PartialEq for CombTriangulation {
    fn eq(&self, other: &Self) -> bool {
        self.state_key() == other.state_key()
    }
}

impl Eq for CombTriangulation {}

impl CombTriangulation {
    /// Build from a rotation system and a label per edge.
    pub fn new(rot: Vec<Vec<usize>>, labels: &[(Edge, Label)]) -> Result<Self> {
        let v = rot.len();
        if v < 4 {
            return Err(Error::TooSmall(v));
        }
        let e = 3 * v - 6;
        let bad = |msg: String| Error::InvalidTriangulation(msg);
        let mut edges = HashSet::new();
        for (u, r) in rot.iter().enumerate() {
            let mut seen = HashSet::new();
            for &w in r {
                if w >= v || w == u || !seen.insert(w) {
                    return Err(bad(format!("bad neighbour {w} of {u}")));
                }
                if !rot[w].contains(&u) {
                    return Err(bad(format!("edge ({u}, {w}) is one-sided")));
                }
                edges.insert(diag(u, w));
            }
        }
        if edges.len() != e {
            return Err(bad(format!("{} edges, expected {e}", edges.len())));
        }
        let mut label = HashMap::with_capacity(e);
        let mut edge = vec![(0, 0); e + 1];
        for &((a, b), l) in labels {
            let d = diag(a, b);
            if !edges.contains(&d) {
                return Err(Error::UnknownEdge(a, b));
            }
            if l == 0 || l > e || edge[l] != (0, 0) || label.insert(d, l).is_some() {
                return Err(bad(format!("labels are not a bijection onto 1..={e}")));
            }
            edge[l] = d;
        }
        if label.len() != e {
            return Err(bad(format!("{} labels for {e} edges", label.len())));
        }
        let t = Self { rot, label, edge };
        let faces = t.faces();
        if faces.len() != 2 * v - 4 || faces.iter().any(|f| f.len() != 3) {
            return Err(bad("faces are not 2v - 4 triangles".into()));
        }
        Ok(t)
    }

    /// Labels assigned `1..` in lexicographic edge order.
    pub fn with_sorted_labels(rot: Vec<Vec<usize>>) -> Result<Self> {
        let mut es: Vec<Edge> =
            rot.iter().enumerate().flat_map(|(u, r)| r.iter().filter(move |&&w| u < w).map(move |&w| (u, w))).collect();
        es.sort_unstable();
        let labels: Vec<(Edge, Label)> = es.into_iter().zip(1..).collect();
        Self::new(rot, &labels)
    }

    pub fn v(&self) -> usize {
        self.rot.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge.len() - 1
    }

    pub fn rotation(&self, u: usize) -> &[usize] {
        &self.rot[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rot[u].len()
    }

    pub fn has_edge(&self, (a, b): Edge) -> bool {
        self.label.contains_key(&diag(a, b))
    }

    pub fn label_of(&self, (a, b): Edge) -> Option<Label> {
        self.label.get(&diag(a, b)).copied()
    }

    pub fn edge_of(&self, l: Label) -> Option<Edge> {
        self.edge.get(l).copied().filter(|_| l > 0)
    }

    /// Edges with their labels, in label order.
    pub fn labelled_edges(&self) -> impl Iterator<Item = (Edge, Label)> + '_ {
        self.edge.iter().enumerate().skip(1).map(|(l, &e)| (e, l))
    }

    fn pos(&self, u: usize, w: usize) -> usize {
        self.rot[u].iter().position(|&x| x == w).expect("neighbour")
    }

    pub fn next(&self, u: usize, w: usize) -> usize {
        let r = &self.rot[u];
        r[(self.pos(u, w) + 1) % r.len()]
    }

    pub fn prev(&self, u: usize, w: usize) -> usize {
        let r = &self.rot[u];
        r[(self.pos(u, w) + r.len() - 1) % r.len()]
    }

    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for u in 0..self.v() {
            for &w in &self.rot[u] {
                if seen.contains(&(u, w)) {
                    continue;
                }
                let mut f = Vec::new();
                let (mut a, mut b) = (u, w);
                while seen.insert((a, b)) {
                    f.push(a);
                    let c = self.prev(b, a);
                    (a, b) = (b, c);
                    if f.len() > self.v() {
                        break;
                    }
                }
                out.push(f);
            }
        }
        out
    }

    /// The edge a flip of `e` would create, if the flip is legal.
    pub fn flip_target(&self, (u, w): Edge) -> Option<Edge> {
        if !self.has_edge((u, w)) {
            return None;
        }
        let a = self.prev(w, u);
        let b = self.prev(u, w);
        (a != b && !self.has_edge((a, b))).then(|| diag(a, b))
    }

    /// Flip `e`; its label moves to the new edge, which is returned.
    pub fn flip(&mut self, (u, w): Edge) -> Result<Edge> {
        let l = self.label_of((u, w)).ok_or(Error::UnknownEdge(u, w))?;
        let a = self.prev(w, u);
        let b = self.prev(u, w);
        if a == b || self.has_edge((a, b)) {
            return Err(Error::NotFlippable(u, w));
        }
        let pu = self.pos(u, w);
        self.rot[u].remove(pu);
        let pw = self.pos(w, u);
        self.rot[w].remove(pw);
        let pa = self.pos(a, u);
        self.rot[a].insert(pa + 1, b);
        let pb = self.pos(b, w);
        self.rot[b].insert(pb + 1, a);
        let d = diag(a, b);
        self.label.remove(&diag(u, w));
        self.label.insert(d, l);
        self.edge[l] = d;
        Ok(d)
    }

    pub fn flip_label(&mut self, l: Label) -> Result<Edge> {
        let e = self.edge_of(l).ok_or(Error::UnknownLabel(l))?;
        self.flip(e)
    }

    pub fn apply(&mut self, seq: &FlipSequence) -> std::result::Result<(), ReplayFailure> {
        let fail = |i: usize, e: Error| ReplayFailure { step: Some(i), reason: e.to_string() };
        match seq {
            FlipSequence::Labelled(ls) => {
                for (i, &l) in ls.iter().enumerate() {
                    self.flip_label(l).map_err(|e| fail(i, e))?;
                }
            }
            FlipSequence::Unlabelled(es) => {
                for (i, &e) in es.iter().enumerate() {
                    self.flip(e).map_err(|er| fail(i, er))?;
                }
            }
        }
        Ok(())
    }

    /// Vertex-exact encoding: rotations normalised to start at their
    /// smallest neighbour, then the edge of every label.
    pub fn state_key(&self) -> Vec<u32> {
        let mut key = Vec::with_capacity(4 * self.edge.len() + self.v());
        key.push(self.v() as u32);
        for r in &self.rot {
            let s = (0..r.len()).min_by_key(|&i| r[i]).unwrap_or(0);
            key.push(r.len() as u32);
            key.extend((0..r.len()).map(|i| r[(s + i) % r.len()] as u32));
        }
        for &(a, b) in &self.edge[1..] {
            key.push(a as u32);
            key.push(b as u32);
        }
        key
    }

    /// Walk the embedding from the dart `u -> w`, numbering vertices as they
    /// are met, turning counter-clockwise (`mirror == false`) or clockwise.
    fn code_from(&self, u: usize, w: usize, mirror: bool) -> Vec<u32> {
        let v = self.v();
        let mut num = vec![u32::MAX; v];
        let mut order = vec![(u, w)];
        num[u] = 0;
        let mut code = Vec::with_capacity(4 * self.edge.len());
        let mut i = 0;
        while i < order.len() {
            let (x, start) = order[i];
            i += 1;
            let d = self.degree(x);
            let p = self.pos(x, start);
            code.push(u32::MAX);
            for j in 0..d {
                let idx = if mirror { (p + d - j) % d } else { (p + j) % d };
                let y = self.rot[x][idx];
                if num[y] == u32::MAX {
                    num[y] = order.len() as u32;
                    order.push((y, x));
                }
                code.push(num[y]);
                code.push(self.label[&diag(x, y)] as u32);
            }
        }
        code
    }

    /// Smallest code over every dart and both orientations.
    pub fn canonical_form(&self) -> Vec<u32> {
        let mut best: Option<Vec<u32>> = None;
        for u in 0..self.v() {
            for &w in &self.rot[u] {
                for mirror in [false, true] {
                    let c = self.code_from(u, w, mirror);
                    if best.as_ref().is_none_or(|b| c < *b) {
                        best = Some(c);
                    }
                }
            }
        }
        best.unwrap_or_default()
    }
}

/// Equal up to a label-preserving isomorphism of the embedding, reflections
/// included.
pub fn labelled_isomorphic(a: &CombTriangulation, b: &CombTriangulation) -> bool {
    labelled_isomorphic_with(a, b, true)
}

/// Labels are a bijection, so an isomorphism must send the edge labelled 1
/// onto the edge labelled 1; rooting there is enough.
pub fn labelled_isomorphic_with(a: &CombTriangulation, b: &CombTriangulation, reflections: bool) -> bool {
    if a.v() != b.v() || a.edge_count() != b.edge_count() {
        return false;
    }
    let (Some((u, w)), Some((x, y))) = (a.edge_of(1), b.edge_of(1)) else { return true };
    let code = a.code_from(u, w, false);
    let mirrors: &[bool] = if reflections { &[false, true] } else { &[false] };
    [(x, y), (y, x)].iter().any(|&(p, q)| mirrors.iter().any(|&m| b.code_from(p, q, m) == code))
}

/// The canonical double wheel: spine `0..k` with `k = v - 2`, apexes
/// `N = k` and `S = k + 1`. Spine edge `(i, i+1)` has label `i + 1`, the
/// spoke `(i, N)` has `k + 1 + i` and `(i, S)` has `2k + 1 + i`, so the N
/// spokes read in order going clockwise around `N`.
pub fn double_wheel(v: usize) -> Result<CombTriangulation> {
    if v < 5 {
        return Err(Error::TooSmall(v));
    }
    let k = v - 2;
    let (n, s) = (k, k + 1);
    let mut rot: Vec<Vec<usize>> = (0..k).map(|i| vec![(i + k - 1) % k, n, (i + 1) % k, s]).collect();
    rot.push((0..k).rev().collect());
    rot.push((0..k).collect());
    let mut labels = Vec::with_capacity(3 * k);
    for i in 0..k {
        labels.push(((i, (i + 1) % k), i + 1));
        labels.push(((i, n), k + 1 + i));
        labels.push(((i, s), 2 * k + 1 + i));
    }
    CombTriangulation::new(rot, &labels)
}

/// Where the spine and the two apexes of a double-wheel-shaped state are.
/// `spine[i + 1]` follows `spine[i]` clockwise around `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub spine: Vec<usize>,
    pub n: usize,
    pub s: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    N,
    S,
}

impl Frame {
    /// Read the frame off a double-wheel shape, using `n` as the N apex.
    pub fn detect(t: &CombTriangulation, n: usize) -> Result<Self> {
        let v = t.v();
        let k = v - 2;
        let not_double = || Error::InvalidTriangulation("not a double wheel".into());
        if t.degree(n) != k {
            return Err(not_double());
        }
        let s = (0..v).find(|&x| x != n && !t.has_edge((n, x))).ok_or_else(not_double)?;
        let mut spine = vec![t.rot[n][0]];
        for _ in 1..k {
            spine.push(t.prev(n, *spine.last().expect("nonempty")));
        }
        let f = Self { spine, n, s };
        for i in 0..k {
            if !t.has_edge(f.spine_edge(i)) || !t.has_edge(f.spoke(Side::S, i)) {
                return Err(not_double());
            }
        }
        Ok(f)
    }

    pub fn k(&self) -> usize {
        self.spine.len()
    }

    fn at(&self, i: usize) -> usize {
        self.spine[i % self.k()]
    }

    pub fn apex(&self, side: Side) -> usize {
        match side {
            Side::N => self.n,
            Side::S => self.s,
        }
    }

    pub fn spine_edge(&self, i: usize) -> Edge {
        diag(self.at(i), self.at(i + 1))
    }

    pub fn spoke(&self, side: Side, i: usize) -> Edge {
        diag(self.at(i), self.apex(side))
    }
}

fn other(side: Side) -> Side {
    match side {
        Side::N => Side::S,
        Side::S => Side::N,
    }
}

/// Spine-swap script over the roles `a` (spine edge), `b` (spoke at one end
/// of `a`) and `c` (spoke to the other apex one step beyond `b`'s end).
pub const SPINE_SWAP_SCRIPT: [char; 7] = ['c', 'a', 'b', 'a', 'b', 'c', 'a'];

/// Exchange the labels of spine edge `i` and the spoke on `side` at its
/// left end (`at_start`) or right end. Requires `k >= 4`.
pub fn spine_swap_at(t: &mut CombTriangulation, f: &Frame, i: usize, side: Side, at_start: bool) -> Result<Vec<Label>> {
    let k = f.k();
    if k < 4 {
        return Err(Error::TooSmall(t.v()));
    }
    let a = f.spine_edge(i);
    let (b, c) = if at_start {
        (f.spoke(side, i), f.spoke(other(side), i + k - 1))
    } else {
        (f.spoke(side, i + 1), f.spoke(other(side), i + 2))
    };
    let lab = |e: Edge| t.label_of(e).ok_or(Error::UnknownEdge(e.0, e.1));
    let (la, lb, lc) = (lab(a)?, lab(b)?, lab(c)?);
    let script: Vec<Label> = SPINE_SWAP_SCRIPT
        .iter()
        .map(|r| match r {
            'a' => la,
            'b' => lb,
            _ => lc,
        })
        .collect();
    for &l in &script {
        t.flip_label(l)?;
    }
    Ok(script)
}

/// Exchange the labels of spine edge `a` and an incident spoke `b`.
pub fn spine_swap(t: &mut CombTriangulation, f: &Frame, a: Edge, b: Edge) -> Result<Vec<Label>> {
    let k = f.k();
    let i = (0..k).find(|&i| f.spine_edge(i) == diag(a.0, a.1)).ok_or(Error::NotAdjacent)?;
    for side in [Side::N, Side::S] {
        if f.spoke(side, i) == diag(b.0, b.1) {
            return spine_swap_at(t, f, i, side, true);
        }
        if f.spoke(side, i + 1) == diag(b.0, b.1) {
            return spine_swap_at(t, f, i, side, false);
        }
    }
    Err(Error::NotAdjacent)
}

/// A disk bounded by the cycle `verts`, triangulated by the edges between
/// non-consecutive cycle vertices.
struct Region {
    verts: Vec<usize>,
    local_to_comb: Vec<Label>,
    state: LabelledTriangulation,
}

impl Region {
    fn new(t: &CombTriangulation, verts: Vec<usize>) -> Self {
        let m = verts.len();
        let idx: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut ds: Vec<(Label, (usize, usize))> = Vec::new();
        for (i, &x) in verts.iter().enumerate() {
            for &y in &t.rot[x] {
                if let Some(&j) = idx.get(&y) {
                    if i < j && j - i != 1 && !(i == 0 && j == m - 1) {
                        ds.push((t.label_of((x, y)).expect("edge"), (i, j)));
                    }
                }
            }
        }
        ds.sort_unstable();
        let diags: Vec<(usize, usize)> = ds.iter().map(|&(_, d)| d).collect();
        let local: Vec<Label> = (1..=ds.len()).collect();
        let state = LabelledTriangulation::from_parts(m, &diags, &local).expect("region is a triangulated disk");
        let mut local_to_comb = vec![0];
        local_to_comb.extend(ds.iter().map(|&(l, _)| l));
        Self { verts, local_to_comb, state }
    }

    fn run(&mut self, t: &mut CombTriangulation, seq: &[Label], out: &mut Vec<Label>) {
        for &l in seq {
            let (a, b) = self.state.diagonal_of(l).expect("local label");
            let got = t.flip((self.verts[a], self.verts[b])).expect("flip inside region");
            let (c, d) = self.state.flip_label(l).expect("local flip");
            debug_assert_eq!(got, diag(self.verts[c], self.verts[d]));
            out.push(self.local_to_comb[l]);
        }
    }
}

/// Raise one vertex to full degree, fan the rest from a second vertex, then
/// split the two apexes into a double wheel.
fn unlabelled_phase(t: &mut CombTriangulation, out: &mut Vec<Label>) -> usize {
    let v = t.v();
    let n = (0..v).max_by_key(|&x| (t.degree(x), std::cmp::Reverse(x))).expect("vertices");
    while t.degree(n) < v - 1 {
        let mut chord = None;
        let mut link = None;
        for (e, l) in t.labelled_edges() {
            let (x, y) = e;
            if x == n || y == n || !t.has_edge((n, x)) || !t.has_edge((n, y)) {
                continue;
            }
            let (a, b) = (t.prev(y, x), t.prev(x, y));
            let far = |z: usize| z != n && !t.has_edge((n, z));
            if (a == n && far(b)) || (b == n && far(a)) {
                link = Some(l);
                break;
            }
            if chord.is_none() && a != n && b != n && (far(a) || far(b)) && t.flip_target(e).is_some() {
                chord = Some(l);
            }
        }
        let l = link.or(chord).expect("a degree-raising or chord-reducing flip exists");
        t.flip_label(l).expect("legal");
        out.push(l);
    }
    let link: Vec<usize> = t.rot[n].clone();
    let s = *link.iter().max_by_key(|&&x| (t.degree(x), std::cmp::Reverse(x))).expect("link");
    let p = link.iter().position(|&x| x == s).expect("on link");
    let verts: Vec<usize> = (0..link.len()).map(|i| link[(p + i) % link.len()]).collect();
    let mut region = Region::new(t, verts);
    let (seq, _) = canonicalize_unlabelled(&region.state);
    region.run(t, &seq, out);
    let l = t.label_of((n, s)).expect("apexes adjacent");
    t.flip_label(l).expect("apex split");
    out.push(l);
    n
}

struct Labeller<'a> {
    t: &'a mut CombTriangulation,
    f: Frame,
    out: Vec<Label>,
}

impl Labeller<'_> {
    fn k(&self) -> usize {
        self.f.k()
    }

    fn side_labels(&self, side: Side) -> Vec<Label> {
        (0..self.k()).map(|i| self.t.label_of(self.f.spoke(side, i)).expect("spoke")).collect()
    }

    fn spine_labels(&self) -> Vec<Label> {
        (0..self.k()).map(|i| self.t.label_of(self.f.spine_edge(i)).expect("spine")).collect()
    }

    fn swap(&mut self, i: usize, side: Side, at_start: bool) {
        let s = spine_swap_at(self.t, &self.f, i, side, at_start).expect("double wheel");
        self.out.extend(s);
    }

    /// Permute the spokes of `side` so that spoke `i` carries `want[i]`,
    /// with the spine edge `j` cut so its spokes stay fixed.
    fn convex_pass(&mut self, side: Side, j: usize, want: &[Label]) {
        let k = self.k();
        if self.side_labels(side) == want {
            return;
        }
        let cut = self.t.label_of(self.f.spine_edge(j)).expect("spine");
        self.t.flip_label(cut).expect("cut");
        self.out.push(cut);
        let apex = self.f.apex(side);
        let verts: Vec<usize> = std::iter::once(apex).chain((1..=k).map(|t| self.f.at(j + t))).collect();
        let mut region = Region::new(self.t, verts);
        let comb_to_local: HashMap<Label, Label> =
            region.local_to_comb.iter().enumerate().skip(1).map(|(a, &b)| (b, a)).collect();
        let ds: Vec<(usize, usize)> = (2..k).map(|t| (0, t)).collect();
        let ls: Vec<Label> = (2..k).map(|t| comb_to_local[&want[(j + t) % k]]).collect();
        let target = LabelledTriangulation::from_parts(k + 1, &ds, &ls).expect("target fan");
        let seq = transform_between(&region.state, &target).expect("same polygon");
        region.run(self.t, seq.labels().expect("labelled"), &mut self.out);
        self.t.flip_label(cut).expect("uncut");
        self.out.push(cut);
        debug_assert_eq!(self.t.label_of(self.f.spine_edge(j)), Some(cut));
    }

    /// Spoke `i` ends with `want[i]`.
    fn permute_side(&mut self, side: Side, want: &[Label]) {
        let k = self.k();
        if k >= 6 {
            let (p0, p1) = ([k - 1, 0], [1, 2]);
            let dest0 = [want[k - 1], want[0]];
            let mut cur = self.side_labels(side);
            for p in p1 {
                if dest0.contains(&cur[p]) {
                    let m = (3..k - 1).find(|&m| !dest0.contains(&cur[m])).expect("room in the middle");
                    cur.swap(p, m);
                }
            }
            self.convex_pass(side, k - 1, &cur);
            for (slot, l) in p0.into_iter().zip([want[k - 1], want[0]]) {
                let at = cur.iter().position(|&x| x == l).expect("label on side");
                cur.swap(slot, at);
            }
            self.convex_pass(side, 1, &cur);
            self.convex_pass(side, k - 1, want);
        } else {
            for (j, arr) in small_passes(&self.side_labels(side), want) {
                self.convex_pass(side, j, &arr);
            }
        }
        debug_assert_eq!(self.side_labels(side), want);
    }

    /// Arrangement of `side` placing `front` labels at `slots`, others kept
    /// in their current relative order.
    fn arrangement(&self, side: Side, front: &[Label], slots: &[usize]) -> Vec<Label> {
        let cur = self.side_labels(side);
        let mut want = vec![0; self.k()];
        for (&s, &l) in slots.iter().zip(front) {
            want[s] = l;
        }
        let mut rest = cur.iter().filter(|l| !front.contains(l));
        for w in want.iter_mut().filter(|w| **w == 0) {
            *w = *rest.next().expect("enough labels");
        }
        want
    }

    fn run(&mut self) {
        let k = self.k();
        let in_a = |l: Label| l <= k;
        let in_b = |l: Label| l > k && l <= 2 * k;
        let in_c = |l: Label| l > 2 * k;

        // Spine labels first.
        let spine = self.spine_labels();
        let mut q: Vec<usize> = (0..k).filter(|&i| !in_a(spine[i])).collect();
        for side in [Side::N, Side::S] {
            let mine: Vec<Label> = self.side_labels(side).into_iter().filter(|&l| in_a(l)).collect();
            let slots: Vec<usize> = q.drain(..mine.len()).collect();
            if mine.is_empty() {
                continue;
            }
            let want = self.arrangement(side, &mine, &slots);
            self.permute_side(side, &want);
            for &i in &slots {
                self.swap(i, side, true);
            }
        }

        // Exchange misplaced spokes across the spine.
        let wrong_n: Vec<Label> = self.side_labels(Side::N).into_iter().filter(|&l| in_c(l)).collect();
        let wrong_s: Vec<Label> = self.side_labels(Side::S).into_iter().filter(|&l| in_b(l)).collect();
        let r = wrong_n.len();
        if r > 0 {
            let slots: Vec<usize> = (0..r).collect();
            let want = self.arrangement(Side::N, &wrong_n, &slots);
            self.permute_side(Side::N, &want);
            let want = self.arrangement(Side::S, &wrong_s, &slots);
            self.permute_side(Side::S, &want);
            for i in 0..r {
                self.swap(i, Side::N, true);
                self.swap(i, Side::S, true);
                self.swap(i, Side::N, true);
            }
        }

        let want_b: Vec<Label> = (k + 1..=2 * k).collect();
        let want_c: Vec<Label> = (2 * k + 1..=3 * k).collect();
        let want_a: Vec<Label> = (1..=k).collect();
        self.permute_side(Side::N, &want_b);
        self.permute_side(Side::S, &want_c);

        // Sort the spine through the N side.
        if self.spine_labels() != want_a {
            for i in 0..k {
                self.swap(i, Side::N, true);
            }
            self.permute_side(Side::N, &want_a);
            for i in 0..k {
                self.swap(i, Side::N, true);
            }
        }
    }
}

/// Fewest convex passes turning `cur` into `want` for a short spine; a
/// pass cutting spine edge `j` may permute every spoke except `j, j + 1`.
fn small_passes(cur: &[Label], want: &[Label]) -> Vec<(usize, Vec<Label>)> {
    let k = cur.len();
    let mut parent: HashMap<Vec<Label>, Option<(Vec<Label>, usize)>> = HashMap::from([(cur.to_vec(), None)]);
    let mut queue = VecDeque::from([cur.to_vec()]);
    while let Some(x) = queue.pop_front() {
        if x == want {
            break;
        }
        for j in 0..k {
            let free: Vec<usize> = (2..k).map(|t| (j + t) % k).collect();
            for p in crate::oracle::permutations(free.len()) {
                let mut y = x.clone();
                for (slot, &from) in free.iter().zip(&p) {
                    y[*slot] = x[free[from - 1]];
                }
                if !parent.contains_key(&y) {
                    parent.insert(y.clone(), Some((x.clone(), j)));
                    queue.push_back(y);
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut at = want.to_vec();
    while let Some(Some((prev, j))) = parent.get(&at) {
        out.push((*j, at.clone()));
        at = prev.clone();
    }
    out.reverse();
    out
}

/// Canonicalization split into its unlabelled and labelled phases.
#[derive(Clone, Debug)]
pub struct CombCanonicalization {
    pub unlabelled: Vec<Label>,
    pub labelled: Vec<Label>,
    pub result: CombTriangulation,
}

impl CombCanonicalization {
    pub fn sequence(&self) -> FlipSequence {
        FlipSequence::Labelled(self.unlabelled.iter().chain(&self.labelled).copied().collect())
    }
}

/// Flip `t` into a state isomorphic to `double_wheel(t.v())`.
pub fn comb_canonicalize(t: &CombTriangulation) -> Result<CombCanonicalization> {
    let v = t.v();
    if v < 5 {
        return Err(Error::InvalidTriangulation(format!("{v} vertices; at least 5 needed")));
    }
    let mut s = t.clone();
    if v == 5 {
        let labelled = small_search(&s)?;
        for &l in &labelled {
            s.flip_label(l)?;
        }
        return Ok(CombCanonicalization { unlabelled: Vec::new(), labelled, result: s });
    }
    let mut unlabelled = Vec::new();
    let n = unlabelled_phase(&mut s, &mut unlabelled);
    let f = Frame::detect(&s, n)?;
    let mut lab = Labeller { t: &mut s, f, out: Vec::new() };
    lab.run();
    let labelled = lab.out;
    Ok(CombCanonicalization { unlabelled, labelled, result: s })
}

/// Flips from `a` to a state isomorphic to `b`: canonicalize `a`, then undo
/// the canonicalization of `b`.
pub fn comb_transform(a: &CombTriangulation, b: &CombTriangulation) -> Result<FlipSequence> {
    if a.v() != b.v() {
        return Err(Error::SizeMismatch(a.v(), b.v()));
    }
    if labelled_isomorphic(a, b) {
        return Ok(FlipSequence::Labelled(Vec::new()));
    }
    let ca = comb_canonicalize(a)?.sequence();
    let cb = comb_canonicalize(b)?.sequence();
    let mut steps = ca.labels().expect("labelled").to_vec();
    steps.extend(cb.labels().expect("labelled").iter().rev());
    Ok(FlipSequence::Labelled(steps))
}

/// Isomorphism class key: isomorphisms preserve labels, so rooting at the
/// edge labelled 1 suffices.
fn class_key(t: &CombTriangulation) -> Vec<u32> {
    let (u, w) = t.edge_of(1).expect("label 1");
    [(u, w, false), (u, w, true), (w, u, false), (w, u, true)]
        .into_iter()
        .map(|(a, b, m)| t.code_from(a, b, m))
        .min()
        .expect("four codes")
}

/// For every class at five vertices, a label whose flip moves one step
/// closer to the double wheel. Flips are involutions, so the search runs
/// backwards from the goal.
fn five_vertex_table() -> &'static HashMap<Vec<u32>, Label> {
    static TABLE: std::sync::OnceLock<HashMap<Vec<u32>, Label>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let goal = double_wheel(5).expect("v = 5");
        let mut toward: HashMap<Vec<u32>, Label> = HashMap::new();
        let mut seen = HashSet::from([class_key(&goal)]);
        let mut queue = VecDeque::from([goal]);
        while let Some(s) = queue.pop_front() {
            for (e, l) in s.labelled_edges() {
                if s.flip_target(e).is_none() {
                    continue;
                }
                let mut u = s.clone();
                u.flip(e).expect("legal");
                let ku = class_key(&u);
                if seen.insert(ku.clone()) {
                    toward.insert(ku, l);
                    queue.push_back(u);
                }
            }
        }
        toward
    })
}

/// Shortest path to the double-wheel class; only used at five vertices,
/// where the spine swap has no room.
fn small_search(t: &CombTriangulation) -> Result<Vec<Label>> {
    let table = five_vertex_table();
    let mut s = t.clone();
    let mut path = Vec::new();
    while let Some(&l) = table.get(&class_key(&s)) {
        s.flip_label(l)?;
        path.push(l);
        if path.len() > table.len() {
            return Err(Error::Unreachable);
        }
    }
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombDoc {
    pub v: usize,
    pub rotation: Vec<Vec<usize>>,
    pub edges: Vec<[usize; 2]>,
    pub labels: Vec<Label>,
}

impl From<&CombTriangulation> for CombDoc {
    fn from(t: &CombTriangulation) -> Self {
        let (edges, labels) = t.labelled_edges().map(|((a, b), l)| ([a, b], l)).unzip();
        Self { v: t.v(), rotation: t.rot.clone(), edges, labels }
    }
}

impl TryFrom<&CombDoc> for CombTriangulation {
    type Error = Error;

    fn try_from(d: &CombDoc) -> Result<Self> {
        if d.rotation.len() != d.v {
            return Err(Error::SizeMismatch(d.rotation.len(), d.v));
        }
        if d.edges.len() != d.labels.len() {
            return Err(Error::SizeMismatch(d.edges.len(), d.labels.len()));
        }
        let pairs: Vec<(Edge, Label)> = d.edges.iter().zip(&d.labels).map(|(e, &l)| ((e[0], e[1]), l)).collect();
        CombTriangulation::new(d.rotation.clone(), &pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octahedron() -> CombTriangulation {
        // Spine square 0..4 with apexes 4 and 5.
        double_wheel(6).unwrap()
    }

    #[test]
    fn double_wheel_shapes() {
        for v in 5..=64 {
            let t = double_wheel(v).unwrap();
            assert_eq!(t.edge_count(), 3 * v - 6);
            assert_eq!(t.faces().len(), 2 * v - 4);
        }
        assert_eq!(double_wheel(8).unwrap().edge_count(), 18);
        assert_eq!(double_wheel(4), Err(Error::TooSmall(4)));
    }

    #[test]
    fn flips_and_involution() {
        let mut t = double_wheel(5).unwrap();
        let before = t.clone();
        let e = t.flip((0, 1)).unwrap();
        assert_eq!(e, (3, 4));
        assert_eq!(t.faces().len(), 6);
        t.flip(e).unwrap();
        assert_eq!(t, before);

        let o = octahedron();
        for (e, _) in o.labelled_edges() {
            assert!(o.flip_target(e).is_some(), "{e:?}");
        }
        // After one flip, the new edge's endpoints are spanned by a quadrilateral
        // whose other diagonal already exists.
        let mut t = double_wheel(5).unwrap();
        t.flip((0, 1)).unwrap();
        assert_eq!(t.flip((0, 2)), Err(Error::NotFlippable(0, 2)));
        assert_eq!(t.flip((0, 1)), Err(Error::UnknownEdge(0, 1)));
    }

    #[test]
    fn isomorphism() {
        let t = double_wheel(7).unwrap();
        assert!(labelled_isomorphic(&t, &t));
        let mut rot: Vec<Vec<usize>> = (0..7).map(|u| t.rotation(u).to_vec()).collect();
        let pairs: Vec<(Edge, Label)> = t.labelled_edges().collect();
        let mut swapped = pairs.clone();
        swapped[0].1 = pairs[1].1;
        swapped[1].1 = pairs[0].1;
        let u = CombTriangulation::new(rot.clone(), &swapped).unwrap();
        assert!(!labelled_isomorphic(&t, &u));
        for r in &mut rot {
            r.reverse();
        }
        let mirror = CombTriangulation::new(rot, &pairs).unwrap();
        assert!(labelled_isomorphic(&t, &mirror));
        assert!(!labelled_isomorphic_with(&t, &mirror, false));
        assert_eq!(t.canonical_form(), mirror.canonical_form());
    }

    #[test]
    fn spine_swap_exchanges() {
        for v in 6..=18 {
            let t = double_wheel(v).unwrap();
            let f = Frame::detect(&t, v - 2).unwrap();
            for i in 0..v - 2 {
                for side in [Side::N, Side::S] {
                    for at_start in [true, false] {
                        let mut u = t.clone();
                        let script = spine_swap_at(&mut u, &f, i, side, at_start).unwrap();
                        assert_eq!(script.len(), 7);
                        let b = if at_start { f.spoke(side, i) } else { f.spoke(side, i + 1) };
                        let a = f.spine_edge(i);
                        assert_eq!(u.label_of(a), t.label_of(b));
                        assert_eq!(u.label_of(b), t.label_of(a));
                        let mut u2 = u.clone();
                        spine_swap_at(&mut u2, &f, i, side, at_start).unwrap();
                        assert_eq!(u2, t);
                    }
                }
            }
        }
    }

    #[test]
    fn canonicalize_small() {
        let t = double_wheel(5).unwrap();
        let c = comb_canonicalize(&t).unwrap();
        assert!(c.sequence().cost() == 0);
        for v in 5..=12 {
            let mut t = double_wheel(v).unwrap();
            let mut x = 7usize;
            for _ in 0..6 * v {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let l = 1 + (x >> 33) % t.edge_count();
                if t.flip_target(t.edge_of(l).unwrap()).is_some() {
                    t.flip_label(l).unwrap();
                }
            }
            let c = comb_canonicalize(&t).unwrap();
            let mut r = t.clone();
            r.apply(&c.sequence()).unwrap();
            assert_eq!(r, c.result);
            assert!(labelled_isomorphic(&r, &double_wheel(v).unwrap()), "v = {v}");
        }
    }

    #[test]
    fn doc_roundtrip() {
        let t = double_wheel(6).unwrap();
        let d = CombDoc::from(&t);
        let back = CombTriangulation::try_from(&d).unwrap();
        assert_eq!(back, t);
    }
}

//! Edge-labelled triangulations of a convex polygon.
//!
//! Vertices are `0..m` in counter-clockwise order. Boundary edges are
//! implicit; only the `m - 3` diagonals are stored, each as a sorted pair.
//! The fan at apex 0 is read left to right by increasing second endpoint, so
//! fan position `t` is the diagonal `(0, t + 2)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelsort;

pub type Label = usize;
pub type Diagonal = (usize, usize);

pub fn diag(a: usize, b: usize) -> Diagonal {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A triangulation of the convex `m`-gon, kept as an adjacency structure
/// that includes the boundary edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexTriangulation {
    m: usize,
    nbrs: Vec<BTreeSet<usize>>,
}

impl ConvexTriangulation {
    pub fn new(m: usize, diagonals: &[Diagonal]) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidTriangulation(format!("m = {m} < 3")));
        }
        if diagonals.len() != m - 3 {
            return Err(Error::InvalidTriangulation(format!(
                "expected {} diagonals, got {}",
                m - 3,
                diagonals.len()
            )));
        }
        let mut ds: Vec<Diagonal> = Vec::with_capacity(diagonals.len());
        for &(a, b) in diagonals {
            let (a, b) = diag(a, b);
            if b >= m || b - a < 2 || (a == 0 && b == m - 1) {
                return Err(Error::InvalidTriangulation(format!("({a}, {b}) is not a chord")));
            }
            ds.push((a, b));
        }
        // Laminar check: sorted by left end ascending, right end descending.
        ds.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        let mut stack: Vec<Diagonal> = Vec::new();
        for (i, &(a, b)) in ds.iter().enumerate() {
            if i > 0 && ds[i - 1] == (a, b) {
                return Err(Error::InvalidTriangulation(format!("duplicate ({a}, {b})")));
            }
            while stack.last().is_some_and(|&(_, tb)| tb <= a) {
                stack.pop();
            }
            if let Some(&(ta, tb)) = stack.last() {
                if tb < b {
                    return Err(Error::InvalidTriangulation(format!(
                        "({ta}, {tb}) crosses ({a}, {b})"
                    )));
                }
            }
            stack.push((a, b));
        }
        let mut t = Self::boundary(m);
        for &(a, b) in &ds {
            t.nbrs[a].insert(b);
            t.nbrs[b].insert(a);
        }
        Ok(t)
    }

    fn boundary(m: usize) -> Self {
        let mut nbrs = vec![BTreeSet::new(); m];
        for (v, set) in nbrs.iter_mut().enumerate() {
            set.insert((v + 1) % m);
            set.insert((v + m - 1) % m);
        }
        Self { m, nbrs }
    }

    /// The fan at apex 0.
    pub fn fan(m: usize) -> Self {
        let ds: Vec<Diagonal> = (2..m.saturating_sub(1)).map(|b| (0, b)).collect();
        Self::new(m, &ds).expect("fan is a triangulation")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of diagonals.
    pub fn n(&self) -> usize {
        self.m - 3
    }

    /// All neighbours of `v`, boundary neighbours included.
    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.nbrs[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.nbrs[v].len()
    }

    pub fn is_boundary(&self, (a, b): Diagonal) -> bool {
        b == a + 1 || (a == 0 && b == self.m - 1)
    }

    pub fn has_edge(&self, (a, b): Diagonal) -> bool {
        a < self.m && self.nbrs[a].contains(&b)
    }

    pub fn contains(&self, d: Diagonal) -> bool {
        let d = diag(d.0, d.1);
        d.1 < self.m && !self.is_boundary(d) && self.has_edge(d)
    }

    /// Diagonals in lexicographic order.
    pub fn diagonals(&self) -> Vec<Diagonal> {
        let mut out = Vec::with_capacity(self.n());
        for a in 0..self.m {
            for &b in self.nbrs[a].range(a + 2..) {
                if !(a == 0 && b == self.m - 1) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_fan(&self) -> bool {
        self.nbrs[0].len() == self.m - 1
    }

    /// Apex of the triangle on the `a+1..b` side of the edge `(a, b)`.
    fn inner_apex(&self, a: usize, b: usize) -> usize {
        *self.nbrs[a].range(a + 1..b).next_back().expect("edge bounds a triangle")
    }

    /// Apex of the triangle on the other side of the edge `(a, b)`.
    fn outer_apex(&self, a: usize, b: usize) -> usize {
        match self.nbrs[a].range(b + 1..).next() {
            Some(&c) => c,
            None => *self.nbrs[a].range(..a).next().expect("edge bounds a triangle"),
        }
    }

    /// The quadrilateral around diagonal `d`, in boundary order starting at `d.0`.
    pub fn neighbors_of(&self, d: Diagonal) -> Result<[usize; 4]> {
        let (a, b) = diag(d.0, d.1);
        if !self.contains((a, b)) {
            return Err(Error::UnknownDiagonal((a, b)));
        }
        let c = self.inner_apex(a, b);
        let e = self.outer_apex(a, b);
        Ok([a, c, b, e])
    }

    /// The two triangles incident to diagonal `d`, each as a sorted triple.
    pub fn triangles_of(&self, d: Diagonal) -> Result<[[usize; 3]; 2]> {
        let [a, c, b, e] = self.neighbors_of(d)?;
        let mut t1 = [a, c, b];
        let mut t2 = [a, b, e];
        t1.sort_unstable();
        t2.sort_unstable();
        Ok([t1, t2])
    }

    /// Flip `d` in place and return the new diagonal.
    pub fn flip(&mut self, d: Diagonal) -> Result<Diagonal> {
        let [a, c, b, e] = self.neighbors_of(d)?;
        self.nbrs[a].remove(&b);
        self.nbrs[b].remove(&a);
        self.nbrs[c].insert(e);
        self.nbrs[e].insert(c);
        Ok(diag(c, e))
    }
}

/// Bijection between the current diagonals and the labels `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelling {
    by_label: Vec<Diagonal>,
    by_diag: HashMap<Diagonal, Label>,
}

impl Labelling {
    pub fn new(pairs: impl IntoIterator<Item = (Diagonal, Label)>) -> Result<Self> {
        let pairs: Vec<(Diagonal, Label)> = pairs.into_iter().collect();
        let n = pairs.len();
        let mut by_label = vec![(usize::MAX, usize::MAX); n];
        let mut by_diag = HashMap::with_capacity(n);
        for (d, l) in pairs {
            let d = diag(d.0, d.1);
            if l == 0 || l > n || by_label[l - 1].0 != usize::MAX {
                return Err(Error::InvalidTriangulation(format!("labels are not a permutation of 1..={n}")));
            }
            if by_diag.insert(d, l).is_some() {
                return Err(Error::InvalidTriangulation(format!("diagonal ({}, {}) labelled twice", d.0, d.1)));
            }
            by_label[l - 1] = d;
        }
        Ok(Self { by_label, by_diag })
    }

    pub fn label_of(&self, d: Diagonal) -> Option<Label> {
        self.by_diag.get(&diag(d.0, d.1)).copied()
    }

    pub fn diagonal_of(&self, l: Label) -> Option<Diagonal> {
        (l >= 1 && l <= self.by_label.len()).then(|| self.by_label[l - 1])
    }

    pub fn len(&self) -> usize {
        self.by_label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_label.is_empty()
    }

    fn relabel_edge(&mut self, old: Diagonal, new: Diagonal) {
        let l = self.by_diag.remove(&old).expect("labelled diagonal");
        self.by_diag.insert(new, l);
        self.by_label[l - 1] = new;
    }
}

/// An edge-labelled triangulation `(T, l)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledTriangulation {
    tri: ConvexTriangulation,
    lab: Labelling,
}

impl LabelledTriangulation {
    pub fn new(tri: ConvexTriangulation, lab: Labelling) -> Result<Self> {
        let ds = tri.diagonals();
        if ds.len() != lab.len() || ds.iter().any(|&d| lab.label_of(d).is_none()) {
            return Err(Error::InvalidTriangulation("labelling domain differs from diagonal set".into()));
        }
        Ok(Self { tri, lab })
    }

    /// Build from parallel lists of diagonals and labels.
    pub fn from_parts(m: usize, diagonals: &[Diagonal], labels: &[Label]) -> Result<Self> {
        if diagonals.len() != labels.len() {
            return Err(Error::SizeMismatch(diagonals.len(), labels.len()));
        }
        let tri = ConvexTriangulation::new(m, diagonals)?;
        let lab = Labelling::new(diagonals.iter().copied().zip(labels.iter().copied()))?;
        Self::new(tri, lab)
    }

    /// Label diagonals `1..=n` in lexicographic order.
    pub fn with_sorted_labels(tri: ConvexTriangulation) -> Self {
        let lab = Labelling::new(tri.diagonals().into_iter().zip(1..)).expect("fresh labelling");
        Self { tri, lab }
    }

    /// The fan at apex 0 whose reading is `perm`.
    pub fn from_fan(perm: &[Label]) -> Result<Self> {
        let m = perm.len() + 3;
        let ds: Vec<Diagonal> = (0..perm.len()).map(|t| (0, t + 2)).collect();
        Self::from_parts(m, &ds, perm)
    }

    pub fn tri(&self) -> &ConvexTriangulation {
        &self.tri
    }

    pub fn labelling(&self) -> &Labelling {
        &self.lab
    }

    pub fn m(&self) -> usize {
        self.tri.m
    }

    pub fn n(&self) -> usize {
        self.tri.n()
    }

    pub fn label_of(&self, d: Diagonal) -> Option<Label> {
        self.lab.label_of(d)
    }

    pub fn diagonal_of(&self, l: Label) -> Option<Diagonal> {
        self.lab.diagonal_of(l)
    }

    /// `(diagonal, label)` pairs in lexicographic diagonal order.
    pub fn entries(&self) -> Vec<(Diagonal, Label)> {
        self.tri
            .diagonals()
            .into_iter()
            .map(|d| (d, self.lab.label_of(d).expect("labelled")))
            .collect()
    }

    pub fn flip_diagonal(&mut self, d: Diagonal) -> Result<Diagonal> {
        let d = diag(d.0, d.1);
        let new = self.tri.flip(d)?;
        self.lab.relabel_edge(d, new);
        Ok(new)
    }

    pub fn flip_label(&mut self, l: Label) -> Result<Diagonal> {
        let d = self.diagonal_of(l).ok_or(Error::UnknownLabel(l))?;
        self.flip_diagonal(d)
    }

    /// The fan reading `rho`, if the state is the fan at apex 0.
    pub fn fan_permutation(&self) -> Result<Vec<Label>> {
        if !self.tri.is_fan() {
            return Err(Error::NotFan);
        }
        Ok((0..self.n()).map(|t| self.lab.label_of((0, t + 2)).expect("fan diagonal")).collect())
    }

    pub fn apply(&mut self, seq: &FlipSequence) -> std::result::Result<(), ReplayFailure> {
        match seq {
            FlipSequence::Labelled(steps) => {
                for (i, &l) in steps.iter().enumerate() {
                    self.flip_label(l).map_err(|e| ReplayFailure::at(i, e))?;
                }
            }
            FlipSequence::Unlabelled(steps) => {
                for (i, &d) in steps.iter().enumerate() {
                    self.flip_diagonal(d).map_err(|e| ReplayFailure::at(i, e))?;
                }
            }
        }
        Ok(())
    }
}

/// `flip` as a pure function: returns the new state and the new diagonal.
pub fn flip(state: &LabelledTriangulation, d: Diagonal) -> Result<(LabelledTriangulation, Diagonal)> {
    let mut next = state.clone();
    let nd = next.flip_diagonal(d)?;
    Ok((next, nd))
}

/// A replayable list of single flips.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "steps", rename_all = "lowercase")]
pub enum FlipSequence {
    Labelled(Vec<Label>),
    Unlabelled(Vec<Diagonal>),
}

impl FlipSequence {
    pub fn cost(&self) -> usize {
        match self {
            Self::Labelled(s) => s.len(),
            Self::Unlabelled(s) => s.len(),
        }
    }

    pub fn labels(&self) -> Option<&[Label]> {
        match self {
            Self::Labelled(s) => Some(s),
            Self::Unlabelled(_) => None,
        }
    }
}

impl Default for FlipSequence {
    fn default() -> Self {
        Self::Labelled(Vec::new())
    }
}

/// Where and why a replay stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayFailure {
    pub step: Option<usize>,
    pub reason: String,
}

impl ReplayFailure {
    fn at(step: usize, e: Error) -> Self {
        Self { step: Some(step), reason: e.to_string() }
    }
}

impl fmt::Display for ReplayFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "step {}: {}", s + 1, self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

/// Replay `seq` from `start` and compare the result with `target` exactly.
pub fn verify_sequence(
    start: &LabelledTriangulation,
    seq: &FlipSequence,
    target: &LabelledTriangulation,
) -> std::result::Result<(), ReplayFailure> {
    if start.m() != target.m() {
        return Err(ReplayFailure { step: None, reason: format!("m differs: {} vs {}", start.m(), target.m()) });
    }
    let mut s = start.clone();
    s.apply(seq)?;
    if s != *target {
        return Err(ReplayFailure { step: None, reason: "final state differs from target".into() });
    }
    Ok(())
}

/// Labelled sequences are inverted by reversing their order.
pub fn reverse_labelled(steps: &[Label]) -> Vec<Label> {
    steps.iter().rev().copied().collect()
}

/// Greedy apex-degree raising to the fan at 0. Returns the flipped labels
/// and the final state.
pub fn canonicalize_unlabelled(state: &LabelledTriangulation) -> (Vec<Label>, LabelledTriangulation) {
    let mut s = state.clone();
    let mut out = Vec::new();
    let apex: Vec<usize> = s.tri.nbrs[0].iter().copied().collect();
    let mut pending: Vec<(usize, usize)> = apex.windows(2).map(|w| (w[0], w[1])).collect();
    while let Some((a, b)) = pending.pop() {
        if b == a + 1 {
            continue;
        }
        out.push(s.label_of((a, b)).expect("labelled"));
        let (_, c) = s.flip_diagonal((a, b)).expect("diagonal present");
        pending.push((a, c));
        pending.push((c, b));
    }
    (out, s)
}

/// A flip sequence from `a` to `b`: canonicalize `a`, sort the fan into the
/// fan reading of canonicalized `b`, then undo the canonicalization of `b`.
pub fn transform_between(a: &LabelledTriangulation, b: &LabelledTriangulation) -> Result<FlipSequence> {
    if a.m() != b.m() {
        return Err(Error::SizeMismatch(a.m(), b.m()));
    }
    if a == b {
        return Ok(FlipSequence::Labelled(Vec::new()));
    }
    let (mut steps, fan_a) = canonicalize_unlabelled(a);
    let (to_b, fan_b) = canonicalize_unlabelled(b);
    let rho_b = fan_b.fan_permutation()?;
    let mut key = vec![0; a.n() + 1];
    for (t, &l) in rho_b.iter().enumerate() {
        key[l] = t;
    }
    let mut state = fan_a;
    steps.extend(labelsort::sort_fan_by_key(&mut state, &key)?);
    steps.extend(reverse_labelled(&to_b));
    Ok(FlipSequence::Labelled(steps))
}

/// JSON form of a labelled triangulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangulationDoc {
    pub m: usize,
    pub diagonals: Vec<[usize; 2]>,
    pub labels: Vec<Label>,
}

impl From<&LabelledTriangulation> for TriangulationDoc {
    fn from(s: &LabelledTriangulation) -> Self {
        let entries = s.entries();
        Self {
            m: s.m(),
            diagonals: entries.iter().map(|&((a, b), _)| [a, b]).collect(),
            labels: entries.iter().map(|&(_, l)| l).collect(),
        }
    }
}

impl TryFrom<&TriangulationDoc> for LabelledTriangulation {
    type Error = Error;

    fn try_from(doc: &TriangulationDoc) -> Result<Self> {
        let ds: Vec<Diagonal> = doc.diagonals.iter().map(|&[a, b]| (a, b)).collect();
        Self::from_parts(doc.m, &ds, &doc.labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt(m: usize, ds: &[Diagonal], ls: &[Label]) -> LabelledTriangulation {
        LabelledTriangulation::from_parts(m, ds, ls).unwrap()
    }

    #[test]
    fn flip_square() {
        let mut s = lt(4, &[(0, 2)], &[1]);
        assert_eq!(s.flip_diagonal((0, 2)).unwrap(), (1, 3));
        assert_eq!(s, lt(4, &[(1, 3)], &[1]));
    }

    #[test]
    fn flip_hexagon() {
        let s = lt(6, &[(0, 2), (2, 4), (0, 4)], &[1, 2, 3]);
        let (t, d) = flip(&s, (0, 2)).unwrap();
        assert_eq!(d, (1, 4));
        assert_eq!(t.label_of((1, 4)), Some(1));
    }

    #[test]
    fn quadrilaterals() {
        let f = ConvexTriangulation::fan(5);
        assert_eq!(f.neighbors_of((0, 2)).unwrap(), [0, 1, 2, 3]);
        assert_eq!(f.neighbors_of((0, 3)).unwrap(), [0, 2, 3, 4]);
        let t = ConvexTriangulation::new(6, &[(0, 2), (2, 4), (0, 4)]).unwrap();
        assert_eq!(t.neighbors_of((0, 4)).unwrap(), [0, 2, 4, 5]);
        assert_eq!(t.neighbors_of((1, 3)), Err(Error::UnknownDiagonal((1, 3))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConvexTriangulation::new(6, &[(0, 3), (1, 4), (0, 4)]).is_err());
        assert!(ConvexTriangulation::new(5, &[(0, 4), (0, 2)]).is_err());
        assert!(ConvexTriangulation::new(5, &[(0, 2)]).is_err());
        assert!(ConvexTriangulation::new(5, &[(0, 2), (0, 2)]).is_err());
        assert!(LabelledTriangulation::from_parts(5, &[(0, 2), (0, 3)], &[1, 1]).is_err());
        assert!(ConvexTriangulation::new(3, &[]).is_ok());
    }

    #[test]
    fn verify_examples() {
        let s = lt(4, &[(0, 2)], &[1]);
        let t = lt(4, &[(1, 3)], &[1]);
        assert!(verify_sequence(&s, &FlipSequence::Labelled(vec![]), &s).is_ok());
        assert!(verify_sequence(&s, &FlipSequence::Labelled(vec![1]), &t).is_ok());
        let err = verify_sequence(&s, &FlipSequence::Labelled(vec![2]), &t).unwrap_err();
        assert_eq!(err.step, Some(0));
    }

    #[test]
    fn canonicalize_comb_at_one() {
        let s = lt(6, &[(1, 3), (1, 4), (1, 5)], &[1, 2, 3]);
        let (seq, f) = canonicalize_unlabelled(&s);
        assert_eq!(seq.len(), 3);
        assert_eq!(f.tri().diagonals(), vec![(0, 2), (0, 3), (0, 4)]);
        let (seq, _) = canonicalize_unlabelled(&f);
        assert!(seq.is_empty());
    }

    #[test]
    fn pentagon_transform() {
        let a = LabelledTriangulation::from_fan(&[2, 1]).unwrap();
        let b = LabelledTriangulation::from_fan(&[1, 2]).unwrap();
        let seq = transform_between(&a, &b).unwrap();
        assert_eq!(seq.cost(), 5);
        assert!(verify_sequence(&a, &seq, &b).is_ok());
        assert_eq!(transform_between(&a, &a).unwrap().cost(), 0);
    }

    #[test]
    fn json_roundtrip() {
        let s = lt(6, &[(0, 2), (2, 4), (0, 4)], &[3, 1, 2]);
        let doc = TriangulationDoc::from(&s);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(text, r#"{"m":6,"diagonals":[[0,2],[0,4],[2,4]],"labels":[3,2,1]}"#);
        let back: TriangulationDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(LabelledTriangulation::try_from(&back).unwrap(), s);
        let seq = FlipSequence::Unlabelled(vec![(0, 2)]);
        assert_eq!(serde_json::to_string(&seq).unwrap(), r#"{"mode":"unlabelled","steps":[[0,2]]}"#);
    }
}

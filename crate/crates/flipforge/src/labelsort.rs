//! Sorting labels inside the fan at apex 0.
//!
//! Every routine works on the live state and records the flipped labels.
//! "Parking" a fan edge `(0, v)` flips it away from the apex; flipping the
//! same label again brings it back, provided everything parked after it has
//! already been restored.

use serde::{Deserialize, Serialize};

use crate::convex::{Label, LabelledTriangulation};
use crate::error::{Error, Result};

/// Flip script exchanging two consecutive fan edges `x, y` of a pentagon:
/// entry `0` flips the label of `x`, entry `1` the label of `y`.
pub const PENTAGON_SCRIPT: [usize; 5] = [1, 0, 1, 0, 1];

/// A contiguous range of fan positions with a selected subsequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanBlock {
    pub lo: usize,
    pub hi: usize,
    pub subsequence: Vec<usize>,
}

impl FanBlock {
    pub fn new(lo: usize, hi: usize, subsequence: Vec<usize>) -> Self {
        Self { lo, hi, subsequence }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.lo > self.hi || self.hi >= n {
            return Err(Error::OutOfRange(format!("block [{}..{}] with n = {n}", self.lo, self.hi)));
        }
        let inside = self.subsequence.iter().all(|&p| p >= self.lo && p <= self.hi);
        let increasing = self.subsequence.windows(2).all(|w| w[0] < w[1]);
        if !inside || !increasing {
            return Err(Error::OutOfRange("subsequence must increase inside the block".into()));
        }
        Ok(())
    }
}

pub(crate) struct Recorder<'a> {
    pub(crate) s: &'a mut LabelledTriangulation,
    pub(crate) out: Vec<Label>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(s: &'a mut LabelledTriangulation) -> Self {
        Self { s, out: Vec::new() }
    }

    fn flip(&mut self, l: Label) {
        self.s.flip_label(l).expect("label present");
        self.out.push(l);
    }

    /// Flip the apex edge `(0, v)` out of the fan and return its label.
    fn park(&mut self, v: usize) -> Label {
        let l = self.s.label_of((0, v)).expect("apex edge present");
        self.flip(l);
        l
    }

    /// Exchange the labels of apex edges `(0, p)` and `(0, q)`, which must
    /// be consecutive around the apex.
    fn swap_adjacent(&mut self, p: usize, q: usize) {
        let pair = [self.s.label_of((0, p)).expect("apex edge"), self.s.label_of((0, q)).expect("apex edge")];
        for &r in &PENTAGON_SCRIPT {
            self.flip(pair[r]);
        }
    }

    /// Reverse the labels on apex edges `(0, v)` for `v` in `verts`, which
    /// must be consecutive around the apex.
    fn reverse_consecutive(&mut self, verts: &[usize]) {
        enum Undo {
            One(Label),
            Pair(Label, Label, usize, usize),
        }
        let mut rest = verts.to_vec();
        let mut undo = Vec::new();
        while rest.len() > 2 {
            let mid = rest.len() / 2;
            if rest.len() % 2 == 1 {
                undo.push(Undo::One(self.park(rest[mid])));
                rest.remove(mid);
            } else {
                let (p, q) = (rest[mid - 1], rest[mid]);
                let lp = self.park(p);
                let lq = self.park(q);
                undo.push(Undo::Pair(lp, lq, p, q));
                rest.drain(mid - 1..=mid);
            }
        }
        if rest.len() == 2 {
            self.swap_adjacent(rest[0], rest[1]);
        }
        while let Some(u) = undo.pop() {
            match u {
                Undo::One(l) => self.flip(l),
                Undo::Pair(lp, lq, p, q) => {
                    self.flip(lq);
                    self.flip(lp);
                    self.swap_adjacent(p, q);
                }
            }
        }
    }

    /// Park every apex edge in `lo..=hi` not in `keep`; returns the labels
    /// in parking order.
    fn park_others(&mut self, lo: usize, hi: usize, keep: &[usize]) -> Vec<Label> {
        let mut parked = Vec::new();
        let mut k = keep.iter().peekable();
        for p in lo..=hi {
            if k.peek() == Some(&&p) {
                k.next();
            } else {
                parked.push(self.park(p + 2));
            }
        }
        parked
    }

    fn unpark(&mut self, parked: &[Label]) {
        for &l in parked.iter().rev() {
            self.flip(l);
        }
    }
}

fn require_fan(s: &LabelledTriangulation) -> Result<Vec<Label>> {
    s.fan_permutation()
}

/// Exchange the labels at fan positions `pos` and `pos + 1` with five flips.
pub fn pentagon_swap(s: &mut LabelledTriangulation, pos: usize) -> Result<Vec<Label>> {
    if pos + 2 > s.n() {
        return Err(Error::OutOfRange(format!("pentagon at {pos} with n = {}", s.n())));
    }
    let (p, q) = (pos + 2, pos + 3);
    let apex = s.tri().neighbors(0);
    if !apex.contains(&p) || !apex.contains(&q) {
        return Err(Error::NotFan);
    }
    let mut rec = Recorder::new(s);
    rec.swap_adjacent(p, q);
    Ok(rec.out)
}

/// Reverse the labels at the selected positions of a fan block.
pub fn reverse_subsequence(s: &mut LabelledTriangulation, block: &FanBlock) -> Result<Vec<Label>> {
    block.check(s.n())?;
    require_fan(s)?;
    let sel = &block.subsequence;
    if sel.len() <= 1 {
        return Ok(Vec::new());
    }
    let mut rec = Recorder::new(s);
    let (first, last) = (sel[0], sel[sel.len() - 1]);
    let parked = rec.park_others(first, last, sel);
    let verts: Vec<usize> = sel.iter().map(|&p| p + 2).collect();
    rec.reverse_consecutive(&verts);
    rec.unpark(&parked);
    Ok(rec.out)
}

/// Sort the fan so that position `t` ends up holding the label `l` with
/// `key[l] == t`.
pub fn sort_fan_by_key(s: &mut LabelledTriangulation, key: &[usize]) -> Result<Vec<Label>> {
    let mut rho = require_fan(s)?;
    let n = rho.len();
    if key.len() != n + 1 {
        return Err(Error::SizeMismatch(key.len(), n + 1));
    }
    let mut rec = Recorder::new(s);
    let mut blocks = vec![(0usize, n)];
    while let Some((lo, end)) = blocks.pop() {
        let size = end - lo;
        if size < 2 {
            continue;
        }
        let mid = lo + size / 2;
        let misplaced: Vec<usize> = (lo..end)
            .filter(|&p| (p < mid) != (key[rho[p]] < mid))
            .collect();
        let left = misplaced.iter().filter(|&&p| p < mid).count();
        assert_eq!(2 * left, misplaced.len(), "misplaced counts must balance");
        if !misplaced.is_empty() {
            let (first, last) = (misplaced[0], misplaced[misplaced.len() - 1]);
            let parked = rec.park_others(first, last, &misplaced);
            let verts: Vec<usize> = misplaced.iter().map(|&p| p + 2).collect();
            rec.reverse_consecutive(&verts);
            rec.unpark(&parked);
            for i in 0..left {
                rho.swap(misplaced[i], misplaced[misplaced.len() - 1 - i]);
            }
        }
        blocks.push((mid, end));
        blocks.push((lo, mid));
    }
    Ok(rec.out)
}

/// Sort the fan reading into ascending order.
pub fn sort_fan(s: &mut LabelledTriangulation) -> Result<Vec<Label>> {
    let key: Vec<usize> = (0..=s.n()).map(|l| l.saturating_sub(1)).collect();
    sort_fan_by_key(s, &key)
}

/// Check that the pairs nest or are disjoint and have distinct endpoints.
pub fn check_noncrossing(pairs: &[(usize, usize)]) -> Result<()> {
    for (x, &(ix, jx)) in pairs.iter().enumerate() {
        if ix >= jx {
            return Err(Error::CrossingPairs((ix, jx), (ix, jx)));
        }
        for &(iy, jy) in &pairs[x + 1..] {
            let (a, b) = if ix <= iy { ((ix, jx), (iy, jy)) } else { ((iy, jy), (ix, jx)) };
            let disjoint = a.1 < b.0;
            let nested = b.1 < a.1 && a.0 < b.0;
            if !disjoint && !nested {
                return Err(Error::CrossingPairs(a, b));
            }
        }
    }
    Ok(())
}

/// Exchange the labels of every pair of fan positions in a non-crossing set.
pub fn apply_noncrossing_swaps(
    s: &mut LabelledTriangulation,
    pairs: &[(usize, usize)],
    interval: &FanBlock,
) -> Result<Vec<Label>> {
    check_noncrossing(pairs)?;
    FanBlock::new(interval.lo, interval.hi, Vec::new()).check(s.n())?;
    if pairs.iter().any(|&(i, j)| i < interval.lo || j > interval.hi) {
        return Err(Error::OutOfRange("swap outside the interval".into()));
    }
    require_fan(s)?;
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let mut ends: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    ends.sort_unstable();
    let mut order = pairs.to_vec();
    order.sort_by_key(|&(i, j)| (j - i, i));
    let mut rec = Recorder::new(s);
    let parked = rec.park_others(ends[0], ends[ends.len() - 1], &ends);
    let mut undo = Vec::new();
    for &(i, j) in &order[..order.len() - 1] {
        let li = rec.park(i + 2);
        let lj = rec.park(j + 2);
        undo.push((li, lj, i + 2, j + 2));
    }
    let (i, j) = order[order.len() - 1];
    rec.swap_adjacent(i + 2, j + 2);
    while let Some((li, lj, p, q)) = undo.pop() {
        rec.flip(lj);
        rec.flip(li);
        rec.swap_adjacent(p, q);
    }
    rec.unpark(&parked);
    Ok(rec.out)
}

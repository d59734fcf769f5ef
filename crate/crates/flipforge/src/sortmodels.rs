//! Length-weighted permutation sorting models. Positions are 1-based and an
//! operation on the interval `[i..j]` costs `j - i`.

use std::io;

use serde::{Deserialize, Serialize};

use crate::convex::LabelledTriangulation;
use crate::error::{Error, Result};
use crate::labelsort::{self, FanBlock};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &x in &values {
            if x == 0 || x > n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::OutOfRange(format!("{values:?} is not a permutation of 1..={n}")));
            }
        }
        Ok(Self(values))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| x == i + 1)
    }

    fn check_interval(&self, i: usize, j: usize) -> Result<()> {
        if i == 0 || i > j || j > self.len() {
            return Err(Error::OutOfRange(format!("interval [{i}..{j}] with n = {}", self.len())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Contiguous,
    Noncontiguous,
    Swaps,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub kind: OpKind,
    pub span: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub operations: Vec<LedgerEntry>,
    pub total: usize,
}

impl CostLedger {
    pub fn charge(&mut self, kind: OpKind, span: usize) {
        self.operations.push(LedgerEntry { kind, span });
        self.total += span;
    }

    pub fn extend(&mut self, other: CostLedger) {
        self.total += other.total;
        self.operations.extend(other.operations);
    }

    /// Rows `kind,span,cumulative`.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kind", "span", "cumulative"])?;
        let mut cum = 0;
        for op in &self.operations {
            cum += op.span;
            let kind = match op.kind {
                OpKind::Contiguous => "contiguous",
                OpKind::Noncontiguous => "noncontiguous",
                OpKind::Swaps => "swaps",
            };
            out.write_record([kind, &op.span.to_string(), &cum.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reverse the values at `subsequence` (increasing positions inside
/// `[i..j]`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoncontiguousReversal {
    pub interval: (usize, usize),
    pub subsequence: Vec<usize>,
}

/// Pairs of positions inside `interval` whose values are exchanged at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapSet {
    pub interval: (usize, usize),
    pub pairs: Vec<(usize, usize)>,
}

impl SwapSet {
    pub fn validate(&self, n: usize) -> Result<()> {
        let (i, j) = self.interval;
        if i == 0 || i > j || j > n {
            return Err(Error::OutOfRange(format!("interval [{i}..{j}] with n = {n}")));
        }
        if self.pairs.iter().any(|&(a, b)| a < i || b > j || a >= b) {
            return Err(Error::OutOfRange("pair outside the interval".into()));
        }
        labelsort::check_noncrossing(&self.pairs)
    }

    pub fn span(&self) -> usize {
        self.interval.1 - self.interval.0
    }
}

pub fn apply_contiguous_reversal(p: &Permutation, i: usize, j: usize, ledger: &mut CostLedger) -> Result<Permutation> {
    p.check_interval(i, j)?;
    if i == j {
        return Err(Error::OutOfRange(format!("empty reversal at {i}")));
    }
    let mut v = p.0.clone();
    v[i - 1..j].reverse();
    ledger.charge(OpKind::Contiguous, j - i);
    Ok(Permutation(v))
}

pub fn apply_noncontiguous_reversal(p: &Permutation, r: &NoncontiguousReversal, ledger: &mut CostLedger) -> Result<Permutation> {
    let (i, j) = r.interval;
    p.check_interval(i, j)?;
    let ok = r.subsequence.iter().all(|&x| i <= x && x <= j) && r.subsequence.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(Error::OutOfRange("subsequence must increase inside the interval".into()));
    }
    let mut v = p.0.clone();
    let vals: Vec<usize> = r.subsequence.iter().map(|&x| p.0[x - 1]).collect();
    for (&x, val) in r.subsequence.iter().zip(vals.into_iter().rev()) {
        v[x - 1] = val;
    }
    ledger.charge(OpKind::Noncontiguous, j - i);
    Ok(Permutation(v))
}

pub fn apply_swap_set(p: &Permutation, s: &SwapSet, ledger: &mut CostLedger) -> Result<Permutation> {
    s.validate(p.len())?;
    let mut v = p.0.clone();
    for &(a, b) in &s.pairs {
        v.swap(a - 1, b - 1);
    }
    ledger.charge(OpKind::Swaps, s.span());
    Ok(Permutation(v))
}

/// Quicksort by non-contiguous reversals: each block reverses its misplaced
/// positions, which exchanges the large values on the left with the small
/// ones on the right.
pub fn quicksort_noncontiguous(p: &Permutation) -> (Permutation, CostLedger) {
    let mut ledger = CostLedger::default();
    let mut cur = p.clone();
    let mut blocks = vec![(1usize, p.len())];
    while let Some((lo, hi)) = blocks.pop() {
        if hi <= lo {
            continue;
        }
        let mid = lo + (hi - lo + 1) / 2;
        let sub: Vec<usize> = (lo..=hi).filter(|&x| (x < mid) != (cur.0[x - 1] < mid)).collect();
        if !sub.is_empty() {
            let r = NoncontiguousReversal { interval: (lo, hi), subsequence: sub };
            cur = apply_noncontiguous_reversal(&cur, &r, &mut ledger).expect("valid block");
        }
        blocks.push((lo, mid - 1));
        blocks.push((mid, hi));
    }
    (cur, ledger)
}

pub fn contiguous_as_noncontiguous(i: usize, j: usize) -> NoncontiguousReversal {
    NoncontiguousReversal { interval: (i, j), subsequence: (i..=j).collect() }
}

/// Pair the outermost selected positions, then the next, and so on.
pub fn noncontiguous_as_swap_set(r: &NoncontiguousReversal) -> SwapSet {
    let s = &r.subsequence;
    let pairs = (0..s.len() / 2).map(|x| (s[x], s[s.len() - 1 - x])).collect();
    SwapSet { interval: r.interval, pairs }
}

/// Flips used by the triangulation simulation of `s` on a fan with
/// `n` edges.
pub fn flip_cost_of_swap_set(s: &SwapSet, n: usize) -> Result<usize> {
    s.validate(n)?;
    let perm: Vec<usize> = (1..=n).collect();
    let mut t = LabelledTriangulation::from_fan(&perm)?;
    let pairs: Vec<(usize, usize)> = s.pairs.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    let block = FanBlock::new(s.interval.0 - 1, s.interval.1 - 1, Vec::new());
    let flips = labelsort::apply_noncrossing_swaps(&mut t, &pairs, &block)?.len();
    assert!(flips <= 9 * (s.span() + 1), "{flips} flips for span {}", s.span());
    let mut expect = perm.clone();
    for &(a, b) in &pairs {
        expect.swap(a, b);
    }
    assert_eq!(t.fan_permutation()?, expect);
    Ok(flips)
}

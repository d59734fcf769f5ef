//! Approximate flip distance by cutting along edges both ends agree on.
//!
//! A diagonal is fixed when both triangulations contain it with the same
//! label and the same labels sit inside the vertex interval it spans. No
//! shortest sequence needs to touch it, so the polygon splits into pieces
//! that are transformed independently; every diagonal inside a piece must
//! move at least once, which gives the lower bound.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{transform_between, verify_sequence, Diagonal, FlipSequence, Label, LabelledTriangulation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub vertices: Vec<usize>,
    pub n_i: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedEdgeReport {
    pub fixed: Vec<[usize; 2]>,
    pub pieces: Vec<Piece>,
    pub lower_bound: usize,
}

fn inside_labels(s: &LabelledTriangulation, (i, j): Diagonal) -> BTreeSet<Label> {
    s.entries()
        .into_iter()
        .filter(|&((x, y), _)| i <= x && y <= j && (x, y) != (i, j))
        .map(|(_, l)| l)
        .collect()
}

/// Fixed diagonals in lexicographic order.
pub fn fixed_diagonals(a: &LabelledTriangulation, b: &LabelledTriangulation) -> Result<Vec<Diagonal>> {
    if a.m() != b.m() {
        return Err(Error::SizeMismatch(a.m(), b.m()));
    }
    Ok(a.entries()
        .into_iter()
        .filter(|&(d, l)| b.label_of(d) == Some(l) && inside_labels(a, d) == inside_labels(b, d))
        .map(|(d, _)| d)
        .collect())
}

/// Cycle of each face of the polygon cut along `fixed`, outermost first.
fn faces(m: usize, fixed: &[Diagonal]) -> Vec<Vec<usize>> {
    let mut regions: Vec<Diagonal> = vec![(0, m - 1)];
    regions.extend(fixed.iter().copied());
    regions
        .iter()
        .map(|&(i, j)| {
            // Maximal fixed edges strictly nested in (i, j).
            let kids: Vec<Diagonal> = fixed
                .iter()
                .copied()
                .filter(|&(x, y)| i <= x && y <= j && (x, y) != (i, j))
                .filter(|&(x, y)| {
                    !fixed.iter().any(|&(p, q)| p <= x && y <= q && (p, q) != (x, y) && i <= p && q <= j && (p, q) != (i, j))
                })
                .collect();
            let mut verts = vec![i];
            let mut v = i;
            while v < j {
                v = kids.iter().find(|&&(x, _)| x == v).map_or(v + 1, |&(_, y)| y);
                verts.push(v);
            }
            verts
        })
        .collect()
}

pub fn find_fixed(a: &LabelledTriangulation, b: &LabelledTriangulation) -> Result<FixedEdgeReport> {
    let fixed = fixed_diagonals(a, b)?;
    let pieces: Vec<Piece> = faces(a.m(), &fixed)
        .into_iter()
        .filter(|f| f.len() > 3)
        .map(|vertices| Piece { n_i: vertices.len() - 3, vertices })
        .collect();
    let lower_bound = pieces.iter().map(|p| p.n_i).sum();
    debug_assert_eq!(lower_bound + fixed.len(), a.n());
    Ok(FixedEdgeReport { fixed: fixed.iter().map(|&(x, y)| [x, y]).collect(), pieces, lower_bound })
}

/// Restrict `s` to the piece, relabelled `1..=n_i` by rank.
fn restrict(s: &LabelledTriangulation, verts: &[usize]) -> (LabelledTriangulation, Vec<Label>) {
    let local = |x: usize| verts.binary_search(&x).ok();
    let mut ds: Vec<(Label, Diagonal)> = s
        .entries()
        .into_iter()
        .filter_map(|((x, y), l)| {
            let (p, q) = (local(x)?, local(y)?);
            (q - p > 1 && !(p == 0 && q == verts.len() - 1)).then_some((l, (p, q)))
        })
        .collect();
    ds.sort_unstable();
    let labels: Vec<Label> = ds.iter().map(|&(l, _)| l).collect();
    let diags: Vec<Diagonal> = ds.iter().map(|&(_, d)| d).collect();
    let ranks: Vec<Label> = (1..=ds.len()).collect();
    let t = LabelledTriangulation::from_parts(verts.len(), &diags, &ranks).expect("piece is a triangulated polygon");
    (t, labels)
}

/// Transform piece by piece; returns the verified sequence and the lower
/// bound.
pub fn approx_transform(a: &LabelledTriangulation, b: &LabelledTriangulation) -> Result<(FlipSequence, FixedEdgeReport)> {
    let report = find_fixed(a, b)?;
    let parts: Vec<Vec<Label>> = report
        .pieces
        .par_iter()
        .map(|p| {
            let (pa, la) = restrict(a, &p.vertices);
            let (pb, lb) = restrict(b, &p.vertices);
            // Equal label sets mean equal rank naming.
            assert_eq!(la, lb, "piece label sets differ");
            let seq = transform_between(&pa, &pb).expect("same piece");
            seq.labels().expect("labelled").iter().map(|&l| la[l - 1]).collect()
        })
        .collect();
    let seq = FlipSequence::Labelled(parts.concat());
    verify_sequence(a, &seq, b).map_err(|f| Error::InvalidTriangulation(format!("approx replay failed: {f}")))?;
    Ok((seq, report))
}

/// Length bound for a piece decomposition.
pub fn length_bound(report: &FixedEdgeReport) -> usize {
    report.pieces.iter().map(|p| 2 * p.n_i + 5 * p.n_i * (ceil_log2(p.n_i) + 1)).sum()
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

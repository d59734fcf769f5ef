//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::comb::CombTriangulation;
use crate::convex::{diag, ConvexTriangulation, Diagonal, Label, LabelledTriangulation};
use crate::error::{Error, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform binary tree with `k` internal nodes by Rémy's growth.
/// Returns `(left, right)` child arrays; leaves have no entry in them.
fn remy(k: usize, rng: &mut impl Rng) -> (Vec<Option<usize>>, Vec<Option<usize>>, usize) {
    // Nodes 0..2k+1; `kids[x]` is `None` for leaves.
    let mut kids: Vec<Option<(usize, usize)>> = vec![None];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut root = 0;
    for _ in 0..k {
        let x = rng.gen_range(0..kids.len());
        let leaf = kids.len();
        let node = leaf + 1;
        kids.push(None);
        parent.push(Some(node));
        let pair = if rng.gen::<bool>() { (x, leaf) } else { (leaf, x) };
        kids.push(Some(pair));
        parent.push(parent[x]);
        match parent[x] {
            None => root = node,
            Some(p) => {
                let (l, r) = kids[p].expect("internal");
                kids[p] = Some(if l == x { (node, r) } else { (l, node) });
            }
        }
        parent[x] = Some(node);
    }
    let left = kids.iter().map(|c| c.map(|(l, _)| l)).collect();
    let right = kids.iter().map(|c| c.map(|(_, r)| r)).collect();
    (left, right, root)
}

/// Uniformly random triangulation of the convex `m`-gon.
pub fn random_triangulation(m: usize, rng: &mut impl Rng) -> Result<ConvexTriangulation> {
    if m < 3 {
        return Err(Error::BadSize(format!("polygon needs at least 3 vertices, got {m}")));
    }
    let (left, right, root) = remy(m - 2, rng);
    let mut internal = vec![0usize; left.len()];
    let mut order = vec![root];
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        order.extend(left[x].iter().chain(right[x].iter()).copied());
    }
    for &x in order.iter().rev() {
        if let (Some(l), Some(r)) = (left[x], right[x]) {
            internal[x] = 1 + internal[l] + internal[r];
        }
    }
    // Each internal node is the triangle over its interval; the apex sits
    // after its left subtree's triangles.
    let mut ds: Vec<Diagonal> = Vec::with_capacity(m - 3);
    let mut stack = vec![(root, 0, m - 1)];
    while let Some((x, lo, hi)) = stack.pop() {
        let (Some(l), Some(r)) = (left[x], right[x]) else { continue };
        if x != root {
            ds.push(diag(lo, hi));
        }
        let apex = lo + internal[l] + 1;
        stack.push((l, lo, apex));
        stack.push((r, apex, hi));
    }
    ConvexTriangulation::new(m, &ds)
}

pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<Label> {
    let mut p: Vec<Label> = (1..=n).collect();
    p.shuffle(rng);
    p
}

pub fn random_labelled(m: usize, rng: &mut impl Rng) -> Result<LabelledTriangulation> {
    let t = random_triangulation(m, rng)?;
    let ds = t.diagonals();
    LabelledTriangulation::from_parts(m, &ds, &random_permutation(ds.len(), rng))
}

pub fn random_fan(n: usize, rng: &mut impl Rng) -> Result<LabelledTriangulation> {
    if n == 0 {
        return Err(Error::BadSize("a fan needs at least one edge".into()));
    }
    LabelledTriangulation::from_fan(&random_permutation(n, rng))
}

/// Random labelled combinatorial triangulation: a wheel over a random
/// polygon triangulation, scrambled by `8v` random legal flips.
pub fn random_comb(v: usize, rng: &mut impl Rng) -> Result<CombTriangulation> {
    if v < 5 {
        return Err(Error::BadSize(format!("combinatorial triangulations here need at least 5 vertices, got {v}")));
    }
    let m = v - 1;
    let t = random_triangulation(m, rng)?;
    let hub = m;
    let mut rot: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            let mut r: Vec<usize> = t.neighbors(i).iter().copied().collect();
            r.sort_by_key(|&j| (j + m - i) % m);
            r.push(hub);
            r
        })
        .collect();
    rot.push((0..m).rev().collect());
    let mut c = CombTriangulation::with_sorted_labels(rot)?;
    for _ in 0..8 * v {
        let l = rng.gen_range(1..=c.edge_count());
        let e = c.edge_of(l).expect("label");
        if c.flip_target(e).is_some() {
            c.flip(e)?;
        }
    }
    let perm = random_permutation(c.edge_count(), rng);
    let labels: Vec<_> = c.labelled_edges().map(|(e, l)| (e, perm[l - 1])).collect();
    CombTriangulation::new((0..v).map(|u| c.rotation(u).to_vec()).collect(), &labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn uniform_on_hexagon() {
        let mut r = rng(3);
        let mut counts: HashMap<Vec<Diagonal>, usize> = HashMap::new();
        for _ in 0..14_000 {
            *counts.entry(random_triangulation(6, &mut r).unwrap().diagonals()).or_default() += 1;
        }
        assert_eq!(counts.len(), 14);
        assert!(counts.values().all(|&c| (800..1200).contains(&c)), "{counts:?}");
    }

    #[test]
    fn deterministic() {
        let a = random_labelled(20, &mut rng(9)).unwrap();
        let b = random_labelled(20, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        for v in 5..30 {
            let c = random_comb(v, &mut rng(v as u64)).unwrap();
            assert_eq!(c.faces().len(), 2 * v - 4);
        }
    }
}

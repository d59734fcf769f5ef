//! Constants frozen from measured runs; the acceptance tests enforce them.

/// Rounds for unlabelled simultaneous canonicalization: at most
/// `SIM_CANON_SLOPE * log2(n) + SIM_CANON_OFFSET`.
pub const SIM_CANON_SLOPE: f64 = 4.0;
pub const SIM_CANON_OFFSET: f64 = 4.0;

/// Rounds for the simultaneous fan sort: at most
/// `C3 * log2(n)^2 + C4 * log2(n) + C5`.
pub const SIM_SORT_C3: f64 = 11.0;
pub const SIM_SORT_C4: f64 = 4.0;
pub const SIM_SORT_C5: f64 = 10.0;

/// Labelled-phase flips of the combinatorial canonicalization: at most
/// `COMB_C * v * log2(v)`.
pub const COMB_C: f64 = 24.0;

pub fn sim_canon_bound(n: usize) -> f64 {
    SIM_CANON_SLOPE * (n.max(2) as f64).log2() + SIM_CANON_OFFSET
}

pub fn sim_sort_bound(n: usize) -> f64 {
    let l = (n.max(2) as f64).log2();
    SIM_SORT_C3 * l * l + SIM_SORT_C4 * l + SIM_SORT_C5
}

pub fn comb_bound(v: usize) -> f64 {
    COMB_C * v as f64 * (v as f64).log2()
}

//! Exhaustive ground truth for small instances.

use thiserror::Error;

use crate::dynamics::threshold;
use crate::energy::HopfieldParams;
use crate::graph::{Graph, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance of size {size} exceeds the exhaustive-search cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("graph is disconnected; it has no connected dominating set")]
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimit {
    pub max_vertices: usize,
    pub max_neurons: usize,
}

impl Default for OracleLimit {
    fn default() -> Self {
        Self {
            max_vertices: 16,
            max_neurons: 20,
        }
    }
}

impl OracleLimit {
    fn check(size: usize, cap: usize) -> Result<(), OracleError> {
        // masks are u32
        let cap = cap.min(31);
        if size > cap {
            Err(OracleError::TooLarge { size, cap })
        } else {
            Ok(())
        }
    }
}

/// All minimum-cardinality connected dominating sets, in lexicographic
/// order.
pub fn brute_force_mcds(g: &Graph, limit: &OracleLimit) -> Result<Vec<VertexSet>, OracleError> {
    OracleLimit::check(g.n(), limit.max_vertices)?;
    if !g.is_connected() {
        return Err(OracleError::Disconnected);
    }
    let n = g.n() as u32;
    for size in 1..=n {
        let mut found: Vec<VertexSet> = subsets_of_size(n, size)
            .map(|m| VertexSet::from_mask(u64::from(m)))
            .filter(|s| g.is_dominating_set(s) && g.is_connected_in_graph(s))
            .collect();
        if !found.is_empty() {
            found.sort();
            return Ok(found);
        }
    }
    unreachable!("the full vertex set of a connected graph is a connected dominating set")
}

/// All independent perfect dominating sets (possibly none), in
/// lexicographic order.
pub fn brute_force_ipds(g: &Graph, limit: &OracleLimit) -> Result<Vec<VertexSet>, OracleError> {
    OracleLimit::check(g.n(), limit.max_vertices)?;
    let mut out: Vec<VertexSet> = (0u64..1 << g.n())
        .map(VertexSet::from_mask)
        .filter(|s| g.is_independent_perfect_dominating(s))
        .collect();
    out.sort();
    Ok(out)
}

/// Binary states with `z_i = step(sum_j w_ij z_j + b_i)` for every unit,
/// where an input of exactly zero maps to 0. Each state is given by its
/// active units.
pub fn enumerate_stable_states(
    p: &HopfieldParams,
    limit: &OracleLimit,
) -> Result<Vec<VertexSet>, OracleError> {
    OracleLimit::check(p.k(), limit.max_neurons)?;
    let k = p.k();
    let mut z = vec![0.0; k];
    let mut out = Vec::new();
    for mask in 0u64..1 << k {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = (mask >> i & 1) as f64;
        }
        if (0..k).all(|i| threshold(p.local_field(i, &z)) == z[i]) {
            out.push(VertexSet::from_mask(mask));
        }
    }
    out.sort();
    Ok(out)
}

/// One set per line, members space-separated in ascending order.
pub fn render_sets(sets: &[VertexSet]) -> String {
    sets.iter().map(|s| format!("{s}\n")).collect()
}

/// Bitmasks with exactly `size` of the low `n` bits set, ascending.
fn subsets_of_size(n: u32, size: u32) -> impl Iterator<Item = u32> {
    let first = if size == 0 { 0 } else { (1u32 << size) - 1 };
    let limit = 1u64 << n;
    std::iter::successors(Some(first), move |&m| {
        if m == 0 {
            return None;
        }
        // Gosper's hack
        let c = m & m.wrapping_neg();
        let r = m + c;
        let next = (((r ^ m) >> 2) / c) | r;
        (u64::from(next) < limit && next > m).then_some(next)
    })
    .take_while(move |&m| u64::from(m) < limit)
}

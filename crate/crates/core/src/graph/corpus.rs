//! Small-graph corpora for exhaustive checks.

use super::Graph;

/// Largest vertex count [`connected_graphs`] accepts.
pub const MAX_EXHAUSTIVE_N: usize = 7;

/// All connected graphs on `n` vertices, one per isomorphism class.
///
/// Each labeled graph is encoded as a bitmask over the `n(n-1)/2` vertex
/// pairs; a mask is kept when no vertex relabeling maps it to a smaller
/// mask.
///
/// # Panics
/// If `n` exceeds [`MAX_EXHAUSTIVE_N`].
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!(
        n <= MAX_EXHAUSTIVE_N,
        "exhaustive isomorphism sweep is limited to {MAX_EXHAUSTIVE_N} vertices"
    );
    if n == 0 {
        return Vec::new();
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut pair_index = vec![0usize; n * n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        pair_index[i * n + j] = k;
        pair_index[j * n + i] = k;
    }
    let maps: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .map(|p| {
            pairs
                .iter()
                .map(|&(i, j)| pair_index[p[i] * n + p[j]])
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        if !mask_connected(n, &pairs, mask) {
            continue;
        }
        let canonical = maps.iter().all(|map| relabel(mask, map) >= mask);
        if canonical {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e);
            out.push(Graph::from_edges(n, edges).expect("pairs are in range"));
        }
    }
    out
}

/// Connected graphs on 1..=max_n vertices (non-isomorphic).
pub fn connected_graphs_up_to(max_n: usize) -> Vec<Graph> {
    (1..=max_n).flat_map(connected_graphs).collect()
}

/// Named families used as fixed test instances: paths, cycles, stars,
/// complete graphs and edgeless graphs with at most `max_n` vertices.
pub fn named_families(max_n: usize) -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.push((format!("P{n}"), Graph::path(n)));
        out.push((format!("E{n}"), Graph::empty(n)));
        out.push((format!("K{n}"), Graph::complete(n)));
        if n >= 3 {
            out.push((format!("C{n}"), Graph::cycle(n)));
        }
        if n >= 2 {
            out.push((format!("K1,{}", n - 1), Graph::star(n - 1)));
        }
    }
    out
}

fn relabel(mask: u64, map: &[usize]) -> u64 {
    map.iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .fold(0, |acc, (_, &t)| acc | 1 << t)
}

fn mask_connected(n: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut reached = 1u32;
    loop {
        let mut next = reached;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 && (reached >> i & 1 == 1 || reached >> j & 1 == 1) {
                next |= 1 << i | 1 << j;
            }
        }
        if next == reached {
            return reached.count_ones() as usize == n;
        }
        reached = next;
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                extend(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_sequence() {
        // OEIS A001349
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn corpus_graphs_are_connected() {
        assert!(connected_graphs_up_to(5).iter().all(Graph::is_connected));
    }

    #[test]
    fn families_contain_named_instances() {
        let fam = named_families(6);
        let find = |name: &str| fam.iter().find(|(n, _)| n == name).map(|(_, g)| g.clone());
        assert_eq!(find("P3"), Some(Graph::path(3)));
        assert_eq!(find("K1,5"), Some(Graph::star(5)));
        assert_eq!(find("C4"), Some(Graph::cycle(4)));
    }
}

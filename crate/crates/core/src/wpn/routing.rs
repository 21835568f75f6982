use std::collections::VecDeque;

use crate::graph::Graph;

/// Hop distances from `dst` to every vertex; `None` where unreachable.
fn distances_to(topology: &Graph, dst: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; topology.n()];
    dist[dst] = Some(0);
    let mut queue = VecDeque::from([dst]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued vertices have a distance");
        for &w in topology.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn walk(topology: &Graph, dist: &[Option<usize>], src: usize) -> Vec<usize> {
    let Some(mut remaining) = dist[src] else {
        return Vec::new();
    };
    let mut path = vec![src];
    let mut at = src;
    while remaining > 0 {
        // neighbor lists are ascending, so the first closer neighbor is the
        // lowest-id next hop
        at = *topology
            .neighbors(at)
            .iter()
            .find(|&&w| dist[w] == Some(remaining - 1))
            .expect("a closer neighbor exists on a shortest path");
        path.push(at);
        remaining -= 1;
    }
    path
}

/// Shortest hop-count path from `src` to `dst` inclusive, ties broken by the
/// lowest next-hop id at every step. Empty when `dst` is unreachable.
///
/// # Panics
/// If either id is not a vertex of `topology`.
pub fn route(topology: &Graph, src: usize, dst: usize) -> Vec<usize> {
    assert!(
        src < topology.n() && dst < topology.n(),
        "mote id out of range"
    );
    walk(topology, &distances_to(topology, dst), src)
}

/// All-pairs routes computed with one breadth-first search per destination.
#[derive(Debug, Clone)]
pub struct RoutingTable {
    dist: Vec<Vec<Option<usize>>>,
}

impl RoutingTable {
    pub fn new(topology: &Graph) -> Self {
        Self {
            dist: (0..topology.n())
                .map(|d| distances_to(topology, d))
                .collect(),
        }
    }

    /// Same result as [`route`].
    pub fn route(&self, topology: &Graph, src: usize, dst: usize) -> Vec<usize> {
        walk(topology, &self.dist[dst], src)
    }

    pub fn hops(&self, src: usize, dst: usize) -> Option<usize> {
        self.dist[dst][src]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_examples() {
        assert_eq!(route(&Graph::path(3), 0, 2), vec![0, 1, 2]);
        for v in 0..4 {
            assert_eq!(route(&Graph::cycle(4), v, v), vec![v]);
        }
        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(route(&two, 0, 3).is_empty());
    }

    #[test]
    fn ties_go_to_lowest_next_hop() {
        // 0 reaches 3 through 1 or 2
        let g = Graph::from_edges(4, [(0, 2), (0, 1), (1, 3), (2, 3)]).unwrap();
        assert_eq!(route(&g, 0, 3), vec![0, 1, 3]);
        assert_eq!(route(&g, 3, 0), vec![3, 1, 0]);
        assert_eq!(route(&Graph::cycle(6), 0, 3), vec![0, 1, 2, 3]);
    }

    #[test]
    fn table_matches_single_queries() {
        let g = Graph::random_geometric(20, 0.35, 3).unwrap();
        let table = RoutingTable::new(&g);
        for s in 0..g.n() {
            for d in 0..g.n() {
                let p = route(&g, s, d);
                assert_eq!(table.route(&g, s, d), p);
                assert_eq!(table.hops(s, d), p.len().checked_sub(1));
                for w in p.windows(2) {
                    assert!(g.has_edge(w[0], w[1]));
                }
            }
        }
    }
}

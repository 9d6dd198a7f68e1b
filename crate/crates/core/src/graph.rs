//! Shortest paths on weighted adjacency lists.
//!
//! Ties are broken lexicographically: among equal-length predecessors the
//! smallest node index wins, so paths are reproducible bit-for-bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub type Adjacency = Vec<Vec<(usize, f64)>>;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pub pred: Vec<usize>,
}

pub const NONE: usize = usize::MAX;

impl ShortestPaths {
    /// Node sequence from a source to `target`, or `None` if unreachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while self.pred[cur] != NONE {
            cur = self.pred[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Multi-source Dijkstra. Weights must be nonnegative.
pub fn dijkstra(adj: &Adjacency, sources: &[usize]) -> ShortestPaths {
    dijkstra_with(adj.len(), sources, |u, f| {
        for &(v, w) in &adj[u] {
            f(v, w);
        }
    })
}

/// Dijkstra over an implicit graph: `neighbors(u, emit)` calls `emit(v, w)`.
pub fn dijkstra_with<N>(n: usize, sources: &[usize], mut neighbors: N) -> ShortestPaths
where
    N: FnMut(usize, &mut dyn FnMut(usize, f64)),
{
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Entry { dist: 0.0, node: s });
    }
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        neighbors(u, &mut |v, w| {
            if done[v] {
                return;
            }
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Entry { dist: nd, node: v });
            } else if nd == dist[v] && u < pred[v] && pred[v] != NONE {
                pred[v] = u;
            }
        });
    }
    ShortestPaths { dist, pred }
}

/// Union-find with path halving.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins the two sets; the smaller root index becomes the representative.
    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_prefer_smaller_predecessor() {
        // 0 -> 1 -> 3 and 0 -> 2 -> 3, equal lengths.
        let adj = vec![
            vec![(1, 1.0), (2, 1.0)],
            vec![(0, 1.0), (3, 1.0)],
            vec![(0, 1.0), (3, 1.0)],
            vec![(1, 1.0), (2, 1.0)],
        ];
        let sp = dijkstra(&adj, &[0]);
        assert_eq!(sp.path_to(3).unwrap(), vec![0, 1, 3]);
        let sp = dijkstra(&adj, &[3]);
        assert_eq!(sp.path_to(0).unwrap(), vec![3, 1, 0]);
    }

    #[test]
    fn unreachable_is_infinite() {
        let adj = vec![vec![(1, 2.0)], vec![(0, 2.0)], vec![]];
        let sp = dijkstra(&adj, &[0]);
        assert_eq!(sp.dist[1], 2.0);
        assert!(sp.dist[2].is_infinite());
        assert!(sp.path_to(2).is_none());
    }
}

//! Metric graphs: vertices, weighted undirected edges and the directed bonds
//! derived from them.
//!
//! Bonds are indexed by edge input order. Edge `e = (i, j)` owns bond `2e`,
//! running from `i` to `j`, and bond `2e + 1`, running from `j` to `i`. The
//! coordinate on a bond is `0` at its origin and the edge length at its
//! terminus, so the two bonds of an edge carry reversed coordinates.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected edge with a positive length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// Directed copy of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub edge: usize,
    pub origin: usize,
    pub terminus: usize,
}

/// A point on the metric graph given by a bond and the distance from its origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoordinate {
    pub bond: usize,
    pub x: f64,
}

/// Shortest-cycle length of the underlying combinatorial graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Girth {
    Finite(usize),
    Acyclic,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Acyclic => None,
        }
    }
}

/// Connected simple graph with positive edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    bonds: Vec<Bond>,
    // incident edges of each vertex, in edge input order
    incident: Vec<Vec<usize>>,
}

/// Builds a graph whose vertex set is `0..=max index` from `(i, j, length)` triples.
pub fn build_metric_graph(edge_list: &[(usize, usize, f64)]) -> Result<MetricGraph> {
    let vertex_count = edge_list
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .ok_or(Error::EmptyGraph)?;
    MetricGraph::new(vertex_count, edge_list)
}

/// Star graph with center `0` and pendant vertices `1..=E`; edge `j - 1` joins
/// the center to vertex `j`.
pub fn star_metric_graph(lengths: &[f64]) -> Result<MetricGraph> {
    if lengths.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let edges: Vec<_> = lengths
        .iter()
        .enumerate()
        .map(|(k, &l)| (0, k + 1, l))
        .collect();
    MetricGraph::new(lengths.len() + 1, &edges)
}

impl MetricGraph {
    pub fn new(vertex_count: usize, edge_list: &[(usize, usize, f64)]) -> Result<Self> {
        if edge_list.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut seen = std::collections::HashMap::new();
        for (e, &(i, j, length)) in edge_list.iter().enumerate() {
            for v in [i, j] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        edge: e,
                        vertex: v,
                        vertex_count,
                    });
                }
            }
            if i == j {
                return Err(Error::LoopEdge { edge: e, i, j });
            }
            if !(length > 0.0 && length.is_finite()) {
                return Err(Error::NonpositiveLength { edge: e, length });
            }
            if let Some(&first) = seen.get(&(i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge { edge: e, first, i, j });
            }
            seen.insert((i.min(j), i.max(j)), e);
            edges.push(Edge { i, j, length });
        }

        let mut incident = vec![Vec::new(); vertex_count];
        let mut bonds = Vec::with_capacity(2 * edges.len());
        for (e, edge) in edges.iter().enumerate() {
            incident[edge.i].push(e);
            incident[edge.j].push(e);
            bonds.push(Bond {
                edge: e,
                origin: edge.i,
                terminus: edge.j,
            });
            bonds.push(Bond {
                edge: e,
                origin: edge.j,
                terminus: edge.i,
            });
        }

        let graph = MetricGraph {
            vertex_count,
            edges,
            bonds,
            incident,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let dist = self.bfs_distances(0);
        if let Some((e, edge)) = self
            .edges
            .iter()
            .enumerate()
            .find(|(_, edge)| dist[edge.i].is_none())
        {
            return Err(Error::DisconnectedGraph {
                edge: e,
                i: edge.i,
                j: edge.j,
            });
        }
        if let Some(v) = dist.iter().position(Option::is_none) {
            return Err(Error::IsolatedVertex { vertex: v });
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, b: usize) -> Bond {
        self.bonds[b]
    }

    pub fn bond_length(&self, b: usize) -> f64 {
        self.edges[self.bonds[b].edge].length
    }

    /// Sum of edge lengths.
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incident.iter().map(Vec::len).collect()
    }

    /// Edges at `v` in canonical (input) order. Local index `r` of a vertex
    /// scattering matrix refers to the `r`-th entry.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Reverse bond of the same edge.
    pub fn reverse(b: usize) -> usize {
        b ^ 1
    }

    /// Bond leaving `v` along edge `e`.
    pub fn outgoing_bond(&self, v: usize, e: usize) -> usize {
        if self.edges[e].i == v {
            2 * e
        } else {
            debug_assert_eq!(self.edges[e].j, v);
            2 * e + 1
        }
    }

    /// Bond arriving at `v` along edge `e`.
    pub fn incoming_bond(&self, v: usize, e: usize) -> usize {
        Self::reverse(self.outgoing_bond(v, e))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[v].iter().map(move |&e| {
            let edge = self.edges[e];
            if edge.i == v {
                edge.j
            } else {
                edge.i
            }
        })
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        self.incident.iter().all(|inc| inc.len() == d).then_some(d)
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.regular_degree() == Some(d)
    }

    /// Center vertex when the graph is a star with at least two edges: one
    /// vertex adjacent to every edge, all others of degree one. A single edge
    /// is treated as a star centered at vertex 0.
    pub fn star_center(&self) -> Option<usize> {
        if self.edges.len() == 1 {
            return Some(self.edges[0].i.min(self.edges[0].j));
        }
        let center = (0..self.vertex_count).find(|&v| self.degree(v) == self.edges.len())?;
        (0..self.vertex_count)
            .all(|v| v == center || self.degree(v) == 1)
            .then_some(center)
    }

    fn bfs_distances(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count];
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for w in self.neighbors(u) {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Longest shortest-path distance between two vertices.
    pub fn diameter(&self) -> usize {
        (0..self.vertex_count)
            .map(|v| self.bfs_distances(v).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Maps a point on bond `b` to the same point expressed on the reverse bond.
    pub fn reversed_coordinate(&self, b: usize, x: f64) -> Result<BondCoordinate> {
        let length = self.bond_length(b);
        if !(0.0..=length).contains(&x) {
            return Err(Error::OutOfRange { bond: b, x, length });
        }
        Ok(BondCoordinate {
            bond: Self::reverse(b),
            x: length - x,
        })
    }
}

/// Shortest cycle length by breadth-first search from every root.
///
/// A non-tree edge `(u, w)` met while searching from `r` closes a closed walk
/// of length `dist(u) + dist(w) + 1` through `r`; the minimum over all roots
/// is attained by a root lying on a shortest cycle, where the walk is a cycle.
pub fn girth(g: &MetricGraph) -> Girth {
    let n = g.vertex_count();
    let mut best = usize::MAX;
    for root in 0..n {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] >= best {
                break;
            }
            for w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    if best == usize::MAX {
        Girth::Acyclic
    } else {
        Girth::Finite(best)
    }
}

//! The twelve structural features of a PDF object graph.
//!
//! Tree features (children statistics, leaves, depth) are computed on the BFS
//! spanning tree and only see nodes reachable from the root. Graph features
//! use every node. Degree-based metrics follow these conventions:
//!
//! * `avg_degree` is `2m / n` on the directed simple graph;
//! * assortativity and clustering use the undirected projection;
//! * `avg_shortest_path` averages directed distances over all `n(n-1)`
//!   ordered pairs, unreachable pairs contributing zero;
//! * `density` is `m / (n(n-1))`.
//!
//! Degenerate inputs produce zeros rather than NaN.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{ObjectGraph, SpanningTree};
use crate::parser::{parse_document, ParseError, PdfDocument};

pub const NUM_FEATURES: usize = 12;

/// Feature names in vector order; also the CSV column order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "avg_children",
    "median_children",
    "var_children",
    "num_leaves",
    "num_edges",
    "num_nodes",
    "depth",
    "avg_degree",
    "degree_assortativity",
    "avg_shortest_path",
    "avg_clustering_coefficient",
    "density",
];

/// Indices of the integer-valued features.
pub const INTEGER_FEATURES: [usize; 4] = [3, 4, 5, 6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub avg_children: f64,
    pub median_children: f64,
    pub var_children: f64,
    pub num_leaves: u64,
    pub num_edges: u64,
    pub num_nodes: u64,
    pub depth: u64,
    pub avg_degree: f64,
    pub degree_assortativity: f64,
    pub avg_shortest_path: f64,
    pub avg_clustering_coefficient: f64,
    pub density: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.avg_children,
            self.median_children,
            self.var_children,
            self.num_leaves as f64,
            self.num_edges as f64,
            self.num_nodes as f64,
            self.depth as f64,
            self.avg_degree,
            self.degree_assortativity,
            self.avg_shortest_path,
            self.avg_clustering_coefficient,
            self.density,
        ]
    }

    /// Inverse of [`to_array`](Self::to_array). Integer features must be
    /// non-negative whole numbers and every value finite.
    pub fn from_array(values: [f64; NUM_FEATURES]) -> Option<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let count = |v: f64| (v >= 0.0 && v.fract() == 0.0 && v < 9.0e15).then_some(v as u64);
        Some(FeatureVector {
            avg_children: values[0],
            median_children: values[1],
            var_children: values[2],
            num_leaves: count(values[3])?,
            num_edges: count(values[4])?,
            num_nodes: count(values[5])?,
            depth: count(values[6])?,
            avg_degree: values[7],
            degree_assortativity: values[8],
            avg_shortest_path: values[9],
            avg_clustering_coefficient: values[10],
            density: values[11],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChildrenStats {
    pub avg: f64,
    pub median: f64,
    pub variance: f64,
}

/// Mean, median and population variance of the child counts over all
/// reachable tree nodes.
pub fn children_stats(tree: &SpanningTree) -> ChildrenStats {
    let mut counts: Vec<usize> = tree.child_counts().collect();
    if counts.is_empty() {
        return ChildrenStats {
            avg: 0.0,
            median: 0.0,
            variance: 0.0,
        };
    }
    counts.sort_unstable();
    let n = counts.len() as f64;
    let avg = counts.iter().sum::<usize>() as f64 / n;
    let mid = counts.len() / 2;
    let median = if counts.len() % 2 == 1 {
        counts[mid] as f64
    } else {
        (counts[mid - 1] + counts[mid]) as f64 / 2.0
    };
    let variance = counts.iter().map(|&c| (c as f64 - avg).powi(2)).sum::<f64>() / n;
    ChildrenStats { avg, median, variance }
}

pub fn count_leaves(tree: &SpanningTree) -> usize {
    tree.child_counts().filter(|&c| c == 0).count()
}

pub fn tree_depth(tree: &SpanningTree) -> u32 {
    tree.max_depth()
}

pub fn avg_degree(g: &ObjectGraph) -> f64 {
    if g.num_nodes() == 0 {
        return 0.0;
    }
    2.0 * g.num_edges() as f64 / g.num_nodes() as f64
}

pub fn density(g: &ObjectGraph) -> f64 {
    let n = g.num_nodes() as f64;
    if g.num_nodes() < 2 {
        return 0.0;
    }
    g.num_edges() as f64 / (n * (n - 1.0))
}

/// Newman degree assortativity on the undirected projection.
///
/// Computed with exact integer sums over both orientations of every edge;
/// zero degree variance (a regular graph, or no edges) yields 0.
pub fn degree_assortativity(g: &ObjectGraph) -> f64 {
    let adj = g.adjacency();
    let degree = |i: usize| adj.undirected[i].len() as i128;
    let (mut count, mut sum, mut sum_sq, mut sum_prod) = (0i128, 0i128, 0i128, 0i128);
    for (u, neighbors) in adj.undirected.iter().enumerate() {
        for &v in neighbors {
            // Each undirected edge is seen once from each end.
            let (du, dv) = (degree(u), degree(v));
            count += 1;
            sum += du;
            sum_sq += du * du;
            sum_prod += du * dv;
        }
    }
    let variance = count * sum_sq - sum * sum;
    if count == 0 || variance == 0 {
        return 0.0;
    }
    let covariance = count * sum_prod - sum * sum;
    (covariance as f64 / variance as f64).clamp(-1.0, 1.0)
}

/// Sum of directed BFS distances over ordered pairs divided by `n(n-1)`.
pub fn avg_shortest_path(g: &ObjectGraph) -> f64 {
    let n = g.num_nodes();
    if n < 2 {
        return 0.0;
    }
    let adj = g.adjacency();
    let total: u64 = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], VecDeque::new()),
            |(dist, queue), source| {
                dist.fill(u32::MAX);
                dist[source] = 0;
                queue.clear();
                queue.push_back(source);
                let mut sum = 0u64;
                while let Some(u) = queue.pop_front() {
                    let next = dist[u] + 1;
                    for &v in &adj.out[u] {
                        if dist[v] == u32::MAX {
                            dist[v] = next;
                            sum += u64::from(next);
                            queue.push_back(v);
                        }
                    }
                }
                sum
            },
        )
        .sum();
    total as f64 / (n as f64 * (n as f64 - 1.0))
}

/// Mean local clustering coefficient on the undirected projection; nodes
/// with fewer than two neighbors contribute zero.
pub fn avg_clustering(g: &ObjectGraph) -> f64 {
    let n = g.num_nodes();
    if n == 0 {
        return 0.0;
    }
    let adj = g.adjacency();
    let total: f64 = adj
        .undirected
        .iter()
        .map(|neighbors| {
            let k = neighbors.len();
            if k < 2 {
                return 0.0;
            }
            // Each triangle through v is counted twice.
            let twice_triangles: usize = neighbors
                .iter()
                .map(|&u| sorted_intersection_len(&adj.undirected[u], neighbors))
                .sum();
            twice_triangles as f64 / (k * (k - 1)) as f64
        })
        .sum();
    total / n as f64
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn extract_features(g: &ObjectGraph, tree: &SpanningTree) -> FeatureVector {
    let children = children_stats(tree);
    FeatureVector {
        avg_children: children.avg,
        median_children: children.median,
        var_children: children.variance,
        num_leaves: count_leaves(tree) as u64,
        num_edges: g.num_edges() as u64,
        num_nodes: g.num_nodes() as u64,
        depth: u64::from(tree_depth(tree)),
        avg_degree: avg_degree(g),
        degree_assortativity: degree_assortativity(g),
        avg_shortest_path: avg_shortest_path(g),
        avg_clustering_coefficient: avg_clustering(g),
        density: density(g),
    }
}

pub fn document_features(doc: &PdfDocument) -> FeatureVector {
    let graph = ObjectGraph::build(doc);
    let tree = graph.spanning_tree();
    extract_features(&graph, &tree)
}

/// Parses `bytes` and extracts features, also returning the parsed document.
pub fn features_from_bytes(bytes: &[u8]) -> Result<(FeatureVector, PdfDocument), ParseError> {
    let doc = parse_document(bytes)?;
    Ok((document_features(&doc), doc))
}

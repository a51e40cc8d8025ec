//! Brute-force feature computation straight from the definitions, sharing
//! no code with the library.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub const NAMES: [&str; 12] = [
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

/// Simple directed graph from an edge list; self-loops and duplicates dropped.
pub struct RefGraph {
    pub nodes: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
    pub root: u32,
}

impl RefGraph {
    pub fn new(extra_nodes: &[u32], edges: &[(u32, u32)], root: u32) -> Self {
        let mut nodes: BTreeSet<u32> = extra_nodes.iter().copied().collect();
        nodes.insert(root);
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            nodes.insert(a);
            nodes.insert(b);
            if a != b {
                set.insert((a, b));
            }
        }
        RefGraph {
            nodes: nodes.into_iter().collect(),
            edges: set.into_iter().collect(),
            root,
        }
    }

    fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a, b))
    }

    fn undirected_adjacent(&self, a: u32, b: u32) -> bool {
        a != b && (self.has_edge(a, b) || self.has_edge(b, a))
    }

    fn undirected_degree(&self, v: u32) -> usize {
        self.nodes.iter().filter(|&&u| self.undirected_adjacent(v, u)).count()
    }

    /// Directed BFS distances from `s` by repeated frontier expansion over the edge list.
    fn distances(&self, s: u32) -> BTreeMap<u32, usize> {
        let mut dist = BTreeMap::new();
        dist.insert(s, 0);
        let mut frontier = vec![s];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for &(a, b) in &self.edges {
                    if a == u && !dist.contains_key(&b) {
                        dist.insert(b, d);
                        next.push(b);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// BFS tree: node -> (depth, children sorted ascending).
    fn tree(&self) -> BTreeMap<u32, (usize, Vec<u32>)> {
        let mut tree: BTreeMap<u32, (usize, Vec<u32>)> = BTreeMap::new();
        tree.insert(self.root, (1, Vec::new()));
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            let depth = tree[&u].0;
            let mut targets: Vec<u32> = self.edges.iter().filter(|e| e.0 == u).map(|e| e.1).collect();
            targets.sort_unstable();
            for v in targets {
                if !tree.contains_key(&v) {
                    tree.insert(v, (depth + 1, Vec::new()));
                    tree.get_mut(&u).unwrap().1.push(v);
                    queue.push_back(v);
                }
            }
        }
        tree
    }

    pub fn features(&self) -> [f64; 12] {
        let n = self.nodes.len() as f64;
        let m = self.edges.len() as f64;
        let tree = self.tree();

        let counts: Vec<f64> = tree.values().map(|(_, c)| c.len() as f64).collect();
        let k = counts.len() as f64;
        let avg_children = counts.iter().sum::<f64>() / k;
        let var_children = counts.iter().map(|c| (c - avg_children).powi(2)).sum::<f64>() / k;
        let mut sorted = counts.clone();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median_children = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        };
        let num_leaves = counts.iter().filter(|&&c| c == 0.0).count() as f64;
        let depth = tree.values().map(|(d, _)| *d).max().unwrap() as f64;

        let avg_degree = if n == 0.0 { 0.0 } else { 2.0 * m / n };
        let density = if n < 2.0 { 0.0 } else { m / (n * (n - 1.0)) };

        // Pearson correlation of degree pairs over both orientations of every undirected edge.
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, &a) in self.nodes.iter().enumerate() {
            for &b in &self.nodes[i + 1..] {
                if self.undirected_adjacent(a, b) {
                    let (da, db) = (self.undirected_degree(a) as f64, self.undirected_degree(b) as f64);
                    xs.extend([da, db]);
                    ys.extend([db, da]);
                }
            }
        }
        let assortativity = pearson(&xs, &ys);

        let mut total = 0usize;
        for &s in &self.nodes {
            total += self.distances(s).values().sum::<usize>();
        }
        let asp = if n < 2.0 { 0.0 } else { total as f64 / (n * (n - 1.0)) };

        let mut clustering = 0.0;
        for &v in &self.nodes {
            let nb: Vec<u32> = self.nodes.iter().copied().filter(|&u| self.undirected_adjacent(v, u)).collect();
            if nb.len() < 2 {
                continue;
            }
            let mut closed = 0;
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    if self.undirected_adjacent(nb[i], nb[j]) {
                        closed += 1;
                    }
                }
            }
            let pairs = nb.len() * (nb.len() - 1) / 2;
            clustering += closed as f64 / pairs as f64;
        }
        let clustering = if n == 0.0 { 0.0 } else { clustering / n };

        [
            avg_children,
            median_children,
            var_children,
            num_leaves,
            m,
            n,
            depth,
            avg_degree,
            assortativity,
            asp,
            clustering,
            density,
        ]
    }
}

/// Sample Pearson correlation; 0 when either side has zero variance or there are no pairs.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// Random simple directed graph on `1..=n` with edge probability `p`; root is a random node.
pub fn random_graph(seed: u64, max_n: u32) -> RefGraph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let p: f64 = rng.random_range(0.05..0.6);
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            if a != b && rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    let nodes: Vec<u32> = (1..=n).collect();
    let root = rng.random_range(1..=n);
    RefGraph::new(&nodes, &edges, root)
}

/// Index of the first feature differing by more than `tol`, if any.
pub fn first_mismatch(a: &[f64; 12], b: &[f64; 12], tol: f64) -> Option<usize> {
    (0..12).find(|&i| (a[i] - b[i]).abs() > tol)
}

//! Directed reference graph over indirect objects and its BFS spanning tree.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::parser::{extract_references, PdfDocument};

/// Simple directed graph: no self-loops, no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectGraph {
    nodes: BTreeSet<u32>,
    edges: BTreeSet<(u32, u32)>,
    root: u32,
}

impl ObjectGraph {
    /// Builds a graph from arbitrary node and edge lists.
    ///
    /// Self-loops are dropped, duplicate edges collapse, and edge endpoints
    /// and the root are added to the node set.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, u32)>,
        root: u32,
    ) -> Self {
        let mut nodes: BTreeSet<u32> = nodes.into_iter().collect();
        let edges: BTreeSet<(u32, u32)> = edges.into_iter().filter(|(a, b)| a != b).collect();
        for &(a, b) in &edges {
            nodes.insert(a);
            nodes.insert(b);
        }
        nodes.insert(root);
        ObjectGraph { nodes, edges, root }
    }

    /// Reference graph of a parsed document.
    ///
    /// Nodes are all object numbers plus any referenced-but-missing numbers;
    /// edges come from the latest version of each object.
    pub fn build(doc: &PdfDocument) -> Self {
        let numbers = doc.object_numbers();
        let mut edges = Vec::new();
        for &n in &numbers {
            let obj = doc.latest_object(n).expect("listed number resolves");
            edges.extend(extract_references(&obj.value).into_iter().map(|r| (n, r.number)));
        }
        Self::from_parts(numbers, edges, doc.locate_root().number)
    }

    pub fn nodes(&self) -> &BTreeSet<u32> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(min, max)` pairs; mutual edges collapse.
    pub fn undirected_projection(&self) -> BTreeSet<(u32, u32)> {
        self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Breadth-first spanning tree from the root; children in ascending order.
    pub fn spanning_tree(&self) -> SpanningTree {
        let mut successors: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &(a, b) in &self.edges {
            successors.entry(a).or_default().push(b);
        }

        let mut tree = SpanningTree {
            root: self.root,
            parent: BTreeMap::new(),
            children: BTreeMap::new(),
            depth_of: BTreeMap::new(),
        };
        tree.parent.insert(self.root, None);
        tree.depth_of.insert(self.root, 1);
        tree.children.insert(self.root, Vec::new());

        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            let depth = tree.depth_of[&u];
            // Successors come out of the BTreeSet in ascending order.
            for &v in successors.get(&u).map(Vec::as_slice).unwrap_or_default() {
                if tree.parent.contains_key(&v) {
                    continue;
                }
                tree.parent.insert(v, Some(u));
                tree.depth_of.insert(v, depth + 1);
                tree.children.insert(v, Vec::new());
                tree.children.get_mut(&u).expect("visited").push(v);
                queue.push_back(v);
            }
        }
        tree
    }

    /// Graphviz DOT rendering with deterministic ordering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph objects {\n");
        for &n in &self.nodes {
            if n == self.root {
                let _ = writeln!(out, "  {n} [label=\"{n}\", shape=doublecircle, root=true]");
            } else {
                let _ = writeln!(out, "  {n} [label=\"{n}\"]");
            }
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  {a} -> {b}");
        }
        out.push_str("}\n");
        out
    }

    pub(crate) fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }
}

/// Rooted BFS tree over the nodes reachable from the graph root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    root: u32,
    parent: BTreeMap<u32, Option<u32>>,
    children: BTreeMap<u32, Vec<u32>>,
    depth_of: BTreeMap<u32, u32>,
}

impl SpanningTree {
    pub fn root(&self) -> u32 {
        self.root
    }

    /// Parent of a reachable node; `Some(None)` for the root, `None` when
    /// the node is not in the tree.
    pub fn parent(&self, node: u32) -> Option<Option<u32>> {
        self.parent.get(&node).copied()
    }

    pub fn children(&self, node: u32) -> &[u32] {
        self.children.get(&node).map(Vec::as_slice).unwrap_or_default()
    }

    /// Depth with the root at 1.
    pub fn depth_of(&self, node: u32) -> Option<u32> {
        self.depth_of.get(&node).copied()
    }

    pub fn reachable(&self) -> impl Iterator<Item = u32> + '_ {
        self.parent.keys().copied()
    }

    pub fn num_reachable(&self) -> usize {
        self.parent.len()
    }

    pub fn contains(&self, node: u32) -> bool {
        self.parent.contains_key(&node)
    }

    /// Child counts of every reachable node, in ascending node order.
    pub fn child_counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.children.values().map(Vec::len)
    }

    pub fn max_depth(&self) -> u32 {
        self.depth_of.values().copied().max().unwrap_or(1)
    }
}

/// Dense index view of a graph used by the metric computations.
pub(crate) struct Adjacency {
    /// Out-neighbors by dense index, ascending.
    pub(crate) out: Vec<Vec<usize>>,
    /// Undirected-projection neighbors by dense index, ascending.
    pub(crate) undirected: Vec<Vec<usize>>,
}

impl Adjacency {
    fn new(g: &ObjectGraph) -> Self {
        let index: BTreeMap<u32, usize> = g.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let n = index.len();
        let mut out = vec![Vec::new(); n];
        let mut undirected = vec![Vec::new(); n];
        for &(a, b) in &g.edges {
            out[index[&a]].push(index[&b]);
        }
        for (a, b) in g.undirected_projection() {
            let (ia, ib) = (index[&a], index[&b]);
            undirected[ia].push(ib);
            undirected[ib].push(ia);
        }
        for list in &mut undirected {
            list.sort_unstable();
        }
        Adjacency { out, undirected }
    }
}

//! Ground-truth component structure via union-find.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::Result;
use crate::generator::Multigraph;

/// Union-find with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Returns false when both were already in the same set.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// One connected component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentRecord {
    pub size: usize,
    pub edges: usize,
    /// edges - size + 1: the number of independent cycles.
    pub nullity: usize,
    /// Smallest vertex id in the component (canonical tie-breaker).
    pub min_vertex: u32,
}

/// Components of a multigraph, sorted by size descending; ties broken by
/// smaller nullity, then smallest contained vertex id, so reports are
/// reproducible regardless of edge order.
#[derive(Debug, Clone)]
pub struct ComponentStats {
    components: Vec<ComponentRecord>,
    /// Component rank (index into `components`) per vertex.
    assignment: Vec<u32>,
    n: usize,
    m: usize,
}

impl ComponentStats {
    pub fn components(&self) -> &[ComponentRecord] {
        &self.components
    }

    pub fn component_of(&self, vertex: u32) -> u32 {
        self.assignment[vertex as usize]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Size of the i-th largest component (1-indexed); 0 when absent.
    pub fn l(&self, i: usize) -> usize {
        self.components.get(i - 1).map_or(0, |c| c.size)
    }

    pub fn l1(&self) -> usize {
        self.l(1)
    }

    pub fn l2(&self) -> usize {
        self.l(2)
    }

    /// Nullity of the largest component; 0 for the empty graph.
    pub fn n1(&self) -> usize {
        self.components.first().map_or(0, |c| c.nullity)
    }

    /// Multiset of (size, nullity), sorted, for oracle comparisons.
    pub fn size_nullity_multiset(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .components
            .iter()
            .map(|c| (c.size, c.nullity))
            .collect();
        v.sort_unstable();
        v
    }

    /// CSV rows `replica,rank,size,edges,nullity`, one per component.
    pub fn write_csv_rows<W: Write>(&self, replica: u32, mut w: W) -> Result<()> {
        for (rank, c) in self.components.iter().enumerate() {
            writeln!(w, "{replica},{},{},{},{}", rank + 1, c.size, c.edges, c.nullity)?;
        }
        Ok(())
    }
}

/// Exact component sizes and nullities. Loops unite a vertex with itself but
/// count toward the component's edge total.
pub fn component_stats(g: &Multigraph) -> ComponentStats {
    let mut uf = UnionFind::new(g.n);
    for &(u, v) in &g.edges {
        uf.union(u, v);
    }
    let mut edge_count: BTreeMap<u32, usize> = BTreeMap::new();
    for &(u, _) in &g.edges {
        *edge_count.entry(uf.find(u)).or_insert(0) += 1;
    }
    let mut by_root: BTreeMap<u32, ComponentRecord> = BTreeMap::new();
    for v in 0..g.n as u32 {
        let root = uf.find(v);
        let rec = by_root.entry(root).or_insert(ComponentRecord {
            size: 0,
            edges: 0,
            nullity: 0,
            min_vertex: v,
        });
        rec.size += 1;
        if v < rec.min_vertex {
            rec.min_vertex = v;
        }
    }
    for (root, edges) in edge_count {
        if let Some(rec) = by_root.get_mut(&root) {
            rec.edges = edges;
        }
    }
    let mut components: Vec<(u32, ComponentRecord)> = by_root
        .into_iter()
        .map(|(root, mut rec)| {
            rec.nullity = rec.edges + 1 - rec.size;
            (root, rec)
        })
        .collect();
    components.sort_by(|a, b| {
        b.1.size
            .cmp(&a.1.size)
            .then(a.1.nullity.cmp(&b.1.nullity))
            .then(a.1.min_vertex.cmp(&b.1.min_vertex))
    });
    let mut rank_of_root: BTreeMap<u32, u32> = BTreeMap::new();
    for (rank, (root, _)) in components.iter().enumerate() {
        rank_of_root.insert(*root, rank as u32);
    }
    let assignment = (0..g.n as u32)
        .map(|v| rank_of_root[&uf.find(v)])
        .collect();
    ComponentStats {
        components: components.into_iter().map(|(_, rec)| rec).collect(),
        assignment,
        n: g.n,
        m: g.edges.len(),
    }
}

/// Counts of original-degree-d vertices inside the largest component.
pub fn largest_component_degree_profile(
    g: &Multigraph,
    stats: &ComponentStats,
) -> BTreeMap<usize, u64> {
    let degrees = g.degrees();
    let mut profile = BTreeMap::new();
    if stats.components().is_empty() {
        return profile;
    }
    for v in 0..g.n as u32 {
        if stats.component_of(v) == 0 {
            *profile.entry(degrees[v as usize] as usize).or_insert(0) += 1;
        }
    }
    profile
}

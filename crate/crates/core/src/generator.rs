//! Uniform stub matchings, the induced multigraphs, edge percolation and
//! simplicity conditioning.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::degree::DegreeSequence;
use crate::error::{Error, Result};

/// A perfect matching of the stub set.
///
/// Stub `s` belongs to vertex `owner[s]`; stubs of a vertex are contiguous
/// and ordered by vertex. `partner` is an involution without fixed points.
#[derive(Debug, Clone)]
pub struct Pairing {
    owner: Vec<u32>,
    partner: Vec<u32>,
    n: usize,
}

impl Pairing {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stub_count(&self) -> usize {
        self.owner.len()
    }

    pub fn edge_count(&self) -> usize {
        self.owner.len() / 2
    }

    pub fn owner(&self, stub: u32) -> u32 {
        self.owner[stub as usize]
    }

    pub fn partner(&self, stub: u32) -> u32 {
        self.partner[stub as usize]
    }

    pub fn owners(&self) -> &[u32] {
        &self.owner
    }

    /// Stub layout for a degree sequence: per-vertex contiguous blocks.
    pub fn stub_owners(seq: &DegreeSequence) -> Vec<u32> {
        let degrees = seq.vertex_degrees();
        let mut owner = Vec::with_capacity(seq.stub_count() as usize);
        for (v, &d) in degrees.iter().enumerate() {
            for _ in 0..d {
                owner.push(v as u32);
            }
        }
        owner
    }

    /// Reconstructs a pairing from an explicit multigraph; stubs are assigned
    /// to edges in edge-list order. The multigraph of the result is `g` up to
    /// edge order.
    pub fn from_multigraph(g: &Multigraph) -> Self {
        let degrees = g.degrees();
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        let mut acc = 0u32;
        for &d in &degrees {
            offsets.push(acc);
            acc += d;
        }
        let total = acc as usize;
        let mut owner = vec![0u32; total];
        let mut next = offsets.clone();
        let mut partner = vec![0u32; total];
        for &(u, v) in &g.edges {
            let su = next[u as usize];
            next[u as usize] += 1;
            let sv = next[v as usize];
            next[v as usize] += 1;
            partner[su as usize] = sv;
            partner[sv as usize] = su;
        }
        for (v, &d) in degrees.iter().enumerate() {
            let base = offsets[v];
            for i in 0..d {
                owner[(base + i) as usize] = v as u32;
            }
        }
        Self {
            owner,
            partner,
            n: g.n,
        }
    }
}

/// Multigraph as an edge list; loops and parallel edges allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    pub n: usize,
    /// Edges normalized to u <= v.
    pub edges: Vec<(u32, u32)>,
}

impl Multigraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Per-vertex degrees; a loop contributes 2.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    /// Edge-list serialization: `# n=<n> m=<m>` header then one `u v` line
    /// per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={} m={}", self.n, self.edge_count())?;
        for &(u, v) in &self.edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Uniform random pairing: shuffle the stub array and match consecutive
/// positions.
pub fn generate_pairing<R: Rng>(seq: &DegreeSequence, rng: &mut R) -> Result<Pairing> {
    let stubs = seq.stub_count();
    if stubs % 2 != 0 {
        return Err(Error::OddStubSum(stubs));
    }
    let owner = Pairing::stub_owners(seq);
    let mut order: Vec<u32> = (0..stubs as u32).collect();
    order.shuffle(rng);
    let mut partner = vec![0u32; stubs as usize];
    for pair in order.chunks_exact(2) {
        partner[pair[0] as usize] = pair[1];
        partner[pair[1] as usize] = pair[0];
    }
    Ok(Pairing {
        owner,
        partner,
        n: seq.n() as usize,
    })
}

/// Collapses a pairing to its multigraph.
pub fn to_multigraph(pairing: &Pairing) -> Multigraph {
    let mut edges = Vec::with_capacity(pairing.edge_count());
    for s in 0..pairing.stub_count() as u32 {
        let t = pairing.partner(s);
        if s < t {
            let (u, v) = (pairing.owner(s), pairing.owner(t));
            edges.push((u.min(v), u.max(v)));
        }
    }
    Multigraph {
        n: pairing.n(),
        edges,
    }
}

/// Keeps each edge independently with probability `p`; vertex set unchanged.
pub fn percolate<R: Rng>(g: &Multigraph, p: f64, rng: &mut R) -> Result<Multigraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let edges = g
        .edges
        .iter()
        .copied()
        .filter(|_| rng.gen::<f64>() < p)
        .collect();
    Ok(Multigraph { n: g.n, edges })
}

/// True iff the multigraph has no loops and no parallel edges.
pub fn is_simple(g: &Multigraph) -> bool {
    let mut seen = HashSet::with_capacity(g.edges.len());
    for &(u, v) in &g.edges {
        if u == v || !seen.insert((u, v)) {
            return false;
        }
    }
    true
}

/// A simple multigraph obtained by rejection, with the attempt count.
#[derive(Debug, Clone)]
pub struct SimpleSample {
    pub graph: Multigraph,
    pub attempts: u32,
}

/// Rejection-samples pairings until the multigraph is simple.
pub fn generate_simple<R: Rng>(
    seq: &DegreeSequence,
    rng: &mut R,
    max_attempts: u32,
) -> Result<SimpleSample> {
    for attempt in 1..=max_attempts {
        let pairing = generate_pairing(seq, rng)?;
        let graph = to_multigraph(&pairing);
        if is_simple(&graph) {
            return Ok(SimpleSample {
                graph,
                attempts: attempt,
            });
        }
    }
    Err(Error::SimplicityExhausted {
        attempts: max_attempts,
    })
}

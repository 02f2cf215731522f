//! Bounded degree sequences and the moment machinery derived from them.
//!
//! A [`DegreeSequence`] stores integer counts per degree; all formulas depend
//! only on the counts, so per-vertex identity is materialized only by the
//! generator. A [`DegreeDistribution`] is the same shape with scalar
//! fractions, which is what the closed-form predictions consume (and what the
//! idealized percolated r-regular family produces exactly).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tilt::LatticeDistribution;

/// Default threshold for the "enough non-degree-2 vertices" validation: the
/// fraction of vertices with degree outside {0, 2} below which a sequence is
/// flagged. The asymptotic hypothesis has no per-instance constant; 0.05 is
/// the configurable default.
pub const DEFAULT_C0: f64 = 0.05;

/// Integer degree sequence: counts of vertices per degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    counts: BTreeMap<usize, u64>,
    n: u64,
    dmax: usize,
}

impl DegreeSequence {
    /// Builds a sequence from per-degree counts. Zero counts are dropped.
    ///
    /// The stub sum must be even (a perfect matching of stubs must exist).
    pub fn new(counts: BTreeMap<usize, u64>) -> Result<Self> {
        let counts: BTreeMap<usize, u64> =
            counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let n = counts.values().sum();
        let stubs: u64 = counts.iter().map(|(&d, &c)| d as u64 * c).sum();
        if stubs % 2 != 0 {
            return Err(Error::OddStubSum(stubs));
        }
        let dmax = counts.keys().next_back().copied().unwrap_or(0);
        Ok(Self { counts, n, dmax })
    }

    /// Convenience constructor from explicit per-vertex degrees.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &d in degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        Self::new(counts)
    }

    /// All vertices share the same degree.
    pub fn regular(degree: usize, n: u64) -> Result<Self> {
        let mut counts = BTreeMap::new();
        counts.insert(degree, n);
        Self::new(counts)
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn count(&self, degree: usize) -> u64 {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    /// Total vertex count (degree-0 vertices included).
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Largest degree present (0 for the empty sequence).
    pub fn dmax(&self) -> usize {
        self.dmax
    }

    /// Total stub count.
    pub fn stub_count(&self) -> u64 {
        self.counts.iter().map(|(&d, &c)| d as u64 * c).sum()
    }

    /// Number of edges in any realization.
    pub fn edge_count(&self) -> u64 {
        self.stub_count() / 2
    }

    /// Fraction of vertices with degree outside {0, 2}.
    pub fn non_trivial_fraction(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let nt: u64 = self
            .counts
            .iter()
            .filter(|&(&d, _)| d != 0 && d != 2)
            .map(|(_, &c)| c)
            .sum();
        nt as f64 / self.n as f64
    }

    /// True when the sequence fails the non-degree-{0,2} fraction threshold.
    /// A warning condition, not an error: the hypothesis is asymptotic.
    pub fn scaling_warning(&self, c0: f64) -> bool {
        self.non_trivial_fraction() < c0
    }

    /// Per-vertex degrees, vertices ordered by ascending degree class.
    pub fn vertex_degrees(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n as usize);
        for (&d, &c) in &self.counts {
            for _ in 0..c {
                out.push(d as u32);
            }
        }
        out
    }

    /// Exact fractions n_d / n.
    pub fn distribution<T: Scalar>(&self) -> DegreeDistribution<T> {
        let mut probs = vec![T::zero(); self.dmax + 1];
        let n = T::of_u64(self.n.max(1));
        for (&d, &c) in &self.counts {
            probs[d] = T::of_u64(c) / n;
        }
        DegreeDistribution { probs }
    }
}

/// Realizes fractional degree probabilities as integer counts at size `n`:
/// largest-remainder rounding, then a parity fix that moves one vertex out of
/// the largest odd-degree class when the stub sum comes out odd.
pub fn realize_counts<T: Scalar>(probs: &DegreeDistribution<T>, n: u64) -> Result<DegreeSequence> {
    let nf = T::of_u64(n);
    let mut counts: Vec<u64> = Vec::with_capacity(probs.probs.len());
    let mut remainders: Vec<(T, usize)> = Vec::with_capacity(probs.probs.len());
    let mut total: u64 = 0;
    for (d, &p) in probs.probs.iter().enumerate() {
        let exact = p * nf;
        let floor = exact.floor();
        let c = floor.to_u64().unwrap_or(0);
        counts.push(c);
        total += c;
        remainders.push((exact - floor, d));
    }
    // Largest remainders absorb the deficit; ties broken by degree for
    // determinism.
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut deficit = n.saturating_sub(total);
    for &(_, d) in &remainders {
        if deficit == 0 {
            break;
        }
        counts[d] += 1;
        deficit -= 1;
    }
    let stub_sum: u64 = counts.iter().enumerate().map(|(d, &c)| d as u64 * c).sum();
    if stub_sum % 2 != 0 {
        // Some odd-degree class is non-empty when the stub sum is odd.
        let fix = counts
            .iter()
            .enumerate()
            .filter(|&(d, &c)| d % 2 == 1 && c > 0)
            .max_by_key(|&(d, &c)| (c, d))
            .map(|(d, _)| d)
            .expect("odd stub sum implies an odd-degree class");
        counts[fix] -= 1;
        if fix > 0 {
            counts[fix - 1] += 1;
        }
    }
    let map: BTreeMap<usize, u64> = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    DegreeSequence::new(map)
}

/// Degree distribution: probability per degree, indexed from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> DegreeDistribution<T> {
    /// Builds from raw weights (normalized here).
    pub fn from_weights(weights: &[T]) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::NoStubs);
        }
        let probs = weights.iter().map(|&w| w / total).collect();
        Ok(Self { probs })
    }

    /// Idealized degree law of a percolated r-regular graph: binomial(r, p).
    pub fn r_regular_percolated(r: u32, p: T) -> Result<Self> {
        if r < 3 {
            return Err(Error::RegularDegreeTooSmall(r));
        }
        let pf = p.to_f64().unwrap_or(f64::NAN);
        if !(0.0..=1.0).contains(&pf) {
            return Err(Error::InvalidProbability(pf));
        }
        let q = T::one() - p;
        let mut probs = Vec::with_capacity(r as usize + 1);
        for d in 0..=r {
            let binom = T::of_u64(binomial(r as u64, d as u64));
            probs.push(binom * p.powi(d as i32) * q.powi((r - d) as i32));
        }
        Ok(Self { probs })
    }

    /// Law after keeping each half-edge independently with probability `p`
    /// (binomial thinning); multiplies every factorial moment by `p^i`.
    pub fn thinned(&self, p: T) -> Result<Self> {
        let pf = p.to_f64().unwrap_or(f64::NAN);
        if !(0.0..=1.0).contains(&pf) {
            return Err(Error::InvalidProbability(pf));
        }
        let q = T::one() - p;
        let mut probs = vec![T::zero(); self.probs.len()];
        for (j, &pj) in self.probs.iter().enumerate() {
            for (d, slot) in probs.iter_mut().enumerate().take(j + 1) {
                let binom = T::of_u64(binomial(j as u64, d as u64));
                *slot += pj * binom * p.powi(d as i32) * q.powi((j - d) as i32);
            }
        }
        Ok(Self { probs })
    }

    pub fn prob(&self, d: usize) -> T {
        self.probs.get(d).copied().unwrap_or_else(T::zero)
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn dmax(&self) -> usize {
        self.probs
            .iter()
            .rposition(|&p| p > T::zero())
            .unwrap_or(0)
    }

    /// r-th factorial moment: sum over d of p_d * d(d-1)...(d-r+1).
    pub fn factorial_moment(&self, r: u32) -> Result<T> {
        if r == 0 {
            return Err(Error::ZeroMomentOrder);
        }
        let mut acc = T::zero();
        for (d, &p) in self.probs.iter().enumerate() {
            if d < r as usize {
                continue;
            }
            let mut term = T::one();
            for i in 0..r as usize {
                term *= T::of_usize(d - i);
            }
            acc += p * term;
        }
        Ok(acc)
    }

    pub fn mu1(&self) -> T {
        self.factorial_moment(1).unwrap_or_else(|_| T::zero())
    }

    pub fn mu2(&self) -> T {
        self.factorial_moment(2).unwrap_or_else(|_| T::zero())
    }

    pub fn mu3(&self) -> T {
        self.factorial_moment(3).unwrap_or_else(|_| T::zero())
    }

    /// Average branching factor mu2 / mu1.
    pub fn branching_factor(&self) -> Result<T> {
        let mu1 = self.mu1();
        if !(mu1 > T::zero()) {
            return Err(Error::NoStubs);
        }
        Ok(self.mu2() / mu1)
    }

    /// Signed offset of the branching factor from criticality.
    pub fn epsilon(&self) -> Result<T> {
        Ok(self.branching_factor()? - T::one())
    }

    /// Size-biased degree law: the degree of the vertex at the far end of a
    /// uniformly random stub.
    pub fn size_biased(&self) -> Result<SizeBiased<T>> {
        let mu1 = self.mu1();
        if !(mu1 > T::zero()) {
            return Err(Error::NoStubs);
        }
        let mu2 = self.mu2();
        let mu3 = self.mu3();
        let q: Vec<(usize, T)> = self
            .probs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, &p)| p > T::zero())
            .map(|(d, &p)| (d, T::of_usize(d) * p / mu1))
            .collect();
        let v0 = (mu3 * mu1 + mu2 * mu1 - mu2 * mu2) / (mu1 * mu1);
        let epsilon = mu2 / mu1 - T::one();
        Ok(SizeBiased { q, v0, epsilon })
    }

    /// Probability generating function of the degree law (degree-0 term
    /// excluded) and its first three derivatives: order 0..=3.
    pub fn pgf(&self, z: T, order: u8) -> Result<T> {
        let zf = z.to_f64().unwrap_or(f64::NAN);
        if !(0.0..=1.0).contains(&zf) {
            return Err(Error::PgfArgument(zf));
        }
        if order > 3 {
            return Err(Error::PgfOrder(order));
        }
        let k = order as usize;
        let mut acc = T::zero();
        for (d, &p) in self.probs.iter().enumerate().skip(1) {
            if d < k {
                continue;
            }
            let mut coeff = T::one();
            for i in 0..k {
                coeff *= T::of_usize(d - i);
            }
            acc += p * coeff * z.powi((d - k) as i32);
        }
        Ok(acc)
    }

    /// Fraction of degree-0 vertices.
    pub fn p0(&self) -> T {
        self.prob(0)
    }

    /// Probability that the uniform stub matching yields a simple graph:
    /// exp(-theta - theta^2) with theta = mu2 / (2 mu1).
    pub fn simplicity_probability(&self) -> Result<T> {
        let mu1 = self.mu1();
        if !(mu1 > T::zero()) {
            return Err(Error::NoStubs);
        }
        let theta = self.mu2() / (mu1 + mu1);
        Ok((-theta - theta * theta).exp())
    }
}

/// Size-biased degree distribution q_d = d p_d / mu1 with its variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBiased<T> {
    /// Sparse (degree, probability) pairs, degree >= 1.
    pub q: Vec<(usize, T)>,
    /// Variance of the size-biased degree (equals the variance of eta - 2).
    pub v0: T,
    /// Mean of eta - 2, i.e. branching factor minus one.
    pub epsilon: T,
}

impl<T: Scalar> SizeBiased<T> {
    pub fn prob(&self, d: usize) -> T {
        self.q
            .iter()
            .find(|&&(deg, _)| deg == d)
            .map(|&(_, p)| p)
            .unwrap_or_else(T::zero)
    }

    /// Mean of eta - 1 (the branching factor).
    pub fn mean_offspring(&self) -> T {
        self.epsilon + T::one()
    }

    /// Law of eta - 2 as an integer lattice distribution (support >= -1).
    pub fn eta_minus_two(&self) -> Result<LatticeDistribution<T>> {
        let min = self.q.iter().map(|&(d, _)| d as i64 - 2).min().unwrap_or(0);
        let max = self.q.iter().map(|&(d, _)| d as i64 - 2).max().unwrap_or(0);
        let mut probs = vec![T::zero(); (max - min + 1) as usize];
        for &(d, p) in &self.q {
            probs[(d as i64 - 2 - min) as usize] += p;
        }
        LatticeDistribution::new(min, probs)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

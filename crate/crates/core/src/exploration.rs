//! Stub-level exploration of a configuration multigraph.
//!
//! One vertex is reached per step. New components start at a vertex chosen
//! with probability proportional to degree, realized by fixing a uniform
//! random order on all stubs up front and starting at the unreached vertex
//! owning the earliest remaining stub. Within a component the next active
//! stub is taken FIFO (LIFO available for invariance checks). Each reveal
//! first consumes pairs leading back to previously active stubs, then pairs
//! internal to the new vertex; only the per-step count of such back-edges
//! enters the walk.
//!
//! Two partner sources share the engine: lazy sampling (partners drawn
//! uniformly from the not-yet-queried stubs, committing each drawn pair) and
//! replay on a materialized pairing for exact oracle comparisons. Both are
//! deterministic functionals of a uniform matching plus the stub order, so
//! they have the same law.
//!
//! After all stubs are consumed, any remaining (degree-0) vertices are
//! revealed one per step with eta = 0, so a full trace covers all n vertices
//! and component multisets compare exactly against union-find.

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::degree::DegreeSequence;
use crate::error::{Error, Result};
use crate::generator::{Multigraph, Pairing};
use crate::theory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActiveOrder {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, Default)]
pub struct ExploreOptions {
    pub mode: Option<usize>,
    pub order: ActiveOrder,
    /// Times at which to snapshot per-degree unreached counts.
    pub snapshot_times: Vec<usize>,
}

/// Per-step record of the exploration walks and the component boundaries.
#[derive(Debug, Clone)]
pub struct ExplorationTrace {
    /// Degree of the vertex reached at step t (index t - 1).
    pub eta: Vec<u32>,
    /// Back-edges found at step t.
    pub beta: Vec<u32>,
    /// Active stubs after step t.
    pub active: Vec<u64>,
    /// Components started within the first t steps.
    pub components_started: Vec<u64>,
    /// Walk X_t = A_t - 2 C_t.
    pub x: Vec<i64>,
    /// Cumulative back-edges Y_t.
    pub y: Vec<u64>,
    /// Times at which components finished.
    pub boundaries: Vec<usize>,
    /// (size, nullity) of each completed component, in exploration order.
    pub components: Vec<(usize, u64)>,
    /// (t, unreached vertex counts per degree) at requested times.
    pub snapshots: Vec<(usize, Vec<u64>)>,
    pub n: usize,
}

impl ExplorationTrace {
    pub fn steps(&self) -> usize {
        self.eta.len()
    }

    /// Sorted (size, nullity) multiset for comparison against union-find.
    pub fn size_nullity_multiset(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .components
            .iter()
            .map(|&(s, nu)| (s, nu as usize))
            .collect();
        v.sort_unstable();
        v
    }

    /// Verifies every walk identity on the recorded arrays.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let t_max = self.steps();
        let mut prev_x = 0i64;
        let mut prev_y = 0u64;
        for t in 0..t_max {
            let x = self.x[t];
            let a = self.active[t] as i64;
            let c = self.components_started[t] as i64;
            if x != a - 2 * c {
                return Err(format!("X != A - 2C at step {}", t + 1));
            }
            let dx = x - prev_x;
            if dx != self.eta[t] as i64 - 2 - 2 * self.beta[t] as i64 {
                return Err(format!("X increment mismatch at step {}", t + 1));
            }
            if self.y[t] - prev_y != self.beta[t] as u64 {
                return Err(format!("Y increment mismatch at step {}", t + 1));
            }
            let boundary = self.boundaries.binary_search(&(t + 1)).is_ok();
            if boundary != (self.active[t] == 0) {
                return Err(format!("A = 0 exactly at boundaries violated at {}", t + 1));
            }
            prev_x = x;
            prev_y = self.y[t];
        }
        // t_i = min { t : X_t = -2 i }
        for (i, &ti) in self.boundaries.iter().enumerate() {
            let want = -2 * (i as i64 + 1);
            if self.x[ti - 1] != want {
                return Err(format!("X at boundary {} is {}", ti, self.x[ti - 1]));
            }
            if self.x[..ti - 1].iter().any(|&x| x <= want) {
                return Err(format!("boundary {} is not the first hit of {}", ti, want));
            }
        }
        // component sizes and nullities from boundaries
        let mut prev_t = 0usize;
        let mut prev_yv = 0u64;
        for (i, &ti) in self.boundaries.iter().enumerate() {
            let (size, nullity) = self.components[i];
            if size != ti - prev_t || nullity != self.y[ti - 1] - prev_yv {
                return Err(format!("component {i} inconsistent with boundaries"));
            }
            prev_t = ti;
            prev_yv = self.y[ti - 1];
        }
        Ok(())
    }

    /// Walk dump CSV `t,eta,beta,A,C,X,Y`, sampled every `every` steps.
    pub fn write_walk_csv<W: Write>(&self, every: usize, mut w: W) -> Result<()> {
        writeln!(w, "t,eta,beta,A,C,X,Y")?;
        let every = every.max(1);
        for t in (0..self.steps()).step_by(every) {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                t + 1,
                self.eta[t],
                self.beta[t],
                self.active[t],
                self.components_started[t],
                self.x[t],
                self.y[t]
            )?;
        }
        Ok(())
    }
}

const NONE: u32 = u32::MAX;

/// Uniform sampling pool over not-yet-queried stubs.
struct Pool {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl Pool {
    fn new(size: usize) -> Self {
        Self {
            items: (0..size as u32).collect(),
            pos: (0..size as u32).collect(),
        }
    }

    fn remove(&mut self, stub: u32) {
        let i = self.pos[stub as usize];
        if i == NONE {
            return;
        }
        let last = *self.items.last().unwrap();
        self.items.swap_remove(i as usize);
        if last != stub {
            self.pos[last as usize] = i;
        }
        self.pos[stub as usize] = NONE;
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> u32 {
        let i = rng.gen_range(0..self.items.len());
        let stub = self.items[i];
        self.remove(stub);
        stub
    }
}

enum PartnerSource<'a> {
    Lazy(Pool),
    Replay(&'a Pairing),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum StubState {
    Unreached,
    Active,
    Consumed,
}

struct Engine<'a, R: Rng> {
    owner: Vec<u32>,
    stub_of_vertex: Vec<(u32, u32)>, // (first stub, degree)
    state: Vec<StubState>,
    committed: Vec<u32>,
    source: PartnerSource<'a>,
    queue: VecDeque<u32>,
    order: ActiveOrder,
    start_order: Vec<u32>,
    start_cursor: usize,
    zero_cursor: usize,
    reached: Vec<bool>,
    unreached_by_degree: Vec<u64>,
    active_count: u64,
    rng: &'a mut R,
}

impl<'a, R: Rng> Engine<'a, R> {
    fn new(owner: Vec<u32>, n: usize, source: PartnerSource<'a>, order: ActiveOrder, rng: &'a mut R) -> Self {
        let mut degree = vec![0u32; n];
        for &v in &owner {
            degree[v as usize] += 1;
        }
        let mut stub_of_vertex = Vec::with_capacity(n);
        let mut acc = 0u32;
        for &d in &degree {
            stub_of_vertex.push((acc, d));
            acc += d;
        }
        let dmax = degree.iter().copied().max().unwrap_or(0) as usize;
        let mut unreached_by_degree = vec![0u64; dmax + 1];
        for &d in &degree {
            unreached_by_degree[d as usize] += 1;
        }
        let mut start_order: Vec<u32> = (0..owner.len() as u32).collect();
        start_order.shuffle(rng);
        let stubs = owner.len();
        Self {
            owner,
            stub_of_vertex,
            state: vec![StubState::Unreached; stubs],
            committed: vec![NONE; stubs],
            source,
            queue: VecDeque::new(),
            order,
            start_order,
            start_cursor: 0,
            zero_cursor: 0,
            reached: vec![false; n],
            unreached_by_degree,
            active_count: 0,
            rng,
        }
    }

    fn pop_active(&mut self) -> Option<u32> {
        loop {
            let stub = match self.order {
                ActiveOrder::Fifo => self.queue.pop_front(),
                ActiveOrder::Lifo => self.queue.pop_back(),
            }?;
            if self.state[stub as usize] == StubState::Active {
                return Some(stub);
            }
            // stale entry: consumed by a back-edge after being queued
        }
    }

    fn next_start_vertex(&mut self) -> Option<u32> {
        while self.start_cursor < self.start_order.len() {
            let stub = self.start_order[self.start_cursor];
            let v = self.owner[stub as usize];
            if !self.reached[v as usize] {
                return Some(v);
            }
            self.start_cursor += 1;
        }
        None
    }

    fn next_zero_degree_vertex(&mut self) -> Option<u32> {
        while self.zero_cursor < self.reached.len() {
            let v = self.zero_cursor as u32;
            if !self.reached[v as usize] {
                return Some(v);
            }
            self.zero_cursor += 1;
        }
        None
    }

    fn partner_of(&mut self, stub: u32) -> Option<u32> {
        match &mut self.source {
            PartnerSource::Lazy(_) => {
                let c = self.committed[stub as usize];
                (c != NONE).then_some(c)
            }
            PartnerSource::Replay(p) => Some(p.partner(stub)),
        }
    }

    /// Reveals vertex `v`, arriving via consumed stub `via` (None when a new
    /// component starts here). Returns (eta, back-edges found).
    fn reveal(&mut self, v: u32, via: Option<u32>) -> (u32, u32) {
        self.reached[v as usize] = true;
        let (first, deg) = self.stub_of_vertex[v as usize];
        self.unreached_by_degree[deg as usize] -= 1;
        let mut beta = 0u32;
        for s in first..first + deg {
            if Some(s) == via || self.state[s as usize] == StubState::Consumed {
                continue;
            }
            if let PartnerSource::Lazy(pool) = &mut self.source {
                pool.remove(s);
            }
            let partner = match self.partner_of(s) {
                Some(w) => w,
                None => {
                    // lazy draw; commits the pair
                    let w = match &mut self.source {
                        PartnerSource::Lazy(pool) => pool.draw(self.rng),
                        PartnerSource::Replay(_) => unreachable!(),
                    };
                    self.committed[s as usize] = w;
                    self.committed[w as usize] = s;
                    w
                }
            };
            match self.state[partner as usize] {
                StubState::Active => {
                    // back to a previously active stub
                    beta += 1;
                    self.state[s as usize] = StubState::Consumed;
                    self.state[partner as usize] = StubState::Consumed;
                    self.active_count -= 1;
                }
                StubState::Unreached if self.owner[partner as usize] == v => {
                    // internal pair of the new vertex
                    beta += 1;
                    self.state[s as usize] = StubState::Consumed;
                    self.state[partner as usize] = StubState::Consumed;
                    if let PartnerSource::Lazy(pool) = &mut self.source {
                        pool.remove(partner);
                    }
                }
                StubState::Unreached => {
                    self.state[s as usize] = StubState::Active;
                    self.active_count += 1;
                    self.queue.push_back(s);
                }
                StubState::Consumed => unreachable!("partner consumed without its pair"),
            }
        }
        (deg, beta)
    }

    fn step(&mut self) -> Option<(u32, u32, bool)> {
        if let Some(a) = self.pop_active() {
            self.state[a as usize] = StubState::Consumed;
            self.active_count -= 1;
            let u = self.partner_of(a).expect("active stub has a partner");
            debug_assert!(self.state[u as usize] == StubState::Unreached);
            self.state[u as usize] = StubState::Consumed;
            if let PartnerSource::Lazy(pool) = &mut self.source {
                pool.remove(u);
            }
            let v = self.owner[u as usize];
            let (eta, beta) = self.reveal(v, Some(u));
            Some((eta, beta, false))
        } else if let Some(v) = self.next_start_vertex() {
            let (eta, beta) = self.reveal(v, None);
            Some((eta, beta, true))
        } else if let Some(v) = self.next_zero_degree_vertex() {
            self.reached[v as usize] = true;
            self.unreached_by_degree[0] -= 1;
            Some((0, 0, true))
        } else {
            None
        }
    }
}

fn run_engine<R: Rng>(
    owner: Vec<u32>,
    n: usize,
    source: PartnerSource<'_>,
    options: &ExploreOptions,
    rng: &mut R,
) -> Result<ExplorationTrace> {
    let limit = match options.mode {
        Some(t) if t > n => return Err(Error::StepLimit { limit: t, n }),
        Some(t) => t,
        None => n,
    };
    let mut snapshot_times = options.snapshot_times.clone();
    snapshot_times.sort_unstable();
    snapshot_times.dedup();

    let mut engine = Engine::new(owner, n, source, options.order, rng);
    let mut trace = ExplorationTrace {
        eta: Vec::with_capacity(limit),
        beta: Vec::with_capacity(limit),
        active: Vec::with_capacity(limit),
        components_started: Vec::with_capacity(limit),
        x: Vec::with_capacity(limit),
        y: Vec::with_capacity(limit),
        boundaries: Vec::new(),
        components: Vec::new(),
        snapshots: Vec::new(),
        n,
    };
    let mut snap_iter = snapshot_times.into_iter().peekable();
    if snap_iter.peek() == Some(&0) {
        snap_iter.next();
        trace.snapshots.push((0, engine.unreached_by_degree.clone()));
    }
    let mut components_started = 0u64;
    let mut y = 0u64;
    let mut prev_boundary = 0usize;
    let mut y_at_prev_boundary = 0u64;
    for t in 1..=limit {
        let Some((eta, beta, started)) = engine.step() else {
            break;
        };
        if started {
            components_started += 1;
        }
        y += beta as u64;
        let a = engine.active_count;
        trace.eta.push(eta);
        trace.beta.push(beta);
        trace.active.push(a);
        trace.components_started.push(components_started);
        trace.x.push(a as i64 - 2 * components_started as i64);
        trace.y.push(y);
        if a == 0 {
            trace.boundaries.push(t);
            trace
                .components
                .push((t - prev_boundary, y - y_at_prev_boundary));
            prev_boundary = t;
            y_at_prev_boundary = y;
        }
        if snap_iter.peek() == Some(&t) {
            snap_iter.next();
            trace.snapshots.push((t, engine.unreached_by_degree.clone()));
        }
    }
    Ok(trace)
}

/// Explores a fresh uniform multigraph on `seq`, sampling the pairing lazily.
pub fn explore<R: Rng>(
    seq: &DegreeSequence,
    rng: &mut R,
    options: &ExploreOptions,
) -> Result<ExplorationTrace> {
    let stubs = seq.stub_count();
    if stubs % 2 != 0 {
        return Err(Error::OddStubSum(stubs));
    }
    let owner = Pairing::stub_owners(seq);
    let pool = Pool::new(owner.len());
    run_engine(
        owner,
        seq.n() as usize,
        PartnerSource::Lazy(pool),
        options,
        rng,
    )
}

/// Explores a fixed pairing; randomness only drives the stub order that
/// selects component starts.
pub fn replay_on_pairing<R: Rng>(
    pairing: &Pairing,
    rng: &mut R,
    options: &ExploreOptions,
) -> Result<ExplorationTrace> {
    run_engine(
        pairing.owners().to_vec(),
        pairing.n(),
        PartnerSource::Replay(pairing),
        options,
        rng,
    )
}

/// Convenience: replay an exploration over an explicit multigraph.
pub fn replay_on_multigraph<R: Rng>(
    g: &Multigraph,
    rng: &mut R,
    options: &ExploreOptions,
) -> Result<ExplorationTrace> {
    let pairing = Pairing::from_multigraph(g);
    replay_on_pairing(&pairing, rng, options)
}

/// One observed-vs-predicted unreached count.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DiagnosticRow {
    pub t: usize,
    pub degree: usize,
    pub observed: u64,
    /// n_d z(t/n)^d from the idealized trajectory.
    pub predicted: f64,
    /// |observed - predicted| / sqrt(t); zero at t = 0.
    pub normalized_deviation: f64,
}

/// Compares snapshot unreached counts against the trajectory prediction.
/// Every requested time must have been snapshotted during exploration.
pub fn unreached_diagnostic(
    trace: &ExplorationTrace,
    seq: &DegreeSequence,
    times: &[usize],
) -> Result<Vec<DiagnosticRow>> {
    let dist = seq.distribution::<f64>();
    let n = seq.n() as f64;
    let mut rows = Vec::new();
    for &t in times {
        let snap = trace
            .snapshots
            .iter()
            .find(|&&(st, _)| st == t)
            .ok_or_else(|| Error::InvalidConfig(format!("no snapshot at t = {t}")))?;
        let z = theory::trajectory(&dist, t as f64 / n)?.z;
        for (d, &observed) in snap.1.iter().enumerate().skip(1) {
            let nd = seq.count(d) as f64;
            if nd == 0.0 {
                continue;
            }
            let predicted = nd * z.powi(d as i32);
            let normalized_deviation = if t == 0 {
                0.0
            } else {
                (observed as f64 - predicted).abs() / (t as f64).sqrt()
            };
            rows.push(DiagnosticRow {
                t,
                degree: d,
                observed,
                predicted,
                normalized_deviation,
            });
        }
    }
    Ok(rows)
}

//! Communication graphs, doubly stochastic mixing matrices and their
//! spectral behaviour.

use alloc::borrow::Cow;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::math::abs;
use crate::rng::derive_stream;

/// Tolerance on row and column sums of a mixing matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Number of draws tried when a fixed schedule needs a connected graph.
pub const CONNECTED_ATTEMPTS: usize = 100;

/// Undirected simple graph on nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    // normalized as (low, high), sorted, unique
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(invalid("node_count", "a graph needs at least one node"));
        }
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(invalid(
                    "edges",
                    format!("edge ({a}, {b}) has an endpoint outside [0, {node_count})"),
                ));
            }
            if a == b {
                return Err(invalid("edges", format!("self-loop at node {a}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        let before = norm.len();
        norm.dedup();
        if norm.len() != before {
            return Err(invalid("edges", "duplicate edge"));
        }
        Ok(Graph {
            node_count,
            edges: norm,
        })
    }

    pub fn empty(node_count: usize) -> Result<Self> {
        Self::new(node_count, [])
    }

    pub fn path(node_count: usize) -> Result<Self> {
        Self::new(node_count, (1..node_count).map(|i| (i - 1, i)))
    }

    pub fn complete(node_count: usize) -> Result<Self> {
        Self::new(
            node_count,
            (0..node_count).flat_map(|i| (i + 1..node_count).map(move |j| (i, j))),
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.adjacency())
    }
}

fn connected(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Erdős–Rényi graph: each unordered pair is an edge independently with
/// probability `p`, drawn in lexicographic pair order from `rng`.
pub fn generate_er_graph<R: Rng + ?Sized>(n_nodes: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("edge probability {p} is outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for i in 0..n_nodes {
        for j in i + 1..n_nodes {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n_nodes, edges)
}

/// A doubly stochastic weight matrix `A(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    weights: Matrix,
    eta: f64,
}

impl MixingMatrix {
    /// Validates nonnegativity and double stochasticity; `eta` becomes the
    /// smallest strictly positive entry.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::InvalidMixingMatrix(format!(
                "expected a nonempty square matrix, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        if let Some(v) = weights.as_slice().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidMixingMatrix(format!("entry {v} is negative")));
        }
        let dev = stochastic_deviation(&weights);
        if dev > STOCHASTIC_TOL {
            return Err(Error::InvalidMixingMatrix(format!(
                "row/column sums deviate from 1 by {dev:e}"
            )));
        }
        let eta = min_positive(&weights);
        Ok(MixingMatrix { weights, eta })
    }

    pub fn identity(n: usize) -> Self {
        MixingMatrix {
            weights: Matrix::identity(n),
            eta: 1.0,
        }
    }

    /// Complete one-step averaging, `(1/N) 1 1ᵀ`.
    pub fn uniform(n: usize) -> Self {
        MixingMatrix {
            weights: Matrix::averaging(n),
            eta: 1.0 / n as f64,
        }
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn node_count(&self) -> usize {
        self.weights.rows()
    }

    /// Graph of off-diagonal positive entries.
    pub fn support_graph(&self) -> Graph {
        let n = self.node_count();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.weights[(i, j)] > 0.0 || self.weights[(j, i)] > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(n, edges).expect("support graph of a square matrix is valid")
    }

    /// `out[i] = Σ_j a_ij x_j` for stacked vectors, summing in increasing `j`.
    pub fn mix(&self, states: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.node_count();
        assert_eq!(states.len(), n);
        let dim = states.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                let mut v = vec![0.0; dim];
                for (j, &a) in self.weights.row(i).iter().enumerate() {
                    if a != 0.0 {
                        crate::math::axpy(a, &states[j], &mut v);
                    }
                }
                v
            })
            .collect()
    }
}

fn stochastic_deviation(m: &Matrix) -> f64 {
    m.row_sums()
        .into_iter()
        .chain(m.col_sums())
        .map(|s| abs(s - 1.0))
        .fold(0.0, f64::max)
}

fn min_positive(m: &Matrix) -> f64 {
    m.as_slice()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// Metropolis–Hastings weights: `a_ij = 1 / (1 + max(d_i, d_j))` on edges,
/// the remaining mass on the diagonal.
pub fn metropolis_weights(g: &Graph) -> MixingMatrix {
    let n = g.node_count();
    let d = g.degrees();
    let mut w = Matrix::zeros(n, n);
    for &(i, j) in g.edges() {
        let a = 1.0 / (1.0 + d[i].max(d[j]) as f64);
        w[(i, j)] = a;
        w[(j, i)] = a;
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    let eta = min_positive(&w);
    MixingMatrix { weights: w, eta }
}

/// Second largest singular value, computed as `‖A − (1/N) 1 1ᵀ‖_op`.
///
/// For a doubly stochastic `A` the all-ones direction is a singular pair
/// with value 1, so removing it leaves exactly the rest of the spectrum.
pub fn second_singular_value(a: &MixingMatrix) -> Result<f64> {
    deflated_norm(a.weights())
}

fn deflated_norm(m: &Matrix) -> Result<f64> {
    m.sub(&Matrix::averaging(m.rows())).spectral_norm()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleMode {
    /// The same matrix at every round.
    Fixed(MixingMatrix),
    /// A fresh `ER(nodes, p)` graph with Metropolis weights at every round,
    /// drawn from the stream `(seed, "graph-round", 0, k)`.
    Resample { nodes: usize, p: f64, seed: u64 },
}

/// The sequence `A(0), A(1), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSchedule {
    mode: ScheduleMode,
    interval_bound: Option<usize>,
}

impl MixingSchedule {
    pub fn fixed(matrix: MixingMatrix) -> Self {
        MixingSchedule {
            mode: ScheduleMode::Fixed(matrix),
            interval_bound: None,
        }
    }

    /// Fixed Metropolis matrix of a connected `ER(nodes, p)` draw. Draws are
    /// repeated (streams `(seed, "graph-fixed", 0, attempt)`) until the graph
    /// is connected, up to [`CONNECTED_ATTEMPTS`].
    pub fn fixed_er(nodes: usize, p: f64, seed: u64) -> Result<Self> {
        Ok(Self::fixed(metropolis_weights(&connected_er(nodes, p, seed)?)))
    }

    pub fn resample(nodes: usize, p: f64, seed: u64) -> Result<Self> {
        if nodes == 0 {
            return Err(invalid("nodes", "need at least one node"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid("p", format!("edge probability {p} is outside (0, 1]")));
        }
        Ok(MixingSchedule {
            mode: ScheduleMode::Resample { nodes, p, seed },
            interval_bound: None,
        })
    }

    pub fn with_interval_bound(mut self, bound: usize) -> Self {
        self.interval_bound = Some(bound.max(1));
        self
    }

    pub fn mode(&self) -> &ScheduleMode {
        &self.mode
    }

    pub fn interval_bound(&self) -> Option<usize> {
        self.interval_bound
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.mode, ScheduleMode::Fixed(_))
    }

    pub fn node_count(&self) -> usize {
        match &self.mode {
            ScheduleMode::Fixed(m) => m.node_count(),
            ScheduleMode::Resample { nodes, .. } => *nodes,
        }
    }

    /// `A(k)`.
    pub fn matrix(&self, k: usize) -> Cow<'_, MixingMatrix> {
        match &self.mode {
            ScheduleMode::Fixed(m) => Cow::Borrowed(m),
            ScheduleMode::Resample { nodes, p, seed } => {
                let mut rng = derive_stream(*seed, "graph-round", 0, k as u64);
                let g = generate_er_graph(*nodes, *p, &mut rng).expect("validated at construction");
                Cow::Owned(metropolis_weights(&g))
            }
        }
    }
}

/// A connected `ER(nodes, p)` draw, see [`MixingSchedule::fixed_er`].
pub fn connected_er(nodes: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid("p", format!("edge probability {p} is outside (0, 1]")));
    }
    for attempt in 0..CONNECTED_ATTEMPTS {
        let mut rng = derive_stream(seed, "graph-fixed", 0, attempt as u64);
        let g = generate_er_graph(nodes, p, &mut rng)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected {
        nodes,
        p,
        attempts: CONNECTED_ATTEMPTS,
    })
}

/// Finite-horizon view of the network assumptions.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub horizon: usize,
    /// Smallest strictly positive weight seen (the realized η).
    pub eta: f64,
    pub min_diagonal: f64,
    pub max_row_deviation: f64,
    pub max_col_deviation: f64,
    /// Window length used for the union-connectivity check.
    pub window: usize,
    pub windows_checked: usize,
    /// Whether the union graph of every window was connected.
    pub connected: bool,
    /// Rounds whose own graph was disconnected.
    pub disconnected_rounds: usize,
}

impl AssumptionReport {
    pub fn doubly_stochastic(&self) -> bool {
        self.max_row_deviation <= STOCHASTIC_TOL && self.max_col_deviation <= STOCHASTIC_TOL
    }
}

/// Checks the weight, stochasticity and connectivity assumptions over
/// `A(0..horizon)`. Uses the schedule's intercommunication bound as the
/// window length, or the whole horizon when none is set.
pub fn check_assumptions(schedule: &MixingSchedule, horizon: usize) -> AssumptionReport {
    let horizon = horizon.max(1);
    let n = schedule.node_count();
    let window = schedule.interval_bound().unwrap_or(horizon).min(horizon);

    let mut eta = f64::INFINITY;
    let mut min_diagonal = f64::INFINITY;
    let mut row_dev: f64 = 0.0;
    let mut col_dev: f64 = 0.0;
    let mut supports = Vec::with_capacity(horizon);
    let mut disconnected_rounds = 0;
    for k in 0..horizon {
        let a = schedule.matrix(k);
        let w = a.weights();
        eta = eta.min(min_positive(w));
        for i in 0..n {
            min_diagonal = min_diagonal.min(w[(i, i)]);
        }
        row_dev = w.row_sums().iter().map(|s| abs(s - 1.0)).fold(row_dev, f64::max);
        col_dev = w.col_sums().iter().map(|s| abs(s - 1.0)).fold(col_dev, f64::max);
        let g = a.support_graph();
        if !g.is_connected() {
            disconnected_rounds += 1;
        }
        supports.push(g);
    }

    let mut all_connected = true;
    let windows = horizon - window + 1;
    for start in 0..windows {
        let mut adj = vec![Vec::new(); n];
        for g in &supports[start..start + window] {
            for &(a, b) in g.edges() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        if !connected(&adj) {
            all_connected = false;
            break;
        }
    }

    AssumptionReport {
        horizon,
        eta,
        min_diagonal,
        max_row_deviation: row_dev,
        max_col_deviation: col_dev,
        window,
        windows_checked: windows,
        connected: all_connected,
        disconnected_rounds,
    }
}

/// `Φ(k, s) = A(s) A(s+1) ··· A(k)`, the identity when `k < s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionProduct {
    pub start: usize,
    pub end: usize,
    pub product: Matrix,
}

pub fn transition_product(schedule: &MixingSchedule, s: usize, k: usize) -> TransitionProduct {
    let n = schedule.node_count();
    let product = if k < s {
        Matrix::identity(n)
    } else {
        let mut p = schedule.matrix(s).weights().clone();
        for l in s + 1..=k {
            p = p.matmul(schedule.matrix(l).weights());
        }
        p
    };
    TransitionProduct {
        start: s,
        end: k,
        product,
    }
}

/// `‖Φ(k, 0) − (1/N) 1 1ᵀ‖_op` for `k` in `0..horizon`, where
/// `Φ(k, 0) = A(k) ⋯ A(0)`; entry 0 is `‖A(0) − J‖`.
pub fn consensus_decay_trace(schedule: &MixingSchedule, horizon: usize) -> Result<Vec<f64>> {
    if horizon < 2 {
        return Err(invalid("horizon", "need at least two rounds"));
    }
    let mut out = Vec::with_capacity(horizon);
    let mut phi = schedule.matrix(0).weights().clone();
    out.push(deflated_norm(&phi)?);
    for k in 1..horizon {
        phi = phi.matmul(schedule.matrix(k).weights());
        out.push(deflated_norm(&phi)?);
    }
    Ok(out)
}

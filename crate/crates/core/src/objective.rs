//! Local objective oracles and the robust phase-retrieval family
//! `f_i(x) = (1/m) Σ_j |⟨w_ij, x⟩² − y_ij|`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, invalid, Result};
use crate::linalg::top_eigenpair_psd;
use crate::math::{abs, axpy, dist, dot, norm, norm_sq, sgn, sqrt};
use crate::rng::derive_stream;

/// How many local data terms a stochastic subgradient averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch {
    /// The exact local subgradient.
    Full,
    /// Average over this many indices drawn uniformly with replacement.
    Sample(usize),
}

/// Per-agent access to a weakly convex finite-sum objective
/// `f = (1/N) Σ_i f_i`, `f_i = (1/m_i) Σ_j f_ij`.
pub trait ObjectiveOracle {
    fn dim(&self) -> usize;
    fn agents(&self) -> usize;
    /// Declared weak-convexity parameter of every `f_i`.
    fn rho(&self) -> f64;
    /// Number of data terms held by `agent`.
    fn local_len(&self, agent: usize) -> usize;
    fn local_value(&self, agent: usize, x: &[f64]) -> f64;
    /// `out += scale · ∂f_ij(x)`.
    fn add_datum_subgradient(&self, agent: usize, datum: usize, x: &[f64], scale: f64, out: &mut [f64]);

    /// `out = ∂f_i(x)`.
    fn local_subgradient(&self, agent: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let m = self.local_len(agent);
        let scale = 1.0 / m as f64;
        for j in 0..m {
            self.add_datum_subgradient(agent, j, x, scale, out);
        }
    }

    /// `out = ξ` with `E ξ = ∂f_i(x)`.
    fn stochastic_subgradient<R: Rng + ?Sized>(
        &self,
        agent: usize,
        x: &[f64],
        batch: Batch,
        rng: &mut R,
        out: &mut [f64],
    ) {
        match batch {
            Batch::Full => self.local_subgradient(agent, x, out),
            Batch::Sample(b) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let m = self.local_len(agent);
                let scale = 1.0 / b as f64;
                for _ in 0..b {
                    let j = rng.random_range(0..m);
                    self.add_datum_subgradient(agent, j, x, scale, out);
                }
            }
        }
    }

    /// `f(x) = (1/N) Σ_i f_i(x)`.
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.agents();
        (0..n).map(|i| self.local_value(i, x)).sum::<f64>() / n as f64
    }

    /// `out = (1/N) Σ_i ∂f_i(x)`.
    fn subgradient(&self, x: &[f64], out: &mut [f64]) {
        let n = self.agents();
        let mut tmp = vec![0.0; self.dim()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..n {
            self.local_subgradient(i, x, &mut tmp);
            axpy(1.0, &tmp, out);
        }
        let inv = 1.0 / n as f64;
        out.iter_mut().for_each(|o| *o *= inv);
    }
}

/// Which of `±x̃` a point is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Lower estimate of κ in `f(x) − min f ≥ κ ‖x − x̃‖ ‖x + x̃‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessEstimate {
    pub kappa_hat: f64,
    pub sample_count: usize,
    pub radius: f64,
}

/// Noiseless real Gaussian phase-retrieval data split across `agents`
/// agents with `m` measurements each.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRetrievalInstance {
    n: usize,
    agents: usize,
    m: usize,
    // agent-major, then measurement, then coordinate
    w: Vec<f64>,
    y: Vec<f64>,
    ground_truth: Vec<f64>,
    seed: u64,
    rho_hat: f64,
}

fn check_sizes(n: usize, agents: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "signal dimension must be positive"));
    }
    if agents == 0 {
        return Err(invalid("N", "agent count must be positive"));
    }
    if m == 0 {
        return Err(invalid("m", "measurements per agent must be positive"));
    }
    Ok(())
}

impl PhaseRetrievalInstance {
    /// `x̃ ~ N(0, I)`, `w_ij ~ N(0, I)`, `y_ij = ⟨w_ij, x̃⟩²`, all drawn from
    /// the stream `(seed, "instance", 0, 0)`.
    pub fn generate(n: usize, agents: usize, m: usize, seed: u64) -> Result<Self> {
        check_sizes(n, agents, m)?;
        let mut rng = derive_stream(seed, "instance", 0, 0);
        let truth: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self::measure(truth, agents, m, seed, &mut rng))
    }

    /// Gaussian measurements of a given signal, drawn from the stream
    /// `(seed, "measurements", 0, 0)`.
    pub fn from_signal(signal: Vec<f64>, agents: usize, m: usize, seed: u64) -> Result<Self> {
        check_sizes(signal.len(), agents, m)?;
        let mut rng = derive_stream(seed, "measurements", 0, 0);
        Ok(Self::measure(signal, agents, m, seed, &mut rng))
    }

    fn measure<R: Rng>(truth: Vec<f64>, agents: usize, m: usize, seed: u64, rng: &mut R) -> Self {
        let n = truth.len();
        let w: Vec<f64> = (0..agents * m * n).map(|_| rng.sample(StandardNormal)).collect();
        let y = w.chunks_exact(n).map(|wj| {
            let r = dot(wj, &truth);
            r * r
        });
        let y = y.collect();
        Self::assemble(n, agents, m, w, y, truth, seed)
    }

    fn assemble(
        n: usize,
        agents: usize,
        m: usize,
        w: Vec<f64>,
        y: Vec<f64>,
        ground_truth: Vec<f64>,
        seed: u64,
    ) -> Self {
        let max_sq = w.chunks_exact(n).map(norm_sq).fold(0.0, f64::max);
        PhaseRetrievalInstance {
            n,
            agents,
            m,
            w,
            y,
            ground_truth,
            seed,
            rho_hat: 2.0 * max_sq,
        }
    }

    /// Rebuild an instance from stored arrays (see the binary dump format).
    pub fn from_parts(
        n: usize,
        agents: usize,
        m: usize,
        w: Vec<f64>,
        y: Vec<f64>,
        ground_truth: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        check_sizes(n, agents, m)?;
        check_dim(agents * m * n, w.len())?;
        check_dim(agents * m, y.len())?;
        check_dim(n, ground_truth.len())?;
        if let Some(v) = y.iter().find(|v| !(**v >= 0.0)) {
            return Err(invalid("y", format!("observation {v} is not a nonnegative number")));
        }
        Ok(Self::assemble(n, agents, m, w, y, ground_truth, seed))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ground_truth(&self) -> &[f64] {
        &self.ground_truth
    }

    pub fn measurements(&self) -> &[f64] {
        &self.w
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub fn measurement(&self, agent: usize, j: usize) -> &[f64] {
        let start = (agent * self.m + j) * self.n;
        &self.w[start..start + self.n]
    }

    pub fn observation(&self, agent: usize, j: usize) -> f64 {
        self.y[agent * self.m + j]
    }

    fn check_point(&self, agent: usize, x: &[f64]) -> Result<()> {
        check_dim(self.n, x.len())?;
        if agent >= self.agents {
            return Err(invalid(
                "agent",
                format!("agent {agent} is outside [0, {})", self.agents),
            ));
        }
        Ok(())
    }

    /// Checked `f_i(x)`.
    pub fn value(&self, agent: usize, x: &[f64]) -> Result<f64> {
        self.check_point(agent, x)?;
        Ok(self.local_value(agent, x))
    }

    /// Checked `∂f_i(x)` with the `sgn(0) = 0` selection.
    pub fn subgradient(&self, agent: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(agent, x)?;
        let mut g = vec![0.0; self.n];
        self.local_subgradient(agent, x, &mut g);
        Ok(g)
    }

    /// Checked mini-batch subgradient of agent `agent`.
    pub fn sampled_subgradient<R: Rng + ?Sized>(
        &self,
        agent: usize,
        x: &[f64],
        batch: Batch,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        self.check_point(agent, x)?;
        if let Batch::Sample(b) = batch {
            if b == 0 || b > self.m {
                return Err(invalid("batch", format!("batch size {b} is outside [1, {}]", self.m)));
            }
        }
        let mut g = vec![0.0; self.n];
        self.stochastic_subgradient(agent, x, batch, rng, &mut g);
        Ok(g)
    }

    /// `x₀ = r v` with `r² = mean(y)` and `v` the unit top eigenvector of
    /// `(1/(Nm)) Σ y_ij w_ij w_ijᵀ`, signed so its first nonzero coordinate
    /// is positive.
    pub fn spectral_initialization(&self) -> Result<Vec<f64>> {
        let total = (self.agents * self.m) as f64;
        let r = sqrt(self.y.iter().sum::<f64>() / total);
        if r == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let (_, mut v) = top_eigenpair_psd(
            self.n,
            |v, out| {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (wj, yj) in self.w.chunks_exact(self.n).zip(&self.y) {
                    axpy(yj * dot(wj, v) / total, wj, out);
                }
            },
            1e-13,
            crate::linalg::POWER_BUDGET,
        )?;
        if let Some(first) = v.iter().copied().find(|c| *c != 0.0) {
            if first < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        v.iter_mut().for_each(|c| *c *= r);
        Ok(v)
    }

    /// `min(‖x − x̃‖, ‖x + x̃‖)` and the sign attaining it, ties to `+`.
    pub fn signed_distance(&self, x: &[f64]) -> Result<(f64, Sign)> {
        check_dim(self.n, x.len())?;
        let plus = dist(x, &self.ground_truth);
        let minus = sqrt(
            x.iter()
                .zip(&self.ground_truth)
                .map(|(a, b)| (a + b) * (a + b))
                .sum(),
        );
        Ok(if plus <= minus {
            (plus, Sign::Plus)
        } else {
            (minus, Sign::Minus)
        })
    }

    /// `x* = sign · x̃`.
    pub fn signed_truth(&self, sign: Sign) -> Vec<f64> {
        self.ground_truth.iter().map(|v| v * sign.factor()).collect()
    }

    /// Minimum of `f(x) / (‖x − x̃‖ ‖x + x̃‖)` over probes drawn uniformly on
    /// the spheres of the given radius around `+x̃` (even probes) and `−x̃`
    /// (odd probes). Probes landing exactly on `±x̃` are skipped.
    pub fn estimate_sharpness<R: Rng + ?Sized>(
        &self,
        probe_count: usize,
        radius: f64,
        rng: &mut R,
    ) -> Result<SharpnessEstimate> {
        if probe_count == 0 {
            return Err(invalid("probe_count", "need at least one probe"));
        }
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("radius {radius} must be positive")));
        }
        let mut kappa = f64::INFINITY;
        let mut used = 0;
        let mut x = vec![0.0; self.n];
        for p in 0..probe_count {
            let mut u: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
            let nu = norm(&u);
            if nu == 0.0 {
                continue;
            }
            u.iter_mut().for_each(|c| *c *= radius / nu);
            let center = if p % 2 == 0 { 1.0 } else { -1.0 };
            for ((xi, ti), ui) in x.iter_mut().zip(&self.ground_truth).zip(&u) {
                *xi = center * ti + ui;
            }
            let minus = dist(&x, &self.ground_truth);
            let plus = sqrt(
                x.iter()
                    .zip(&self.ground_truth)
                    .map(|(a, b)| (a + b) * (a + b))
                    .sum(),
            );
            let denom = minus * plus;
            if denom == 0.0 {
                continue;
            }
            kappa = kappa.min(self.value_global(&x) / denom);
            used += 1;
        }
        Ok(SharpnessEstimate {
            kappa_hat: if used == 0 { 0.0 } else { kappa },
            sample_count: used,
            radius,
        })
    }

    fn value_global(&self, x: &[f64]) -> f64 {
        ObjectiveOracle::value(self, x)
    }

    /// `ρ̂ = 2 max ‖w_ij‖²` and `L̂ = max_x max_i ‖∂f_i(x)‖` over `points`.
    pub fn estimate_rho_and_l(&self, points: &[Vec<f64>]) -> Result<(f64, f64)> {
        let mut l_hat: f64 = 0.0;
        let mut g = vec![0.0; self.n];
        for x in points {
            check_dim(self.n, x.len())?;
            for i in 0..self.agents {
                self.local_subgradient(i, x, &mut g);
                l_hat = l_hat.max(norm(&g));
            }
        }
        Ok((self.rho_hat, l_hat))
    }
}

impl ObjectiveOracle for PhaseRetrievalInstance {
    fn dim(&self) -> usize {
        self.n
    }

    fn agents(&self) -> usize {
        self.agents
    }

    /// `2 max ‖w_ij‖²`: each term's concave part `−⟨w, x⟩²` has Hessian
    /// `−2 w wᵀ`.
    fn rho(&self) -> f64 {
        self.rho_hat
    }

    fn local_len(&self, _agent: usize) -> usize {
        self.m
    }

    fn local_value(&self, agent: usize, x: &[f64]) -> f64 {
        let sum: f64 = (0..self.m)
            .map(|j| {
                let r = dot(self.measurement(agent, j), x);
                abs(r * r - self.observation(agent, j))
            })
            .sum();
        sum / self.m as f64
    }

    fn add_datum_subgradient(&self, agent: usize, datum: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let w = self.measurement(agent, datum);
        let r = dot(w, x);
        let coef = sgn(r * r - self.observation(agent, datum)) * 2.0 * r;
        if coef != 0.0 {
            axpy(scale * coef, w, out);
        }
    }
}

/// Small closed-form objectives for exercising the geometry and the
/// theory checks.
pub mod test_functions {
    use super::ObjectiveOracle;
    use crate::math::{abs, dot, sgn};

    /// `f(y) = |y² − 1|` on the real line, 2-weakly convex.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct AbsQuadratic1D;

    impl ObjectiveOracle for AbsQuadratic1D {
        fn dim(&self) -> usize {
            1
        }
        fn agents(&self) -> usize {
            1
        }
        fn rho(&self) -> f64 {
            2.0
        }
        fn local_len(&self, _: usize) -> usize {
            1
        }
        fn local_value(&self, _: usize, x: &[f64]) -> f64 {
            abs(x[0] * x[0] - 1.0)
        }
        fn add_datum_subgradient(&self, _: usize, _: usize, x: &[f64], scale: f64, out: &mut [f64]) {
            out[0] += scale * sgn(x[0] * x[0] - 1.0) * 2.0 * x[0];
        }
    }

    /// `f(y) = ‖y‖² / 2`, convex.
    #[derive(Debug, Clone, Copy)]
    pub struct HalfSquaredNorm {
        pub dim: usize,
    }

    impl ObjectiveOracle for HalfSquaredNorm {
        fn dim(&self) -> usize {
            self.dim
        }
        fn agents(&self) -> usize {
            1
        }
        fn rho(&self) -> f64 {
            0.0
        }
        fn local_len(&self, _: usize) -> usize {
            1
        }
        fn local_value(&self, _: usize, x: &[f64]) -> f64 {
            0.5 * dot(x, x)
        }
        fn add_datum_subgradient(&self, _: usize, _: usize, x: &[f64], scale: f64, out: &mut [f64]) {
            crate::math::axpy(scale, x, out);
        }
    }

    /// `f ≡ 0`.
    #[derive(Debug, Clone, Copy)]
    pub struct Zero {
        pub dim: usize,
    }

    impl ObjectiveOracle for Zero {
        fn dim(&self) -> usize {
            self.dim
        }
        fn agents(&self) -> usize {
            1
        }
        fn rho(&self) -> f64 {
            0.0
        }
        fn local_len(&self, _: usize) -> usize {
            1
        }
        fn local_value(&self, _: usize, _: &[f64]) -> f64 {
            0.0
        }
        fn add_datum_subgradient(&self, _: usize, _: usize, _: &[f64], _: f64, _: &mut [f64]) {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(w: f64, y: f64) -> PhaseRetrievalInstance {
        PhaseRetrievalInstance::from_parts(1, 1, 1, vec![w], vec![y], vec![1.0], 0).unwrap()
    }

    #[test]
    fn scalar_instance_identity() {
        let inst = PhaseRetrievalInstance::generate(1, 1, 1, 3).unwrap();
        let w = inst.measurement(0, 0)[0];
        let t = inst.ground_truth()[0];
        assert_eq!(inst.observation(0, 0), (w * t) * (w * t));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = PhaseRetrievalInstance::generate(5, 3, 4, 11).unwrap();
        let b = PhaseRetrievalInstance::generate(5, 3, 4, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, PhaseRetrievalInstance::generate(5, 3, 4, 12).unwrap());
    }

    #[test]
    fn large_instance_meets_sampling_rule() {
        let inst = PhaseRetrievalInstance::generate(100, 10, 1000, 1).unwrap();
        assert_eq!(inst.observations().len(), 10_000);
        assert!(inst.observations().len() >= 3 * inst.n());
    }

    #[test]
    fn value_and_subgradient_scalar_hand_values() {
        let inst = scalar(1.0, 1.0);
        assert_eq!(inst.value(0, &[2.0]).unwrap(), 3.0);
        assert_eq!(inst.subgradient(0, &[2.0]).unwrap(), vec![4.0]);
        // central difference at x = 2
        let h = 1e-6;
        let fd = (inst.value(0, &[2.0 + h]).unwrap() - inst.value(0, &[2.0 - h]).unwrap()) / (2.0 * h);
        assert!((fd - 4.0).abs() / 4.0 < 1e-5);
    }

    #[test]
    fn zero_at_both_signs_of_the_truth() {
        let inst = PhaseRetrievalInstance::generate(8, 3, 10, 2).unwrap();
        let t = inst.ground_truth().to_vec();
        let neg: Vec<f64> = t.iter().map(|v| -v).collect();
        for i in 0..3 {
            assert_eq!(inst.value(i, &t).unwrap(), 0.0);
            assert_eq!(inst.value(i, &neg).unwrap(), 0.0);
            assert!(inst.subgradient(i, &t).unwrap().iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn dimension_and_agent_errors() {
        let inst = PhaseRetrievalInstance::generate(3, 2, 2, 0).unwrap();
        assert!(inst.value(0, &[1.0, 2.0]).is_err());
        assert!(inst.subgradient(2, &[1.0, 2.0, 3.0]).is_err());
        assert!(inst.signed_distance(&[0.0]).is_err());
        let mut rng = derive_stream(0, "t", 0, 0);
        assert!(inst.sampled_subgradient(0, &[0.0; 3], Batch::Sample(3), &mut rng).is_err());
        assert!(PhaseRetrievalInstance::generate(0, 1, 1, 0).is_err());
    }

    #[test]
    fn single_datum_batch_matches_full() {
        let inst = PhaseRetrievalInstance::generate(4, 2, 1, 9).unwrap();
        let x = [0.3, -1.0, 2.0, 0.5];
        let mut rng = derive_stream(1, "batch", 0, 0);
        for i in 0..2 {
            let s = inst.sampled_subgradient(i, &x, Batch::Sample(1), &mut rng).unwrap();
            assert_eq!(s, inst.subgradient(i, &x).unwrap());
        }
    }

    #[test]
    fn stochastic_replay_is_identical() {
        let inst = PhaseRetrievalInstance::generate(4, 2, 20, 9).unwrap();
        let x = [0.3, -1.0, 2.0, 0.5];
        let a = inst
            .sampled_subgradient(1, &x, Batch::Sample(5), &mut derive_stream(3, "batch", 1, 7))
            .unwrap();
        let b = inst
            .sampled_subgradient(1, &x, Batch::Sample(5), &mut derive_stream(3, "batch", 1, 7))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectral_init_scalar_and_degenerate() {
        let inst = scalar(1.0, 4.0);
        assert_eq!(inst.spectral_initialization().unwrap(), vec![2.0]);
        let zero = PhaseRetrievalInstance::from_signal(vec![0.0; 5], 2, 3, 1).unwrap();
        assert_eq!(zero.spectral_initialization().unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn spectral_init_first_nonzero_coordinate_positive() {
        let inst = PhaseRetrievalInstance::generate(10, 3, 20, 4).unwrap();
        let x0 = inst.spectral_initialization().unwrap();
        assert!(x0.iter().copied().find(|v| *v != 0.0).unwrap() > 0.0);
        let r = sqrt(inst.observations().iter().sum::<f64>() / 60.0);
        assert!((norm(&x0) - r).abs() < 1e-12 * r);
    }

    #[test]
    fn signed_distance_cases() {
        let inst = PhaseRetrievalInstance::generate(4, 1, 3, 5).unwrap();
        let t = inst.ground_truth().to_vec();
        let neg: Vec<f64> = t.iter().map(|v| -v).collect();
        assert_eq!(inst.signed_distance(&t).unwrap(), (0.0, Sign::Plus));
        assert_eq!(inst.signed_distance(&neg).unwrap(), (0.0, Sign::Minus));
        let (d, s) = inst.signed_distance(&[0.0; 4]).unwrap();
        assert_eq!(s, Sign::Plus);
        assert!((d - norm(&t)).abs() < 1e-15);
    }

    #[test]
    fn sharpness_along_the_truth_direction() {
        let inst = PhaseRetrievalInstance::generate(6, 2, 15, 8).unwrap();
        let t = inst.ground_truth().to_vec();
        let nt = norm(&t);
        let tau = 0.05;
        let x: Vec<f64> = t.iter().map(|v| (1.0 + tau) * v).collect();
        let ratio = ObjectiveOracle::value(&inst, &x) / ((tau * nt) * ((2.0 + tau) * nt));
        assert!(ratio.is_finite() && ratio > 0.0);

        let est = inst
            .estimate_sharpness(50, 0.1 * nt, &mut derive_stream(0, "sharp", 0, 0))
            .unwrap();
        assert_eq!(est.sample_count, 50);
        assert!(est.kappa_hat > 0.0);
        assert!(inst.estimate_sharpness(0, 1.0, &mut derive_stream(0, "s", 0, 0)).is_err());
        assert!(inst.estimate_sharpness(3, 0.0, &mut derive_stream(0, "s", 0, 0)).is_err());
    }

    #[test]
    fn rho_and_l_estimates() {
        let inst = scalar(1.0, 1.0);
        let (rho, l) = inst.estimate_rho_and_l(&[]).unwrap();
        assert_eq!((rho, l), (2.0, 0.0));
        let (_, l) = inst.estimate_rho_and_l(&[vec![2.0]]).unwrap();
        assert_eq!(l, 4.0);
    }
}

//! DPSM / stoDPSM rounds, the centralized baselines and the experiment loop.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::{ConstraintSpec, Method, NetworkMode, RunConfig};
use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{prox, FeasibleSet};
use crate::math::{axpy, dist_sq, exp, ln, norm, sqrt};
use crate::network::{consensus_decay_trace, second_singular_value, MixingMatrix, MixingSchedule};
use crate::objective::{Batch, ObjectiveOracle, PhaseRetrievalInstance, Sign};
use crate::rng::{derive_stream, RngStream};
use crate::stepsize::StepsizePolicy;
use crate::theory_checks::fit_phi_decay;

/// Iterate norm beyond which a run is declared diverged.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// `x_{1,k}, …, x_{N,k}` and the round counter `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentStates {
    iterates: Vec<Vec<f64>>,
    k: usize,
}

impl AgentStates {
    pub fn new(iterates: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = iterates.first() else {
            return Err(invalid("iterates", "need at least one agent"));
        };
        let n = first.len();
        for x in &iterates {
            check_dim(n, x.len())?;
        }
        Ok(AgentStates { iterates, k: 0 })
    }

    /// Every agent starts at `x`.
    pub fn replicated(x: &[f64], agents: usize) -> Result<Self> {
        Self::new(vec![x.to_vec(); agents])
    }

    pub fn iterates(&self) -> &[Vec<f64>] {
        &self.iterates
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn agents(&self) -> usize {
        self.iterates.len()
    }

    pub fn dim(&self) -> usize {
        self.iterates[0].len()
    }

    /// `x̄_k`, summed in agent order. Exact when all agents agree.
    pub fn mean(&self) -> Vec<f64> {
        let first = &self.iterates[0];
        if self.iterates[1..].iter().all(|x| x == first) {
            return first.clone();
        }
        let mut m = vec![0.0; self.dim()];
        for x in &self.iterates {
            axpy(1.0, x, &mut m);
        }
        let n = self.agents() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// `‖Δ_k‖ = (Σ_i ‖x_{i,k} − x̄_k‖²)^{1/2}`.
    pub fn consensus_error(&self) -> f64 {
        let mean = self.mean();
        sqrt(self.iterates.iter().map(|x| dist_sq(x, &mean)).sum())
    }

    /// `(1/N) Σ_i ‖x_{i,k} − x*‖²`.
    pub fn mean_sq_distance(&self, x_star: &[f64]) -> f64 {
        self.iterates.iter().map(|x| dist_sq(x, x_star)).sum::<f64>() / self.agents() as f64
    }

    fn healthy(&self) -> bool {
        self.iterates
            .iter()
            .all(|x| x.iter().all(|v| v.is_finite()) && norm(x) <= DIVERGENCE_NORM)
    }
}

/// Runs `f` once per agent, in parallel under the `parallel` feature.
/// Results come back in agent order either way.
fn map_agents<T, F>(items: Vec<T>, f: F) -> Vec<Vec<f64>>
where
    T: Send,
    F: Fn(usize, T) -> Vec<f64> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

fn check_round<O: ObjectiveOracle + ?Sized>(
    states: &AgentStates,
    a: &MixingMatrix,
    oracle: &O,
    set: &FeasibleSet,
) -> Result<()> {
    check_dim(oracle.agents(), states.agents())?;
    check_dim(a.node_count(), states.agents())?;
    check_dim(oracle.dim(), states.dim())?;
    set.check_dim(states.dim())
}

fn step_and_project(mut v: Vec<f64>, alpha: f64, g: &[f64], set: &FeasibleSet) -> Vec<f64> {
    axpy(-alpha, g, &mut v);
    set.project_into(&mut v);
    v
}

fn dpsm_step<O: ObjectiveOracle + Sync + ?Sized>(
    states: &AgentStates,
    a: &MixingMatrix,
    oracle: &O,
    set: &FeasibleSet,
    alpha: f64,
) -> AgentStates {
    let n = states.dim();
    let v = a.mix(&states.iterates);
    let iterates = map_agents(v, |i, v| {
        let mut g = vec![0.0; n];
        oracle.local_subgradient(i, &v, &mut g);
        step_and_project(v, alpha, &g, set)
    });
    AgentStates {
        iterates,
        k: states.k + 1,
    }
}

fn stodpsm_step<O: ObjectiveOracle + Sync + ?Sized>(
    states: &AgentStates,
    a: &MixingMatrix,
    oracle: &O,
    set: &FeasibleSet,
    alpha: f64,
    batch: Batch,
    streams: &mut [RngStream],
) -> AgentStates {
    let n = states.dim();
    let v = a.mix(&states.iterates);
    let items: Vec<_> = v.into_iter().zip(streams.iter_mut()).collect();
    let iterates = map_agents(items, |i, (v, stream)| {
        let mut g = vec![0.0; n];
        oracle.stochastic_subgradient(i, &v, batch, stream, &mut g);
        step_and_project(v, alpha, &g, set)
    });
    AgentStates {
        iterates,
        k: states.k + 1,
    }
}

/// One DPSM round: `v_i = Σ_j a_ij(k) x_j`, `x_i ← Proj(v_i − α_k ∂f_i(v_i))`.
pub fn dpsm_round<O: ObjectiveOracle + Sync + ?Sized>(
    states: &AgentStates,
    schedule: &MixingSchedule,
    oracle: &O,
    set: &FeasibleSet,
    policy: &StepsizePolicy,
) -> Result<AgentStates> {
    let a = schedule.matrix(states.k);
    check_round(states, &a, oracle, set)?;
    Ok(dpsm_step(states, &a, oracle, set, policy.alpha(states.k)))
}

/// One stoDPSM round; agent `i` draws its mini-batch from `streams[i]`.
pub fn stodpsm_round<O: ObjectiveOracle + Sync + ?Sized>(
    states: &AgentStates,
    schedule: &MixingSchedule,
    oracle: &O,
    set: &FeasibleSet,
    policy: &StepsizePolicy,
    batch: Batch,
    streams: &mut [RngStream],
) -> Result<AgentStates> {
    let a = schedule.matrix(states.k);
    check_round(states, &a, oracle, set)?;
    check_dim(states.agents(), streams.len())?;
    Ok(stodpsm_step(states, &a, oracle, set, policy.alpha(states.k), batch, streams))
}

/// `x' = Proj(x − α_k g)` with `g` the full subgradient of `f`, or, for
/// `Batch::Sample(b)`, the average of `b` data subgradients drawn uniformly
/// from all `Σ m_i` terms (agent first, then datum). A batch covering every
/// datum is taken as the deterministic method.
pub fn centralized_round<O: ObjectiveOracle + ?Sized, R: Rng + ?Sized>(
    x: &[f64],
    k: usize,
    oracle: &O,
    set: &FeasibleSet,
    policy: &StepsizePolicy,
    batch: Batch,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = oracle.dim();
    check_dim(n, x.len())?;
    set.check_dim(n)?;
    let agents = oracle.agents();
    let total: usize = (0..agents).map(|i| oracle.local_len(i)).sum();
    let mut g = vec![0.0; n];
    match batch {
        Batch::Sample(b) if b < total => {
            if b == 0 {
                return Err(invalid("batch", "batch size must be positive"));
            }
            let scale = 1.0 / b as f64;
            for _ in 0..b {
                let i = rng.random_range(0..agents);
                let j = rng.random_range(0..oracle.local_len(i));
                oracle.add_datum_subgradient(i, j, x, scale, &mut g);
            }
        }
        _ => oracle.subgradient(x, &mut g),
    }
    Ok(step_and_project(x.to_vec(), policy.alpha(k), &g, set))
}

/// Build the feasible set of a configuration in dimension `n`.
pub fn feasible_set(spec: &ConstraintSpec, n: usize) -> Result<FeasibleSet> {
    match *spec {
        ConstraintSpec::WholeSpace => Ok(FeasibleSet::WholeSpace),
        ConstraintSpec::Ball { radius } => FeasibleSet::ball(vec![0.0; n], radius),
        ConstraintSpec::Box { lower, upper } => FeasibleSet::boxed(vec![lower; n], vec![upper; n]),
    }
}

/// Build the mixing schedule of a configuration for `agents` nodes.
pub fn build_schedule(config: &RunConfig, agents: usize) -> Result<MixingSchedule> {
    let net = &config.network;
    let s = match net.mode {
        NetworkMode::Fixed => MixingSchedule::fixed_er(agents, net.p, net.seed)?,
        NetworkMode::Resample => MixingSchedule::resample(agents, net.p, net.seed)?,
    };
    Ok(match net.interval_bound {
        Some(b) => s.with_interval_bound(b),
        None => s,
    })
}

/// One sampled row of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub k: usize,
    /// `α_k`, the step taken out of iterate `k`.
    pub alpha: f64,
    pub mean_sq_dist: f64,
    pub consensus: f64,
    /// `f(x̄_k)`.
    pub objective: f64,
    /// `σ₂(A(k))`, resampled schedules only.
    pub sigma2: Option<f64>,
    /// `‖∇φ_t(x̄_k)‖`, on envelope-stride rounds only.
    pub env_grad: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Ran the full iteration budget.
    Completed,
    /// Mean squared distance fell below the stop tolerance.
    Converged,
    /// An iterate left the divergence guard; the last row is diagnostic.
    Diverged,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Converged => "converged",
            RunStatus::Diverged => "diverged",
        }
    }
}

/// Scalars describing the problem and the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHeader {
    pub n: usize,
    pub agents: usize,
    pub m: usize,
    pub seed: u64,
    pub network_seed: u64,
    pub method: Method,
    pub rho_hat: f64,
    /// Largest local subgradient norm seen at the sampled points.
    pub l_hat: f64,
    pub kappa_hat: f64,
    /// `κ̂ ‖x̃‖`.
    pub beta_hat: f64,
    /// Moreau parameter.
    pub t: f64,
    pub sign: Sign,
    pub truth_norm: f64,
    /// `σ₂(A)` for fixed schedules.
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub header: RunHeader,
    pub rows: Vec<MetricRow>,
    pub status: RunStatus,
    pub initial_point: Vec<f64>,
    /// Frozen `x* = sign · x̃`.
    pub x_star: Vec<f64>,
    pub final_mean: Vec<f64>,
}

impl RunRecord {
    pub fn last_row(&self) -> &MetricRow {
        self.rows.last().expect("a record always holds the k = 0 row")
    }

    /// `√(mean_sq_dist) / ‖x̃‖` of the last row.
    pub fn final_relative_distance(&self) -> f64 {
        sqrt(self.last_row().mean_sq_dist) / self.header.truth_norm
    }
}

enum Engine {
    Decentralized {
        schedule: MixingSchedule,
        states: AgentStates,
    },
    Centralized {
        x: Vec<f64>,
        k: usize,
    },
}

impl Engine {
    fn k(&self) -> usize {
        match self {
            Engine::Decentralized { states, .. } => states.k(),
            Engine::Centralized { k, .. } => *k,
        }
    }

    fn states(&self, agents: usize) -> AgentStates {
        match self {
            Engine::Decentralized { states, .. } => states.clone(),
            Engine::Centralized { x, k } => AgentStates {
                iterates: vec![x.clone(); agents],
                k: *k,
            },
        }
    }
}

/// Run the configured method on `instance`.
///
/// All agents start from `init` (default: the spectral initialization),
/// projected onto the feasible set. `x*` is fixed from the sign closest to
/// the start. Rows are sampled at `k = 0`, every `metric_stride` rounds and
/// at the final round. A non-finite or exploding iterate stops the run with
/// status [`RunStatus::Diverged`] after a diagnostic row.
pub fn run(config: &RunConfig, instance: &PhaseRetrievalInstance, init: Option<&[f64]>) -> Result<RunRecord> {
    config.validate()?;
    let agents = instance.agents();
    let n = instance.n();
    if config.problem.agents != agents {
        return Err(invalid(
            "problem.N",
            format!("config says {} but the instance has {agents} agents", config.problem.agents),
        ));
    }
    if config.problem.m != instance.m() {
        return Err(invalid(
            "problem.m",
            format!("config says {} but the instance has m = {}", config.problem.m, instance.m()),
        ));
    }
    let set = feasible_set(&config.constraint, n)?;
    let policy = config.policy();
    let control = &config.control;
    let method = config.method.method;
    let seed = config.problem.seed;

    let mut x0 = match init {
        Some(x) => {
            check_dim(n, x.len())?;
            x.to_vec()
        }
        None => instance.spectral_initialization()?,
    };
    set.project_into(&mut x0);
    let (_, sign) = instance.signed_distance(&x0)?;
    let x_star = instance.signed_truth(sign);
    let truth_norm = norm(instance.ground_truth());

    let rho_hat = instance.rho();
    let t = control.t_factor / rho_hat;
    let kappa = instance.estimate_sharpness(
        control.sharpness_probes,
        control.sharpness_radius * truth_norm,
        &mut derive_stream(seed, "sharpness", 0, 0),
    )?;

    let mut engine = if method.is_centralized() {
        Engine::Centralized { x: x0.clone(), k: 0 }
    } else {
        Engine::Decentralized {
            schedule: build_schedule(config, agents)?,
            states: AgentStates::replicated(&x0, agents)?,
        }
    };
    let sigma2_fixed = match &engine {
        Engine::Decentralized { schedule, .. } if schedule.is_fixed() => {
            Some(second_singular_value(&schedule.matrix(0))?)
        }
        _ => None,
    };

    let mut l_hat: f64 = 0.0;
    let mut local_g = vec![0.0; n];
    let mut rows = Vec::new();
    let mut sample = |engine: &Engine, a: Option<&MixingMatrix>, l_hat: &mut f64| -> Result<MetricRow> {
        let k = engine.k();
        let states = engine.states(agents);
        let mean = states.mean();
        for i in 0..agents {
            instance.local_subgradient(i, &mean, &mut local_g);
            *l_hat = l_hat.max(norm(&local_g));
        }
        let sigma2 = match (a, sigma2_fixed) {
            (Some(a), None) => Some(second_singular_value(a).unwrap_or(f64::NAN)),
            _ => None,
        };
        let env_grad = if control.envelope_stride > 0 && k.is_multiple_of(control.envelope_stride) && states.healthy() {
            Some(prox(instance, &set, &mean, t, control.inner_budget)?.gradient_norm())
        } else {
            None
        };
        Ok(MetricRow {
            k,
            alpha: policy.alpha(k),
            mean_sq_dist: states.mean_sq_distance(&x_star),
            consensus: states.consensus_error(),
            objective: ObjectiveOracle::value(instance, &mean),
            sigma2,
            env_grad,
        })
    };

    let current_matrix = |engine: &Engine| match engine {
        Engine::Decentralized { schedule, states } => Some(schedule.matrix(states.k()).into_owned()),
        Engine::Centralized { .. } => None,
    };

    let mut a_k = current_matrix(&engine);
    let first = sample(&engine, a_k.as_ref(), &mut l_hat)?;
    let mut status = RunStatus::Completed;
    let below = |row: &MetricRow| control.stop_tol > 0.0 && row.mean_sq_dist < control.stop_tol;
    if below(&first) {
        status = RunStatus::Converged;
    }
    rows.push(first);

    if status != RunStatus::Converged {
        for k in 0..control.max_iterations {
            let alpha = policy.alpha(k);
            engine = match engine {
                Engine::Decentralized { schedule, states } => {
                    let a = a_k.as_ref().expect("decentralized engines carry a matrix");
                    let next = match method {
                        Method::StoDpsm => {
                            let mut streams: Vec<RngStream> = (0..agents)
                                .map(|i| derive_stream(seed, "batch", i as u64, k as u64))
                                .collect();
                            stodpsm_step(&states, a, instance, &set, alpha, config.method.batch, &mut streams)
                        }
                        _ => dpsm_step(&states, a, instance, &set, alpha),
                    };
                    Engine::Decentralized { schedule, states: next }
                }
                Engine::Centralized { x, k } => {
                    let batch = match method {
                        Method::StoCSub => config.method.batch,
                        _ => Batch::Full,
                    };
                    let mut rng = derive_stream(seed, "batch-central", 0, k as u64);
                    let x = centralized_round(&x, k, instance, &set, &policy, batch, &mut rng)?;
                    Engine::Centralized { x, k: k + 1 }
                }
            };
            a_k = current_matrix(&engine);
            let kk = k + 1;
            if !engine.states(agents).healthy() {
                let row = sample(&engine, a_k.as_ref(), &mut l_hat)?;
                rows.push(row);
                status = RunStatus::Diverged;
                break;
            }
            let last = kk == control.max_iterations;
            if kk % control.metric_stride == 0 || last {
                let row = sample(&engine, a_k.as_ref(), &mut l_hat)?;
                let stop = below(&row);
                rows.push(row);
                if stop {
                    status = RunStatus::Converged;
                    break;
                }
            } else if control.stop_tol > 0.0 && engine.states(agents).mean_sq_distance(&x_star) < control.stop_tol {
                let row = sample(&engine, a_k.as_ref(), &mut l_hat)?;
                rows.push(row);
                status = RunStatus::Converged;
                break;
            }
        }
    }

    let final_mean = engine.states(agents).mean();
    Ok(RunRecord {
        header: RunHeader {
            n,
            agents,
            m: instance.m(),
            seed,
            network_seed: config.network.seed,
            method,
            rho_hat,
            l_hat,
            kappa_hat: kappa.kappa_hat,
            beta_hat: kappa.kappa_hat * truth_norm,
            t,
            sign,
            truth_norm,
            sigma2: sigma2_fixed,
        },
        rows,
        status,
        initial_point: x0,
        x_star,
        final_mean,
    })
}

/// Least-squares fit of `log(mean_sq_dist)` against `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// `exp(slope / 2)`, an estimate of the per-round contraction of the
    /// distance.
    pub rate_hat: f64,
    pub r_squared: f64,
    pub rows_used: usize,
    /// A distance of exactly zero was reached; `rate_hat` is then 0.
    pub hit_zero: bool,
}

/// Fit the linear rate over rows with `k ≥ burn_in`.
pub fn fit_linear_rate(rows: &[MetricRow], burn_in: usize) -> Result<RateFit> {
    let tail: Vec<&MetricRow> = rows
        .iter()
        .filter(|r| r.k >= burn_in && r.mean_sq_dist.is_finite())
        .collect();
    if tail.iter().any(|r| r.mean_sq_dist == 0.0) {
        return Ok(RateFit {
            rate_hat: 0.0,
            r_squared: f64::NAN,
            rows_used: tail.len(),
            hit_zero: true,
        });
    }
    if tail.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "need at least 10 rows after burn-in {burn_in}, have {}",
            tail.len()
        )));
    }
    let xs: Vec<f64> = tail.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|r| ln(r.mean_sq_dist)).collect();
    let (_, slope, r2) = crate::math::linear_fit(&xs, &ys)
        .ok_or_else(|| Error::InsufficientData("rows share a single k".into()))?;
    Ok(RateFit {
        rate_hat: exp(slope / 2.0),
        r_squared: r2,
        rows_used: tail.len(),
        hit_zero: false,
    })
}

/// Problem-side constants entering the geometric-stepsize assumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemEstimates {
    pub rho: f64,
    /// Subgradient bound `L`.
    pub l: f64,
    /// Sharpness constant `β`.
    pub beta: f64,
}

/// Theory-side constants for the geometric stepsize at a given start.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConstants {
    /// `σ₂(A)` of the fixed schedule.
    pub lambda: f64,
    /// Prefactor from the fit of the consensus decay trace.
    pub c: f64,
    /// Decay ratio from the same fit, for comparison with `lambda`.
    pub lambda_fit: f64,
    pub beta: f64,
    /// Sharpness radius `B = 2β/ρ`.
    pub b_sharp: f64,
    pub rho: f64,
    pub l: f64,
    pub e0: f64,
    pub a: f64,
    pub q: f64,
    pub gamma_big: f64,
    pub lambda_big: f64,
    /// `‖Δ₀‖`.
    pub delta0: f64,
    /// Largest admissible `μ₀`; not positive when `q ≤ 0`.
    pub mu0_max: f64,
    /// `Σ ‖x_{i,0} − x*‖² ≤ (N/Γ²) min{(2β/ρ)², B²}`.
    pub init_sum_ok: bool,
    /// `‖x_{i,0} − x*‖² ≤ (Γ²/N) Σ ‖x_{j,0} − x*‖²` for every `i`.
    pub init_individual_ok: bool,
    /// `‖Δ₀‖ < (2βe₀/Γ − ρe₀²) λ / (2(L+β)c)`, or `Δ₀ = 0`.
    pub init_consensus_ok: bool,
    /// `q ≤ 0`: the constants are vacuous at this initialization.
    pub vacuous: bool,
    /// `β ≤ L` fails, contradicting the analysis.
    pub beta_exceeds_l: bool,
}

/// Horizon of the decay trace fitted for `c`.
const DECAY_HORIZON: usize = 60;

/// Evaluate the geometric-stepsize constants for a fixed schedule.
pub fn compute_rate_constants(
    schedule: &MixingSchedule,
    states: &AgentStates,
    x_star: &[f64],
    gamma_big: f64,
    lambda_big: f64,
    est: ProblemEstimates,
) -> Result<RateConstants> {
    if !schedule.is_fixed() {
        return Err(invalid("schedule", "rate constants need a fixed schedule"));
    }
    check_dim(states.dim(), x_star.len())?;
    let lambda = second_singular_value(&schedule.matrix(0))?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", format!("sigma_2 = {lambda} is outside (0, 1)")));
    }
    if !(gamma_big >= core::f64::consts::SQRT_2) {
        return Err(invalid("Gamma", format!("{gamma_big} is below sqrt(2)")));
    }
    if !(lambda_big > lambda && lambda_big < 1.0) {
        return Err(invalid("Lambda", format!("{lambda_big} is outside (lambda, 1) with lambda = {lambda}")));
    }
    if !(est.rho > 0.0 && est.l > 0.0 && est.beta > 0.0) {
        return Err(invalid("estimates", "rho, L and beta must be positive"));
    }

    let trace = consensus_decay_trace(schedule, DECAY_HORIZON)?;
    let fit = fit_phi_decay(&trace)?;
    let c = fit.c_hat;

    let agents = states.agents() as f64;
    let ProblemEstimates { rho, l, beta } = est;
    let b_sharp = 2.0 * beta / rho;
    let sum_sq: f64 = states.iterates().iter().map(|x| dist_sq(x, x_star)).sum();
    let delta0 = states.consensus_error();

    let e0 = (beta / (rho * gamma_big)).max(sqrt(sum_sq / agents)).min(b_sharp / gamma_big);
    let a = 2.0 * (l + beta) * l / (lambda * lambda);
    let q = 2.0 * beta / gamma_big * e0 - rho * e0 * e0 - 2.0 * (l + beta) * c / (sqrt(agents) * lambda) * delta0;
    let mu0_max = (e0 / (2.0 * beta - rho * e0))
        .min(q / (10.0 * sqrt(agents) * (a * lambda + l * l + a * c * lambda_big / (1.0 - lambda_big))));

    let radius = (2.0 * beta / rho).min(b_sharp);
    let init_sum_ok = sum_sq <= agents / (gamma_big * gamma_big) * radius * radius;
    let init_individual_ok = states
        .iterates()
        .iter()
        .all(|x| dist_sq(x, x_star) <= gamma_big * gamma_big / agents * sum_sq);
    let consensus_bound = (2.0 / gamma_big * beta * e0 - rho * e0 * e0) * lambda / (2.0 * (l + beta) * c);
    // identical starts satisfy it trivially; a nonpositive bound shows up as q <= 0
    let init_consensus_ok = delta0 == 0.0 || delta0 < consensus_bound;

    Ok(RateConstants {
        lambda,
        c,
        lambda_fit: fit.lambda_hat,
        beta,
        b_sharp,
        rho,
        l,
        e0,
        a,
        q,
        gamma_big,
        lambda_big,
        delta0,
        mu0_max,
        init_sum_ok,
        init_individual_ok,
        init_consensus_ok,
        vacuous: q <= 0.0,
        beta_exceeds_l: beta > l,
    })
}

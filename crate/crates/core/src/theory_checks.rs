//! Executable versions of the inequalities the convergence analysis rests
//! on, plus the fits that turn measured traces into constants.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::{prox, FeasibleSet};
use crate::math::{abs, ceil, dist, dist_sq, dot, exp, linear_fit, ln, norm_sq, powf, sqrt};
use crate::network::{consensus_decay_trace, metropolis_weights, second_singular_value, Graph, MixingSchedule};
use crate::objective::test_functions::{AbsQuadratic1D, HalfSquaredNorm};
use crate::objective::{ObjectiveOracle, PhaseRetrievalInstance};
use crate::rng::{derive_stream, RngStream};
use crate::solver::{dpsm_round, AgentStates};
use crate::stepsize::StepsizePolicy;

/// Absolute tolerance of the inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Absolute tolerance of the projection inequality.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Trace entries at or below this are treated as exact consensus.
pub const PHI_FLOOR: f64 = 1e-12;
/// Weight-sum tolerance for convex combinations.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Outcome of one check: `pass ⟺ worst_slack ≥ −tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    /// Most negative margin seen; positive means every trial held strictly.
    pub worst_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, trials: usize, worst_slack: f64, tolerance: f64) -> Self {
        CheckReport {
            name: name.into(),
            trials,
            worst_slack,
            tolerance,
            pass: worst_slack >= -tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Fold another trial batch of the same check into this one.
    pub fn absorb(&mut self, other: &CheckReport) {
        self.trials += other.trials;
        self.worst_slack = self.worst_slack.min(other.worst_slack);
        self.pass = self.worst_slack >= -self.tolerance;
    }
}

fn combination_parts<F: Fn(&[f64]) -> f64>(
    f: &F,
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(invalid("points", "need at least two points"));
    }
    check_dim(points.len(), weights.len())?;
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(invalid("weights", format!("weight {w} is negative")));
    }
    let total: f64 = weights.iter().sum();
    if abs(total - 1.0) > SIMPLEX_TOL {
        return Err(invalid("weights", format!("weights sum to {total}, not 1")));
    }
    let n = points[0].len();
    for p in points {
        check_dim(n, p.len())?;
    }
    let mut z = vec![0.0; n];
    for (p, w) in points.iter().zip(weights) {
        crate::math::axpy(*w, p, &mut z);
    }
    let avg: f64 = points.iter().zip(weights).map(|(p, w)| w * f(p)).sum();
    let mut pairs = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            pairs += weights[i] * weights[j] * dist_sq(&points[i], &points[j]);
        }
    }
    Ok((f(&z), avg, pairs))
}

/// `f(Σ aᵢxᵢ) ≤ Σ aᵢ f(xᵢ) + (ρ/2) Σ_{i<j} aᵢaⱼ ‖xᵢ − xⱼ‖²` on one
/// combination; slack is right side minus left side.
pub fn check_weakly_convex_combination<F: Fn(&[f64]) -> f64>(
    f: F,
    rho: f64,
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<CheckReport> {
    let (lhs, avg, pairs) = combination_parts(&f, points, weights)?;
    Ok(CheckReport::new(
        "weak_combination",
        1,
        avg + 0.5 * rho * pairs - lhs,
        INEQUALITY_TOL,
    ))
}

/// `g(Σ aᵢxᵢ) ≤ Σ aᵢ g(xᵢ) − (τ/2) Σ_{i<j} aᵢaⱼ ‖xᵢ − xⱼ‖²`.
pub fn check_strongly_convex_combination<F: Fn(&[f64]) -> f64>(
    g: F,
    tau: f64,
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<CheckReport> {
    let (lhs, avg, pairs) = combination_parts(&g, points, weights)?;
    Ok(CheckReport::new(
        "strong_combination",
        1,
        avg - 0.5 * tau * pairs - lhs,
        INEQUALITY_TOL,
    ))
}

/// `‖Proj(x) − y‖² ≤ ‖x − y‖² − ‖x − Proj(x)‖²` for `y ∈ X`; returns the slack.
pub fn projection_slack(set: &FeasibleSet, x: &[f64], y: &[f64]) -> Result<f64> {
    let p = set.project(x)?;
    check_dim(x.len(), y.len())?;
    Ok(dist_sq(x, y) - dist_sq(x, &p) - dist_sq(&p, y))
}

/// `Σ_{k=0}^{T−1} λ^k γ_{T−k−1}` and `sum · (1 − λ) / γ_{T−1}`.
pub fn convolution_bound<G: Fn(usize) -> f64>(lambda: f64, gamma: G, t: usize) -> Result<(f64, f64)> {
    check_convolution_args(lambda, t)?;
    let mut sum = 0.0;
    let mut lk = 1.0;
    for k in 0..t {
        sum += lk * gamma(t - k - 1);
        lk *= lambda;
    }
    Ok((sum, sum * (1.0 - lambda) / gamma(t - 1)))
}

/// Ratios of [`convolution_bound`] for `T = 1..=t_max`, via
/// `S_T = γ_{T−1} + λ S_{T−1}`.
pub fn convolution_ratios<G: Fn(usize) -> f64>(lambda: f64, gamma: G, t_max: usize) -> Result<Vec<f64>> {
    check_convolution_args(lambda, t_max)?;
    let mut s = 0.0;
    Ok((1..=t_max)
        .map(|t| {
            let g = gamma(t - 1);
            s = g + lambda * s;
            s * (1.0 - lambda) / g
        })
        .collect())
}

fn check_convolution_args(lambda: f64, t: usize) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", format!("{lambda} is outside (0, 1)")));
    }
    if t == 0 {
        return Err(invalid("T", "must be at least 1"));
    }
    Ok(())
}

fn check_qp_args(n: usize, a: f64, b: f64, c: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    if !(a > 0.0) {
        return Err(invalid("a", format!("{a} must be positive")));
    }
    if !(b > 0.0 && 2.0 * b <= a) {
        return Err(invalid("b", format!("{b} must satisfy 0 < 2b <= a = {a}")));
    }
    if !(c >= 1.0) {
        return Err(invalid("c", format!("{c} must be at least 1")));
    }
    Ok(())
}

/// `−½Na² + Nba/c`, a lower bound on
/// `min −½ Σ (xᵢ² − 2bxᵢ)` over `Σ xᵢ² ≤ Na²`, `0 ≤ xᵢ ≤ ca`.
pub fn qp_lower_bound(n: usize, a: f64, b: f64, c: f64) -> Result<f64> {
    check_qp_args(n, a, b, c)?;
    let n = n as f64;
    Ok(-0.5 * n * a * a + n * b * a / c)
}

/// Grid minimum of the same problem for `N ≤ 3`. Leading coordinates run
/// over grids of spacing at most `resolution` (endpoints included); the last
/// coordinate enters concavely, so only the two ends of its feasible range
/// are evaluated.
pub fn qp_brute_force(n: usize, a: f64, b: f64, c: f64, resolution: f64) -> Result<f64> {
    check_qp_args(n, a, b, c)?;
    if n > 3 {
        return Err(invalid("N", format!("{n} exceeds the brute-force limit of 3")));
    }
    if !(resolution > 0.0 && resolution <= 1e-3 * a) {
        return Err(invalid("resolution", format!("{resolution} must lie in (0, 1e-3 a]")));
    }
    let h = |x: f64| -0.5 * (x * x - 2.0 * b * x);
    let cap = c * a;
    let last = |rem: f64| {
        let hi = cap.min(sqrt(rem.max(0.0)));
        h(0.0).min(h(hi))
    };
    let grid = |rem: f64| {
        let hi = cap.min(sqrt(rem.max(0.0)));
        let steps = ceil(hi / resolution).max(1.0) as usize;
        (0..=steps).map(move |i| hi * i as f64 / steps as f64)
    };
    let budget = n as f64 * a * a;
    Ok(match n {
        1 => last(budget),
        2 => grid(budget)
            .map(|x1| h(x1) + last(budget - x1 * x1))
            .fold(f64::INFINITY, f64::min),
        _ => grid(budget)
            .map(|x1| {
                let rem = budget - x1 * x1;
                grid(rem)
                    .map(|x2| h(x1) + h(x2) + last(rem - x2 * x2))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min),
    })
}

/// `‖Φ(k, 0) − J‖ ≈ c λ^k` fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiFit {
    pub c_hat: f64,
    pub lambda_hat: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// The trace was already at consensus after one step; `(c, λ) = (0, 0)`.
    pub degenerate: bool,
}

/// Least squares of `ln trace[k]` on `k` over entries above [`PHI_FLOOR`].
/// `lambda_hat` is capped at 1.
pub fn fit_phi_decay(trace: &[f64]) -> Result<PhiFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > PHI_FLOOR && v.is_finite())
        .map(|(k, v)| (k as f64, ln(*v)))
        .unzip();
    if xs.is_empty() {
        return Ok(PhiFit {
            c_hat: 0.0,
            lambda_hat: 0.0,
            r_squared: f64::NAN,
            points_used: 0,
            degenerate: true,
        });
    }
    if xs.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} trace entries above {PHI_FLOOR:e}, need 10",
            xs.len()
        )));
    }
    let (intercept, slope, r2) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::InsufficientData("degenerate trace".into()))?;
    Ok(PhiFit {
        c_hat: exp(intercept),
        lambda_hat: exp(slope).min(1.0),
        r_squared: r2,
        points_used: xs.len(),
        degenerate: false,
    })
}

/// Worst `‖prox(x₁) − prox(x₂)‖ / ‖x₁ − x₂‖` over random pairs, against
/// the bound `1/(1 − tρ)`. Slack is measured in absolute form,
/// `‖x₁ − x₂‖/(1 − tρ) + 2·inner_tol − ‖prox(x₁) − prox(x₂)‖`, and pairs with
/// `x₁ = x₂` are skipped.
#[allow(clippy::too_many_arguments)]
pub fn check_prox_lipschitz<O: ObjectiveOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    set: &FeasibleSet,
    t: f64,
    pair_count: usize,
    spread: f64,
    inner_budget: usize,
    inner_tol: f64,
    rng: &mut R,
) -> Result<CheckReport> {
    let rho = oracle.rho();
    if rho > 0.0 && t * rho >= 1.0 {
        return Err(invalid("t", format!("{t} must be below 1/rho = {}", 1.0 / rho)));
    }
    let bound = 1.0 / (1.0 - t * rho);
    let n = oracle.dim();
    let mut worst = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let mut used = 0;
    for _ in 0..pair_count {
        let x1: Vec<f64> = (0..n).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect();
        let x2: Vec<f64> = (0..n).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect();
        let dx = dist(&x1, &x2);
        if dx == 0.0 {
            continue;
        }
        let p1 = prox(oracle, set, &x1, t, inner_budget)?.prox_point;
        let p2 = prox(oracle, set, &x2, t, inner_budget)?.prox_point;
        let dp = dist(&p1, &p2);
        worst = worst.min(bound * dx + 2.0 * inner_tol - dp);
        worst_ratio = worst_ratio.max(dp / dx);
        used += 1;
    }
    Ok(CheckReport::new("prox_lipschitz", used, worst, 0.0)
        .with_note(format!("worst ratio {worst_ratio:.6} vs bound {bound:.6}")))
}

fn gaussian(rng: &mut RngStream, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn simplex(rng: &mut RngStream, m: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

const SUITE_SEED: u64 = 20_190_101;

fn stream(name: &str, trial: usize) -> RngStream {
    derive_stream(SUITE_SEED, name, 0, trial as u64)
}

fn trial_points(rng: &mut RngStream, n: usize, scale: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = rng.random_range(2..=5);
    let pts = (0..m).map(|_| gaussian(rng, n, scale)).collect();
    (pts, simplex(rng, m))
}

fn suite_weak_combination() -> Result<CheckReport> {
    let inst = PhaseRetrievalInstance::generate(6, 3, 10, SUITE_SEED)?;
    let mut report = CheckReport::new("weak_combination", 0, f64::INFINITY, INEQUALITY_TOL);
    let trials = 1000;
    for trial in 0..trials {
        let mut rng = stream("weak_combination", trial);
        let (pts, w) = trial_points(&mut rng, 6, 1.0);
        report.absorb(&check_weakly_convex_combination(
            |x| ObjectiveOracle::value(&inst, x),
            inst.rho(),
            &pts,
            &w,
        )?);
        let (pts, w) = trial_points(&mut rng, 1, 1.5);
        report.absorb(&check_weakly_convex_combination(
            |x| AbsQuadratic1D.value(x),
            AbsQuadratic1D.rho(),
            &pts,
            &w,
        )?);
        let (pts, w) = trial_points(&mut rng, 4, 1.0);
        let quad = HalfSquaredNorm { dim: 4 };
        report.absorb(&check_weakly_convex_combination(|x| quad.value(x), quad.rho(), &pts, &w)?);
    }
    Ok(report.with_note("phase retrieval (rho_hat), |y^2 - 1| (rho = 2), |y|^2/2 (rho = 0)"))
}

fn suite_strong_combination() -> Result<CheckReport> {
    let mut report = CheckReport::new("strong_combination", 0, f64::INFINITY, INEQUALITY_TOL);
    let n = 5;
    for trial in 0..1000 {
        let mut rng = stream("strong_combination", trial);
        // g(x) = ½ xᵀ(BᵀB + τI)x is τ-strongly convex
        let tau = 0.1 + rng.random::<f64>() * 2.0;
        let b = gaussian(&mut rng, n * n, 1.0);
        let g = |x: &[f64]| {
            let bx: f64 = (0..n).map(|r| {
                let v = dot(&b[r * n..(r + 1) * n], x);
                v * v
            }).sum();
            0.5 * (bx + tau * norm_sq(x))
        };
        let (pts, w) = trial_points(&mut rng, n, 1.0);
        report.absorb(&check_strongly_convex_combination(g, tau, &pts, &w)?);
        let (pts, w) = trial_points(&mut rng, n, 1.0);
        report.absorb(&check_strongly_convex_combination(norm_sq, 2.0, &pts, &w)?);
    }
    Ok(report.with_note("random quadratics with known tau and |x|^2 (tau = 2)"))
}

fn suite_projection() -> Result<CheckReport> {
    let n = 4;
    let sets = [
        FeasibleSet::WholeSpace,
        FeasibleSet::ball(vec![0.5, -0.5, 0.0, 1.0], 1.5)?,
        FeasibleSet::boxed(vec![-1.0, 0.0, -0.5, -2.0], vec![1.0, 0.5, 2.0, -1.0])?,
    ];
    let mut report = CheckReport::new("projection_inequality", 0, f64::INFINITY, PROJECTION_TOL);
    for (i, set) in sets.iter().enumerate() {
        let mut rng = stream("projection_inequality", i);
        for _ in 0..10_000 {
            let x = gaussian(&mut rng, n, 3.0);
            let y = set.project(&gaussian(&mut rng, n, 2.0))?;
            let s = projection_slack(set, &x, &y)?;
            report.absorb(&CheckReport::new("", 1, s, PROJECTION_TOL));
        }
    }
    Ok(report.with_note("10^4 pairs on each of whole space, ball, box"))
}

/// Inner budget and the matching accuracy allowance for the prox check;
/// the geometry tests pin this budget to well under the allowance.
const LIPSCHITZ_BUDGET: usize = 20_000;
const LIPSCHITZ_INNER_TOL: f64 = 1e-4;

fn suite_prox_lipschitz() -> Result<CheckReport> {
    let mut r = check_prox_lipschitz(
        &AbsQuadratic1D,
        &FeasibleSet::WholeSpace,
        0.1,
        1000,
        1.5,
        LIPSCHITZ_BUDGET,
        LIPSCHITZ_INNER_TOL,
        &mut stream("prox_lipschitz", 0),
    )?;
    let convex = check_prox_lipschitz(
        &HalfSquaredNorm { dim: 3 },
        &FeasibleSet::WholeSpace,
        0.5,
        200,
        2.0,
        2_000,
        LIPSCHITZ_INNER_TOL,
        &mut stream("prox_lipschitz", 1),
    )?;
    let note = format!(
        "|y^2-1| t=0.1: {}; |y|^2/2 t=0.5: {}",
        r.note.take().unwrap_or_default(),
        convex.note.clone().unwrap_or_default()
    );
    r.absorb(&convex);
    Ok(r.with_note(note))
}

fn suite_qp_bound() -> Result<CheckReport> {
    let mut report = CheckReport::new("qp_bound", 0, f64::INFINITY, INEQUALITY_TOL);
    for trial in 0..100 {
        let mut rng = stream("qp_bound", trial);
        let n = rng.random_range(1..=3);
        let a = 0.5 + 1.5 * rng.random::<f64>();
        let b = (0.05 + 0.95 * rng.random::<f64>()) * a / 2.0;
        let c = 1.0 + rng.random::<f64>();
        let brute = qp_brute_force(n, a, b, c, 1e-3 * a)?;
        let bound = qp_lower_bound(n, a, b, c)?;
        report.absorb(&CheckReport::new("", 1, brute - bound, INEQUALITY_TOL));
    }
    Ok(report.with_note("grid minimum minus closed-form bound over random (N <= 3, a, b, c)"))
}

/// Uniform cap on the convolution ratio for the polynomial stepsizes.
const CONVOLUTION_CAP: f64 = 4.0;

fn suite_convolution() -> Result<CheckReport> {
    let mut worst_ratio: f64 = 0.0;
    let mut trials = 0;
    for q in [0.5, 0.75, 1.0] {
        for lambda in [0.3, 0.5, 0.9] {
            let ratios = convolution_ratios(lambda, |k| 1.0 / powf(k as f64 + 1.0, q), 100_000)?;
            trials += ratios.len();
            worst_ratio = ratios.iter().copied().fold(worst_ratio, f64::max);
        }
    }
    Ok(
        CheckReport::new("convolution_bound", trials, CONVOLUTION_CAP - worst_ratio, 0.0).with_note(format!(
            "max ratio {worst_ratio:.6} over T <= 1e5, q in {{0.5, 0.75, 1}}, lambda in {{0.3, 0.5, 0.9}}"
        )),
    )
}

fn suite_subgradient_inequality() -> Result<CheckReport> {
    let mut report = CheckReport::new("subgradient_inequality", 0, f64::INFINITY, INEQUALITY_TOL);
    for seed in 0..2u64 {
        let inst = PhaseRetrievalInstance::generate(5, 2, 8, SUITE_SEED + seed)?;
        let mut rng = stream("subgradient_inequality", seed as usize);
        let rho = inst.rho();
        for _ in 0..5_000 {
            let x = gaussian(&mut rng, 5, 1.0);
            let y = gaussian(&mut rng, 5, 1.0);
            let i = rng.random_range(0..2);
            let g = inst.subgradient(i, &x)?;
            let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let s = inst.value(i, &y)? - inst.value(i, &x)? - dot(&g, &d) + 0.5 * rho * norm_sq(&d);
            report.absorb(&CheckReport::new("", 1, s, INEQUALITY_TOL));
        }
    }
    Ok(report.with_note("phase retrieval f_i with rho_hat, 10^4 pairs"))
}

/// `max ‖Δ_k‖/α_k ≤ 10 · median` over `k ∈ [100, 2000]` with `α_k = 1/√(k+1)`.
fn suite_consensus_tracking() -> Result<CheckReport> {
    let inst = PhaseRetrievalInstance::generate(5, 6, 10, SUITE_SEED)?;
    let sched = MixingSchedule::fixed_er(6, 0.5, SUITE_SEED)?;
    let policy = StepsizePolicy::Polynomial { a: 0.01, q: 0.5 };
    let set = FeasibleSet::WholeSpace;
    let mut rng = stream("consensus_tracking", 0);
    let mut states = AgentStates::new((0..6).map(|_| gaussian(&mut rng, 5, 1.0)).collect())?;
    let mut ratios = Vec::new();
    for k in 0..=2000 {
        if k >= 100 {
            ratios.push(states.consensus_error() / policy.alpha(k));
        }
        states = dpsm_round(&states, &sched, &inst, &set, &policy)?;
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    Ok(CheckReport::new("consensus_tracking", ratios.len(), 10.0 * median - max, 0.0)
        .with_note(format!("max/median of |Delta_k|/alpha_k = {:.4}", max / median)))
}

/// Zero-step gossip on a fixed connected graph decays at rate `σ₂` (5%).
fn suite_gossip_decay() -> Result<CheckReport> {
    let mut report = CheckReport::new("gossip_decay", 0, f64::INFINITY, 0.0);
    let mut notes = Vec::new();
    for (name, g) in [("path6", Graph::path(6)?), ("er12", crate::network::connected_er(12, 0.4, SUITE_SEED)?)] {
        let a = metropolis_weights(&g);
        let sigma2 = second_singular_value(&a)?;
        let sched = MixingSchedule::fixed(a);
        let n = g.node_count();
        let mut rng = stream("gossip_decay", n);
        let mut states = AgentStates::new((0..n).map(|_| gaussian(&mut rng, 2, 1.0)).collect())?;
        let zero = crate::objective::test_functions::Zero { dim: 2 };
        let zero = Replicated { inner: zero, agents: n };
        let mut trace = Vec::new();
        for _ in 0..60 {
            trace.push(states.consensus_error());
            states = dpsm_round(
                &states,
                &sched,
                &zero,
                &FeasibleSet::WholeSpace,
                &StepsizePolicy::Constant { alpha: 0.0 },
            )?;
        }
        let fit = fit_phi_decay(&trace[20..])?;
        let rel = abs(fit.lambda_hat - sigma2) / sigma2;
        report.absorb(&CheckReport::new("", 1, 0.05 - rel, 0.0));
        notes.push(format!("{name}: fitted {:.4} vs sigma2 {:.4}", fit.lambda_hat, sigma2));
    }
    Ok(report.with_note(notes.join("; ")))
}

/// Fitted decay of `‖Φ(k,0) − J‖` equals `σ₂` (2%) on fixed symmetric schedules.
fn suite_phi_decay_fit() -> Result<CheckReport> {
    let mut report = CheckReport::new("phi_decay_fit", 0, f64::INFINITY, 0.0);
    let mut notes = Vec::new();
    for (name, g) in [
        ("path3", Graph::path(3)?),
        ("er20", crate::network::connected_er(20, 0.3, SUITE_SEED)?),
        ("er50", crate::network::connected_er(50, 0.2, SUITE_SEED)?),
    ] {
        let a = metropolis_weights(&g);
        let sigma2 = second_singular_value(&a)?;
        let trace = consensus_decay_trace(&MixingSchedule::fixed(a), 40)?;
        let fit = fit_phi_decay(&trace)?;
        let rel = abs(fit.lambda_hat - sigma2) / sigma2;
        report.absorb(&CheckReport::new("", 1, 0.02 - rel, 0.0));
        notes.push(format!("{name}: {:.5} vs {:.5}", fit.lambda_hat, sigma2));
    }
    Ok(report.with_note(notes.join("; ")))
}

/// The same single-agent objective held by several agents.
struct Replicated<O> {
    inner: O,
    agents: usize,
}

impl<O: ObjectiveOracle> ObjectiveOracle for Replicated<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn agents(&self) -> usize {
        self.agents
    }
    fn rho(&self) -> f64 {
        self.inner.rho()
    }
    fn local_len(&self, _: usize) -> usize {
        self.inner.local_len(0)
    }
    fn local_value(&self, _: usize, x: &[f64]) -> f64 {
        self.inner.local_value(0, x)
    }
    fn add_datum_subgradient(&self, _: usize, datum: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        self.inner.add_datum_subgradient(0, datum, x, scale, out)
    }
}

type SuiteEntry = (&'static str, fn() -> Result<CheckReport>);

const SUITE: &[SuiteEntry] = &[
    ("weak_combination", suite_weak_combination),
    ("strong_combination", suite_strong_combination),
    ("projection_inequality", suite_projection),
    ("prox_lipschitz", suite_prox_lipschitz),
    ("qp_bound", suite_qp_bound),
    ("convolution_bound", suite_convolution),
    ("subgradient_inequality", suite_subgradient_inequality),
    ("consensus_tracking", suite_consensus_tracking),
    ("gossip_decay", suite_gossip_decay),
    ("phi_decay_fit", suite_phi_decay_fit),
];

/// Names of every check in the suite, in run order.
pub fn suite_names() -> Vec<&'static str> {
    SUITE.iter().map(|(n, _)| *n).collect()
}

/// Run every check whose name contains `filter` (all when `None`). A check
/// that errors is reported as failed with the error in its note.
pub fn run_suite(filter: Option<&str>) -> Vec<CheckReport> {
    SUITE
        .iter()
        .filter(|(name, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|(name, check)| match check() {
            Ok(r) => r,
            Err(e) => {
                let mut r = CheckReport::new(*name, 0, f64::NEG_INFINITY, 0.0).with_note(e.to_string());
                r.pass = false;
                r
            }
        })
        .collect()
}

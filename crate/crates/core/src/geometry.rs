//! Feasible sets, proximal points and the Moreau envelope.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};
use crate::math::{axpy, dist, dist_sq, norm};
use crate::objective::ObjectiveOracle;

/// Default inner-solver budget for [`prox`].
pub const DEFAULT_INNER_BUDGET: usize = 2000;

/// Closed convex constraint set shared by all agents.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    WholeSpace,
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl FeasibleSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("ball radius {radius} must be positive")));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
            return Err(invalid(
                "box",
                format!("lower[{i}] = {} exceeds upper[{i}] = {}", lower[i], upper[i]),
            ));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Dimension the set is defined in, `None` for the whole space.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleSet::WholeSpace => None,
            FeasibleSet::Ball { center, .. } => Some(center.len()),
            FeasibleSet::Box { lower, .. } => Some(lower.len()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(d, n),
            None => Ok(()),
        }
    }

    /// Euclidean projection in place.
    pub fn project_into(&self, x: &mut [f64]) {
        match self {
            FeasibleSet::WholeSpace => {}
            FeasibleSet::Ball { center, radius } => {
                let r = dist(x, center);
                if r > *radius {
                    let s = radius / r;
                    for (xi, ci) in x.iter_mut().zip(center) {
                        *xi = ci + (*xi - ci) * s;
                    }
                }
            }
            FeasibleSet::Box { lower, upper } => {
                for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                    *xi = xi.clamp(*lo, *hi);
                }
            }
        }
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let mut p = x.to_vec();
        self.project_into(&mut p);
        Ok(p)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            FeasibleSet::WholeSpace => true,
            FeasibleSet::Ball { center, radius } => dist(x, center) <= radius + tol,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol),
        }
    }
}

/// Output of the proximal inner solve at a point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    /// `x̂ ≈ argmin_{y ∈ X} f(y) + ‖y − x‖² / (2t)`.
    pub prox_point: Vec<f64>,
    /// `φ_t(x)` evaluated at `x̂`.
    pub envelope_value: f64,
    /// `∇φ_t(x) = (x − x̂) / t`.
    pub envelope_gradient: Vec<f64>,
    pub inner_iterations: usize,
    /// `σ/2 · ‖last inner step‖²`.
    pub inner_gap_estimate: f64,
}

impl ProxResult {
    pub fn gradient_norm(&self) -> f64 {
        norm(&self.envelope_gradient)
    }
}

/// Proximal point of the global objective over `set`.
///
/// The inner problem is `(1/t − ρ)`-strongly convex; it is solved by projected
/// subgradient steps `2 / (σ (j + 2))` from a warm start at `Proj(x)`, with
/// iterates averaged under weights `j + 1`. The averaged and the last
/// iterate are compared and the one with the lower inner objective is kept.
pub fn prox<O: ObjectiveOracle + ?Sized>(
    oracle: &O,
    set: &FeasibleSet,
    x: &[f64],
    t: f64,
    budget: usize,
) -> Result<ProxResult> {
    let n = oracle.dim();
    check_dim(n, x.len())?;
    set.check_dim(n)?;
    let rho = oracle.rho();
    if !(t > 0.0) {
        return Err(invalid("t", format!("prox parameter {t} must be positive")));
    }
    if rho > 0.0 && t * rho >= 1.0 {
        return Err(invalid(
            "t",
            format!("prox parameter {t} must be below 1/rho = {}", 1.0 / rho),
        ));
    }
    if budget == 0 {
        return Err(invalid("budget", "inner budget must be at least one iteration"));
    }
    let sigma = 1.0 / t - rho;
    let inv_t = 1.0 / t;
    let inner = |y: &[f64]| oracle.value(y) + dist_sq(y, x) * 0.5 * inv_t;

    let mut y = x.to_vec();
    set.project_into(&mut y);
    let mut avg = vec![0.0; n];
    let mut weight_sum = 0.0;
    let mut g = vec![0.0; n];
    let mut last_step = 0.0;
    for j in 0..budget {
        let wj = (j + 1) as f64;
        weight_sum += wj;
        axpy(wj, &y, &mut avg);

        oracle.subgradient(&y, &mut g);
        for ((gi, yi), xi) in g.iter_mut().zip(&y).zip(x) {
            *gi += (yi - xi) * inv_t;
        }
        let step = 2.0 / (sigma * (j as f64 + 2.0));
        let prev = y.clone();
        axpy(-step, &g, &mut y);
        set.project_into(&mut y);
        last_step = dist(&y, &prev);
    }
    avg.iter_mut().for_each(|v| *v /= weight_sum);

    let (h_avg, h_last) = (inner(&avg), inner(&y));
    let (prox_point, envelope_value) = if h_avg < h_last { (avg, h_avg) } else { (y, h_last) };
    let envelope_gradient = x
        .iter()
        .zip(&prox_point)
        .map(|(xi, pi)| (xi - pi) * inv_t)
        .collect();
    Ok(ProxResult {
        prox_point,
        envelope_value,
        envelope_gradient,
        inner_iterations: budget,
        inner_gap_estimate: 0.5 * sigma * last_step * last_step,
    })
}

/// Near-stationarity measure `‖∇φ_t(x)‖ = ‖x − x̂‖ / t`.
pub fn moreau_gradient_norm<O: ObjectiveOracle + ?Sized>(
    oracle: &O,
    set: &FeasibleSet,
    x: &[f64],
    t: f64,
    budget: usize,
) -> Result<f64> {
    prox(oracle, set, x, t, budget).map(|r| r.gradient_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::test_functions::{AbsQuadratic1D, HalfSquaredNorm, Zero};

    #[test]
    fn projection_examples() {
        let x = [3.0, 4.0];
        assert_eq!(FeasibleSet::WholeSpace.project(&x).unwrap(), x.to_vec());
        let ball = FeasibleSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = ball.project(&x).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        let b = FeasibleSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.project(&[-1.0, 0.5]).unwrap(), vec![0.0, 0.5]);
        assert!(ball.project(&[1.0]).is_err());
    }

    #[test]
    fn set_validation() {
        assert!(FeasibleSet::ball(vec![0.0], 0.0).is_err());
        assert!(FeasibleSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(FeasibleSet::boxed(vec![1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn prox_of_zero_is_identity() {
        let x = [0.3, -2.0, 5.0];
        let r = prox(&Zero { dim: 3 }, &FeasibleSet::WholeSpace, &x, 0.5, 10).unwrap();
        assert_eq!(r.prox_point, x.to_vec());
        assert_eq!(r.envelope_value, 0.0);
        assert!(r.envelope_gradient.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn prox_of_quadratic_matches_closed_form() {
        let x = [1.0, -2.0, 0.5];
        let t = 0.3;
        let r = prox(&HalfSquaredNorm { dim: 3 }, &FeasibleSet::WholeSpace, &x, t, DEFAULT_INNER_BUDGET)
            .unwrap();
        for (p, xi) in r.prox_point.iter().zip(&x) {
            assert!((p - xi / (1.0 + t)).abs() < 1e-6);
        }
        let nx = norm(&x);
        assert!((r.envelope_value - nx * nx / (2.0 * (1.0 + t))).abs() < 1e-6);
        let gn = moreau_gradient_norm(&HalfSquaredNorm { dim: 3 }, &FeasibleSet::WholeSpace, &x, t, 2000)
            .unwrap();
        assert!((gn - nx / (1.0 + t)).abs() < 1e-5);
    }

    #[test]
    fn prox_of_weakly_convex_1d_matches_grid_search() {
        let t = 0.1;
        for x in [2.0, 1.1, 0.3, -1.7] {
            let r = prox(&AbsQuadratic1D, &FeasibleSet::WholeSpace, &[x], t, DEFAULT_INNER_BUDGET).unwrap();
            // dense grid over [-3, 3] at 1e-5
            let mut best = (f64::INFINITY, 0.0);
            let steps = 600_000;
            for k in 0..=steps {
                let y = -3.0 + 6.0 * k as f64 / steps as f64;
                let h = (y * y - 1.0f64).abs() + (y - x) * (y - x) / (2.0 * t);
                if h < best.0 {
                    best = (h, y);
                }
            }
            assert!((r.prox_point[0] - best.1).abs() < 1e-3, "x = {x}: {} vs {}", r.prox_point[0], best.1);
        }
    }

    #[test]
    fn prox_respects_constraint() {
        let set = FeasibleSet::boxed(vec![-0.5], vec![0.5]).unwrap();
        let r = prox(&AbsQuadratic1D, &set, &[2.0], 0.1, 500).unwrap();
        assert!(set.contains(&r.prox_point, 0.0));
    }

    #[test]
    fn prox_parameter_errors() {
        let set = FeasibleSet::WholeSpace;
        assert!(prox(&AbsQuadratic1D, &set, &[1.0], 0.5, 10).is_err());
        assert!(prox(&AbsQuadratic1D, &set, &[1.0], 0.0, 10).is_err());
        assert!(prox(&AbsQuadratic1D, &set, &[1.0], 0.1, 0).is_err());
        assert!(prox(&AbsQuadratic1D, &set, &[1.0, 2.0], 0.1, 10).is_err());
    }
}

use alloc::format;

use crate::error::{invalid, Result};
use crate::math::powf;

/// Stepsize schedule `α_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizePolicy {
    /// `α_k = a / (k + 1)^q`, `q ∈ (0, 1]`.
    Polynomial { a: f64, q: f64 },
    /// `α_k = μ₀ γ^k`, `γ ∈ (0, 1)`.
    Geometric { mu0: f64, gamma: f64 },
    /// `α_k = a / (K + 1)^q` with `K = ⌊k / epoch_length⌋`.
    EpochPolynomial { a: f64, q: f64, epoch_length: usize },
    /// `α_k = alpha`; zero gives pure gossip rounds.
    Constant { alpha: f64 },
}

impl StepsizePolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepsizePolicy::Polynomial { a, q } | StepsizePolicy::EpochPolynomial { a, q, .. } => {
                if !(a > 0.0) {
                    return Err(invalid("stepsize.a", format!("{a} must be positive")));
                }
                if !(q > 0.0 && q <= 1.0) {
                    return Err(invalid("stepsize.q", format!("{q} is outside (0, 1]")));
                }
                if let StepsizePolicy::EpochPolynomial { epoch_length: 0, .. } = self {
                    return Err(invalid("stepsize.epoch_length", "must be at least 1"));
                }
            }
            StepsizePolicy::Geometric { mu0, gamma } => {
                if !(mu0 > 0.0) {
                    return Err(invalid("stepsize.mu0", format!("{mu0} must be positive")));
                }
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(invalid("stepsize.gamma", format!("{gamma} is outside (0, 1)")));
                }
            }
            StepsizePolicy::Constant { alpha } => {
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(invalid("stepsize.alpha", format!("{alpha} must be finite and nonnegative")));
                }
            }
        }
        Ok(())
    }

    pub fn alpha(&self, k: usize) -> f64 {
        match *self {
            StepsizePolicy::Polynomial { a, q } => a / powf(k as f64 + 1.0, q),
            StepsizePolicy::Geometric { mu0, gamma } => mu0 * powf(gamma, k as f64),
            StepsizePolicy::EpochPolynomial { a, q, epoch_length } => {
                a / powf((k / epoch_length) as f64 + 1.0, q)
            }
            StepsizePolicy::Constant { alpha } => alpha,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let p = StepsizePolicy::Polynomial { a: 2.0, q: 0.5 };
        assert_eq!(p.alpha(0), 2.0);
        assert!((p.alpha(3) - 1.0).abs() < 1e-15);
        let g = StepsizePolicy::Geometric { mu0: 0.5, gamma: 0.9 };
        assert!((g.alpha(2) - 0.405).abs() < 1e-15);
        let e = StepsizePolicy::EpochPolynomial { a: 1.0, q: 1.0, epoch_length: 10 };
        assert_eq!(e.alpha(9), 1.0);
        assert_eq!(e.alpha(10), 0.5);
        assert_eq!(StepsizePolicy::Constant { alpha: 0.0 }.alpha(7), 0.0);
    }

    #[test]
    fn polynomial_ratio_tends_to_one() {
        for q in [0.5, 0.75, 1.0] {
            let p = StepsizePolicy::Polynomial { a: 1.0, q };
            let r = p.alpha(100_001) / p.alpha(100_000);
            assert!(r < 1.0 && r > 1.0 - 1e-4);
        }
    }

    #[test]
    fn validation() {
        assert!(StepsizePolicy::Polynomial { a: 1.0, q: 1.5 }.validate().is_err());
        assert!(StepsizePolicy::Polynomial { a: 0.0, q: 0.5 }.validate().is_err());
        assert!(StepsizePolicy::Geometric { mu0: 1.0, gamma: 1.0 }.validate().is_err());
        assert!(StepsizePolicy::EpochPolynomial { a: 1.0, q: 0.5, epoch_length: 0 }.validate().is_err());
        assert!(StepsizePolicy::Constant { alpha: -1.0 }.validate().is_err());
        assert!(StepsizePolicy::Geometric { mu0: 1.0, gamma: 0.5 }.validate().is_ok());
    }
}

//! Unconstrained parameterization of the copula dependence parameter.

use crate::copula::{validate_theta, CopulaFamily, ThetaCheck};
use crate::scalar::Real;

/// `|tanh(eta)|` above this is reported as a boundary solution.
pub const SATURATION: f64 = 0.999;

/// Keeps the Gaussian correlation strictly inside `(-1, 1)` when `tanh`
/// rounds to one.
const GAUSSIAN_SHRINK: f64 = 1.0 - 1e-10;

pub fn theta_from_eta_generic<T: Real>(family: CopulaFamily, eta: T) -> T {
    match family {
        CopulaFamily::Gaussian => eta.tanh() * GAUSSIAN_SHRINK,
        CopulaFamily::Amh | CopulaFamily::Fgm => eta.tanh(),
        CopulaFamily::Frank => eta,
        CopulaFamily::Gumbel | CopulaFamily::Joe => eta.softplus() + 1.0,
        CopulaFamily::Clayton => eta.softplus(),
        CopulaFamily::Product => T::cst(0.0),
    }
}

/// Maps an unconstrained `eta` into the family's legal domain.
pub fn theta_from_eta(family: CopulaFamily, eta: f64) -> f64 {
    theta_from_eta_generic(family, eta)
}

/// Inverse of [`theta_from_eta`], used for initialization and for building
/// parameter vectors from known dependence values.
pub fn eta_from_theta(family: CopulaFamily, theta: f64) -> f64 {
    let inv_softplus = |y: f64| if y > 30.0 { y } else { y.exp_m1().ln() };
    match family {
        CopulaFamily::Gaussian => (theta / GAUSSIAN_SHRINK).clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh(),
        CopulaFamily::Amh | CopulaFamily::Fgm => theta.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh(),
        CopulaFamily::Frank => theta,
        CopulaFamily::Gumbel | CopulaFamily::Joe => inv_softplus((theta - 1.0).max(1e-300)),
        CopulaFamily::Clayton => inv_softplus(theta.max(1e-300)),
        CopulaFamily::Product => 0.0,
    }
}

/// Starting `eta`: independence for two-sided families, a weak positive
/// dependence for one-sided ones (whose independence point sits on the
/// boundary where the softplus gradient vanishes).
pub fn initial_eta(family: CopulaFamily) -> f64 {
    match family {
        CopulaFamily::Gumbel | CopulaFamily::Joe => eta_from_theta(family, 1.05),
        CopulaFamily::Clayton => eta_from_theta(family, 0.05),
        _ => 0.0,
    }
}

/// Diagnostic for a fitted dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaDiagnostic {
    Interior,
    IndependenceLimit,
    /// A bounded family pushed against its domain edge.
    Saturated,
}

pub fn diagnose(family: CopulaFamily, eta: f64) -> ThetaDiagnostic {
    let theta = theta_from_eta(family, eta);
    let bounded = matches!(
        family,
        CopulaFamily::Gaussian | CopulaFamily::Amh | CopulaFamily::Fgm
    );
    if bounded && theta.abs() > SATURATION {
        return ThetaDiagnostic::Saturated;
    }
    match validate_theta(family, theta) {
        Ok(ThetaCheck::IndependenceLimit) => ThetaDiagnostic::IndependenceLimit,
        _ if family == CopulaFamily::Product => ThetaDiagnostic::IndependenceLimit,
        _ => ThetaDiagnostic::Interior,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(theta_from_eta(CopulaFamily::Gaussian, 0.0), 0.0);
        assert_eq!(diagnose(CopulaFamily::Gaussian, 0.0), ThetaDiagnostic::IndependenceLimit);
        assert!((theta_from_eta(CopulaFamily::Gumbel, -800.0) - 1.0).abs() < 1e-300);
        assert_eq!(theta_from_eta(CopulaFamily::Frank, -0.613), -0.613);
    }

    #[test]
    fn outputs_are_always_legal() {
        for family in CopulaFamily::ALL {
            for eta in [-1e3, -40.0, -3.0, -1e-7, 0.0, 0.4, 5.0, 40.0, 1e3] {
                let theta = theta_from_eta(family, eta);
                assert!(validate_theta(family, theta).is_ok(), "{family} eta={eta} -> {theta}");
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for (family, theta) in [
            (CopulaFamily::Gaussian, -0.4),
            (CopulaFamily::Amh, 0.7),
            (CopulaFamily::Fgm, -0.2),
            (CopulaFamily::Frank, -3.0),
            (CopulaFamily::Gumbel, 2.5),
            (CopulaFamily::Joe, 1.2),
            (CopulaFamily::Clayton, 4.0),
        ] {
            let back = theta_from_eta(family, eta_from_theta(family, theta));
            assert!((back - theta).abs() < 1e-12, "{family}");
        }
    }

    #[test]
    fn saturation_is_flagged() {
        assert_eq!(diagnose(CopulaFamily::Fgm, 5.0), ThetaDiagnostic::Saturated);
        assert_eq!(diagnose(CopulaFamily::Frank, 50.0), ThetaDiagnostic::Interior);
    }
}

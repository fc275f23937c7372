use std::f64::consts::PI;

use crate::error::Result;
use crate::special::tanh_sinh;

use super::{CopulaFamily, CopulaSpec, INDEPENDENCE_BAND};

/// Population Kendall's tau of a copula.
pub fn kendall_tau(spec: &CopulaSpec) -> Result<f64> {
    spec.validate()?;
    let t = spec.theta;
    let tau = match spec.family {
        CopulaFamily::Product => 0.0,
        CopulaFamily::Gaussian => 2.0 / PI * t.asin(),
        CopulaFamily::Clayton => t / (t + 2.0),
        CopulaFamily::Gumbel => (t - 1.0) / t,
        CopulaFamily::Fgm => 2.0 * t / 9.0,
        CopulaFamily::Amh => amh_tau(t),
        CopulaFamily::Frank => frank_tau(t),
        CopulaFamily::Joe => joe_tau(t),
    };
    Ok(tau)
}

fn amh_tau(t: f64) -> f64 {
    if t == 1.0 {
        return 1.0 / 3.0;
    }
    if t.abs() < 1e-2 {
        // the closed form cancels catastrophically near 0
        return t * (2.0 / 9.0 + t * (1.0 / 18.0 + t * (1.0 / 45.0 + t * (1.0 / 90.0 + t * 2.0 / 315.0))));
    }
    (3.0 * t - 2.0) / (3.0 * t) - 2.0 * (1.0 - t).powi(2) * (-t).ln_1p() / (3.0 * t * t)
}

/// First Debye function `D1(t) = (1/t) int_0^t s / (e^s - 1) ds`.
pub(crate) fn debye1(t: f64) -> f64 {
    let integrand = |s: f64| if s == 0.0 { 1.0 } else { s / s.exp_m1() };
    tanh_sinh(integrand, 0.0, t, 1e-13) / t
}

fn frank_tau(t: f64) -> f64 {
    if t.abs() < INDEPENDENCE_BAND {
        return t / 9.0;
    }
    1.0 - 4.0 / t * (1.0 - debye1(t))
}

fn joe_tau(t: f64) -> f64 {
    let a = 2.0 * (1.0 - t) / t;
    // in w = 1 - s the singular endpoint sits at w = 0, where quadrature
    // nodes are exact
    let integrand = |w: f64| (1.0 - w) * (-w).ln_1p() * w.powf(a);
    1.0 + 4.0 / (t * t) * tanh_sinh(integrand, 0.0, 1.0, 1e-12)
}

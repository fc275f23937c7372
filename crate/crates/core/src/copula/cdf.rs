use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{bvn_cdf, bvn_pdf, norm_cdf, norm_ppf};

use super::{CopulaFamily, CopulaSpec, INDEPENDENCE_BAND};

/// Negative rectangle mass tolerated as rounding before it is treated as a
/// 2-increasing violation.
pub const RECT_TOLERANCE: f64 = 1e-10;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} is outside [0, 1]")))
    }
}

/// `C_theta(u, v)` with argument and parameter validation.
pub fn cdf(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    spec.validate()?;
    check_unit("u", u)?;
    check_unit("v", v)?;
    Ok(cdf_generic(spec.family, spec.theta, u, v))
}

/// `C_theta(u, v)` over any [`Real`] scalar, without validation.
///
/// The parameter must lie in the family's domain and `u`, `v` in `[0, 1]`.
/// Exact boundaries are short-circuited so that grounding and uniform margins
/// hold exactly.
pub fn cdf_generic<T: Real>(family: CopulaFamily, theta: T, u: T, v: T) -> T {
    let (uu, vv) = (u.val(), v.val());
    if uu <= 0.0 || vv <= 0.0 {
        return T::cst(0.0);
    }
    if uu >= 1.0 {
        return v;
    }
    if vv >= 1.0 {
        return u;
    }
    let one = T::cst(1.0);
    match family {
        CopulaFamily::Product => u * v,
        CopulaFamily::Fgm => u * v * (one + theta * (one - u) * (one - v)),
        CopulaFamily::Amh => u * v / (one - theta * (one - u) * (one - v)),
        CopulaFamily::Frank => frank(theta, u, v),
        CopulaFamily::Clayton => clayton(theta, u, v),
        CopulaFamily::Gumbel => gumbel(theta, u, v),
        CopulaFamily::Joe => joe(theta, u, v),
        CopulaFamily::Gaussian => gaussian(theta, u, v),
    }
}

fn frank<T: Real>(theta: T, u: T, v: T) -> T {
    let one = T::cst(1.0);
    let t = theta.val();
    if t.abs() < INDEPENDENCE_BAND {
        // first-order expansion in theta: FGM with theta / 2
        return u * v * (one + theta * 0.5 * (one - u) * (one - v));
    }
    if t < 0.0 {
        // C_{-t}(u, v) = u - C_t(u, 1 - v)
        return u - frank_positive(-theta, u, one - v);
    }
    frank_positive(theta, u, v)
}

/// Frank for `theta > 0`, written so that every exponential has a
/// non-positive argument:
/// `C = -ln(S / (1 - e^-t)) / t`,
/// `S = e^{-tu}(1 - e^{-t(1-u)}) + e^{-tv}(1 - e^{-tu})`.
fn frank_positive<T: Real>(theta: T, u: T, v: T) -> T {
    let one = T::cst(1.0);
    let s = (-theta * u).exp() * -(-theta * (one - u)).exp_m1()
        + (-theta * v).exp() * -(-theta * u).exp_m1();
    let d = -(-theta).exp_m1();
    -(s.ln() - d.ln()) / theta
}

fn clayton<T: Real>(theta: T, u: T, v: T) -> T {
    let t = theta.val();
    if t.abs() < INDEPENDENCE_BAND {
        return u * v * (theta * u.ln() * v.ln()).exp();
    }
    // base - 1 = (u^-t - 1) + (v^-t - 1)
    let base_m1 = (-theta * u.ln()).exp_m1() + (-theta * v.ln()).exp_m1();
    if base_m1.val() <= -1.0 {
        return T::cst(0.0);
    }
    (-base_m1.ln_1p() / theta).exp()
}

fn gumbel<T: Real>(theta: T, u: T, v: T) -> T {
    let x = -u.ln();
    let y = -v.ln();
    let a = (theta * x.ln()).exp() + (theta * y.ln()).exp();
    (-(a.ln() / theta).exp()).exp()
}

/// `ln A` for Joe's `A = ubar^t + vbar^t - ubar^t vbar^t`. The product form
/// `1 - (1 - ubar^t)(1 - vbar^t)` is accurate when `A` is near one; near the
/// upper corner it cancels to zero, so the sum form is used there.
fn joe_ln_a<T: Real>(theta: T, u: T, v: T) -> T {
    let lu = theta * (-u).ln_1p();
    let lv = theta * (-v).ln_1p();
    let (a, b) = (lu.exp(), lv.exp());
    if a.val() + b.val() < 0.5 {
        (a + b - a * b).ln()
    } else {
        (-(lu.exp_m1() * lv.exp_m1())).ln_1p()
    }
}

fn joe<T: Real>(theta: T, u: T, v: T) -> T {
    // 1 - A^{1/t}
    -(joe_ln_a(theta, u, v) / theta).exp_m1()
}

fn gaussian<T: Real>(theta: T, u: T, v: T) -> T {
    let rho = theta.val();
    let x = norm_ppf(u.val());
    let y = norm_ppf(v.val());
    let value = bvn_cdf(x, y, rho);
    let s = ((1.0 - rho) * (1.0 + rho)).sqrt();
    let du = norm_cdf((y - rho * x) / s);
    let dv = norm_cdf((x - rho * y) / s);
    let drho = bvn_pdf(x, y, rho);
    T::custom(value, &[(u, du), (v, dv), (theta, drho)])
}

/// `dC/du (u, v)`: the conditional CDF of `V` given `U = u`.
pub fn partial_u(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    spec.validate()?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Boundary(u));
    }
    check_unit("v", v)?;
    Ok(partial_u_unchecked(spec.family, spec.theta, u, v))
}

pub(crate) fn partial_u_unchecked(family: CopulaFamily, theta: f64, u: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v >= 1.0 {
        return 1.0;
    }
    let value = match family {
        CopulaFamily::Product => v,
        CopulaFamily::Fgm => v * (1.0 + theta * (1.0 - v) * (1.0 - 2.0 * u)),
        CopulaFamily::Amh => {
            let d = 1.0 - theta * (1.0 - u) * (1.0 - v);
            v * (1.0 - theta * (1.0 - v)) / (d * d)
        }
        CopulaFamily::Frank => {
            if theta.abs() < INDEPENDENCE_BAND {
                v + 0.5 * theta * v * (1.0 - v) * (1.0 - 2.0 * u)
            } else if theta < 0.0 {
                1.0 - frank_partial_positive(-theta, u, 1.0 - v)
            } else {
                frank_partial_positive(theta, u, v)
            }
        }
        CopulaFamily::Clayton => {
            let (lu, lv) = (u.ln(), v.ln());
            if theta.abs() < INDEPENDENCE_BAND {
                v * (theta * lu * lv).exp() * (1.0 + theta * lv)
            } else {
                let base_m1 = (-theta * lu).exp_m1() + (-theta * lv).exp_m1();
                if base_m1 <= -1.0 {
                    0.0
                } else {
                    ((-theta - 1.0) * lu + (-1.0 / theta - 1.0) * base_m1.ln_1p()).exp()
                }
            }
        }
        CopulaFamily::Gumbel => {
            let x = -u.ln();
            let y = -v.ln();
            let a = x.powf(theta) + y.powf(theta);
            let c = (-a.powf(1.0 / theta)).exp();
            c * a.powf(1.0 / theta - 1.0) * x.powf(theta - 1.0) / u
        }
        CopulaFamily::Joe => {
            let ub = 1.0 - u;
            let vb = 1.0 - v;
            let ln_a = joe_ln_a(theta, u, v);
            (ln_a * (1.0 / theta - 1.0)).exp() * ub.powf(theta - 1.0) * (1.0 - vb.powf(theta))
        }
        CopulaFamily::Gaussian => {
            let x = norm_ppf(u);
            let y = norm_ppf(v);
            let s = ((1.0 - theta) * (1.0 + theta)).sqrt();
            norm_cdf((y - theta * x) / s)
        }
    };
    value.clamp(0.0, 1.0)
}

fn frank_partial_positive(theta: f64, u: f64, v: f64) -> f64 {
    let s = (-theta * u).exp() * -(-theta * (1.0 - u)).exp_m1()
        + (-theta * v).exp() * -(-theta * u).exp_m1();
    (-theta * u).exp() * -(-theta * v).exp_m1() / s
}

/// Copula mass of the rectangle `[u1, u2] x [v1, v2]`.
///
/// Rounding-level negatives (above `-1e-10`) are clamped to zero; anything
/// more negative means the 2-increasing property was violated and is
/// reported as an error.
pub fn rectangle_mass(spec: &CopulaSpec, u1: f64, u2: f64, v1: f64, v2: f64) -> Result<f64> {
    spec.validate()?;
    for (name, x) in [("u1", u1), ("u2", u2), ("v1", v1), ("v2", v2)] {
        check_unit(name, x)?;
    }
    if u1 > u2 || v1 > v2 {
        return Err(Error::Domain(format!(
            "rectangle bounds out of order: [{u1}, {u2}] x [{v1}, {v2}]"
        )));
    }
    let c = |a, b| cdf_generic(spec.family, spec.theta, a, b);
    let mass = c(u2, v2) - c(u2, v1) - c(u1, v2) + c(u1, v1);
    if mass < -RECT_TOLERANCE {
        return Err(Error::Consistency(format!(
            "{} rectangle mass {mass} < 0 on [{u1}, {u2}] x [{v1}, {v2}] (theta = {})",
            spec.family, spec.theta
        )));
    }
    Ok(mass.clamp(0.0, 1.0))
}

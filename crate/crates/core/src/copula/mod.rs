//! Closed-form bivariate copula families.
//!
//! Each family couples two uniform margins through a single dependence
//! parameter `theta`. Gaussian, Frank, AMH and FGM admit both signs of
//! dependence; Clayton (on its positive branch), Gumbel and Joe are positive
//! only. `Product` is the independence copula `C(u, v) = uv`.

mod cdf;
mod sample;
mod tau;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Interval, Result};

pub use cdf::{cdf, cdf_generic, partial_u, rectangle_mass, RECT_TOLERANCE};
pub use sample::{sample_pair, sample_pairs};
pub use tau::kendall_tau;

/// Half-width of the band around an independence point in which the limit
/// form is evaluated instead of the closed form.
pub const INDEPENDENCE_BAND: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Gaussian,
    Clayton,
    Gumbel,
    Joe,
    Amh,
    Frank,
    Fgm,
    Product,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 8] = [
        CopulaFamily::Gaussian,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Joe,
        CopulaFamily::Amh,
        CopulaFamily::Frank,
        CopulaFamily::Fgm,
        CopulaFamily::Product,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Joe => "joe",
            CopulaFamily::Amh => "amh",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Fgm => "fgm",
            CopulaFamily::Product => "product",
        }
    }

    /// Legal parameter range. Product has no parameter; its interval is `{0}`.
    pub fn domain(&self) -> Interval {
        const INF: f64 = f64::INFINITY;
        match self {
            CopulaFamily::Gaussian => Interval::new(-1.0, 1.0, false, false),
            CopulaFamily::Clayton => Interval::new(-1.0, INF, true, false),
            CopulaFamily::Gumbel => Interval::new(1.0, INF, true, false),
            CopulaFamily::Joe => Interval::new(1.0, INF, true, false),
            CopulaFamily::Amh => Interval::new(-1.0, 1.0, true, true),
            CopulaFamily::Frank => Interval::new(-INF, INF, false, false),
            CopulaFamily::Fgm => Interval::new(-1.0, 1.0, true, true),
            CopulaFamily::Product => Interval::new(0.0, 0.0, true, true),
        }
    }

    /// The parameter value at which the family reduces to independence.
    pub fn independence_theta(&self) -> f64 {
        match self {
            CopulaFamily::Gumbel | CopulaFamily::Joe => 1.0,
            _ => 0.0,
        }
    }

    /// Whether the family can express negative dependence.
    pub fn admits_negative(&self) -> bool {
        matches!(
            self,
            CopulaFamily::Gaussian | CopulaFamily::Frank | CopulaFamily::Amh | CopulaFamily::Fgm
        )
    }

    pub fn has_parameter(&self) -> bool {
        !matches!(self, CopulaFamily::Product)
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CopulaFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let legal: Vec<&str> = CopulaFamily::ALL.iter().map(|f| f.name()).collect();
                Error::Domain(format!(
                    "unknown copula family '{s}'; legal families: {}",
                    legal.join(", ")
                ))
            })
    }
}

/// Outcome of a successful parameter check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaCheck {
    Interior,
    /// At (or within the numerical band of) the independence point; evaluated
    /// through its limit.
    IndependenceLimit,
}

pub fn validate_theta(family: CopulaFamily, theta: f64) -> Result<ThetaCheck> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!(
            "{family} parameter must be finite, got {theta}"
        )));
    }
    let domain = family.domain();
    if !domain.contains(theta) {
        return Err(Error::ThetaOutOfDomain {
            family,
            theta,
            interval: domain,
        });
    }
    let near = (theta - family.independence_theta()).abs() < INDEPENDENCE_BAND;
    if family == CopulaFamily::Product || near {
        Ok(ThetaCheck::IndependenceLimit)
    } else {
        Ok(ThetaCheck::Interior)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    #[serde(default)]
    pub theta: f64,
}

impl CopulaSpec {
    /// Builds a validated spec.
    pub fn new(family: CopulaFamily, theta: f64) -> Result<Self> {
        validate_theta(family, theta)?;
        Ok(Self { family, theta })
    }

    pub fn product() -> Self {
        Self {
            family: CopulaFamily::Product,
            theta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<ThetaCheck> {
        validate_theta(self.family, self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fgm_outside_unit_interval_is_rejected_with_interval() {
        match validate_theta(CopulaFamily::Fgm, 1.3) {
            Err(Error::ThetaOutOfDomain { interval, .. }) => {
                assert_eq!(interval, Interval::new(-1.0, 1.0, true, true));
                assert_eq!(interval.to_string(), "[-1, 1]");
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn frank_estimate_from_pedestrian_table_is_legal() {
        assert_eq!(
            validate_theta(CopulaFamily::Frank, -0.613).unwrap(),
            ThetaCheck::Interior
        );
    }

    #[test]
    fn gumbel_at_one_is_independence() {
        assert_eq!(
            validate_theta(CopulaFamily::Gumbel, 1.0).unwrap(),
            ThetaCheck::IndependenceLimit
        );
        assert!(validate_theta(CopulaFamily::Gumbel, 0.99).is_err());
    }

    #[test]
    fn non_finite_theta_is_a_domain_error() {
        assert!(matches!(
            validate_theta(CopulaFamily::Clayton, f64::NAN),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            validate_theta(CopulaFamily::Frank, f64::INFINITY),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn boundaries() {
        assert!(validate_theta(CopulaFamily::Gaussian, 1.0).is_err());
        assert!(validate_theta(CopulaFamily::Gaussian, -0.999).is_ok());
        assert!(validate_theta(CopulaFamily::Clayton, -1.0).is_ok());
        assert!(validate_theta(CopulaFamily::Clayton, -1.01).is_err());
        assert!(validate_theta(CopulaFamily::Amh, 1.0).is_ok());
        assert!(validate_theta(CopulaFamily::Product, 0.3).is_err());
        assert_eq!(
            validate_theta(CopulaFamily::Frank, 0.0).unwrap(),
            ThetaCheck::IndependenceLimit
        );
    }

    #[test]
    fn parse_family_names() {
        assert_eq!("Frank".parse::<CopulaFamily>().unwrap(), CopulaFamily::Frank);
        let err = "student".parse::<CopulaFamily>().unwrap_err().to_string();
        assert!(err.contains("gaussian") && err.contains("product"));
    }
}

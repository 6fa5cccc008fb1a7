//! Concave carrier functions of the GEL criterion.
//!
//! Every carrier is normalised so that `rho(0) = 0` and `rho'(0) = rho''(0) = -1`.
//! The Cressie-Read family `-(1 + g v)^{(g+1)/g} / (g+1)` contains EL (`g = -1`),
//! ET (`g -> 0`) and CUE (`g = 1`) up to the additive constant removed by the
//! normalisation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cressie-Read exponents closer than this to 0 or -1 are treated as the ET or EL limit.
const CR_LIMIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "gamma", rename_all = "snake_case")]
pub enum CarrierFamily {
    /// Empirical likelihood, `ln(1 - v)` on `(-inf, 1)`.
    El,
    /// Exponential tilting, `-exp(v)`.
    Et,
    /// Continuous updating, `-v^2/2 - v`.
    Cue,
    CressieRead(f64),
}

impl CarrierFamily {
    /// Collapse Cressie-Read exponents at the EL/ET limits onto the closed forms.
    pub fn canonical(self) -> Self {
        match self {
            CarrierFamily::CressieRead(g) if g.abs() < CR_LIMIT_TOL => CarrierFamily::Et,
            CarrierFamily::CressieRead(g) if (g + 1.0).abs() < CR_LIMIT_TOL => CarrierFamily::El,
            other => other,
        }
    }

    /// Open interval `(lo, hi)` on which the carrier is defined.
    pub fn domain(self) -> (f64, f64) {
        match self.canonical() {
            CarrierFamily::El => (f64::NEG_INFINITY, 1.0),
            CarrierFamily::Et | CarrierFamily::Cue => (f64::NEG_INFINITY, f64::INFINITY),
            CarrierFamily::CressieRead(g) => {
                if g > 0.0 {
                    (-1.0 / g, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, -1.0 / g)
                }
            }
        }
    }

    pub fn in_domain(self, v: f64) -> bool {
        let (lo, hi) = self.domain();
        v > lo && v < hi && v.is_finite()
    }

    /// Distance from `v` to the nearest finite end of the domain.
    pub fn boundary_distance(self, v: f64) -> f64 {
        let (lo, hi) = self.domain();
        (v - lo).min(hi - v)
    }

    /// `j`-th derivative of the normalised carrier at `v`, `j` in `0..=3`.
    pub fn derivative(self, v: f64, j: usize) -> Result<f64> {
        if j > 3 {
            return Err(Error::Unsupported(format!(
                "carrier derivative of order {j}"
            )));
        }
        if !self.in_domain(v) {
            return Err(Error::Domain {
                v,
                family: self.to_string(),
            });
        }
        Ok(self.derivative_unchecked(v, j))
    }

    /// Same as [`derivative`](Self::derivative) without the domain check.
    #[inline]
    pub(crate) fn derivative_unchecked(self, v: f64, j: usize) -> f64 {
        match self.canonical() {
            CarrierFamily::El => {
                let w = 1.0 - v;
                match j {
                    0 => w.ln(),
                    1 => -1.0 / w,
                    2 => -1.0 / (w * w),
                    _ => -2.0 / (w * w * w),
                }
            }
            CarrierFamily::Et => {
                let e = v.exp();
                match j {
                    0 => 1.0 - e,
                    _ => -e,
                }
            }
            CarrierFamily::Cue => match j {
                0 => -0.5 * v * v - v,
                1 => -1.0 - v,
                2 => -1.0,
                _ => 0.0,
            },
            CarrierFamily::CressieRead(g) => {
                // powers of 1 + g v through ln_1p so exponents near zero keep full precision
                let l = (g * v).ln_1p();
                let pow = |e: f64| (e * l).exp();
                match j {
                    0 => -((g + 1.0) / g * l).exp_m1() / (g + 1.0),
                    1 => -pow(1.0 / g),
                    2 => -pow(1.0 / g - 1.0),
                    _ => -(1.0 - g) * pow(1.0 / g - 2.0),
                }
            }
        }
    }

    /// Third derivative at zero.
    pub fn rho3(self) -> f64 {
        self.derivative_unchecked(0.0, 3)
    }

    /// `1 + rho_3 / 2`; zero for EL.
    pub fn c_rho(self) -> f64 {
        1.0 + 0.5 * self.rho3()
    }

    /// Parse `el`, `et`, `cue` or `cr:<gamma>`.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "el" => Ok(CarrierFamily::El),
            "et" => Ok(CarrierFamily::Et),
            "cue" => Ok(CarrierFamily::Cue),
            other => {
                let gamma = other
                    .strip_prefix("cr:")
                    .and_then(|g| g.parse::<f64>().ok())
                    .filter(|g| g.is_finite())
                    .ok_or_else(|| Error::invalid(format!("unknown carrier family '{s}'")))?;
                Ok(CarrierFamily::CressieRead(gamma))
            }
        }
    }
}

impl fmt::Display for CarrierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CarrierFamily::El => write!(f, "EL"),
            CarrierFamily::Et => write!(f, "ET"),
            CarrierFamily::Cue => write!(f, "CUE"),
            CarrierFamily::CressieRead(g) => write!(f, "CR({g})"),
        }
    }
}

/// Free-function form of [`CarrierFamily::derivative`].
pub fn carrier_derivative(family: CarrierFamily, v: f64, j: usize) -> Result<f64> {
    family.derivative(v, j)
}

/// Free-function form of [`CarrierFamily::c_rho`].
pub fn c_rho(family: CarrierFamily) -> f64 {
    family.c_rho()
}

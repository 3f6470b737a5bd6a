//! Slope-limited MUSCL extrapolation on 1D grids.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Slope limiter `φ(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limiter {
    /// Unlimited centered slope `φ(r) = (1 + r)/2`.
    Centered,
    /// `φ ≡ 0`, the first-order scheme.
    FirstOrder,
    /// `φ_k(r) = min((1 + r)/2, 2k min(1, r))` for `r > 0`, zero otherwise.
    Family(f64),
}

impl Limiter {
    pub const MINMOD_K: f64 = 0.5;
    pub const STS_K: f64 = 0.75;
    pub const TOWARDS4_K: f64 = 1.0;

    pub fn minmod() -> Self {
        Limiter::Family(Self::MINMOD_K)
    }

    pub fn sts() -> Self {
        Limiter::Family(Self::STS_K)
    }

    pub fn towards4() -> Self {
        Limiter::Family(Self::TOWARDS4_K)
    }

    /// Parses `none|firstorder|minmod|sts|towards4`.
    pub fn parse(token: &str) -> Result<Self> {
        match token.trim() {
            "none" => Ok(Limiter::Centered),
            "firstorder" => Ok(Limiter::FirstOrder),
            "minmod" => Ok(Limiter::minmod()),
            "sts" => Ok(Limiter::sts()),
            "towards4" => Ok(Limiter::towards4()),
            other => Err(Error::Config(format!("unknown limiter '{other}'"))),
        }
    }

    /// Strength `k` for the limited kinds.
    pub fn k(&self) -> Option<f64> {
        match self {
            Limiter::Family(k) => Some(*k),
            _ => None,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Limiter::Centered => 0.5 * (1.0 + r),
            Limiter::FirstOrder => 0.0,
            Limiter::Family(k) => {
                if r > 0.0 {
                    (0.5 * (1.0 + r)).min(2.0 * k * r.min(1.0))
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Limiter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limiter::Centered => write!(f, "none"),
            Limiter::FirstOrder => write!(f, "firstorder"),
            Limiter::Family(k) if *k == Self::MINMOD_K => write!(f, "minmod"),
            Limiter::Family(k) if *k == Self::STS_K => write!(f, "sts"),
            Limiter::Family(k) if *k == Self::TOWARDS4_K => write!(f, "towards4"),
            Limiter::Family(k) => write!(f, "k={k}"),
        }
    }
}

/// The STS limiter written piecewise.
pub fn sts_piecewise(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if r <= 0.5 {
        1.5 * r
    } else if r <= 2.0 {
        0.5 * (1.0 + r)
    } else {
        1.5
    }
}

/// Values on both sides of the interface between cells `m` and `p`, given the next
/// cells `mm` and `pp` outward.
pub fn muscl_extrapolate(z_mm: f64, z_m: f64, z_p: f64, z_pp: f64, lim: Limiter) -> (f64, f64) {
    let delta = z_p - z_m;
    if delta == 0.0 || lim == Limiter::FirstOrder {
        return (z_m, z_p);
    }
    let rm = (z_m - z_mm) / delta;
    let rp = (z_pp - z_p) / delta;
    (
        z_m + 0.5 * lim.value(rm) * delta,
        z_p - 0.5 * lim.value(rp) * delta,
    )
}

/// Amplification factor of the unlimited MUSCL scheme with explicit Euler stepping.
pub fn amplification_factor(xi: f64, sigma: f64) -> Complex64 {
    let c = xi.cos();
    Complex64::new(
        1.0 - 0.5 * sigma * (1.0 - c) * (1.0 - c),
        -0.5 * sigma * xi.sin() * (3.0 - c),
    )
}

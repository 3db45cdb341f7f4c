use std::f64::consts::{PI, TAU};

use super::{AntipodalPolicy, ANTIPODAL_TOL};
use crate::error::{Error, Result};

/// Reduces an angle to (−π, π].
pub(crate) fn canonical(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub(crate) fn dist(a: f64, b: f64) -> f64 {
    canonical(b - a).abs()
}

pub(crate) fn log(base: f64, target: f64, policy: AntipodalPolicy) -> Result<f64> {
    let d = canonical(target - base);
    if PI - d.abs() < ANTIPODAL_TOL {
        return match policy {
            AntipodalPolicy::Error => Err(Error::AntipodalPoint),
            AntipodalPolicy::DeterministicPositive => Ok(PI),
        };
    }
    Ok(d)
}

/// `a − b` reduced to (−π, π].
pub(crate) fn signed_diff(a: f64, b: f64) -> f64 {
    canonical(a - b)
}

use super::binomial::binomial_sf;
use super::{check_eta, check_unit, FRACTION_TOL};
use crate::error::{invalid, Error, Result};

/// Acquisition share when saturation is ignored: `eta*beta / (eta*beta + 1 - beta)`.
pub fn naive_rho(beta: f64, eta: f64) -> Result<f64> {
    check_unit("beta", beta)?;
    check_eta(eta)?;
    Ok(naive_rho_unchecked(beta, eta))
}

pub(crate) fn naive_rho_unchecked(beta: f64, eta: f64) -> f64 {
    if beta <= 0.0 {
        0.0
    } else if beta >= 1.0 {
        1.0
    } else {
        let slowed = eta * beta;
        slowed / (slowed + 1.0 - beta)
    }
}

/// Splits `population` into `(disadvantaged, advantaged)` integer counts,
/// rounding `beta * population` to the nearest integer.
pub fn saturation_split(population: u64, beta: f64) -> (u64, u64) {
    let disadvantaged = ((beta * population as f64).round() as u64).min(population);
    (disadvantaged, population - disadvantaged)
}

/// Expected share of `resources` units acquired by the disadvantaged when
/// both subpopulations can saturate.
///
/// Subpopulation sizes are integers: `beta * population` is rounded and the
/// rates use the rounded split.
pub fn exact_rho(resources: u64, population: u64, beta: f64, eta: f64) -> Result<f64> {
    check_unit("beta", beta)?;
    check_eta(eta)?;
    if resources == 0 {
        return Err(invalid("resources", "must be at least 1"));
    }
    if resources > population {
        return Err(Error::NoWaste {
            allocated: resources as f64,
            population: population as f64,
        });
    }
    let (dis, adv) = saturation_split(population, beta);
    let rho0 = naive_rho_unchecked(dis as f64 / population as f64, eta);
    let n = resources as f64;
    let (dis_i, adv_i) = (dis as i64, adv as i64);

    let rho = rho0 - rho0 * binomial_sf(dis_i - 1, resources - 1, rho0)
        + dis as f64 / n * binomial_sf(dis_i, resources, rho0)
        + (1.0 - rho0) * binomial_sf(adv_i - 1, resources - 1, 1.0 - rho0)
        - adv as f64 / n * binomial_sf(adv_i, resources, 1.0 - rho0);

    // saturation caps
    let lower = ((n - adv as f64) / n).max(0.0);
    let upper = (dis as f64 / n).min(1.0);
    Ok(rho.clamp(lower, upper))
}

/// Two-regime approximation of the acquisition share, driven by the
/// coverage ratio `alpha * n / p` only.
///
/// At `n = 0` the saturation branch diverges to minus infinity and the
/// naive share is returned.
pub fn approx_rho(n: f64, p: f64, alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(invalid("p", format!("{p} must be positive")));
    }
    if !(n >= 0.0) {
        return Err(invalid("n", format!("{n} must be nonnegative")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} is not in (0, 1)")));
    }
    let rho0 = naive_rho(beta, eta)?;
    let coverage = alpha * n / p;
    if coverage > 1.0 + FRACTION_TOL {
        return Err(Error::NoWaste {
            allocated: alpha * n,
            population: p,
        });
    }
    Ok(approx_rho_unchecked(coverage, beta, rho0))
}

/// `max(rho0, 1 - (1 - beta) / coverage)` with the `coverage = 0` convention.
pub(crate) fn approx_rho_unchecked(coverage: f64, beta: f64, rho0: f64) -> f64 {
    if coverage <= 0.0 {
        return rho0;
    }
    rho0.max(1.0 - (1.0 - beta) / coverage).min(1.0)
}

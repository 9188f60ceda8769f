//! Binomial tail probabilities.
//!
//! Terms are summed relative to the largest one in the tail, with the
//! leading term evaluated in log space, so no factorial is ever formed.

use statrs::function::factorial::ln_binomial;

/// Survival function `P(X > k)` for `X ~ Binomial(trials, q)`.
///
/// `k` may be negative, in which case the probability is 1.
pub fn binomial_sf(k: i64, trials: u64, q: f64) -> f64 {
    if k < 0 {
        return 1.0;
    }
    let k = k as u64;
    if k >= trials {
        return 0.0;
    }
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let mean = trials as f64 * q;
    if (k + 1) as f64 >= mean {
        tail_sum(trials, q, k + 1, true).min(1.0)
    } else {
        (1.0 - tail_sum(trials, q, k, false)).max(0.0)
    }
}

/// Cumulative distribution `P(X <= k)`.
pub fn binomial_cdf(k: i64, trials: u64, q: f64) -> f64 {
    1.0 - binomial_sf(k, trials, q)
}

fn ln_pmf(i: u64, trials: u64, q: f64) -> f64 {
    ln_binomial(trials, i) + i as f64 * q.ln() + (trials - i) as f64 * (-q).ln_1p()
}

/// Sums `pmf(start) + pmf(start +/- 1) + ...` away from the mode.
///
/// `start` sits at or past the mode in the direction of travel (up to one
/// step before it), so the terms shrink geometrically and the sum can stop
/// once they no longer register.
fn tail_sum(trials: u64, q: f64, start: u64, upward: bool) -> f64 {
    let odds = q / (1.0 - q);
    let lead = ln_pmf(start, trials, q);
    if lead < -745.0 {
        return 0.0;
    }
    let mode = ((trials + 1) as f64 * q).floor() as u64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut i = start;
    loop {
        if upward {
            if i >= trials {
                break;
            }
            term *= (trials - i) as f64 / (i + 1) as f64 * odds;
            i += 1;
        } else {
            if i == 0 {
                break;
            }
            term *= i as f64 / (trials - i + 1) as f64 / odds;
            i -= 1;
        }
        sum += term;
        let past_mode = if upward { i > mode } else { i < mode };
        if past_mode && term <= sum * 1e-18 {
            break;
        }
    }
    (lead + sum.ln()).exp()
}

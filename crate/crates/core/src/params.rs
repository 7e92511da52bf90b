//! Closed-form constants of the mass ratio and the critical-mass solves.
//!
//! The system is two identical fermions of mass one plus a third particle of
//! mass `m`. Everything downstream (channel kernels, level sets, counting
//! asymptotics) is driven by the handful of constants collected here.

use crate::error::{domain, Result};
use crate::roots::bisect_then_secant;
use serde::Serialize;
use std::f64::consts::PI;

/// Mass ratio together with every derived closed-form constant.
///
/// * `mu`      — reduced mass m/(m+1) of a fermion/third-particle pair
/// * `n_red`   — reduced mass (m+1)/(m+2) of a pair against the remaining fermion
/// * `b`       — kernel strength (1/4pi^2) (m+1)/sqrt(m(m+2))
/// * `c_norm`  — resonance normalization 2^(5/2) pi^2 (m/(m+1))^(3/2)
/// * `lambda_m` — spectral threshold function Lambda(m); Lambda(m*) = 1
/// * `alpha`, `beta` — amplitude and decay rate of the exponential symbol bound
/// * `l0`      — largest odd channel whose bound can cross the Efimov threshold,
///   i.e. the largest odd integer below pi*alpha^2 - 1/2, or -1 if none
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassParams {
    pub m: f64,
    pub mu: f64,
    pub n_red: f64,
    pub b: f64,
    pub c_norm: f64,
    pub lambda_m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub l0: i64,
}

/// Lambda(m) = (2(m+1)^2/pi) (1/sqrt(m(m+2)) - arcsin(1/(m+1))).
///
/// Strictly decreasing, with Lambda -> +inf as m -> 0 and -> 0 as m -> inf.
/// The critical mass is the unique solution of Lambda(m) = 1.
pub fn lambda_of(m: f64) -> f64 {
    let s = (m * (m + 2.0)).sqrt();
    let asin_arg = (1.0 / (m + 1.0)).clamp(-1.0, 1.0);
    2.0 * (m + 1.0) * (m + 1.0) / PI * (1.0 / s - asin_arg.asin())
}

/// Largest odd integer strictly smaller than `g`, or -1 when no odd
/// integer >= 1 qualifies. Ties (g exactly odd) go to the smaller odd.
pub(crate) fn largest_odd_below(g: f64) -> i64 {
    if !g.is_finite() || g <= 1.0 {
        return -1;
    }
    let f = ((g - 1.0) / 2.0).floor();
    let mut l = 2.0 * f + 1.0;
    if l >= g {
        l -= 2.0;
    }
    if l >= 1.0 {
        l as i64
    } else {
        -1
    }
}

/// Populate every derived constant for mass ratio `m > 0`.
pub fn make_params(m: f64) -> Result<MassParams> {
    if !m.is_finite() || m <= 0.0 {
        return Err(domain(format!("mass ratio must be positive and finite, got {m}")));
    }
    let mu = m / (m + 1.0);
    let n_red = (m + 1.0) / (m + 2.0);
    let root_m_m2 = (m * (m + 2.0)).sqrt();
    let b = (m + 1.0) / (4.0 * PI * PI * root_m_m2);
    let c_norm = 2.0f64.powf(2.5) * PI * PI * mu.powf(1.5);
    let lambda_m = lambda_of(m);
    let alpha =
        (m + 1.0).powf(1.5) / (2.0 * PI.sqrt() * root_m_m2) * (1.0 + 2.0 / m).ln().sqrt();
    let asin_arg = (1.0 / (m + 1.0)).clamp(-1.0, 1.0);
    let beta = PI / 2.0 - asin_arg.asin();
    let l0 = largest_odd_below(PI * alpha * alpha - 0.5);
    Ok(MassParams {
        m,
        mu,
        n_red,
        b,
        c_norm,
        lambda_m,
        alpha,
        beta,
        l0,
    })
}

/// The critical mass ratio m*: the unique solution of Lambda(m) = 1.
///
/// Lambda is strictly decreasing with limits +inf at 0 and 0 at infinity, so
/// the bracket [1e-6, 10] always straddles the root.
pub fn critical_mass() -> f64 {
    bisect_then_secant(|m| lambda_of(m) - 1.0, 1e-6, 10.0, 1e-14)
        .expect("Lambda(m) - 1 changes sign on [1e-6, 10]")
}

/// Search cutoff K_l(m) = (1/beta) log(sqrt(2 pi) alpha / sqrt(2l+1)):
/// beyond this k the exponential bound already puts the odd-channel symbol
/// below the Efimov threshold 1/sqrt(2 pi).
pub fn channel_cutoff_k(params: &MassParams, l: i64) -> Result<f64> {
    if l % 2 == 0 {
        return Err(domain(format!("channel cutoff requires odd l, got {l}")));
    }
    if l < 1 {
        return Err(domain(format!("channel cutoff requires l >= 1, got {l}")));
    }
    if l > params.l0 {
        return Err(domain(format!(
            "channel cutoff requires l <= l0 = {}, got {l}",
            params.l0
        )));
    }
    let ratio = (2.0 * PI).sqrt() * params.alpha / ((2 * l + 1) as f64).sqrt();
    Ok(ratio.ln() / params.beta)
}

//! Angular-channel kernels and their Fourier symbols.
//!
//! The full interaction kernel on the log-radial half-line times the sphere is
//!
//! ```text
//! S(x, y) = -b(m) / (cosh x + y/(m+1)),   x in R, y = cos(angle) in [-1, 1]
//! ```
//!
//! Projecting onto the Legendre component of order `l` gives the difference
//! kernel of the channel operator,
//!
//! ```text
//! S_l(x) = -2 pi b(m) int_{-1}^{1} P_l(y) / (cosh x + y/(m+1)) dy,
//! ```
//!
//! whose Fourier transform has the closed form (odd l shown; even l carries a
//! cosh ratio and an overall minus sign)
//!
//! ```text
//! Shat_l(k) = (1/sqrt(2 pi)) (m+1)/sqrt(m(m+2))
//!             int_0^1 P_l(y) sinh(k asin(y/(m+1)))
//!                      / (sinh(k pi/2) cos(asin(y/(m+1)))) dy.
//! ```
//!
//! Level sets of `Shat_l` drive every eigenvalue-counting result in this
//! crate, so the evaluators here are cross-checked in the test suite against
//! a direct numerical Fourier transform of `S_l`.

use crate::error::{domain, Result};
use crate::params::MassParams;
use crate::quadrature::GaussLegendre;
use std::f64::consts::PI;

/// Legendre polynomial P_l(y) by upward three-term recurrence.
///
/// Stable for |y| <= 1; returns a domain error outside.
pub fn legendre(l: u32, y: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(domain(format!("Legendre argument must satisfy |y| <= 1, got {y}")));
    }
    Ok(legendre_raw(l, y))
}

/// Recurrence core without the domain check, for quadrature hot loops whose
/// nodes are inside [-1, 1] by construction.
pub(crate) fn legendre_raw(l: u32, y: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    if l == 1 {
        return y;
    }
    let mut p_prev = 1.0;
    let mut p_curr = y;
    for k in 1..l {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * y * p_curr - kf * p_prev) / (kf + 1.0);
        p_prev = p_curr;
        p_curr = p_next;
    }
    p_curr
}

/// Full-angle kernel S(x, y) = -b(m)/(cosh x + y/(m+1)).
///
/// The denominator is at least m/(m+1) > 0, so the value is always negative.
pub fn kernel_full(params: &MassParams, x: f64, y: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(domain(format!("angular argument must satisfy |y| <= 1, got {y}")));
    }
    Ok(-params.b / (x.cosh() + y / (params.m + 1.0)))
}

/// Evaluator for one angular channel: the kernel S_l(x) and its Fourier
/// symbol Shat_l(k), sharing a Gauss-Legendre rule of fixed order.
#[derive(Debug, Clone)]
pub struct ChannelSymbol {
    params: MassParams,
    l: u32,
    rule: GaussLegendre,
}

impl ChannelSymbol {
    /// Default rule order max(64, 4(l+1)): enough to integrate P_l exactly
    /// against the smooth weight with a wide margin.
    pub fn new(params: MassParams, l: u32) -> Self {
        let order = 64.max(4 * (l as usize + 1));
        Self::with_order(params, l, order).expect("default order satisfies the minimum")
    }

    /// Same, with an explicit quadrature order (must be >= 2(l+1) so that the
    /// Legendre factor is resolved exactly).
    pub fn with_order(params: MassParams, l: u32, order: usize) -> Result<Self> {
        if order < 2 * (l as usize + 1) {
            return Err(domain(format!(
                "quadrature order {order} too small for channel l={l}; need at least {}",
                2 * (l + 1)
            )));
        }
        Ok(Self {
            params,
            l,
            rule: GaussLegendre::new(order),
        })
    }

    pub fn params(&self) -> &MassParams {
        &self.params
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order()
    }

    /// Channel kernel S_l(x) = -2 pi b int_{-1}^{1} P_l(y)/(cosh x + y/(m+1)) dy.
    ///
    /// Even in x. The y-integrand has a pole just left of y = -1 when x is
    /// near 0 and m is small; panels are bisected whenever the denominator
    /// dips below 0.1 and the panel is wide relative to the pole distance.
    pub fn kernel(&self, x: f64) -> f64 {
        let m = self.params.m;
        let l = self.l;
        let cosh_x = x.cosh();
        let inv_mp1 = 1.0 / (m + 1.0);
        let f = |y: f64| legendre_raw(l, y) / (cosh_x + y * inv_mp1);
        let needs_split = |lo: f64, hi: f64| {
            let min_denom = cosh_x + lo * inv_mp1;
            min_denom < 0.1 && (hi - lo) > (m + 1.0) * min_denom
        };
        let integral = self.rule.integrate_adaptive(-1.0, 1.0, &f, &needs_split);
        -2.0 * PI * self.params.b * integral
    }

    /// Fourier symbol Shat_l(k). Even in k; the k = 0 value uses the exact
    /// limit of the hyperbolic ratio instead of small-k extrapolation.
    pub fn symbol(&self, k: f64) -> f64 {
        let k = k.abs();
        let m = self.params.m;
        let l = self.l;
        let inv_mp1 = 1.0 / (m + 1.0);
        let odd = l % 2 == 1;
        let f = |y: f64| {
            let a = (y * inv_mp1).clamp(-1.0, 1.0).asin();
            let cos_a = (1.0 - (y * inv_mp1) * (y * inv_mp1)).max(0.0).sqrt();
            let ratio = if odd {
                sinh_ratio(k, a)
            } else {
                cosh_ratio(k, a)
            };
            legendre_raw(l, y) * ratio / cos_a
        };
        // branch point of asin at y = m+1, just right of the interval
        let needs_split = |lo: f64, hi: f64| {
            let s = hi * inv_mp1;
            let cos_min = (1.0 - s * s).max(0.0).sqrt();
            cos_min < 0.1 && (hi - lo) > (m + 1.0 - hi)
        };
        let integral = self.rule.integrate_adaptive(0.0, 1.0, &f, &needs_split);
        let prefactor = (m + 1.0) / (m * (m + 2.0)).sqrt() / (2.0 * PI).sqrt();
        if odd {
            prefactor * integral
        } else {
            -prefactor * integral
        }
    }
}

/// sinh(k a)/sinh(k pi/2) in overflow-free form
/// exp(k(a - pi/2)) (1 - e^(-2ka))/(1 - e^(-k pi)); the a < pi/2 guarantee
/// makes the exponent negative. At k = 0 the limit is (2/pi) a.
fn sinh_ratio(k: f64, a: f64) -> f64 {
    if k == 0.0 {
        return 2.0 * a / PI;
    }
    (k * (a - PI / 2.0)).exp() * (-2.0 * k * a).exp_m1() / (-k * PI).exp_m1()
}

/// cosh(k a)/cosh(k pi/2) as exp(k(a - pi/2)) (1 + e^(-2ka))/(1 + e^(-k pi)).
/// At k = 0 the limit is 1.
fn cosh_ratio(k: f64, a: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    (k * (a - PI / 2.0)).exp() * (1.0 + (-2.0 * k * a).exp()) / (1.0 + (-k * PI).exp())
}

/// Rigorous odd-channel bound Shat_l(k) <= alpha(m) e^(-beta(m) k)/sqrt(2l+1).
pub fn symbol_upper_bound(params: &MassParams, l: i64, k: f64) -> Result<f64> {
    if l % 2 == 0 || l < 1 {
        return Err(domain(format!("symbol bound holds for odd l >= 1, got {l}")));
    }
    Ok(params.alpha * (-params.beta * k).exp() / ((2 * l + 1) as f64).sqrt())
}

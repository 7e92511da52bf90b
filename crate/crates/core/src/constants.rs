//! Level-set measures of the channel symbols, the Efimov constant C(m) with
//! its proven bounds, and the per-channel critical masses.
//!
//! For m below the critical mass the eigenvalue count N(z) of the three-body
//! problem grows like C(m) |log|z|| with
//!
//! ```text
//! C(m) = sum_{l odd} (2l+1)/(2 pi) |{k >= 0 : Shat_l(k) > 1/sqrt(2 pi)}|,
//! ```
//!
//! a sum that terminates exactly at l0(m) because the exponential bound puts
//! every higher channel below the threshold already at k = 0.

use crate::error::{domain, Result};
use crate::kernels::ChannelSymbol;
use crate::params::{make_params, MassParams};
use crate::roots::bisect_then_secant;
use serde::Serialize;
use std::f64::consts::PI;

/// Default spacing of the level-set scan grid.
pub const DEFAULT_SCAN_STEP: f64 = 0.01;
/// Bisection width for refining level-set boundaries.
const BOUNDARY_TOL: f64 = 1e-10;

/// The set {k >= 0 : Shat_l(k) > threshold} as disjoint intervals, together
/// with the scan parameters that produced it. Emptiness of the set is a
/// scan-based statement, not a theorem, which is why the scan cutoff and step
/// travel with the result.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSet {
    pub l: i64,
    pub threshold: f64,
    pub intervals: Vec<(f64, f64)>,
    pub measure: f64,
    pub scan_cutoff: f64,
    pub scan_step: f64,
}

/// One odd channel's share of C(m).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelContribution {
    pub l: i64,
    pub measure: f64,
    /// (2l+1)/(2 pi) times the measure.
    pub contribution: f64,
}

/// C(m) with its bounds and the per-channel breakdown. The channel sum is
/// truncated at `l_max_used` = l0(m); the truncation is exact, not an
/// approximation, because the k = 0 bound already fails for l > l0.
#[derive(Debug, Clone, Serialize)]
pub struct EfimovReport {
    pub m: f64,
    pub c_of_m: f64,
    pub c1: f64,
    pub c2: f64,
    pub per_channel: Vec<ChannelContribution>,
    pub l_max_used: i64,
}

fn efimov_threshold() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// Scan cutoff for a general threshold: beyond
/// (1/beta) log(alpha / (sqrt(2l+1) t)) the exponential bound puts the symbol
/// below `t`; clamped below by 1 so there is always a scanned window.
fn scan_cutoff(params: &MassParams, l: i64, threshold: f64) -> f64 {
    let ratio = params.alpha / (((2 * l + 1) as f64).sqrt() * threshold);
    (ratio.ln() / params.beta).max(1.0)
}

/// Compute {k in [0, cutoff] : Shat_l(k) > threshold} by a uniform scan with
/// sign-change bisection, never assuming a single interval (the k = 0 maximum
/// is only proven for l = 1).
pub fn level_set(params: &MassParams, l: i64, threshold: f64) -> Result<LevelSet> {
    level_set_with_scan(params, l, threshold, DEFAULT_SCAN_STEP, None)
}

/// `level_set` with explicit scan step and quadrature order, for robustness
/// studies and CLI overrides.
pub fn level_set_with_scan(
    params: &MassParams,
    l: i64,
    threshold: f64,
    max_step: f64,
    quad_order: Option<usize>,
) -> Result<LevelSet> {
    if l % 2 == 0 || l < 1 {
        return Err(domain(format!("level set is defined for odd l >= 1, got {l}")));
    }
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(domain(format!("threshold must be positive, got {threshold}")));
    }
    if !(max_step > 0.0) {
        return Err(domain(format!("scan step must be positive, got {max_step}")));
    }
    let sym = symbol_for(params, l, quad_order)?;
    let cutoff = scan_cutoff(params, l, threshold);
    let steps = (cutoff / max_step).ceil() as usize;
    let step = cutoff / steps as f64;

    let g = |k: f64| sym.symbol(k) - threshold;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut inside = g(0.0) > 0.0;
    let mut open_at = if inside { Some(0.0) } else { None };
    let mut prev_k = 0.0;
    for i in 1..=steps {
        let k = if i == steps { cutoff } else { i as f64 * step };
        let now_inside = g(k) > 0.0;
        if now_inside != inside {
            let crossing = refine_crossing(&g, prev_k, k);
            if now_inside {
                open_at = Some(crossing);
            } else {
                let lo = open_at.take().expect("crossing out of an open interval");
                intervals.push((lo, crossing));
            }
            inside = now_inside;
        }
        prev_k = k;
    }
    if let Some(lo) = open_at {
        // still above threshold at the cutoff (only possible up to the
        // refinement tolerance, since the bound equals the threshold there)
        intervals.push((lo, cutoff));
    }
    let measure = intervals.iter().map(|(lo, hi)| hi - lo).sum();
    Ok(LevelSet {
        l,
        threshold,
        intervals,
        measure,
        scan_cutoff: cutoff,
        scan_step: step,
    })
}

fn symbol_for(params: &MassParams, l: i64, quad_order: Option<usize>) -> Result<ChannelSymbol> {
    match quad_order {
        Some(order) => ChannelSymbol::with_order(*params, l as u32, order),
        None => Ok(ChannelSymbol::new(*params, l as u32)),
    }
}

/// Bisect a bracketed sign change of `g` down to `BOUNDARY_TOL`.
fn refine_crossing<F: Fn(f64) -> f64>(g: &F, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..64 {
        if hi - lo <= BOUNDARY_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gmid = g(mid);
        if gmid == 0.0 {
            return mid;
        }
        if (gmid > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// C(m) with bounds and per-channel contributions. Channels above l0
/// contribute exactly zero and are not scanned; the per-channel sum is
/// accumulated in ascending l for bitwise determinism.
pub fn efimov_constant(params: &MassParams) -> Result<EfimovReport> {
    efimov_constant_with_order(params, None)
}

pub fn efimov_constant_with_order(
    params: &MassParams,
    quad_order: Option<usize>,
) -> Result<EfimovReport> {
    let threshold = efimov_threshold();
    let mut per_channel = Vec::new();
    let mut c_of_m = 0.0;
    let mut l = 1;
    while l <= params.l0 {
        let set = level_set_with_scan(params, l, threshold, DEFAULT_SCAN_STEP, quad_order)?;
        let contribution = (2 * l + 1) as f64 / (2.0 * PI) * set.measure;
        c_of_m += contribution;
        per_channel.push(ChannelContribution {
            l,
            measure: set.measure,
            contribution,
        });
        l += 2;
    }
    Ok(EfimovReport {
        m: params.m,
        c_of_m,
        c1: lower_bound_c1_with_order(params, quad_order)?,
        c2: upper_bound_c2(params),
        per_channel,
        l_max_used: params.l0,
    })
}

/// Lower bound C1(m): the unique positive root of F_m(x) = 1, where
///
/// ```text
/// F_m(x) = (m+1)/sqrt(m(m+2)) int_0^1 y sinh((2 pi/3) x asin(y/(m+1)))
///            / (sinh((pi^2/3) x) cos(asin(y/(m+1)))) dy.
/// ```
///
/// F_m(0+) = Lambda(m) and F_m decreases to 0, so a positive root exists
/// exactly when Lambda(m) > 1; otherwise the bound is 0. F_m is evaluated
/// from its own closed form, not through `ChannelSymbol`, so the identity
/// C1 = (3/2 pi) k_1 stays a genuine cross-check between two routes.
pub fn lower_bound_c1(params: &MassParams) -> Result<f64> {
    lower_bound_c1_with_order(params, None)
}

pub fn lower_bound_c1_with_order(
    params: &MassParams,
    quad_order: Option<usize>,
) -> Result<f64> {
    if params.lambda_m <= 1.0 {
        return Ok(0.0);
    }
    let order = quad_order.unwrap_or(64);
    let rule = crate::quadrature::GaussLegendre::new(order.max(4));
    let m = params.m;
    let inv_mp1 = 1.0 / (m + 1.0);
    let prefactor = (m + 1.0) / (m * (m + 2.0)).sqrt();
    let f_m = |x: f64| -> f64 {
        let f = |y: f64| {
            let a = (y * inv_mp1).clamp(-1.0, 1.0).asin();
            let cos_a = (1.0 - (y * inv_mp1) * (y * inv_mp1)).max(0.0).sqrt();
            let num = 2.0 * PI / 3.0 * x * a;
            let den = PI * PI / 3.0 * x;
            let ratio = if x == 0.0 {
                2.0 * a / PI
            } else {
                (num - den).exp() * (-2.0 * num).exp_m1() / (-2.0 * den).exp_m1()
            };
            y * ratio / cos_a
        };
        let needs_split = |lo: f64, hi: f64| {
            let s = hi * inv_mp1;
            let cos_min = (1.0 - s * s).max(0.0).sqrt();
            cos_min < 0.1 && (hi - lo) > (m + 1.0 - hi)
        };
        prefactor * rule.integrate_adaptive(0.0, 1.0, &f, &needs_split)
    };
    // F_m(0) = Lambda(m); right at the critical mass rounding can put the
    // quadrature value on either side of 1, in which case the root is 0
    if f_m(0.0) <= 1.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    for _ in 0..60 {
        if f_m(hi) < 1.0 {
            break;
        }
        hi *= 2.0;
    }
    bisect_then_secant(|x| f_m(x) - 1.0, 0.0, hi, 1e-13)
}

/// Upper bound C2(m) = (1/(4 pi beta)) log(sqrt(2 pi/3) alpha) (l0^2+3 l0+2);
/// zero when no odd channel qualifies (l0 = -1).
pub fn upper_bound_c2(params: &MassParams) -> f64 {
    let l0 = params.l0;
    if l0 < 1 {
        return 0.0;
    }
    let log_term = ((2.0 * PI / 3.0).sqrt() * params.alpha).ln();
    let channel_poly = (l0 * l0 + 3 * l0 + 2) as f64;
    log_term * channel_poly / (4.0 * PI * params.beta)
}

/// Critical mass of the odd channel l: the unique root of
/// sqrt(2 pi) Shat_l(0; m) = 1. For l = 1 this is the critical mass itself.
pub fn channel_critical_mass(l: i64) -> Result<f64> {
    channel_critical_mass_with_order(l, None)
}

pub fn channel_critical_mass_with_order(l: i64, quad_order: Option<usize>) -> Result<f64> {
    if l % 2 == 0 || l < 1 {
        return Err(domain(format!("channel critical mass requires odd l >= 1, got {l}")));
    }
    let g = |m: f64| -> f64 {
        let params = make_params(m).expect("bracket stays positive");
        let sym = symbol_for(&params, l, quad_order).expect("order checked on first call");
        (2.0 * PI).sqrt() * sym.symbol(0.0) - 1.0
    };
    // validate the order once so a bad override errors instead of panicking
    symbol_for(&make_params(1.0)?, l, quad_order)?;
    bisect_then_secant(g, 1e-4, 10.0, 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::critical_mass;

    // frozen with 40-digit arithmetic from the defining equations
    const K1_005: f64 = 1.0858115225948801;
    const M3_STAR: f64 = 0.013158848001736247;
    const M5_STAR: f64 = 0.0053203274711675992;

    fn p(m: f64) -> MassParams {
        make_params(m).unwrap()
    }

    #[test]
    fn level_set_empty_above_critical_mass() {
        let set = level_set(&p(0.2), 1, efimov_threshold()).unwrap();
        assert!(set.intervals.is_empty());
        assert_eq!(set.measure, 0.0);
    }

    #[test]
    fn level_set_single_interval_below_critical_mass() {
        let set = level_set(&p(0.05), 1, efimov_threshold()).unwrap();
        assert_eq!(set.intervals.len(), 1, "expected [0, k1], got {:?}", set.intervals);
        let (lo, hi) = set.intervals[0];
        assert_eq!(lo, 0.0);
        assert!((hi - K1_005).abs() < 1e-8);
        assert!((set.measure - K1_005).abs() < 1e-8);
    }

    #[test]
    fn level_set_empty_when_threshold_beats_bound() {
        let params = p(0.05);
        let threshold = params.alpha / 3.0f64.sqrt() * 1.01; // above the k=0 bound
        let set = level_set(&params, 1, threshold).unwrap();
        assert!(set.intervals.is_empty());
    }

    #[test]
    fn level_set_rejects_bad_arguments() {
        let params = p(0.1);
        assert!(level_set(&params, 2, 0.1).is_err());
        assert!(level_set(&params, 0, 0.1).is_err());
        assert!(level_set(&params, 1, 0.0).is_err());
        assert!(level_set(&params, 1, -0.5).is_err());
    }

    #[test]
    fn level_set_intervals_inside_scan_window() {
        let set = level_set(&p(0.02), 3, efimov_threshold()).unwrap();
        for &(lo, hi) in &set.intervals {
            assert!(0.0 <= lo && lo < hi && hi <= set.scan_cutoff);
        }
        let sum: f64 = set.intervals.iter().map(|(lo, hi)| hi - lo).sum();
        assert!((sum - set.measure).abs() < 1e-12);
    }

    #[test]
    fn scan_step_halving_is_stable() {
        let params = p(0.05);
        for l in [1i64, 3] {
            let coarse =
                level_set_with_scan(&params, l, efimov_threshold(), 0.01, None).unwrap();
            let fine =
                level_set_with_scan(&params, l, efimov_threshold(), 0.005, None).unwrap();
            assert!(
                (coarse.measure - fine.measure).abs() <= 1e-8,
                "l={l}: {} vs {}",
                coarse.measure,
                fine.measure
            );
        }
    }

    #[test]
    fn efimov_constant_zero_above_critical_mass() {
        let report = efimov_constant(&p(0.2)).unwrap();
        assert_eq!(report.c_of_m, 0.0);
        assert_eq!(report.c1, 0.0);
        // channels exist (l0 >= 1 slightly above m*) but all measures vanish
        for ch in &report.per_channel {
            assert_eq!(ch.measure, 0.0);
        }
    }

    #[test]
    fn only_first_channel_contributes_at_m_005() {
        // m_3* < 0.05 < m_*, so C(m) = (3/2 pi) k_1 exactly
        let report = efimov_constant(&p(0.05)).unwrap();
        let set3 = level_set(&p(0.05), 3, efimov_threshold()).unwrap();
        assert!(set3.intervals.is_empty());
        assert!((report.c_of_m - 3.0 / (2.0 * PI) * K1_005).abs() < 1e-8);
        let sum: f64 = report.per_channel.iter().map(|c| c.contribution).sum();
        assert!((report.c_of_m - sum).abs() < 1e-12);
    }

    #[test]
    fn c1_identity_with_level_set_boundary() {
        // substitution oracle: F_m(3k/(2 pi)) = sqrt(2 pi) Shat_1(k), so the
        // root of F_m = 1 must sit at (3/2 pi) k_1
        let params = p(0.05);
        let c1 = lower_bound_c1(&params).unwrap();
        let k1 = level_set(&params, 1, efimov_threshold()).unwrap().measure;
        assert!((c1 - 3.0 / (2.0 * PI) * k1).abs() <= 1e-8, "c1={c1} 3k1/2pi={}", 3.0 / (2.0 * PI) * k1);
    }

    #[test]
    fn c1_zero_at_and_above_critical_mass() {
        assert_eq!(lower_bound_c1(&p(0.2)).unwrap(), 0.0);
        // m* itself sits on the branch boundary; anything at rounding level is 0
        assert!(lower_bound_c1(&p(critical_mass())).unwrap().abs() < 1e-12);
    }

    #[test]
    fn c1_vanishes_approaching_critical_mass() {
        let m_star = critical_mass();
        let near = lower_bound_c1(&p(0.999 * m_star)).unwrap();
        let far = lower_bound_c1(&p(0.5 * m_star)).unwrap();
        assert!(near > 0.0 && near < 0.05, "C1 near m*: {near}");
        assert!(far > 10.0 * near);
    }

    #[test]
    fn c2_closed_form_cases() {
        let m_star = critical_mass();
        let params = p(m_star);
        assert_eq!(params.l0, 5);
        let expected =
            ((2.0 * PI / 3.0).sqrt() * params.alpha).ln() * 42.0 / (4.0 * PI * params.beta);
        assert!((upper_bound_c2(&params) - expected).abs() < 1e-14);
        // for large m no odd channel qualifies
        let big = p(10.0);
        assert_eq!(big.l0, -1);
        assert_eq!(upper_bound_c2(&big), 0.0);
    }

    #[test]
    fn c2_decreasing_in_mass_below_critical() {
        let m_star = critical_mass();
        let grid: Vec<f64> = (1..=20).map(|i| m_star * i as f64 / 21.0).collect();
        let mut prev = f64::INFINITY;
        for &m in &grid {
            let c2 = upper_bound_c2(&p(m));
            assert!(c2 < prev, "C2 not decreasing at m={m}");
            prev = c2;
        }
    }

    #[test]
    fn sandwich_holds_at_sampled_masses() {
        let m_star = critical_mass();
        for frac in [0.9, 0.5, 0.25] {
            let params = p(frac * m_star);
            let report = efimov_constant(&params).unwrap();
            assert!(report.c_of_m > 0.0);
            assert!(report.c1 <= report.c_of_m + 1e-12, "m={:.5}", params.m);
            assert!(report.c_of_m <= report.c2, "m={:.5}", params.m);
        }
    }

    #[test]
    fn channel_critical_masses_match_frozen_values() {
        let m1 = channel_critical_mass(1).unwrap();
        assert!((m1 - critical_mass()).abs() < 1e-10);
        let m3 = channel_critical_mass(3).unwrap();
        assert!((m3 - M3_STAR).abs() < 1e-9);
        assert!(m3 > 0.0 && m3 < critical_mass());
        let m5 = channel_critical_mass(5).unwrap();
        assert!((m5 - M5_STAR).abs() < 1e-9);
        assert!(m5 < m3 && m3 < m1);
        assert!(channel_critical_mass(2).is_err());
        assert!(channel_critical_mass(-1).is_err());
    }

    #[test]
    fn refined_lower_bound_between_channel_masses() {
        // m_5* < m < m_3*: both l = 1 and l = 3 carry positive measure
        let m = 0.1 * critical_mass();
        assert!(m > M5_STAR && m < M3_STAR);
        let report = efimov_constant(&p(m)).unwrap();
        let m1 = report.per_channel.iter().find(|c| c.l == 1).unwrap();
        let m3 = report.per_channel.iter().find(|c| c.l == 3).unwrap();
        assert!(m1.measure > 0.0 && m3.measure > 0.0);
        assert!(report.c_of_m >= m1.contribution + m3.contribution - 1e-12);
        // threshold consistency at k = 0 on either side of m_3*
        let below = ChannelSymbol::new(p(0.9 * M3_STAR), 3).symbol(0.0);
        let above = ChannelSymbol::new(p(1.1 * M3_STAR), 3).symbol(0.0);
        assert!((2.0 * PI).sqrt() * below > 1.0);
        assert!((2.0 * PI).sqrt() * above < 1.0);
        let empty = level_set(&p(1.1 * M3_STAR), 3, efimov_threshold()).unwrap();
        assert!(empty.intervals.is_empty());
    }
}

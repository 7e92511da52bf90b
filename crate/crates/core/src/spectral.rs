//! Nystrom discretization of the channel operators and eigenvalue counting.
//!
//! The operator behind the counting asymptotics acts on L^2((0, R)) with the
//! even difference kernel S_l(x - x'). A uniform midpoint rule turns it into
//! a symmetric Toeplitz matrix whose eigenvalue counts converge, per unit of
//! R, to the level-set measure of the channel symbol:
//!
//! ```text
//! n(lambda, S_R) = sum_l (2l+1) n(lambda, S_R^l),
//! n(lambda, S_R^l)/R -> (1/2 pi) |{k in R : Shat_l(k) > lambda/sqrt(2 pi)}|.
//! ```

use crate::error::{domain, Error, Result};
use crate::kernels::{symbol_upper_bound, ChannelSymbol};
use crate::level_set_with_scan;
use crate::linalg::{householder_tridiagonalize, Tridiagonal};
use crate::params::MassParams;
use crate::quadrature::GaussLegendre;
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

/// Eigenvalues within this distance of the counting threshold are treated as
/// not above it (the count uses a strict inequality); their presence is
/// reported as a near-degeneracy warning.
pub const NEAR_THRESHOLD_TOL: f64 = 1e-9;
/// Hard cap on Nystrom matrix size; larger requests are rejected outright.
pub const MAX_GRID_N: usize = 6000;
/// Smallest grid the discretization accepts.
pub const MIN_GRID_N: usize = 32;
/// Default node density for convergence runs (h = 0.025).
pub const DEFAULT_NODES_PER_UNIT: usize = 40;

/// Half log-scale of the spectral parameter: R(z) = (1/2)|log|z|| for
/// z in (-1, 0).
pub fn r_of_z(z: f64) -> Result<f64> {
    if !z.is_finite() || z >= 0.0 {
        return Err(domain(format!("spectral parameter must be negative, got {z}")));
    }
    if z.abs() >= 1.0 {
        return Err(domain(format!("spectral parameter must satisfy |z| < 1, got {z}")));
    }
    Ok(0.5 * z.abs().ln().abs())
}

/// Quadrature rule used to discretize the interval operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscretizationRule {
    /// Equal-weight midpoint nodes; makes the channel matrix Toeplitz.
    UniformMidpoint,
    /// Composite Gauss-Legendre panels, kept as a cross-check rule.
    GaussPanel,
}

/// Discretization of L^2((0, R)) by `grid_n` Nystrom nodes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Discretization {
    pub big_r: f64,
    pub grid_n: usize,
    pub rule: DiscretizationRule,
}

impl Discretization {
    pub fn new(big_r: f64, grid_n: usize, rule: DiscretizationRule) -> Result<Self> {
        if !big_r.is_finite() || big_r <= 0.0 {
            return Err(domain(format!("interval length must be positive, got {big_r}")));
        }
        if grid_n < MIN_GRID_N {
            return Err(domain(format!(
                "grid must have at least {MIN_GRID_N} nodes, got {grid_n}"
            )));
        }
        if grid_n > MAX_GRID_N {
            return Err(Error::ResourceCap(format!(
                "grid of {grid_n} nodes exceeds the cap of {MAX_GRID_N}"
            )));
        }
        Ok(Self { big_r, grid_n, rule })
    }

    /// Nodes and weights on (0, R) for the chosen rule.
    fn nodes_weights(&self) -> (Vec<f64>, Vec<f64>) {
        match self.rule {
            DiscretizationRule::UniformMidpoint => {
                let h = self.big_r / self.grid_n as f64;
                let nodes = (0..self.grid_n).map(|i| (i as f64 + 0.5) * h).collect();
                let weights = vec![h; self.grid_n];
                (nodes, weights)
            }
            DiscretizationRule::GaussPanel => {
                // panels of width ~1 with the node budget spread evenly
                let panels = (self.big_r.round() as usize).clamp(1, self.grid_n / 2);
                let base = self.grid_n / panels;
                let extra = self.grid_n % panels;
                let mut nodes = Vec::with_capacity(self.grid_n);
                let mut weights = Vec::with_capacity(self.grid_n);
                let width = self.big_r / panels as f64;
                for p in 0..panels {
                    let order = base + usize::from(p < extra);
                    let rule = GaussLegendre::new(order);
                    let lo = p as f64 * width;
                    // accumulate the mapped rule explicitly to keep the weights
                    let half = 0.5 * width;
                    let mid = lo + half;
                    for i in 0..order {
                        let (x, w) = rule_node(&rule, i);
                        nodes.push(mid + half * x);
                        weights.push(half * w);
                    }
                }
                (nodes, weights)
            }
        }
    }
}

fn rule_node(rule: &GaussLegendre, i: usize) -> (f64, f64) {
    (rule.nodes()[i], rule.weights()[i])
}

/// Symmetric Nystrom matrix of the channel operator on (0, R):
/// entries sqrt(w_i) S_l(x_i - x_j) sqrt(w_j). For the uniform rule this is
/// h S_l((i-j) h), a symmetric Toeplitz matrix built from one kernel row.
pub fn build_channel_matrix(
    params: &MassParams,
    l: u32,
    disc: &Discretization,
    quad_order: Option<usize>,
) -> Result<DMatrix<f64>> {
    let sym = match quad_order {
        Some(order) => ChannelSymbol::with_order(*params, l, order)?,
        None => ChannelSymbol::new(*params, l),
    };
    let n = disc.grid_n;
    let mut mat = DMatrix::zeros(n, n);
    match disc.rule {
        DiscretizationRule::UniformMidpoint => {
            let h = disc.big_r / n as f64;
            let first: Vec<f64> = (0..n).map(|d| h * sym.kernel(d as f64 * h)).collect();
            for i in 0..n {
                for j in 0..n {
                    mat[(i, j)] = first[i.abs_diff(j)];
                }
            }
        }
        DiscretizationRule::GaussPanel => {
            let (nodes, weights) = disc.nodes_weights();
            let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
            for i in 0..n {
                for j in 0..=i {
                    let v = sq[i] * sym.kernel(nodes[i] - nodes[j]) * sq[j];
                    mat[(i, j)] = v;
                    mat[(j, i)] = v;
                }
            }
        }
    }
    Ok(mat)
}

/// Which route produced an eigenvalue count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountPath {
    /// Pivot signs of the shifted tridiagonal factorization.
    Inertia,
    /// Full symmetric eigendecomposition (fallback after a breakdown).
    Eigendecomposition,
}

/// Count of eigenvalues strictly above a threshold, with provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CountReport {
    pub count: usize,
    pub path: CountPath,
    /// Eigenvalues within `NEAR_THRESHOLD_TOL` of the threshold.
    pub near_threshold: usize,
}

/// Number of eigenvalues of a symmetric matrix strictly greater than
/// `lambda_thresh` (eigenvalues within `NEAR_THRESHOLD_TOL` count as not
/// above). Uses the inertia of the shifted tridiagonal form; an exact pivot
/// breakdown falls back to a full eigendecomposition, and the report records
/// which path ran.
pub fn count_above(matrix: &DMatrix<f64>, lambda_thresh: f64) -> Result<CountReport> {
    if !lambda_thresh.is_finite() || lambda_thresh <= 0.0 {
        return Err(domain(format!(
            "counting threshold must be positive, got {lambda_thresh}"
        )));
    }
    if matrix.nrows() != matrix.ncols() {
        return Err(domain("counting requires a square matrix".to_string()));
    }
    let tri = householder_tridiagonalize(matrix);
    Ok(count_from_tri(&tri, matrix, lambda_thresh))
}

fn count_from_tri(tri: &Tridiagonal, matrix: &DMatrix<f64>, lambda_thresh: f64) -> CountReport {
    let n = tri.len();
    let sigma = lambda_thresh + NEAR_THRESHOLD_TOL;
    let (count, path) = match tri.count_below_strict(sigma) {
        Some(below) => (n - below, CountPath::Inertia),
        None => {
            let eig = nalgebra::SymmetricEigen::new(matrix.clone()).eigenvalues;
            (
                eig.iter().filter(|&&w| w > sigma).count(),
                CountPath::Eigendecomposition,
            )
        }
    };
    let lo = lambda_thresh - NEAR_THRESHOLD_TOL;
    let near_threshold = tri.count_below(sigma).saturating_sub(tri.count_below(lo));
    CountReport {
        count,
        path,
        near_threshold,
    }
}

/// Per-channel record inside a counting run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelCount {
    pub l: u32,
    pub count: usize,
    /// True when the rigorous k = 0 bound already excludes the channel and
    /// no matrix was built.
    pub skipped: bool,
    pub path: CountPath,
    pub near_threshold: usize,
    /// Largest matrix eigenvalue, computed for even channels (where the
    /// operator is non-positive, so this doubles as a discretization check).
    pub max_eigenvalue: Option<f64>,
}

/// One full counting run over channels 0..=l_max.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralRun {
    pub params: MassParams,
    pub disc: Discretization,
    pub lambda_thresh: f64,
    pub per_channel: Vec<ChannelCount>,
    /// sum over channels of (2l+1) * count, exact in integer arithmetic.
    pub total: u64,
    /// total / (2R).
    pub ratio: f64,
}

/// Assemble per-channel counts for 0 <= l <= l_max and the weighted total
/// n(lambda, S_R) = sum (2l+1) n(lambda, S_R^l).
///
/// Odd channels whose exponential bound at k = 0 is already below
/// lambda/sqrt(2 pi) are skipped with a marker: the bound caps the operator
/// norm at sqrt(2 pi) max_k Shat_l(k) < lambda. Even channels are always
/// computed and their largest eigenvalue is recorded (the operator is
/// non-positive there, so the count must be zero for lambda > 0).
pub fn run_counting(
    params: &MassParams,
    disc: &Discretization,
    lambda_thresh: f64,
    l_max: u32,
    quad_order: Option<usize>,
) -> Result<SpectralRun> {
    if !lambda_thresh.is_finite() || lambda_thresh <= 0.0 {
        return Err(domain(format!(
            "counting threshold must be positive, got {lambda_thresh}"
        )));
    }
    if l_max < 1 {
        return Err(domain(format!("l_max must be at least 1, got {l_max}")));
    }
    let mut per_channel = Vec::with_capacity(l_max as usize + 1);
    let mut total: u64 = 0;
    for l in 0..=l_max {
        let odd = l % 2 == 1;
        if odd {
            let bound_at_zero = symbol_upper_bound(params, l as i64, 0.0)?;
            if bound_at_zero < lambda_thresh / (2.0 * PI).sqrt() {
                per_channel.push(ChannelCount {
                    l,
                    count: 0,
                    skipped: true,
                    path: CountPath::Inertia,
                    near_threshold: 0,
                    max_eigenvalue: None,
                });
                continue;
            }
        }
        let matrix = build_channel_matrix(params, l, disc, quad_order)?;
        let tri = householder_tridiagonalize(&matrix);
        let report = count_from_tri(&tri, &matrix, lambda_thresh);
        let max_eigenvalue = (!odd).then(|| tri.max_eigenvalue(1e-10));
        total += (2 * l as u64 + 1) * report.count as u64;
        per_channel.push(ChannelCount {
            l,
            count: report.count,
            skipped: false,
            path: report.path,
            near_threshold: report.near_threshold,
            max_eigenvalue,
        });
    }
    Ok(SpectralRun {
        params: *params,
        disc: *disc,
        lambda_thresh,
        per_channel,
        total,
        ratio: total as f64 / (2.0 * disc.big_r),
    })
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub big_r: f64,
    pub grid_n: usize,
    pub count: usize,
    /// count / R.
    pub ratio: f64,
    /// The predicted limit, repeated per row for table output.
    pub predicted: f64,
}

/// Convergence of a single channel's count/R toward its level-set limit.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub l: u32,
    pub lambda_thresh: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Level-set prediction (1/2 pi)|{k in R : Shat_l > lambda/sqrt(2 pi)}|;
    /// by evenness this is measure([0, inf) part) / pi. Zero for even l.
    pub predicted: f64,
    /// Whether |count/R - predicted| is non-increasing along `r_list`.
    pub monotone_toward_predicted: bool,
}

/// Track n(lambda, S_R^l)/R across increasing R against the predicted limit.
pub fn convergence_study(
    params: &MassParams,
    l: u32,
    lambda_thresh: f64,
    r_list: &[f64],
    nodes_per_unit: usize,
    quad_order: Option<usize>,
) -> Result<ConvergenceStudy> {
    if r_list.is_empty() {
        return Err(domain("convergence study needs at least one R".to_string()));
    }
    if r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("R values must be strictly increasing".to_string()));
    }
    if nodes_per_unit == 0 {
        return Err(domain("nodes_per_unit must be positive".to_string()));
    }
    let predicted = if l % 2 == 1 {
        let set = level_set_with_scan(
            params,
            l as i64,
            lambda_thresh / (2.0 * PI).sqrt(),
            crate::constants::DEFAULT_SCAN_STEP,
            quad_order,
        )?;
        set.measure / PI
    } else {
        0.0 // even-channel operator is non-positive, no level set above a positive threshold
    };
    let mut rows = Vec::with_capacity(r_list.len());
    for &big_r in r_list {
        let grid_n = (nodes_per_unit as f64 * big_r).round() as usize;
        let disc = Discretization::new(big_r, grid_n, DiscretizationRule::UniformMidpoint)?;
        let matrix = build_channel_matrix(params, l, &disc, quad_order)?;
        let report = count_above(&matrix, lambda_thresh)?;
        rows.push(ConvergenceRow {
            big_r,
            grid_n,
            count: report.count,
            ratio: report.count as f64 / big_r,
            predicted,
        });
    }
    let monotone_toward_predicted = rows
        .windows(2)
        .all(|w| (w[1].ratio - predicted).abs() <= (w[0].ratio - predicted).abs() + 1e-12);
    Ok(ConvergenceStudy {
        l,
        lambda_thresh,
        rows,
        predicted,
        monotone_toward_predicted,
    })
}

/// Largest eigenvalue of one channel's Nystrom matrix.
pub fn max_channel_eigenvalue(
    params: &MassParams,
    l: u32,
    disc: &Discretization,
    quad_order: Option<usize>,
) -> Result<f64> {
    let matrix = build_channel_matrix(params, l, disc, quad_order)?;
    Ok(householder_tridiagonalize(&matrix).max_eigenvalue(1e-10))
}

/// Sample point for the kernel map identity check: log-radii `r`, `x` in
/// (0, R(z)) and the cosine of the angle between the two momenta.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MapSample {
    pub r: f64,
    pub x: f64,
    pub cos_angle: f64,
}

/// Verify pointwise that the momentum-space kernel, pushed through the
/// exponential substitution |p| = e^r, equals the hyperbolic interval kernel:
///
/// ```text
/// e^(3(r+x)/2) S(p, q; z) = -b(m) chi_(0,R)(r) chi_(0,R)(x)
///                              / (cosh(r-x) + cos_angle/(m+1))
/// ```
///
/// with S(p, q; z) = -(2n)^(1/2)/c(m) cutoffs / (|p|^(1/2) H0(p,q) |q|^(1/2))
/// and H0(p, q) = p^2/(2 mu) + q^2/(2 mu) + p.q/m. Returns the maximum
/// relative discrepancy over the samples (an algebraic identity, so it should
/// sit at rounding level).
pub fn check_map_identity(params: &MassParams, z: f64, samples: &[MapSample]) -> Result<f64> {
    let big_r = r_of_z(z)?;
    let m = params.m;
    let mut worst = 0.0f64;
    for s in samples {
        if !(s.r > 0.0 && s.r < big_r && s.x > 0.0 && s.x < big_r) {
            return Err(domain(format!(
                "sample radii must lie in (0, {big_r}), got r={}, x={}",
                s.r, s.x
            )));
        }
        if !(-1.0..=1.0).contains(&s.cos_angle) {
            return Err(domain(format!("cos_angle must be in [-1, 1], got {}", s.cos_angle)));
        }
        let p = s.r.exp();
        let q = s.x.exp();
        let radius = z.abs().powf(-0.5);
        let cutoff =
            |v: f64| if v > 1.0 && v < radius { 1.0 } else { 0.0 };
        let h0 = p * p / (2.0 * params.mu) + q * q / (2.0 * params.mu) + p * q * s.cos_angle / m;
        let s_kernel = -(2.0 * params.n_red).sqrt() / params.c_norm * cutoff(p) * cutoff(q)
            / (p.sqrt() * h0 * q.sqrt());
        let lhs = (1.5 * (s.r + s.x)).exp() * s_kernel;
        let rhs = -params.b / ((s.r - s.x).cosh() + s.cos_angle / (m + 1.0));
        let rel = (lhs - rhs).abs() / rhs.abs();
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Relative gap of the scalar prefactor identity sqrt(2n) mu / c(m) = b(m)
/// that makes the map identity tick.
pub fn map_prefactor_residual(params: &MassParams) -> f64 {
    let lhs = (2.0 * params.n_red).sqrt() * params.mu / params.c_norm;
    (lhs - params.b).abs() / params.b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn p(m: f64) -> MassParams {
        make_params(m).unwrap()
    }

    fn disc(big_r: f64, grid_n: usize) -> Discretization {
        Discretization::new(big_r, grid_n, DiscretizationRule::UniformMidpoint).unwrap()
    }

    #[test]
    fn r_of_z_values_and_errors() {
        assert!((r_of_z(-(-20.0f64).exp()).unwrap() - 10.0).abs() < 1e-12);
        assert!((r_of_z(-1e-6).unwrap() - 0.5 * 1e6f64.ln()).abs() < 1e-12);
        assert!(r_of_z(-1e-8).unwrap() > r_of_z(-1e-6).unwrap());
        assert!(r_of_z(0.0).is_err());
        assert!(r_of_z(0.5).is_err());
        assert!(r_of_z(-1.0).is_err());
        assert!(r_of_z(-2.5).is_err());
        assert!(r_of_z(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn discretization_validates_grid() {
        assert!(Discretization::new(10.0, 31, DiscretizationRule::UniformMidpoint).is_err());
        assert!(matches!(
            Discretization::new(10.0, 6001, DiscretizationRule::UniformMidpoint),
            Err(Error::ResourceCap(_))
        ));
        assert!(Discretization::new(-1.0, 64, DiscretizationRule::UniformMidpoint).is_err());
    }

    #[test]
    fn matrix_is_symmetric_toeplitz_for_uniform_rule() {
        let params = p(0.1);
        let d = disc(4.0, 64);
        let m = build_channel_matrix(&params, 1, &d, None).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(m[(i, j)], m[(j, i)]);
                if i > 0 && j > 0 {
                    assert_eq!(m[(i, j)], m[(i - 1, j - 1)]);
                }
            }
        }
    }

    #[test]
    fn gauss_panel_matrix_is_symmetric() {
        let params = p(0.1);
        let d = Discretization::new(4.0, 64, DiscretizationRule::GaussPanel).unwrap();
        let m = build_channel_matrix(&params, 1, &d, None).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
    }

    #[test]
    fn even_channel_matrix_is_non_positive() {
        let params = p(0.1);
        let d = disc(6.0, 240);
        for l in [0u32, 2] {
            let max = max_channel_eigenvalue(&params, l, &d, None).unwrap();
            assert!(max <= 1e-6, "l={l}: max eigenvalue {max}");
        }
    }

    #[test]
    fn count_above_basic_cases() {
        let zero = DMatrix::<f64>::zeros(8, 8);
        assert_eq!(count_above(&zero, 1.0).unwrap().count, 0);

        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5]));
        let report = count_above(&diag, 1.0).unwrap();
        assert_eq!(report.count, 1);
        assert_eq!(report.path, CountPath::Inertia);
        assert_eq!(report.near_threshold, 0);

        assert!(count_above(&zero, 0.0).is_err());
        assert!(count_above(&zero, -1.0).is_err());
    }

    #[test]
    fn count_near_threshold_is_excluded_and_warned() {
        let lambda = 1.0;
        let eps = 0.5 * NEAR_THRESHOLD_TOL;
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            lambda + eps,
            lambda - eps,
            2.0,
        ]));
        let report = count_above(&diag, lambda).unwrap();
        assert_eq!(report.count, 1); // only the 2.0 eigenvalue
        assert_eq!(report.near_threshold, 2);
    }

    #[test]
    fn breakdown_falls_back_to_eigendecomposition() {
        let lambda = 1.0;
        let sigma = lambda + NEAR_THRESHOLD_TOL;
        // 2x2 with diagonal exactly sigma: first pivot of T - sigma I is zero
        let m = DMatrix::from_row_slice(2, 2, &[sigma, 1.0, 1.0, sigma]);
        let report = count_above(&m, lambda).unwrap();
        assert_eq!(report.path, CountPath::Eigendecomposition);
        assert_eq!(report.count, 1); // eigenvalues sigma - 1 and sigma + 1
    }

    #[test]
    fn count_monotone_in_lambda() {
        let params = p(0.05);
        let matrix = build_channel_matrix(&params, 1, &disc(10.0, 200), None).unwrap();
        let mut prev = usize::MAX;
        for lambda in [0.2, 0.5, 0.8, 1.0, 1.2] {
            let c = count_above(&matrix, lambda).unwrap().count;
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn run_counting_above_critical_mass_is_empty_and_bounded() {
        let params = p(0.2);
        for big_r in [8.0, 12.0] {
            let run = run_counting(&params, &disc(big_r, (big_r * 20.0) as usize), 1.0, 3, None)
                .unwrap();
            assert_eq!(run.total, 0);
            for ch in &run.per_channel {
                assert_eq!(ch.count, 0);
                if ch.l % 2 == 0 {
                    assert!(ch.max_eigenvalue.unwrap() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn run_counting_skips_channels_beyond_bound() {
        // lambda above sqrt(2 pi) alpha: even l = 1 is excluded by the bound
        let params = p(0.2);
        let lambda = (2.0 * PI).sqrt() * params.alpha * 1.01;
        let run = run_counting(&params, &disc(8.0, 160), lambda, 3, None).unwrap();
        assert_eq!(run.total, 0);
        for ch in &run.per_channel {
            if ch.l % 2 == 1 {
                assert!(ch.skipped, "odd channel l={} should be skipped", ch.l);
            } else {
                assert!(!ch.skipped);
            }
        }
    }

    #[test]
    fn weighted_total_identity() {
        let params = p(0.05);
        let run = run_counting(&params, &disc(10.0, 400), 1.0, 3, None).unwrap();
        let recomputed: u64 = run
            .per_channel
            .iter()
            .map(|c| (2 * c.l as u64 + 1) * c.count as u64)
            .sum();
        assert_eq!(run.total, recomputed);
        assert!((run.ratio - run.total as f64 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn grid_refinement_changes_counts_by_at_most_one() {
        let params = p(0.05);
        let coarse = build_channel_matrix(&params, 1, &disc(15.0, 600), None).unwrap();
        let fine = build_channel_matrix(&params, 1, &disc(15.0, 1200), None).unwrap();
        let c0 = count_above(&coarse, 1.0).unwrap().count;
        let c1 = count_above(&fine, 1.0).unwrap().count;
        assert!(c0.abs_diff(c1) <= 1, "counts {c0} vs {c1}");
    }

    #[test]
    fn l1_matrix_norm_stays_below_lambda_bound() {
        let params = p(0.2);
        let mut prev = 0.0;
        for big_r in [6.0, 12.0] {
            let max =
                max_channel_eigenvalue(&params, 1, &disc(big_r, (40.0 * big_r) as usize), None)
                    .unwrap();
            assert!(max <= params.lambda_m * (1.0 + 1e-3), "R={big_r}: {max}");
            assert!(max > prev, "largest eigenvalue should grow with R");
            prev = max;
        }
    }

    #[test]
    fn convergence_study_even_channel_is_null() {
        let params = p(0.05);
        let study = convergence_study(&params, 2, 1.0, &[4.0, 8.0], 20, None).unwrap();
        assert_eq!(study.predicted, 0.0);
        for row in &study.rows {
            assert_eq!(row.count, 0);
        }
    }

    #[test]
    fn convergence_study_validates_input() {
        let params = p(0.05);
        assert!(convergence_study(&params, 1, 1.0, &[], 20, None).is_err());
        assert!(convergence_study(&params, 1, 1.0, &[10.0, 5.0], 20, None).is_err());
        assert!(matches!(
            convergence_study(&params, 1, 1.0, &[200.0], 40, None),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn map_identity_is_exact_algebra() {
        let params = p(0.0735);
        let z = -1e-8;
        let big_r = r_of_z(z).unwrap();
        let mut samples = Vec::new();
        // deterministic low-discrepancy-ish sweep of the sample domain
        for i in 0..100 {
            let t = (i as f64 + 0.5) / 100.0;
            samples.push(MapSample {
                r: t * big_r,
                x: (1.0 - t) * 0.9 * big_r + 0.05 * big_r,
                cos_angle: 2.0 * ((i * 37 % 101) as f64 / 100.0) - 1.0,
            });
        }
        let worst = check_map_identity(&params, z, &samples).unwrap();
        assert!(worst <= 1e-12, "max relative error {worst}");
    }

    #[test]
    fn map_identity_diagonal_sample_equals_minus_b() {
        let params = p(0.4);
        let z = -1e-4;
        let r = 1.0;
        let s = MapSample {
            r,
            x: r,
            cos_angle: 0.0,
        };
        // both sides reduce to -b(m) when r = x and the angle is square
        let p_mag = r.exp();
        let h0 = p_mag * p_mag / params.mu; // cos term vanishes
        let lhs = (3.0 * r).exp() * (-(2.0 * params.n_red).sqrt() / params.c_norm)
            / (p_mag * h0);
        assert!((lhs + params.b).abs() < 1e-15 * params.b);
        assert!(check_map_identity(&params, z, &[s]).unwrap() < 1e-13);
    }

    #[test]
    fn map_identity_rejects_out_of_domain_samples() {
        let params = p(0.4);
        let z = -1e-4;
        let big_r = r_of_z(z).unwrap();
        let bad = [
            MapSample { r: -0.1, x: 1.0, cos_angle: 0.0 },
            MapSample { r: 1.0, x: big_r + 0.1, cos_angle: 0.0 },
            MapSample { r: 1.0, x: 1.0, cos_angle: 1.5 },
        ];
        for s in bad {
            assert!(check_map_identity(&params, z, &[s]).is_err());
        }
    }

    #[test]
    fn prefactor_identity_holds_across_masses() {
        for i in 0..20 {
            let m = 0.01 * 1.5f64.powi(i);
            let residual = map_prefactor_residual(&p(m));
            assert!(residual <= 1e-14, "m={m}: residual {residual}");
        }
    }
}

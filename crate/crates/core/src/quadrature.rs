//! Gauss-Legendre quadrature with optional adaptive panel bisection.
//!
//! The integrands in this crate are smooth on the closed interval but can be
//! sharply peaked near one endpoint (a pole or branch point sits just outside
//! the interval when the mass ratio is small). A fixed-order rule combined
//! with panel bisection driven by a caller-supplied predicate handles both
//! regimes.

use crate::kernels::legendre_raw;

/// Gauss-Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build an `order`-point rule. Nodes are the roots of P_order found by
    /// Newton iteration from the Chebyshev initial guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            // polish once more so the weight formula sees a converged node
            let (p, d) = legendre_with_derivative(n, x);
            x -= p / d;
            let w = 2.0 / ((1.0 - x * x) * d * d);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_with_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on the reference interval [-1, 1].
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching `nodes()`; they sum to 2.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate `f` over [lo, hi] with the fixed rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrate `f` over [lo, hi], bisecting any panel for which
    /// `needs_split(panel_lo, panel_hi)` is true, down to a depth cap.
    pub fn integrate_adaptive<F, P>(&self, lo: f64, hi: f64, f: &F, needs_split: &P) -> f64
    where
        F: Fn(f64) -> f64,
        P: Fn(f64, f64) -> bool,
    {
        self.panel(lo, hi, f, needs_split, 0)
    }

    fn panel<F, P>(&self, lo: f64, hi: f64, f: &F, needs_split: &P, depth: u32) -> f64
    where
        F: Fn(f64) -> f64,
        P: Fn(f64, f64) -> bool,
    {
        const MAX_DEPTH: u32 = 48;
        if depth < MAX_DEPTH && hi - lo > 1e-12 && needs_split(lo, hi) {
            let mid = 0.5 * (lo + hi);
            self.panel(lo, mid, f, needs_split, depth + 1)
                + self.panel(mid, hi, f, needs_split, depth + 1)
        } else {
            self.integrate(lo, hi, f)
        }
    }
}

/// P_n(x) and P_n'(x) together, for the Newton node solve.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let p = legendre_raw(n as u32, x);
    if n == 0 {
        return (p, 0.0);
    }
    let pm1 = legendre_raw(n as u32 - 1, x);
    let d = if (x * x - 1.0).abs() < 1e-300 {
        // only reachable at the interval ends, which are never GL nodes
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p - pm1) / (x * x - 1.0)
    };
    (p, d)
}

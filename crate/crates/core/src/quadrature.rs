//! Gauss–Legendre quadrature. Nodes by Newton iteration on P_n with the
//! Tricomi initial guess; weights from the derivative. Rules are symmetric
//! by construction (computed on a half interval and mirrored), which keeps
//! repeated assemblies bit-identical.

use crate::special::legendre_p_with_deriv;

/// An n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the n-point rule; exact for polynomials of degree ≤ 2n − 1.
    pub fn new(n: u32) -> Self {
        assert!(n >= 1, "quadrature order must be at least 1");
        let nn = n as usize;
        let mut nodes = vec![0.0; nn];
        let mut weights = vec![0.0; nn];
        // Solve for the non-negative half; mirror the rest.
        let half = nn / 2;
        for i in 0..(nn - half) {
            // i-th root counted from x = +1 downward.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_p_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_p_with_deriv(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[nn - 1 - i] = x;
            weights[nn - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if nn % 2 == 1 {
            // Center node is exactly zero; weight from P'_n(0).
            let (_, dp) = legendre_p_with_deriv(n, 0.0);
            nodes[half] = 0.0;
            weights[half] = 2.0 / (dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let mid = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let nodes = self.nodes.iter().map(|x| mid + hw * x).collect();
        let weights = self.weights.iter().map(|w| hw * w).collect();
        (nodes, weights)
    }

    /// ∫_a^b f(x) dx by this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (xs, ws) = self.mapped(a, b);
        xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum()
    }
}

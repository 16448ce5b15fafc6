//! Quadrature rules and interpolation helpers used across the solvers.

use crate::error::{Result, ScatterError};

/// Gauss-Legendre quadrature rule on [-1, 1].
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration from the Chebyshev-like initial guess; weights are
/// 2 / ((1 - x^2) P_n'(x)^2).
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be at least 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to the interval [a, b].
    pub fn scaled(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let xs = self.nodes.iter().map(|&u| mid + half * u).collect();
        let ws = self.weights.iter().map(|&w| w * half).collect();
        (xs, ws)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(mid + half * u))
            .sum();
        half * sum
    }
}

/// Value and derivative of the Legendre polynomial P_n at x.
pub fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut d_prev = 0.0;
    let mut d = 1.0;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        let d_next = d_prev + (2.0 * kf - 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Trapezoidal rule on a uniform grid.
pub fn trapezoid_uniform(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}

/// Natural cubic spline through (x_i, y_i) with strictly increasing x.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 4 || ys.len() != n || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScatterError::InvalidTable);
        }
        // tridiagonal solve for natural boundary conditions
        let mut second = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let du = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * du / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + u[i];
        }
        Ok(CubicSpline { xs, ys, second })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Spline value at x; clamps to the end values outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            j => j - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

/// Local 4-point (cubic Lagrange) interpolation on a uniform grid.
///
/// `x0` is the position of sample 0 and `dx` the spacing. Positions within
/// half a cell of the grid ends fall back to the boundary polynomial.
pub fn cubic_interp_uniform<T>(samples: &[T], x0: f64, dx: f64, x: f64) -> T
where
    T: Copy
        + std::ops::Mul<f64, Output = T>
        + std::ops::Add<Output = T>,
{
    let n = samples.len();
    debug_assert!(n >= 4);
    let s = (x - x0) / dx;
    let i = (s.floor() as isize).clamp(1, n as isize - 3) as usize;
    let t = s - i as f64;
    // Lagrange weights for nodes at offsets -1, 0, 1, 2
    let wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w0 = (t * t - 1.0) * (t - 2.0) / 2.0;
    let w1 = -t * (t + 1.0) * (t - 2.0) / 2.0;
    let w2 = t * (t * t - 1.0) / 6.0;
    samples[i - 1] * wm1 + samples[i] * w0 + samples[i + 1] * w1 + samples[i + 2] * w2
}

//! Gauss–Legendre rules and composite rules on graded or uniform panels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fraction::{geometric_points, Interval};

/// Nodes and positive weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    /// Composite rule over consecutive panel edges.
    pub fn on_edges(edges: &[f64], order: usize) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::invalid("need at least one panel"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("panel edges must be strictly increasing"));
        }
        let (ref_nodes, ref_weights) = gauss_legendre(order)?;
        let panels = edges.len() - 1;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for w in edges.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            for (t, wt) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + half * t);
                weights.push(half * wt);
            }
        }
        Ok(Quadrature { nodes, weights })
    }

    /// Composite rule on `panels` equal panels of `[a, b]` (any real `a < b`).
    pub fn uniform_panels(a: f64, b: f64, panels: usize, order: usize) -> Result<Self> {
        if panels == 0 || !(a < b) {
            return Err(Error::invalid(format!(
                "uniform panels need a < b and panels >= 1, got [{a}, {b}] with {panels}"
            )));
        }
        let width = (b - a) / panels as f64;
        let mut edges: Vec<f64> = (0..=panels).map(|k| a + width * k as f64).collect();
        edges[panels] = b;
        Quadrature::on_edges(&edges, order)
    }
}

/// Composite Gauss–Legendre rule on geometrically graded panels whose edges
/// are `geometric_grid(interval, panels + 1)`.
pub fn gauss_legendre_panels(interval: Interval, panels: usize, order: usize) -> Result<Quadrature> {
    if panels == 0 {
        return Err(Error::invalid("need at least one panel"));
    }
    let edges = if panels == 1 {
        vec![interval.lo(), interval.hi()]
    } else {
        geometric_points(interval.lo(), interval.hi(), panels + 1)?
    };
    Quadrature::on_edges(&edges, order)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::invalid("Gauss–Legendre order must be at least 1"));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

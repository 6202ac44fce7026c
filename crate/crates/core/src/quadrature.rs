//! Gauss–Legendre and Gauss–Lobatto rules on the reference interval [-1, 1],
//! plus a composite Gauss–Legendre integrator.
//!
//! Nodes are computed by Newton iteration on the Legendre three-term
//! recurrence. Only the nonpositive half is iterated; the other half is its
//! exact mirror image, so every rule satisfies `x[n-1-i] == -x[i]` bitwise.

use std::f64::consts::PI;

/// A quadrature rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with the rule mapped affinely.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

/// Returns `(P_n(x), P_{n-1}(x))`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    if n == 0 {
        return (p_prev, 0.0);
    }
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

fn mirror(half: Vec<(f64, f64)>, n: usize) -> Rule {
    // `half` holds the nodes in [-1, 0) in increasing order, and the middle
    // node 0 when n is odd.
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for (i, &(x, w)) in half.iter().enumerate() {
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// `n`-point Gauss–Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let nf = n as f64;
    let mut half = Vec::with_capacity(n.div_ceil(2));
    for i in 0..n.div_ceil(2) {
        // Root i of P_n counted from the left.
        let mut x = -(PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let derivative = |x: f64| {
            let (p, p1) = legendre_pair(n, x);
            (p, nf * (x * p - p1) / (x * x - 1.0))
        };
        for _ in 0..100 {
            let (p, dp) = derivative(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = derivative(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        half.push((x, w));
    }
    mirror(half, n)
}

/// Gauss–Lobatto–Legendre rule with `n` points (endpoints included), exact
/// for polynomials of degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Rule {
    assert!(n >= 2, "Gauss-Lobatto rule needs at least two points");
    let order = n - 1;
    let of = order as f64;
    let mut half = Vec::with_capacity(n.div_ceil(2));
    for i in 0..n.div_ceil(2) {
        let mut x = -(PI * i as f64 / of).cos();
        if !(i == 0 || (n % 2 == 1 && i == n / 2)) {
            for _ in 0..100 {
                let (p, p1) = legendre_pair(order, x);
                let dx = (x * p - p1) / ((of + 1.0) * p);
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let (p, _) = legendre_pair(order, x);
        let w = 2.0 / (of * (of + 1.0) * p * p);
        half.push((x, w));
    }
    mirror(half, n)
}

/// Number of Gauss–Legendre points needed for polynomial exactness `degree`.
pub fn points_for_exactness(degree: usize) -> usize {
    degree / 2 + 1
}

/// Composite Gauss–Legendre integration over `panels` equal subintervals.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    rule: Rule,
    panels: usize,
}

impl CompositeGauss {
    pub fn new(points: usize, panels: usize) -> Self {
        assert!(panels >= 1);
        Self {
            rule: gauss_legendre(points),
            panels,
        }
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Calls `visit(x, w)` for every quadrature node over `[-r, r]`.
    ///
    /// Panel edges are placed at `r * (2k - panels) / panels`, so with an even
    /// panel count one edge sits exactly on 0 and the node set is mirror
    /// symmetric.
    pub fn for_each_node<F: FnMut(f64, f64)>(&self, r: f64, mut visit: F) {
        let n = self.panels as f64;
        let half = r / n;
        for k in 0..self.panels {
            let mid = r * ((2 * k + 1) as f64 - n) / n;
            for (&x, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                visit(mid + half * x, half * w);
            }
        }
    }

    /// Integrates `f` over the symmetric interval `[-r, r]`.
    pub fn integrate_symmetric<F: Fn(f64) -> f64>(&self, r: f64, f: F) -> f64 {
        let mut sum = 0.0;
        self.for_each_node(r, |x, w| sum += w * f(x));
        sum
    }
}

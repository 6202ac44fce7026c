use crate::error::{bad_param, Result};
use crate::quadrature::{gauss_legendre, gauss_lobatto, points_for_exactness, Rule};

/// Lagrange basis on Gauss–Lobatto nodes of [-1, 1], tabulated at the
/// Gauss–Legendre points of the element quadrature.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub degree: usize,
    pub nodes: Rule,
    pub quadrature: Rule,
    /// `values[q][j] = phi_j(x_q)`.
    pub values: Vec<Vec<f64>>,
    /// `derivatives[q][j] = phi_j'(x_q)`.
    pub derivatives: Vec<Vec<f64>>,
}

impl ReferenceElement {
    pub fn new(degree: usize, quad_degree: usize) -> Self {
        let nodes = gauss_lobatto(degree + 1);
        let quadrature = gauss_legendre(points_for_exactness(quad_degree));
        let values = quadrature
            .nodes
            .iter()
            .map(|&x| (0..=degree).map(|j| lagrange(&nodes.nodes, j, x)).collect())
            .collect();
        let derivatives = quadrature
            .nodes
            .iter()
            .map(|&x| {
                (0..=degree)
                    .map(|j| lagrange_derivative(&nodes.nodes, j, x))
                    .collect()
            })
            .collect();
        Self {
            degree,
            nodes,
            quadrature,
            values,
            derivatives,
        }
    }

    /// Values of all basis functions at an arbitrary reference point.
    pub fn basis_at(&self, xi: f64) -> Vec<f64> {
        (0..=self.degree)
            .map(|j| lagrange(&self.nodes.nodes, j, xi))
            .collect()
    }
}

/// `phi_j(x)` for the Lagrange basis on `nodes`, in product form so that it
/// stays exact when `x` coincides with a node.
fn lagrange(nodes: &[f64], j: usize, x: f64) -> f64 {
    let xj = nodes[j];
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| (x - xk) / (xj - xk))
        .product()
}

fn lagrange_derivative(nodes: &[f64], j: usize, x: f64) -> f64 {
    let xj = nodes[j];
    let mut sum = 0.0;
    for (m, &xm) in nodes.iter().enumerate() {
        if m == j {
            continue;
        }
        let mut term = 1.0 / (xj - xm);
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j && k != m {
                term *= (x - xk) / (xj - xk);
            }
        }
        sum += term;
    }
    sum
}

/// Uniform partition of `[-R, R]` into equal elements carrying Lagrange
/// polynomials of a fixed degree on Gauss–Lobatto nodes.
#[derive(Debug, Clone)]
pub struct Mesh {
    r: f64,
    n_elements: usize,
    degree: usize,
    quad_degree: usize,
    nodes: Vec<f64>,
    reference: ReferenceElement,
}

/// Builds a uniform mesh; `n_elements` must be even so that an element
/// boundary falls on `v = 0`.
pub fn build_mesh(r: f64, n_elements: usize, degree: usize, quad_degree: usize) -> Result<Mesh> {
    if !(r.is_finite() && r > 0.0) {
        return Err(bad_param(format!("R must be positive, got {r}")));
    }
    if n_elements < 2 || n_elements % 2 != 0 {
        return Err(bad_param(format!(
            "element count must be even and at least 2, got {n_elements}"
        )));
    }
    if degree < 1 {
        return Err(bad_param("polynomial degree must be at least 1"));
    }
    if quad_degree < 2 * degree + 1 {
        return Err(bad_param(format!(
            "quadrature exactness {quad_degree} below 2*degree+1 = {}",
            2 * degree + 1
        )));
    }
    let reference = ReferenceElement::new(degree, quad_degree);
    let mut nodes = Vec::with_capacity(n_elements * degree + 1);
    nodes.push(-r);
    let half = r / n_elements as f64;
    for e in 0..n_elements {
        let c = element_center(r, n_elements, e);
        for &xi in &reference.nodes.nodes[1..degree] {
            nodes.push(c + half * xi);
        }
        nodes.push(r * ((2 * (e + 1)) as f64 - n_elements as f64) / n_elements as f64);
    }
    Ok(Mesh {
        r,
        n_elements,
        degree,
        quad_degree,
        nodes,
        reference,
    })
}

#[inline]
fn element_center(r: f64, n: usize, e: usize) -> f64 {
    // Written so that mirrored elements have exactly negated centers.
    r * ((2 * e + 1) as f64 - n as f64) / n as f64
}

impl Mesh {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn quad_degree(&self) -> usize {
        self.quad_degree
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    /// All global node coordinates, boundary included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Coordinates of the interior (unknown) degrees of freedom.
    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn n_interior(&self) -> usize {
        self.n_elements * self.degree - 1
    }

    pub fn element_width(&self) -> f64 {
        2.0 * self.r / self.n_elements as f64
    }

    pub fn element_center(&self, e: usize) -> f64 {
        element_center(self.r, self.n_elements, e)
    }

    /// Interior index of local node `local` of element `e`, or `None` on the
    /// Dirichlet boundary.
    #[inline]
    pub fn interior_index(&self, e: usize, local: usize) -> Option<usize> {
        let g = e * self.degree + local;
        if g == 0 || g == self.n_elements * self.degree {
            None
        } else {
            Some(g - 1)
        }
    }

    /// Quadrature points and weights of element `e` in physical coordinates.
    pub fn element_quadrature(&self, e: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = self.element_center(e);
        let half = 0.5 * self.element_width();
        let q = &self.reference.quadrature;
        q.nodes
            .iter()
            .zip(&q.weights)
            .map(move |(&xi, &w)| (c + half * xi, half * w))
    }

    /// Values at the element quadrature points of the finite element function
    /// with interior coefficients `coeffs` (zero on the boundary).
    pub fn element_values(&self, coeffs: &[f64], e: usize) -> Vec<f64> {
        let p = self.degree;
        self.reference
            .values
            .iter()
            .map(|row| {
                (0..=p)
                    .filter_map(|j| self.interior_index(e, j).map(|g| row[j] * coeffs[g]))
                    .sum()
            })
            .collect()
    }

    /// Evaluates the finite element function with interior coefficients
    /// `coeffs` at an arbitrary point of `[-R, R]`.
    pub fn evaluate(&self, coeffs: &[f64], v: f64) -> f64 {
        let h = self.element_width();
        let e = (((v + self.r) / h).floor() as isize).clamp(0, self.n_elements as isize - 1) as usize;
        let xi = ((v - self.element_center(e)) / (0.5 * h)).clamp(-1.0, 1.0);
        let basis = self.reference.basis_at(xi);
        (0..=self.degree)
            .filter_map(|j| self.interior_index(e, j).map(|g| basis[j] * coeffs[g]))
            .sum()
    }

    /// `int u w dv` for two finite element functions given by interior
    /// coefficients, using the element quadrature.
    pub fn l2_inner(&self, u: &[f64], w: &[f64]) -> f64 {
        (0..self.n_elements)
            .map(|e| {
                let ue = self.element_values(u, e);
                let we = self.element_values(w, e);
                self.element_quadrature(e)
                    .zip(ue.iter().zip(&we))
                    .map(|((_, wt), (a, b))| wt * a * b)
                    .sum::<f64>()
            })
            .sum()
    }

    /// Load vector `b_i = int f phi_i dv` over interior basis functions.
    pub fn load_vector<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut b = vec![0.0; self.n_interior()];
        for e in 0..self.n_elements {
            for ((x, w), row) in self.element_quadrature(e).zip(&self.reference.values) {
                let fx = f(x) * w;
                for (j, phi) in row.iter().enumerate() {
                    if let Some(g) = self.interior_index(e, j) {
                        b[g] += fx * phi;
                    }
                }
            }
        }
        b
    }

    /// Nodal interpolant of `f` on the interior degrees of freedom.
    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.interior_nodes().iter().map(|&v| f(v)).collect()
    }
}

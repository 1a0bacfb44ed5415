//! Discretisation carriers: the uniform Cartesian support grid for the
//! Nyström rule and the angular quadrature mesh on the unit sphere.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Uniform cell-centred Cartesian lattice restricted to the effective
/// support of the potential. Nodes sit at `h·(i+½, j+½, k+½)` so the origin
/// (where several families are singular) is never a node and the node set is
/// symmetric under reflection.
#[derive(Clone, Debug)]
pub struct SupportGrid {
    pub nodes: Vec<[f64; 3]>,
    /// Integer lattice coordinates of each node (offset convention above).
    pub coords: Vec<[i64; 3]>,
    pub spacing: f64,
}

impl SupportGrid {
    /// Build the lattice covering `[-half_extent, half_extent]³` and keep the
    /// nodes selected by `keep` (typically `‖V(cell)‖ > ε_cut`).
    pub fn build<F>(half_extent: f64, spacing: f64, mut keep: F) -> Result<Self>
    where
        F: FnMut([f64; 3]) -> bool,
    {
        if spacing <= 0.0 || half_extent <= 0.0 {
            return Err(Error::Config(
                "grid spacing and extent must be positive".into(),
            ));
        }
        let n = (half_extent / spacing).ceil() as i64;
        let mut nodes = Vec::new();
        let mut coords = Vec::new();
        for i in -n..n {
            for j in -n..n {
                for k in -n..n {
                    let p = [
                        (i as f64 + 0.5) * spacing,
                        (j as f64 + 0.5) * spacing,
                        (k as f64 + 0.5) * spacing,
                    ];
                    if keep(p) {
                        nodes.push(p);
                        coords.push([i, j, k]);
                    }
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::Config(
                "support grid is empty (potential below cutoff everywhere?)".into(),
            ));
        }
        Ok(SupportGrid {
            nodes,
            coords,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weight of one cell.
    pub fn weight(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Bounding box of the integer lattice coordinates, for FFT embedding.
    pub fn bounding_box(&self) -> ([i64; 3], [usize; 3]) {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for c in &self.coords {
            for d in 0..3 {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d]);
            }
        }
        let dims = [
            (hi[0] - lo[0] + 1) as usize,
            (hi[1] - lo[1] + 1) as usize,
            (hi[2] - lo[2] + 1) as usize,
        ];
        (lo, dims)
    }
}

/// Quadrature mesh on the unit sphere: Gauss–Legendre in `cos θ` crossed
/// with a uniform azimuthal grid. Exact for spherical harmonics up to degree
/// `order`; the azimuthal count is kept even so the mesh is closed under
/// `ω → -ω`.
#[derive(Clone, Debug)]
pub struct AngularMesh {
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub order: usize,
    n_theta: usize,
    n_phi: usize,
}

impl AngularMesh {
    /// Mesh exact to (at least) the requested polynomial order.
    pub fn with_order(order: usize) -> Self {
        let n_theta = order.div_ceil(2) + 1; // 2·n_theta - 1 ≥ order + 1
        let mut n_phi = order + 1;
        if n_phi % 2 == 1 {
            n_phi += 1;
        }
        Self::gauss_product(n_theta, n_phi)
    }

    pub fn gauss_product(n_theta: usize, n_phi: usize) -> Self {
        let (ct, wt) = gauss_legendre(n_theta);
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (cos_t, w_t) in ct.iter().zip(&wt) {
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = dphi * j as f64;
                directions.push([sin_t * phi.cos(), sin_t * phi.sin(), *cos_t]);
                weights.push(w_t * dphi);
            }
        }
        let order = (2 * n_theta - 1).min(n_phi - 1);
        AngularMesh {
            directions,
            weights,
            order,
            n_theta,
            n_phi,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index of the antipodal direction `-ω_i`.
    pub fn antipode(&self, i: usize) -> usize {
        let it = i / self.n_phi;
        let ip = i % self.n_phi;
        let jt = self.n_theta - 1 - it;
        let jp = (ip + self.n_phi / 2) % self.n_phi;
        jt * self.n_phi + jp
    }

    /// Quadrature of a scalar function of direction.
    pub fn integrate<F>(&self, mut f: F) -> f64
    where
        F: FnMut([f64; 3]) -> f64,
    {
        self.directions
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * f(*d))
            .sum()
    }
}

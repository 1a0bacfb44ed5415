//! Schrödinger scattering on `-Δ + V`: the modified integral equation with
//! unknown `|V|^{1/2}φ` supported on `supp V`, Nyström discretisation, the
//! on-shell T kernel and scattering amplitude, the unitary S-matrix on an
//! angular mesh, and total cross sections computed both directly from the
//! amplitude and from the S-matrix eigenvalues.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{AngularMesh, SupportGrid};
use crate::kernels::{helmholtz_green, UNIT_CUBE_INV_R};
use crate::linalg::{self, DenseOperator, GmresOutcome, LatticeConvolution, LinearOperator};
use crate::potential::ScalarPotential;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Relative threshold under which `I + K` counts as numerically singular
/// (exceptional energy).
pub const EXCEPTIONAL_THRESHOLD: f64 = 1e-6;

/// Dense-solve size limit; larger systems go matrix-free.
pub const DENSE_LIMIT: usize = 8000;

/// How the linear systems are solved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMode {
    /// LU factorisation with the full exceptional-value check.
    Dense,
    /// FFT-convolution GMRES; singularity shows up as solver stagnation.
    Iterative { tol: f64, max_iter: usize },
    /// Dense up to [`DENSE_LIMIT`] unknowns, iterative beyond.
    Auto,
}

impl Default for SolveMode {
    fn default() -> Self {
        SolveMode::Auto
    }
}

/// The discretised problem: grid, cell-averaged potential and its pointwise
/// factorisation `V = W·|V|^{1/2}·|V|^{1/2}`.
#[derive(Clone, Debug)]
pub struct SchrodingerProblem {
    pub grid: SupportGrid,
    pub v: Vec<f64>,
    pub sqrt_v: Vec<f64>,
    pub sign_v: Vec<f64>,
}

impl SchrodingerProblem {
    /// Discretise `potential` on the lattice covering `[-half_extent, half_extent]³`.
    /// Cells are averaged over `subsamples³` points; nodes with
    /// `|V| ≤ eps_cut` (default `1e-8·max|V|`) are dropped.
    pub fn new(
        potential: &ScalarPotential,
        half_extent: f64,
        spacing: f64,
        subsamples: usize,
        eps_cut: Option<f64>,
    ) -> Result<Self> {
        // first pass: find the maximum for the default cutoff
        let probe = SupportGrid::build(half_extent, spacing, |_| true)?;
        let means: Vec<f64> = probe
            .nodes
            .iter()
            .map(|&p| potential.cell_mean(p, spacing, subsamples))
            .collect();
        let vmax = means.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = eps_cut.unwrap_or(1e-8 * vmax);
        let mut nodes = Vec::new();
        let mut coords = Vec::new();
        let mut v = Vec::new();
        for ((p, c), val) in probe.nodes.iter().zip(&probe.coords).zip(&means) {
            if val.abs() > cut {
                nodes.push(*p);
                coords.push(*c);
                v.push(*val);
            }
        }
        if nodes.is_empty() {
            return Err(Error::Config(
                "potential support is empty at this cutoff".into(),
            ));
        }
        let grid = SupportGrid {
            nodes,
            coords,
            spacing,
        };
        let sqrt_v = v.iter().map(|x: &f64| x.abs().sqrt()).collect();
        let sign_v = v
            .iter()
            .map(|x: &f64| if *x == 0.0 { 0.0 } else { x.signum() })
            .collect();
        Ok(SchrodingerProblem {
            grid,
            v,
            sqrt_v,
            sign_v,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Nyström matrix of `I + K(z)`. The diagonal (self-cell) entry uses the
    /// analytic cube integral of the `1/|r|` factor with the oscillatory
    /// phase frozen at the cell centre, valid while `√λ·h ≲ 0.3`.
    pub fn operator_matrix(&self, z: C64) -> Array2<C64> {
        let n = self.len();
        let h = self.grid.spacing;
        let w = self.grid.weight();
        let diag_cell = UNIT_CUBE_INV_R * h * h / FOUR_PI;
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            let ri = self.grid.nodes[i];
            for j in 0..n {
                let kern = if i == j {
                    C64::new(diag_cell, 0.0)
                } else {
                    let u = [
                        ri[0] - self.grid.nodes[j][0],
                        ri[1] - self.grid.nodes[j][1],
                        ri[2] - self.grid.nodes[j][2],
                    ];
                    helmholtz_green(u, z).expect("distinct nodes") * w
                };
                a[(i, j)] = kern * (self.sqrt_v[i] * self.sign_v[j] * self.sqrt_v[j]);
                if i == j {
                    a[(i, j)] += C64::new(1.0, 0.0);
                }
            }
        }
        a
    }

    /// Factorise `I + K(λ)` for scattering at `λ > 0`, rejecting energies
    /// where the smallest singular value falls below the exceptional
    /// threshold.
    pub fn scattering_operator(&self, lambda: f64) -> Result<DenseOperator> {
        if lambda <= 0.0 {
            return Err(Error::Config(format!(
                "scattering needs λ > 0, got {lambda}"
            )));
        }
        let op = DenseOperator::new(self.operator_matrix(C64::new(lambda, 0.0)))?;
        let threshold = EXCEPTIONAL_THRESHOLD * op.norm2();
        if op.sigma_min() < threshold {
            return Err(Error::ExceptionalValue {
                lambda,
                sigma_min: op.sigma_min(),
                threshold,
            });
        }
        Ok(op)
    }

    pub fn rhs(&self, k: [f64; 3]) -> Array1<C64> {
        Array1::from_iter(self.grid.nodes.iter().zip(&self.sqrt_v).map(|(r, sv)| {
            C64::new(0.0, k[0] * r[0] + k[1] * r[1] + k[2] * r[2]).exp() * *sv
        }))
    }

    /// Solve the modified equation for one incident direction.
    pub fn solve_direction(
        &self,
        op: &DenseOperator,
        lambda: f64,
        dir: [f64; 3],
    ) -> Result<LsSolution> {
        let kmag = lambda.sqrt();
        let k = [kmag * dir[0], kmag * dir[1], kmag * dir[2]];
        let psi = op.solve(&self.rhs(k))?;
        Ok(LsSolution { lambda, k, psi })
    }

    /// Solve for every incident direction of the mesh, reusing one
    /// factorisation (dense) or one kernel transform (matrix-free).
    pub fn solve_mesh(
        &self,
        lambda: f64,
        mesh: &AngularMesh,
        mode: SolveMode,
    ) -> Result<Vec<LsSolution>> {
        match self.pick_mode(mode) {
            SolveMode::Dense => {
                let op = self.scattering_operator(lambda)?;
                mesh.directions
                    .iter()
                    .map(|&d| self.solve_direction(&op, lambda, d))
                    .collect()
            }
            SolveMode::Iterative { tol, max_iter } => {
                let op = self.iterative_operator(C64::new(lambda, 0.0));
                let kmag = lambda.sqrt();
                mesh.directions
                    .iter()
                    .map(|&d| {
                        let k = [kmag * d[0], kmag * d[1], kmag * d[2]];
                        let out: GmresOutcome =
                            linalg::gmres(&op, &self.rhs(k), tol, max_iter, 60)?;
                        Ok(LsSolution {
                            lambda,
                            k,
                            psi: out.x,
                        })
                    })
                    .collect()
            }
            SolveMode::Auto => unreachable!(),
        }
    }

    fn pick_mode(&self, mode: SolveMode) -> SolveMode {
        match mode {
            SolveMode::Auto => {
                if self.len() <= DENSE_LIMIT {
                    SolveMode::Dense
                } else {
                    SolveMode::Iterative {
                        tol: 1e-10,
                        max_iter: 500,
                    }
                }
            }
            m => m,
        }
    }

    /// Matrix-free applier of `I + K(z)` on the bounding lattice.
    pub fn iterative_operator(&self, z: C64) -> MatrixFreeLs<'_> {
        let (lo, dims) = self.grid.bounding_box();
        let h = self.grid.spacing;
        let w = self.grid.weight();
        let diag_cell = UNIT_CUBE_INV_R * h * h / FOUR_PI;
        let conv = LatticeConvolution::new(dims, 1, |d| {
            if d == [0, 0, 0] {
                vec![C64::new(diag_cell, 0.0)]
            } else {
                let u = [d[0] as f64 * h, d[1] as f64 * h, d[2] as f64 * h];
                vec![helmholtz_green(u, z).expect("nonzero displacement") * w]
            }
        });
        let lattice_index: Vec<usize> = self
            .grid
            .coords
            .iter()
            .map(|c| {
                let x = (c[0] - lo[0]) as usize;
                let y = (c[1] - lo[1]) as usize;
                let zi = (c[2] - lo[2]) as usize;
                (x * dims[1] + y) * dims[2] + zi
            })
            .collect();
        let volume = dims[0] * dims[1] * dims[2];
        MatrixFreeLs {
            problem: self,
            conv,
            lattice_index,
            volume,
        }
    }

    /// Source density `V·φ = W·|V|^{1/2}·ψ` at the grid nodes.
    pub fn scattered_source(&self, sol: &LsSolution) -> Vec<C64> {
        (0..self.len())
            .map(|j| sol.psi[j] * (self.sign_v[j] * self.sqrt_v[j]))
            .collect()
    }

    /// Evaluate the full solution `φ` anywhere via the integral
    /// representation (plane wave minus the kernel-smeared source).
    pub fn phi_at(&self, sol: &LsSolution, r: [f64; 3]) -> C64 {
        let src = self.scattered_source(sol);
        self.phi_at_with_source(sol, &src, r)
    }

    /// Same as [`phi_at`](Self::phi_at) with a precomputed source vector.
    pub fn phi_at_with_source(&self, sol: &LsSolution, src: &[C64], r: [f64; 3]) -> C64 {
        let w = self.grid.weight();
        let h = self.grid.spacing;
        let z = C64::new(sol.lambda, 0.0);
        let diag_cell = UNIT_CUBE_INV_R * h * h / FOUR_PI;
        let mut acc = C64::new(0.0, 0.0);
        for (node, s) in self.grid.nodes.iter().zip(src) {
            let u = [r[0] - node[0], r[1] - node[1], r[2] - node[2]];
            let d2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
            let kern = if d2.sqrt() < 0.5 * h {
                C64::new(diag_cell, 0.0)
            } else {
                helmholtz_green(u, z).expect("checked distance") * w
            };
            acc += kern * s;
        }
        let phase = C64::new(0.0, sol.k[0] * r[0] + sol.k[1] * r[1] + sol.k[2] * r[2]).exp();
        phase - acc
    }

    /// On-shell kernel samples `T(ω_i, ω'_j)` for solutions indexed by the
    /// incident mesh directions.
    pub fn on_shell_t(&self, lambda: f64, mesh: &AngularMesh, sols: &[LsSolution]) -> Array2<C64> {
        assert_eq!(sols.len(), mesh.len());
        let m = mesh.len();
        let kmag = lambda.sqrt();
        let w = self.grid.weight();
        let mut t = Array2::<C64>::zeros((m, m));
        let sources: Vec<Vec<C64>> = sols.iter().map(|s| self.scattered_source(s)).collect();
        for (i, omega) in mesh.directions.iter().enumerate() {
            let phases: Vec<C64> = self
                .grid
                .nodes
                .iter()
                .map(|r| {
                    C64::new(
                        0.0,
                        -kmag * (r[0] * omega[0] + r[1] * omega[1] + r[2] * omega[2]),
                    )
                    .exp()
                })
                .collect();
            for (j, src) in sources.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (p, s) in phases.iter().zip(src) {
                    acc += p * s;
                }
                t[(i, j)] = acc * w;
            }
        }
        t
    }

    /// Amplitude at one (out, in) direction pair from a single solve.
    pub fn amplitude_at(&self, sol: &LsSolution, omega_out: [f64; 3]) -> C64 {
        let src = self.scattered_source(sol);
        let kmag = sol.lambda.sqrt();
        let w = self.grid.weight();
        let mut acc = C64::new(0.0, 0.0);
        for (r, s) in self.grid.nodes.iter().zip(&src) {
            let ph = C64::new(
                0.0,
                -kmag * (r[0] * omega_out[0] + r[1] * omega_out[1] + r[2] * omega_out[2]),
            )
            .exp();
            acc += ph * s;
        }
        -acc * w / FOUR_PI
    }

    /// Born amplitude by the same grid quadrature,
    /// `-(1/4π)∫e^{-ik·s}V(s)e^{ik'·s}ds`.
    pub fn born_amplitude(&self, k: [f64; 3], kp: [f64; 3]) -> C64 {
        let w = self.grid.weight();
        let mut acc = C64::new(0.0, 0.0);
        for (r, v) in self.grid.nodes.iter().zip(&self.v) {
            let ph = C64::new(
                0.0,
                (kp[0] - k[0]) * r[0] + (kp[1] - k[1]) * r[1] + (kp[2] - k[2]) * r[2],
            )
            .exp();
            acc += ph * *v;
        }
        -acc * w / FOUR_PI
    }
}

/// Matrix-free `I + K(z)` applier (FFT convolution over the bounding box).
pub struct MatrixFreeLs<'a> {
    problem: &'a SchrodingerProblem,
    conv: LatticeConvolution,
    lattice_index: Vec<usize>,
    volume: usize,
}

impl LinearOperator for MatrixFreeLs<'_> {
    fn dim(&self) -> usize {
        self.problem.len()
    }

    fn apply(&self, x: &Array1<C64>) -> Array1<C64> {
        let mut field = vec![C64::new(0.0, 0.0); self.volume];
        for (j, &li) in self.lattice_index.iter().enumerate() {
            field[li] = x[j] * (self.problem.sign_v[j] * self.problem.sqrt_v[j]);
        }
        let out = self.conv.apply(std::slice::from_ref(&field));
        let mut y = x.clone();
        for (i, &li) in self.lattice_index.iter().enumerate() {
            y[i] += out[0][li] * self.problem.sqrt_v[i];
        }
        y
    }
}

/// One scattering solve: energy, incident momentum and the modified unknown
/// `ψ = |V|^{1/2}φ` on the grid.
#[derive(Clone, Debug)]
pub struct LsSolution {
    pub lambda: f64,
    pub k: [f64; 3],
    pub psi: Array1<C64>,
}

/// Scattering amplitude kernel `f = -T/(4π)` on the mesh.
pub fn amplitude_from_t(t: &Array2<C64>) -> Array2<C64> {
    t.mapv(|z| -z / FOUR_PI)
}

/// Discretised on-shell scattering operator and its eigen-decomposition.
#[derive(Clone, Debug)]
pub struct SMatrixBlock {
    /// Symmetrised S-matrix `I - 2πi μ² W^{1/2} T W^{1/2}`.
    pub s: Array2<C64>,
    pub eigenvalues: Array1<C64>,
    /// Eigenvector functions sampled on the mesh (column `j` is `G_j(ω_i)`),
    /// normalised to unit quadrature norm.
    pub vectors: Array2<C64>,
}

/// Coupling constant `μ² = (1/16)·√λ·π^{-3}` of the on-shell operator.
pub fn on_shell_coupling(lambda: f64) -> f64 {
    lambda.sqrt() / (16.0 * std::f64::consts::PI.powi(3))
}

/// Build and diagonalise the S-matrix from the T kernel samples. The weight
/// split `W^{1/2} T W^{1/2}` makes unitarity testable in the plain Frobenius
/// norm and preserves the spectrum.
pub fn s_matrix(lambda: f64, t: &Array2<C64>, mesh: &AngularMesh) -> Result<SMatrixBlock> {
    let m = mesh.len();
    assert_eq!(t.nrows(), m);
    let mu2 = on_shell_coupling(lambda);
    let mut s = Array2::<C64>::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            let wij = (mesh.weights[i] * mesh.weights[j]).sqrt();
            s[(i, j)] = -C64::new(0.0, 2.0 * std::f64::consts::PI * mu2 * wij) * t[(i, j)];
            if i == j {
                s[(i, j)] += C64::new(1.0, 0.0);
            }
        }
    }
    let (eigenvalues, raw_vectors) = linalg::eigs(&s)?;
    // map ℓ²-eigenvectors to mesh functions G(ω_i) = v_i / √w_i
    let mut vectors = raw_vectors;
    for j in 0..m {
        let mut norm2 = 0.0;
        for i in 0..m {
            norm2 += vectors[(i, j)].norm_sqr();
        }
        let norm = norm2.sqrt();
        for i in 0..m {
            vectors[(i, j)] = vectors[(i, j)] / norm / C64::new(mesh.weights[i].sqrt(), 0.0);
        }
    }
    Ok(SMatrixBlock {
        s,
        eigenvalues,
        vectors,
    })
}

/// Frobenius defect `‖S*S - I‖_F` of the symmetrised S-matrix.
pub fn unitarity_defect(s: &Array2<C64>) -> f64 {
    let m = s.nrows();
    let prod = s.t().map(|z| z.conj()).dot(s);
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            let d = prod[(i, j)]
                - if i == j {
                    C64::new(1., 0.)
                } else {
                    C64::new(0., 0.)
                };
            acc += d.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Total cross section by double quadrature of `|f|²` over both spheres.
/// (This convention integrates over incident directions too: for rotationally
/// invariant `f` it is `4π` times the fixed-incident-direction value.)
pub fn cross_section_direct(f: &Array2<C64>, mesh: &AngularMesh) -> f64 {
    let mut acc = 0.0;
    for i in 0..mesh.len() {
        for j in 0..mesh.len() {
            acc += mesh.weights[i] * mesh.weights[j] * f[(i, j)].norm_sqr();
        }
    }
    acc
}

/// Total cross section from the S-matrix eigenvalues,
/// `(4π²/λ)·Σ_j |μ_j - 1|²`.
pub fn cross_section_ergodic(eigenvalues: &Array1<C64>, lambda: f64) -> f64 {
    let sum: f64 = eigenvalues
        .iter()
        .map(|mu| (mu - C64::new(1.0, 0.0)).norm_sqr())
        .sum();
    4.0 * std::f64::consts::PI.powi(2) / lambda * sum
}

/// Eigen-expansion of the amplitude: coefficients
/// `a_j(ω) = ∫ f(ω,ω') G_j(ω') dΩ(ω')` and the residuals of the truncated
/// reconstruction `f ≈ (2π/(i√λ)) Σ (μ_j-1) G_j(ω) conj(G_j(ω'))`, terms
/// ordered by decreasing `|μ_j - 1|`.
pub struct ErgodicExpansion {
    /// `coefficients[(i, j)] = a_j(ω_i)`
    pub coefficients: Array2<C64>,
    /// Quadrature-weighted Frobenius residual after keeping the first `j`
    /// strongest terms; index 0 is the no-term residual `‖f‖`.
    pub residuals: Vec<f64>,
    /// Term order used (indices into the eigen-decomposition).
    pub order: Vec<usize>,
}

pub fn ergodic_expansion(
    f: &Array2<C64>,
    block: &SMatrixBlock,
    mesh: &AngularMesh,
    lambda: f64,
) -> ErgodicExpansion {
    let m = mesh.len();
    let mut coefficients = Array2::<C64>::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..m {
                acc += f[(i, l)] * block.vectors[(l, j)] * mesh.weights[l];
            }
            coefficients[(i, j)] = acc;
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let da = (block.eigenvalues[a] - C64::new(1., 0.)).norm();
        let db = (block.eigenvalues[b] - C64::new(1., 0.)).norm();
        db.partial_cmp(&da).unwrap_or(std::cmp::Ordering::Equal)
    });
    let scale = C64::new(0.0, -2.0 * std::f64::consts::PI / lambda.sqrt()); // 2π/(i√λ)
    let mut recon = Array2::<C64>::zeros((m, m));
    let mut residuals = Vec::with_capacity(m + 1);
    let resid = |recon: &Array2<C64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += mesh.weights[i] * mesh.weights[j] * (f[(i, j)] - recon[(i, j)]).norm_sqr();
            }
        }
        acc.sqrt()
    };
    residuals.push(resid(&recon));
    for &j in &order {
        let mu1 = block.eigenvalues[j] - C64::new(1.0, 0.0);
        for i in 0..m {
            for l in 0..m {
                recon[(i, l)] += scale * mu1 * block.vectors[(i, j)] * block.vectors[(l, j)].conj();
            }
        }
        residuals.push(resid(&recon));
    }
    ErgodicExpansion {
        coefficients,
        residuals,
        order,
    }
}

/// Closed-form Born amplitude of the Yukawa family.
pub fn born_yukawa(strength: f64, screening: f64, momentum_transfer_sq: f64) -> f64 {
    -strength / (screening * screening + momentum_transfer_sq)
}

/// Closed-form Born amplitude of the Gaussian family.
pub fn born_gaussian(strength: f64, width: f64, momentum_transfer_sq: f64) -> f64 {
    let w3 = width.powi(3);
    -0.25
        * strength
        * std::f64::consts::PI.sqrt()
        * w3
        * (-width * width * momentum_transfer_sq / 4.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weak_yukawa(g: f64) -> ScalarPotential {
        ScalarPotential::Yukawa {
            strength: g,
            screening: 1.0,
        }
    }

    #[test]
    fn zero_potential_is_rejected_as_empty() {
        assert!(SchrodingerProblem::new(&ScalarPotential::Zero, 1.0, 0.5, 1, None).is_err());
    }

    #[test]
    fn self_cell_diagonal_entry() {
        // the diagonal of I + K is 1 + V_i · (cube integral of 1/(4π|r|)),
        // with the phase frozen at the cell centre
        let depth = 0.8;
        let pot = ScalarPotential::SquareWell {
            depth: -depth,
            radius: 0.44,
        };
        let problem = SchrodingerProblem::new(&pot, 0.25, 0.5, 1, None).unwrap();
        let a = problem.operator_matrix(C64::new(1.0, 0.0));
        let expect = -depth * UNIT_CUBE_INV_R * 0.25 / FOUR_PI;
        for i in 0..problem.len() {
            assert!((a[(i, i)] - C64::new(1.0 + expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn operator_symmetric_for_even_potential() {
        let pot = ScalarPotential::Gaussian {
            strength: -1.0,
            width: 0.8,
        };
        let problem = SchrodingerProblem::new(&pot, 1.2, 0.4, 1, None).unwrap();
        let a = problem.operator_matrix(C64::new(1.3, 0.0));
        let n = problem.len();
        let find_reflection = |r: [f64; 3]| {
            problem
                .grid
                .nodes
                .iter()
                .position(|p| {
                    (p[0] + r[0]).abs() < 1e-12
                        && (p[1] + r[1]).abs() < 1e-12
                        && (p[2] + r[2]).abs() < 1e-12
                })
                .unwrap()
        };
        for i in (0..n).step_by(7) {
            let i_ref = find_reflection(problem.grid.nodes[i]);
            for j in (0..n).step_by(5) {
                let j_ref = find_reflection(problem.grid.nodes[j]);
                assert!((a[(i, j)] - a[(i_ref, j_ref)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn weak_coupling_first_born_dominates() {
        // cutoff keeps a ball of radius ≈ 3.2 where |V| falls to ~1.2e-4
        let problem =
            SchrodingerProblem::new(&weak_yukawa(0.01), 3.6, 0.4, 3, Some(1.2e-4)).unwrap();
        let lambda = 1.0;
        let op = problem.scattering_operator(lambda).unwrap();
        let sol = problem.solve_direction(&op, lambda, [0., 0., 1.]).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, node) in problem.grid.nodes.iter().enumerate() {
            let born = C64::new(0.0, sol.k[2] * node[2]).exp() * problem.sqrt_v[j];
            num += (sol.psi[j] - born).norm_sqr();
            den += born.norm_sqr();
        }
        assert!(
            num.sqrt() / den.sqrt() <= 0.02,
            "ratio {}",
            num.sqrt() / den.sqrt()
        );
    }

    #[test]
    fn near_zero_potential_scatters_nothing() {
        let problem = SchrodingerProblem::new(&weak_yukawa(1e-280), 1.0, 0.5, 1, Some(0.0)).unwrap();
        let mesh = AngularMesh::with_order(5);
        let sols = problem.solve_mesh(1.0, &mesh, SolveMode::Auto).unwrap();
        let t = problem.on_shell_t(1.0, &mesh, &sols);
        let f = amplitude_from_t(&t);
        assert!(f.iter().all(|z| z.norm() < 1e-260));
        let block = s_matrix(1.0, &t, &mesh).unwrap();
        for mu in block.eigenvalues.iter() {
            assert!((mu - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // eigenvalue route is limited by eigensolver roundoff at ‖S‖ ~ 1
        assert!(cross_section_ergodic(&block.eigenvalues, 1.0) < 1e-25);
        assert!(cross_section_direct(&f, &mesh) < 1e-200);
    }

    #[test]
    fn iterative_and_dense_agree() {
        let pot = ScalarPotential::Gaussian {
            strength: -1.5,
            width: 0.7,
        };
        let problem = SchrodingerProblem::new(&pot, 1.4, 0.35, 2, None).unwrap();
        let lambda = 1.2;
        let op = problem.scattering_operator(lambda).unwrap();
        let dense = problem.solve_direction(&op, lambda, [0., 0., 1.]).unwrap();
        let mf = problem.iterative_operator(C64::new(lambda, 0.0));
        let k = [0.0, 0.0, lambda.sqrt()];
        let out = linalg::gmres(&mf, &problem.rhs(k), 1e-11, 500, 60).unwrap();
        let diff: f64 = dense
            .psi
            .iter()
            .zip(out.x.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = dense.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-8 * norm, "rel diff {}", diff / norm);
    }

    #[test]
    fn born_amplitude_forward_value() {
        // forward Yukawa integrand is e^{-r}·r: the tail (1+R)e^{-R} must be
        // below the tolerance, hence the radius-7 support
        let g = 0.01;
        let problem = SchrodingerProblem::new(&weak_yukawa(g), 7.2, 0.4, 3, Some(1.3e-6)).unwrap();
        let k = [0.0, 0.0, 1.0];
        let fb = problem.born_amplitude(k, k);
        assert!(
            (fb.re - born_yukawa(g, 1.0, 0.0)).abs() < 0.02 * g,
            "fb = {fb}"
        );
        assert!(fb.im.abs() < 1e-3 * g);
    }

    #[test]
    fn spherical_amplitude_depends_on_angle_only() {
        let pot = ScalarPotential::Gaussian {
            strength: -0.5,
            width: 0.8,
        };
        let problem = SchrodingerProblem::new(&pot, 1.6, 0.32, 2, None).unwrap();
        let lambda = 1.0;
        let op = problem.scattering_operator(lambda).unwrap();
        let sol_z = problem.solve_direction(&op, lambda, [0., 0., 1.]).unwrap();
        let sol_x = problem.solve_direction(&op, lambda, [1., 0., 0.]).unwrap();
        let f1 = problem.amplitude_at(&sol_z, [1.0, 0.0, 0.0]);
        let f2 = problem.amplitude_at(&sol_x, [0.0, 1.0, 0.0]);
        assert!(
            (f1 - f2).norm() <= 1e-3 * f1.norm().max(f2.norm()),
            "f1 = {f1}, f2 = {f2}"
        );
    }
}

//! Finite-dimensional algebra of the free Dirac operator: the fixed 4×4
//! matrices, the momentum-space free Hamiltonian, its eigensystem, and the
//! free resolvent.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::{Mat4, Vec4};

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The three Pauli matrices.
pub fn pauli() -> [Matrix2<C64>; 3] {
    [
        Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    ]
}

/// The three α matrices in the Dirac representation (off-diagonal Pauli
/// blocks).
pub fn alpha() -> [Mat4; 3] {
    let s = pauli();
    let mut out = [Mat4::zeros(); 3];
    for (k, sk) in s.iter().enumerate() {
        let mut a = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                a[(i, j + 2)] = sk[(i, j)];
                a[(i + 2, j)] = sk[(i, j)];
            }
        }
        out[k] = a;
    }
    out
}

/// The β matrix, `diag(1, 1, -1, -1)`.
pub fn beta() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(c(1., 0.), c(1., 0.), c(-1., 0.), c(-1., 0.)))
}

/// The full set of fixed matrices, bundled for callers that need all of them.
#[derive(Clone, Debug)]
pub struct DiracAlgebra {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
    pub sigma: [Matrix2<C64>; 3],
}

impl DiracAlgebra {
    pub fn new() -> Self {
        Self {
            alpha: alpha(),
            beta: beta(),
            sigma: pauli(),
        }
    }
}

impl Default for DiracAlgebra {
    fn default() -> Self {
        Self::new()
    }
}

/// `α·v` for a real 3-vector `v`.
pub fn alpha_dot(v: [f64; 3]) -> Mat4 {
    let a = alpha();
    a[0] * c(v[0], 0.) + a[1] * c(v[1], 0.) + a[2] * c(v[2], 0.)
}

/// Momentum-space free Hamiltonian `H₀(q) = mβ + α·q`.
pub fn free_hamiltonian(q: [f64; 3], m: f64) -> Mat4 {
    let (q1, q2, q3) = (q[0], q[1], q[2]);
    Mat4::new(
        c(m, 0.),
        c(0., 0.),
        c(q3, 0.),
        c(q1, -q2),
        c(0., 0.),
        c(m, 0.),
        c(q1, q2),
        c(-q3, 0.),
        c(q3, 0.),
        c(q1, -q2),
        c(-m, 0.),
        c(0., 0.),
        c(q1, q2),
        c(-q3, 0.),
        c(0., 0.),
        c(-m, 0.),
    )
}

/// Eigensystem of `H₀(q)`: doubly degenerate eigenvalues `∓√(m²+|q|²)` and a
/// unitary matrix of eigenvectors.
///
/// The eigenvectors use the spinor closed form with two-component selectors
/// `χ ∈ {(1,0), (0,1)}`, which stays regular at `q = 0` where the textbook
/// component formulas degenerate. Columns are ordered `(-, -, +, +)`.
#[derive(Clone, Debug)]
pub struct FreeEigensystem {
    pub eigenvalues: [f64; 4],
    /// Unitary matrix whose columns are the normalised eigenvectors.
    pub vectors: Mat4,
}

impl FreeEigensystem {
    pub fn new(q: [f64; 3], m: f64) -> Self {
        let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        let e = (m * m + q2).sqrt();
        let np = e + m;
        let n = 1.0 / (2.0 * e * np).sqrt();
        // σ·q applied to the two selectors
        let sq1 = [c(q[2], 0.), c(q[0], q[1])]; // (σ·q)(1,0)
        let sq2 = [c(q[0], -q[1]), c(-q[2], 0.)]; // (σ·q)(0,1)
        let npc = c(np, 0.);
        let nn = c(n, 0.);

        let col1 = Vec4::new(-sq1[0], -sq1[1], npc, c(0., 0.)) * nn;
        let col2 = Vec4::new(-sq2[0], -sq2[1], c(0., 0.), npc) * nn;
        let col3 = Vec4::new(npc, c(0., 0.), sq1[0], sq1[1]) * nn;
        let col4 = Vec4::new(c(0., 0.), npc, sq2[0], sq2[1]) * nn;

        let vectors = Mat4::from_columns(&[col1, col2, col3, col4]);
        FreeEigensystem {
            eigenvalues: [-e, -e, e, e],
            vectors,
        }
    }

    /// Eigenvector for channel `n` (1-based, matching the `(-,-,+,+)` order).
    pub fn channel_vector(&self, n: usize) -> Vec4 {
        Vec4::from(self.vectors.column(n - 1))
    }

    /// Diagonal matrix of eigenvalues.
    pub fn diagonal(&self) -> Mat4 {
        Mat4::from_diagonal(&Vec4::new(
            c(self.eigenvalues[0], 0.),
            c(self.eigenvalues[1], 0.),
            c(self.eigenvalues[2], 0.),
            c(self.eigenvalues[3], 0.),
        ))
    }

    /// Projector onto the channels open at energies of sign `sign`
    /// (negative sign: columns 1,2; positive: columns 3,4).
    pub fn open_projector(&self, sign: f64) -> Mat4 {
        let (a, b) = if sign < 0.0 { (0, 1) } else { (2, 3) };
        let ga = self.vectors.column(a);
        let gb = self.vectors.column(b);
        ga * ga.adjoint() + gb * gb.adjoint()
    }
}

/// Free resolvent `(H₀(q) - μ)⁻¹` via the rational closed form
/// `(H₀ + μ) / (m² + |q|² - μ²)`.
pub fn free_resolvent(q: [f64; 3], m: f64, mu: C64) -> Result<Mat4> {
    let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    let denom = C64::new(m * m + q2, 0.0) - mu * mu;
    let scale = m * m + q2 + mu.norm_sqr();
    if denom.norm() < 1e-14 * scale.max(1e-300) {
        return Err(Error::SingularShell { mu: mu.re, q2 });
    }
    let num = free_hamiltonian(q, m) + Mat4::identity() * mu;
    Ok(num / denom)
}

/// Branch of `√(μ² - m²)` used by every kernel: the root with `Im ≥ 0`,
/// which is the boundary value from the upper half-plane on the real axis.
/// On the real axis it is `+√(λ²-m²)` for `λ > m`, `-√(λ²-m²)` for
/// `λ < -m`, and `i√(m²-λ²)` inside the gap.
pub fn momentum_branch(mu: C64, m: f64) -> C64 {
    // normalise -0.0 imaginary parts so real inputs take the upper branch
    let mu = if mu.im == 0.0 {
        C64::new(mu.re, 0.0)
    } else {
        mu
    };
    let k = (mu - m).sqrt() * (mu + m).sqrt();
    if k.im < 0.0 {
        -k
    } else {
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frob(m: &Mat4) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn anticommutation_relations() {
        let a = alpha();
        let b = beta();
        let id = Mat4::identity();
        for s in 0..3 {
            assert_abs_diff_eq!(frob(&(a[s] * a[s] - id)), 0.0, epsilon = 0.0);
            assert_abs_diff_eq!(frob(&(a[s] * b + b * a[s])), 0.0, epsilon = 0.0);
            for t in 0..3 {
                if s != t {
                    assert_abs_diff_eq!(frob(&(a[s] * a[t] + a[t] * a[s])), 0.0, epsilon = 0.0);
                }
            }
        }
        assert_abs_diff_eq!(frob(&(b * b - id)), 0.0, epsilon = 0.0);
        for s in 0..3 {
            assert_abs_diff_eq!(frob(&(a[s].adjoint() - a[s])), 0.0, epsilon = 0.0);
        }
    }

    #[test]
    fn hamiltonian_at_rest_is_diagonal() {
        let h = free_hamiltonian([0., 0., 0.], 1.0);
        let expected = Mat4::from_diagonal(&Vec4::new(
            c(1., 0.),
            c(1., 0.),
            c(-1., 0.),
            c(-1., 0.),
        ));
        assert_abs_diff_eq!(frob(&(h - expected)), 0.0, epsilon = 0.0);
    }

    #[test]
    fn hamiltonian_unit_z_momentum_entries() {
        let h = free_hamiltonian([0., 0., 1.], 1.0);
        assert_eq!(h[(0, 2)], c(1., 0.));
        assert_eq!(h[(1, 3)], c(-1., 0.));
        assert_eq!(h[(2, 0)], c(1., 0.));
    }

    #[test]
    fn clifford_square_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let q = [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ];
            let m: f64 = rng.gen_range(0.1..4.0);
            let h = free_hamiltonian(q, m);
            let scale = m * m + q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
            let res = h * h - Mat4::identity() * c(scale, 0.);
            assert!(frob(&res) < 1e-13 * scale.max(1.0));
        }
    }

    #[test]
    fn eigensystem_values_and_unitarity() {
        let sys = FreeEigensystem::new([0., 0., 0.], 1.0);
        assert_eq!(sys.eigenvalues, [-1., -1., 1., 1.]);

        let sys = FreeEigensystem::new([3., 0., 4.], 1.0);
        assert_abs_diff_eq!(sys.eigenvalues[2], 26f64.sqrt(), epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let q = [
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ];
            let m = rng.gen_range(0.05..3.0);
            let sys = FreeEigensystem::new(q, m);
            let z = sys.vectors;
            assert!(frob(&(z.adjoint() * z - Mat4::identity())) <= 1e-12);
            // eigen residual
            let h = free_hamiltonian(q, m);
            for k in 0..4 {
                let g = Vec4::from(z.column(k));
                let r = h * g - g * c(sys.eigenvalues[k], 0.);
                assert!(r.norm() <= 1e-11);
            }
            // spectral decomposition
            let rebuilt = z * sys.diagonal() * z.adjoint();
            assert!(frob(&(h - rebuilt)) <= 1e-11);
        }
    }

    /// Span agreement with the component formulas away from q = 0, compared
    /// through projectors (the degenerate pairs are only defined up to
    /// unitary mixing).
    #[test]
    fn eigenvectors_span_component_formulas() {
        use nalgebra::Matrix4x2;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let q = [
                rng.gen_range(-2.0..2.0f64),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            if (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt() < 1e-6 {
                continue;
            }
            let m = rng.gen_range(0.2..2.0);
            let e = (m * m + q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
            // component-form eigenvectors for the two branches
            let gneg = [
                Vec4::new(
                    c(-q[0], q[1]) / c(m + e, 0.),
                    c(q[2], 0.) / c(m + e, 0.),
                    c(0., 0.),
                    c(1., 0.),
                ),
                Vec4::new(
                    c(-q[2], 0.) / c(m + e, 0.),
                    c(-q[0], -q[1]) / c(m + e, 0.),
                    c(1., 0.),
                    c(0., 0.),
                ),
            ];
            let gpos = [
                Vec4::new(
                    c(-q[0], q[1]) / c(m - e, 0.),
                    c(q[2], 0.) / c(m - e, 0.),
                    c(0., 0.),
                    c(1., 0.),
                ),
                Vec4::new(
                    c(-q[2], 0.) / c(m - e, 0.),
                    c(-q[0], -q[1]) / c(m - e, 0.),
                    c(1., 0.),
                    c(0., 0.),
                ),
            ];
            let sys = FreeEigensystem::new(q, m);
            for (pair, ours) in [(gneg, [0usize, 1]), (gpos, [2, 3])] {
                let a = Matrix4x2::from_columns(&pair);
                let gram = (a.adjoint() * a).try_inverse().unwrap();
                let p_ref = a * gram * a.adjoint();
                let g1 = sys.vectors.column(ours[0]);
                let g2 = sys.vectors.column(ours[1]);
                let p_ours = g1 * g1.adjoint() + g2 * g2.adjoint();
                assert!(frob(&(p_ref - p_ours)) < 1e-10);
            }
        }
    }

    #[test]
    fn resolvent_at_rest_matches_direct_inverse() {
        // direct 4×4 inversion oracle
        let mu = c(0., 1.);
        let got = free_resolvent([0., 0., 0.], 1.0, mu).unwrap();
        let oracle = (free_hamiltonian([0., 0., 0.], 1.0) - Mat4::identity() * mu)
            .try_inverse()
            .unwrap();
        assert!(frob(&(got - oracle)) < 1e-14);
        let expect = 1.0 / c(1., -1.);
        assert_abs_diff_eq!(got[(0, 0)].re, expect.re, epsilon = 1e-15);
        assert_abs_diff_eq!(got[(0, 0)].im, expect.im, epsilon = 1e-15);
        assert_abs_diff_eq!(got[(2, 2)].re, (-1.0 / c(1., 1.)).re, epsilon = 1e-15);
    }

    #[test]
    fn resolvent_rational_identity() {
        // (H₀-λ)⁻¹ = H₀⁻¹ + H₀⁻¹ λ²/(λ₁²-λ²) + λ/(λ₁²-λ²)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let q = [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ];
            let m = rng.gen_range(0.2..2.0);
            let mu = c(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0));
            let direct = free_resolvent(q, m, mu).unwrap();
            let h0inv = free_resolvent(q, m, c(0., 0.)).unwrap();
            let lam1sq = m * m + q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
            let denom = C64::new(lam1sq, 0.) - mu * mu;
            let rhs = h0inv + h0inv * (mu * mu / denom) + Mat4::identity() * (mu / denom);
            assert!(frob(&(direct - rhs)) <= 1e-10 * frob(&direct));
        }
    }

    #[test]
    fn resolvent_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..50 {
            let q = [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ];
            let m = 1.0;
            let mu = c(0.3, 0.7);
            let r = free_resolvent(q, m, mu).unwrap();
            let h = free_hamiltonian(q, m);
            let res = (h - Mat4::identity() * mu) * r - Mat4::identity();
            assert!(frob(&res) <= 1e-12);
        }
    }

    #[test]
    fn resolvent_on_shell_pole_detected() {
        // λ real, |λ| ≥ m, |q|² = λ² - m²
        let err = free_resolvent([0., 0., 1.], 1.0, c(2f64.sqrt(), 0.));
        assert!(matches!(err, Err(Error::SingularShell { .. })));
    }

    #[test]
    fn momentum_branch_signs() {
        let m = 1.0;
        let k = momentum_branch(c(2f64.sqrt(), 0.), m);
        assert_abs_diff_eq!(k.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.im, 0.0, epsilon = 1e-14);
        let k = momentum_branch(c(-(2f64.sqrt()), 0.), m);
        assert_abs_diff_eq!(k.re, -1.0, epsilon = 1e-14);
        let k = momentum_branch(c(0.3, 0.), m);
        assert!(k.re.abs() < 1e-14 && k.im > 0.0);
        let k = momentum_branch(c(1.5, 0.5), m);
        assert!(k.im > 0.0);
        // continuity onto the axis from above
        let k_eps = momentum_branch(c(-2.0, 1e-9), m);
        let k_axis = momentum_branch(c(-2.0, 0.), m);
        assert!((k_eps - k_axis).norm() < 1e-6);
    }

    #[test]
    fn open_projector_splits_identity() {
        let sys = FreeEigensystem::new([0.4, -0.3, 1.1], 0.8);
        let p = sys.open_projector(1.0) + sys.open_projector(-1.0);
        assert!(frob(&(p - Mat4::identity())) < 1e-13);
    }
}

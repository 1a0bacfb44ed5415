//! Potential families, assembly of the 4×4 matrix potential from scalar and
//! vector parts, and the pointwise factorisation `V = V₁ W₁ V₁`.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::algebra::alpha;
use crate::error::{Error, Result};
use crate::{Mat4, Vec4};

/// Analytic scalar potential families. All built-in families decay at
/// infinity; the square well has compact support.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarPotential {
    Zero,
    /// `g·e^{-μ₀|r|}/|r|`
    Yukawa { strength: f64, screening: f64 },
    /// `g·e^{-|r|²/w²}`
    Gaussian { strength: f64, width: f64 },
    /// `depth` for `|r| ≤ radius`, zero outside (negative depth = attractive)
    SquareWell { depth: f64, radius: f64 },
    /// Values on a uniform lattice, nearest-node lookup.
    Tabulated(ScalarTable),
}

impl ScalarPotential {
    pub fn eval(&self, r: [f64; 3]) -> f64 {
        let rho = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        match self {
            ScalarPotential::Zero => 0.0,
            ScalarPotential::Yukawa {
                strength,
                screening,
            } => {
                if rho == 0.0 {
                    f64::INFINITY * strength.signum()
                } else {
                    strength * (-screening * rho).exp() / rho
                }
            }
            ScalarPotential::Gaussian { strength, width } => {
                strength * (-(rho * rho) / (width * width)).exp()
            }
            ScalarPotential::SquareWell { depth, radius } => {
                if rho <= *radius {
                    *depth
                } else {
                    0.0
                }
            }
            ScalarPotential::Tabulated(t) => t.eval(r),
        }
    }

    /// Mean over the cubic cell of side `h` centred at `center`, sampled on
    /// an `n³` sub-lattice. `n = 1` reduces to the centre value. Averaging
    /// keeps quadrature honest for discontinuous wells and integrable-singular
    /// families.
    pub fn cell_mean(&self, center: [f64; 3], h: f64, n: usize) -> f64 {
        if n <= 1 {
            return self.eval(center);
        }
        let mut acc = 0.0;
        let step = h / n as f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let off = |t: usize| (t as f64 + 0.5) * step - 0.5 * h;
                    acc += self.eval([center[0] + off(i), center[1] + off(j), center[2] + off(k)]);
                }
            }
        }
        acc / (n * n * n) as f64
    }

    /// True for families that are functions of `|r|` only.
    pub fn is_radial(&self) -> bool {
        !matches!(self, ScalarPotential::Tabulated(_))
    }

    /// The radial profile, for the partial-wave machinery.
    pub fn radial(&self) -> Result<impl Fn(f64) -> f64 + '_> {
        if !self.is_radial() {
            return Err(Error::NonRadialPotential);
        }
        Ok(move |rho: f64| self.eval([rho, 0.0, 0.0]))
    }
}

/// Scalar values tabulated on a uniform lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarTable {
    pub spacing: f64,
    pub nodes: Vec<[f64; 3]>,
    pub values: Vec<f64>,
}

impl ScalarTable {
    fn eval(&self, r: [f64; 3]) -> f64 {
        let h = self.spacing;
        for (node, v) in self.nodes.iter().zip(&self.values) {
            if (r[0] - node[0]).abs() <= 0.5 * h
                && (r[1] - node[1]).abs() <= 0.5 * h
                && (r[2] - node[2]).abs() <= 0.5 * h
            {
                return *v;
            }
        }
        0.0
    }
}

/// Matrix potential for the Dirac problem: `V(r) = -eν(r)I₄ + e α·A(r)`,
/// Hermitian by construction, or a tabulated Hermitian 4×4 field.
#[derive(Clone, Debug)]
pub enum MatrixPotential {
    Composed {
        charge: f64,
        scalar: ScalarPotential,
        vector: [ScalarPotential; 3],
    },
    Tabulated(MatrixTable),
}

impl MatrixPotential {
    /// Purely electrostatic potential `-eν(r)I₄`.
    pub fn scalar(charge: f64, nu: ScalarPotential) -> Self {
        MatrixPotential::Composed {
            charge,
            scalar: nu,
            vector: [
                ScalarPotential::Zero,
                ScalarPotential::Zero,
                ScalarPotential::Zero,
            ],
        }
    }

    pub fn eval(&self, r: [f64; 3]) -> Mat4 {
        match self {
            MatrixPotential::Composed {
                charge,
                scalar,
                vector,
            } => {
                let a = alpha();
                let mut v = Mat4::identity() * C64::new(-charge * scalar.eval(r), 0.0);
                for s in 0..3 {
                    let val = vector[s].eval(r);
                    if val != 0.0 {
                        v += a[s] * C64::new(charge * val, 0.0);
                    }
                }
                v
            }
            MatrixPotential::Tabulated(t) => t.eval(r),
        }
    }

    /// Cell-mean analogue of [`ScalarPotential::cell_mean`].
    pub fn cell_mean(&self, center: [f64; 3], h: f64, n: usize) -> Mat4 {
        match self {
            MatrixPotential::Composed {
                charge,
                scalar,
                vector,
            } => {
                let a = alpha();
                let mut v =
                    Mat4::identity() * C64::new(-charge * scalar.cell_mean(center, h, n), 0.0);
                for s in 0..3 {
                    let val = vector[s].cell_mean(center, h, n);
                    if val != 0.0 {
                        v += a[s] * C64::new(charge * val, 0.0);
                    }
                }
                v
            }
            MatrixPotential::Tabulated(t) => t.eval(center),
        }
    }

    pub fn is_radial_scalar(&self) -> bool {
        match self {
            MatrixPotential::Composed { scalar, vector, .. } => {
                scalar.is_radial() && vector.iter().all(|a| matches!(a, ScalarPotential::Zero))
            }
            MatrixPotential::Tabulated(_) => false,
        }
    }
}

/// Hermitian 4×4 values tabulated on a uniform lattice.
#[derive(Clone, Debug)]
pub struct MatrixTable {
    pub spacing: f64,
    pub nodes: Vec<[f64; 3]>,
    pub values: Vec<Mat4>,
}

impl MatrixTable {
    fn eval(&self, r: [f64; 3]) -> Mat4 {
        let h = self.spacing;
        for (node, v) in self.nodes.iter().zip(&self.values) {
            if (r[0] - node[0]).abs() <= 0.5 * h
                && (r[1] - node[1]).abs() <= 0.5 * h
                && (r[2] - node[2]).abs() <= 0.5 * h
            {
                return *v;
            }
        }
        Mat4::zeros()
    }

    /// Read the columnar text format: one node per line,
    /// `x y z re(V_00) im(V_00) re(V_01) ... ` row-major over the 16 entries.
    /// Lines starting with `#` are comments. Hermiticity is validated.
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Config(format!("line {}: bad number: {e}", ln + 1)))
                })
                .collect::<Result<_>>()?;
            if cols.len() != 3 + 32 {
                return Err(Error::Config(format!(
                    "line {}: expected 35 columns, got {}",
                    ln + 1,
                    cols.len()
                )));
            }
            nodes.push([cols[0], cols[1], cols[2]]);
            let mut m = Mat4::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    let base = 3 + 2 * (4 * i + j);
                    m[(i, j)] = C64::new(cols[base], cols[base + 1]);
                }
            }
            let herm_defect = (m - m.adjoint()).norm();
            if herm_defect > 1e-10 * (1.0 + m.norm()) {
                return Err(Error::Config(format!(
                    "line {}: tabulated matrix is not Hermitian (defect {herm_defect:.2e})",
                    ln + 1
                )));
            }
            values.push(m);
        }
        if nodes.is_empty() {
            return Err(Error::Config("tabulated potential file is empty".into()));
        }
        let spacing = infer_spacing(&nodes)?;
        Ok(MatrixTable {
            spacing,
            nodes,
            values,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(
            f,
            "# x y z then re/im of V_ij row-major over (i,j); length units match the run"
        )?;
        for (node, m) in self.nodes.iter().zip(&self.values) {
            let mut row = format!("{} {} {}", node[0], node[1], node[2]);
            for i in 0..4 {
                for j in 0..4 {
                    row.push_str(&format!(" {} {}", m[(i, j)].re, m[(i, j)].im));
                }
            }
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

fn infer_spacing(nodes: &[[f64; 3]]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (i, a) in nodes.iter().enumerate() {
        for b in nodes.iter().skip(i + 1) {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            if d > 1e-12 && d < best {
                best = d;
            }
        }
        if i > 64 {
            break;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Config(
            "cannot infer lattice spacing from tabulated nodes".into(),
        ))
    }
}

/// Pointwise factorisation data: `V₁` Hermitian positive semidefinite with
/// `V = V₁ W₁ V₁`, and `W₁` Hermitian with eigenvalues in `{-1, 0, 1}`.
#[derive(Clone, Debug)]
pub struct Factorized {
    pub v1: Mat4,
    pub w1: Mat4,
}

/// Eigen-factorise a Hermitian matrix into `V₁ = U|D|^{1/2}U*` and
/// `W₁ = U·sgn(D)·U*`, with `sgn(0) = 0` so the reconstruction is exact for
/// rank-deficient input. Eigenvalues are ordered descending and each
/// eigenvector's phase is fixed (first non-negligible component real
/// positive) so outputs are reproducible.
pub fn factorize(v: &Mat4) -> Factorized {
    let se = Matrix4::from(*v).symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let scale = se.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let mut u = Mat4::zeros();
    let mut d_abs_sqrt = Vec4::zeros();
    let mut d_sign = Vec4::zeros();
    for (slot, &k) in order.iter().enumerate() {
        let mut col = Vec4::from(se.eigenvectors.column(k));
        // deterministic phase: rotate the first non-negligible component to be
        // real positive
        for i in 0..4 {
            if col[i].norm() > 1e-12 {
                let phase = col[i] / C64::new(col[i].norm(), 0.0);
                col /= phase;
                break;
            }
        }
        u.set_column(slot, &col);
        let ev = se.eigenvalues[order[slot]];
        d_abs_sqrt[slot] = C64::new(ev.abs().sqrt(), 0.0);
        d_sign[slot] = if ev.abs() <= 1e-14 * scale.max(1e-300) {
            C64::new(0.0, 0.0)
        } else {
            C64::new(ev.signum(), 0.0)
        };
    }
    let v1 = u * Mat4::from_diagonal(&d_abs_sqrt) * u.adjoint();
    let w1 = u * Mat4::from_diagonal(&d_sign) * u.adjoint();
    Factorized { v1, w1 }
}

/// Effective-support cutoff: nodes with `‖V‖ ≤ eps_cut` are dropped when
/// building grids. The default is `1e-8` times the largest norm seen.
pub fn default_support_cutoff(max_norm: f64) -> f64 {
    1e-8 * max_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frob(m: &Mat4) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn op_norm(m: &Mat4) -> f64 {
        let se = (m.adjoint() * m).symmetric_eigen();
        se.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt()
    }

    fn random_hermitian(rng: &mut impl Rng) -> Mat4 {
        let mut a = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        (a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn assemble_scalar_yukawa() {
        let v = MatrixPotential::scalar(
            1.0,
            ScalarPotential::Yukawa {
                strength: 1.0,
                screening: 1.0,
            },
        );
        let m = v.eval([1.0, 0.0, 0.0]);
        let expect = Mat4::identity() * C64::new(-(-1.0f64).exp(), 0.0);
        assert!(frob(&(m - expect)) < 1e-15);
    }

    #[test]
    fn assemble_vector_part_traceless_hermitian() {
        let v = MatrixPotential::Composed {
            charge: 1.0,
            scalar: ScalarPotential::Zero,
            vector: [
                ScalarPotential::Zero,
                ScalarPotential::Zero,
                ScalarPotential::Gaussian {
                    strength: 0.7,
                    width: 1.0,
                },
            ],
        };
        let m = v.eval([0.3, 0.1, -0.2]);
        assert!(frob(&(m - m.adjoint())) < 1e-15);
        assert!(m.trace().norm() < 1e-15);
        let a3 = alpha()[2];
        let amp = 0.7 * (-(0.09f64 + 0.01 + 0.04) / 1.0).exp();
        assert!(frob(&(m - a3 * C64::new(amp, 0.0))) < 1e-15);
    }

    #[test]
    fn zero_potential_assembles_to_zero() {
        let v = MatrixPotential::scalar(1.0, ScalarPotential::Zero);
        assert_eq!(frob(&v.eval([0.4, 0.5, 0.6])), 0.0);
    }

    #[test]
    fn factorize_diagonal_case() {
        let v = Mat4::from_diagonal(&Vec4::new(
            C64::new(4., 0.),
            C64::new(1., 0.),
            C64::new(0., 0.),
            C64::new(-9., 0.),
        ));
        let f = factorize(&v);
        let v1_expect = Mat4::from_diagonal(&Vec4::new(
            C64::new(2., 0.),
            C64::new(1., 0.),
            C64::new(0., 0.),
            C64::new(3., 0.),
        ));
        let w1_expect = Mat4::from_diagonal(&Vec4::new(
            C64::new(1., 0.),
            C64::new(1., 0.),
            C64::new(0., 0.),
            C64::new(-1., 0.),
        ));
        assert!(frob(&(f.v1 - v1_expect)) < 1e-12);
        assert!(frob(&(f.w1 - w1_expect)) < 1e-12);
    }

    #[test]
    fn factorize_attractive_scalar() {
        let c = 0.37;
        let v = Mat4::identity() * C64::new(-c, 0.0);
        let f = factorize(&v);
        assert!(frob(&(f.v1 - Mat4::identity() * C64::new(c.sqrt(), 0.0))) < 1e-14);
        assert!(frob(&(f.w1 + Mat4::identity())) < 1e-14);
    }

    #[test]
    fn factorize_reconstruction_and_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..400 {
            let v = random_hermitian(&mut rng);
            let f = factorize(&v);
            assert!(frob(&(f.v1 * f.w1 * f.v1 - v)) <= 1e-12 * frob(&v).max(1.0));
            assert_abs_diff_eq!(op_norm(&f.v1).powi(2), op_norm(&v), epsilon = 1e-12);
            assert!(op_norm(&f.w1) <= 1.0 + 1e-12);
            if op_norm(&v) > 1e-10 {
                assert_abs_diff_eq!(op_norm(&f.w1), 1.0, epsilon = 1e-10);
            }
            // V₁ Hermitian PSD
            assert!(frob(&(f.v1 - f.v1.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn factorize_stable_under_tiny_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let v = random_hermitian(&mut rng);
            let f1 = factorize(&v);
            let f2 = factorize(&(v + Mat4::identity() * C64::new(1e-13, 0.0)));
            assert!(frob(&(f1.v1 - f2.v1)) <= 1e-6);
        }
    }

    #[test]
    fn tabulated_roundtrip() {
        let dir = std::env::temp_dir().join("scatter_core_tab_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.tab");
        let nodes = vec![[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]];
        let values: Vec<Mat4> = nodes
            .iter()
            .enumerate()
            .map(|(i, _)| {
                Mat4::identity() * C64::new(-(i as f64) - 1.0, 0.0)
                    + alpha()[0] * C64::new(0.1, 0.0)
            })
            .collect();
        let table = MatrixTable {
            spacing: 0.5,
            nodes: nodes.clone(),
            values: values.clone(),
        };
        table.write(&path).unwrap();
        let back = MatrixTable::read(&path).unwrap();
        assert_eq!(back.nodes.len(), 3);
        assert!((back.spacing - 0.5).abs() < 1e-12);
        for (a, b) in back.values.iter().zip(&values) {
            assert!(frob(&(a - b)) < 1e-12);
        }
        let non_herm = dir.join("bad.tab");
        let mut line = String::from("0 0 0");
        for k in 0..32 {
            line.push_str(if k == 2 { " 1.0" } else { " 0.0" });
        }
        std::fs::write(&non_herm, line).unwrap();
        assert!(MatrixTable::read(&non_herm).is_err());
    }

    #[test]
    fn cell_mean_handles_integrable_singularity() {
        let y = ScalarPotential::Yukawa {
            strength: 1.0,
            screening: 1.0,
        };
        let m = y.cell_mean([0.0, 0.0, 0.0], 0.25, 6);
        assert!(m.is_finite() && m > 0.0);
    }
}

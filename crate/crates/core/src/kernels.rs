//! Translation-invariant integral kernels: the scalar outgoing-wave kernel,
//! the zero-energy (mass) kernel, the full free-resolvent kernel for the
//! Dirac operator, its adjoint-reflected partner, and the outgoing Helmholtz
//! kernel for the Schrödinger problem.
//!
//! All kernels are pointwise `O(1)` closed forms. The resolvent kernel is the
//! Fourier transform of the rational momentum-space resolvent, collapsed by
//! partial fractions; it is certified against two independent oracles (a
//! momentum-space quadrature and a direct convolution) in [`crate::verify`]
//! and in the acceptance suite.

use num_complex::Complex64 as C64;

use crate::algebra::{alpha_dot, beta, momentum_branch};
use crate::error::{Error, Result};
use crate::Mat4;

/// `√(π/2)`, the scalar prefactor shared by all closed-form kernels.
pub const SQRT_PI_OVER_2: f64 = 1.2533141373155003;

/// Integral of `1/|x|` over the unit cube centred at the origin. Used for the
/// singular-cell correction of every `1/|r|` kernel: the integral over a cell
/// of side `h` is this constant times `h²`.
///
/// Value frozen from the adaptive-quadrature oracle
/// ([`crate::verify::unit_cube_inverse_r`]), which the test suite re-runs.
pub const UNIT_CUBE_INV_R: f64 = 2.3800773639725064;

/// Integral of `1/|x|²` over the unit cube centred at the origin (scales as
/// `h` for a cell of side `h`). Documented for completeness: the `1/|r|²`
/// part of the resolvent kernel carries an odd angular factor, so its
/// self-cell integral vanishes by symmetry and this constant never enters an
/// operator build.
pub const UNIT_CUBE_INV_R2: f64 = 7.674124222443731;

#[inline]
fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

#[inline]
fn check_nonzero(rho: f64) -> Result<()> {
    if rho <= 0.0 || !rho.is_finite() {
        Err(Error::SingularPoint)
    } else {
        Ok(())
    }
}

/// Scalar outgoing-wave kernel `√(π/2)·e^{iκ|r|}/|r|` where `κ` is the
/// upper-branch root of `μ² - m²`. On the real axis this gives `e^{+iκ|r|}`
/// for `λ > m` and `e^{-iκ|r|}` for `λ < -m`; for `Im μ > 0` it decays
/// exponentially.
pub fn outgoing_wave_kernel(r: [f64; 3], mu: C64, m: f64) -> Result<C64> {
    let rho = norm3(r);
    check_nonzero(rho)?;
    let kappa = momentum_branch(mu, m);
    Ok((C64::new(0.0, rho) * kappa).exp() * SQRT_PI_OVER_2 / rho)
}

/// Zero-energy kernel (Fourier transform of the inverse free Hamiltonian):
/// `√(π/2)·e^{-m|r|}·[mβ + i(m + 1/|r|)(α·r̂)]/|r|`.
pub fn zero_energy_kernel(r: [f64; 3], m: f64) -> Result<Mat4> {
    let rho = norm3(r);
    check_nonzero(rho)?;
    let rhat = [r[0] / rho, r[1] / rho, r[2] / rho];
    let mat = beta() * C64::new(m, 0.0) + alpha_dot(rhat) * C64::new(0.0, m + 1.0 / rho);
    Ok(mat * C64::new(SQRT_PI_OVER_2 * (-m * rho).exp() / rho, 0.0))
}

/// Closed-form free-resolvent kernel
/// `√(π/2)·(e^{iκ|r|}/|r|)·[mβ + μ + (κ + i/|r|)(α·r̂)]`,
/// valid on the whole analytic domain (complex `μ`, and real `μ` strictly
/// inside the gap where it decays like a Yukawa kernel). No gap guard: this
/// entry point backs the spectral-gap machinery and Green-function work.
pub fn resolvent_kernel_analytic(r: [f64; 3], mu: C64, m: f64) -> Result<Mat4> {
    let rho = norm3(r);
    check_nonzero(rho)?;
    let rhat = [r[0] / rho, r[1] / rho, r[2] / rho];
    let kappa = momentum_branch(mu, m);
    let mat = beta() * C64::new(m, 0.0)
        + Mat4::identity() * mu
        + alpha_dot(rhat) * (kappa + C64::new(0.0, 1.0 / rho));
    let scalar = (C64::new(0.0, rho) * kappa).exp() * SQRT_PI_OVER_2 / rho;
    Ok(mat * scalar)
}

/// Free-resolvent kernel with the scattering-domain contract: `Im μ ≥ 0`,
/// and real `μ` must satisfy `|μ| > m`.
pub fn resolvent_kernel(r: [f64; 3], mu: C64, m: f64) -> Result<Mat4> {
    if mu.im < 0.0 {
        return Err(Error::BranchError { mu: mu.re, m });
    }
    if mu.im == 0.0 && mu.re.abs() <= m {
        return Err(Error::BranchError { mu: mu.re, m });
    }
    resolvent_kernel_analytic(r, mu, m)
}

/// Adjoint-reflected kernel at real energy: the conjugate transpose of the
/// resolvent kernel evaluated at the reflected point.
pub fn adjoint_resolvent_kernel(r: [f64; 3], lambda: f64, m: f64) -> Result<Mat4> {
    let b = resolvent_kernel([-r[0], -r[1], -r[2]], C64::new(lambda, 0.0), m)?;
    Ok(b.adjoint())
}

/// Outgoing Helmholtz kernel `e^{i√λ|r-s|}/(4π|r-s|)` for `λ > 0`.
pub fn helmholtz_kernel(r: [f64; 3], s: [f64; 3], lambda: f64) -> Result<C64> {
    if lambda <= 0.0 {
        return Err(Error::Config(format!(
            "helmholtz kernel needs λ > 0, got {lambda}"
        )));
    }
    Ok(helmholtz_green(
        [r[0] - s[0], r[1] - s[1], r[2] - s[2]],
        C64::new(lambda, 0.0),
    )?)
}

/// Scalar Green kernel `e^{i√z|u|}/(4π|u|)` for complex energy `z` with the
/// upper-branch square root (decaying for `z < 0` and for `Im z > 0`).
pub fn helmholtz_green(u: [f64; 3], z: C64) -> Result<C64> {
    let rho = norm3(u);
    check_nonzero(rho)?;
    let z = if z.im == 0.0 { C64::new(z.re, 0.0) } else { z };
    let mut k = z.sqrt();
    if k.im < 0.0 {
        k = -k;
    }
    Ok((C64::new(0.0, rho) * k).exp() / (4.0 * std::f64::consts::PI * rho))
}

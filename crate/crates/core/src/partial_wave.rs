//! Independent radial oracle for spherically symmetric potentials on
//! `-Δ + V`: outward integration of the radial equation per angular momentum,
//! phase-shift extraction by matching to spherical Bessel asymptotics, the
//! partial-wave amplitude and cross section, and a shooting-method
//! bound-state search for `λ < 0`.
//!
//! Everything here is deliberately independent of the Nyström machinery so it
//! can certify it.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::special::{legendre_p, spherical_j, spherical_j_deriv, spherical_y, spherical_y_deriv};

/// Integrate `u'' = (V(r) + l(l+1)/r² - λ)·u` outward with fixed-step RK4,
/// splitting exactly at the given breakpoints (potential discontinuities).
/// Returns `(u, u')` at `r_end`, rescaled along the way to avoid overflow.
fn integrate_radial<V>(
    v: &V,
    lambda: f64,
    l: usize,
    r_end: f64,
    steps_per_unit: usize,
    breakpoints: &[f64],
) -> (f64, f64)
where
    V: Fn(f64) -> f64,
{
    let r0: f64 = 1e-6;
    // u ~ r^{l+1} near the origin
    let mut u = r0.powi(l as i32 + 1);
    let mut up = (l as f64 + 1.0) * r0.powi(l as i32);
    let w = |r: f64, u: f64| (v(r) + (l * (l + 1)) as f64 / (r * r) - lambda) * u;

    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > r0 && b < r_end)
        .collect();
    edges.push(r_end);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut r = r0;
    for &edge in &edges {
        let lo = r;
        let span = edge - r;
        if span <= 0.0 {
            continue;
        }
        let n = ((span * steps_per_unit as f64).ceil() as usize).max(8);
        let h = span / n as f64;
        // stage points on a segment boundary must take the branch of THIS
        // segment, so clamp evaluations into the open interval
        let eps = 1e-9 * h;
        let wseg = |r: f64, u: f64| w(r.clamp(lo + eps, edge - eps), u);
        for _ in 0..n {
            let k1u = up;
            let k1p = wseg(r, u);
            let k2u = up + 0.5 * h * k1p;
            let k2p = wseg(r + 0.5 * h, u + 0.5 * h * k1u);
            let k3u = up + 0.5 * h * k2p;
            let k3p = wseg(r + 0.5 * h, u + 0.5 * h * k2u);
            let k4u = up + h * k3p;
            let k4p = wseg(r + h, u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            up += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            r += h;
            let scale = u.abs().max(up.abs());
            if scale > 1e100 {
                u /= scale;
                up /= scale;
            }
        }
        r = edge;
    }
    (u, up)
}

/// Phase shifts `δ_l` for `l = 0..=l_max` at energy `λ > 0`, by matching the
/// logarithmic derivative at `r_match` (which must lie beyond the effective
/// range of the potential).
pub fn phase_shifts<V>(
    v: &V,
    lambda: f64,
    l_max: usize,
    r_match: f64,
    steps_per_unit: usize,
    breakpoints: &[f64],
) -> Vec<f64>
where
    V: Fn(f64) -> f64,
{
    let k = lambda.sqrt();
    (0..=l_max)
        .map(|l| {
            let (u, up) = integrate_radial(v, lambda, l, r_match, steps_per_unit, breakpoints);
            // u = r·R_l ⇒ R'/R = u'/u - 1/r
            let gamma = up / u - 1.0 / r_match;
            let x = k * r_match;
            let num = k * spherical_j_deriv(l, x) - gamma * spherical_j(l, x);
            let den = k * spherical_y_deriv(l, x) - gamma * spherical_y(l, x);
            // shifts are defined mod π; fold into (-π/2, π/2]
            let d = num.atan2(den);
            d - std::f64::consts::PI * (d / std::f64::consts::PI).round()
        })
        .collect()
}

/// Partial-wave scattering amplitude
/// `f(θ) = (1/√λ)·Σ (2l+1) e^{iδ_l} sin δ_l P_l(cos θ)`.
pub fn pw_amplitude(deltas: &[f64], lambda: f64, cos_theta: f64) -> C64 {
    let k = lambda.sqrt();
    let mut acc = C64::new(0.0, 0.0);
    for (l, &d) in deltas.iter().enumerate() {
        let coeff = (2.0 * l as f64 + 1.0) * d.sin();
        acc += C64::new(0.0, d).exp() * coeff * legendre_p(l, cos_theta);
    }
    acc / C64::new(k, 0.0)
}

/// Conventional total cross section `(4π/λ)·Σ (2l+1) sin²δ_l` (the
/// double-sphere convention used elsewhere in the crate is `4π` times this).
pub fn pw_total_cross_section(deltas: &[f64], lambda: f64) -> f64 {
    let sum: f64 = deltas
        .iter()
        .enumerate()
        .map(|(l, d)| (2.0 * l as f64 + 1.0) * d.sin().powi(2))
        .sum();
    4.0 * std::f64::consts::PI / lambda * sum
}

/// Born-approximation phase shift `δ_l ≈ -√λ ∫ V(r) j_l(√λ r)² r² dr`
/// (midpoint quadrature to `r_max`).
pub fn born_phase<V>(v: &V, lambda: f64, l: usize, r_max: f64, n: usize) -> f64
where
    V: Fn(f64) -> f64,
{
    let k = lambda.sqrt();
    let h = r_max / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let r = (i as f64 + 0.5) * h;
        let j = spherical_j(l, k * r);
        acc += v(r) * j * j * r * r;
    }
    -k * acc * h
}

/// Matching function whose roots are bound-state energies for the given `l`:
/// `u'(R) + τ·u(R)` with `τ = √(-λ)`, normalised for scale.
fn bound_mismatch<V>(
    v: &V,
    lambda: f64,
    l: usize,
    r_match: f64,
    steps_per_unit: usize,
    breakpoints: &[f64],
) -> f64
where
    V: Fn(f64) -> f64,
{
    let (u, up) = integrate_radial(v, lambda, l, r_match, steps_per_unit, breakpoints);
    let tau = (-lambda).sqrt();
    (up + tau * u) / u.abs().max(up.abs()).max(1e-300)
}

/// Bound-state energies in `(lo, 0)` for angular momentum `l`: scan for sign
/// changes of the matching function, then bisect each bracket to `tol`
/// absolute.
#[allow(clippy::too_many_arguments)]
pub fn bound_states<V>(
    v: &V,
    l: usize,
    lo: f64,
    scan_points: usize,
    tol: f64,
    r_match: f64,
    steps_per_unit: usize,
    breakpoints: &[f64],
) -> Vec<f64>
where
    V: Fn(f64) -> f64,
{
    assert!(lo < 0.0);
    let hi = -1e-9;
    let mut roots = Vec::new();
    let mut prev_l = lo;
    let mut prev_f = bound_mismatch(v, lo, l, r_match, steps_per_unit, breakpoints);
    for i in 1..=scan_points {
        let lam = lo + (hi - lo) * i as f64 / scan_points as f64;
        let f = bound_mismatch(v, lam, l, r_match, steps_per_unit, breakpoints);
        if prev_f.is_finite() && f.is_finite() && prev_f * f < 0.0 {
            let (mut a, mut b) = (prev_l, lam);
            let mut fa = prev_f;
            while b - a > tol {
                let m = 0.5 * (a + b);
                let fm = bound_mismatch(v, m, l, r_match, steps_per_unit, breakpoints);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_l = lam;
        prev_f = f;
    }
    roots
}

/// Interior node count of the radial solution at energy `λ`, which equals the
/// number of bound states below `λ` for the given `l`.
pub fn node_count<V>(
    v: &V,
    lambda: f64,
    l: usize,
    r_match: f64,
    steps_per_unit: usize,
    breakpoints: &[f64],
) -> usize
where
    V: Fn(f64) -> f64,
{
    let r0: f64 = 1e-6;
    let mut u = r0.powi(l as i32 + 1);
    let mut up = (l as f64 + 1.0) * r0.powi(l as i32);
    let w = |r: f64, u: f64| (v(r) + (l * (l + 1)) as f64 / (r * r) - lambda) * u;
    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > r0 && b < r_match)
        .collect();
    edges.push(r_match);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut count = 0;
    let mut r = r0;
    for &edge in &edges {
        let lo = r;
        let span = edge - r;
        if span <= 0.0 {
            continue;
        }
        let n = ((span * steps_per_unit as f64).ceil() as usize).max(8);
        let h = span / n as f64;
        let eps = 1e-9 * h;
        let wseg = |r: f64, u: f64| w(r.clamp(lo + eps, edge - eps), u);
        for _ in 0..n {
            let prev = u;
            let k1u = up;
            let k1p = wseg(r, u);
            let k2u = up + 0.5 * h * k1p;
            let k2p = wseg(r + 0.5 * h, u + 0.5 * h * k1u);
            let k3u = up + 0.5 * h * k2p;
            let k3p = wseg(r + 0.5 * h, u + 0.5 * h * k2u);
            let k4u = up + h * k3p;
            let k4p = wseg(r + h, u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            up += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            r += h;
            if prev != 0.0 && u != 0.0 && prev.signum() != u.signum() {
                count += 1;
            }
            let scale = u.abs().max(up.abs());
            if scale > 1e100 {
                u /= scale;
                up /= scale;
            }
        }
        r = edge;
    }
    count
}

/// Guard for callers holding a general potential: partial-wave analysis only
/// applies to radial ones.
pub fn require_radial(potential: &crate::potential::ScalarPotential) -> Result<()> {
    if potential.is_radial() {
        Ok(())
    } else {
        Err(Error::NonRadialPotential)
    }
}

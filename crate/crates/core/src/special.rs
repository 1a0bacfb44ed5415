//! Special functions used by the radial oracle and the angular analysis:
//! spherical Bessel functions, Legendre polynomials and spherical harmonics.

use num_complex::Complex64 as C64;

/// Spherical Bessel function `j_l(x)` by downward (Miller) recurrence,
/// stable for all `l ≤ l_max` at moderate arguments.
pub fn spherical_j(l: usize, x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return if l == 0 { 1.0 - x * x / 6.0 } else { 0.0 };
    }
    if l == 0 {
        return x.sin() / x;
    }
    let start = l + 16 + (x.abs() as usize);
    let mut jp = 0.0f64;
    let mut j = 1e-30f64;
    let mut out = 0.0;
    for k in (0..=start).rev() {
        let jm = (2.0 * k as f64 + 3.0) / x * j - jp;
        jp = j;
        j = jm;
        if k == l {
            out = j;
        }
        // rescale to avoid overflow
        if j.abs() > 1e200 {
            jp /= 1e200;
            j /= 1e200;
            out /= 1e200;
        }
    }
    // normalise by the known j_0
    out * (x.sin() / x) / j
}

/// Spherical Bessel function of the second kind `y_l(x)` by upward recurrence.
pub fn spherical_y(l: usize, x: f64) -> f64 {
    let y0 = -x.cos() / x;
    if l == 0 {
        return y0;
    }
    let y1 = -x.cos() / (x * x) - x.sin() / x;
    if l == 1 {
        return y1;
    }
    let mut ym = y0;
    let mut y = y1;
    for k in 1..l {
        let yp = (2.0 * k as f64 + 1.0) / x * y - ym;
        ym = y;
        y = yp;
    }
    y
}

/// Derivative `j_l'(x)` from the recurrence `j_l' = j_{l-1} - (l+1)/x j_l`.
pub fn spherical_j_deriv(l: usize, x: f64) -> f64 {
    if l == 0 {
        return (x * x.cos() - x.sin()) / (x * x);
    }
    spherical_j(l - 1, x) - (l as f64 + 1.0) / x * spherical_j(l, x)
}

/// Derivative `y_l'(x)`.
pub fn spherical_y_deriv(l: usize, x: f64) -> f64 {
    if l == 0 {
        return (x * x.sin() + x.cos()) / (x * x);
    }
    spherical_y(l - 1, x) - (l as f64 + 1.0) / x * spherical_y(l, x)
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=l {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Associated Legendre `P_l^m(x)` for `m ≥ 0` (Condon–Shortley phase).
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    assert!(m <= l);
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        let mf = m as f64;
        pll = ((2.0 * llf - 1.0) * x * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

/// Complex spherical harmonic `Y_l^m(ω)` for a unit vector `ω`.
pub fn spherical_harmonic(l: usize, m: i32, omega: [f64; 3]) -> C64 {
    let ct = omega[2].clamp(-1.0, 1.0);
    let phi = omega[1].atan2(omega[0]);
    let ma = m.unsigned_abs() as usize;
    let mut lg = 0.0f64; // log of (l-|m|)!/(l+|m|)!
    for k in (l - ma + 1)..=(l + ma) {
        lg -= (k as f64).ln();
    }
    let norm = ((2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI) * lg.exp()).sqrt();
    let plm = assoc_legendre(l, ma, ct);
    let phase = C64::new(0.0, ma as f64 * phi).exp();
    let val = C64::new(norm * plm, 0.0) * phase;
    if m >= 0 {
        val
    } else {
        // Y_l^{-m} = (-1)^m conj(Y_l^m)
        let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
        val.conj() * sign
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bessel_low_orders() {
        let x = 1.7;
        assert_abs_diff_eq!(spherical_j(0, x), x.sin() / x, epsilon = 1e-13);
        assert_abs_diff_eq!(
            spherical_j(1, x),
            x.sin() / (x * x) - x.cos() / x,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(spherical_y(0, x), -x.cos() / x, epsilon = 1e-13);
    }

    #[test]
    fn bessel_wronskian() {
        // j_l(x) y_l'(x) - j_l'(x) y_l(x) = 1/x²
        for l in 0..8 {
            for &x in &[0.6, 1.3, 4.2, 9.5] {
                let w = spherical_j(l, x) * spherical_y_deriv(l, x)
                    - spherical_j_deriv(l, x) * spherical_y(l, x);
                assert_abs_diff_eq!(w, 1.0 / (x * x), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn legendre_values() {
        assert_abs_diff_eq!(legendre_p(2, 0.5), 0.5 * (3.0 * 0.25 - 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_p(3, -1.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn harmonics_orthonormal_on_fine_grid() {
        // crude Riemann check of ⟨Y_21, Y_21⟩ = 1 and ⟨Y_21, Y_32⟩ = 0
        let n = 120;
        let mut dot11 = C64::new(0., 0.);
        let mut dot12 = C64::new(0., 0.);
        for i in 0..n {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            for j in 0..(2 * n) {
                let ph = std::f64::consts::PI * j as f64 / n as f64;
                let w = th.sin() * (std::f64::consts::PI / n as f64)
                    * (std::f64::consts::PI / n as f64);
                let omega = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                let y1 = spherical_harmonic(2, 1, omega);
                let y2 = spherical_harmonic(3, 2, omega);
                dot11 += y1.conj() * y1 * w;
                dot12 += y1.conj() * y2 * w;
            }
        }
        assert_abs_diff_eq!(dot11.re, 1.0, epsilon = 1e-3);
        assert!(dot12.norm() < 1e-6);
    }
}

//! Gaussian window and closed-form polynomial Fourier transforms of tʲ·g_σ.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWindow {
    sigma: f64,
}

impl GaussianWindow {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(GaussianWindow { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// g_σ(t) = (σ√(2π))⁻¹ exp(−t²/(2σ²))
    pub fn eval(&self, t: f64) -> f64 {
        gaussian(self.sigma, t)
    }

    pub fn pft(&self, j: usize, eta: f64, lam: f64) -> Complex64 {
        pft_moment(j, self.sigma, eta, lam)
    }
}

pub fn gaussian(sigma: f64, t: f64) -> f64 {
    let z = t / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Closed form of ∫ tʲ g_σ(t) e^{−i2πηt − iπλt²} dt for j = 0..4.
///
/// With w = 1 + i2πσ²λ and q = (2πση)², every moment is the j = 0 value
/// times a polynomial in q/w and 1/w.
///
/// # Panics
/// Panics if `j > 4`.
pub fn pft_moment(j: usize, sigma: f64, eta: f64, lam: f64) -> Complex64 {
    assert!(j <= 4, "pft_moment supports j = 0..4, got {j}");
    pft_moments(sigma, eta, lam)[j]
}

/// All five moments j = 0..4 at once; they share w, √w and the exponential.
pub fn pft_moments(sigma: f64, eta: f64, lam: f64) -> [Complex64; 5] {
    ChirpFactors::new(sigma, lam).moments(eta)
}

/// The η-independent part of the closed forms for fixed (σ, λ).
#[derive(Debug, Clone, Copy)]
pub struct ChirpFactors {
    s2: f64,
    two_pi_sigma: f64,
    iw: Complex64,
    inv_r: Complex64,
    expo: Complex64,
}

impl ChirpFactors {
    pub fn new(sigma: f64, lam: f64) -> Self {
        let s2 = sigma * sigma;
        let w = Complex64::new(1.0, 2.0 * PI * s2 * lam);
        let iw = 1.0 / w;
        ChirpFactors {
            s2,
            two_pi_sigma: 2.0 * PI * sigma,
            iw,
            // principal root, Re > 0
            inv_r: 1.0 / w.sqrt(),
            expo: -2.0 * PI * PI * s2 * iw,
        }
    }

    pub fn m0(&self, eta: f64) -> Complex64 {
        (self.expo * (eta * eta)).exp() * self.inv_r
    }

    pub fn moments(&self, eta: f64) -> [Complex64; 5] {
        let s2 = self.s2;
        let iw = self.iw;
        let m0 = self.m0(eta);
        let v = self.two_pi_sigma * eta;
        let qw = iw * (v * v);
        let m1 = -I * (2.0 * PI * s2 * eta) * m0 * iw;
        let m2 = s2 * m0 * iw * (1.0 - qw);
        let iw2 = iw * iw;
        let m3 = -I * (2.0 * PI * s2 * s2 * eta) * m0 * iw2 * (3.0 - qw);
        let m4 = s2 * s2 * m0 * iw2 * (3.0 - 6.0 * qw + qw * qw);
        [m0, m1, m2, m3, m4]
    }
}

/// |pft_moment(0, σ, η, λ)| from its real closed form.
pub fn pft_abs(sigma: f64, eta: f64, lam: f64) -> f64 {
    let s2 = sigma * sigma;
    let d = 1.0 + 4.0 * PI * PI * s2 * s2 * lam * lam;
    d.powf(-0.25) * (-2.0 * PI * PI * s2 * eta * eta / d).exp()
}

/// Numerical ∫ tʲ g_σ(t) e^{−i2πηt − iπλt²} dt for any j.
///
/// The integrand is entire, so the real line is shifted onto the
/// steepest-descent line through the saddle. There the exponent is real
/// and Gaussian, and a plain trapezoid rule converges to machine
/// precision even when σ²λ is large and the real-line integrand
/// oscillates too fast to resolve.
pub fn pft_quadrature(j: usize, sigma: f64, eta: f64, lam: f64) -> Complex64 {
    let a = Complex64::new(0.5 / (sigma * sigma), PI * lam);
    let b = Complex64::new(0.0, 2.0 * PI * eta);
    let t_star = -b / (2.0 * a);
    let dir = Complex64::from_polar(1.0, -0.5 * a.arg());
    let half = 20.0 / (2.0 * a.norm()).sqrt();
    let nodes = 4001usize;
    let h = 2.0 * half / (nodes - 1) as f64;
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let u = -half + k as f64 * h;
        let t = t_star + dir * u;
        let expo = -a * t * t - b * t;
        let wt = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
        acc += t.powu(j as u32) * expo.exp() * wt;
    }
    acc * dir * h * norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_values() {
        assert_abs_diff_eq!(gaussian(1.0, 0.0), 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-15);
        for t in [0.3, 1.7, 5.0] {
            assert_eq!(gaussian(2.3, t), gaussian(2.3, -t));
        }
        assert!(GaussianWindow::new(0.0).is_err());
        assert!(GaussianWindow::new(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_unit_mass() {
        let sigma = 2.0;
        let n = 40001;
        let h = 40.0 * sigma / (n - 1) as f64;
        let s: f64 = (0..n)
            .map(|k| {
                let t = -20.0 * sigma + k as f64 * h;
                let wt = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                wt * gaussian(sigma, t)
            })
            .sum::<f64>()
            * h;
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn moments_at_origin() {
        let s = 1.7;
        assert_abs_diff_eq!(pft_moment(0, s, 0.0, 0.0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pft_moment(2, s, 0.0, 0.0).re, s * s, epsilon = 1e-13);
        assert_abs_diff_eq!(pft_moment(4, s, 0.0, 0.0).re, 3.0 * s.powi(4), epsilon = 1e-12);
        for lam in [-12.0, 0.0, 3.5] {
            assert_eq!(pft_moment(1, s, 0.0, lam).norm(), 0.0);
            assert_eq!(pft_moment(3, s, 0.0, lam).norm(), 0.0);
        }
    }

    #[test]
    fn quadrature_reference_values() {
        assert_abs_diff_eq!(pft_quadrature(0, 1.3, 0.0, 0.0).re, 1.0, epsilon = 1e-8);
        let ft = pft_quadrature(0, 1.0, 1.0, 0.0);
        assert_abs_diff_eq!(ft.re, (-2.0 * PI * PI).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(pft_quadrature(6, 1.0, 0.0, 0.0).re, 15.0, epsilon = 1e-8);
    }

    #[test]
    fn magnitude_closed_form() {
        for &s in &[0.4, 1.0, 3.0] {
            for &eta in &[-2.0, 0.0, 0.7] {
                for &lam in &[-20.0, -1.0, 0.0, 4.0] {
                    let v = pft_moment(0, s, eta, lam).norm();
                    assert_abs_diff_eq!(v, pft_abs(s, eta, lam), epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    #[should_panic]
    fn moment_five_panics() {
        let _ = pft_moment(5, 1.0, 0.0, 0.0);
    }
}

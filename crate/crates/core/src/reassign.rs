//! Instantaneous-frequency and chirprate reference fields of orders 2 and 3.

use std::f64::consts::PI;

use ndarray::{Array3, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::signal::SampledSignal;
use crate::wct::{compute_cubes, AnalysisGrid, MomentCubeStack, WctEngine};

type C = Complex64;

const I2PI: C = C::new(0.0, 2.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// Derivative-window formulas valid for any window.
    General,
    /// Gaussian reductions that use only the moment cubes.
    Simplified,
}

/// Validity thresholds relative to max|U^g|.
///
/// A cell is kept when |U^g| > eps_u·M and the denominator in use exceeds
/// eps_d·M² (order 2) or eps_d²·M⁴ (order 3), times the power of σ that
/// gives the denominator its natural size on a clean ridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskRule {
    pub eps_u: f64,
    pub eps_d: f64,
}

impl Default for MaskRule {
    fn default() -> Self {
        MaskRule {
            eps_u: 1e-3,
            eps_d: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceFields {
    pub order: u8,
    pub mode: FieldMode,
    /// IF reference in Hz; NaN off the mask.
    pub if_field: Array3<f64>,
    /// Chirprate reference in Hz/s; NaN off the mask.
    pub cr_field: Array3<f64>,
    pub mask: Array3<bool>,
}

impl ReferenceFields {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy)]
struct CellCtx {
    mu: f64,
    a: f64,
    lam: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Copy)]
struct Thresholds {
    u: f64,
    d: f64,
}

impl Thresholds {
    fn new(order: u8, mode: FieldMode, rule: MaskRule, max_u: f64, sigma: f64) -> Self {
        let s2 = sigma * sigma;
        let m2 = max_u * max_u;
        let d = match (order, mode) {
            (2, FieldMode::Simplified) => rule.eps_d * s2 * m2,
            (2, FieldMode::General) => rule.eps_d * m2,
            (_, FieldMode::Simplified) => rule.eps_d * rule.eps_d * s2 * s2 * s2 * m2 * m2,
            (_, FieldMode::General) => rule.eps_d * rule.eps_d * s2 * s2 * m2 * m2,
        };
        Thresholds {
            u: rule.eps_u * max_u,
            d,
        }
    }
}

/// Windows g′, g″, b·g′ and b²·g′ expressed through the moment values.
#[derive(Debug, Clone, Copy)]
struct Derived {
    g1: C,
    g2: C,
    bg1: C,
    b2g1: C,
}

fn derived(u: &[C; 5], sigma: f64) -> Derived {
    let is2 = 1.0 / (sigma * sigma);
    Derived {
        g1: -u[1] * is2,
        g2: -u[0] * is2 + u[2] * is2 * is2,
        bg1: -u[2] * is2,
        b2g1: -u[3] * is2,
    }
}

/// Returns (IF, CR, |denominator|).
fn second_simplified(u: &[C; 5], c: CellCtx) -> (f64, f64, f64) {
    let den = u[1] * u[1] - u[0] * u[2];
    let om = c.mu / c.a - (u[0] * u[1] / den / I2PI).re / c.a;
    let la = c.lam + (u[0] * u[0] / den / I2PI).re / (c.a * c.a);
    (om, la, den.norm())
}

fn second_general(u: &[C; 5], c: CellCtx) -> (f64, f64, f64) {
    let Derived { g1, g2, bg1, .. } = derived(u, c.sigma);
    let il = C::new(0.0, 2.0 * PI * c.lam * c.a * c.a);
    let den = g1 * u[1] - u[0] * bg1 + il * (u[2] * u[0] - u[1] * u[1]);
    let n_om = u[1] * g2 - bg1 * g1 + il * (u[2] * g1 - bg1 * u[1] - u[1] * u[0]);
    let n_la = u[0] * g2 - g1 * g1 + il * (u[1] * g1 - bg1 * u[0] - u[0] * u[0]);
    let om = c.mu / c.a - (n_om / den / I2PI).re / c.a;
    let la = c.lam + (n_la / den / I2PI).re / (c.a * c.a);
    (om, la, den.norm())
}

fn third_simplified(u: &[C; 5], c: CellCtx) -> (f64, f64, f64) {
    let [u0, u1, u2, u3, u4] = *u;
    let num3 = 2.0 * u0 * u1 * (u3 * u1 - u2 * u2) + u0 * u0 * (u2 * u3 - u1 * u4);
    let num4 = 2.0 * u0 * u1 * (u3 * u0 - u1 * u2) + u0 * u0 * (u2 * u2 - u0 * u4);
    let d = u3 * u0 - u2 * u1;
    let denom1 = d * d + (u2 * u2 - u4 * u0) * (u2 * u0 - u1 * u1);
    let th = c.mu / c.a + (num3 / denom1 / I2PI).re / c.a;
    let xi = c.lam - (num4 / denom1 / I2PI).re / (c.a * c.a);
    (th, xi, denom1.norm())
}

fn third_general(u: &[C; 5], c: CellCtx) -> (f64, f64, f64) {
    let [u0, u1, u2, u3, u4] = *u;
    let Derived { g1, g2, bg1, b2g1 } = derived(u, c.sigma);
    let ip2 = C::new(0.0, 0.5 * PI);
    let lt = c.lam * PI * PI * c.a * c.a;
    let d30 = u3 * u0 - u1 * u2;
    let d22 = u2 * u2 - u0 * u4;
    let denom = ip2 * (u1 * u2 - u3 * u0) * (u2 * g1 - b2g1 * u0) - ip2 * d22 * (g1 * u1 - bg1 * u0)
        + lt * d30 * d30
        + lt * d22 * (u2 * u0 - u1 * u1);
    let p = b2g1 * u0 - g1 * u2 + 2.0 * u1 * u0;
    let q = u1 * g1 - bg1 * u0 - u0 * u0;
    let gg = g2 * u0 - g1 * g1;
    let num1 = ip2 * p * (u2 * bg1 - b2g1 * u1)
        + ip2 * gg * (u4 * u1 - u3 * u2)
        + lt * p * (u2 * u2 - u3 * u1)
        + lt * q * (u3 * u2 - u1 * u4);
    let num2 =
        ip2 * p * (u2 * g1 - b2g1 * u0) + ip2 * gg * (u4 * u0 - u2 * u2) + lt * p * (u1 * u2 - u3 * u0) + lt * q * d22;
    let th = c.mu / c.a - (g1 / u0 / I2PI + num1 / denom / I2PI).re / c.a;
    let xi = c.lam + (num2 / denom / I2PI).re / (c.a * c.a);
    (th, xi, denom.norm())
}

fn cell(order: u8, mode: FieldMode, u: &[C; 5], c: CellCtx, th: Thresholds) -> Option<(f64, f64)> {
    if !(u[0].norm() > th.u) {
        return None;
    }
    let (f, r, d) = match (order, mode) {
        (2, FieldMode::Simplified) => second_simplified(u, c),
        (2, FieldMode::General) => second_general(u, c),
        (_, FieldMode::Simplified) => third_simplified(u, c),
        (_, FieldMode::General) => third_general(u, c),
    };
    (d > th.d && f.is_finite() && r.is_finite()).then_some((f, r))
}

fn max_abs(u: &Array3<C>) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

fn check_order(order: u8) {
    assert!(
        order == 2 || order == 3,
        "reference fields exist for orders 2 and 3, got {order}"
    );
}

/// Fields from a materialized stack.
pub fn fields_from_stack(stack: &MomentCubeStack, order: u8, mode: FieldMode, rule: MaskRule) -> ReferenceFields {
    check_order(order);
    let g = &stack.grid;
    let th = Thresholds::new(order, mode, rule, max_abs(stack.u(0)), stack.sigma);
    let shape = g.shape();
    let mut if_field = Array3::<f64>::from_elem(shape, f64::NAN);
    let mut cr_field = Array3::<f64>::from_elem(shape, f64::NAN);
    let mut mask = Array3::<bool>::from_elem(shape, false);
    Zip::indexed(&mut if_field)
        .and(&mut cr_field)
        .and(&mut mask)
        .par_for_each(|(i, m, l), fi, fc, mk| {
            let u = std::array::from_fn(|j| stack.cubes[j][[i, m, l]]);
            let ctx = CellCtx {
                mu: g.mu(),
                a: g.scales[i],
                lam: g.lambdas[l],
                sigma: stack.sigma,
            };
            if let Some((f, r)) = cell(order, mode, &u, ctx, th) {
                *fi = f;
                *fc = r;
                *mk = true;
            }
        });
    ReferenceFields {
        order,
        mode,
        if_field,
        cr_field,
        mask,
    }
}

pub fn second_order_fields(stack: &MomentCubeStack, mode: FieldMode) -> ReferenceFields {
    fields_from_stack(stack, 2, mode, MaskRule::default())
}

pub fn third_order_fields(stack: &MomentCubeStack, mode: FieldMode) -> ReferenceFields {
    fields_from_stack(stack, 3, mode, MaskRule::default())
}

/// The complex WCT cube U^g together with reference fields, computed one
/// scale at a time so the five moment cubes are never held at once.
pub fn wct_and_fields(
    x: &SampledSignal,
    sigma: f64,
    grid: &AnalysisGrid,
    order: u8,
    mode: FieldMode,
    rule: MaskRule,
) -> Result<(Array3<C>, ReferenceFields)> {
    check_order(order);
    let u0 = compute_cubes(x, sigma, grid, 1)?.cubes.remove(0);
    let th = Thresholds::new(order, mode, rule, max_abs(&u0), sigma);
    let engine = WctEngine::new(x, sigma, grid)?;
    let shape = grid.shape();
    let mut if_field = Array3::<f64>::from_elem(shape, f64::NAN);
    let mut cr_field = Array3::<f64>::from_elem(shape, f64::NAN);
    let mut mask = Array3::<bool>::from_elem(shape, false);
    if_field
        .outer_iter_mut()
        .into_par_iter()
        .zip(cr_field.outer_iter_mut())
        .zip(mask.outer_iter_mut())
        .enumerate()
        .for_each(|(i, ((mut fi, mut fc), mut mk))| {
            let planes = engine.planes(i, 5);
            for m in 0..shape.1 {
                for l in 0..shape.2 {
                    let u = std::array::from_fn(|j| planes[j][[m, l]]);
                    let ctx = CellCtx {
                        mu: grid.mu(),
                        a: grid.scales[i],
                        lam: grid.lambdas[l],
                        sigma,
                    };
                    if let Some((f, r)) = cell(order, mode, &u, ctx, th) {
                        fi[[m, l]] = f;
                        fc[[m, l]] = r;
                        mk[[m, l]] = true;
                    }
                }
            }
        });
    Ok((
        u0,
        ReferenceFields {
            order,
            mode,
            if_field,
            cr_field,
            mask,
        },
    ))
}

/// Cubes for the derivative windows g′, g″, b·g′, b²·g′.
#[derive(Debug, Clone)]
pub struct DerivativeCubes {
    pub g1: Array3<C>,
    pub g2: Array3<C>,
    pub bg1: Array3<C>,
    pub b2g1: Array3<C>,
}

pub fn derivative_cubes(stack: &MomentCubeStack) -> DerivativeCubes {
    let is2 = 1.0 / (stack.sigma * stack.sigma);
    let u = &stack.cubes;
    DerivativeCubes {
        g1: u[1].mapv(|v| -v * is2),
        g2: Zip::from(&u[0])
            .and(&u[2])
            .map_collect(|&a, &b| -a * is2 + b * is2 * is2),
        bg1: u[2].mapv(|v| -v * is2),
        b2g1: u[3].mapv(|v| -v * is2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Moment values of the WCT of a pure linear chirp e^{i2π(c t + r t²/2)}
    /// at (a, b, λ): U^{bʲg} = x(b)·∫ tʲ g(t) e^{−i2π(μ − aφ′(b))t − iπa²(λ − r)t²} dt.
    fn chirp_moments(sigma: f64, mu: f64, a: f64, lam: f64, c: f64, r: f64, b: f64) -> [C; 5] {
        let phase = c * b + 0.5 * r * b * b;
        let xb = C::from_polar(1.0, 2.0 * PI * phase);
        let m = crate::window::pft_moments(sigma, mu - a * (c + r * b), a * a * (lam - r));
        m.map(|v| v * xb)
    }

    #[test]
    fn exact_on_linear_chirp() {
        let (sigma, mu) = (2.5, 1.0);
        for &(a, lam, b) in &[(1.0 / 30.0, 1.0, 2.0), (1.0 / 20.0, 6.0, 0.5), (1.0 / 45.0, -3.0, 3.0)] {
            let u = chirp_moments(sigma, mu, a, lam, 10.0, 4.0, b);
            let ctx = CellCtx { mu, a, lam, sigma };
            for (f, r, _) in [
                second_simplified(&u, ctx),
                second_general(&u, ctx),
                third_simplified(&u, ctx),
                third_general(&u, ctx),
            ] {
                assert_abs_diff_eq!(f, 10.0 + 4.0 * b, epsilon = 1e-6);
                assert_abs_diff_eq!(r, 4.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn derivative_identity_at_unit_sigma() {
        let u = [
            C::new(1.0, 2.0),
            C::new(-0.5, 0.1),
            C::new(0.3, 0.7),
            C::new(2.0, -1.0),
            C::new(0.0, 1.0),
        ];
        let d = derived(&u, 1.0);
        assert_eq!(d.g2, -u[0] + u[2]);
        assert_eq!(d.bg1 + u[2], C::new(0.0, 0.0));
    }

    #[test]
    fn thresholds_gate_small_values() {
        let th = Thresholds { u: 1.0, d: 0.0 };
        let ctx = CellCtx {
            mu: 1.0,
            a: 0.1,
            lam: 0.0,
            sigma: 1.0,
        };
        let u = [C::new(0.5, 0.0); 5];
        assert!(cell(2, FieldMode::Simplified, &u, ctx, th).is_none());
    }
}

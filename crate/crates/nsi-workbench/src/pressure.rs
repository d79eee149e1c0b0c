//! Pressure of an axisymmetric field by reduction to a planar integral.
//!
//! The pressure is the Newtonian potential of the stress trace
//! Theta = sum_ij d_i u_j d_j u_i. For axisymmetric u the 3D convolution
//! reduces to a 2D integral over the planar support against an angular
//! kernel (the Newtonian kernel averaged over the source circle). The
//! kernel's logarithmic singularity at the target circle is handled by
//! subtracting a smooth multiple of the local stress value and adding back
//! the patch term in polar coordinates.

use crate::axisym::AxisymField;
use crate::curve::bump_h;
use crate::error::{Error, Result};
use crate::field::Rect;
use crate::quad;
use rayon::prelude::*;

/// Angular integral of the Newtonian kernel over the source circle:
/// (1/4pi) * integral over theta of 1/sqrt(dx1^2 + rho^2 + s^2 - 2 rho s cos).
///
/// Primary evaluation is adaptive quadrature; see
/// [`angular_kernel_elliptic`] for the complete-elliptic fast path.
pub fn angular_kernel(dx1: f64, rho: f64, s: f64) -> Result<f64> {
    let a0 = dx1 * dx1 + rho * rho + s * s;
    let b = 2.0 * rho * s;
    if a0 - b <= 0.0 {
        return Err(Error::Singularity { dx1, rho, s });
    }
    if b == 0.0 {
        return Ok(0.5 / a0.sqrt());
    }
    // even in theta: (1/2pi) * integral over [0, pi]
    let mut integrand = |theta: f64| 1.0 / (a0 - b * theta.cos()).sqrt();
    let coarse = quad::fixed_gauss(&mut integrand, 0.0, std::f64::consts::PI, 64);
    let tol = (1e-10 * coarse).max(1e-15);
    let full = quad::adaptive_1d(&mut integrand, 0.0, std::f64::consts::PI, tol);
    Ok(full / (2.0 * std::f64::consts::PI))
}

/// Same kernel through the arithmetic-geometric mean:
/// 1 / (2 sqrt(a0 + b) agm(1, sqrt((a0 - b)/(a0 + b)))).
pub fn angular_kernel_elliptic(dx1: f64, rho: f64, s: f64) -> Result<f64> {
    let a0 = dx1 * dx1 + rho * rho + s * s;
    let b = 2.0 * rho * s;
    if a0 - b <= 0.0 {
        return Err(Error::Singularity { dx1, rho, s });
    }
    let mut x = 1.0f64;
    let mut y = ((a0 - b) / (a0 + b)).sqrt();
    for _ in 0..60 {
        if (x - y).abs() <= 1e-16 * x {
            break;
        }
        let (nx, ny) = (0.5 * (x + y), (x * y).sqrt());
        x = nx;
        y = ny;
    }
    Ok(1.0 / (2.0 * (a0 + b).sqrt() * x))
}

/// Double contraction sum_ij d_i u_j d_j u_i from the analytic Jacobian.
pub fn stress_trace(u: &AxisymField, x: [f64; 3]) -> Result<f64> {
    let j = u.jacobian(x)?;
    let mut acc = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            acc += j[a][b] * j[b][a];
        }
    }
    Ok(acc)
}

/// Quadrature settings for the pressure reduction.
#[derive(Clone, Copy, Debug)]
pub struct PressureSettings {
    /// Absolute tolerance target for one pressure value.
    pub abs_tol: f64,
    /// Patch radius as a fraction of the smallest support side.
    pub patch_fraction: f64,
    /// Use the elliptic fast path for the angular kernel.
    pub use_elliptic: bool,
}

impl Default for PressureSettings {
    fn default() -> Self {
        PressureSettings { abs_tol: 1e-6, patch_fraction: 0.05, use_elliptic: false }
    }
}

/// Evaluates p(x1, rho) = ∬ Theta(y1, s) s A(x1 - y1, rho, s) ds dy1.
#[derive(Clone, Debug)]
pub struct PressureEvaluator {
    u: AxisymField,
    support: Rect,
    pub settings: PressureSettings,
}

impl PressureEvaluator {
    pub fn new(u: AxisymField) -> PressureEvaluator {
        let support = u.support();
        PressureEvaluator { u, support, settings: PressureSettings::default() }
    }

    pub fn with_settings(u: AxisymField, settings: PressureSettings) -> PressureEvaluator {
        let support = u.support();
        PressureEvaluator { u, support, settings }
    }

    pub fn source(&self) -> &AxisymField {
        &self.u
    }

    fn kernel(&self, dx1: f64, rho: f64, s: f64) -> f64 {
        let r = if self.settings.use_elliptic {
            angular_kernel_elliptic(dx1, rho, s)
        } else {
            angular_kernel(dx1, rho, s)
        };
        r.unwrap_or(0.0)
    }

    fn theta_planar(&self, y1: f64, s: f64) -> f64 {
        if s <= 0.0 || !self.support.contains_closed(y1, s) {
            return 0.0;
        }
        stress_trace(&self.u, [y1, s, 0.0]).unwrap_or(0.0)
    }

    /// Pressure at a 3D point (rotational invariance is built in).
    pub fn eval_3d(&self, x: [f64; 3]) -> Result<f64> {
        let rho = (x[1] * x[1] + x[2] * x[2]).sqrt();
        self.eval(x[0], rho)
    }

    /// Pressure at a planar target (x1, rho >= 0).
    pub fn eval(&self, x1: f64, rho: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::precondition("rho must be non-negative"));
        }
        let r = self.support;
        let tol = self.settings.abs_tol;
        let rp = (self.settings.patch_fraction * r.min_side()).min(0.45 * rho.max(1e-12));
        let target_inside =
            r.expand(0.5 * rp).contains_closed(x1, rho) && rho > r.a2 - 0.5 * rp;

        if !target_inside {
            // kernel smooth on the whole support
            let val = quad::adaptive_2d(
                &|y1, s| self.theta_planar(y1, s) * s * self.kernel(x1 - y1, rho, s),
                r.a1,
                r.b1,
                r.a2,
                r.b2,
                tol,
            );
            return Ok(val);
        }

        // singularity subtraction: integrate Theta - Theta0 * B around the
        // target, then add back Theta0 * (patch term) in polar coordinates
        let theta0 = self.theta_planar(x1, rho);
        let bump = |dist: f64| -> f64 {
            if dist >= rp {
                0.0
            } else {
                bump_h(2.0 * (rp - dist) / rp)
            }
        };
        let ext = r.expand(rp);
        let main = quad::adaptive_2d(
            &|y1: f64, s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let d = ((y1 - x1).powi(2) + (s - rho).powi(2)).sqrt();
                if d < 1e-14 {
                    return 0.0; // removable after subtraction
                }
                let theta = self.theta_planar(y1, s);
                let sub = theta - theta0 * bump(d);
                sub * s * self.kernel(x1 - y1, rho, s)
            },
            ext.a1,
            ext.b1,
            ext.a2.max(1e-12),
            ext.b2,
            tol,
        );
        // patch term over the disc, radially graded toward the center where
        // the kernel behaves like log(1/r)
        let mut patch = 0.0;
        let mut lo = 0.0f64;
        let panels: Vec<f64> =
            (0..=14).rev().map(|j| rp * 0.5f64.powi(j)).collect();
        for hi in panels {
            if hi <= lo {
                continue;
            }
            let shell = quad::fixed_gauss(
                |rad| {
                    let ang = quad::fixed_gauss(
                        |alpha: f64| {
                            let y1 = x1 + rad * alpha.cos();
                            let s = rho + rad * alpha.sin();
                            if s <= 0.0 {
                                return 0.0;
                            }
                            bump(rad) * s * self.kernel(x1 - y1, rho, s)
                        },
                        0.0,
                        std::f64::consts::TAU,
                        32,
                    );
                    ang * rad
                },
                lo,
                hi,
                16,
            );
            patch += shell;
            lo = hi;
        }
        Ok(main + theta0 * patch)
    }
}

/// Direct 3D Monte-Carlo evaluation of the Newtonian potential of the
/// stress trace: the reference oracle for the 2D reduction.
///
/// Unbiased mixture importance sampler: a uniform component over the support
/// box, a radial component around the target (so the 1/|x-y| singularity
/// carries no excess variance), and a component proportional to a coarse
/// |Theta| proposal over the planar support. Deterministic for a fixed seed
/// (chunked, order-independent reduction).
pub fn reference_monte_carlo(
    u: &AxisymField,
    x: [f64; 3],
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    let r = u.support();
    let (lo, hi) = ([r.a1, -r.b2, -r.b2], [r.b1, r.b2, r.b2]);
    let volume = (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
    // radial component must cover the whole box as seen from x
    let mut r0: f64 = 0.0;
    for cx in [lo[0], hi[0]] {
        for cy in [lo[1], hi[1]] {
            for cz in [lo[2], hi[2]] {
                let d =
                    ((x[0] - cx).powi(2) + (x[1] - cy).powi(2) + (x[2] - cz).powi(2)).sqrt();
                r0 = r0.max(d);
            }
        }
    }
    let in_box = |y: &[f64; 3]| {
        y[0] >= lo[0] && y[0] <= hi[0] && y[1] >= lo[1] && y[1] <= hi[1] && y[2] >= lo[2]
            && y[2] <= hi[2]
    };

    // coarse |Theta| proposal over the planar support rect
    let nc = 48usize;
    let (d1, d2c) = (r.side1() / nc as f64, r.side2() / nc as f64);
    let mut cell_mass = vec![0.0f64; nc * nc];
    let mut total_mass = 0.0;
    for i in 0..nc {
        for j in 0..nc {
            let y1 = r.a1 + (i as f64 + 0.5) * d1;
            let s = r.a2 + (j as f64 + 0.5) * d2c;
            let mut m: f64 = 1e-8;
            for (du, dv) in [(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)] {
                let th = stress_trace(u, [y1 + du * d1, s + dv * d2c, 0.0]).unwrap_or(0.0);
                m = m.max(th.abs());
            }
            // planar cell measure weighted by the circle length 2 pi s
            let w = m * s * d1 * d2c;
            cell_mass[i * nc + j] = w;
            total_mass += w;
        }
    }
    let mut cdf = Vec::with_capacity(nc * nc);
    let mut acc = 0.0;
    for w in &cell_mass {
        acc += w / total_mass;
        cdf.push(acc);
    }

    let weights = (0.25f64, 0.25f64, 0.5f64); // uniform, radial, proposal
    let chunk = 1 << 16;
    let chunks = samples.div_ceil(chunk);
    let results: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(ci as u64));
            let n = chunk.min(samples - ci * chunk);
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..n {
                let pick: f64 = rng.gen_range(0.0..1.0);
                let y = if pick < weights.0 {
                    [
                        rng.gen_range(lo[0]..hi[0]),
                        rng.gen_range(lo[1]..hi[1]),
                        rng.gen_range(lo[2]..hi[2]),
                    ]
                } else if pick < weights.0 + weights.1 {
                    // uniform radius and direction around the target
                    let rad = rng.gen_range(0.0..r0);
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    let sz = (1.0 - z * z).max(0.0).sqrt();
                    [
                        x[0] + rad * sz * phi.cos(),
                        x[1] + rad * sz * phi.sin(),
                        x[2] + rad * z,
                    ]
                } else {
                    // proposal cell, uniform in (y1, s, theta)
                    let t: f64 = rng.gen_range(0.0..1.0);
                    let idx = cdf.partition_point(|&c| c < t).min(nc * nc - 1);
                    let (i, j) = (idx / nc, idx % nc);
                    let y1 = r.a1 + (i as f64 + rng.gen_range(0.0..1.0)) * d1;
                    let s = r.a2 + (j as f64 + rng.gen_range(0.0..1.0)) * d2c;
                    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    [y1, s * th.cos(), s * th.sin()]
                };
                let dsq = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2);
                if dsq == 0.0 {
                    continue;
                }
                let q_uniform = if in_box(&y) { 1.0 / volume } else { 0.0 };
                let q_radial = 1.0 / (r0 * 4.0 * std::f64::consts::PI * dsq);
                let q_proposal = {
                    let s = (y[1] * y[1] + y[2] * y[2]).sqrt();
                    if s > 0.0 && r.contains_closed(y[0], s) {
                        let i = (((y[0] - r.a1) / d1) as usize).min(nc - 1);
                        let j = (((s - r.a2) / d2c) as usize).min(nc - 1);
                        let p_cell = cell_mass[i * nc + j] / total_mass;
                        // uniform in (y1, s, theta): density p_cell / (d1 d2 2 pi s)
                        p_cell / (d1 * d2c * std::f64::consts::TAU * s)
                    } else {
                        0.0
                    }
                };
                let density =
                    weights.0 * q_uniform + weights.1 * q_radial + weights.2 * q_proposal;
                let theta = stress_trace(u, y).unwrap_or(0.0);
                let val = theta / (4.0 * std::f64::consts::PI * dsq.sqrt()) / density;
                sum += val;
                sq += val * val;
            }
            (sum, sq, n)
        })
        .collect();
    let (sum, sq, n) = results
        .iter()
        .fold((0.0, 0.0, 0usize), |acc, r| (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2));
    let mean = sum / n as f64;
    let var = (sq / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axisym::rotate;
    use crate::cutoff::structure_recipe;
    use crate::field::Rect;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn recipe_field() -> AxisymField {
        let rect = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        structure_recipe(rect, 0.3).unwrap().azimuthal_lift()
    }

    #[test]
    fn kernel_on_axis_values() {
        assert_abs_diff_eq!(angular_kernel(0.0, 0.0, 1.0).unwrap(), 0.5, epsilon = 1e-12);
        for &(d, s) in &[(0.3, 1.2), (1.0, 0.4), (2.0, 2.0)] {
            let expect = 0.5 / f64::sqrt(d * d + s * s);
            assert_abs_diff_eq!(angular_kernel(d, 0.0, s).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn kernel_matches_dense_trapezoid_and_elliptic() {
        let cases = [(0.2, 1.0, 1.5), (0.0, 1.0, 1.4), (0.7, 0.8, 0.9), (0.05, 1.2, 1.21)];
        for (d, rho, s) in cases {
            let a0 = d * d + rho * rho + s * s;
            let b = 2.0 * rho * s;
            let oracle = quad::periodic_trapezoid(
                |theta| 1.0 / (a0 - b * theta.cos()).sqrt(),
                2048,
            ) / (4.0 * std::f64::consts::PI);
            let adaptive = angular_kernel(d, rho, s).unwrap();
            let elliptic = angular_kernel_elliptic(d, rho, s).unwrap();
            assert_abs_diff_eq!(adaptive, oracle, epsilon = 1e-8 * oracle);
            assert_abs_diff_eq!(elliptic, oracle, epsilon = 1e-10 * oracle);
        }
    }

    #[test]
    fn kernel_singular_circle_is_error() {
        assert!(matches!(
            angular_kernel(0.0, 1.3, 1.3),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn stress_trace_zero_field() {
        let rect = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let u = AxisymField::from_profile(crate::field::ScalarField2D::zero(), rect);
        assert_eq!(stress_trace(&u, [0.5, 1.5, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn stress_trace_rotationally_invariant() {
        let u = recipe_field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let x = [rng.gen_range(0.1..0.9), rng.gen_range(1.1..1.9), 0.0];
            let base = stress_trace(&u, x).unwrap();
            for _ in 0..3 {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let rotated = stress_trace(&u, rotate(theta, x)).unwrap();
                assert_abs_diff_eq!(rotated, base, epsilon = 1e-10 * (1.0 + base.abs()));
            }
        }
    }

    #[test]
    fn stress_trace_matches_finite_difference_contraction() {
        let u = recipe_field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let h = 1e-5;
        for _ in 0..100 {
            let x = [
                rng.gen_range(0.2..0.8),
                rng.gen_range(1.2..1.8),
                rng.gen_range(-0.4..0.4),
            ];
            let rho = f64::sqrt(x[1] * x[1] + x[2] * x[2]);
            if !(1.05..1.95).contains(&rho) {
                continue;
            }
            let analytic = stress_trace(&u, x).unwrap();
            // finite-difference Jacobian contraction
            let mut fd = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    let di_uj = (u.eval(xp).unwrap()[j] - u.eval(xm).unwrap()[j]) / (2.0 * h);
                    let mut yp = x;
                    let mut ym = x;
                    yp[j] += h;
                    ym[j] -= h;
                    let dj_ui = (u.eval(yp).unwrap()[i] - u.eval(ym).unwrap()[i]) / (2.0 * h);
                    fd += di_uj * dj_ui;
                }
            }
            assert!(
                (analytic - fd).abs() <= 1e-4 * (1.0 + fd.abs()),
                "stress trace mismatch at {x:?}: {analytic} vs {fd}"
            );
        }
    }

    #[test]
    fn azimuthal_stress_trace_closed_form() {
        // for u = g phi_hat: Theta = -d_rho(g^2)/rho at planar points
        let u = recipe_field();
        for &(x1, x2) in &[(0.3, 1.4), (0.5, 1.5), (0.7, 1.7)] {
            let analytic = stress_trace(&u, [x1, x2, 0.0]).unwrap();
            let j = u.profile().jet(x1, x2).unwrap();
            let expect = -2.0 * j.v * j.dy / x2;
            assert_abs_diff_eq!(analytic, expect, epsilon = 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn pressure_of_zero_field_vanishes() {
        let rect = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let u = AxisymField::from_profile(crate::field::ScalarField2D::zero(), rect);
        let p = PressureEvaluator::new(u);
        assert_eq!(p.eval(0.5, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn pressure_agrees_with_small_monte_carlo() {
        // smoke version of the acceptance fixture: 1e6 samples, 5% tolerance
        let u = recipe_field();
        let mut p = PressureEvaluator::new(u.clone());
        p.settings.use_elliptic = true;
        let x = [0.5, 1.5, 0.0];
        let reduced = p.eval_3d(x).unwrap();
        let (mc, stderr) = reference_monte_carlo(&u, x, 1_000_000, 42);
        assert!(
            (reduced - mc).abs() <= 0.05 * reduced.abs().max(mc.abs()) + 4.0 * stderr,
            "2D reduction {reduced} vs MC {mc} (stderr {stderr})"
        );
    }

    #[test]
    fn pressure_additive_for_disjoint_supports() {
        let r1 = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let r2 = Rect::new(1.6, 2.6, 1.0, 2.0).unwrap();
        let s1 = structure_recipe(r1, 0.25).unwrap();
        let s2 = structure_recipe(r2, 0.25).unwrap();
        let f_sum = s1.f.sum(&s2.f).unwrap();
        let u_sum = AxisymField::from_profile(f_sum, r1.union_box(&r2));
        let mk = |u: AxisymField| {
            let mut e = PressureEvaluator::new(u);
            e.settings.use_elliptic = true;
            e
        };
        let (p1, p2, ps) =
            (mk(s1.azimuthal_lift()), mk(s2.azimuthal_lift()), mk(u_sum));
        for &(x1, rho) in &[(0.5, 1.5), (1.3, 1.4), (2.0, 1.6)] {
            let lhs = ps.eval(x1, rho).unwrap();
            let rhs = p1.eval(x1, rho).unwrap() + p2.eval(x1, rho).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-5 * (1.0 + rhs.abs()));
        }
    }

    use crate::quad;
}

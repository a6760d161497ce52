//! The discrete objective c * D(f) - B(f) on radial profiles.
//!
//! D is the interaction energy int int f^2(x) f^2(y) V(|x-y|) dx dy. For
//! the Coulomb kernel 1/(4 pi |x-y|) it is evaluated by Newton's theorem:
//! the potential of the radial density u = f^2 is
//! Phi(r) = (1/r) int_0^r s^2 u ds + int_r^inf s u ds, then
//! D = int 4 pi r^2 u Phi dr, all by cumulative fourth-order panel rules
//! with an exact adjoint for the gradient. For a time-window kernel
//! int_a^b p_t^{(G)} dt, the spherical average
//! <V>(r,s) = [F(r+s) - F(|r-s|)] / (8 pi r s),
//! F_c(z) = z erfc(z/(2 sqrt c)) - (2 sqrt c / sqrt pi) e^{-z^2/(4c)}
//! (F_0 = 0, F_inf = z), reduces D to a dense symmetric quadratic form.
//!
//! B(f) = int |f'(r)|^2 4 pi r^2 dr with centered five-point derivatives
//! in log-radius.

use super::grid::RadialGrid;
use crate::error::{Error, Result};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Antiderivative building block of the window kernel average.
fn window_f(z: f64, c: f64) -> f64 {
    if c.is_infinite() {
        return z;
    }
    if c <= 0.0 {
        return 0.0;
    }
    let s = 2.0 * c.sqrt();
    z * libm::erfc(z / s) - s / std::f64::consts::PI.sqrt() * (-z * z / (s * s)).exp()
}

/// Spherical average of the window kernel over |x| = r, |y| = s.
pub fn window_kernel_average(r: f64, s: f64, eps: f64, k: f64) -> f64 {
    let hi = r + s;
    let lo = (r - s).abs();
    let num = (window_f(hi, k) - window_f(lo, k)) - (window_f(hi, eps) - window_f(lo, eps));
    num / (8.0 * std::f64::consts::PI * r * s)
}

pub enum Interaction {
    Coulomb,
    /// Dense symmetric form: D = u^T A u with the quadrature weights
    /// folded into A.
    Window { matrix: Vec<f64>, n: usize },
}

impl Interaction {
    pub fn window(grid: &RadialGrid, eps: f64, k: f64) -> Self {
        let n = grid.len();
        let mut matrix = vec![0.0f64; n * n];
        for i in 0..n {
            let wi = grid.w_int[i] * FOUR_PI * grid.r[i] * grid.r[i];
            for j in i..n {
                let wj = grid.w_int[j] * FOUR_PI * grid.r[j] * grid.r[j];
                let a = wi * wj * window_kernel_average(grid.r[i], grid.r[j], eps, k);
                matrix[i * n + j] = a;
                matrix[j * n + i] = a;
            }
        }
        Interaction::Window { matrix, n }
    }
}

pub struct Functional {
    pub grid: RadialGrid,
    pub coefficient: f64,
    pub interaction: Interaction,
}

pub struct Evaluation {
    pub value: f64,
    pub interaction: f64,
    pub dirichlet: f64,
    /// d(value)/d f_j.
    pub gradient: Vec<f64>,
}

impl Functional {
    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.grid.w_norm.iter().zip(f).map(|(w, v)| w * v * v).sum()
    }

    pub fn normalize(&self, f: &mut [f64]) {
        let s = self.norm_sq(f).sqrt();
        for v in f.iter_mut() {
            *v /= s;
        }
    }

    /// Interaction energy and its gradient with respect to u = f^2.
    fn interaction_grad_u(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let g = &self.grid;
        let n = g.len();
        match &self.interaction {
            Interaction::Coulomb => {
                // panel integrals of s^2 u and s u
                let i2_nodes: Vec<f64> = (0..n).map(|j| g.r[j] * g.r[j] * u[j] * g.r[j]).collect();
                let i1_nodes: Vec<f64> = (0..n).map(|j| g.r[j] * u[j] * g.r[j]).collect();
                let a2 = g.panel_integrals(&i2_nodes);
                let a1 = g.panel_integrals(&i1_nodes);
                // inner integrals at nodes: I1[j] = int_{r_1}^{r_j} s^2 u,
                // I2[j] = int_{r_j}^{R} s u
                let mut i1 = vec![0.0f64; n];
                for j in 1..n {
                    i1[j] = i1[j - 1] + a2[j - 1];
                }
                let mut i2 = vec![0.0f64; n];
                for j in (0..n - 1).rev() {
                    i2[j] = i2[j + 1] + a1[j];
                }
                let phi: Vec<f64> = (0..n).map(|j| i1[j] / g.r[j] + i2[j]).collect();
                let q: Vec<f64> = (0..n)
                    .map(|j| g.w_int[j] * FOUR_PI * g.r[j] * g.r[j] * u[j])
                    .collect();
                let d: f64 = q.iter().zip(&phi).map(|(a, b)| a * b).sum();

                // gradient: direct term + adjoint of the cumulative maps
                let mut grad: Vec<f64> = (0..n)
                    .map(|j| g.w_int[j] * FOUR_PI * g.r[j] * g.r[j] * phi[j])
                    .collect();
                // sensitivity of I1[j] (panels p < j): suffix sums of q/r
                let dvec: Vec<f64> = (0..n).map(|j| q[j] / g.r[j]).collect();
                let mut suf = vec![0.0f64; n + 1];
                for j in (0..n).rev() {
                    suf[j] = suf[j + 1] + dvec[j];
                }
                // sensitivity of I2[j] (panels p >= j): prefix sums of q
                let mut pre = vec![0.0f64; n];
                let mut acc = 0.0;
                for j in 0..n {
                    acc += q[j];
                    pre[j] = acc;
                }
                let pc2: Vec<f64> = (0..n - 1).map(|p| suf[p + 1]).collect();
                let pc1: Vec<f64> = (0..n - 1).map(|p| pre[p]).collect();
                let mut adj2 = vec![0.0f64; n];
                g.panel_adjoint(&pc2, &mut adj2);
                let mut adj1 = vec![0.0f64; n];
                g.panel_adjoint(&pc1, &mut adj1);
                for j in 0..n {
                    grad[j] += adj2[j] * g.r[j] * g.r[j] * g.r[j] + adj1[j] * g.r[j] * g.r[j];
                }
                (d, grad)
            }
            Interaction::Window { matrix, n: nn } => {
                debug_assert_eq!(*nn, n);
                let mut au = vec![0.0f64; n];
                for i in 0..n {
                    let row = &matrix[i * n..(i + 1) * n];
                    au[i] = row.iter().zip(u).map(|(a, b)| a * b).sum();
                }
                let d: f64 = au.iter().zip(u).map(|(a, b)| a * b).sum();
                let grad: Vec<f64> = au.iter().map(|a| 2.0 * a).collect();
                (d, grad)
            }
        }
    }

    /// Dirichlet energy and gradient.
    fn dirichlet_grad(&self, f: &[f64]) -> (f64, Vec<f64>) {
        let g = &self.grid;
        let n = g.len();
        let mut dfdx = vec![0.0f64; n];
        g.d_dx(f, &mut dfdx);
        // f'(r) = dfdx / r; weight 4 pi r^2 -> integrand 4 pi dfdx^2 / ...
        let mut b = 0.0;
        let mut coeff = vec![0.0f64; n];
        for j in 0..n {
            let fp = dfdx[j] / g.r[j];
            let w = g.w_int[j] * FOUR_PI * g.r[j] * g.r[j];
            b += w * fp * fp;
            coeff[j] = 2.0 * w * fp / g.r[j];
        }
        let mut grad = vec![0.0f64; n];
        g.d_dx_adjoint(&coeff, &mut grad);
        (b, grad)
    }

    pub fn evaluate(&self, f: &[f64]) -> Evaluation {
        let u: Vec<f64> = f.iter().map(|v| v * v).collect();
        let (d, gd_u) = self.interaction_grad_u(&u);
        let (b, gb) = self.dirichlet_grad(f);
        let mut gradient = vec![0.0f64; f.len()];
        for j in 0..f.len() {
            gradient[j] = self.coefficient * gd_u[j] * 2.0 * f[j] - gb[j];
        }
        Evaluation { value: self.coefficient * d - b, interaction: d, dirichlet: b, gradient }
    }

    /// Interaction energy alone (no gradient).
    pub fn interaction_energy(&self, f: &[f64]) -> f64 {
        let u: Vec<f64> = f.iter().map(|v| v * v).collect();
        self.interaction_grad_u(&u).0
    }

    pub fn dirichlet_energy(&self, f: &[f64]) -> f64 {
        self.dirichlet_grad(f).0
    }
}

/// Normalized Gaussian profile values on the grid nodes, f^2 the density
/// of an isotropic normal with per-axis variance sigma^2.
pub fn gaussian_profile(grid: &RadialGrid, sigma: f64) -> Vec<f64> {
    let c = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.75);
    grid.r.iter().map(|r| c * (-r * r / (4.0 * sigma * sigma)).exp()).collect()
}

pub fn validate_normalized(functional: &Functional, f: &[f64]) -> Result<()> {
    let n2 = functional.norm_sq(f);
    if (n2 - 1.0).abs() > 1e-8 {
        return Err(Error::domain(format!("profile is not normalized: |f|^2 = {n2}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coulomb_functional(c: f64, n: usize) -> Functional {
        let sref = 6.0 * std::f64::consts::PI.powf(1.5) / c;
        Functional {
            grid: RadialGrid::new(n, 40.0 * sref, 4e5),
            coefficient: c,
            interaction: Interaction::Coulomb,
        }
    }

    #[test]
    fn gaussian_closed_forms() {
        let fun = coulomb_functional(1.0, 2048);
        let sref = 6.0 * std::f64::consts::PI.powf(1.5);
        let mut f = gaussian_profile(&fun.grid, sref);
        fun.normalize(&mut f);
        let ev = fun.evaluate(&f);
        let d_exact = 1.0 / (4.0 * std::f64::consts::PI.powf(1.5) * sref);
        let b_exact = 3.0 / (4.0 * sref * sref);
        assert!((ev.interaction / d_exact - 1.0).abs() < 1e-8, "D {:e}", ev.interaction);
        assert!((ev.dirichlet / b_exact - 1.0).abs() < 1e-7, "B {:e}", ev.dirichlet);
        let v_exact = 1.0 / (48.0 * std::f64::consts::PI.powi(3));
        assert!((ev.value - v_exact).abs() < 1e-10, "value {:e}", ev.value);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let fun = coulomb_functional(1.0, 256);
        let sref = 6.0 * std::f64::consts::PI.powf(1.5);
        let mut f = gaussian_profile(&fun.grid, sref);
        fun.normalize(&mut f);
        let ev = fun.evaluate(&f);
        let mut rng = crate::rng::Stream::new(12, 0);
        let dir: Vec<f64> = (0..f.len()).map(|_| rng.normal()).collect();
        let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let eps = 1e-7;
        let fp: Vec<f64> = f.iter().zip(&dir).map(|(a, b)| a + eps * b / norm).collect();
        let fm: Vec<f64> = f.iter().zip(&dir).map(|(a, b)| a - eps * b / norm).collect();
        let fd = (fun.evaluate(&fp).value - fun.evaluate(&fm).value) / (2.0 * eps);
        let an: f64 = ev.gradient.iter().zip(&dir).map(|(g, d)| g * d / norm).sum();
        assert!(
            ((fd - an) / fd.abs().max(1e-12)).abs() < 1e-4,
            "fd {fd:e} vs analytic {an:e}"
        );
    }

    #[test]
    fn scaling_laws_on_gaussian_family() {
        // f -> gamma^{3/2} f(gamma .) multiplies D by gamma and B by gamma^2
        let fun = coulomb_functional(1.0, 2048);
        let sref = 6.0 * std::f64::consts::PI.powf(1.5);
        let gamma = 1.75;
        let mut f1 = gaussian_profile(&fun.grid, sref);
        fun.normalize(&mut f1);
        let mut f2 = gaussian_profile(&fun.grid, sref / gamma);
        fun.normalize(&mut f2);
        let e1 = fun.evaluate(&f1);
        let e2 = fun.evaluate(&f2);
        assert!((e2.interaction / e1.interaction - gamma).abs() < 1e-8 * gamma);
        assert!((e2.dirichlet / e1.dirichlet - gamma * gamma).abs() < 1e-8 * gamma * gamma);
    }

    #[test]
    fn window_kernel_recovers_coulomb_average() {
        // (eps, K) = (0, inf): <V>(r, s) = 1/(4 pi max(r, s))
        for &(r, s) in &[(1.0, 3.0), (2.0, 2.0), (0.4, 5.5)] {
            let avg = window_kernel_average(r, s, 0.0, f64::INFINITY);
            let exact = 1.0 / (4.0 * std::f64::consts::PI * r.max(s));
            assert!((avg - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn window_kernel_average_frozen_references() {
        // mpmath 2-sphere averages of int_a^b p_t^(G) dt
        let cases = [
            (1.0, 2.0, 0.5, 4.0, 0.0161374951034259622),
            (0.7, 0.9, 0.0, 2.0, 0.0582881225350258169),
            (2.0, 2.0, 1.0, f64::INFINITY, 0.0285839977838435096),
        ];
        for &(r, s, e, k, want) in &cases {
            let got = window_kernel_average(r, s, e, k);
            assert!((got - want).abs() < 1e-12, "({r},{s},{e},{k}): {got:e}");
        }
    }

    #[test]
    fn window_matrix_matches_coulomb_on_wide_profile() {
        // long window [0, inf) through the matrix route
        let sref = 6.0 * std::f64::consts::PI.powf(1.5);
        let grid = RadialGrid::new(1024, 40.0 * sref, 4e5);
        let win = Functional {
            interaction: Interaction::window(&grid, 0.0, f64::INFINITY),
            grid: grid.clone(),
            coefficient: 1.0,
        };
        let cou = Functional { grid, coefficient: 1.0, interaction: Interaction::Coulomb };
        let mut f = gaussian_profile(&cou.grid, sref);
        cou.normalize(&mut f);
        let dw = win.interaction_energy(&f);
        let dc = cou.interaction_energy(&f);
        assert!(
            ((dw - dc) / dc).abs() < 1e-5,
            "window {dw:e} vs coulomb {dc:e}"
        );
    }

    #[test]
    fn separated_shells_interact_less() {
        // interaction between two narrow radial shells decreases as they
        // separate (Coulomb decay)
        let grid = RadialGrid::new(2048, 60.0, 4e5);
        let fun = Functional { grid, coefficient: 1.0, interaction: Interaction::Coulomb };
        let shell_pair = |r2: f64| -> f64 {
            let mut f: Vec<f64> = fun
                .grid
                .r
                .iter()
                .map(|r| (-(r - 3.0) * (r - 3.0) / 0.08).exp() + (-(r - r2) * (r - r2) / 0.08).exp())
                .collect();
            fun.normalize(&mut f);
            fun.interaction_energy(&f)
        };
        let d1 = shell_pair(6.0);
        let d2 = shell_pair(12.0);
        let d3 = shell_pair(24.0);
        assert!(d1 > d2 && d2 > d3, "{d1} {d2} {d3}");
    }
}

//! Chebyshev–Lobatto grids on [-1, 1]: interpolation, Clenshaw–Curtis
//! quadrature, spectral differentiation and Cauchy integrals of the
//! interpolant.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

const I: C64 = C64::new(0.0, 1.0);

/// Ascending Lobatto points `-cos(j pi / (n-1))`.
pub fn lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let m = (n - 1) as f64;
    let mut t: Vec<f64> = (0..n).map(|j| -(j as f64 * PI / m).cos()).collect();
    // exact symmetry and endpoints
    t[0] = -1.0;
    t[n - 1] = 1.0;
    for j in 0..n / 2 {
        let v = 0.5 * (t[n - 1 - j] - t[j]);
        t[j] = -v;
        t[n - 1 - j] = v;
    }
    if n % 2 == 1 {
        t[n / 2] = 0.0;
    }
    t
}

/// Clenshaw–Curtis weights for [`lobatto`] points.
pub fn cc_weights(n: usize) -> Vec<f64> {
    let nn = n - 1;
    let m = nn as f64;
    let mut w = vec![0.0; n];
    for (k, wk) in w.iter_mut().enumerate() {
        let mut s = 1.0;
        for j in 1..=nn / 2 {
            let b = if 2 * j == nn { 1.0 } else { 2.0 };
            s -= b / (4.0 * (j * j) as f64 - 1.0) * (2.0 * (j * k) as f64 * PI / m).cos();
        }
        let c = if k == 0 || k == nn { 1.0 } else { 2.0 };
        *wk = c / m * s;
    }
    w
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Chebyshev polynomials `T_0..T_{n-1}` at `z`.
pub fn cheb_t(n: usize, z: C64) -> Vec<C64> {
    let mut t = vec![C64::new(0.0, 0.0); n];
    if n > 0 {
        t[0] = C64::new(1.0, 0.0);
    }
    if n > 1 {
        t[1] = z;
    }
    for k in 2..n {
        t[k] = 2.0 * z * t[k - 1] - t[k - 2];
    }
    t
}

/// `D_k(z) = int (T_k(s) - T_k(z)) / (s - z) ds` for k < n.
pub fn cheb_d(n: usize, z: C64) -> Vec<C64> {
    let mu = |k: usize| -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (1.0 - (k * k) as f64)
        }
    };
    let mut d = vec![C64::new(0.0, 0.0); n];
    if n > 1 {
        d[1] = C64::new(2.0, 0.0);
    }
    for k in 1..n.saturating_sub(1) {
        d[k + 1] = 2.0 * mu(k) + 2.0 * z * d[k] - d[k - 1];
    }
    d
}

/// Bernstein-ellipse parameter of `z` relative to [-1, 1].
pub fn bernstein_rho(z: C64) -> f64 {
    let w = z + (z - 1.0).sqrt() * (z + 1.0).sqrt();
    let r = w.norm();
    if r < 1.0 {
        1.0 / r
    } else {
        r
    }
}

/// Which one-sided boundary value of a Cauchy integral is wanted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Precomputed tables for one Lobatto grid size.
#[derive(Clone, Debug)]
pub struct ChebBasis {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// values -> Chebyshev coefficients, `coef[l * n + j]`
    coef: Vec<f64>,
    up_nodes: Vec<f64>,
    up_weights: Vec<f64>,
    /// upsampled interpolation, `interp[i * n + j]`
    interp: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "need at least 4 nodes per arc");
        let nodes = lobatto(n);
        let weights = cc_weights(n);
        let nn = n - 1;
        let m = nn as f64;
        let mut coef = vec![0.0; n * n];
        for l in 0..n {
            for j in 0..n {
                let th = PI - j as f64 * PI / m;
                let mut v = 2.0 / m * (l as f64 * th).cos();
                if j == 0 || j == nn {
                    v *= 0.5;
                }
                if l == 0 || l == nn {
                    v *= 0.5;
                }
                coef[l * n + j] = v;
            }
        }
        let mut bary: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        bary[0] *= 0.5;
        bary[nn] *= 0.5;
        let mu = 8 * n;
        let up_nodes = lobatto(mu);
        let up_weights = cc_weights(mu);
        let mut interp = vec![0.0; mu * n];
        for (i, &s) in up_nodes.iter().enumerate() {
            let row = bary_row_real(&nodes, &bary, s);
            interp[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        ChebBasis {
            n,
            nodes,
            weights,
            coef,
            up_nodes,
            up_weights,
            interp,
            bary,
        }
    }

    /// Chebyshev coefficients of the interpolant of `f`.
    pub fn coeffs(&self, f: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..n)
            .map(|l| {
                self.coef[l * n..(l + 1) * n]
                    .iter()
                    .zip(f)
                    .map(|(c, v)| v * *c)
                    .sum()
            })
            .collect()
    }

    /// Row `r` with `p(z) = sum_j r_j f_j` for the interpolant `p`.
    pub fn interp_row(&self, z: C64) -> Vec<C64> {
        let n = self.n;
        let mut num = vec![C64::new(0.0, 0.0); n];
        let mut den = C64::new(0.0, 0.0);
        for j in 0..n {
            let d = z - self.nodes[j];
            if d.norm() < 1e-15 {
                let mut r = vec![C64::new(0.0, 0.0); n];
                r[j] = C64::new(1.0, 0.0);
                return r;
            }
            num[j] = self.bary[j] / d;
            den += num[j];
        }
        num.iter().map(|v| v / den).collect()
    }

    /// Evaluates the interpolant of `f` at `z`.
    pub fn interp(&self, f: &[C64], z: C64) -> C64 {
        self.interp_row(z).iter().zip(f).map(|(r, v)| r * v).sum()
    }

    /// Spectral differentiation matrix (row-major) on the ascending nodes.
    pub fn diff_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let t = &self.nodes;
        let c = |i: usize| if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if i != j {
                    let sg = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let v = c(i) / c(j) * sg / (t[i] - t[j]);
                    d[i * n + j] = v;
                    s += v;
                }
            }
            d[i * n + i] = -s;
        }
        d
    }

    /// Clenshaw–Curtis integral of the interpolant.
    pub fn integrate(&self, f: &[C64]) -> C64 {
        self.weights.iter().zip(f).map(|(w, v)| v * *w).sum()
    }

    /// Row for `(1/2 pi i) int p(t) / (t - tau) dt`. Points on (-1, 1)
    /// take the boundary value from `side`; endpoints go through
    /// [`ChebBasis::cauchy_row_endpoint`].
    pub fn cauchy_row(&self, tau: C64, side: Side) -> Vec<C64> {
        let n = self.n;
        let scale = 1.0 / (2.0 * PI * I);
        let on_line = tau.im.abs() < 1e-14 && tau.re.abs() < 1.0;
        let rho = if on_line { 1.0 } else { bernstein_rho(tau) };
        let near = 1.0 + 7.0 / n as f64;
        if on_line || rho < near {
            let log = if on_line {
                let x = tau.re;
                C64::new(((1.0 - x) / (1.0 + x)).ln(), side.sign() * PI)
            } else {
                ((tau - 1.0) / (tau + 1.0)).ln()
            };
            let t = cheb_t(n, tau);
            let d = cheb_d(n, tau);
            let g: Vec<C64> = t.iter().zip(&d).map(|(a, b)| a * log + b).collect();
            return self.apply_coef_t(&g).into_iter().map(|v| v * scale).collect();
        }
        if rho.powi(n as i32) < 1e17 {
            let mut k = vec![C64::new(0.0, 0.0); self.up_nodes.len()];
            for (i, (s, w)) in self.up_nodes.iter().zip(&self.up_weights).enumerate() {
                k[i] = *w / (*s - tau);
            }
            let mut row = vec![C64::new(0.0, 0.0); n];
            for (i, ki) in k.iter().enumerate() {
                let r = &self.interp[i * n..(i + 1) * n];
                for j in 0..n {
                    row[j] += ki * r[j];
                }
            }
            return row.into_iter().map(|v| v * scale).collect();
        }
        (0..n)
            .map(|j| self.weights[j] / (self.nodes[j] - tau) * scale)
            .collect()
    }

    /// Finite-part row at an endpoint: `(1/2 pi i)(p(e) fp + D_p(e))`,
    /// `e = +1` when `at_end`, else `-1`.
    pub fn cauchy_row_endpoint(&self, at_end: bool, fp: C64) -> Vec<C64> {
        let n = self.n;
        let e = if at_end { 1.0 } else { -1.0 };
        let d = cheb_d(n, C64::new(e, 0.0));
        let mut row = self.apply_coef_t(&d);
        let k = if at_end { n - 1 } else { 0 };
        row[k] += fp;
        let scale = 1.0 / (2.0 * PI * I);
        row.into_iter().map(|v| v * scale).collect()
    }

    /// `sum_l g_l coef[l, j]` for each j.
    fn apply_coef_t(&self, g: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut row = vec![C64::new(0.0, 0.0); n];
        for l in 0..n {
            let gl = g[l];
            let c = &self.coef[l * n..(l + 1) * n];
            for j in 0..n {
                row[j] += gl * c[j];
            }
        }
        row
    }
}

fn bary_row_real(nodes: &[f64], bary: &[f64], s: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut r = vec![0.0; n];
    for j in 0..n {
        if (s - nodes[j]).abs() < 1e-15 {
            r[j] = 1.0;
            return r;
        }
    }
    let mut den = 0.0;
    for j in 0..n {
        r[j] = bary[j] / (s - nodes[j]);
        den += r[j];
    }
    r.iter_mut().for_each(|v| *v /= den);
    r
}

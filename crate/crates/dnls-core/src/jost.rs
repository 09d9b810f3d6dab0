//! Jost solutions of the Kaup–Newell problem
//! `m' = -i zeta^2 ad(sigma) m + (zeta Q + P) m` and the coefficients read
//! off them.
//!
//! Each column solves `w' = diag(l1, l2) w + B w`, marched as a Volterra
//! equation with exact exponential weights against cubic interpolants of
//! `B w` (implicit four-point product rule).

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cheb::gauss_legendre;
use crate::error::{Error, Result};
use crate::potential::Potential;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Threshold below which `|a|` counts as a spectral singularity.
pub const SINGULARITY_TOL: f64 = 1e-8;

/// Spectral variable and the scaling of the off-diagonal coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Form {
    /// `B = [[p1, zeta q], [-zeta conj(q), p2]]`, `omega = 2 zeta^2`
    Zeta(C64),
    /// `B = [[p1, q], [-lambda conj(q), p2]]`, `omega = 2 lambda`
    Lambda(C64),
}

impl Form {
    pub fn omega(&self) -> C64 {
        match *self {
            Form::Zeta(z) => 2.0 * z * z,
            Form::Lambda(l) => 2.0 * l,
        }
    }

    fn couplings(&self) -> (C64, C64) {
        match *self {
            Form::Zeta(z) => (z, -z),
            Form::Lambda(l) => (ONE, -l),
        }
    }
}

/// `zeta = sqrt(lambda)` with `arg lambda` taken in [0, 2 pi).
pub fn sqrt_branch(lambda: C64) -> C64 {
    let mut th = lambda.arg();
    if th < 0.0 {
        th += 2.0 * PI;
    }
    C64::from_polar(lambda.norm().sqrt(), 0.5 * th)
}

/// Points in the Lagrange history (the new value plus five previous ones).
const HIST: usize = 6;

struct Stepper {
    e: [C64; 2],
    w: [[C64; HIST]; 2],
}

impl Stepper {
    /// Weights `h int_0^1 exp(-kappa_k h s) l_i(s) ds` for the quintic
    /// Lagrange basis on s = 0, 1, ..., 5.
    fn new(kappa: [C64; 2], h: f64) -> Stepper {
        let (gx, gw) = gauss_legendre(16);
        let mut w = [[ZERO; HIST]; 2];
        for k in 0..2 {
            for (x, wg) in gx.iter().zip(&gw) {
                let s = 0.5 * (x + 1.0);
                let ex = (-kappa[k] * h * s).exp() * (0.5 * wg * h);
                for (i, wi) in w[k].iter_mut().enumerate() {
                    let mut l = 1.0;
                    for j in 0..HIST {
                        if j != i {
                            l *= (s - j as f64) / (i as f64 - j as f64);
                        }
                    }
                    *wi += ex * l;
                }
            }
        }
        Stepper {
            e: [(-kappa[0] * h).exp(), (-kappa[1] * h).exp()],
            w,
        }
    }
}

fn coupling(q: C64, c12: C64, c21: C64) -> [[C64; 2]; 2] {
    let p1 = I * (0.5 * q.norm_sqr());
    [[p1, c12 * q], [c21 * q.conj(), -p1]]
}

fn mul(b: &[[C64; 2]; 2], w: &[C64; 2]) -> [C64; 2] {
    [b[0][0] * w[0] + b[0][1] * w[1], b[1][0] * w[0] + b[1][1] * w[1]]
}

fn diag_rates(form: Form, col: usize) -> [C64; 2] {
    let om = form.omega();
    if col == 0 {
        [ZERO, I * om]
    } else {
        [-I * om, ZERO]
    }
}

/// Column `col` of the right-normalized solution, marched leftwards over
/// the support `[lo, N)` of the potential; `q` is taken as zero left of
/// `lo`. Returns values at `lo..N` (and fills `path` when given).
fn march_plus(p: &Potential, form: Form, col: usize, lo: usize, mut path: Option<&mut Vec<[C64; 2]>>) -> [C64; 2] {
    let n = p.len();
    let (c12, c21) = form.couplings();
    let st = Stepper::new(diag_rates(form, col), p.h);
    let mut w = [ZERO; 2];
    w[col] = ONE;
    let mut f = [[ZERO; 2]; HIST - 1];
    let b = coupling(p.q[n - 1], c12, c21);
    f[0] = mul(&b, &w);
    if let Some(pp) = path.as_deref_mut() {
        pp.resize(n - lo, [ZERO; 2]);
        pp[n - 1 - lo] = w;
    }
    for j in (lo..n - 1).rev() {
        let b = coupling(p.q[j], c12, c21);
        let mut rhs = [ZERO; 2];
        for k in 0..2 {
            rhs[k] = st.e[k] * w[k] - (1..HIST).map(|i| st.w[k][i] * f[i - 1][k]).sum::<C64>();
        }
        let m00 = ONE + st.w[0][0] * b[0][0];
        let m01 = st.w[0][0] * b[0][1];
        let m10 = st.w[1][0] * b[1][0];
        let m11 = ONE + st.w[1][0] * b[1][1];
        let det = m00 * m11 - m01 * m10;
        w = [(m11 * rhs[0] - m01 * rhs[1]) / det, (m00 * rhs[1] - m10 * rhs[0]) / det];
        f.rotate_right(1);
        f[0] = mul(&b, &w);
        if let Some(pp) = path.as_deref_mut() {
            pp[j - lo] = w;
        }
    }
    w
}

/// Column `col` of the left-normalized solution, marched rightwards up to
/// index `hi`. Fills `path` with values at `0..=hi`.
fn march_minus(p: &Potential, form: Form, col: usize, hi: usize, mut path: Option<&mut Vec<[C64; 2]>>) -> [C64; 2] {
    let (c12, c21) = form.couplings();
    let r = diag_rates(form, col);
    let st = Stepper::new([-r[0], -r[1]], p.h);
    let mut w = [ZERO; 2];
    w[col] = ONE;
    let mut f = [[ZERO; 2]; HIST - 1];
    let b = coupling(p.q[0], c12, c21);
    f[0] = mul(&b, &w);
    if let Some(pp) = path.as_deref_mut() {
        pp.resize(hi + 1, [ZERO; 2]);
        pp[0] = w;
    }
    for j in 1..=hi {
        let b = coupling(p.q[j], c12, c21);
        let mut rhs = [ZERO; 2];
        for k in 0..2 {
            rhs[k] = st.e[k] * w[k] + (1..HIST).map(|i| st.w[k][i] * f[i - 1][k]).sum::<C64>();
        }
        let m00 = ONE - st.w[0][0] * b[0][0];
        let m01 = -st.w[0][0] * b[0][1];
        let m10 = -st.w[1][0] * b[1][0];
        let m11 = ONE - st.w[1][0] * b[1][1];
        let det = m00 * m11 - m01 * m10;
        w = [(m11 * rhs[0] - m01 * rhs[1]) / det, (m00 * rhs[1] - m10 * rhs[0]) / det];
        f.rotate_right(1);
        f[0] = mul(&b, &w);
        if let Some(pp) = path.as_deref_mut() {
            pp[j] = w;
        }
    }
    w
}

/// Column `col` of the right-normalized solution at `x_lo`, for the
/// potential cut off left of `lo` (`lo = 0` for the full potential).
pub fn plus_column(p: &Potential, form: Form, col: usize, lo: usize) -> [C64; 2] {
    march_plus(p, form, col, lo, None)
}

/// Column `col` of the left-normalized solution at `x_hi`.
pub fn minus_column(p: &Potential, form: Form, col: usize, hi: usize) -> [C64; 2] {
    march_minus(p, form, col, hi, None)
}

pub type Mat2 = [[C64; 2]; 2];

/// Jost matrices on the whole grid.
#[derive(Clone, Debug)]
pub struct JostPair {
    pub zeta: C64,
    pub plus: Vec<Mat2>,
    pub minus: Vec<Mat2>,
}

impl JostPair {
    pub fn det_error(&self) -> f64 {
        let d = |m: &Mat2| (m[0][0] * m[1][1] - m[0][1] * m[1][0] - ONE).norm();
        self.plus
            .iter()
            .chain(&self.minus)
            .map(d)
            .fold(0.0, f64::max)
    }
}

fn columns_to_mats(c0: &[[C64; 2]], c1: &[[C64; 2]]) -> Vec<Mat2> {
    c0.iter()
        .zip(c1)
        .map(|(a, b)| [[a[0], b[0]], [a[1], b[1]]])
        .collect()
}

/// Both Jost solutions at every grid point. Columns that grow at this
/// `zeta` are returned as marched; they are exact only on R and iR.
pub fn jost_solve(p: &Potential, zeta: C64) -> JostPair {
    let n = p.len();
    let form = Form::Zeta(zeta);
    let mut cols: [Vec<[C64; 2]>; 4] = Default::default();
    march_plus(p, form, 0, 0, Some(&mut cols[0]));
    march_plus(p, form, 1, 0, Some(&mut cols[1]));
    march_minus(p, form, 0, n - 1, Some(&mut cols[2]));
    march_minus(p, form, 1, n - 1, Some(&mut cols[3]));
    JostPair {
        zeta,
        plus: columns_to_mats(&cols[0], &cols[1]),
        minus: columns_to_mats(&cols[2], &cols[3]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionCoeffs {
    pub zeta: C64,
    pub a: C64,
    pub a_breve: C64,
    pub b: C64,
    pub b_breve: C64,
}

/// `(a, a_breve, b, b_breve)` from the right-normalized solution at the
/// left grid end.
pub fn transition_coeffs(p: &Potential, zeta: C64) -> TransitionCoeffs {
    transition_coeffs_from(p, zeta, 0)
}

/// Same for the potential cut off at grid index `lo` (zero at and left of
/// `x_lo`, right limit kept at `x_lo`).
pub fn transition_coeffs_from(p: &Potential, zeta: C64, lo: usize) -> TransitionCoeffs {
    let form = Form::Zeta(zeta);
    let om = form.omega();
    let xl = p.x(lo);
    let c0 = march_plus(p, form, 0, lo, None);
    let c1 = march_plus(p, form, 1, lo, None);
    TransitionCoeffs {
        zeta,
        a: c0[0],
        a_breve: c1[1],
        b: (-I * om * xl).exp() * c0[1],
        b_breve: (I * om * xl).exp() * c1[0],
    }
}

/// The second representation, from the left-normalized solution at the
/// right grid end.
pub fn transition_coeffs_minus(p: &Potential, zeta: C64) -> TransitionCoeffs {
    let n = p.len();
    let form = Form::Zeta(zeta);
    let om = form.omega();
    let xr = p.x(n - 1);
    let c0 = march_minus(p, form, 0, n - 1, None);
    let c1 = march_minus(p, form, 1, n - 1, None);
    TransitionCoeffs {
        zeta,
        a: c1[1],
        a_breve: c0[0],
        b: -(-I * om * xr).exp() * c0[1],
        b_breve: -(I * om * xr).exp() * c1[0],
    }
}

/// `(r, r_breve) = (b_breve / a, b / a_breve)`.
pub fn reflection(c: &TransitionCoeffs) -> Result<(C64, C64)> {
    let m = c.a.norm().min(c.a_breve.norm());
    if m < SINGULARITY_TOL {
        return Err(Error::SpectralSingularity(m));
    }
    Ok((c.b_breve / c.a, c.b / c.a_breve))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaCoeffs {
    pub lambda: C64,
    pub alpha: C64,
    pub alpha_breve: C64,
    pub beta: C64,
    pub rho: C64,
    /// `n12^-(x0, lambda)` and `n21^-(x0, lambda)`, when a cutoff was given
    pub n12: Option<C64>,
    pub n21: Option<C64>,
}

/// Lambda-variable coefficients; `x0` is a grid index for the `n^-` entries.
pub fn to_lambda(p: &Potential, lambda: C64, x0: Option<usize>) -> Result<LambdaCoeffs> {
    let (alpha, alpha_breve, beta) = if lambda == ZERO {
        let form = Form::Lambda(ZERO);
        let c0 = march_plus(p, form, 0, 0, None);
        let c1 = march_plus(p, form, 1, 0, None);
        (c0[0], c1[1], c1[0])
    } else {
        let z = sqrt_branch(lambda);
        let t = transition_coeffs(p, z);
        (t.a, t.a_breve, t.b_breve / z)
    };
    if alpha.norm() < SINGULARITY_TOL {
        return Err(Error::SpectralSingularity(alpha.norm()));
    }
    let (n12, n21) = match x0 {
        Some(i0) => (Some(n12_minus(p, lambda, i0)), Some(n21_minus(p, lambda, i0))),
        None => (None, None),
    };
    Ok(LambdaCoeffs {
        lambda,
        alpha,
        alpha_breve,
        beta,
        rho: beta / alpha,
        n12,
        n21,
    })
}

/// `alpha(lambda) = n11^+(x_L)`; bounded for `Im lambda <= 0`.
pub fn alpha(p: &Potential, lambda: C64, lo: usize) -> C64 {
    march_plus(p, Form::Lambda(lambda), 0, lo, None)[0]
}

/// `alpha_breve(lambda) = n22^+(x_L)`; bounded for `Im lambda >= 0`.
pub fn alpha_breve(p: &Potential, lambda: C64, lo: usize) -> C64 {
    march_plus(p, Form::Lambda(lambda), 1, lo, None)[1]
}

/// `(alpha, beta)` for real lambda (one column of the right solution).
pub fn alpha_beta_real(p: &Potential, lambda: f64, lo: usize) -> (C64, C64, C64) {
    let form = Form::Lambda(C64::new(lambda, 0.0));
    let om = form.omega();
    let xl = p.x(lo);
    let c0 = march_plus(p, form, 0, lo, None);
    let c1 = march_plus(p, form, 1, lo, None);
    (c0[0], c1[1], (I * om * xl).exp() * c1[0])
}

/// `n21^-(x_{i0}, lambda)`; bounded for `Im lambda >= 0`.
pub fn n21_minus(p: &Potential, lambda: C64, i0: usize) -> C64 {
    march_minus(p, Form::Lambda(lambda), 0, i0, None)[1]
}

/// `n12^-(x_{i0}, lambda)`; bounded for `Im lambda <= 0`.
pub fn n12_minus(p: &Potential, lambda: C64, i0: usize) -> C64 {
    march_minus(p, Form::Lambda(lambda), 1, i0, None)[0]
}

/// Smallest grid index `x0` with
/// `sup_zeta int_{x0}^inf max|zeta Q + P| < 0.9 / 2`, the sup taken over 16
/// points of `|zeta| = r` and `zeta = 0`.
pub fn choose_cutoff(p: &Potential, r: f64) -> Result<usize> {
    let mut tails = Vec::new();
    for k in 0..16 {
        let z = C64::from_polar(r, 2.0 * PI * k as f64 / 16.0);
        tails.push(p.tail_integral(|q| (z.norm() * q.norm()).max(0.5 * q.norm_sqr())));
    }
    tails.push(p.tail_integral(|q| 0.5 * q.norm_sqr()));
    let bound = 0.9 * 0.5;
    let n = p.len();
    for j in 0..n {
        let sup = tails.iter().map(|t| t[j]).fold(0.0, f64::max);
        if sup < bound {
            if j + 4 > n {
                break;
            }
            return Ok(j);
        }
    }
    Err(Error::NoCutoff)
}

/// Winding number of `f` along the closed polygon-with-arcs `path(s)`,
/// `s in [0, 1]`, with adaptive refinement of large argument jumps.
pub fn winding(f: impl Fn(C64) -> C64, path: impl Fn(f64) -> C64, samples: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut s0 = 0.0;
    let mut v0 = f(path(0.0));
    let ds = 1.0 / samples as f64;
    for k in 1..=samples {
        let s1 = k as f64 * ds;
        total += arg_step(&f, &path, s0, s1, v0, 0)?;
        v0 = f(path(s1));
        s0 = s1;
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 0.05 {
        return Err(Error::Winding(w));
    }
    Ok(w.round())
}

fn arg_step(f: &impl Fn(C64) -> C64, path: &impl Fn(f64) -> C64, s0: f64, s1: f64, v0: C64, depth: usize) -> Result<f64> {
    let v1 = f(path(s1));
    if v0.norm() < SINGULARITY_TOL || v1.norm() < SINGULARITY_TOL {
        return Err(Error::SpectralSingularity(v0.norm().min(v1.norm())));
    }
    let d = (v1 / v0).arg();
    if d.abs() <= PI / 3.0 {
        return Ok(d);
    }
    if depth > 20 {
        return Err(Error::Winding(d));
    }
    let sm = 0.5 * (s0 + s1);
    let vm = f(path(sm));
    Ok(arg_step(f, path, s0, sm, v0, depth + 1)? + arg_step(f, path, sm, s1, vm, depth + 1)?)
}

/// Zeros of `alpha` in the lower half disc `|lambda| < s`.
pub fn count_zeros_lower(p: &Potential, s: f64, samples: usize) -> Result<i64> {
    // real diameter left to right, then back along the lower semicircle
    let path = |u: f64| {
        if u <= 0.5 {
            C64::new(-s + 4.0 * s * u, 0.0)
        } else {
            C64::from_polar(s, -PI * (2.0 * u - 1.0))
        }
    };
    let w = winding(|l| alpha(p, l, 0), path, samples)?;
    // the semicircle is traversed clockwise
    Ok(-(w as i64))
}

/// Zeros of the cutoff `alpha_breve_0` in the upper half disc `|lambda| < s`.
pub fn count_zeros_upper_breve(p: &Potential, lo: usize, s: f64, samples: usize) -> Result<i64> {
    let path = |u: f64| {
        if u <= 0.5 {
            C64::new(-s + 4.0 * s * u, 0.0)
        } else {
            C64::from_polar(s, PI * (2.0 * u - 1.0))
        }
    };
    let w = winding(|l| alpha_breve(p, l, lo), path, samples)?;
    Ok(w as i64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusConfig {
    pub margin: f64,
    pub r_min: f64,
    pub r_cap: f64,
    pub samples: usize,
}

impl Default for RadiusConfig {
    fn default() -> Self {
        RadiusConfig {
            margin: 0.25,
            r_min: 1.0,
            r_cap: 4.0,
            samples: 512,
        }
    }
}

/// Radius (in zeta) enclosing every zero of `a`: `r_min` when zero-free,
/// otherwise the ladder radius `r_min (1+m)^k` past the outermost zero,
/// widened by the margin.
pub fn choose_radius(p: &Potential, cfg: &RadiusConfig) -> Result<f64> {
    let total = count_zeros_lower(p, cfg.r_cap * cfg.r_cap, cfg.samples)?;
    if total == 0 {
        return Ok(cfg.r_min);
    }
    let mut r = cfg.r_min;
    while r < cfg.r_cap {
        if count_zeros_lower(p, r * r, cfg.samples)? == total {
            return Ok(r * (1.0 + cfg.margin));
        }
        r *= 1.0 + cfg.margin;
    }
    Ok(cfg.r_cap * (1.0 + cfg.margin))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_solution_is_identity() {
        let p = Potential::zero(5.0, 0.01);
        let j = jost_solve(&p, C64::new(0.7, 0.2));
        for m in j.plus.iter().chain(&j.minus) {
            assert!((m[0][0] - ONE).norm() < 1e-15 && m[0][1].norm() < 1e-15);
            assert!((m[1][1] - ONE).norm() < 1e-15 && m[1][0].norm() < 1e-15);
        }
    }

    #[test]
    fn branch_is_upper_half() {
        let z = sqrt_branch(C64::new(-4.0, 0.0));
        assert!((z - C64::new(0.0, 2.0)).norm() < 1e-15);
        let z = sqrt_branch(C64::new(0.0, -1.0));
        assert!(z.re < 0.0 && z.im > 0.0);
    }

    // zeta = 0 decouples: m11 = exp(-(i/2) int_x^X A^2 sech^2)
    #[test]
    fn zeta_zero_closed_form() {
        let a = 0.8;
        let p = Potential::sech(a, 12.0, 0.01);
        let j = jost_solve(&p, ZERO);
        let xr = p.half_width;
        for (k, m) in j.plus.iter().enumerate().step_by(97) {
            let x = p.x(k);
            let phi = a * a * (xr.tanh() - x.tanh());
            let want = (-I * 0.5 * phi).exp();
            assert!((m[0][0] - want).norm() < 1e-9, "{k}");
            assert!(m[1][0].norm() < 1e-14);
        }
    }

    fn rk4_oracle(a: f64, xr: f64, x_end: f64, zeta: C64, col: usize, steps: usize) -> [C64; 2] {
        let q = |x: f64| C64::new(a / x.cosh(), 0.0);
        let om = 2.0 * zeta * zeta;
        let rates = if col == 0 { [ZERO, I * om] } else { [-I * om, ZERO] };
        let rhs = |x: f64, w: [C64; 2]| {
            let b = coupling(q(x), zeta, -zeta);
            let f = mul(&b, &w);
            [rates[0] * w[0] + f[0], rates[1] * w[1] + f[1]]
        };
        let mut w = [ZERO; 2];
        w[col] = ONE;
        let h = (x_end - xr) / steps as f64;
        let mut x = xr;
        for _ in 0..steps {
            let k1 = rhs(x, w);
            let k2 = rhs(x + 0.5 * h, [w[0] + 0.5 * h * k1[0], w[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(x + 0.5 * h, [w[0] + 0.5 * h * k2[0], w[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(x + h, [w[0] + h * k3[0], w[1] + h * k3[1]]);
            for i in 0..2 {
                w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            x += h;
        }
        w
    }

    #[test]
    fn matches_rk4_on_both_axes() {
        let a = 1.1;
        let p = Potential::sech(a, 12.0, 0.005);
        for zeta in [C64::new(0.9, 0.0), C64::new(0.0, 0.7), C64::new(1.6, 0.0)] {
            let t = transition_coeffs(&p, zeta);
            let c0 = rk4_oracle(a, 12.0, -12.0, zeta, 0, 200_000);
            let c1 = rk4_oracle(a, 12.0, -12.0, zeta, 1, 200_000);
            assert!((t.a - c0[0]).norm() < 1e-8, "{zeta} {} {}", t.a, c0[0]);
            assert!((t.a_breve - c1[1]).norm() < 1e-8);
        }
    }

    #[test]
    fn unimodular_and_representations_agree() {
        let p = Potential::from_family(
            crate::potential::Family::Sech { amp: 0.9, phase: alloc::vec![0.0, 0.3, 0.1] },
            18.0,
            0.005,
        );
        for zeta in [C64::new(0.6, 0.0), C64::new(0.0, 1.2), C64::new(-1.3, 0.0)] {
            let j = jost_solve(&p, zeta);
            assert!(j.det_error() < 1e-9, "{}", j.det_error());
            let u = transition_coeffs(&p, zeta);
            let v = transition_coeffs_minus(&p, zeta);
            for (x, y) in [(u.a, v.a), (u.a_breve, v.a_breve), (u.b, v.b), (u.b_breve, v.b_breve)] {
                assert!((x - y).norm() < 1e-9, "{zeta}: {x} vs {y}");
            }
            // a a_breve - b b_breve = 1 on the axes
            assert!((u.a * u.a_breve - u.b * u.b_breve - ONE).norm() < 1e-9);
        }
    }
}

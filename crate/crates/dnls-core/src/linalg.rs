//! Dense complex linear algebra on column-major `nalgebra` matrices.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

/// `a * b` through the blocked complex kernel.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // Complex64 is repr(C) { re, im }, layout-identical to [f64; 2]
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `m * diag(d)`.
pub fn scale_cols(m: &CMat, d: &[C64]) -> CMat {
    let mut out = m.clone();
    for (j, dj) in d.iter().enumerate() {
        out.column_mut(j).iter_mut().for_each(|v| *v *= dj);
    }
    out
}

pub fn matvec(m: &CMat, v: &[C64]) -> Vec<C64> {
    let n = m.nrows();
    let mut out = alloc::vec![C64::new(0.0, 0.0); n];
    for (j, vj) in v.iter().enumerate() {
        if *vj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.column(j);
        for i in 0..n {
            out[i] += col[i] * vj;
        }
    }
    out
}

const LU_BLOCK: usize = 48;

/// `c -= a * b` on column-major blocks with leading dimension `ld`.
///
/// # Safety
/// The three blocks must lie inside one allocation and `c` must not
/// overlap `a` or `b`.
unsafe fn gemm_sub(m: usize, k: usize, n: usize, a: *const C64, b: *const C64, c: *mut C64, ld: usize) {
    matrixmultiply::zgemm(
        matrixmultiply::CGemmOption::Standard,
        matrixmultiply::CGemmOption::Standard,
        m,
        k,
        n,
        [-1.0, 0.0],
        a as *const [f64; 2],
        1,
        ld as isize,
        b as *const [f64; 2],
        1,
        ld as isize,
        [1.0, 0.0],
        c as *mut [f64; 2],
        1,
        ld as isize,
    );
}

/// Blocked LU with partial pivoting, `P M = L U`, with an adjoint solve.
pub struct Lu {
    n: usize,
    /// unit-lower `L` below the diagonal, `U` on and above it
    f: Vec<C64>,
    /// row swapped with row `k` at step `k`
    piv: Vec<usize>,
    singular: bool,
}

impl Lu {
    /// `with_adjoint` is accepted for call-site clarity; the same factors
    /// serve both solves.
    pub fn new(m: CMat, _with_adjoint: bool) -> Lu {
        let n = m.nrows();
        assert_eq!(n, m.ncols());
        let mut f: Vec<C64> = m.as_slice().to_vec();
        let mut piv = vec![0; n];
        let mut singular = false;
        let zero = C64::new(0.0, 0.0);
        let mut k0 = 0;
        while k0 < n {
            let kb = LU_BLOCK.min(n - k0);
            for k in k0..k0 + kb {
                let col = k * n;
                let mut p = k;
                let mut best = f[col + k].norm_sqr();
                for i in k + 1..n {
                    let v = f[col + i].norm_sqr();
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                piv[k] = p;
                if p != k {
                    for j in 0..n {
                        f.swap(j * n + k, j * n + p);
                    }
                }
                let d = f[col + k];
                if d == zero {
                    singular = true;
                    continue;
                }
                let inv = C64::new(1.0, 0.0) / d;
                for i in k + 1..n {
                    f[col + i] *= inv;
                }
                for j in k + 1..k0 + kb {
                    let ukj = f[j * n + k];
                    if ukj != zero {
                        for i in k + 1..n {
                            let l = f[col + i];
                            f[j * n + i] -= l * ukj;
                        }
                    }
                }
            }
            let rest = k0 + kb;
            if rest < n {
                // U12 = L11^{-1} A12
                for j in rest..n {
                    for k in k0..rest {
                        let v = f[j * n + k];
                        if v != zero {
                            for i in k + 1..rest {
                                let l = f[k * n + i];
                                f[j * n + i] -= l * v;
                            }
                        }
                    }
                }
                let base = f.as_mut_ptr();
                // SAFETY: L21 (rows rest.., cols k0..rest), U12 (rows k0..rest,
                // cols rest..) and A22 (rows rest.., cols rest..) are disjoint
                unsafe {
                    gemm_sub(
                        n - rest,
                        kb,
                        n - rest,
                        base.add(k0 * n + rest),
                        base.add(rest * n + k0),
                        base.add(rest * n + rest),
                        n,
                    );
                }
            }
            k0 = rest;
        }
        Lu { n, f, piv, singular }
    }

    fn check(&self, b: &[C64]) -> Result<()> {
        if self.singular {
            return Err(Error::NearSingular(0.0));
        }
        if b.len() != self.n {
            return Err(Error::Shape(alloc::format!("rhs of length {} for order {}", b.len(), self.n)));
        }
        Ok(())
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.check(b)?;
        let (n, f) = (self.n, &self.f);
        let mut x = b.to_vec();
        for (k, &p) in self.piv.iter().enumerate() {
            x.swap(k, p);
        }
        for k in 0..n {
            let v = x[k];
            for i in k + 1..n {
                x[i] -= f[k * n + i] * v;
            }
        }
        for k in (0..n).rev() {
            x[k] /= f[k * n + k];
            let v = x[k];
            for i in 0..k {
                x[i] -= f[k * n + i] * v;
            }
        }
        Ok(x)
    }

    /// Solves `M^H x = b` as `U^H L^H (P x) = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.check(b)?;
        let (n, f) = (self.n, &self.f);
        let mut x = b.to_vec();
        for k in 0..n {
            let col = &f[k * n..k * n + k];
            let s: C64 = col.iter().zip(&x[..k]).map(|(u, v)| u.conj() * v).sum();
            x[k] = (x[k] - s) / f[k * n + k].conj();
        }
        for k in (0..n).rev() {
            let col = &f[k * n + k + 1..(k + 1) * n];
            let s: C64 = col.iter().zip(&x[k + 1..]).map(|(l, v)| l.conj() * v).sum();
            x[k] -= s;
        }
        for (k, &p) in self.piv.iter().enumerate().rev() {
            x.swap(k, p);
        }
        Ok(x)
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Smallest singular value of an operator given only solves with it and
/// its adjoint: Lanczos (full reorthogonalization) on `(K^* K)^{-1}`.
pub fn sigma_min_inverse_iteration(
    n: usize,
    solve: impl Fn(&[C64]) -> Result<Vec<C64>>,
    solve_adj: impl Fn(&[C64]) -> Result<Vec<C64>>,
    max_iter: usize,
    rtol: f64,
) -> Result<f64> {
    // deterministic, non-symmetric start
    let mut q: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64 * 0.618).sin(), (i as f64 * 1.3).cos()))
        .collect();
    let s = norm2(&q);
    q.iter_mut().for_each(|v| *v /= s);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut est = 0.0;
    for _ in 0..max_iter.min(n) {
        let mut w = solve_adj(&solve(&q)?)?;
        if w.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NearSingular(0.0));
        }
        alpha.push(dot(&q, &w).re);
        basis.push(q);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let k = alpha.len();
        let t = nalgebra::DMatrix::<f64>::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let top = t.symmetric_eigenvalues().max();
        let nb = norm2(&w);
        let done = (top - est).abs() <= rtol * top || nb <= 1e-14 * top;
        est = top;
        if done {
            break;
        }
        beta.push(nb);
        q = w.into_iter().map(|v| v / nb).collect();
    }
    Ok(1.0 / est.sqrt())
}

/// Small helpers for 2x2 matrices stored as `[[C64; 2]; 2]`.
pub mod m2 {
    use crate::jost::Mat2;
    use num_complex::Complex64 as C64;

    const Z: C64 = C64::new(0.0, 0.0);
    const O: C64 = C64::new(1.0, 0.0);

    pub const IDENTITY: Mat2 = [[O, Z], [Z, O]];
    pub const ZERO: Mat2 = [[Z, Z], [Z, Z]];

    pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
        [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ]
    }

    pub fn det(a: &Mat2) -> C64 {
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn inv(a: &Mat2) -> Mat2 {
        let d = det(a);
        [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
    }

    pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
        [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
    }

    pub fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
        [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
    }

    pub fn scale(a: &Mat2, s: C64) -> Mat2 {
        [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
    }

    pub fn adjoint(a: &Mat2) -> Mat2 {
        [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
    }

    pub fn upper(u: C64) -> Mat2 {
        [[O, u], [Z, O]]
    }

    pub fn lower(l: C64) -> Mat2 {
        [[O, Z], [l, O]]
    }

    /// Largest entry modulus.
    pub fn max_abs(a: &Mat2) -> f64 {
        a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Diagonal conjugation: scales the (1,2) entry by `e12` and the (2,1)
    /// entry by `e21` (callers pass reciprocal phases).
    pub fn conj_phase(a: &Mat2, e12: C64, e21: C64) -> Mat2 {
        [[a[0][0], a[0][1] * e12], [a[1][0] * e21, a[1][1]]]
    }
}

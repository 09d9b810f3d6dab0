//! Potentials sampled on a uniform grid over [-X, X].

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Closed-form families a potential may be sampled from.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `A sech(x) exp(i sum_k phase[k] x^k)`
    Sech { amp: f64, phase: Vec<f64> },
}

impl Family {
    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Family::Sech { amp, phase } => {
                let mut th = 0.0;
                let mut p = 1.0;
                for c in phase {
                    th += c * p;
                    p *= x;
                }
                C64::from_polar(amp / x.cosh(), th)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    /// half-width `X`; the grid is `x_j = -X + j h`
    pub half_width: f64,
    pub h: f64,
    pub q: Vec<C64>,
    pub family: Option<Family>,
}

impl Potential {
    /// Samples on `[-half_width, half_width]` with spacing `h`.
    pub fn from_fn(half_width: f64, h: f64, f: impl Fn(f64) -> C64) -> Potential {
        let m = (2.0 * half_width / h).round() as usize;
        let h = 2.0 * half_width / m as f64;
        let q = (0..=m).map(|j| f(-half_width + j as f64 * h)).collect();
        Potential {
            half_width,
            h,
            q,
            family: None,
        }
    }

    pub fn from_family(family: Family, half_width: f64, h: f64) -> Potential {
        let mut p = Potential::from_fn(half_width, h, |x| family.eval(x));
        p.family = Some(family);
        p
    }

    pub fn sech(amp: f64, half_width: f64, h: f64) -> Potential {
        Potential::from_family(
            Family::Sech {
                amp,
                phase: Vec::new(),
            },
            half_width,
            h,
        )
    }

    pub fn zero(half_width: f64, h: f64) -> Potential {
        Potential::from_fn(half_width, h, |_| C64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Nearest grid index to `x`.
    pub fn index_of(&self, x: f64) -> usize {
        let j = ((x + self.half_width) / self.h).round();
        (j.max(0.0) as usize).min(self.len() - 1)
    }

    /// Value at an arbitrary `x`: the closed form when there is one, else
    /// six-point Lagrange interpolation; zero outside `[-X, X]`.
    pub fn interp(&self, x: f64) -> C64 {
        if x < -self.half_width || x > self.half_width {
            return C64::new(0.0, 0.0);
        }
        if let Some(f) = &self.family {
            return f.eval(x);
        }
        let n = self.len();
        if n < 6 {
            return self.q[self.index_of(x)];
        }
        let u = (x + self.half_width) / self.h;
        let base = (u.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..6 {
            let mut w = 1.0;
            for b in 0..6 {
                if a != b {
                    w *= (u - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * self.q[base + a];
        }
        acc
    }

    /// Checks the numerical compact-support assumption.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.len() < 8 {
            return Err(Error::Potential("grid has fewer than 8 points".into()));
        }
        if self.q.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Potential("non-finite samples".into()));
        }
        let edge = self.q[0].norm().max(self.q[self.len() - 1].norm());
        if edge > tol {
            return Err(Error::Potential(format!(
                "|q(+-X)| = {edge:e} exceeds truncation tolerance {tol:e}"
            )));
        }
        Ok(())
    }

    /// Trapezoid L2 norm.
    pub fn l2_norm(&self) -> f64 {
        trapz(&self.q.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>(), self.h).sqrt()
    }

    /// Discrete weighted Sobolev norm from `q`, `q''` (central differences)
    /// and `x^2 q`.
    pub fn h22_estimate(&self) -> f64 {
        let n = self.len();
        let mut acc = Vec::with_capacity(n);
        for j in 0..n {
            let x = self.x(j);
            let qm = if j > 0 { self.q[j - 1] } else { C64::new(0.0, 0.0) };
            let qp = if j + 1 < n { self.q[j + 1] } else { C64::new(0.0, 0.0) };
            let d2 = (qp - 2.0 * self.q[j] + qm) / (self.h * self.h);
            acc.push(self.q[j].norm_sqr() + d2.norm_sqr() + (x * x * self.q[j]).norm_sqr());
        }
        trapz(&acc, self.h).sqrt()
    }

    /// `conj(q(-x))` on the same (symmetric) grid.
    pub fn reflected(&self) -> Potential {
        Potential {
            half_width: self.half_width,
            h: self.h,
            q: self.q.iter().rev().map(|v| v.conj()).collect(),
            family: None,
        }
    }

    /// `q` with everything at or left of grid index `i0` removed.
    pub fn cutoff(&self, i0: usize) -> Potential {
        let mut p = self.clone();
        for v in p.q.iter_mut().take(i0 + 1) {
            *v = C64::new(0.0, 0.0);
        }
        p.family = None;
        p
    }

    /// `int_{x_j}^{X} g` by cumulative trapezoid from the right end.
    pub fn tail_integral(&self, g: impl Fn(C64) -> f64) -> Vec<f64> {
        let n = self.len();
        let mut out = alloc::vec![0.0; n];
        for j in (0..n - 1).rev() {
            out[j] = out[j + 1] + 0.5 * self.h * (g(self.q[j]) + g(self.q[j + 1]));
        }
        out
    }
}

pub(crate) fn trapz(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn smooth(x: f64) -> C64 {
        C64::new((-x * x).exp() * (2.0 * x).cos(), 0.5 * (-0.5 * x * x).exp())
    }

    #[test]
    fn reflection_and_cutoff() {
        let p = Potential::from_fn(3.0, 0.5, smooth);
        let r = p.reflected();
        for j in 0..p.len() {
            assert_eq!(r.q[j], p.q[p.len() - 1 - j].conj());
        }
        let c = p.cutoff(4);
        assert!(c.q[..5].iter().all(|v| v.norm() == 0.0));
        assert_eq!(c.q[5..], p.q[5..]);
    }

    proptest! {
        #[test]
        fn interp_matches_samples_and_function(j in 0usize..601, frac in 0.0f64..1.0, far in 6.0f64..50.0) {
            let p = Potential::from_fn(6.0, 0.02, smooth);
            prop_assert!((p.interp(p.x(j)) - p.q[j]).norm() < 1e-14);
            let x = (p.x(j) + frac * p.h).min(6.0);
            prop_assert!((p.interp(x) - smooth(x)).norm() < 1e-8);
            prop_assert_eq!(p.interp(far + 1e-9), C64::new(0.0, 0.0));
            prop_assert_eq!(p.interp(-far - 1e-9), C64::new(0.0, 0.0));
        }
    }
}

//! Pseudo-spectral integrator for `i q_t + q_xx + i eps q^2 conj(q)_x + |q|^4 q / 2 = 0`
//! on a periodic box, used as an independent check of the IST time flow.

use std::f64::consts::PI;
use std::sync::Arc;

use dnls_core::potential::Potential;
use dnls_core::C64;
use rustfft::{Fft, FftPlanner};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("initial data not resolved on the box: {0}")]
    Unresolved(String),
    #[error("blow-up at t = {t}: max|q| grew by a factor {growth:.3}")]
    BlowUp { t: f64, growth: f64 },
    #[error("bad integrator settings: {0}")]
    Settings(String),
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PdeConfig {
    pub modes: usize,
    pub dt: f64,
    /// box length as a multiple of the potential's full width `2X`
    pub box_factor: f64,
    pub eps: f64,
    pub tail_tol: f64,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            modes: 2048,
            dt: 1e-3,
            box_factor: 2.0,
            eps: -1.0,
            tail_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PdeRun {
    pub box_len: f64,
    pub modes: usize,
    pub dt: f64,
    /// formal order of the time stepper
    pub order: u32,
    pub times: Vec<f64>,
    /// Fourier coefficients per snapshot
    pub snapshots: Vec<Vec<C64>>,
    /// largest `| ||q(t)|| - ||q(0)|| |` seen over all steps
    pub l2_drift: f64,
    pub steps: usize,
}

struct Stepper {
    n: usize,
    m: usize,
    k: Vec<f64>,
    eps: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<C64>,
    dbuf: Vec<C64>,
}

fn wavenumbers(n: usize, len: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let j = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * PI * j / len
        })
        .collect()
}

impl Stepper {
    fn new(n: usize, len: f64, eps: f64) -> Stepper {
        let m = 3 * n / 2;
        let mut planner = FftPlanner::new();
        Stepper {
            n,
            m,
            k: wavenumbers(n, len),
            eps,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
            buf: vec![C64::new(0.0, 0.0); m],
            dbuf: vec![C64::new(0.0, 0.0); m],
        }
    }

    /// Zero-padded copy on `m` modes; the Nyquist mode is dropped.
    fn pad(&self, c: &[C64], out: &mut [C64], deriv: bool) {
        out.fill(C64::new(0.0, 0.0));
        let h = self.n / 2;
        for j in 0..self.n {
            if j == h {
                continue;
            }
            let v = if deriv { I * self.k[j] * c[j] } else { c[j] };
            let dst = if j < h { j } else { j + self.m - self.n };
            out[dst] = v;
        }
    }

    /// `-eps q^2 conj(q_x) + (i/2)|q|^4 q` in Fourier coefficients.
    fn nonlinear(&mut self, c: &[C64]) -> Vec<C64> {
        let mut b = std::mem::take(&mut self.buf);
        let mut d = std::mem::take(&mut self.dbuf);
        self.pad(c, &mut b, false);
        self.pad(c, &mut d, true);
        self.inv.process(&mut b);
        self.inv.process(&mut d);
        for (q, qx) in b.iter_mut().zip(&d) {
            let a = q.norm_sqr();
            *q = -self.eps * *q * *q * qx.conj() + 0.5 * I * a * a * *q;
        }
        self.fwd.process(&mut b);
        let s = 1.0 / self.m as f64;
        let h = self.n / 2;
        let out = (0..self.n)
            .map(|j| {
                if j == h {
                    C64::new(0.0, 0.0)
                } else {
                    let src = if j < h { j } else { j + self.m - self.n };
                    b[src] * s
                }
            })
            .collect();
        self.buf = b;
        self.dbuf = d;
        out
    }

    fn rk4(&mut self, c: &[C64], dt: f64) -> Vec<C64> {
        let e: Vec<C64> = self.k.iter().map(|k| (-I * k * k * dt / 2.0).exp()).collect();
        let n = self.n;
        let a: Vec<C64> = self.nonlinear(c).into_iter().map(|v| v * dt).collect();
        let s: Vec<C64> = (0..n).map(|j| e[j] * (c[j] + a[j] / 2.0)).collect();
        let b: Vec<C64> = self.nonlinear(&s).into_iter().map(|v| v * dt).collect();
        let s: Vec<C64> = (0..n).map(|j| e[j] * c[j] + b[j] / 2.0).collect();
        let cc: Vec<C64> = self.nonlinear(&s).into_iter().map(|v| v * dt).collect();
        let s: Vec<C64> = (0..n).map(|j| e[j] * e[j] * c[j] + e[j] * cc[j]).collect();
        let d: Vec<C64> = self.nonlinear(&s).into_iter().map(|v| v * dt).collect();
        (0..n)
            .map(|j| {
                let e2 = e[j] * e[j];
                e2 * c[j] + (e2 * a[j] + 2.0 * e[j] * (b[j] + cc[j]) + d[j]) / 6.0
            })
            .collect()
    }
}

/// `L sum |c_k|^2`, the squared L2 norm on the box.
fn l2_sq(c: &[C64], len: f64) -> f64 {
    len * c.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

fn max_abs(c: &[C64], inv: &Arc<dyn Fft<f64>>) -> f64 {
    let mut v = c.to_vec();
    inv.process(&mut v);
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sample_on_box(q0: &Potential, len: f64, n: usize) -> Vec<C64> {
    let dx = len / n as f64;
    (0..n).map(|j| q0.interp(-len / 2.0 + j as f64 * dx)).collect()
}

/// Integrates from `0` through each of `times` (sorted by distance from 0,
/// all of one sign) and stores the coefficients there.
pub fn step_dnls2(q0: &Potential, times: &[f64], cfg: &PdeConfig) -> Result<PdeRun, PdeError> {
    if cfg.modes < 16 || cfg.modes % 2 != 0 || !(cfg.dt > 0.0) || cfg.box_factor < 2.0 {
        return Err(PdeError::Settings(format!("{cfg:?}")));
    }
    q0.validate(cfg.tail_tol).map_err(|e| PdeError::Unresolved(e.to_string()))?;
    let len = cfg.box_factor * 2.0 * q0.half_width;
    let n = cfg.modes;
    let mut st = Stepper::new(n, len, cfg.eps);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut c = sample_on_box(q0, len, n);
    fwd.process(&mut c);
    for v in c.iter_mut() {
        *v /= n as f64;
    }
    let norm0 = l2_sq(&c, len).sqrt();
    let max0 = max_abs(&c, &inv);

    let mut run = PdeRun {
        box_len: len,
        modes: n,
        dt: cfg.dt,
        order: 4,
        times: Vec::new(),
        snapshots: Vec::new(),
        l2_drift: 0.0,
        steps: 0,
    };
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        let m = (span.abs() / cfg.dt).ceil() as usize;
        let h = if m == 0 { 0.0 } else { span / m as f64 };
        for _ in 0..m {
            c = st.rk4(&c, h);
            t += h;
            run.steps += 1;
            run.l2_drift = run.l2_drift.max((l2_sq(&c, len).sqrt() - norm0).abs());
            if max0 > 0.0 {
                let g = max_abs(&c, &inv) / max0;
                if !(g <= 10.0) {
                    return Err(PdeError::BlowUp { t, growth: g });
                }
            }
        }
        t = target;
        run.times.push(target);
        run.snapshots.push(c.clone());
    }
    Ok(run)
}

impl PdeRun {
    /// Snapshot `k` evaluated on `grid`'s points by its Fourier series.
    pub fn sample(&self, k: usize, grid: &Potential) -> Potential {
        let c = &self.snapshots[k];
        let kk = wavenumbers(self.modes, self.box_len);
        let h = self.modes / 2;
        let x0 = -self.box_len / 2.0;
        let q = grid
            .grid()
            .into_iter()
            .map(|x| {
                let mut acc = C64::new(0.0, 0.0);
                for (j, (cj, kj)) in c.iter().zip(&kk).enumerate() {
                    if j != h {
                        acc += cj * C64::from_polar(1.0, kj * (x - x0));
                    }
                }
                acc
            })
            .collect();
        Potential {
            q,
            family: None,
            ..grid.clone()
        }
    }

    pub fn l2_norm(&self, k: usize) -> f64 {
        l2_sq(&self.snapshots[k], self.box_len).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PdeConfig {
        PdeConfig {
            modes: 512,
            dt: 2e-3,
            ..PdeConfig::default()
        }
    }

    #[test]
    fn zero_stays_zero() {
        let q = Potential::zero(20.0, 0.05);
        let run = step_dnls2(&q, &[0.5], &small()).unwrap();
        assert!(run.snapshots[0].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn box_sampling_round_trips() {
        let q = Potential::sech(0.3, 24.0, 0.01);
        let run = step_dnls2(&q, &[0.0], &small()).unwrap();
        let back = run.sample(0, &q);
        let err = back.q.iter().zip(&q.q).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err:e}");
    }

    #[test]
    fn linear_limit_is_free_schrodinger() {
        // tiny data: the Gaussian spreads as exp(-x^2 / (1 + 4 i t)) / sqrt(1 + 4 i t)
        let amp = 1e-8;
        let q = Potential::from_fn(20.0, 0.02, |x| C64::new(amp * (-x * x).exp(), 0.0));
        let t = 0.3;
        let run = step_dnls2(&q, &[t], &small()).unwrap();
        let got = run.sample(0, &q);
        let w = C64::new(1.0, 4.0 * t);
        for (x, v) in got.grid().iter().zip(&got.q) {
            let e = amp * (-(x * x) / w).exp() / w.sqrt();
            assert!((v - e).norm() < 1e-12 * amp * 1e4, "x {x}");
        }
    }

    fn max_gap(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn conserves_l2_norm() {
        let q = Potential::sech(0.5, 24.0, 0.01);
        let cfg = PdeConfig {
            modes: 1024,
            ..PdeConfig::default()
        };
        let run = step_dnls2(&q, &[0.5, 1.0], &cfg).unwrap();
        assert!(run.l2_drift < 1e-6, "{:e}", run.l2_drift);
        assert!((run.l2_norm(1) - q.l2_norm()).abs() < 1e-6);
    }

    #[test]
    fn time_step_convergence_is_fourth_order() {
        let q = Potential::from_family(
            dnls_core::potential::Family::Sech {
                amp: 0.6,
                phase: vec![0.0, 0.5],
            },
            24.0,
            0.01,
        );
        let at = |dt: f64| {
            let cfg = PdeConfig {
                modes: 1024,
                dt,
                ..PdeConfig::default()
            };
            step_dnls2(&q, &[0.4], &cfg).unwrap().snapshots.remove(0)
        };
        let dt = 0.02;
        let reference = at(dt / 8.0);
        let e1 = max_gap(&at(dt), &reference);
        let e2 = max_gap(&at(dt / 2.0), &reference);
        let order = (e1 / e2).log2();
        assert!(order >= 3.8, "order {order:.2} ({e1:e}, {e2:e})");
    }

    #[test]
    fn backward_run_returns_to_start() {
        let q = Potential::sech(0.4, 24.0, 0.01);
        let cfg = PdeConfig {
            modes: 1024,
            ..PdeConfig::default()
        };
        let fwd = step_dnls2(&q, &[0.5], &cfg).unwrap();
        let mid = fwd.sample(0, &q);
        let back = step_dnls2(&mid, &[-0.5], &cfg).unwrap().sample(0, &q);
        let err = max_gap(&back.q, &q.q);
        assert!(err < 1e-5, "{err:e}");
    }

    #[test]
    fn rejects_unresolved_data() {
        let q = Potential::sech(0.3, 5.0, 0.05);
        assert!(matches!(step_dnls2(&q, &[0.1], &small()), Err(PdeError::Unresolved(_))));
    }
}

//! Potential recovery from Beals–Coifman densities.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::augment::{assemble_jump, factorize_jump, JumpField, Plane, ScatteringData};
use crate::cauchy::cauchy_offcontour;
use crate::error::{Error, Result};
use crate::evolution::evolve_jump;
use crate::jost::Mat2;
use crate::linalg::{matmul, matvec, CMat, Lu};
use crate::potential::Potential;
use crate::rhp::{build_regularizer, reconstruct_point, regularize, RhpSolver, SolveOptions, WPair};

/// Ellipse semi-minor axis (in units of `S_inf`) of the modified contour
/// used for solvability diagnostics.
pub const REGULAR_SEMI_MINOR: f64 = 0.5;

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseConfig {
    /// right-normalized data for `x >= a_split`, reflected data below
    pub a_split: f64,
    /// half-width of the window on which both branches are compared
    pub overlap: f64,
    pub overlap_points: usize,
    pub overlap_tol: f64,
    pub solve: SolveOptions,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig {
            a_split: 0.0,
            overlap: 1.0,
            overlap_points: 5,
            overlap_tol: 1e-5,
            solve: SolveOptions::default(),
        }
    }
}

/// Both normalizations of the jump problem at one time.
#[derive(Clone, Debug)]
pub struct InverseProblem {
    pub right: RhpSolver,
    /// reflected potential's problem, run at `-t`
    pub left: Option<RhpSolver>,
    pub t: f64,
    /// regularized right/left problems on the modified contour; when set,
    /// `sigma_min` is measured on these instead
    pub regular: Option<Box<InverseProblem>>,
    semi_minor: f64,
}

impl InverseProblem {
    pub fn new(sd: &ScatteringData, t: f64) -> Result<InverseProblem> {
        let jf = evolve_jump(&factorize_jump(&assemble_jump(sd))?, t);
        let right = RhpSolver::new(jf)?;
        let left = match &sd.left {
            Some(l) => {
                let jl = evolve_jump(&factorize_jump(&assemble_jump(l))?, -t);
                // same contour, so the projectors carry over
                Some(if jl.graph == right.jf.graph {
                    right.with_jump(jl)?
                } else {
                    RhpSolver::new(jl)?
                })
            }
            None => None,
        };
        Ok(InverseProblem {
            right,
            left,
            t,
            regular: None,
            semi_minor: 0.0,
        })
    }

    /// Same data after regularization, solved on the modified contour
    /// (`semi_minor` in units of `S_inf`).
    pub fn modified(sd: &ScatteringData, t: f64, semi_minor: f64) -> Result<InverseProblem> {
        let on_gm = |d: &ScatteringData, tt: f64| -> Result<JumpField> {
            let jf = evolve_jump(&factorize_jump(&assemble_jump(d))?, tt);
            regularize(&jf, &build_regularizer(&jf)?, semi_minor)
        };
        let right = RhpSolver::new(on_gm(sd, t)?)?;
        let left = match &sd.left {
            Some(l) => {
                let jl = on_gm(l, -t)?;
                Some(if jl.graph == right.jf.graph {
                    right.with_jump(jl)?
                } else {
                    RhpSolver::new(jl)?
                })
            }
            None => None,
        };
        Ok(InverseProblem {
            right,
            left,
            t,
            regular: None,
            semi_minor,
        })
    }

    /// Same contours and projectors, data moved to another time.
    pub fn at_time(&self, sd: &ScatteringData, t: f64) -> Result<InverseProblem> {
        let jf = evolve_jump(&factorize_jump(&assemble_jump(sd))?, t);
        let jf = if self.semi_minor > 0.0 {
            regularize(&jf, &build_regularizer(&jf)?, self.semi_minor)?
        } else {
            jf
        };
        let right = self.right.with_jump(jf)?;
        let left = match (&sd.left, &self.left) {
            (Some(l), Some(ls)) => {
                let jl = evolve_jump(&factorize_jump(&assemble_jump(l))?, -t);
                let jl = if self.semi_minor > 0.0 {
                    regularize(&jl, &build_regularizer(&jl)?, self.semi_minor)?
                } else {
                    jl
                };
                Some(ls.with_jump(jl)?)
            }
            _ => None,
        };
        let regular = match &self.regular {
            Some(r) => Some(Box::new(r.at_time(sd, t)?)),
            None => None,
        };
        Ok(InverseProblem {
            right,
            left,
            t,
            regular,
            semi_minor: self.semi_minor,
        })
    }

    /// Attaches the regularized problem used for `sigma_min`.
    pub fn with_regular(mut self, sd: &ScatteringData, semi_minor: f64) -> Result<InverseProblem> {
        self.regular = Some(Box::new(InverseProblem::modified(sd, self.t, semi_minor)?));
        Ok(self)
    }

    fn point(&self, x: f64, opts: &SolveOptions, from_left: bool) -> Result<PointValue> {
        let (solver, xs) = if from_left {
            (
                self.left
                    .as_ref()
                    .ok_or_else(|| Error::Shape("no reflected data for x below the split".into()))?,
                -x,
            )
        } else {
            (&self.right, x)
        };
        let plain = SolveOptions {
            sigma: opts.sigma && self.regular.is_none(),
            ..*opts
        };
        let (sol, w) = solver.solve(xs, &plain)?;
        let q = reconstruct_point(&sol, &w, &solver.jf.graph);
        let sigma_min = match (&self.regular, opts.sigma) {
            (Some(r), true) => Some(r.point(x, opts, from_left)?.sigma_min.unwrap_or(0.0)),
            _ => sol.sigma_min,
        };
        Ok(PointValue {
            x,
            q: if from_left { q.conj() } else { q },
            residual: sol.residual,
            sigma_min,
        })
    }

    /// `q(x)` from the right problem (valid for `x >= 0` at any size).
    pub fn q_right(&self, x: f64, opts: &SolveOptions) -> Result<PointValue> {
        self.point(x, opts, false)
    }

    /// `q(x) = conj(q'(-x))` from the reflected problem.
    pub fn q_left(&self, x: f64, opts: &SolveOptions) -> Result<PointValue> {
        self.point(x, opts, true)
    }

    pub fn q_at(&self, x: f64, cfg: &InverseConfig) -> Result<PointValue> {
        if x >= cfg.a_split || self.left.is_none() {
            self.q_right(x, &cfg.solve)
        } else {
            self.q_left(x, &cfg.solve)
        }
    }

    /// Largest `|q_right - q_left|` on the overlap window.
    pub fn overlap_mismatch(&self, cfg: &InverseConfig) -> Result<f64> {
        if self.left.is_none() {
            return Ok(0.0);
        }
        let m = cfg.overlap_points.max(2);
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let x = cfg.a_split - cfg.overlap + 2.0 * cfg.overlap * k as f64 / (m - 1) as f64;
            let opts = SolveOptions {
                sigma: false,
                ..cfg.solve
            };
            let a = self.q_right(x, &opts)?.q;
            let b = self.q_left(x, &opts)?.q;
            worst = worst.max((a - b).norm());
        }
        Ok(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValue {
    pub x: f64,
    pub q: C64,
    pub residual: f64,
    pub sigma_min: Option<f64>,
}

/// Inverse map on the grid `x_j = -half_width + j h`.
#[derive(Clone, Debug)]
pub struct InverseResult {
    pub potential: Potential,
    pub points: Vec<PointValue>,
    pub overlap: f64,
}

pub fn inverse_map(ip: &InverseProblem, half_width: f64, h: f64, cfg: &InverseConfig) -> Result<InverseResult> {
    let overlap = ip.overlap_mismatch(cfg)?;
    if overlap > cfg.overlap_tol {
        return Err(Error::Overlap(overlap));
    }
    let grid = Potential::zero(half_width, h);
    let points = grid
        .grid()
        .into_iter()
        .map(|x| ip.q_at(x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let potential = Potential {
        q: points.iter().map(|p| p.q).collect(),
        ..grid
    };
    Ok(InverseResult {
        potential,
        points,
        overlap,
    })
}

/// Both rows of the density, `(nu_row1, nu_row2)`, each as `(nu1, nu2)`.
pub type MatrixDensity = [(Vec<C64>, Vec<C64>); 2];

/// Solves `(I - C_W) nu = e_1` and `e_2`.
pub fn solve_matrix(solver: &RhpSolver, w: &WPair) -> Result<MatrixDensity> {
    let op = solver.operator(w)?;
    let n = solver.proj.len();
    let s1 = CMat::identity(n, n) - matmul(&op.a, &op.b);
    let s2 = CMat::identity(n, n) - matmul(&op.b, &op.a);
    let a1 = Lu::new(s1, false).solve(&vec![ONE; n])?;
    let b1 = matvec(&op.b, &a1);
    let b2 = Lu::new(s2, false).solve(&vec![ONE; n])?;
    let a2 = matvec(&op.a, &b2);
    Ok([(a1, b1), (a2, b2)])
}

/// `M(z) = I + C(nu (W+ + W-))(z)` off the contour.
pub fn eval_m(solver: &RhpSolver, w: &WPair, nu: &MatrixDensity, z: C64) -> Result<Mat2> {
    let g = &solver.jf.graph;
    let mut m = [[ONE, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), ONE]];
    for (row, (n1, n2)) in nu.iter().enumerate() {
        // (nu W)_{.1} = nu2 W21, (nu W)_{.2} = nu1 W12
        let d1: Vec<C64> = (0..n1.len()).map(|k| n2[k] * (w.wp[k][1][0] + w.wm[k][1][0])).collect();
        let d2: Vec<C64> = (0..n1.len()).map(|k| n1[k] * (w.wp[k][0][1] + w.wm[k][0][1])).collect();
        m[row][0] += cauchy_offcontour(g, &d1, z)?;
        m[row][1] += cauchy_offcontour(g, &d2, z)?;
    }
    Ok(m)
}

/// Limit formula `q = 2i lim z M12(z)` on the zeta contour, extrapolated
/// from `|z| = r, 2r, 4r` along a ray between the axes.
///
/// No odd powers of `1/z` appear, so each doubling gains a factor 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitValue {
    pub q: C64,
    /// raw values `2i z M12` on the ladder
    pub ladder: [C64; 3],
}

pub fn reconstruct_limit(zsolver: &RhpSolver, x: f64, r0: f64) -> Result<LimitValue> {
    if zsolver.jf.plane != Plane::Zeta {
        return Err(Error::Shape("limit formula runs on the zeta contour".into()));
    }
    let (sol, w) = zsolver.solve(x, &SolveOptions::default())?;
    let g = &zsolver.jf.graph;
    let dens: Vec<C64> = (0..sol.nu1.len())
        .map(|k| sol.nu1[k] * (w.wp[k][0][1] + w.wm[k][0][1]))
        .collect();
    let dir = C64::from_polar(1.0, core::f64::consts::PI / 8.0);
    let mut ladder = [C64::new(0.0, 0.0); 3];
    for (k, s) in [1.0, 2.0, 4.0].iter().enumerate() {
        let z = dir * r0 * *s;
        ladder[k] = 2.0 * I * z * cauchy_offcontour(g, &dens, z)?;
    }
    let (d1, d2) = ((ladder[1] - ladder[0]).norm(), (ladder[2] - ladder[1]).norm());
    if !(d1.is_finite() && d2.is_finite()) || d2 > d1 + 1e-12 {
        return Err(Error::Extrapolation);
    }
    // 2i z M12 is even in z: eliminate the 1/z^2 and 1/z^4 terms
    let q = (64.0 * ladder[2] - 20.0 * ladder[1] + ladder[0]) / 45.0;
    Ok(LimitValue { q, ladder })
}

/// `max |dM/dx - (-i zeta^2 ad(sigma) + zeta Q + P) M|` at `(x, zeta)`
/// with a centred difference of step `h`; `q` is the potential used in
/// the coefficient (normally the reconstructed one).
pub fn lax_residual(zsolver: &RhpSolver, x: f64, zeta: C64, h: f64, q: C64) -> Result<f64> {
    let m_at = |xx: f64| -> Result<Mat2> {
        let w = zsolver.split(xx)?;
        let nu = solve_matrix(zsolver, &w)?;
        eval_m(zsolver, &w, &nu, zeta)
    };
    let (mp, m0, mm) = (m_at(x + h)?, m_at(x)?, m_at(x - h)?);
    let z2 = zeta * zeta;
    let p1 = 0.5 * I * q.norm_sqr();
    // ad(sigma) scales (1,2) by 2 and (2,1) by -2
    let coef = [[p1, zeta * q], [-zeta * q.conj(), -p1]];
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let d = (mp[r][c] - mm[r][c]) / (2.0 * h);
            let ad = match (r, c) {
                (0, 1) => 2.0 * m0[0][1],
                (1, 0) => -2.0 * m0[1][0],
                _ => C64::new(0.0, 0.0),
            };
            let rhs = -I * z2 * ad + coef[r][0] * m0[0][c] + coef[r][1] * m0[1][c];
            worst = worst.max((d - rhs).norm());
        }
    }
    Ok(worst)
}

/// Least-squares exponent `p` in `|q(x)| ~ c (1 + x^2)^{-p}`.
pub fn fit_decay_order(xs: &[f64], qs: &[C64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(qs)
        .filter(|(_, q)| q.norm() > 0.0)
        .map(|(x, q)| ((1.0 + x * x).ln(), q.norm().ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
    -num / den
}

/// Zeta-plane solver for the same potential data (diagnostics).
pub fn zeta_solver(jf: JumpField) -> Result<RhpSolver> {
    if jf.plane != Plane::Zeta {
        return Err(Error::Shape("expected a zeta jump".into()));
    }
    RhpSolver::new(jf)
}

/// Relative discrete L2 distance on a common grid.
pub fn relative_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{build_scattering_data, build_zeta_jump, DirectConfig};
    use crate::contour::ContourConfig;

    fn sech(amp: f64) -> Potential {
        Potential::sech(amp, 24.0, 0.01)
    }

    #[test]
    fn zero_data_reconstructs_zero() {
        let p = Potential::zero(10.0, 0.05);
        let sd = build_scattering_data(&p, &DirectConfig::default()).unwrap();
        let ip = InverseProblem::new(&sd, 0.0).unwrap();
        let out = inverse_map(&ip, 3.0, 1.0, &InverseConfig::default()).unwrap();
        assert!(out.potential.q.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn limit_formula_agrees_with_integral() {
        let p = sech(0.3);
        let sd = build_scattering_data(
            &p,
            &DirectConfig {
                left: false,
                ..DirectConfig::default()
            },
        )
        .unwrap();
        let ip = InverseProblem::new(&sd, 0.0).unwrap();
        let zs = zeta_solver(build_zeta_jump(&p, sd.r, sd.x0_index, &ContourConfig::default()).unwrap()).unwrap();
        for x in [0.0, 1.0] {
            let a = ip.q_right(x, &SolveOptions::default()).unwrap().q;
            let b = reconstruct_limit(&zs, x, 10.0 * sd.r).unwrap();
            assert!((a - b.q).norm() < 1e-6, "x {x}: {a} vs {}", b.q);
            // first order in 1/lambda = 1/z^2
            let e: Vec<f64> = b.ladder.iter().map(|v| (v - a).norm()).collect();
            for k in 0..2 {
                let r = e[k] / e[k + 1];
                assert!((3.0..5.5).contains(&r), "{e:?}");
            }
        }
    }

    #[test]
    fn lax_equation_in_x() {
        let p = sech(0.3);
        let sd = build_scattering_data(
            &p,
            &DirectConfig {
                left: false,
                ..DirectConfig::default()
            },
        )
        .unwrap();
        let zs = zeta_solver(build_zeta_jump(&p, sd.r, sd.x0_index, &ContourConfig::default()).unwrap()).unwrap();
        let ip = InverseProblem::new(&sd, 0.0).unwrap();
        let x = 0.5;
        let q = ip.q_right(x, &SolveOptions::default()).unwrap().q;
        let zeta = C64::new(1.7, 0.9);
        let r1 = lax_residual(&zs, x, zeta, 2e-3, q).unwrap();
        let r2 = lax_residual(&zs, x, zeta, 1e-3, q).unwrap();
        assert!(r2 < 1e-4, "{r2:e}");
        // centred differences: about a factor 4 per halving
        assert!(r1 / r2 > 3.0, "{r1:e} {r2:e}");
    }

    /// Max deviation from `-(1/pi) int rho(l) e^{-2ilx} dl` over a few x.
    fn born_gap(amp: f64) -> f64 {
        let p = sech(amp);
        let sd = build_scattering_data(&p, &DirectConfig::default()).unwrap();
        let ip = InverseProblem::new(&sd, 0.0).unwrap();
        // trapezoid over the real line; rho decays like exp(-pi |lambda|)
        let (l, dl) = (12.0, 0.01);
        let m = (2.0 * l / dl) as usize;
        let rho: Vec<(f64, C64)> = (0..=m)
            .map(|k| {
                let lam = -l + k as f64 * dl;
                (lam, crate::jost::to_lambda(&p, C64::new(lam, 0.0), None).unwrap().rho)
            })
            .collect();
        let mut worst: f64 = 0.0;
        for x in [-1.0, 0.0, 0.7, 2.0] {
            let born: C64 = rho.iter().map(|(lam, r)| r * C64::from_polar(dl, -2.0 * lam * x)).sum::<C64>()
                / -core::f64::consts::PI;
            let got = ip.q_at(x, &InverseConfig::default()).unwrap().q;
            worst = worst.max((got - born).norm());
        }
        worst
    }

    #[test]
    fn small_data_matches_born_term() {
        let (g1, g2) = (born_gap(1e-3), born_gap(2e-3));
        assert!(g1 < 1e-6 * 1e-3, "{g1:e}");
        // the first correction is cubic in the amplitude
        assert!((6.0..10.0).contains(&(g2 / g1)), "{g1:e} {g2:e}");
    }

    #[test]
    fn modified_contour_gives_same_potential() {
        let p = Potential::from_family(
            crate::potential::Family::Sech {
                amp: 0.3,
                phase: vec![0.0, 0.3],
            },
            24.0,
            0.01,
        );
        // the omega tails oscillate along the rays
        let mut contour = ContourConfig::default();
        contour.n_ray *= 2;
        let sd = build_scattering_data(
            &p,
            &DirectConfig {
                contour,
                ..DirectConfig::default()
            },
        )
        .unwrap();
        let a = InverseProblem::new(&sd, 0.2).unwrap();
        let b = InverseProblem::modified(&sd, 0.2, 0.5).unwrap();
        for x in [0.0, 0.4, 1.5, 4.0, -0.6, -2.0] {
            let qa = a.q_at(x, &InverseConfig::default()).unwrap().q;
            let qb = b.q_at(x, &InverseConfig::default()).unwrap().q;
            assert!((qa - qb).norm() < 1e-7, "x {x}: {qa} vs {qb}");
        }
    }

    #[test]
    fn decay_fit_recovers_power() {
        let xs: Vec<f64> = (10..=40).map(|x| x as f64).collect();
        let qs: Vec<C64> = xs.iter().map(|x| C64::new(3.0 * (1.0 + x * x).powf(-2.5), 0.0)).collect();
        assert!((fit_decay_order(&xs, &qs) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn relative_l2_basics() {
        let a = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        assert_eq!(relative_l2(&a, &a), 0.0);
        let b = [C64::new(2.0, 0.0), C64::new(0.0, 2.0)];
        assert!((relative_l2(&a, &b) - 0.5).abs() < 1e-15);
    }
}

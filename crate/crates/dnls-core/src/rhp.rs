//! Beals–Coifman solve of the jump problem `m+ = m- J_x` on a contour
//! graph, for both the lambda contour and its zeta preimage.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::augment::{JumpField, Plane};
use crate::cauchy::{arc_weights, boundary_projectors, build_bc_operator, contour_integral, BcOperator, Projectors};
use crate::cheb::ChebBasis;
use crate::contour::{build_modified_from, ContourGraph, NodeTrace, Piece};
use crate::error::{Error, Result};
use crate::jost::Mat2;
use crate::linalg::{m2, matmul, matvec, sigma_min_inverse_iteration, CMat, Lu};

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Threshold on `sigma_min(I - C_W)` below which a solve is rejected.
pub const NEAR_SINGULAR: f64 = 1e-8;

/// Pole order of the regularizer entries. With rays truncated at a finite
/// cutoff the factors must be at the truncation level there, which the
/// minimal order leaves at `O(cutoff^-3)`.
pub const REG_ORDER: i32 = 12;

/// Relative tolerance on the top Ritz value in the `sigma_min` estimate.
const SIGMA_RTOL: f64 = 1e-7;

/// `(e^{-2i phi x}, e^{2i phi x})` for the (1,2) and (2,1) entries.
pub fn x_phases(plane: Plane, z: C64, x: f64) -> (C64, C64) {
    let th = 2.0 * I * plane.phi(z) * x;
    ((-th).exp(), th.exp())
}

/// Strictly triangular weights `W+ = J+ - I`, `W- = I - J-` at one `x`.
#[derive(Clone, Debug)]
pub struct WPair {
    pub x: f64,
    pub wp: Vec<Mat2>,
    pub wm: Vec<Mat2>,
}

impl WPair {
    /// `(I - W-)^{-1} (I + W+)` at node `k`.
    pub fn jump(&self, k: usize) -> Mat2 {
        m2::mul(
            &m2::inv(&m2::sub(&m2::IDENTITY, &self.wm[k])),
            &m2::add(&m2::IDENTITY, &self.wp[k]),
        )
    }
}

pub fn split_w(jf: &JumpField, x: f64) -> Result<WPair> {
    if !jf.is_factorized() {
        return Err(Error::Shape("jump field is not factorized".into()));
    }
    let mut wp = Vec::with_capacity(jf.z.len());
    let mut wm = Vec::with_capacity(jf.z.len());
    for (k, &z) in jf.z.iter().enumerate() {
        let (e12, e21) = x_phases(jf.plane, z, x);
        wp.push(m2::conj_phase(&m2::sub(&jf.jp[k], &m2::IDENTITY), e12, e21));
        wm.push(m2::conj_phase(&m2::sub(&m2::IDENTITY, &jf.jm[k]), e12, e21));
    }
    Ok(WPair { x, wp, wm })
}

/// Row solution `nu = (nu1, nu2)` of `(I - C_W) nu = (1, 0)`.
#[derive(Clone, Debug)]
pub struct BcSolution {
    pub x: f64,
    pub t: f64,
    pub nu1: Vec<C64>,
    pub nu2: Vec<C64>,
    pub residual: f64,
    pub sigma_min: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// estimate `sigma_min(I - C_W)` and reject near-singular systems
    pub sigma: bool,
    pub sigma_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            sigma: false,
            sigma_iters: 300,
        }
    }
}

/// A jump field together with its (x-independent) projectors.
#[derive(Clone, Debug)]
pub struct RhpSolver {
    pub jf: JumpField,
    pub proj: Projectors,
    weights: Vec<f64>,
}

impl RhpSolver {
    pub fn new(jf: JumpField) -> Result<RhpSolver> {
        let proj = boundary_projectors(&jf.graph)?;
        let weights = arc_weights(&jf.graph);
        Ok(RhpSolver { jf, proj, weights })
    }

    /// Reuses projectors of an identical graph with a new jump.
    pub fn with_jump(&self, jf: JumpField) -> Result<RhpSolver> {
        if jf.graph != self.jf.graph {
            return Err(Error::Shape("jump field lives on a different contour".into()));
        }
        Ok(RhpSolver {
            jf,
            proj: self.proj.clone(),
            weights: self.weights.clone(),
        })
    }

    pub fn split(&self, x: f64) -> Result<WPair> {
        split_w(&self.jf, x)
    }

    pub fn operator(&self, w: &WPair) -> Result<BcOperator> {
        build_bc_operator(&w.wp, &w.wm, &self.proj)
    }

    pub fn solve(&self, x: f64, opts: &SolveOptions) -> Result<(BcSolution, WPair)> {
        let w = self.split(x)?;
        let sol = self.solve_w(&w, opts)?;
        Ok((sol, w))
    }

    pub fn solve_w(&self, w: &WPair, opts: &SolveOptions) -> Result<BcSolution> {
        let op = self.operator(w)?;
        let n = self.proj.len();
        let s = CMat::identity(n, n) - matmul(&op.a, &op.b);
        let lu = Lu::new(s, opts.sigma);
        let nu1 = lu.solve(&vec![ONE; n])?;
        let nu2 = matvec(&op.b, &nu1);
        if nu1.iter().chain(&nu2).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NearSingular(0.0));
        }
        let residual = bc_residual(&op, &nu1, &nu2);
        let sigma_min = if opts.sigma {
            let sm = self.sigma_min_with(&op, &lu, opts.sigma_iters)?;
            if sm < NEAR_SINGULAR {
                return Err(Error::NearSingular(sm));
            }
            Some(sm)
        } else {
            None
        };
        Ok(BcSolution {
            x: w.x,
            t: self.jf.t,
            nu1,
            nu2,
            residual,
            sigma_min,
        })
    }

    /// `sigma_min(I - C_W)` in the quadrature-weighted L2 norm.
    pub fn null_space_diag(&self, x: f64, iters: usize) -> Result<f64> {
        let w = self.split(x)?;
        let op = self.operator(&w)?;
        let n = self.proj.len();
        let lu = Lu::new(CMat::identity(n, n) - matmul(&op.a, &op.b), true);
        self.sigma_min_with(&op, &lu, iters)
    }

    fn sigma_min_with(&self, op: &BcOperator, lu: &Lu, iters: usize) -> Result<f64> {
        let n = self.proj.len();
        let d: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let split = |v: &[C64]| -> (Vec<C64>, Vec<C64>) {
            (
                v[..n].iter().zip(&d).map(|(a, s)| a / s).collect(),
                v[n..].iter().zip(&d).map(|(a, s)| a / s).collect(),
            )
        };
        let join = |a: Vec<C64>, b: Vec<C64>| -> Vec<C64> {
            a.iter().zip(&d).map(|(v, s)| v * s).chain(b.iter().zip(&d).map(|(v, s)| v * s)).collect()
        };
        let a_adj = op.a.adjoint();
        let b_adj = op.b.adjoint();
        let solve = |v: &[C64]| -> Result<Vec<C64>> {
            let (f, g) = split(v);
            let ag = matvec(&op.a, &g);
            let rhs: Vec<C64> = f.iter().zip(&ag).map(|(a, b)| a + b).collect();
            let n1 = lu.solve(&rhs)?;
            let bn = matvec(&op.b, &n1);
            let n2: Vec<C64> = g.iter().zip(&bn).map(|(a, b)| a + b).collect();
            Ok(join(n1, n2))
        };
        // D^{-1/2} and D^{1/2} trade places under the adjoint
        let split_adj = |v: &[C64]| -> (Vec<C64>, Vec<C64>) {
            (
                v[..n].iter().zip(&d).map(|(a, s)| a * s).collect(),
                v[n..].iter().zip(&d).map(|(a, s)| a * s).collect(),
            )
        };
        let solve_adj = |v: &[C64]| -> Result<Vec<C64>> {
            let (f, g) = split_adj(v);
            let bg = matvec(&b_adj, &g);
            let rhs: Vec<C64> = f.iter().zip(&bg).map(|(a, b)| a + b).collect();
            let u = lu.solve_adjoint(&rhs)?;
            let au = matvec(&a_adj, &u);
            let v2: Vec<C64> = g.iter().zip(&au).map(|(a, b)| a + b).collect();
            Ok(u.iter()
                .zip(&d)
                .map(|(v, s)| v / s)
                .chain(v2.iter().zip(&d).map(|(v, s)| v / s))
                .collect())
        };
        sigma_min_inverse_iteration(2 * n, solve, solve_adj, iters, SIGMA_RTOL)
    }
}

fn bc_residual(op: &BcOperator, nu1: &[C64], nu2: &[C64]) -> f64 {
    let a2 = matvec(&op.a, nu2);
    let b1 = matvec(&op.b, nu1);
    let r1 = nu1.iter().zip(&a2).map(|(v, a)| (v - a - ONE).norm());
    let r2 = nu2.iter().zip(&b1).map(|(v, b)| (v - b).norm());
    r1.chain(r2).fold(0.0, f64::max)
}

/// `q(x) = (-1/pi int nu (W+ + W-))_{12}` over the contour.
pub fn reconstruct_point(sol: &BcSolution, w: &WPair, g: &ContourGraph) -> C64 {
    let f: Vec<C64> = sol
        .nu1
        .iter()
        .enumerate()
        .map(|(k, v)| v * (w.wp[k][0][1] + w.wm[k][0][1]))
        .collect();
    -contour_integral(g, &f) / core::f64::consts::PI
}

/// Rational regularizer entry `p(z) / (z - z0)^n` with cubic `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalEntry {
    /// position: `true` for (1,2), `false` for (2,1)
    pub upper: bool,
    pub z0: C64,
    pub n: i32,
    /// monomial coefficients of `p`, lowest first
    pub coeffs: [C64; 4],
}

impl RationalEntry {
    pub fn eval(&self, z: C64) -> C64 {
        let c = &self.coeffs;
        let p = c[0] + z * (c[1] + z * (c[2] + z * c[3]));
        p / (z - self.z0).powi(self.n)
    }

    pub fn deriv(&self, z: C64) -> C64 {
        let c = &self.coeffs;
        let p = c[0] + z * (c[1] + z * (c[2] + z * c[3]));
        let dp = c[1] + z * (2.0 * c[2] + z * 3.0 * c[3]);
        let d = z - self.z0;
        dp / d.powi(self.n) - (self.n as f64) * p / d.powi(self.n + 1)
    }

    /// `omega = I + entry`.
    pub fn omega(&self, z: C64) -> Mat2 {
        let v = self.eval(z);
        if self.upper {
            m2::upper(v)
        } else {
            m2::lower(v)
        }
    }

    /// Hermite fit of value and derivative at `s` and `-s`.
    pub fn fit(upper: bool, z0: C64, n: i32, s: f64, vals: [C64; 2], ders: [C64; 2]) -> Result<RationalEntry> {
        let mut m = Matrix4::<C64>::zeros();
        let mut rhs = Vector4::<C64>::zeros();
        for (row, (zr, (v, d))) in [s, -s].iter().zip(vals.iter().zip(&ders)).enumerate() {
            let z = C64::new(*zr, 0.0);
            let e = z - z0;
            for k in 0..4 {
                m[(2 * row, k)] = z.powi(k as i32);
                m[(2 * row + 1, k)] = if k == 0 { ZERO } else { (k as f64) * z.powi(k as i32 - 1) };
            }
            rhs[2 * row] = v * e.powi(n);
            rhs[2 * row + 1] = d * e.powi(n) + (n as f64) * v * e.powi(n - 1);
        }
        let c = m.lu().solve(&rhs).ok_or(Error::Hermite)?;
        if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Hermite);
        }
        Ok(RationalEntry {
            upper,
            z0,
            n,
            coeffs: [c[0], c[1], c[2], c[3]],
        })
    }
}

/// One rational factor per region of the lambda contour.
#[derive(Clone, Debug, PartialEq)]
pub struct Regularizer {
    pub s_inf: f64,
    pub t: f64,
    pub omega: [RationalEntry; 4],
}

impl Regularizer {
    pub fn omega_at(&self, region: usize, z: C64) -> Mat2 {
        self.omega[region].omega(z)
    }
}

/// Node traces (value, derivative) of one entry of a factor field.
fn trace_at(jf: &JumpField, field: &[Mat2], r: usize, c: usize, node: usize, arc: usize) -> [C64; 2] {
    let tr = NodeTrace::from_samples(&jf.graph, node, &jf.entry_by_arc(field, r, c), 2);
    let e = tr.entries.iter().find(|e| e.0 == arc).expect("arc incident to node");
    [e.1[0], e.1[1]]
}

/// Fits the four rational factors to the factorized lambda jump so that
/// the regularized factors are `I + o(lambda -+ S_inf)` at both nodes.
pub fn build_regularizer(jf: &JumpField) -> Result<Regularizer> {
    if jf.plane != Plane::Lambda || !jf.is_factorized() {
        return Err(Error::Shape("regularizer needs a factorized lambda jump".into()));
    }
    let g = &jf.graph;
    let s = g.arcs[0].start().re;
    let (np, nm) = (
        g.node_at(C64::new(s, 0.0)).ok_or(Error::Hermite)?,
        g.node_at(C64::new(-s, 0.0)).ok_or(Error::Hermite)?,
    );
    // (field, entry, arc at +S, arc at -S)
    let fit = |upper: bool, z0: C64, field: &[Mat2], arcs: (usize, usize)| -> Result<RationalEntry> {
        let (r, c) = if upper { (0, 1) } else { (1, 0) };
        let a = trace_at(jf, field, r, c, np, arcs.0);
        let b = trace_at(jf, field, r, c, nm, arcs.1);
        RationalEntry::fit(upper, z0, REG_ORDER, s, [a[0], b[0]], [a[1], b[1]])
    };
    let below = C64::new(0.0, -2.0 * s);
    let above = C64::new(0.0, 2.0 * s);
    Ok(Regularizer {
        s_inf: s,
        t: jf.t,
        omega: [
            fit(false, below, &jf.jp, (0, 1))?,
            fit(true, above, &jf.jm, (0, 1))?,
            fit(false, below, &jf.jm, (2, 2))?,
            fit(true, above, &jf.jp, (2, 2))?,
        ],
    })
}

/// The regularized factors on the lambda contour itself.
pub fn regularized_factors(jf: &JumpField, reg: &Regularizer) -> Result<(Vec<Mat2>, Vec<Mat2>)> {
    let g = &jf.graph;
    let off = g.offsets();
    let mut jp = Vec::with_capacity(jf.z.len());
    let mut jm = Vec::with_capacity(jf.z.len());
    for (ai, arc) in g.arcs.iter().enumerate() {
        if arc.plus > 3 || arc.minus > 3 {
            return Err(Error::Contour(format!("arc {ai} is not on the lambda contour")));
        }
        for k in off[ai]..off[ai] + arc.n {
            let z = jf.z[k];
            let wp_inv = m2::inv(&reg.omega_at(arc.plus, z));
            let wm = reg.omega_at(arc.minus, z);
            match arc.piece {
                Piece::Outer | Piece::Inner => {
                    jp.push(m2::mul(&jf.jp[k], &wp_inv));
                    jm.push(m2::mul(&jf.jm[k], &m2::inv(&wm)));
                }
                Piece::CircleUpper => {
                    jp.push(m2::mul(&m2::mul(&wm, &jf.j[k]), &wp_inv));
                    jm.push(m2::IDENTITY);
                }
                Piece::CircleLower => {
                    let full = m2::mul(&m2::mul(&wm, &jf.j[k]), &wp_inv);
                    jp.push(m2::IDENTITY);
                    jm.push(m2::inv(&full));
                }
                Piece::Ellipse => return Err(Error::Contour("ellipse on the lambda contour".into())),
            }
        }
    }
    Ok((jp, jm))
}

/// Regularized jump on the modified contour: the inner segment runs the
/// other way and the ellipse carries identity jumps.
pub fn regularize(jf: &JumpField, reg: &Regularizer, semi_minor: f64) -> Result<JumpField> {
    let (jp, jm) = regularized_factors(jf, reg)?;
    let g = &jf.graph;
    let s = reg.s_inf;
    let gm = build_modified_from(g, (s, semi_minor * s))?;
    let off = g.offsets();
    let mut z = Vec::with_capacity(gm.n_total());
    let (mut j, mut p, mut m) = (Vec::new(), Vec::new(), Vec::new());
    for (ai, arc) in gm.arcs.iter().enumerate() {
        let nodes = arc.nodes();
        if ai < g.arcs.len() {
            let n = arc.n;
            for (k, &zk) in nodes.iter().enumerate() {
                // the reversed segment visits the old nodes backwards
                let src = if ai == 2 { off[2] + n - 1 - k } else { off[ai] + k };
                if (jf.z[src] - zk).norm() > 1e-12 * (1.0 + s) {
                    return Err(Error::Contour("segment nodes are not symmetric".into()));
                }
                let (a, b) = if ai == 2 { (jm[src], jp[src]) } else { (jp[src], jm[src]) };
                z.push(zk);
                j.push(m2::mul(&m2::inv(&b), &a));
                p.push(a);
                m.push(b);
            }
        } else {
            for zk in nodes {
                z.push(zk);
                j.push(m2::IDENTITY);
                p.push(m2::IDENTITY);
                m.push(m2::IDENTITY);
            }
        }
    }
    Ok(JumpField {
        graph: gm,
        plane: Plane::Lambda,
        t: jf.t,
        z,
        j,
        jp: p,
        jm: m,
    })
}

/// Interpolates a lambda-contour density at `lambda` on arcs of the given
/// piece (the arc is located by inverting its parameterization).
fn interp_on(g: &ContourGraph, bases: &[ChebBasis], piece: Piece, f: &[C64], lambda: C64) -> Option<C64> {
    let off = g.offsets();
    let mut best: Option<(f64, usize, C64)> = None;
    for (ai, arc) in g.arcs.iter().enumerate() {
        if arc.piece != piece {
            continue;
        }
        let tau = arc.mobius()?.inverse(lambda);
        let miss = tau.im.abs() + (tau.re.abs() - 1.0).max(0.0);
        if best.map_or(true, |b| miss < b.0) {
            best = Some((miss, ai, tau));
        }
    }
    let (miss, ai, tau) = best?;
    if miss > 1e-8 {
        return None;
    }
    let arc = &g.arcs[ai];
    let b = bases.iter().find(|b| b.n == arc.n)?;
    let t = C64::new(tau.re.clamp(-1.0, 1.0), 0.0);
    Some(b.interp(&f[off[ai]..off[ai] + arc.n], t))
}

/// Largest deviation of `mu11(zeta) - nu11(zeta^2)` and
/// `mu12(zeta) - zeta nu12(zeta^2)` over the zeta nodes.
pub fn zeta_crosscheck(nu: &BcSolution, lambda_graph: &ContourGraph, mu: &BcSolution, zjf: &JumpField) -> Result<f64> {
    if zjf.plane != Plane::Zeta {
        return Err(Error::Shape("second solution must live on the zeta contour".into()));
    }
    let bases = lambda_graph.bases();
    let zg = &zjf.graph;
    let off = zg.offsets();
    let mut worst: f64 = 0.0;
    for (ai, arc) in zg.arcs.iter().enumerate() {
        for k in off[ai]..off[ai] + arc.n {
            let zeta = zjf.z[k];
            let l = zeta * zeta;
            let n1 = interp_on(lambda_graph, &bases, arc.piece, &nu.nu1, l)
                .ok_or_else(|| Error::Contour(format!("zeta node {zeta} has no lambda image")))?;
            let n2 = interp_on(lambda_graph, &bases, arc.piece, &nu.nu2, l).unwrap();
            worst = worst.max((mu.nu1[k] - n1).norm()).max((mu.nu2[k] - zeta * n2).norm());
        }
    }
    Ok(worst)
}

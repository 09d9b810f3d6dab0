//! Augmented scattering data and jump matrices.
//!
//! The lambda contour carries four jump formulas: the outer real line, the
//! inner segment (data of the cutoff potential), and the two semicircles
//! built from Jost values at the cutoff point. The zeta contour carries the
//! matching formulas before the `lambda = zeta^2` reduction.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::contour::{build_lambda_contour, build_zeta_contour, ContourConfig, ContourGraph, NodeTrace, Piece};
use crate::error::{Error, Result};
use crate::jost::{
    alpha, alpha_beta_real, alpha_breve, choose_cutoff, choose_radius, count_zeros_upper_breve, minus_column,
    n12_minus, n21_minus, plus_column, reflection, transition_coeffs, transition_coeffs_from, Form, Mat2,
    RadiusConfig, SINGULARITY_TOL,
};
use crate::linalg::m2;
use crate::potential::Potential;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Spectral variable of a jump field. Phases are written in terms of
/// `phi = lambda` or `phi = zeta^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    Lambda,
    Zeta,
}

impl Plane {
    pub fn phi(self, z: C64) -> C64 {
        match self {
            Plane::Lambda => z,
            Plane::Zeta => z * z,
        }
    }
}

/// Settings for the direct map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectConfig {
    pub contour: ContourConfig,
    pub radius: RadiusConfig,
    /// fixed zeta radius instead of `choose_radius`
    pub r: Option<f64>,
    /// fixed cutoff point instead of `choose_cutoff`
    pub x0: Option<f64>,
    /// also build the data of the reflected potential (needed for `x < 0`)
    pub left: bool,
    /// largest admissible `|q(+-X)|`
    pub trunc_tol: f64,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig {
            contour: ContourConfig::default(),
            radius: RadiusConfig::default(),
            r: None,
            x0: None,
            left: true,
            trunc_tol: 1e-10,
        }
    }
}

/// Node samples of the component functions on one arc of the lambda contour.
#[derive(Clone, Debug, PartialEq)]
pub enum ArcData {
    Outer {
        rho: Vec<C64>,
        alpha: Vec<C64>,
        alpha_breve: Vec<C64>,
    },
    Inner {
        rho0: Vec<C64>,
    },
    /// `1 / alpha_breve`, `1 / alpha_breve_0`, `n21^-(x0)`
    Upper {
        inv_ab: Vec<C64>,
        inv_ab0: Vec<C64>,
        n21: Vec<C64>,
    },
    /// `1 / alpha`, `1 / alpha_0`, `n12^-(x0)`
    Lower {
        inv_a: Vec<C64>,
        inv_a0: Vec<C64>,
        n12: Vec<C64>,
    },
}

#[derive(Clone, Debug)]
pub struct ScatteringData {
    pub r: f64,
    pub s_inf: f64,
    pub x0: f64,
    pub x0_index: usize,
    pub graph: ContourGraph,
    pub arcs: Vec<ArcData>,
    /// data of `conj(q(-x))` on the same contour
    pub left: Option<Box<ScatteringData>>,
}

fn guarded_inv(v: C64) -> Result<C64> {
    if v.norm() < SINGULARITY_TOL {
        return Err(Error::SpectralSingularity(v.norm()));
    }
    Ok(ONE / v)
}

fn arc_data(p: &Potential, piece: Piece, nodes: &[C64], i0: usize) -> Result<ArcData> {
    Ok(match piece {
        Piece::Outer => {
            let (mut rho, mut al, mut ab) = (Vec::new(), Vec::new(), Vec::new());
            for z in nodes {
                let (a, a_b, b) = alpha_beta_real(p, z.re, 0);
                rho.push(b * guarded_inv(a)?);
                al.push(a);
                ab.push(a_b);
            }
            ArcData::Outer {
                rho,
                alpha: al,
                alpha_breve: ab,
            }
        }
        Piece::Inner => {
            let mut rho0 = Vec::new();
            for z in nodes {
                let (a, _, b) = alpha_beta_real(p, z.re, i0);
                rho0.push(b * guarded_inv(a)?);
            }
            ArcData::Inner { rho0 }
        }
        Piece::CircleUpper => {
            let (mut u, mut u0, mut n21) = (Vec::new(), Vec::new(), Vec::new());
            for &z in nodes {
                u.push(guarded_inv(alpha_breve(p, z, 0))?);
                u0.push(guarded_inv(alpha_breve(p, z, i0))?);
                n21.push(n21_minus(p, z, i0));
            }
            ArcData::Upper {
                inv_ab: u,
                inv_ab0: u0,
                n21,
            }
        }
        Piece::CircleLower => {
            let (mut u, mut u0, mut n12) = (Vec::new(), Vec::new(), Vec::new());
            for &z in nodes {
                u.push(guarded_inv(alpha(p, z, 0))?);
                u0.push(guarded_inv(alpha(p, z, i0))?);
                n12.push(n12_minus(p, z, i0));
            }
            ArcData::Lower {
                inv_a: u,
                inv_a0: u0,
                n12,
            }
        }
        Piece::Ellipse => return Err(Error::Contour("ellipse arcs carry no scattering data".into())),
    })
}

/// Direct map onto the augmented lambda contour.
pub fn build_scattering_data(p: &Potential, cfg: &DirectConfig) -> Result<ScatteringData> {
    p.validate(cfg.trunc_tol)?;
    let r = match cfg.r {
        Some(r) => r,
        None => choose_radius(p, &cfg.radius)?,
    };
    let mut sd = build_with_radius(p, r, cfg.x0, cfg)?;
    if cfg.left {
        // the reflected problem picks its own cutoff
        let left = build_with_radius(&p.reflected(), r, None, cfg)?;
        sd.left = Some(Box::new(left));
    }
    Ok(sd)
}

fn build_with_radius(p: &Potential, r: f64, x0: Option<f64>, cfg: &DirectConfig) -> Result<ScatteringData> {
    let s_inf = r * r;
    let i0 = match x0 {
        Some(x) => p.index_of(x),
        None => choose_cutoff(p, r)?,
    };
    let w = count_zeros_upper_breve(p, i0, s_inf, cfg.radius.samples)?;
    if w != 0 {
        return Err(Error::CutoffZeros(w));
    }
    let graph = build_lambda_contour(s_inf, &cfg.contour);
    let arcs = graph
        .arcs
        .iter()
        .map(|a| arc_data(p, a.piece, &a.nodes(), i0))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatteringData {
        r,
        s_inf,
        x0: p.x(i0),
        x0_index: i0,
        graph,
        arcs,
        left: None,
    })
}

/// Jump samples on a contour graph, stacked arc by arc.
#[derive(Clone, Debug)]
pub struct JumpField {
    pub graph: ContourGraph,
    pub plane: Plane,
    pub t: f64,
    pub z: Vec<C64>,
    pub j: Vec<Mat2>,
    /// factors with `J = jm^{-1} jp`; empty until factorized
    pub jp: Vec<Mat2>,
    pub jm: Vec<Mat2>,
}

impl JumpField {
    pub fn is_factorized(&self) -> bool {
        self.jp.len() == self.j.len() && self.jm.len() == self.j.len()
    }

    /// Per-arc slices of one entry of `J`.
    pub fn entry_by_arc(&self, field: &[Mat2], r: usize, c: usize) -> Vec<Vec<C64>> {
        let off = self.graph.offsets();
        self.graph
            .arcs
            .iter()
            .zip(off)
            .map(|(a, o)| field[o..o + a.n].iter().map(|m| m[r][c]).collect())
            .collect()
    }

    pub fn max_det_error(&self) -> f64 {
        self.j
            .iter()
            .map(|m| (m2::det(m) - ONE).norm())
            .fold(0.0, f64::max)
    }
}

/// Jump on the real line outside the circle.
pub fn outer_jump(l: C64, rho: C64) -> Mat2 {
    [[ONE + l * rho.norm_sqr(), rho], [l * rho.conj(), ONE]]
}

/// Jump on the inner segment from the cutoff potential's `rho_0`.
pub fn inner_jump(l: C64, rho0: C64) -> Mat2 {
    [[ONE, -rho0], [-l * rho0.conj(), ONE + l * rho0.norm_sqr()]]
}

/// The lambda-plane jump at one point of a piece, evaluated directly from
/// lambda-form Jost solutions (no contour samples).
pub fn lambda_jump_at(p: &Potential, piece: Piece, l: C64, i0: usize) -> Result<Mat2> {
    let x0 = p.x(i0);
    Ok(match piece {
        Piece::Outer => {
            let (a, _, b) = alpha_beta_real(p, l.re, 0);
            outer_jump(l, b * guarded_inv(a)?)
        }
        Piece::Inner => {
            let (a, _, b) = alpha_beta_real(p, l.re, i0);
            inner_jump(l, b * guarded_inv(a)?)
        }
        Piece::CircleUpper => m2::lower(
            (-2.0 * I * x0 * l).exp() * n21_minus(p, l, i0) * guarded_inv(alpha_breve(p, l, 0))?
                * guarded_inv(alpha_breve(p, l, i0))?,
        ),
        Piece::CircleLower => m2::upper(
            -(2.0 * I * x0 * l).exp() * n12_minus(p, l, i0) * guarded_inv(alpha(p, l, 0))?
                * guarded_inv(alpha(p, l, i0))?,
        ),
        Piece::Ellipse => m2::IDENTITY,
    })
}

/// The jump matrices at `t = 0`.
pub fn assemble_jump(sd: &ScatteringData) -> JumpField {
    let g = &sd.graph;
    let mut z = Vec::with_capacity(g.n_total());
    let mut j = Vec::with_capacity(g.n_total());
    for (arc, data) in g.arcs.iter().zip(&sd.arcs) {
        let nodes = arc.nodes();
        for (k, &l) in nodes.iter().enumerate() {
            let m = match data {
                ArcData::Outer { rho, .. } => outer_jump(l, rho[k]),
                ArcData::Inner { rho0 } => inner_jump(l, rho0[k]),
                ArcData::Upper { inv_ab, inv_ab0, n21 } => {
                    m2::lower((-2.0 * I * sd.x0 * l).exp() * n21[k] * inv_ab[k] * inv_ab0[k])
                }
                ArcData::Lower { inv_a, inv_a0, n12 } => {
                    m2::upper(-(2.0 * I * sd.x0 * l).exp() * n12[k] * inv_a[k] * inv_a0[k])
                }
            };
            z.push(l);
            j.push(m);
        }
    }
    JumpField {
        graph: g.clone(),
        plane: Plane::Lambda,
        t: 0.0,
        z,
        j,
        jp: Vec::new(),
        jm: Vec::new(),
    }
}

/// Triangular factors `J = J-^{-1} J+` on the augmented contour (outer
/// pieces oriented left to right, inner pieces right to left).
pub fn factorize_jump(jf: &JumpField) -> Result<JumpField> {
    let mut out = jf.clone();
    out.jp.clear();
    out.jm.clear();
    let off = jf.graph.offsets();
    for (arc, o) in jf.graph.arcs.iter().zip(off) {
        for m in &jf.j[o..o + arc.n] {
            let (jp, jm) = match arc.piece {
                Piece::Outer => (m2::lower(m[1][0]), m2::upper(-m[0][1])),
                Piece::Inner => (m2::upper(m[0][1]), m2::lower(-m[1][0])),
                Piece::CircleUpper => (*m, m2::IDENTITY),
                Piece::CircleLower => (m2::IDENTITY, m2::inv(m)),
                Piece::Ellipse => (m2::IDENTITY, m2::IDENTITY),
            };
            out.jp.push(jp);
            out.jm.push(jm);
        }
    }
    Ok(out)
}

/// Residuals of the cyclic product condition at a node: the product of
/// `J` (outgoing arcs) and `J^{-1}` (incoming arcs) in counter-clockwise
/// order, and its first derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductResidual {
    pub order0: f64,
    pub order1: f64,
}

pub fn check_product_condition(jf: &JumpField, node_z: C64) -> Result<ProductResidual> {
    let g = &jf.graph;
    let node = g
        .node_at(node_z)
        .ok_or_else(|| Error::Contour(alloc::format!("no node at {node_z}")))?;
    let traces: Vec<Vec<NodeTrace>> = (0..2)
        .map(|r| {
            (0..2)
                .map(|c| NodeTrace::from_samples(g, node, &jf.entry_by_arc(&jf.j, r, c), 2))
                .collect()
        })
        .collect();
    let get = |arc: usize, d: usize| -> Mat2 {
        let mut m = m2::ZERO;
        for r in 0..2 {
            for c in 0..2 {
                let e = traces[r][c].entries.iter().find(|e| e.0 == arc).unwrap();
                m[r][c] = e.1[d];
            }
        }
        m
    };
    // value and derivative of each oriented factor
    let mut factors: Vec<(Mat2, Mat2)> = Vec::new();
    for inc in &g.nodes[node].incident {
        let (v, d) = (get(inc.arc, 0), get(inc.arc, 1));
        if inc.outgoing {
            factors.push((v, d));
        } else {
            let vi = m2::inv(&v);
            let di = m2::scale(&m2::mul(&m2::mul(&vi, &d), &vi), -ONE);
            factors.push((vi, di));
        }
    }
    let mut val = m2::IDENTITY;
    let mut der = m2::ZERO;
    for (v, d) in &factors {
        der = m2::add(&m2::mul(&der, v), &m2::mul(&val, d));
        val = m2::mul(&val, v);
    }
    Ok(ProductResidual {
        order0: m2::max_abs(&m2::sub(&val, &m2::IDENTITY)),
        order1: m2::max_abs(&der),
    })
}

/// Diagonal conjugator `s = diag(delta^{-1}, delta)` on the real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxiliaryConjugator {
    /// `alpha` (lower side) and `alpha_breve` (upper side)
    pub alpha: C64,
    pub alpha_breve: C64,
}

impl AuxiliaryConjugator {
    /// `s-^{-1} J s+` with `s- = diag(1/alpha, alpha)` and
    /// `s+ = diag(alpha_breve, 1/alpha_breve)`.
    pub fn apply(&self, j: &Mat2) -> Mat2 {
        let (a, b) = (self.alpha, self.alpha_breve);
        [[a * j[0][0] * b, a * j[0][1] / b], [j[1][0] * b / a, j[1][1] / (a * b)]]
    }
}

/// `T M T^{-1}` with `T = [[0, 1], [lambda, 0]]`.
fn t_conjugate(m: &Mat2, l: C64) -> Mat2 {
    [[m[1][1], m[1][0] / l], [l * m[0][1], m[0][0]]]
}

/// Jump of the left-normalized problem at `t = 0`. The outer line uses the
/// diagonal conjugation by `alpha`, `alpha_breve`; the augmented pieces are
/// taken from the reflected potential's data conjugated by `T`.
pub fn left_conjugate(sd: &ScatteringData) -> Result<JumpField> {
    let left = sd
        .left
        .as_ref()
        .ok_or_else(|| Error::Shape("scattering data built without the reflected problem".into()))?;
    let refl = factorize_jump(&assemble_jump(left))?;
    let mut out = refl.clone();
    let off = sd.graph.offsets();
    for (ai, (arc, data)) in sd.graph.arcs.iter().zip(&sd.arcs).enumerate() {
        for k in 0..arc.n {
            let idx = off[ai] + k;
            let l = refl.z[idx];
            match data {
                ArcData::Outer { rho, alpha, alpha_breve } => {
                    let s = AuxiliaryConjugator {
                        alpha: alpha[k],
                        alpha_breve: alpha_breve[k],
                    };
                    // the diagonal is fixed by |alpha|^2 + lambda |beta|^2 = 1
                    let jt = s.apply(&outer_jump(l, rho[k]));
                    let (u, lo) = (jt[0][1], jt[1][0]);
                    out.j[idx] = [[ONE, u], [lo, ONE + lo * u]];
                    out.jp[idx] = m2::upper(u);
                    out.jm[idx] = m2::lower(-lo);
                }
                _ => {
                    out.j[idx] = t_conjugate(&refl.j[idx], l);
                    out.jp[idx] = t_conjugate(&refl.jp[idx], l);
                    out.jm[idx] = t_conjugate(&refl.jm[idx], l);
                }
            }
        }
    }
    Ok(out)
}

/// The zeta-plane jump `v` on the augmented zeta contour at `t = 0`,
/// computed from zeta-form Jost solutions, already factorized.
pub fn build_zeta_jump(p: &Potential, r: f64, x0_index: usize, cfg: &ContourConfig) -> Result<JumpField> {
    let g = build_zeta_contour(r, cfg);
    let x0 = p.x(x0_index);
    let mut z = Vec::with_capacity(g.n_total());
    let mut j = Vec::with_capacity(g.n_total());
    for arc in &g.arcs {
        for zeta in arc.nodes() {
            let f = Form::Zeta(zeta);
            let z2 = zeta * zeta;
            let v = match arc.piece {
                Piece::Outer => {
                    let (rr, rb) = reflection(&transition_coeffs(p, zeta))?;
                    [[ONE - rr * rb, rr], [-rb, ONE]]
                }
                Piece::Inner => {
                    let (r0, rb0) = reflection(&transition_coeffs_from(p, zeta, x0_index))?;
                    [[ONE, -r0], [rb0, ONE - r0 * rb0]]
                }
                Piece::CircleUpper => {
                    let ab = plus_column(p, f, 1, 0)[1];
                    let ab0 = plus_column(p, f, 1, x0_index)[1];
                    let m21 = minus_column(p, f, 0, x0_index)[1];
                    m2::lower((-2.0 * I * x0 * z2).exp() * m21 * guarded_inv(ab)? * guarded_inv(ab0)?)
                }
                Piece::CircleLower => {
                    let a = plus_column(p, f, 0, 0)[0];
                    let a0 = plus_column(p, f, 0, x0_index)[0];
                    let m12 = minus_column(p, f, 1, x0_index)[0];
                    m2::upper(-(2.0 * I * x0 * z2).exp() * m12 * guarded_inv(a)? * guarded_inv(a0)?)
                }
                Piece::Ellipse => return Err(Error::Contour("ellipse in zeta contour".into())),
            };
            z.push(zeta);
            j.push(v);
        }
    }
    factorize_jump(&JumpField {
        graph: g,
        plane: Plane::Zeta,
        t: 0.0,
        z,
        j,
        jp: Vec::new(),
        jm: Vec::new(),
    })
}

/// Schwarz-symmetry residuals of a zeta jump: the smallest eigenvalue of
/// `v + v^dagger` over real nodes, and `max |v(conj z) - v(z)^dagger|` over
/// mirrored node pairs off the real axis.
pub fn schwarz_check(jf: &JumpField) -> (f64, f64) {
    let g = &jf.graph;
    let off = g.offsets();
    let scale = jf.z.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut min_eig = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for (ai, arc) in g.arcs.iter().enumerate() {
        let mid = arc.point(0.0);
        if mid.im.abs() <= 1e-12 * scale {
            for v in &jf.j[off[ai]..off[ai] + arc.n] {
                let h = m2::add(v, &m2::adjoint(v));
                // Hermitian 2x2: eigenvalues from trace and determinant
                let tr = 0.5 * (h[0][0].re + h[1][1].re);
                let det = m2::det(&h).re;
                min_eig = min_eig.min(tr - (tr * tr - det).max(0.0).sqrt());
            }
            continue;
        }
        let Some(bi) = g.arcs.iter().position(|b| (b.point(0.0) - mid.conj()).norm() <= 1e-10 * scale) else {
            continue;
        };
        for k in off[ai]..off[ai] + arc.n {
            let zc = jf.z[k].conj();
            let mate = (off[bi]..off[bi] + g.arcs[bi].n)
                .min_by(|&a, &b| (jf.z[a] - zc).norm().partial_cmp(&(jf.z[b] - zc).norm()).unwrap())
                .unwrap();
            if (jf.z[mate] - zc).norm() <= 1e-10 * scale {
                worst = worst.max(m2::max_abs(&m2::sub(&jf.j[mate], &m2::adjoint(&jf.j[k]))));
            }
        }
    }
    (min_eig, worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> DirectConfig {
        DirectConfig {
            contour: ContourConfig {
                n_arc: 24,
                n_ray: 32,
                ..ContourConfig::default()
            },
            ..DirectConfig::default()
        }
    }

    #[test]
    fn zero_potential_gives_identity_jumps() {
        let p = Potential::zero(10.0, 0.05);
        let sd = build_scattering_data(&p, &coarse()).unwrap();
        assert_eq!(sd.x0_index, 0);
        let jf = factorize_jump(&assemble_jump(&sd)).unwrap();
        for ((j, a), b) in jf.j.iter().zip(&jf.jp).zip(&jf.jm) {
            for m in [j, a, b] {
                assert!(m2::max_abs(&m2::sub(m, &m2::IDENTITY)) < 1e-14);
            }
        }
    }

    #[test]
    fn outer_jump_formula() {
        let j = outer_jump(C64::new(5.0, 0.0), C64::new(0.1, 0.0));
        let want = [[1.05, 0.1], [0.5, 1.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((j[r][c] - want[r][c]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn factors_reproduce_jump_and_triangularity() {
        let p = Potential::from_family(
            crate::potential::Family::Sech {
                amp: 0.4,
                phase: alloc::vec![0.0, 0.3],
            },
            24.0,
            0.01,
        );
        let cfg = DirectConfig {
            x0: Some(-1.0),
            ..coarse()
        };
        let sd = build_scattering_data(&p, &cfg).unwrap();
        let jf = factorize_jump(&assemble_jump(&sd)).unwrap();
        assert!(jf.max_det_error() < 1e-12);
        let off = jf.graph.offsets();
        for (arc, o) in jf.graph.arcs.iter().zip(off) {
            for k in o..o + arc.n {
                let back = m2::mul(&m2::inv(&jf.jm[k]), &jf.jp[k]);
                assert!(m2::max_abs(&m2::sub(&back, &jf.j[k])) < 1e-13);
                let (p_, m_) = (jf.jp[k], jf.jm[k]);
                let zero = C64::new(0.0, 0.0);
                match arc.piece {
                    Piece::Outer => assert!(p_[0][1] == zero && m_[1][0] == zero),
                    Piece::Inner => assert!(p_[1][0] == zero && m_[0][1] == zero),
                    Piece::CircleUpper => assert!(p_[0][1] == zero),
                    Piece::CircleLower => assert!(m_[1][0] == zero),
                    Piece::Ellipse => unreachable!(),
                }
            }
        }
    }

    fn chirped(amp: f64) -> Potential {
        Potential::from_family(
            crate::potential::Family::Sech {
                amp,
                phase: alloc::vec![0.0, 0.3],
            },
            24.0,
            0.01,
        )
    }

    #[test]
    fn product_condition_holds_and_detects_corruption() {
        let p = chirped(0.5);
        let cfg = DirectConfig {
            x0: Some(-1.0),
            left: false,
            ..DirectConfig::default()
        };
        let sd = build_scattering_data(&p, &cfg).unwrap();
        let mut jf = assemble_jump(&sd);
        for z in [sd.s_inf, -sd.s_inf] {
            let r = check_product_condition(&jf, C64::new(z, 0.0)).unwrap();
            assert!(r.order0 < 1e-8 && r.order1 < 1e-7, "{r:?}");
        }
        // perturb rho_0 at the segment's first node (lambda = S_inf)
        let off = jf.graph.offsets();
        let k = off[2];
        assert!((jf.z[k] - sd.s_inf).norm() < 1e-12);
        let r0 = -jf.j[k][0][1] + 1e-3;
        jf.j[k] = inner_jump(jf.z[k], r0);
        let r = check_product_condition(&jf, C64::new(sd.s_inf, 0.0)).unwrap();
        assert!(r.order0 > 5e-4 && r.order0 < 5e-3, "{r:?}");
    }

    #[test]
    fn rho_matches_zeta_transform() {
        let p = chirped(0.5);
        let sd = build_scattering_data(
            &p,
            &DirectConfig {
                left: false,
                ..coarse()
            },
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for (arc, data) in sd.graph.arcs.iter().zip(&sd.arcs) {
            if let ArcData::Outer { rho, .. } = data {
                for (l, r) in arc.nodes().iter().zip(rho) {
                    let z = crate::jost::sqrt_branch(*l);
                    let (rz, _) = reflection(&transition_coeffs(&p, z)).unwrap();
                    worst = worst.max((rz / z - r).norm());
                }
            }
        }
        assert!(worst < 1e-8, "{worst:e}");
    }

    #[test]
    fn zeta_jump_reduces_to_lambda_jump() {
        // J(zeta^2) = D v(zeta) D^{-1}, D = diag(1, zeta), on nodes shared by
        // both contours
        let p = chirped(0.5);
        let cfg = DirectConfig {
            x0: Some(-1.0),
            left: false,
            ..coarse()
        };
        let sd = build_scattering_data(&p, &cfg).unwrap();
        let jl = assemble_jump(&sd);
        let jz = build_zeta_jump(&p, sd.r, sd.x0_index, &cfg.contour).unwrap();
        let _ = jl;
        let mut worst: f64 = 0.0;
        let off = jz.graph.offsets();
        for (ai, arc) in jz.graph.arcs.iter().enumerate() {
            for k in off[ai]..off[ai] + arc.n {
                let (zeta, v) = (jz.z[k], jz.j[k]);
                let want = lambda_jump_at(&p, arc.piece, zeta * zeta, sd.x0_index).unwrap();
                let d = [[v[0][0], v[0][1] / zeta], [v[1][0] * zeta, v[1][1]]];
                worst = worst.max(m2::max_abs(&m2::sub(&d, &want)));
            }
        }
        assert!(worst < 1e-8, "{worst:e}");
    }

    #[test]
    fn zeta_jump_is_schwarz_symmetric() {
        let p = chirped(0.8);
        let jz = build_zeta_jump(&p, 1.0, p.index_of(0.0), &coarse().contour).unwrap();
        let (eig, sym) = schwarz_check(&jz);
        assert!(eig > 0.0, "{eig}");
        assert!(sym < 1e-9, "{sym:e}");
    }

    #[test]
    fn left_conjugation_matches_reflected_problem() {
        let p = chirped(0.5);
        let sd = build_scattering_data(&p, &coarse()).unwrap();
        let jt = left_conjugate(&sd).unwrap();
        let refl = assemble_jump(sd.left.as_ref().unwrap());
        let off = sd.graph.offsets();
        let mut worst: f64 = 0.0;
        for (ai, arc) in sd.graph.arcs.iter().enumerate() {
            for k in off[ai]..off[ai] + arc.n {
                let back = m2::mul(&m2::inv(&jt.jm[k]), &jt.jp[k]);
                assert!(m2::max_abs(&m2::sub(&back, &jt.j[k])) < 1e-12);
                assert!((m2::det(&jt.j[k]) - ONE).norm() < 1e-10);
                if arc.piece == Piece::Outer {
                    // upper factor on the plus side, lower on the minus side
                    assert!(jt.jp[k][1][0] == C64::new(0.0, 0.0) && jt.jm[k][0][1] == C64::new(0.0, 0.0));
                    let want = t_conjugate(&refl.j[k], jt.z[k]);
                    worst = worst.max(m2::max_abs(&m2::sub(&want, &jt.j[k])));
                }
            }
        }
        assert!(worst < 1e-8, "{worst:e}");
    }
}

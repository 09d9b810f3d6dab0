//! Cauchy transforms on contour graphs and the Beals–Coifman operator.
//!
//! On a Möbius arc `s = M(t)` the kernel splits as
//! `M'(t) / (M(t) - M(tau)) = 1/(t - tau) - 1/(t - t_inf)`, so every block is a
//! pair of interval Cauchy rows. At a junction the logarithmic terms are
//! dropped from each arc; they cancel between arcs for densities that
//! obey the zero-sum condition.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cheb::{ChebBasis, Side};
use crate::contour::{ContourGraph, Mobius};
use crate::error::{Error, Result};
use crate::jost::Mat2;
use crate::linalg::{scale_cols, CMat};

const ENDPOINT_TOL: f64 = 1e-12;

fn basis_for(bases: &[ChebBasis], n: usize) -> &ChebBasis {
    bases.iter().find(|b| b.n == n).expect("basis for arc size")
}

/// Row of the pole correction `C g(t_inf)` for each arc.
fn pole_rows(g: &ContourGraph, bases: &[ChebBasis]) -> Vec<Option<Vec<C64>>> {
    g.arcs
        .iter()
        .map(|a| {
            let m = a.mobius()?;
            let tp = m.pole()?;
            Some(basis_for(bases, a.n).cauchy_row(tp, Side::Plus))
        })
        .collect()
}

fn sub_into(row: &mut [C64], pole: &Option<Vec<C64>>) {
    if let Some(p) = pole {
        row.iter_mut().zip(p).for_each(|(r, v)| *r -= v);
    }
}

/// Parameter of `z` under the arc map; `None` when `z` is the image of
/// `t = infinity`, where the interval Cauchy term vanishes.
fn preimage(m: &Mobius, z: C64) -> Option<C64> {
    let den = m.a - m.c * z;
    if den.norm() <= 1e-14 * (m.a.norm() + (m.c * z).norm()) {
        return None;
    }
    let tau = (m.d * z - m.b) / den;
    tau.re.is_finite().then_some(tau)
}

/// Finite-part constant for source arc endpoint (`at_end`) approached
/// along the unit direction `dir`.
fn endpoint_fp(mp: C64, at_end: bool, dir: C64) -> C64 {
    if at_end {
        C64::new(-mp.norm().ln() - LN_2, (dir / mp).arg())
    } else {
        C64::new(LN_2 + mp.norm().ln(), (-mp * dir.conj()).arg())
    }
}

/// Boundary-value matrices `C+` and `C-` acting on densities stacked arc
/// by arc in node order.
#[derive(Clone, Debug)]
pub struct Projectors {
    pub plus: CMat,
    pub minus: CMat,
    pub offsets: Vec<usize>,
}

impl Projectors {
    pub fn len(&self) -> usize {
        self.plus.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assembles both projectors. Columns belonging to elliptical arcs are
/// left zero: those arcs only ever carry identity jumps.
pub fn boundary_projectors(g: &ContourGraph) -> Result<Projectors> {
    let n = g.n_total();
    let off = g.offsets();
    let bases = g.bases();
    let poles = pole_rows(g, &bases);
    let mut plus = CMat::zeros(n, n);
    let mut minus = CMat::zeros(n, n);
    for (i, ai) in g.arcs.iter().enumerate() {
        let bi = basis_for(&bases, ai.n);
        for k in 0..ai.n {
            let t = bi.nodes[k];
            let z = ai.point(t);
            let row_idx = off[i] + k;
            // direction into the arc from an endpoint (open ray ends included)
            let own_end = if k == 0 {
                Some(ai.deriv(-1.0))
            } else if k + 1 == ai.n {
                Some(-ai.deriv(1.0))
            } else {
                None
            };
            let endpoint = own_end.filter(|_| ai.has_node_at(k + 1 == ai.n));
            for (j, aj) in g.arcs.iter().enumerate() {
                let m = match aj.mobius() {
                    Some(m) => m,
                    None => continue,
                };
                let bj = basis_for(&bases, aj.n);
                let (rp, rm) = if i == j {
                    if let Some(d) = own_end {
                        let at_end = k + 1 == aj.n;
                        let e = if at_end { 1.0 } else { -1.0 };
                        let mp = m.deriv(C64::new(e, 0.0));
                        let base = endpoint_fp(mp, at_end, d / d.norm());
                        // own arc: the argument is +-pi by side
                        let fp_p = C64::new(base.re, PI);
                        let fp_m = C64::new(base.re, -PI);
                        (bj.cauchy_row_endpoint(at_end, fp_p), bj.cauchy_row_endpoint(at_end, fp_m))
                    } else {
                        (bj.cauchy_row(C64::new(t, 0.0), Side::Plus), bj.cauchy_row(C64::new(t, 0.0), Side::Minus))
                    }
                } else {
                    let shared = endpoint.and_then(|d| {
                        [false, true].into_iter().find_map(|at_end| {
                            let e = if at_end { aj.end() } else { aj.start() };
                            (aj.has_node_at(at_end) && (e - z).norm() <= ENDPOINT_TOL * (1.0 + z.norm()))
                                .then_some((at_end, d))
                        })
                    });
                    let r = match shared {
                        Some((at_end, d)) => {
                            let e = if at_end { 1.0 } else { -1.0 };
                            let mp = m.deriv(C64::new(e, 0.0));
                            bj.cauchy_row_endpoint(at_end, endpoint_fp(mp, at_end, d / d.norm()))
                        }
                        None => match preimage(&m, z) {
                            Some(tau) => {
                                if tau.im.abs() < 1e-14 && tau.re.abs() <= 1.0 {
                                    return Err(Error::Contour(format!(
                                        "node of arc {i} lies on the interior of arc {j}"
                                    )));
                                }
                                bj.cauchy_row(tau, Side::Plus)
                            }
                            None => vec![C64::new(0.0, 0.0); aj.n],
                        },
                    };
                    (r.clone(), r)
                };
                let (mut rp, mut rm) = (rp, rm);
                sub_into(&mut rp, &poles[j]);
                sub_into(&mut rm, &poles[j]);
                for l in 0..aj.n {
                    plus[(row_idx, off[j] + l)] = rp[l];
                    minus[(row_idx, off[j] + l)] = rm[l];
                }
            }
        }
    }
    Ok(Projectors {
        plus,
        minus,
        offsets: off,
    })
}

/// `(1 / 2 pi i) int f(s) / (s - z) ds` for `z` off the contour.
pub fn cauchy_offcontour(g: &ContourGraph, density: &[C64], z: C64) -> Result<C64> {
    if density.len() != g.n_total() {
        return Err(Error::Shape(format!("density has {} entries, contour {}", density.len(), g.n_total())));
    }
    let bases = g.bases();
    let off = g.offsets();
    let mut acc = C64::new(0.0, 0.0);
    for (j, aj) in g.arcs.iter().enumerate() {
        let f = &density[off[j]..off[j] + aj.n];
        if f.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            continue;
        }
        let bj = basis_for(&bases, aj.n);
        match aj.mobius() {
            Some(m) => {
                let mut row = match preimage(&m, z) {
                    Some(tau) => {
                        if tau.im.abs() < 1e-13 && tau.re.abs() <= 1.0 + 1e-13 {
                            return Err(Error::TooClose);
                        }
                        bj.cauchy_row(tau, Side::Plus)
                    }
                    None => vec![C64::new(0.0, 0.0); aj.n],
                };
                if let Some(tp) = m.pole() {
                    let p = bj.cauchy_row(tp, Side::Plus);
                    row.iter_mut().zip(&p).for_each(|(r, v)| *r -= v);
                }
                acc += row.iter().zip(f).map(|(r, v)| r * v).sum::<C64>();
            }
            None => {
                for (l, &t) in bj.nodes.iter().enumerate() {
                    let s = aj.point(t);
                    if (s - z).norm() < 1e-10 {
                        return Err(Error::TooClose);
                    }
                    acc += f[l] * aj.deriv(t) * bj.weights[l] / (s - z) / (2.0 * PI * C64::new(0.0, 1.0));
                }
            }
        }
    }
    Ok(acc)
}

/// `int f ds` over the contour by per-arc Clenshaw–Curtis.
pub fn contour_integral(g: &ContourGraph, f: &[C64]) -> C64 {
    let bases = g.bases();
    let off = g.offsets();
    let mut acc = C64::new(0.0, 0.0);
    for (j, aj) in g.arcs.iter().enumerate() {
        let b = basis_for(&bases, aj.n);
        for (l, &t) in b.nodes.iter().enumerate() {
            acc += f[off[j] + l] * aj.deriv(t) * b.weights[l];
        }
    }
    acc
}

/// Quadrature weights `w_l |ds/dt|` for every node.
pub fn arc_weights(g: &ContourGraph) -> Vec<f64> {
    let bases = g.bases();
    let mut out = Vec::with_capacity(g.n_total());
    for aj in &g.arcs {
        let b = basis_for(&bases, aj.n);
        for (l, &t) in b.nodes.iter().enumerate() {
            out.push(b.weights[l] * aj.deriv(t).norm());
        }
    }
    out
}

/// `nu -> C+(nu W-) + C-(nu W+)` on row vectors `nu = (nu1, nu2)`, held as
/// the two coupling blocks `nu1 <- A nu2`, `nu2 <- B nu1`.
#[derive(Clone, Debug)]
pub struct BcOperator {
    pub a: CMat,
    pub b: CMat,
}

impl BcOperator {
    /// The full `2N x 2N` matrix on `(nu1; nu2)`.
    pub fn dense(&self) -> CMat {
        let n = self.a.nrows();
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(&self.a);
        m.view_mut((n, 0), (n, n)).copy_from(&self.b);
        m
    }
}

pub fn build_bc_operator(wp: &[Mat2], wm: &[Mat2], proj: &Projectors) -> Result<BcOperator> {
    let n = proj.len();
    if wp.len() != n || wm.len() != n {
        return Err(Error::Shape(format!("weights have {}/{} nodes, projectors {n}", wp.len(), wm.len())));
    }
    let col = |w: &[Mat2], r: usize, c: usize| -> Vec<C64> { w.iter().map(|m| m[r][c]).collect() };
    let a = scale_cols(&proj.plus, &col(wm, 1, 0)) + scale_cols(&proj.minus, &col(wp, 1, 0));
    let b = scale_cols(&proj.plus, &col(wm, 0, 1)) + scale_cols(&proj.minus, &col(wp, 0, 1));
    Ok(BcOperator { a, b })
}

/// Contour with a single counter-clockwise unit circle (two arcs), for tests
/// and diagnostics.
pub fn unit_circle_graph(n: usize) -> ContourGraph {
    use crate::contour::{Arc, Geometry, Piece, Region};
    use alloc::string::ToString;
    let arc = |t0: f64, t1: f64| Arc {
        geom: Geometry::Circular {
            center: C64::new(0.0, 0.0),
            radius: 1.0,
            theta0: t0,
            theta1: t1,
        },
        forward: true,
        n,
        plus: 0,
        minus: 1,
        piece: Piece::Ellipse,
    };
    let regions = vec![
        Region {
            name: "inside".to_string(),
            sign: Side::Plus,
        },
        Region {
            name: "outside".to_string(),
            sign: Side::Minus,
        },
    ];
    ContourGraph::from_arcs(vec![arc(0.0, PI), arc(PI, 2.0 * PI)], regions).expect("circle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_lambda_contour, build_zeta_contour, ContourConfig};
    use crate::linalg::{matvec, max_abs};

    fn sample(g: &ContourGraph, f: impl Fn(C64) -> C64) -> Vec<C64> {
        g.arcs.iter().flat_map(|a| a.nodes()).map(f).collect()
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn plemelj_difference_is_identity() {
        let g = build_lambda_contour(2.0, &ContourConfig::default());
        let p = boundary_projectors(&g).unwrap();
        let d = &p.plus - &p.minus;
        let err = max_abs(&(d - CMat::identity(p.len(), p.len())));
        assert!(err < 1e-12, "{err}");
    }

    // f = (z - p)^-6 with p in the lower exterior is analytic in every plus
    // region and decays fast enough for the truncated rays
    #[test]
    fn projectors_filter_analytic_boundary_values() {
        for s in [1.0, 2.25] {
            let g = build_lambda_contour(s, &ContourConfig::default());
            let p = boundary_projectors(&g).unwrap();
            let pole = C64::new(0.4, -3.0) * s;
            let f = sample(&g, |z| (z - pole).powi(-6) * s.powi(6));
            let cp = matvec(&p.plus, &f);
            let cm = matvec(&p.minus, &f);
            assert!(max_diff(&cp, &f) < 1e-7, "{}", max_diff(&cp, &f));
            assert!(cm.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-7);
            // idempotence on the same density
            let cpp = matvec(&p.plus, &cp);
            assert!(max_diff(&cpp, &cp) < 1e-7);
        }
    }

    #[test]
    fn zeta_projectors_filter_minus_side() {
        let cfg = ContourConfig {
            ray_cutoff: 1600.0,
            ..ContourConfig::default()
        };
        let g = build_zeta_contour(1.0, &cfg);
        let p = boundary_projectors(&g).unwrap();
        // Omega2 (second quadrant, outside) is a minus region
        let pole = C64::new(-2.5, 2.5);
        let f = sample(&g, |z| (2.5 / (z - pole)).powi(12));
        let cm = matvec(&p.minus, &f);
        let cp = matvec(&p.plus, &f);
        // pole in a minus region: f is analytic in every plus region
        assert!(max_diff(&cp, &f) < 1e-7, "{}", max_diff(&cp, &f));
        assert!(cm.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-7);
    }

    #[test]
    fn offcontour_residue_and_far_field() {
        let g = unit_circle_graph(40);
        let z0 = C64::new(1.7, 0.4);
        let f = sample(&g, |s| 1.0 / (s - z0));
        for z in [C64::new(0.2, 0.1), C64::new(-0.5, 0.6), C64::new(0.0, 0.95)] {
            let v = cauchy_offcontour(&g, &f, z).unwrap();
            assert!((v - 1.0 / (z - z0)).norm() < 1e-9, "{z}");
        }
        let v = cauchy_offcontour(&g, &f, C64::new(3.0, -2.0)).unwrap();
        assert!(v.norm() < 1e-11);
        // Laurent leading term for a density with nonzero integral
        let h = sample(&g, |s| s.conj());
        let total = contour_integral(&g, &h);
        let z = C64::new(0.0, 1e4);
        let v = cauchy_offcontour(&g, &h, z).unwrap();
        let lead = -total / (2.0 * PI * C64::new(0.0, 1.0) * z);
        assert!((v - lead).norm() < 1e-7 * lead.norm());
        assert!(cauchy_offcontour(&g, &vec![C64::new(0.0, 0.0); 80], z).unwrap().norm() == 0.0);
    }

    #[test]
    fn bc_operator_structure() {
        let g = build_lambda_contour(1.0, &ContourConfig::default().scaled(0.25));
        let p = boundary_projectors(&g).unwrap();
        let n = p.len();
        let zero = [[C64::new(0.0, 0.0); 2]; 2];
        let op = build_bc_operator(&vec![zero; n], &vec![zero; n], &p).unwrap();
        assert_eq!(max_abs(&op.dense()), 0.0);
        // strictly lower W+, W- = 0: nu2 does not feed nu1
        let mut low = zero;
        low[1][0] = C64::new(0.3, 0.1);
        let op = build_bc_operator(&vec![low; n], &vec![zero; n], &p).unwrap();
        assert!(max_abs(&op.b) == 0.0 && max_abs(&op.a) > 0.0);
    }
}

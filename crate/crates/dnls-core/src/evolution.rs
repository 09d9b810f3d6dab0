//! Time evolution of jump data: `J(t) = e^{-2i phi^2 t ad(sigma)} J(0)`.

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::augment::{JumpField, Plane};
use crate::jost::Mat2;
use crate::linalg::m2;

const I: C64 = C64::new(0.0, 1.0);

/// `(e^{-4i phi^2 t}, e^{4i phi^2 t})`, the factors for the (1,2) and (2,1)
/// entries.
pub fn time_phases(plane: Plane, z: C64, t: f64) -> (C64, C64) {
    let p = plane.phi(z);
    let th = 4.0 * I * p * p * t;
    ((-th).exp(), th.exp())
}

fn evolve_all(field: &mut [Mat2], plane: Plane, z: &[C64], t: f64) {
    for (m, &zk) in field.iter_mut().zip(z) {
        let (e12, e21) = time_phases(plane, zk, t);
        *m = m2::conj_phase(m, e12, e21);
    }
}

/// Advances the jump field by `t`; applied alike to `J` and its factors.
pub fn evolve_jump(jf: &JumpField, t: f64) -> JumpField {
    let mut out = jf.clone();
    evolve_all(&mut out.j, jf.plane, &jf.z, t);
    evolve_all(&mut out.jp, jf.plane, &jf.z, t);
    evolve_all(&mut out.jm, jf.plane, &jf.z, t);
    out.t = jf.t + t;
    out
}

/// Zeta-plane evolution (phases `e^{-+4i zeta^4 t}`).
pub fn evolve_zeta(jf: &JumpField, t: f64) -> JumpField {
    debug_assert_eq!(jf.plane, Plane::Zeta);
    evolve_jump(jf, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{factorize_jump, JumpField};
    use crate::contour::{build_lambda_contour, ContourConfig};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn field(seed: f64) -> JumpField {
        let g = build_lambda_contour(1.0, &ContourConfig { n_arc: 8, n_ray: 8, ..ContourConfig::default() });
        let z: Vec<C64> = g.arcs.iter().flat_map(|a| a.nodes()).collect();
        let j = z
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let r = C64::new((seed + k as f64).sin(), (seed * k as f64).cos()) * 0.3;
                crate::augment::outer_jump(l, r)
            })
            .collect();
        factorize_jump(&JumpField {
            graph: g,
            plane: Plane::Lambda,
            t: 0.0,
            z,
            j,
            jp: Vec::new(),
            jm: Vec::new(),
        })
        .unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let f = field(0.3);
        let e = evolve_jump(&f, 0.0);
        assert_eq!(e.j, f.j);
        assert_eq!(e.jp, f.jp);
    }

    #[test]
    fn phase_arithmetic() {
        let (e12, _) = time_phases(Plane::Lambda, C64::new(1.0, 0.0), core::f64::consts::FRAC_PI_2);
        assert!((e12 - 1.0).norm() < 1e-14);
        // zeta^4 = lambda^2
        let z = C64::new(0.7, 0.4);
        let a = time_phases(Plane::Zeta, z, 0.3);
        let b = time_phases(Plane::Lambda, z * z, 0.3);
        assert!((a.0 - b.0).norm() < 1e-14 && (a.1 - b.1).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn group_law_and_modulus(t1 in -1.0f64..1.0, t2 in -1.0f64..1.0, seed in 0.0f64..10.0) {
            let f = field(seed);
            let a = evolve_jump(&evolve_jump(&f, t1), t2);
            let b = evolve_jump(&f, t1 + t2);
            for (k, (x, y)) in a.j.iter().zip(&b.j).enumerate() {
                // exp(a) exp(b) vs exp(a + b) loses |a| ulps
                let s = (1.0 + m2::max_abs(x)) * (1.0 + 8.0 * f.z[k].norm_sqr());
                prop_assert!(m2::max_abs(&m2::sub(x, y)) < 1e-14 * s);
                prop_assert!((m2::det(x) - m2::det(&f.j[k])).norm() < 1e-12 * s * s);
                if f.z[k].im.abs() < 1e-12 {
                    prop_assert!((x[0][1].norm() - f.j[k][0][1].norm()).abs() < 1e-12 * s);
                }
            }
            // triangular zero patterns survive
            for (x, y) in a.jp.iter().zip(&f.jp) {
                prop_assert_eq!(x[0][1] == C64::new(0.0, 0.0), y[0][1] == C64::new(0.0, 0.0));
            }
        }
    }
}

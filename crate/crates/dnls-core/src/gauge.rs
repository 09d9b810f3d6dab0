//! Gauge map between DNLS1 and DNLS2: `q = u exp(i eps int_x^inf |u|^2)`.

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::potential::Potential;

fn rephase(p: &Potential, s: f64) -> Potential {
    let tail = p.tail_integral(|v| v.norm_sqr());
    Potential {
        q: p.q.iter().zip(&tail).map(|(v, i)| v * C64::from_polar(1.0, s * i)).collect(),
        family: None,
        ..p.clone()
    }
}

pub fn gauge_forward(u: &Potential, eps: f64) -> Potential {
    rephase(u, eps)
}

/// The tail integral of `|q|^2` equals that of `|u|^2`.
pub fn gauge_inverse(q: &Potential, eps: f64) -> Potential {
    rephase(q, -eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Family;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn zero_maps_to_zero() {
        let z = Potential::zero(5.0, 0.1);
        assert!(gauge_forward(&z, -1.0).q.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn phase_at_right_end_is_trivial() {
        let u = Potential::sech(0.7, 10.0, 0.05);
        let q = gauge_forward(&u, 1.0);
        assert_eq!(q.q[q.len() - 1], u.q[u.len() - 1]);
        // int_{-inf}^{inf} sech^2 = 2
        let expect = u.q[0] * C64::from_polar(1.0, 0.49 * 2.0);
        assert!((q.q[0] - expect).norm() < 1e-6);
    }

    proptest! {
        #[test]
        fn round_trip_and_modulus(amp in 0.0f64..2.0, c1 in -1.0f64..1.0, c2 in -0.2f64..0.2, eps in prop::sample::select(vec![-1.0, 1.0])) {
            let u = Potential::from_family(Family::Sech { amp, phase: vec![0.0, c1, c2] }, 12.0, 0.02);
            let q = gauge_forward(&u, eps);
            let back = gauge_inverse(&q, eps);
            for ((a, b), c) in u.q.iter().zip(&back.q).zip(&q.q) {
                prop_assert!((a - b).norm() < 1e-10);
                prop_assert!((a.norm() - c.norm()).abs() < 1e-14);
            }
            prop_assert!((q.l2_norm() - u.l2_norm()).abs() < 1e-12 * (1.0 + u.l2_norm()));
        }
    }
}

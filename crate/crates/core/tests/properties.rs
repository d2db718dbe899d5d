use num_complex::Complex64;
use proptest::prelude::*;
use stokes_core::potential::{exponent_rm, omega_int};
use stokes_core::stokes::{c_tilde, companion_origin, stokes_c, stokes_ck, wronskian_consecutive, wronskian_lemma, WronskianConvention};
use stokes_core::{Execution, Potential, RayConfig};

type C64 = Complex64;

fn coeffs(m: usize, v: &[f64], complex: bool) -> Vec<C64> {
    (0..m)
        .map(|i| C64::new(v[2 * i], if complex { v[2 * i + 1] } else { 0.0 }))
        .collect()
}

fn few() -> ProptestConfig {
    ProptestConfig { cases: 12, ..ProptestConfig::default() }
}

proptest! {
    #[test]
    fn rotation_round_trip(m in 1usize..8, k in -9i64..9, v in proptest::collection::vec(-2.0f64..2.0, 16)) {
        let p = Potential::new(coeffs(m, &v, true)).unwrap();
        let q = p.rotate(k).rotate(-k);
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-15 * (1.0 + a.norm()));
        }
        let full = p.rotate(m as i64 + 2);
        for (a, b) in p.coeffs().iter().zip(full.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-15 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn exponent_real_for_real_data(m in 1usize..8, v in proptest::collection::vec(-2.0f64..2.0, 16)) {
        let p = Potential::new(coeffs(m, &v, false)).unwrap();
        let r = exponent_rm(&p);
        prop_assert_eq!(r.im, 0.0);
        if m % 2 == 1 {
            prop_assert_eq!(r.re, -(m as f64) / 4.0);
        }
    }

    #[test]
    fn c_tilde_is_unimodular_for_real_data(m in 2usize..7, k in -4i64..4, v in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let p = Potential::new(coeffs(m, &v, false)).unwrap();
        prop_assert!((c_tilde(&p, k).norm() - 1.0).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(few())]

    #[test]
    fn conjugation_symmetry(m in 3usize..6, v in proptest::collection::vec(-1.0f64..1.0, 10)) {
        let cfg = RayConfig::default();
        let p = Potential::new(coeffs(m, &v, true)).unwrap();
        let c = stokes_c(&p, &cfg).unwrap().c;
        let cc = stokes_c(&p.conj(), &cfg).unwrap().c;
        prop_assert!((c.conj() + cc).norm() <= 1e-8 * (1.0 + c.norm()));
        // the zero set is conjugation invariant: |C| agrees at a and conj(a)
        prop_assert!((c.norm() - cc.norm()).abs() <= 1e-8 * (1.0 + c.norm()));
    }

    #[test]
    fn companions_are_conjugate_for_real_data(m in 3usize..6, v in proptest::collection::vec(-1.0f64..1.0, 10)) {
        let cfg = RayConfig::default();
        let p = Potential::new(coeffs(m, &v, false)).unwrap();
        let up = companion_origin(&p, 1, &cfg).unwrap();
        let down = companion_origin(&p, -1, &cfg).unwrap();
        let (u, d) = (up.value_full(), down.value_full());
        prop_assert!((u.conj() - d).norm() <= 1e-9 * u.norm());
        let (u, d) = (up.deriv_full(), down.deriv_full());
        prop_assert!((u.conj() - d).norm() <= 1e-9 * u.norm());
    }

    #[test]
    fn wronskian_lemma_random_real(m in 3usize..6, k in -1i64..2, v in proptest::collection::vec(-1.0f64..1.0, 10)) {
        let cfg = RayConfig::default();
        let p = Potential::new(coeffs(m, &v, false)).unwrap();
        let w = wronskian_consecutive(&p, k, WronskianConvention::Standard, &cfg).unwrap();
        let target = wronskian_lemma(&p, k);
        prop_assert!((w - target).norm() <= 1e-6 * target.norm());
    }

    #[test]
    fn cyclic_multiplier_is_periodic(m in 3usize..5, k in -2i64..3, v in proptest::collection::vec(-1.0f64..1.0, 10)) {
        let cfg = RayConfig::default();
        let p = Potential::new(coeffs(m, &v, true)).unwrap();
        let a = stokes_ck(&p, k, &cfg).unwrap();
        let b = stokes_ck(&p, k + m as i64 + 2, &cfg).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
    }
}

#[test]
fn cubic_c1_is_c0_at_rotated_lambda() {
    // m = 3, a = (0, 0, lambda): w_1(a) = (0, 0, w^3 lambda)
    let cfg = RayConfig::default();
    let lam = C64::new(0.7, -0.2);
    let p = Potential::with_lambda(&[C64::new(0.0, 0.0); 2], lam).unwrap();
    let q = Potential::with_lambda(&[C64::new(0.0, 0.0); 2], omega_int(3, 3) * lam).unwrap();
    let c1 = stokes_ck(&p, 1, &cfg).unwrap();
    let c0 = stokes_ck(&q, 0, &cfg).unwrap();
    assert!((c1 - c0).norm() < 1e-10 * (1.0 + c0.norm()));
}

#[test]
fn sequential_and_parallel_agree_exactly() {
    let p = Potential::new(vec![C64::new(0.3, 0.1), C64::new(-0.4, 0.0), C64::new(2.0, 0.5)]).unwrap();
    let seq = RayConfig { exec: Execution::Sequential, ..Default::default() };
    let par = RayConfig { exec: Execution::Parallel, ..Default::default() };
    assert_eq!(stokes_c(&p, &seq).unwrap(), stokes_c(&p, &par).unwrap());
}

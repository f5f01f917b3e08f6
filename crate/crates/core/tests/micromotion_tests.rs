//! Micromotion-exponent checks: printed first- and second-order kick
//! operators, hermiticity, vanishing of the harmonic-0 part, and the
//! micromotion unitary.

#![allow(clippy::needless_range_loop)] // generator-index loops read clearer

use floquet_flow::algebra::{builtin_su2, commutator};
use floquet_flow::flow::{discrete_expand, toda_expand, vmm_expand};
use floquet_flow::fourier::FourierOperator;
use floquet_flow::micromotion::{magnus_s, micromotion_unitary};
use floquet_flow::scalar::GaussRational;
use floquet_flow::symbolic::{equal_sampled, equal_sampled_linked, Bindings, EnvelopeExpr};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gr(re: (i64, i64), im: (i64, i64)) -> GaussRational {
    GaussRational::from_parts(re, im)
}

fn rabi_operator() -> FourierOperator {
    let alg = builtin_su2();
    let g = EnvelopeExpr::envelope("g", 0);
    let cosphi = EnvelopeExpr::param("cosphi");
    let sinphi = EnvelopeExpr::param("sinphi");
    let delta = EnvelopeExpr::param("Delta");
    let mut h = FourierOperator::zero(alg, 2);
    h.set_entry(0, "sx", g.mul(&cosphi)).unwrap();
    h.set_entry(0, "sy", g.mul(&sinphi)).unwrap();
    h.set_entry(0, "sz", delta.scale(&gr((1, 2), (0, 1)))).unwrap();
    let half = gr((1, 2), (0, 1));
    let e_iphi = cosphi.add(&sinphi.mul_i());
    h.set_entry(2, "sx", g.mul(&e_iphi).scale(&half)).unwrap();
    h.set_entry(2, "sy", g.mul(&e_iphi).scale(&half.mul_i())).unwrap();
    h.hermitian_complete().unwrap();
    h
}

fn random_su2_operator(band: i64, time_dep: bool, rng: &mut ChaCha8Rng) -> FourierOperator {
    let alg = builtin_su2();
    let mut h = FourierOperator::zero(alg, band);
    for n in 0..=band {
        for label in ["sx", "sy", "sz"] {
            let c = gr(
                (rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2)),
                if n == 0 { (0, 1) } else { (rng.gen_range(-2i64..=2), 1) },
            );
            let mut e = EnvelopeExpr::constant(c);
            if time_dep {
                e = e.mul(&EnvelopeExpr::envelope("f", 0));
            }
            h.set_entry(n, label, e).unwrap();
        }
    }
    h.hermitian_complete().unwrap();
    h
}

/// Expected S_1 component at harmonic m: h^(m)/(i m) = -i h^(m)/m.
fn expected_s1(h: &FourierOperator, m: i64) -> Vec<EnvelopeExpr> {
    let w = &gr((0, 1), (-1, 1)) * &GaussRational::from_ratio(1, m);
    h.component(m)
        .unwrap()
        .iter()
        .map(|e| e.scale(&w))
        .collect()
}

/// Expected S_2 component at harmonic m (printed second-order form):
///   (1/2i) [ 2i h'^(m)/m^2 + [h^(m), h^(0)]/m^2
///            + sum_{n != 0} [h^(n), h^(m-n)]/(n m) ].
fn expected_s2(h: &FourierOperator, m: i64) -> Vec<EnvelopeExpr> {
    let alg = h.algebra().clone();
    let dim = alg.dim();
    let zero = vec![EnvelopeExpr::zero(); dim];
    let comp = |n: i64| h.component(n).unwrap_or(&zero);
    let mut acc = vec![EnvelopeExpr::zero(); dim];
    // 2i h'^(m)/m^2
    let w = &gr((0, 1), (2, 1)) * &GaussRational::from_ratio(1, m * m);
    for (a, c) in acc.iter_mut().zip(comp(m)) {
        *a = a.add(&c.ddt().scale(&w));
    }
    // [h^(m), h^(0)]/m^2
    let comm = commutator(comp(m), comp(0), &alg).unwrap();
    let w = GaussRational::from_ratio(1, m * m);
    for (a, c) in acc.iter_mut().zip(&comm) {
        *a = a.add(&c.scale(&w));
    }
    // sum over n
    let band = h.band();
    for n in -band..=band {
        if n == 0 || (m - n).abs() > band {
            continue;
        }
        let comm = commutator(comp(n), comp(m - n), &alg).unwrap();
        let w = GaussRational::from_ratio(1, n * m);
        for (a, c) in acc.iter_mut().zip(&comm) {
            *a = a.add(&c.scale(&w));
        }
    }
    // overall 1/(2i) = -i/2
    let w = gr((0, 1), (-1, 2));
    acc.iter().map(|e| e.scale(&w)).collect()
}

#[test]
fn kick_operator_first_and_second_order_printed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for time_dep in [false, true] {
        let h = random_su2_operator(2, time_dep, &mut rng);
        for result in [toda_expand(&h, 2).unwrap(), vmm_expand(&h, 2).unwrap()] {
            let s = magnus_s(&result.history, 2).unwrap();
            assert!(s.is_hermitian(), "S must be Hermitian order by order");
            // S_0 = 0.
            assert!(s.order(0).is_zero(), "S_0 must vanish");
            // S_1 and S_2 match the printed forms harmonic by harmonic.
            for m in [-2i64, -1, 1, 2] {
                let got1 = s.order(1).component(m).unwrap();
                let want1 = expected_s1(&h, m);
                let got2 = s.order(2).component(m).unwrap();
                let want2 = expected_s2(&h, m);
                for l in 0..3 {
                    assert!(
                        equal_sampled(&got1[l], &want1[l], 60, &mut rng),
                        "engine {:?} S_1^({m}) generator {l}: got {} want {}",
                        result.engine,
                        got1[l],
                        want1[l]
                    );
                    assert!(
                        equal_sampled(&got2[l], &want2[l], 60, &mut rng),
                        "engine {:?} S_2^({m}) generator {l}: got {} want {}",
                        result.engine,
                        got2[l],
                        want2[l]
                    );
                }
            }
            // The harmonic-0 part of S_2 vanishes identically.
            let p0 = s.order(2).component(0).unwrap();
            for l in 0..3 {
                assert!(p0[l].is_zero(), "P_0 part of S_2 must vanish, got {}", p0[l]);
            }
        }
    }
}

#[test]
fn rabi_micromotion_matches_printed_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let h = rabi_operator();
    let result = toda_expand(&h, 2).unwrap();
    let s = magnus_s(&result.history, 2).unwrap();

    let g = EnvelopeExpr::envelope("g", 0);
    let gp = EnvelopeExpr::envelope("g", 1);
    let delta = EnvelopeExpr::param("Delta");
    let e_iphi = EnvelopeExpr::param("cosphi").add(&EnvelopeExpr::param("sinphi").mul_i());
    let eq = |a: &EnvelopeExpr, b: &EnvelopeExpr, rng: &mut ChaCha8Rng| {
        equal_sampled_linked(a, b, 100, &[("cosphi", "sinphi")], rng)
    };

    // Order 1, harmonic +2: sx -> -i g e^{i phi}/4, sy -> g e^{i phi}/4.
    let s1 = s.order(1).component(2).unwrap();
    assert!(eq(&s1[0], &g.mul(&e_iphi).scale(&gr((0, 1), (-1, 4))), &mut rng));
    assert!(eq(&s1[1], &g.mul(&e_iphi).scale(&gr((1, 4), (0, 1))), &mut rng));
    assert!(s1[2].is_zero());
    // Other harmonics of order 1 vanish (only +-2 drive).
    assert!(s.order(1).component(1).unwrap().iter().all(EnvelopeExpr::is_zero));

    // Order 2, harmonic +2:
    //   sx -> ( i Delta g/8 + g'/8) e^{i phi}
    //   sy -> (-Delta g/8 + i g'/8) e^{i phi}
    //   sz -> -i g^2/4 e^{2 i phi}
    let s2 = s.order(2).component(2).unwrap();
    let want_x = delta
        .mul(&g)
        .scale(&gr((0, 1), (1, 8)))
        .add(&gp.scale(&gr((1, 8), (0, 1))))
        .mul(&e_iphi);
    let want_y = delta
        .mul(&g)
        .scale(&gr((-1, 8), (0, 1)))
        .add(&gp.scale(&gr((0, 1), (1, 8))))
        .mul(&e_iphi);
    let want_z = g.pow(2).scale(&gr((0, 1), (-1, 4))).mul(&e_iphi.pow(2));
    assert!(eq(&s2[0], &want_x, &mut rng), "sx: got {}", s2[0]);
    assert!(eq(&s2[1], &want_y, &mut rng), "sy: got {}", s2[1]);
    assert!(eq(&s2[2], &want_z, &mut rng), "sz: got {}", s2[2]);

    // Hermiticity ties the -2 harmonics to these.
    assert!(s.is_hermitian());
}

#[test]
fn discrete_history_micromotion_agrees_through_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let h = rabi_operator();
    let cont = magnus_s(&toda_expand(&h, 2).unwrap().history, 2).unwrap();
    let disc = magnus_s(&discrete_expand(&h, 2).unwrap().history, 2).unwrap();
    // A one-step history cannot support order-2 micromotion.
    assert!(magnus_s(&discrete_expand(&h, 1).unwrap().history, 2).is_err());
    for k in 0..=2usize {
        for m in -2i64..=2 {
            let a = cont.order(k).component(m).unwrap();
            let b = disc.order(k).component(m).unwrap();
            for l in 0..3 {
                assert!(
                    equal_sampled_linked(&a[l], &b[l], 60, &[("cosphi", "sinphi")], &mut rng),
                    "order {k}, harmonic {m}, generator {l}:\n  cont {}\n  disc {}",
                    a[l],
                    b[l]
                );
            }
        }
    }
}

#[test]
fn micromotion_unitary_is_unitary_and_identity_for_zero_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let h = rabi_operator();
    let result = toda_expand(&h, 2).unwrap();
    let s = magnus_s(&result.history, 2).unwrap();
    let mut bindings = Bindings::new();
    bindings.set_param("Delta", 0.3);
    bindings.set_param("cosphi", 1.0);
    bindings.set_param("sinphi", 0.0);
    for _ in 0..5 {
        bindings.set_envelope("g", 0, rng.gen_range(-0.5..0.5));
        bindings.set_envelope("g", 1, rng.gen_range(-0.5..0.5));
        let t: f64 = rng.gen_range(0.0..10.0);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let u = micromotion_unitary(&s, 2, 8.0, t, theta, &bindings).unwrap();
        let dev = (&(&u.dagger() * &u) - &floquet_flow::linalg::CMat::eye(2)).frobenius_norm();
        assert!(dev < 1e-10, "unitarity deviation {dev:.2e}");
    }
    // Zero micromotion: order 0 only -> S = 0 -> identity.
    let u0 = micromotion_unitary(&s, 0, 8.0, 1.0, 0.3, &bindings).unwrap();
    assert!(
        (&u0 - &floquet_flow::linalg::CMat::eye(2)).frobenius_norm() < 1e-14,
        "S truncated at order 0 must give the identity"
    );
}

#[test]
fn rabi_micromotion_unitary_matches_trig_form_numerically() {
    // Evaluate S(omega t) from the series and from the printed trigonometric
    // expression at phi = 0 and compare the resulting matrices.
    let h = rabi_operator();
    let result = toda_expand(&h, 2).unwrap();
    let s = magnus_s(&result.history, 2).unwrap();
    let (omega, gval, delta, t) = (9.0, 0.23, 0.31, 1.37);
    let mut bindings = Bindings::new();
    bindings.set_param("Delta", delta);
    bindings.set_param("cosphi", 1.0);
    bindings.set_param("sinphi", 0.0);
    bindings.set_envelope("g", 0, gval);
    bindings.set_envelope("g", 1, 0.0); // static envelope here
    let smat = s.matrix_at(2, omega, t, 0.0, &bindings).unwrap();

    let (w2, w2sq) = (omega, omega * omega);
    let arg = 2.0 * omega * t;
    let sx = gval * arg.sin() / (2.0 * w2) - delta * gval * arg.sin() / (4.0 * w2sq);
    let sy = gval * arg.cos() / (2.0 * w2) - delta * gval * arg.cos() / (4.0 * w2sq);
    let sz = gval * gval * arg.sin() / (2.0 * w2sq);
    let mut expect = floquet_flow::linalg::CMat::zeros(2);
    expect[(0, 0)] = C64::new(sz, 0.0);
    expect[(1, 1)] = C64::new(-sz, 0.0);
    expect[(0, 1)] = C64::new(sx, -sy);
    expect[(1, 0)] = C64::new(sx, sy);
    assert!(
        (&smat - &expect).frobenius_norm() < 1e-12,
        "S matrix mismatch:\n{smat:?}\nvs\n{expect:?}"
    );
}

#[test]
fn first_order_flow_integral_matches_closed_form() {
    // integral_0^inf H^(m)_1(s) ds, from the solved VMM history, against
    // the printed closed form:
    //   i h'^(m)/m^3 - [h^(0), h^(m)]/m^3
    //   + sum_{n != 0,m} [h^(n), h^(m-n)]/(2n) (1/m^2 - 1/(n^2 + (m-n)^2)).
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let h = random_su2_operator(2, true, &mut rng);
    let alg = h.algebra().clone();
    let result = vmm_expand(&h, 2).unwrap();
    for m in [1i64, 2, -1] {
        let sol = result.history.solution(1, m).unwrap();
        let got: Vec<EnvelopeExpr> = sol
            .iter()
            .map(|x| x.integrate_to_infinity().unwrap())
            .collect();
        let zero = vec![EnvelopeExpr::zero(); 3];
        let comp = |n: i64| h.component(n).unwrap_or(&zero);
        let mut want = vec![EnvelopeExpr::zero(); 3];
        let w = &gr((0, 1), (1, 1)) * &GaussRational::from_ratio(1, m * m * m);
        for (d, c) in want.iter_mut().zip(comp(m)) {
            *d = d.add(&c.ddt().scale(&w));
        }
        let comm = commutator(comp(0), comp(m), &alg).unwrap();
        let w = GaussRational::from_ratio(-1, m * m * m);
        for (d, c) in want.iter_mut().zip(&comm) {
            *d = d.add(&c.scale(&w));
        }
        for n in -2i64..=2 {
            if n == 0 || n == m || (m - n).abs() > 2 {
                continue;
            }
            let comm = commutator(comp(n), comp(m - n), &alg).unwrap();
            let frac = floquet_flow::scalar::ratio(1, m * m)
                - floquet_flow::scalar::ratio(1, n * n + (m - n) * (m - n));
            let w = &GaussRational::from_rational(frac)
                * &GaussRational::from_ratio(1, 2 * n);
            for (d, c) in want.iter_mut().zip(&comm) {
                *d = d.add(&c.scale(&w));
            }
        }
        for l in 0..3 {
            assert!(
                equal_sampled(&got[l], &want[l], 60, &mut rng),
                "harmonic {m}, generator {l}: got {} want {}",
                got[l],
                want[l]
            );
        }
    }
}

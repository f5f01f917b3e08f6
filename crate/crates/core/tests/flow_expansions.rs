//! Flow-engine checks against printed closed-form expansions and against
//! each other.

#![allow(clippy::needless_range_loop)] // generator-index loops read clearer

use floquet_flow::algebra::{builtin_dimer, builtin_su2, commutator};
use floquet_flow::flow::{
    discrete_expand, reference::reference_heff, toda_expand, toda_raw_flow_residual, vmm_expand,
};
use floquet_flow::fourier::FourierOperator;
use floquet_flow::scalar::{ratio, GaussRational};
use floquet_flow::symbolic::{
    equal_sampled, equal_sampled_linked, EnvelopeExpr, ExpPolyS, SPoly,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gr(re: (i64, i64), im: (i64, i64)) -> GaussRational {
    GaussRational::from_parts(re, im)
}

/// Rabi model in the rotating frame: harmonics 0 and +-2.
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
    // h^(2) = (g/2) e^{i phi} (sx + i sy)
    let half = gr((1, 2), (0, 1));
    let e_iphi = cosphi.add(&sinphi.mul_i());
    h.set_entry(2, "sx", g.mul(&e_iphi).scale(&half)).unwrap();
    h.set_entry(2, "sy", g.mul(&e_iphi).scale(&half.mul_i())).unwrap();
    h.hermitian_complete().unwrap();
    h
}

/// Spin-1/2 in an oscillating, slowly rotating field: h^(+-1) = Bx sx + By sy.
fn spin_half_operator() -> FourierOperator {
    let alg = builtin_su2();
    let mut h = FourierOperator::zero(alg, 1);
    h.set_entry(1, "sx", EnvelopeExpr::envelope("Bx", 0)).unwrap();
    h.set_entry(1, "sy", EnvelopeExpr::envelope("By", 0)).unwrap();
    h.hermitian_complete().unwrap();
    h
}

/// Driven dimer, hopping protocol: J = j0 + 2 j1(t) cos(omega t), onsite
/// splitting delta0 (the tau3 input coefficient), interaction U/2 on tau4.
fn dimer_hop_operator() -> FourierOperator {
    let alg = builtin_dimer();
    let mut h = FourierOperator::zero(alg, 1);
    h.set_entry(0, "tau1", EnvelopeExpr::param("j0")).unwrap();
    h.set_entry(0, "tau3", EnvelopeExpr::param("delta0")).unwrap();
    h.set_entry(0, "tau4", EnvelopeExpr::param("U").scale(&gr((1, 2), (0, 1))))
        .unwrap();
    h.set_entry(1, "tau1", EnvelopeExpr::envelope("j1", 0)).unwrap();
    h.hermitian_complete().unwrap();
    h
}

fn sampled_eq(a: &EnvelopeExpr, b: &EnvelopeExpr, rng: &mut ChaCha8Rng) -> bool {
    equal_sampled_linked(a, b, 100, &[("cosphi", "sinphi")], rng)
}

#[test]
fn diagonal_only_input_is_inert_for_every_engine() {
    let alg = builtin_su2();
    let mut h = FourierOperator::zero(alg, 0);
    h.set_entry(0, "sz", EnvelopeExpr::param("Delta")).unwrap();
    h.set_entry(0, "sx", EnvelopeExpr::envelope("g", 0)).unwrap();
    for result in [
        toda_expand(&h, 3).unwrap(),
        vmm_expand(&h, 2).unwrap(),
        discrete_expand(&h, 1).unwrap(),
    ] {
        assert_eq!(result.order(0), h.component(0).unwrap().as_slice());
        for i in 1..=result.h_eff.truncation() {
            assert!(
                result.order(i).iter().all(EnvelopeExpr::is_zero),
                "order {i} should vanish for a diagonal-only input"
            );
        }
    }
}

#[test]
fn rabi_second_order_matches_printed_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = rabi_operator();
    let result = toda_expand(&h, 2).unwrap();
    assert!(result.check_hermiticity());

    let g = EnvelopeExpr::envelope("g", 0);
    let cosphi = EnvelopeExpr::param("cosphi");
    let sinphi = EnvelopeExpr::param("sinphi");
    let delta = EnvelopeExpr::param("Delta");
    let alg = h.algebra();
    let ix = alg.label_index("sx").unwrap();
    let iy = alg.label_index("sy").unwrap();
    let iz = alg.label_index("sz").unwrap();

    // Order 0: the n = 0 component itself.
    assert!(sampled_eq(&result.order(0)[ix], &g.mul(&cosphi), &mut rng));
    assert!(sampled_eq(&result.order(0)[iy], &g.mul(&sinphi), &mut rng));
    assert!(sampled_eq(
        &result.order(0)[iz],
        &delta.scale(&gr((1, 2), (0, 1))),
        &mut rng
    ));
    // Order 1: g^2/2 on sigma_z only.
    assert!(result.order(1)[ix].is_zero());
    assert!(result.order(1)[iy].is_zero());
    assert!(sampled_eq(
        &result.order(1)[iz],
        &g.pow(2).scale(&gr((1, 2), (0, 1))),
        &mut rng
    ));
    // Order 2: -g^3 cos/4, -g^3 sin/4, -Delta g^2/4.
    assert!(sampled_eq(
        &result.order(2)[ix],
        &g.pow(3).mul(&cosphi).scale(&gr((-1, 4), (0, 1))),
        &mut rng
    ));
    assert!(sampled_eq(
        &result.order(2)[iy],
        &g.pow(3).mul(&sinphi).scale(&gr((-1, 4), (0, 1))),
        &mut rng
    ));
    assert!(sampled_eq(
        &result.order(2)[iz],
        &delta.mul(&g.pow(2)).scale(&gr((-1, 4), (0, 1))),
        &mut rng
    ));
}

#[test]
fn spin_half_expansion_through_fourth_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = spin_half_operator();
    let result = toda_expand(&h, 4).unwrap();
    let alg = h.algebra();
    let iz = alg.label_index("sz").unwrap();
    for order in [0usize, 1, 3] {
        assert!(
            result.order(order).iter().all(EnvelopeExpr::is_zero),
            "order {order} should vanish identically"
        );
    }
    let bx = |k: u32| EnvelopeExpr::envelope("Bx", k);
    let by = |k: u32| EnvelopeExpr::envelope("By", k);
    // Order 2: 2 (Bx By' - By Bx') sigma_z.
    let expect2 = bx(0)
        .mul(&by(1))
        .sub(&by(0).mul(&bx(1)))
        .scale(&gr((2, 1), (0, 1)));
    assert!(result.order(2)[0].is_zero() && result.order(2)[1].is_zero());
    assert!(sampled_eq(&result.order(2)[iz], &expect2, &mut rng));
    // Order 4: (1/2) Bx''' By - (1/2) Bx By'''
    //   + Bx' (2 Bx^2 By + (3/2) By'' + 2 By^3)
    //   - By' (2 Bx By^2 + (3/2) Bx'' + 2 Bx^3), all on sigma_z.
    let expect4 = bx(3)
        .mul(&by(0))
        .scale(&gr((1, 2), (0, 1)))
        .sub(&bx(0).mul(&by(3)).scale(&gr((1, 2), (0, 1))))
        .add(&bx(1).mul(
            &bx(0)
                .pow(2)
                .mul(&by(0))
                .scale(&gr((2, 1), (0, 1)))
                .add(&by(2).scale(&gr((3, 2), (0, 1))))
                .add(&by(0).pow(3).scale(&gr((2, 1), (0, 1)))),
        ))
        .sub(&by(1).mul(
            &bx(0)
                .mul(&by(0).pow(2))
                .scale(&gr((2, 1), (0, 1)))
                .add(&bx(2).scale(&gr((3, 2), (0, 1))))
                .add(&bx(0).pow(3).scale(&gr((2, 1), (0, 1)))),
        ));
    assert!(result.order(4)[0].is_zero() && result.order(4)[1].is_zero());
    assert!(
        sampled_eq(&result.order(4)[iz], &expect4, &mut rng),
        "fourth order mismatch:\n  got {}\n  want {}",
        result.order(4)[iz],
        expect4
    );
}

#[test]
fn dimer_hopping_second_order_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = dimer_hop_operator();
    let result = toda_expand(&h, 2).unwrap();
    let alg = h.algebra();
    let j1sq = EnvelopeExpr::envelope("j1", 0).pow(2);
    let delta0 = EnvelopeExpr::param("delta0");
    let u = EnvelopeExpr::param("U");

    // First order vanishes.
    assert!(result.order(1).iter().all(EnvelopeExpr::is_zero));
    let coeff = |label: &str| result.order(2)[alg.label_index(label).unwrap()].clone();
    let cases = [
        ("tau3", delta0.mul(&j1sq).scale(&gr((-4, 1), (0, 1)))),
        ("tau4", u.mul(&j1sq).scale(&gr((-2, 1), (0, 1)))),
        ("tau7", u.mul(&j1sq).scale(&gr((8, 1), (0, 1)))),
        ("tau8", u.mul(&j1sq).scale(&gr((-2, 1), (0, 1)))),
    ];
    for (label, expect) in cases {
        assert!(
            equal_sampled(&coeff(label), &expect, 100, &mut rng),
            "second-order {label} mismatch: got {}",
            coeff(label)
        );
    }
    for label in ["tau1", "tau2", "tau5", "tau6", "tau9"] {
        assert!(
            coeff(label).is_zero(),
            "second-order {label} should vanish, got {}",
            coeff(label)
        );
    }
}

#[test]
fn vmm_first_order_flow_solution_matches_closed_form() {
    // Random su(2) data with band 1; check H^(1)_1(s) against the printed
    // closed-form solution term for term.
    let alg = builtin_su2();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut h = FourierOperator::zero(alg.clone(), 1);
    let mut rand_expr = || {
        EnvelopeExpr::constant(gr(
            (rng.gen_range(-3i64..=3), 1),
            (rng.gen_range(-3i64..=3), 1),
        ))
    };
    for label in ["sx", "sy", "sz"] {
        h.set_entry(1, label, rand_expr()).unwrap();
    }
    let mut diag = vec![EnvelopeExpr::zero(); 3];
    for (l, e) in diag.iter_mut().enumerate() {
        let re = EnvelopeExpr::constant(gr((l as i64 - 1, 1), (0, 1)));
        *e = re;
    }
    h.set_component(0, diag).unwrap();
    h.hermitian_complete().unwrap();

    let result = vmm_expand(&h, 2).unwrap();
    let sol = result.history.solution(1, 1).unwrap();

    // Expected: n (i h'^(n) - [h^(0), h^(n)]) s e^{-n^2 s}
    //   + sum_{m != 0,n} [h^(m), h^(n-m)]/(2m) (e^{-n^2 s} - e^{-(m^2+(n-m)^2) s})
    // with n = 1; the only m in band is -1 -> n - m = 2 out of band, so the
    // second sum is empty here (static input: h' = 0 too, but keep the term).
    let h0 = h.component(0).unwrap();
    let h1 = h.component(1).unwrap();
    let dh1: Vec<EnvelopeExpr> = h1.iter().map(EnvelopeExpr::ddt).collect();
    let comm = commutator(h0, h1, &alg).unwrap();
    for l in 0..3 {
        let coeff = dh1[l].mul_i().sub(&comm[l]);
        let expected = ExpPolyS::term(
            ratio(1, 1),
            SPoly::from_coeffs(vec![EnvelopeExpr::zero(), coeff]),
        );
        assert_eq!(sol[l], expected, "generator {l}");
    }
}

#[test]
fn reference_formulas_agree_with_engines_on_random_su2() {
    let alg = builtin_su2();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for trial in 0..5 {
        let mut h = FourierOperator::zero(alg.clone(), 2);
        for n in 0..=2i64 {
            for label in ["sx", "sy", "sz"] {
                let c = gr(
                    (rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2)),
                    if n == 0 { (0, 1) } else { (rng.gen_range(-2i64..=2), 1) },
                );
                let e = EnvelopeExpr::constant(c)
                    .mul(&EnvelopeExpr::envelope("f", 0));
                h.set_entry(n, label, e).unwrap();
            }
        }
        h.hermitian_complete().unwrap();
        let toda = toda_expand(&h, 2).unwrap();
        for order in [1usize, 2] {
            let reference = reference_heff(order, &h).unwrap();
            let ref_vec = reference.component(0).unwrap();
            for l in 0..3 {
                assert!(
                    equal_sampled(&toda.order(order)[l], &ref_vec[l], 60, &mut rng),
                    "trial {trial}: order {order}, generator {l}:\n  toda {}\n  ref  {}",
                    toda.order(order)[l],
                    ref_vec[l]
                );
            }
        }
    }
    assert!(reference_heff(3, &rabi_operator()).is_err());
}

#[test]
fn engines_agree_through_second_order_and_continuous_gauges_match_at_third() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = rabi_operator();
    let toda = toda_expand(&h, 4).unwrap();
    let vmm = vmm_expand(&h, 3).unwrap();
    let disc1 = discrete_expand(&h, 1).unwrap();
    let disc2 = discrete_expand(&h, 2).unwrap();
    for order in 0..=2usize {
        for l in 0..3 {
            assert!(
                sampled_eq(&toda.order(order)[l], &vmm.order(order)[l], &mut rng),
                "toda vs vmm at order {order}, generator {l}"
            );
            assert!(
                sampled_eq(&toda.order(order)[l], &disc1.order(order)[l], &mut rng),
                "toda vs discrete(1) at order {order}, generator {l}"
            );
            assert!(
                sampled_eq(&toda.order(order)[l], &disc2.order(order)[l], &mut rng),
                "toda vs discrete(2) at order {order}, generator {l}"
            );
        }
    }
    // The two continuous generators share a gauge at least through order 3.
    for l in 0..3 {
        assert!(
            sampled_eq(&toda.order(3)[l], &vmm.order(3)[l], &mut rng),
            "toda vs vmm at order 3, generator {l}:\n  toda {}\n  vmm  {}",
            toda.order(3)[l],
            vmm.order(3)[l]
        );
    }
    // The discrete flow lands in a different gauge starting at order 3:
    // same spectrum (checked numerically elsewhere), different coefficients.
    // Keep that fact visible: if this ever starts agreeing, the engines
    // changed and the engine-agreement analysis needs revisiting.
    let ix = h.algebra().label_index("sx").unwrap();
    assert!(
        !sampled_eq(&toda.order(3)[ix], &disc2.order(3)[ix], &mut rng),
        "discrete(2) unexpectedly matches toda at order 3"
    );
}

#[test]
fn discrete_first_step_offdiagonal_recursion() {
    // After the first step, the grade-1 off-diagonal components must equal
    //   [h^(m), h^(0)]/m + sum_{k != 0,m} [h^(k), h^(m-k)]/(2k) + i h'^(m)/m,
    // which the step-1 generator exposes (divided by m once more).
    let h = rabi_operator();
    let alg = h.algebra().clone();
    let result = discrete_expand(&h, 2).unwrap();
    let floquet_flow::flow::FlowHistory::Discrete {
        ref step_generators,
        ..
    } = result.history
    else {
        panic!("discrete history expected")
    };
    let (grade, gen1) = &step_generators[1];
    assert_eq!(*grade, 2);
    let zero = vec![EnvelopeExpr::zero(); 3];
    let comp = |n: i64| h.component(n).unwrap_or(&zero);
    for m in [-2i64, -1, 1, 2] {
        let mut expect = commutator(comp(m), comp(0), &alg).unwrap();
        let w = GaussRational::from_ratio(1, m);
        for e in &mut expect {
            *e = e.scale(&w);
        }
        for k in -2i64..=2 {
            if k == 0 || k == m || (m - k).abs() > 2 {
                continue;
            }
            let comm = commutator(comp(k), comp(m - k), &alg).unwrap();
            let w = GaussRational::from_ratio(1, 2 * k);
            for (e, c) in expect.iter_mut().zip(&comm) {
                *e = e.add(&c.scale(&w));
            }
        }
        let w = GaussRational::from_ratio(1, m).mul_i();
        for (e, c) in expect.iter_mut().zip(comp(m)) {
            *e = e.add(&c.ddt().scale(&w));
        }
        // Generator divides by m again.
        let w = GaussRational::from_ratio(1, m);
        let got = gen1.component(m).unwrap();
        for l in 0..3 {
            assert_eq!(got[l], expect[l].scale(&w), "harmonic {m}, generator {l}");
        }
    }
}

#[test]
fn discrete_one_step_diagonal_update_matches_recursion() {
    // H^(0)_1(1) = sum_{m != 0} [h^(m), h^(-m)] / (2m)
    let alg = builtin_su2();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut h = FourierOperator::zero(alg.clone(), 2);
    for n in 1..=2i64 {
        for label in ["sx", "sy", "sz"] {
            let c = gr(
                (rng.gen_range(-2i64..=2), 1),
                (rng.gen_range(-2i64..=2), 1),
            );
            h.set_entry(n, label, EnvelopeExpr::constant(c)).unwrap();
        }
    }
    h.set_entry(0, "sz", EnvelopeExpr::param("Delta")).unwrap();
    h.hermitian_complete().unwrap();
    let result = discrete_expand(&h, 1).unwrap();
    let mut expect = vec![EnvelopeExpr::zero(); 3];
    for m in [-2i64, -1, 1, 2] {
        let comm = commutator(h.component(m).unwrap(), h.component(-m).unwrap(), &alg).unwrap();
        let w = GaussRational::from_ratio(1, 2 * m);
        for (d, c) in expect.iter_mut().zip(&comm) {
            *d = d.add(&c.scale(&w));
        }
    }
    for l in 0..3 {
        assert_eq!(result.order(1)[l], expect[l], "generator {l}");
    }
}

#[test]
fn discrete_super_convergence_between_consecutive_step_counts() {
    // Steps s and s+1 agree exactly through order 2s.
    let h = rabi_operator();
    let one = discrete_expand(&h, 1).unwrap();
    let two = discrete_expand(&h, 2).unwrap();
    for order in 0..=2usize {
        for l in 0..3 {
            assert_eq!(
                one.order(order)[l],
                two.order(order)[l],
                "order {order}, generator {l} must agree exactly"
            );
        }
    }
}

#[test]
fn toda_band_is_preserved_and_raw_equations_confirm_it() {
    let alg = builtin_su2();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for &n0 in &[1i64, 2] {
        let mut h = FourierOperator::zero(alg.clone(), n0);
        for n in 0..=n0 {
            for label in ["sx", "sy", "sz"] {
                let c = gr(
                    (rng.gen_range(-2i64..=2), 1),
                    if n == 0 { (0, 1) } else { (rng.gen_range(-2i64..=2), 1) },
                );
                let e = EnvelopeExpr::constant(c).mul(&EnvelopeExpr::envelope("f", 0));
                h.set_entry(n, label, e).unwrap();
            }
        }
        h.hermitian_complete().unwrap();
        let result = toda_expand(&h, 3).unwrap();
        // Structural: stored bands never exceed n0.
        for order in 0..=3usize {
            assert_eq!(result.history.band_at_order(order), Some(n0));
        }
        // Raw sign-weighted equations: residual zero inside the band,
        // and nothing is generated outside it.
        for order in 0..3usize {
            for n in -(n0 + 2)..=(n0 + 2) {
                let residual = toda_raw_flow_residual(&result, order, n).unwrap();
                for (l, r) in residual.iter().enumerate() {
                    assert!(
                        r.is_zero(),
                        "raw flow residual nonzero at order {order}, harmonic {n}, \
                         generator {l}: {r:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn double_sum_weighting_identity() {
    // A with f(n,m) = (m-n)/(n (m^2+n^2+(n-m)^2)) equals B with g = 1/(3nm)
    // on Hermitian harmonic data with band 3.
    let alg = builtin_su2();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _trial in 0..5 {
        let mut h = FourierOperator::zero(alg.clone(), 3);
        for n in 1..=3i64 {
            for label in ["sx", "sy", "sz"] {
                let c = gr(
                    (rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2)),
                    (rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2)),
                );
                h.set_entry(n, label, EnvelopeExpr::constant(c)).unwrap();
            }
        }
        h.hermitian_complete().unwrap();
        let zero = vec![EnvelopeExpr::zero(); 3];
        let comp = |n: i64| h.component(n).unwrap_or(&zero);
        let mut a = vec![EnvelopeExpr::zero(); 3];
        let mut b = vec![EnvelopeExpr::zero(); 3];
        for n in -3i64..=3 {
            if n == 0 {
                continue;
            }
            for m in -3i64..=3 {
                if m == 0 || m == n {
                    continue;
                }
                if (n - m).abs() > 3 {
                    continue;
                }
                let inner = commutator(comp(n - m), comp(m), &alg).unwrap();
                let outer = commutator(comp(-n), &inner, &alg).unwrap();
                let f = GaussRational::from_rational(
                    ratio(m - n, 1) / ratio(n * (m * m + n * n + (n - m) * (n - m)), 1),
                );
                let g = GaussRational::from_rational(ratio(1, 3 * n * m));
                for l in 0..3 {
                    a[l] = a[l].add(&outer[l].scale(&f));
                    b[l] = b[l].add(&outer[l].scale(&g));
                }
            }
        }
        for l in 0..3 {
            assert!(
                equal_sampled(&a[l], &b[l], 50, &mut rng),
                "A != B at generator {l}"
            );
            assert_eq!(a[l], b[l], "the identity should even hold exactly");
        }
    }
}

#[test]
fn correction_orders_are_traceless_in_representation() {
    // Orders >= 1 are nested commutators (and derivative commutators), so
    // their representation matrices are traceless even when the algebra has
    // traceful generators (dimer tau4, tau7).
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    for (h, nmax) in [(rabi_operator(), 4usize), (dimer_hop_operator(), 4)] {
        let alg = h.algebra().clone();
        let rep = alg.rep().unwrap();
        let result = toda_expand(&h, nmax).unwrap();
        let mut bindings = floquet_flow::symbolic::Bindings::new();
        for n in -h.band()..=h.band() {
            if let Some(v) = h.component(n) {
                for e in v {
                    for atom in e.atoms() {
                        bindings.set(atom, num_complex::Complex64::new(rng.gen_range(0.2..1.0), 0.0));
                    }
                }
            }
        }
        // Derivative atoms appear in higher orders; bind a generous range.
        for name in ["g", "j1", "Bx", "By"] {
            for k in 0..=6u32 {
                bindings.set_envelope(name, k, rng.gen_range(-1.0..1.0));
            }
        }
        for order in 1..=nmax {
            let mut m = floquet_flow::linalg::CMat::zeros(rep[0].dim());
            for (l, e) in result.order(order).iter().enumerate() {
                m.axpy(e.eval(&bindings).unwrap(), &rep[l]);
            }
            assert!(
                m.trace().norm() < 1e-12,
                "order {order} has trace {:?}",
                m.trace()
            );
            assert!(m.is_hermitian(1e-12), "order {order} not Hermitian in rep");
        }
    }
}

#[test]
fn printed_second_order_evaluates_to_hand_arithmetic() {
    // sigma_z coefficient of the second-order Rabi expansion at
    // Delta = 0.3, g = 0.2, hbar omega = 1:
    //   0.3/2 + 0.04/2 - 0.3*0.04/4 = 0.167.
    let h = rabi_operator();
    let result = toda_expand(&h, 2).unwrap();
    let alg = h.algebra();
    let iz = alg.label_index("sz").unwrap();
    let mut b = floquet_flow::symbolic::Bindings::new();
    b.set_param("Delta", 0.3);
    b.set_param("cosphi", 1.0);
    b.set_param("sinphi", 0.0);
    b.set_envelope("g", 0, 0.2);
    b.set_envelope("g", 1, 0.0);
    let total: f64 = (0..=2)
        .map(|i| result.order(i)[iz].eval(&b).unwrap().re)
        .sum();
    assert!((total - 0.167).abs() < 1e-15, "got {total}");
}

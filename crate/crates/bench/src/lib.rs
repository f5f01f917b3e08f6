//! Shared model builders for the benchmark targets.

use floquet_flow::algebra::{builtin_dimer, builtin_su2};
use floquet_flow::fourier::FourierOperator;
use floquet_flow::scalar::GaussRational;
use floquet_flow::symbolic::EnvelopeExpr;

fn gr(re: (i64, i64), im: (i64, i64)) -> GaussRational {
    GaussRational::from_parts(re, im)
}

/// Rabi model at phi = 0 with a time-dependent envelope.
pub fn rabi_operator() -> FourierOperator {
    let alg = builtin_su2();
    let g = EnvelopeExpr::envelope("g", 0);
    let delta = EnvelopeExpr::param("Delta");
    let mut h = FourierOperator::zero(alg, 2);
    h.set_entry(0, "sx", g.clone()).unwrap();
    h.set_entry(0, "sz", delta.scale(&gr((1, 2), (0, 1)))).unwrap();
    h.set_entry(2, "sx", g.scale(&gr((1, 2), (0, 1)))).unwrap();
    h.set_entry(2, "sy", g.scale(&gr((0, 1), (1, 2)))).unwrap();
    h.hermitian_complete().unwrap();
    h
}

/// Driven dimer, hopping protocol.
pub fn dimer_operator() -> FourierOperator {
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

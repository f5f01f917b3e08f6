//! Closed first- and second-order effective-Hamiltonian formulas, evaluated
//! directly from the input harmonics. These are test fixtures: an
//! implementation path independent of the flow solvers.

use crate::algebra::commutator;
use crate::error::{Error, Result};
use crate::fourier::FourierOperator;
use crate::scalar::{GaussRational, Rational};
use crate::symbolic::EnvelopeExpr;
use num_bigint::BigInt;

fn add_assign(dst: &mut [EnvelopeExpr], src: &[EnvelopeExpr], w: &GaussRational) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = d.add(&s.scale(w));
    }
}

fn rat(num: i64, den: i64) -> GaussRational {
    GaussRational::from_rational(Rational::new(BigInt::from(num), BigInt::from(den)))
}

/// First order: sum_{m >= 1} [h^(m), h^(-m)] / m  (times eps).
/// Second order:
///   sum_{n != 0} { ([h^(n), [h^(0), h^(-n)]] + i [h^(n)', h^(-n)]) / (2 n^2)
///     + sum_{m != 0, n} (m - n) / (n (m^2 + n^2 + (n-m)^2))
///         [h^(-n), [h^(n-m), h^(m)]] }  (times eps^2).
///
/// Only orders 1 and 2 exist in closed printed form; anything else errors.
pub fn reference_heff(order: usize, h: &FourierOperator) -> Result<FourierOperator> {
    let alg = h.algebra().clone();
    let dim = alg.dim();
    let n0 = h.band();
    let zero = vec![EnvelopeExpr::zero(); dim];
    let comp = |n: i64| h.component(n).unwrap_or(&zero);
    let mut out = vec![EnvelopeExpr::zero(); dim];
    match order {
        1 => {
            for m in 1..=n0 {
                let comm = commutator(comp(m), comp(-m), &alg)?;
                add_assign(&mut out, &comm, &rat(1, m));
            }
        }
        2 => {
            for n in -n0..=n0 {
                if n == 0 {
                    continue;
                }
                let inner = commutator(comp(0), comp(-n), &alg)?;
                let term = commutator(comp(n), &inner, &alg)?;
                add_assign(&mut out, &term, &rat(1, 2 * n * n));

                let dh: Vec<EnvelopeExpr> = comp(n).iter().map(EnvelopeExpr::ddt).collect();
                let dterm = commutator(&dh, comp(-n), &alg)?;
                add_assign(&mut out, &dterm, &rat(1, 2 * n * n).mul_i());

                for m in -n0..=n0 {
                    if m == 0 || m == n || (n - m).abs() > n0 {
                        continue;
                    }
                    let inner = commutator(comp(n - m), comp(m), &alg)?;
                    let term = commutator(comp(-n), &inner, &alg)?;
                    let denom = n * (m * m + n * n + (n - m) * (n - m));
                    add_assign(&mut out, &term, &rat(m - n, denom));
                }
            }
        }
        other => {
            return Err(Error::NotImplemented(format!(
                "reference formulas exist for orders 1 and 2, not {other}"
            )))
        }
    }
    let mut op = FourierOperator::zero(alg, 0);
    op.set_component(0, out)?;
    Ok(op)
}

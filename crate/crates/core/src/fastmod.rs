//! Fast amplitude modulation: the envelope itself oscillates at a frequency
//! Omega comparable to the drive, with rational ratio rho = Omega/omega.
//! Input is a double Fourier series h^(n,j) over drive harmonic n and
//! envelope harmonic j; the expansion is valid while J * rho < 1 (all flow
//! decay rates n^2 + rho j n stay positive) and is implemented to first
//! order, where closed rational coefficients exist.

use crate::algebra::{commutator, LieAlgebra};
use crate::error::{Error, Result};
use crate::fourier::{EpsSeries, FourierOperator};
use crate::scalar::{GaussRational, Rational};
use crate::symbolic::{Atom, Bindings, EnvelopeExpr};
use num_complex::Complex64 as C64;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Double-Fourier Hamiltonian: (drive harmonic n, envelope harmonic j) ->
/// coefficient vector of parameter-only expressions.
#[derive(Clone, Debug)]
pub struct DoubleFourierHamiltonian {
    alg: Arc<LieAlgebra>,
    band: i64,
    env_bound: i64,
    rho: Rational,
    entries: BTreeMap<(i64, i64), Vec<EnvelopeExpr>>,
}

/// First-order fast-modulation expansion output. `h_eff0` is the j-resolved
/// zeroth order (the n = 0 component itself); `h_eff1` maps the total
/// envelope harmonic j + j' to an exact-coefficient vector carrying one
/// power of 1/(hbar omega).
#[derive(Clone, Debug)]
pub struct FastExpansion {
    pub h_eff0: BTreeMap<i64, Vec<EnvelopeExpr>>,
    pub h_eff1: BTreeMap<i64, Vec<EnvelopeExpr>>,
}

/// First-order fast micromotion exponent: (m, j) -> S_1 component
/// -i h^(m,j) / (m + rho j), to be dressed with e^{i m (omega t + theta)}
/// e^{i j Omega t} / (hbar omega) at evaluation time.
#[derive(Clone, Debug)]
pub struct FastMicromotion {
    pub components: BTreeMap<(i64, i64), Vec<EnvelopeExpr>>,
}

impl DoubleFourierHamiltonian {
    pub fn new(alg: Arc<LieAlgebra>, band: i64, env_bound: i64, rho: Rational) -> Result<Self> {
        if band < 1 {
            return Err(Error::Model("fast-modulation input needs band >= 1".into()));
        }
        if env_bound < 0 || rho.is_negative() {
            return Err(Error::Model("envelope bound and frequency ratio must be nonnegative".into()));
        }
        Ok(Self {
            alg,
            band,
            env_bound,
            rho,
            entries: BTreeMap::new(),
        })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn env_bound(&self) -> i64 {
        self.env_bound
    }

    pub fn rho(&self) -> &Rational {
        &self.rho
    }

    pub fn set_entry(&mut self, n: i64, j: i64, coeffs: Vec<EnvelopeExpr>) -> Result<()> {
        if n.abs() > self.band || j.abs() > self.env_bound {
            return Err(Error::Model(format!(
                "entry ({n},{j}) outside bounds (band {}, envelope bound {})",
                self.band, self.env_bound
            )));
        }
        if coeffs.len() != self.alg.dim() {
            return Err(Error::LengthMismatch {
                expected: self.alg.dim(),
                got: coeffs.len(),
            });
        }
        for c in &coeffs {
            if c.atoms().iter().any(|a| matches!(a, Atom::Envelope { .. })) {
                return Err(Error::Model(
                    "fast-modulation coefficients must be constants or parameters; \
                     time dependence lives in the envelope harmonics"
                        .into(),
                ));
            }
        }
        self.entries.insert((n, j), coeffs);
        Ok(())
    }

    pub fn entry(&self, n: i64, j: i64) -> Option<&Vec<EnvelopeExpr>> {
        self.entries.get(&(n, j))
    }

    fn zero_vec(&self) -> Vec<EnvelopeExpr> {
        vec![EnvelopeExpr::zero(); self.alg.dim()]
    }

    /// Fill (-n,-j) entries by conjugation; verify when both sides present.
    pub fn hermitian_complete(&mut self) -> Result<()> {
        let keys: Vec<(i64, i64)> = self.entries.keys().copied().collect();
        for (n, j) in keys {
            let conj: Vec<EnvelopeExpr> =
                self.entries[&(n, j)].iter().map(EnvelopeExpr::conj).collect();
            match self.entries.get(&(-n, -j)) {
                None => {
                    self.entries.insert((-n, -j), conj);
                }
                Some(existing) => {
                    if *existing != conj {
                        return Err(Error::Model(format!(
                            "entries ({n},{j}) and ({},{}) are not Hermitian conjugates",
                            -n, -j
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// J * rho < 1; otherwise the first-order flow solutions do not decay.
    pub fn check_validity(&self) -> Result<()> {
        let j_rho = Rational::from_integer(self.env_bound.into()) * &self.rho;
        if j_rho >= Rational::from_integer(1.into()) {
            return Err(Error::ValidityViolation(format!(
                "envelope bound J = {} times frequency ratio {} is >= 1; \
                 the off-diagonal flow would not decay",
                self.env_bound, self.rho
            )));
        }
        // Structural consequence: every stored mode has n^2 + rho j n > 0.
        for (n, j) in self.entries.keys() {
            if *n == 0 {
                continue;
            }
            let rate = Rational::from_integer((n * n).into())
                + &self.rho * Rational::from_integer((j * n).into());
            assert!(rate > Rational::zero(), "mode ({n},{j}) would not decay");
        }
        Ok(())
    }

    /// Truncation remainder bound (J rho)^(lmax+1) for the derivative-form
    /// series.
    pub fn remainder_bound(&self, lmax: usize) -> f64 {
        let j_rho = (Rational::from_integer(self.env_bound.into()) * &self.rho)
            .to_f64()
            .unwrap_or(1.0);
        j_rho.powi(lmax as i32 + 1)
    }

    /// First-order effective Hamiltonian:
    ///   h_eff1 = (1/hbar omega) sum_{m>=1} sum_{j,j'}
    ///            [h^(m,j), h^(-m,j')] e^{i(j+j')Omega t} / (m + rho (j-j')/2).
    pub fn fast_expand(&self) -> Result<FastExpansion> {
        self.check_validity()?;
        let mut h_eff0 = BTreeMap::new();
        for j in -self.env_bound..=self.env_bound {
            if let Some(v) = self.entry(0, j) {
                if v.iter().any(|e| !e.is_zero()) {
                    h_eff0.insert(j, v.clone());
                }
            }
        }
        let mut h_eff1: BTreeMap<i64, Vec<EnvelopeExpr>> = BTreeMap::new();
        let half = Rational::new(1.into(), 2.into());
        for m in 1..=self.band {
            for j in -self.env_bound..=self.env_bound {
                let Some(u) = self.entry(m, j) else { continue };
                for jp in -self.env_bound..=self.env_bound {
                    let Some(v) = self.entry(-m, jp) else { continue };
                    let comm = commutator(u, v, &self.alg)?;
                    if comm.iter().all(EnvelopeExpr::is_zero) {
                        continue;
                    }
                    let denom = Rational::from_integer(m.into())
                        + &self.rho * Rational::from_integer((j - jp).into()) * &half;
                    let w = GaussRational::from_rational(
                        Rational::from_integer(1.into()) / denom,
                    );
                    let dst = h_eff1.entry(j + jp).or_insert_with(|| self.zero_vec());
                    for (d, c) in dst.iter_mut().zip(&comm) {
                        *d = d.add(&c.scale(&w));
                    }
                }
            }
        }
        h_eff1.retain(|_, v| v.iter().any(|e| !e.is_zero()));
        Ok(FastExpansion { h_eff0, h_eff1 })
    }

    /// Order-parameterized entry point; the expansion beyond first order is
    /// not covered by closed rational coefficients and is rejected.
    pub fn fast_expand_order(&self, order: usize) -> Result<FastExpansion> {
        match order {
            0 => {
                self.check_validity()?;
                let mut out = self.fast_expand()?;
                out.h_eff1.clear();
                Ok(out)
            }
            1 => self.fast_expand(),
            n => Err(Error::NotImplemented(format!(
                "fast-modulation expansion is implemented to first order; order {n} requested"
            ))),
        }
    }

    /// First-order micromotion exponent components
    ///   S_1^(m,j) = -i h^(m,j) / (m + rho j).
    pub fn fast_micromotion(&self) -> Result<FastMicromotion> {
        self.check_validity()?;
        let minus_i = GaussRational::from_parts((0, 1), (-1, 1));
        let mut components = BTreeMap::new();
        for ((m, j), v) in &self.entries {
            if *m == 0 || v.iter().all(EnvelopeExpr::is_zero) {
                continue;
            }
            let denom = Rational::from_integer((*m).into())
                + &self.rho * Rational::from_integer((*j).into());
            let w = &GaussRational::from_rational(Rational::from_integer(1.into()) / denom)
                * &minus_i;
            components.insert(
                (*m, *j),
                v.iter().map(|e| e.scale(&w)).collect::<Vec<_>>(),
            );
        }
        Ok(FastMicromotion { components })
    }
}

impl FastExpansion {
    /// Numeric value of h_eff1(t) per generator, with Omega the envelope
    /// frequency in the same units as t. Carries no 1/(hbar omega) factor.
    pub fn eval_h_eff1(
        &self,
        dim: usize,
        t: f64,
        cap_omega: f64,
        bindings: &Bindings,
    ) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (jtot, coeffs) in &self.h_eff1 {
            let phase = C64::from_polar(1.0, *jtot as f64 * cap_omega * t);
            for (o, c) in out.iter_mut().zip(coeffs) {
                *o += phase * c.eval(bindings)?;
            }
        }
        Ok(out)
    }
}

/// First-order effective Hamiltonian written in terms of the full harmonic
/// h^(m)(t) and its time derivatives, truncated at l <= lmax:
///   sum_{m != 0} (1/2m) sum_l (i/(2 omega m))^l
///     sum_r binom(l, r) (-1)^r [h^(m)(t)^(l-r), h^(-m)(t)^(r)].
///
/// Returned as a graded series: the term with l derivatives carries
/// (hbar omega)^{-(1+l)} and sits at order 1 + l.
pub fn derivative_form_heff1(h: &FourierOperator, lmax: usize) -> Result<EpsSeries> {
    let alg = h.algebra().clone();
    let dim = alg.dim();
    let n0 = h.band();
    let mut series = EpsSeries::zero(alg.clone(), 0, lmax + 1);
    // Precompute derivative stacks per harmonic.
    let mut derivs: BTreeMap<i64, Vec<Vec<EnvelopeExpr>>> = BTreeMap::new();
    for m in -n0..=n0 {
        if m == 0 {
            continue;
        }
        let Some(base) = h.component(m) else { continue };
        let mut stack = vec![base.clone()];
        for _ in 0..lmax {
            let last = stack.last().unwrap();
            stack.push(last.iter().map(EnvelopeExpr::ddt).collect());
        }
        derivs.insert(m, stack);
    }
    for m in -n0..=n0 {
        if m == 0 {
            continue;
        }
        let (Some(dm), Some(dmneg)) = (derivs.get(&m), derivs.get(&-m)) else {
            continue;
        };
        let half_inv_m = GaussRational::from_ratio(1, 2 * m);
        // (i/(2m))^l accumulates one factor per l.
        let step = GaussRational::from_ratio(1, 2 * m).mul_i();
        let mut l_factor = GaussRational::one();
        for l in 0..=lmax {
            if l > 0 {
                l_factor = &l_factor * &step;
            }
            let mut acc = vec![EnvelopeExpr::zero(); dim];
            let mut binom = GaussRational::one();
            for r in 0..=l {
                if r > 0 {
                    // C(l, r) = C(l, r-1) * (l - r + 1) / r
                    binom = &binom
                        * &GaussRational::from_ratio((l - r + 1) as i64, r as i64);
                }
                let sign = if r % 2 == 0 {
                    GaussRational::one()
                } else {
                    GaussRational::from_int(-1)
                };
                let comm = commutator(&dm[l - r], &dmneg[r], &alg)?;
                let w = &binom * &sign;
                for (a, c) in acc.iter_mut().zip(&comm) {
                    *a = a.add(&c.scale(&w));
                }
            }
            let w = &half_inv_m * &l_factor;
            let mut op = FourierOperator::zero(alg.clone(), 0);
            op.set_component(0, acc.iter().map(|e| e.scale(&w)).collect())?;
            series.add_to_order(1 + l, &op);
        }
    }
    Ok(series)
}

//! Exp-polynomials in the flow variable: finite sums P(s) e^{-a s} with
//! rational decay rates a >= 0 and polynomial coefficients in the envelope
//! ring. Every order of the flow equations is solved exactly inside this
//! class.

use super::EnvelopeExpr;
use crate::error::{Error, Result};
use crate::scalar::{GaussRational, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Polynomial in s with `EnvelopeExpr` coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SPoly {
    coeffs: Vec<EnvelopeExpr>,
}

impl SPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(e: EnvelopeExpr) -> Self {
        let mut p = Self { coeffs: vec![e] };
        p.normalize();
        p
    }

    pub fn from_coeffs(coeffs: Vec<EnvelopeExpr>) -> Self {
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(EnvelopeExpr::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> EnvelopeExpr {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[EnvelopeExpr] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(EnvelopeExpr::neg).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![EnvelopeExpr::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (j, a) in self.coeffs.iter().enumerate() {
            for (k, b) in other.coeffs.iter().enumerate() {
                coeffs[j + k] = coeffs[j + k].add(&a.mul(b));
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn scale_expr(&self, e: &EnvelopeExpr) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c.mul(e)).collect())
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x.scale(c)).collect())
    }

    /// Derivative with respect to s.
    pub fn dds(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&GaussRational::from_int(k as i64)))
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Derivative of the envelope coefficients with respect to t.
    pub fn ddt(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(EnvelopeExpr::ddt).collect())
    }

    /// Antiderivative in s vanishing at s = 0.
    pub fn integrate(&self) -> Self {
        let mut coeffs = vec![EnvelopeExpr::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.scale(&GaussRational::from_ratio(1, (k + 1) as i64)));
        }
        Self::from_coeffs(coeffs)
    }

    pub fn value_at_zero(&self) -> EnvelopeExpr {
        self.coeff(0)
    }
}

/// Finite sum of terms P_i(s) e^{-a_i s}; terms with equal decay rate are
/// merged, zero terms dropped.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ExpPolyS {
    terms: BTreeMap<Rational, SPoly>,
}

impl ExpPolyS {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single term P(s) e^{-a s}. Panics on negative decay rate.
    pub fn term(a: Rational, p: SPoly) -> Self {
        assert!(a >= Rational::zero(), "decay rate must be nonnegative");
        let mut x = Self::zero();
        x.add_term(a, p);
        x
    }

    /// A constant in s (decay rate zero, degree zero).
    pub fn constant(e: EnvelopeExpr) -> Self {
        Self::term(Rational::zero(), SPoly::constant(e))
    }

    /// e^{-a s} times a plain envelope expression.
    pub fn exp_term(a: Rational, e: EnvelopeExpr) -> Self {
        Self::term(a, SPoly::constant(e))
    }

    fn add_term(&mut self, a: Rational, p: SPoly) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&a) {
            Some(existing) => {
                *existing = existing.add(&p);
                if existing.is_zero() {
                    self.terms.remove(&a);
                }
            }
            None => {
                self.terms.insert(a, p);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &SPoly)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, p) in &other.terms {
            out.add_term(a.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, p)| (a.clone(), p.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                out.add_term(a + b, p.mul(q));
            }
        }
        out
    }

    pub fn scale_expr(&self, e: &EnvelopeExpr) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            out.add_term(a.clone(), p.scale_expr(e));
        }
        out
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            out.add_term(a.clone(), p.scale(c));
        }
        out
    }

    pub fn mul_i(&self) -> Self {
        self.scale(&GaussRational::i())
    }

    /// Derivative with respect to s: d/ds [P e^{-as}] = (P' - aP) e^{-as}.
    pub fn dds(&self) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            let ca = GaussRational::from_rational(a.clone());
            out.add_term(a.clone(), p.dds().add(&p.scale(&ca).neg()));
        }
        out
    }

    /// Derivative of the envelope coefficients with respect to t.
    pub fn ddt(&self) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            out.add_term(a.clone(), p.ddt());
        }
        out
    }

    /// Running integral from 0 to s, exact within the class.
    pub fn integrate_from_zero(&self) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            if a.is_zero() {
                out.add_term(Rational::zero(), p.integrate());
            } else {
                // integral_0^s P e^{-au} du = R(s) e^{-as} - R(0), where R is
                // the antiderivative coefficient d/ds [R e^{-as}] = P e^{-as}.
                let r = resolvent(p, &-a.clone());
                out.add_term(Rational::zero(), SPoly::constant(r.value_at_zero().neg()));
                out.add_term(a.clone(), r);
            }
        }
        out
    }

    /// The s -> infinity limit: the constant part at decay rate zero.
    /// Errors if a zero-rate term has polynomial degree > 0.
    pub fn s_limit(&self) -> Result<EnvelopeExpr> {
        match self.terms.get(&Rational::zero()) {
            None => Ok(EnvelopeExpr::zero()),
            Some(p) => {
                if p.degree().unwrap_or(0) > 0 {
                    Err(Error::Divergent(
                        "zero-decay term with polynomial growth in s".into(),
                    ))
                } else {
                    Ok(p.coeff(0))
                }
            }
        }
    }

    /// Exact integral over [0, infinity), using s^k e^{-as} -> k!/a^(k+1).
    /// Requires every term to decay (a > 0); a zero-rate term must vanish.
    pub fn integrate_to_infinity(&self) -> Result<EnvelopeExpr> {
        let mut total = EnvelopeExpr::zero();
        for (a, p) in &self.terms {
            if a.is_zero() {
                if !p.is_zero() {
                    return Err(Error::Divergent(
                        "nondecaying term under an infinite integral".into(),
                    ));
                }
                continue;
            }
            let mut factorial = Rational::from_integer(1.into());
            let mut a_pow = a.clone(); // a^(k+1)
            for (k, c) in p.coeffs().iter().enumerate() {
                if k > 0 {
                    factorial *= Rational::from_integer((k as i64).into());
                    a_pow *= a;
                }
                let w = GaussRational::from_rational(&factorial / &a_pow);
                total = total.add(&c.scale(&w));
            }
        }
        Ok(total)
    }

    /// Numeric evaluation at a given s (envelope atoms via bindings).
    pub fn eval_at(
        &self,
        s: f64,
        bindings: &super::Bindings,
    ) -> Result<num_complex::Complex64> {
        use num_traits::ToPrimitive;
        let mut total = num_complex::Complex64::new(0.0, 0.0);
        for (a, p) in &self.terms {
            let decay = (-a.to_f64().unwrap() * s).exp();
            let mut poly = num_complex::Complex64::new(0.0, 0.0);
            let mut s_pow = 1.0;
            for c in p.coeffs() {
                poly += c.eval(bindings)? * s_pow;
                s_pow *= s;
            }
            total += poly * decay;
        }
        Ok(total)
    }
}

/// R with d/ds [R e^{cs}] = P e^{cs}, i.e. R = sum_k (-1)^k P^(k) / c^(k+1).
/// `c` must be nonzero.
fn resolvent(p: &SPoly, c: &Rational) -> SPoly {
    assert!(!c.is_zero());
    let inv_c = GaussRational::from_rational(Rational::from_integer(1.into()) / c.clone());
    let mut out = SPoly::zero();
    let mut deriv = p.clone();
    let mut factor = inv_c.clone();
    loop {
        out = out.add(&deriv.scale(&factor));
        deriv = deriv.dds();
        if deriv.is_zero() {
            return out;
        }
        factor = &(-&factor) * &inv_c;
    }
}

/// Exact closed-form solution of dX/ds = -a X + rhs(s), X(0) = x0.
///
/// Nonresonant rhs terms map through the integrating factor; a rhs term whose
/// decay rate equals `a` raises the polynomial degree (s^k e^{-as} terms), as
/// in genuine resonances.
pub fn solve_linear_flow_ode(a: &Rational, rhs: &ExpPolyS, x0: &EnvelopeExpr) -> ExpPolyS {
    assert!(*a >= Rational::zero(), "decay rate must be nonnegative");
    let mut out = ExpPolyS::zero();
    if !x0.is_zero() {
        out.add_term(a.clone(), SPoly::constant(x0.clone()));
    }
    // X_particular(s) = e^{-as} * integral_0^s P(u) e^{(a-b)u} du per term.
    for (b, p) in rhs.iter() {
        if b == a {
            out.add_term(a.clone(), p.integrate());
        } else {
            let c = a - b; // nonzero
            let r = resolvent(p, &c);
            // e^{-as} (R(s) e^{cs} - R(0)) = R(s) e^{-bs} - R(0) e^{-as}
            out.add_term(b.clone(), r.clone());
            out.add_term(a.clone(), SPoly::constant(r.value_at_zero().neg()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn c(name: &str) -> EnvelopeExpr {
        EnvelopeExpr::param(name)
    }

    #[test]
    fn homogeneous_decay() {
        // a = n^2, rhs = 0, x0 = h  ->  h e^{-n^2 s}
        let sol = solve_linear_flow_ode(&ratio(4, 1), &ExpPolyS::zero(), &c("h"));
        assert_eq!(sol, ExpPolyS::exp_term(ratio(4, 1), c("h")));
    }

    #[test]
    fn resonant_forcing_raises_degree() {
        // a = 1, rhs = c e^{-s}, x0 = 0 -> c s e^{-s}
        let rhs = ExpPolyS::exp_term(ratio(1, 1), c("c"));
        let sol = solve_linear_flow_ode(&ratio(1, 1), &rhs, &EnvelopeExpr::zero());
        let expected = ExpPolyS::term(
            ratio(1, 1),
            SPoly::from_coeffs(vec![EnvelopeExpr::zero(), c("c")]),
        );
        assert_eq!(sol, expected);
    }

    #[test]
    fn nonresonant_forcing() {
        // a = 0 (pure quadrature), rhs = c e^{-2s}, x0 = 0
        // -> (c/2)(1 - e^{-2s});  s_limit = c/2
        let rhs = ExpPolyS::exp_term(ratio(2, 1), c("c"));
        let sol = solve_linear_flow_ode(&ratio(0, 1), &rhs, &EnvelopeExpr::zero());
        let expected = ExpPolyS::constant(c("c").scale(&GaussRational::from_ratio(1, 2))).add(
            &ExpPolyS::exp_term(ratio(2, 1), c("c").scale(&GaussRational::from_ratio(-1, 2))),
        );
        assert_eq!(sol, expected);
        assert_eq!(
            sol.s_limit().unwrap(),
            c("c").scale(&GaussRational::from_ratio(1, 2))
        );
    }

    #[test]
    fn ode_solution_satisfies_equation_symbolically() {
        // Self-check: d/ds X + a X - rhs == 0 exactly.
        let a = ratio(3, 1);
        let rhs = ExpPolyS::exp_term(ratio(3, 1), c("u"))
            .add(&ExpPolyS::exp_term(ratio(5, 1), c("v")))
            .add(&ExpPolyS::constant(c("w")));
        let x = solve_linear_flow_ode(&a, &rhs, &c("x0"));
        let ca = GaussRational::from_rational(a);
        let residual = x.dds().add(&x.scale(&ca)).sub(&rhs);
        assert!(residual.is_zero(), "residual = {residual:?}");
        // Initial condition.
        let at_zero: EnvelopeExpr = x
            .iter()
            .fold(EnvelopeExpr::zero(), |acc, (_, p)| acc.add(&p.coeff(0)));
        assert_eq!(at_zero, c("x0"));
    }

    #[test]
    fn s_limit_cases() {
        // (1 - e^{-2s}) c -> c
        let x = ExpPolyS::constant(c("c")).add(&ExpPolyS::exp_term(ratio(2, 1), c("c").neg()));
        assert_eq!(x.s_limit().unwrap(), c("c"));
        // s e^{-s} c -> 0
        let x = ExpPolyS::term(
            ratio(1, 1),
            SPoly::from_coeffs(vec![EnvelopeExpr::zero(), c("c")]),
        );
        assert!(x.s_limit().unwrap().is_zero());
        // s * c (no decay) -> divergent
        let x = ExpPolyS::term(
            ratio(0, 1),
            SPoly::from_coeffs(vec![EnvelopeExpr::zero(), c("c")]),
        );
        assert!(x.s_limit().is_err());
    }

    #[test]
    fn integral_to_infinity() {
        // e^{-m^2 s} -> 1/m^2 with m = 3
        let x = ExpPolyS::exp_term(ratio(9, 1), EnvelopeExpr::one());
        assert_eq!(
            x.integrate_to_infinity().unwrap(),
            EnvelopeExpr::from_ratio(1, 9)
        );
        // s e^{-2s} -> 1/4
        let x = ExpPolyS::term(
            ratio(2, 1),
            SPoly::from_coeffs(vec![EnvelopeExpr::zero(), EnvelopeExpr::one()]),
        );
        assert_eq!(
            x.integrate_to_infinity().unwrap(),
            EnvelopeExpr::from_ratio(1, 4)
        );
        // nondecaying constant -> divergent
        let x = ExpPolyS::constant(EnvelopeExpr::one());
        assert!(x.integrate_to_infinity().is_err());
    }

    #[test]
    fn nested_double_integral_matches_closed_form() {
        // integral_0^inf e^{-m^2 s1} integral_0^{s1} e^{-n^2 s2} ds2 ds1
        //   = 1/(m^2 n^2) - 1/(n^2 (m^2 + n^2)),  here m = 1, n = 2.
        let inner = ExpPolyS::exp_term(ratio(4, 1), EnvelopeExpr::one()).integrate_from_zero();
        let outer = ExpPolyS::exp_term(ratio(1, 1), EnvelopeExpr::one()).mul(&inner);
        let val = outer.integrate_to_infinity().unwrap();
        let expected = EnvelopeExpr::from_ratio(1, 4).sub(&EnvelopeExpr::from_ratio(1, 20));
        assert_eq!(val, expected);
    }

    #[test]
    fn decaying_integral_from_zero_has_constant_plus_tail() {
        let x = ExpPolyS::exp_term(ratio(2, 1), c("c"));
        let ix = x.integrate_from_zero();
        // (c/2)(1 - e^{-2s})
        assert_eq!(
            ix.s_limit().unwrap(),
            c("c").scale(&GaussRational::from_ratio(1, 2))
        );
        assert!(ix.dds().sub(&x).is_zero());
    }
}

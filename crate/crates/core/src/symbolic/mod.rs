//! Exact symbolic kernel: the differential ring of envelope expressions.
//!
//! An [`EnvelopeExpr`] is a normalized sum of monomials. Each monomial is a
//! Gaussian-rational coefficient times a multiset of atoms; an atom is either
//! a named real parameter or a named real time-function carrying a derivative
//! order (`g`, `g'`, `g''`, ...). Equality of canonical forms is structural
//! equality. Differentiation in time maps `f^(k) -> f^(k+1)` by the product
//! rule and kills parameters.

mod exppoly;
mod parse;
mod print;

pub use exppoly::{solve_linear_flow_ode, ExpPolyS, SPoly};
pub use parse::{parse_expr, AtomContext};
pub use print::{print_expr, print_expr_hbar};

use crate::error::{Error, Result};
use crate::scalar::GaussRational;
use num_complex::Complex64 as C64;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// A symbolic atom: real parameter or real envelope function with a
/// derivative order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Atom {
    Param(String),
    Envelope { name: String, deriv: u32 },
}

impl Atom {
    pub fn param(name: &str) -> Self {
        Atom::Param(name.to_string())
    }

    pub fn envelope(name: &str, deriv: u32) -> Self {
        Atom::Envelope {
            name: name.to_string(),
            deriv,
        }
    }

    /// Number of time-derivative ticks carried by this atom.
    pub fn deriv_order(&self) -> u32 {
        match self {
            Atom::Param(_) => 0,
            Atom::Envelope { deriv, .. } => *deriv,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Param(name) => write!(f, "{name}"),
            Atom::Envelope { name, deriv } => {
                write!(f, "{name}")?;
                for _ in 0..*deriv {
                    write!(f, "'")?;
                }
                Ok(())
            }
        }
    }
}

/// Multiset of atoms with multiplicities; the key of a monomial.
pub type Monomial = BTreeMap<Atom, u32>;

/// Canonicalized sum of monomials with Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EnvelopeExpr {
    terms: BTreeMap<Monomial, GaussRational>,
}

impl EnvelopeExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussRational::one())
    }

    pub fn constant(c: GaussRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Self { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(GaussRational::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(GaussRational::from_ratio(num, den))
    }

    pub fn atom(a: Atom) -> Self {
        let mut m = Monomial::new();
        m.insert(a, 1);
        let mut terms = BTreeMap::new();
        terms.insert(m, GaussRational::one());
        Self { terms }
    }

    pub fn param(name: &str) -> Self {
        Self::atom(Atom::param(name))
    }

    pub fn envelope(name: &str, deriv: u32) -> Self {
        Self::atom(Atom::envelope(name, deriv))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_part(&self) -> GaussRational {
        self.terms
            .get(&Monomial::new())
            .cloned()
            .unwrap_or_else(GaussRational::zero)
    }

    /// True if the expression is a constant (no atoms).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    fn insert_term(&mut self, mono: Monomial, coef: GaussRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing += &coef;
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coef);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut mono = m1.clone();
                for (a, k) in m2 {
                    *mono.entry(a.clone()).or_insert(0) += k;
                }
                out.insert_term(mono, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_i(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul_i()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Complex conjugation: conjugates coefficients, leaves atoms fixed
    /// (all atoms are real-valued by declaration).
    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.conj()))
                .collect(),
        }
    }

    /// Time derivative by the product rule. Parameters differentiate to
    /// zero; an envelope atom of order k maps to order k+1.
    pub fn ddt(&self) -> Self {
        let mut out = Self::zero();
        for (mono, coef) in &self.terms {
            for (atom, mult) in mono {
                let Atom::Envelope { name, deriv } = atom else {
                    continue;
                };
                // d/dt of atom^mult -> mult * atom^(mult-1) * atom'
                let mut m = mono.clone();
                if *mult == 1 {
                    m.remove(atom);
                } else {
                    m.insert(atom.clone(), mult - 1);
                }
                *m.entry(Atom::envelope(name, deriv + 1)).or_insert(0) += 1;
                let c = coef * &GaussRational::from_int(*mult as i64);
                out.insert_term(m, c);
            }
        }
        out
    }

    /// All atoms appearing in the expression.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut set = BTreeSet::new();
        for mono in self.terms.keys() {
            for atom in mono.keys() {
                set.insert(atom.clone());
            }
        }
        set
    }

    /// Largest derivative order appearing for any envelope atom.
    pub fn max_deriv_order(&self) -> u32 {
        self.atoms().iter().map(Atom::deriv_order).max().unwrap_or(0)
    }

    /// Exact-to-float evaluation under the given bindings.
    pub fn eval(&self, bindings: &Bindings) -> Result<C64> {
        let mut total = C64::new(0.0, 0.0);
        for (mono, coef) in &self.terms {
            let mut prod = coef.to_c64();
            for (atom, mult) in mono {
                let v = bindings.get(atom)?;
                prod *= v.powu(*mult);
            }
            total += prod;
        }
        Ok(total)
    }
}

/// Numeric values for atoms.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    values: HashMap<Atom, C64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, atom: Atom, value: C64) -> &mut Self {
        self.values.insert(atom, value);
        self
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> &mut Self {
        self.set(Atom::param(name), C64::new(value, 0.0))
    }

    pub fn set_envelope(&mut self, name: &str, deriv: u32, value: f64) -> &mut Self {
        self.set(Atom::envelope(name, deriv), C64::new(value, 0.0))
    }

    pub fn get(&self, atom: &Atom) -> Result<C64> {
        self.values
            .get(atom)
            .copied()
            .ok_or_else(|| Error::UnboundAtom(atom.to_string()))
    }
}

/// Canonical-form equality (structural).
pub fn equal(e1: &EnvelopeExpr, e2: &EnvelopeExpr) -> bool {
    e1 == e2
}

/// Draw a random real value for each atom in `atoms`, uniform in
/// [-2, -0.1] U [0.1, 2] to stay away from accidental zeros.
pub fn random_bindings<R: Rng>(atoms: &BTreeSet<Atom>, rng: &mut R) -> Bindings {
    let mut b = Bindings::new();
    for atom in atoms {
        let mag = rng.gen_range(0.1..2.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        b.set(atom.clone(), C64::new(sign * mag, 0.0));
    }
    b
}

fn close_rel(a: C64, b: C64, tol: f64) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() <= tol * scale
}

/// Sampled equality: evaluates both expressions at `trials` random real
/// bindings and compares to 1e-10 relative tolerance.
pub fn equal_sampled<R: Rng>(
    e1: &EnvelopeExpr,
    e2: &EnvelopeExpr,
    trials: usize,
    rng: &mut R,
) -> bool {
    let mut atoms = e1.atoms();
    atoms.extend(e2.atoms());
    for _ in 0..trials {
        let b = random_bindings(&atoms, rng);
        let (v1, v2) = (e1.eval(&b).unwrap(), e2.eval(&b).unwrap());
        if !close_rel(v1, v2, 1e-10) {
            return false;
        }
    }
    true
}

/// Sampled equality with trig-linked parameter pairs: for each `(c, s)` in
/// `linked`, a single angle x is drawn and the parameters are bound to
/// cos(x) and sin(x). All other atoms are bound independently.
pub fn equal_sampled_linked<R: Rng>(
    e1: &EnvelopeExpr,
    e2: &EnvelopeExpr,
    trials: usize,
    linked: &[(&str, &str)],
    rng: &mut R,
) -> bool {
    let mut atoms = e1.atoms();
    atoms.extend(e2.atoms());
    for _ in 0..trials {
        let mut b = random_bindings(&atoms, rng);
        for (c, s) in linked {
            let x: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            b.set_param(c, x.cos());
            b.set_param(s, x.sin());
        }
        let (v1, v2) = (e1.eval(&b).unwrap(), e2.eval(&b).unwrap());
        if !close_rel(v1, v2, 1e-10) {
            return false;
        }
    }
    true
}

impl fmt::Display for EnvelopeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_expr(self))
    }
}

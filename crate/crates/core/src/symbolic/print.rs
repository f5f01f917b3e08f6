//! Deterministic printing of envelope expressions in the model-file grammar.

use super::{EnvelopeExpr, Monomial};
use crate::scalar::GaussRational;
use num_traits::One;

fn mono_string(mono: &Monomial) -> String {
    let mut parts = Vec::new();
    for (atom, mult) in mono {
        let a = atom.to_string();
        if *mult == 1 {
            parts.push(a);
        } else {
            parts.push(format!("{a}^{mult}"));
        }
    }
    parts.join("*")
}

fn term_string(mono: &Monomial, coef: &GaussRational, hbar: bool) -> String {
    let mut factors = String::new();
    if hbar {
        let k: u32 = mono.iter().map(|(a, m)| a.deriv_order() * m).sum();
        if k == 1 {
            factors.push_str("hbar*");
        } else if k > 1 {
            factors.push_str(&format!("hbar^{k}*"));
        }
    }
    let atoms = mono_string(mono);
    if mono.is_empty() && factors.is_empty() {
        return coef.to_string();
    }
    let body = if factors.is_empty() {
        atoms
    } else if atoms.is_empty() {
        factors.trim_end_matches('*').to_string()
    } else {
        format!("{factors}{atoms}")
    };
    if coef.is_real() && coef.re.is_one() {
        body
    } else if coef.is_real() && (-coef.re.clone()).is_one() {
        format!("-{body}")
    } else {
        format!("{coef}*{body}")
    }
}

fn print_terms(e: &EnvelopeExpr, hbar: bool) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (mono, coef)) in e.iter().enumerate() {
        let t = term_string(mono, coef, hbar);
        if idx == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

/// Canonical textual form: monomials in the fixed total order, coefficients
/// as exact rationals.
pub fn print_expr(e: &EnvelopeExpr) -> String {
    print_terms(e, false)
}

/// Like [`print_expr`] but restores the explicit hbar carried by each time
/// derivative (one factor per tick), as in printed report output.
pub fn print_expr_hbar(e: &EnvelopeExpr) -> String {
    print_terms(e, true)
}

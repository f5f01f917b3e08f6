//! Independent numerical machinery: exact Schrodinger propagation, effective
//! plus micromotion evolution, the dense truncated-Kamiltonian flow oracle,
//! and the stroboscopic Hamiltonian via the monodromy logarithm.

mod fig1;
mod fs;
mod oracle;
mod propagate;

pub use fig1::{run_fig1, Fig1Data};
pub use fs::{fs_hamiltonian, fs_magnus_terms, monodromy};
pub use oracle::{dense_flow_oracle, OracleOutput, TruncatedKamiltonian};
pub use propagate::{evolve_full, propagate_exact, propagate_from, Trajectory};

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::fourier::FourierOperator;
use crate::linalg::CMat;
use crate::symbolic::{Atom, Bindings};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

/// Closed-form envelope functions with analytic derivatives to any order
/// (the model contract requires at least order 4).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvelopeFn {
    Constant {
        value: f64,
    },
    /// c0 + c1 t + c2 t^2 + ...
    Poly {
        coeffs: Vec<f64>,
    },
    /// amplitude * sin(frequency t + phase) + offset
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// amplitude * exp(-(t - center)^2 / (2 width^2))
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl EnvelopeFn {
    /// k-th derivative at time t.
    pub fn eval(&self, t: f64, k: u32) -> f64 {
        match self {
            EnvelopeFn::Constant { value } => {
                if k == 0 {
                    *value
                } else {
                    0.0
                }
            }
            EnvelopeFn::Poly { coeffs } => {
                let mut total = 0.0;
                for (p, c) in coeffs.iter().enumerate() {
                    let p = p as u32;
                    if p < k {
                        continue;
                    }
                    // c * p! / (p-k)! * t^(p-k)
                    let mut fact = 1.0;
                    for q in (p - k + 1)..=p {
                        fact *= q as f64;
                    }
                    total += c * fact * t.powi((p - k) as i32);
                }
                total
            }
            EnvelopeFn::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                if k == 0 {
                    amplitude * (frequency * t + phase).sin() + offset
                } else {
                    amplitude
                        * frequency.powi(k as i32)
                        * (frequency * t + phase + k as f64 * std::f64::consts::FRAC_PI_2).sin()
                }
            }
            EnvelopeFn::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let u = (t - center) / width;
                // f^(k) = A p_k(u) e^{-u^2/2} / w^k with p_0 = 1 and
                // p_{k+1} = p_k' - u p_k (probabilists' Hermite, alternating sign).
                let mut p = vec![1.0];
                for _ in 0..k {
                    let mut next = vec![0.0; p.len() + 1];
                    for (d, c) in p.iter().enumerate() {
                        if d > 0 {
                            next[d - 1] += c * d as f64;
                        }
                        next[d + 1] -= c;
                    }
                    p = next;
                }
                let poly: f64 = p
                    .iter()
                    .enumerate()
                    .map(|(d, c)| c * u.powi(d as i32))
                    .sum();
                amplitude * poly * (-0.5 * u * u).exp() / width.powi(k as i32)
            }
        }
    }
}

/// A fully bound model ready for numeric work: algebra with representation,
/// symbolic harmonics, parameter values, envelope callables, and the drive
/// setup (omega, theta, time interval).
#[derive(Clone, Debug)]
pub struct NumericModel {
    pub alg: Arc<LieAlgebra>,
    pub fourier: FourierOperator,
    pub params: HashMap<String, f64>,
    pub envelopes: HashMap<String, EnvelopeFn>,
    pub omega: f64,
    pub theta: f64,
    pub t_in: f64,
    pub t_fn: f64,
}

impl NumericModel {
    /// Bindings for all atoms appearing anywhere in the harmonics, with
    /// envelope derivatives up to `max_deriv`.
    pub fn bindings_at(&self, t: f64, max_deriv: u32) -> Bindings {
        let mut b = Bindings::new();
        for (name, value) in &self.params {
            b.set_param(name, *value);
        }
        for (name, f) in &self.envelopes {
            for k in 0..=max_deriv {
                b.set_envelope(name, k, f.eval(t, k));
            }
        }
        b
    }

    fn max_deriv_in_fourier(&self) -> u32 {
        let mut max = 0;
        for n in -self.fourier.band()..=self.fourier.band() {
            if let Some(v) = self.fourier.component(n) {
                for e in v {
                    max = max.max(e.max_deriv_order());
                }
            }
        }
        max
    }

    /// Hamiltonian matrix h(omega t + theta, t) in the representation.
    pub fn h_matrix(&self, t: f64) -> Result<CMat> {
        let bindings = self.bindings_at(t, self.max_deriv_in_fourier());
        let m = self
            .fourier
            .matrix_at(self.omega * t + self.theta, &bindings)?;
        let dev = m.hermiticity_deviation();
        if dev > 1e-12 * (1.0 + m.frobenius_norm()) {
            return Err(Error::InternalConsistency(format!(
                "Hamiltonian matrix not Hermitian at t = {t} (deviation {dev:.2e})"
            )));
        }
        Ok(m)
    }

    /// Dense matrices of the Fourier components h^(n)(t) at a fixed time.
    pub fn fourier_matrices(&self, t: f64) -> Result<Vec<(i64, CMat)>> {
        let bindings = self.bindings_at(t, self.max_deriv_in_fourier());
        let mut out = Vec::new();
        for n in -self.fourier.band()..=self.fourier.band() {
            if let Some(v) = self.fourier.component(n) {
                out.push((n, self.alg.vector_to_matrix(v, &bindings)?));
            }
        }
        Ok(out)
    }

    /// True when every envelope is constant (purely periodic drive).
    pub fn is_static_envelope(&self) -> bool {
        let needs_env = (-self.fourier.band()..=self.fourier.band()).any(|n| {
            self.fourier.component(n).is_some_and(|v| {
                v.iter().any(|e| {
                    e.atoms()
                        .iter()
                        .any(|a| matches!(a, Atom::Envelope { .. }))
                })
            })
        });
        !needs_env
            || self
                .envelopes
                .values()
                .all(|f| matches!(f, EnvelopeFn::Constant { .. }))
    }
}

/// Parallel map over independent parameter sets (each job single-threaded
/// and deterministic).
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

//! Harmonic-indexed operator data: Fourier operators (harmonic n -> length-L
//! coefficient vector over the algebra) and the inverse-frequency graded
//! series built from them.

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::symbolic::{Bindings, EnvelopeExpr};
use num_complex::Complex64 as C64;
use std::sync::Arc;

/// Map from harmonic index n in [-band, band] to a length-L coefficient
/// vector of envelope expressions. Hermiticity of the underlying operator
/// corresponds to component(-n) = conj(component(n)).
#[derive(Clone, Debug)]
pub struct FourierOperator {
    alg: Arc<LieAlgebra>,
    band: i64,
    comps: Vec<Vec<EnvelopeExpr>>,
}

impl FourierOperator {
    pub fn zero(alg: Arc<LieAlgebra>, band: i64) -> Self {
        assert!(band >= 0);
        let dim = alg.dim();
        Self {
            alg,
            band,
            comps: vec![vec![EnvelopeExpr::zero(); dim]; (2 * band + 1) as usize],
        }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    fn idx(&self, n: i64) -> usize {
        (n + self.band) as usize
    }

    pub fn in_band(&self, n: i64) -> bool {
        n.abs() <= self.band
    }

    /// Coefficient vector at harmonic n; None outside the band.
    pub fn component(&self, n: i64) -> Option<&Vec<EnvelopeExpr>> {
        if self.in_band(n) {
            Some(&self.comps[self.idx(n)])
        } else {
            None
        }
    }

    pub fn set_component(&mut self, n: i64, coeffs: Vec<EnvelopeExpr>) -> Result<()> {
        if coeffs.len() != self.alg.dim() {
            return Err(Error::LengthMismatch {
                expected: self.alg.dim(),
                got: coeffs.len(),
            });
        }
        if !self.in_band(n) {
            return Err(Error::InternalConsistency(format!(
                "write to harmonic {n} outside allocated band {}",
                self.band
            )));
        }
        let i = self.idx(n);
        self.comps[i] = coeffs;
        Ok(())
    }

    /// Set a single generator's coefficient at harmonic n, by label.
    pub fn set_entry(&mut self, n: i64, label: &str, e: EnvelopeExpr) -> Result<()> {
        let l = self
            .alg
            .label_index(label)
            .ok_or_else(|| Error::Model(format!("unknown generator label `{label}`")))?;
        if !self.in_band(n) {
            return Err(Error::InternalConsistency(format!(
                "write to harmonic {n} outside allocated band {}",
                self.band
            )));
        }
        let i = self.idx(n);
        self.comps[i][l] = e;
        Ok(())
    }

    pub fn add_to_component(&mut self, n: i64, coeffs: &[EnvelopeExpr]) -> Result<()> {
        if !self.in_band(n) {
            return Err(Error::InternalConsistency(format!(
                "write to harmonic {n} outside allocated band {}",
                self.band
            )));
        }
        let i = self.idx(n);
        for (dst, src) in self.comps[i].iter_mut().zip(coeffs) {
            *dst = dst.add(src);
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().flatten().all(EnvelopeExpr::is_zero)
    }

    pub fn nonzero_harmonics(&self) -> Vec<i64> {
        (-self.band..=self.band)
            .filter(|&n| {
                self.comps[self.idx(n)]
                    .iter()
                    .any(|e| !e.is_zero())
            })
            .collect()
    }

    /// Largest |n| with a nonzero component (0 for the zero operator).
    pub fn effective_band(&self) -> i64 {
        self.nonzero_harmonics()
            .iter()
            .map(|n| n.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let band = self.band.max(other.band);
        let mut out = Self::zero(self.alg.clone(), band);
        for n in -band..=band {
            let mut v = vec![EnvelopeExpr::zero(); self.alg.dim()];
            if let Some(a) = self.component(n) {
                for (dst, src) in v.iter_mut().zip(a) {
                    *dst = dst.add(src);
                }
            }
            if let Some(b) = other.component(n) {
                for (dst, src) in v.iter_mut().zip(b) {
                    *dst = dst.add(src);
                }
            }
            out.set_component(n, v).unwrap();
        }
        out
    }

    pub fn scale(&self, c: &crate::scalar::GaussRational) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            for e in comp {
                *e = e.scale(c);
            }
        }
        out
    }

    pub fn map<F: Fn(&EnvelopeExpr) -> EnvelopeExpr>(&self, f: F) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            for e in comp {
                *e = f(e);
            }
        }
        out
    }

    /// The operator's Hermitian conjugate: component(n) -> conj(component(-n)).
    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zero(self.alg.clone(), self.band);
        for n in -self.band..=self.band {
            let src = &self.comps[self.idx(-n)];
            out.set_component(n, src.iter().map(EnvelopeExpr::conj).collect())
                .unwrap();
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.conj_transpose()
    }

    /// Fill negative harmonics by conjugating the positive ones. If a
    /// negative harmonic is already nonzero it must match its conjugate
    /// partner exactly.
    pub fn hermitian_complete(&mut self) -> Result<()> {
        for n in 1..=self.band {
            let pos = self.comps[self.idx(n)].clone();
            let conj: Vec<EnvelopeExpr> = pos.iter().map(EnvelopeExpr::conj).collect();
            let neg = &self.comps[self.idx(-n)];
            if neg.iter().all(EnvelopeExpr::is_zero) {
                let i = self.idx(-n);
                self.comps[i] = conj;
            } else if *neg != conj {
                return Err(Error::Model(format!(
                    "harmonics +{n} and -{n} are both given but are not Hermitian conjugates"
                )));
            }
        }
        // The zero harmonic must be self-conjugate.
        let zero = &self.comps[self.idx(0)];
        let conj: Vec<EnvelopeExpr> = zero.iter().map(EnvelopeExpr::conj).collect();
        if *zero != conj {
            return Err(Error::Model(
                "harmonic 0 must have a self-conjugate coefficient vector".into(),
            ));
        }
        Ok(())
    }

    /// Assemble the representation matrix sum_n e^{i n phase} sum_l c_l G_l.
    pub fn matrix_at(&self, phase: f64, bindings: &Bindings) -> Result<CMat> {
        let rep_dim = self.alg.rep_dim().ok_or(Error::MissingRep)?;
        let mut out = CMat::zeros(rep_dim);
        for n in -self.band..=self.band {
            let m = self.alg.vector_to_matrix(&self.comps[self.idx(n)], bindings)?;
            let ph = C64::from_polar(1.0, n as f64 * phase);
            out.axpy(ph, &m);
        }
        Ok(out)
    }
}

impl PartialEq for FourierOperator {
    fn eq(&self, other: &Self) -> bool {
        let band = self.band.max(other.band);
        let dim = self.alg.dim();
        let zero = vec![EnvelopeExpr::zero(); dim];
        for n in -band..=band {
            let a = self.component(n).unwrap_or(&zero);
            let b = other.component(n).unwrap_or(&zero);
            if a != b {
                return false;
            }
        }
        true
    }
}

/// Graded container: order i holds the coefficient of eps^i, with
/// eps = 1/(hbar omega). Arithmetic that would overflow the truncation
/// order drops the excess and records that it did.
#[derive(Clone, Debug)]
pub struct EpsSeries {
    orders: Vec<FourierOperator>,
    truncation: usize,
    truncated: bool,
}

impl EpsSeries {
    pub fn zero(alg: Arc<LieAlgebra>, band: i64, truncation: usize) -> Self {
        Self {
            orders: (0..=truncation)
                .map(|_| FourierOperator::zero(alg.clone(), band))
                .collect(),
            truncation,
            truncated: false,
        }
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn was_truncated(&self) -> bool {
        self.truncated
    }

    pub fn order(&self, i: usize) -> &FourierOperator {
        &self.orders[i]
    }

    pub fn set_order(&mut self, i: usize, op: FourierOperator) {
        if i > self.truncation {
            self.truncated = true;
            return;
        }
        self.orders[i] = op;
    }

    pub fn add_to_order(&mut self, i: usize, op: &FourierOperator) {
        if i > self.truncation {
            self.truncated = true;
            return;
        }
        self.orders[i] = self.orders[i].add(op);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &FourierOperator)> {
        self.orders.iter().enumerate()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.truncated |= other.truncated;
        for (i, op) in other.iter() {
            if i > out.truncation {
                out.truncated = true;
                break;
            }
            out.add_to_order(i, op);
        }
        out
    }

    /// Evaluate sum_{i <= n_max} omega^{-i} * (order i at the given harmonic
    /// phase) as a representation matrix.
    pub fn matrix_at(
        &self,
        n_max: usize,
        omega: f64,
        phase: f64,
        bindings: &Bindings,
    ) -> Result<CMat> {
        let rep_dim = self
            .orders
            .first()
            .and_then(|op| op.algebra().rep_dim())
            .ok_or(Error::MissingRep)?;
        let mut out = CMat::zeros(rep_dim);
        let mut eps_pow = 1.0;
        for i in 0..=n_max.min(self.truncation) {
            let m = self.orders[i].matrix_at(phase, bindings)?;
            out.axpy(C64::new(eps_pow, 0.0), &m);
            eps_pow /= omega;
        }
        Ok(out)
    }
}

//! Expansion engines: transform the input Fourier Hamiltonian into the
//! graded effective Hamiltonian plus the flow-generator history needed for
//! micromotion.
//!
//! Internally hbar = 1 and the grading unit is eps = 1/omega: a coefficient
//! stored at order i carries an implicit eps^i. Each commutator under a
//! 1/(hbar omega) prefactor and each time derivative under an explicit
//! 1/omega lands one order higher than its sources; the decay terms produced
//! by the hbar omega N part of the quasienergy operator stay at their own
//! order. Printed output restores (hbar omega)^{-i} per order and one hbar
//! per derivative tick.

mod continuous;
mod discrete;
pub mod graded;
pub mod reference;

pub use continuous::{toda_raw_flow_residual, vmm_expand};
pub use discrete::discrete_expand;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::fourier::{EpsSeries, FourierOperator};
use crate::symbolic::ExpPolyS;
use std::sync::Arc;

/// Which generator drives the flow.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Engine {
    Toda,
    Vmm,
    Discrete,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Engine::Toda => write!(f, "toda"),
            Engine::Vmm => write!(f, "vmm"),
            Engine::Discrete => write!(f, "discrete"),
        }
    }
}

/// Per-order, per-harmonic solved flow components, plus what is needed to
/// rebuild the flow generator for the micromotion construction.
#[derive(Clone, Debug)]
pub enum FlowHistory {
    /// Continuous flows: orders 0.. of harmonic-indexed exp-polynomial
    /// solutions H^(n)_i(s, t). Index `sols[i]` covers |n| <= band(i).
    Continuous {
        engine: Engine,
        alg: Arc<LieAlgebra>,
        input_band: i64,
        sols: Vec<HarmonicSols>,
    },
    /// Discrete flow: the anti-Hermitian generator of each step, as a graded
    /// Fourier operator (step s produces a single grade s+1).
    Discrete {
        alg: Arc<LieAlgebra>,
        input_band: i64,
        step_generators: Vec<(usize, FourierOperator)>,
    },
}

/// Harmonic-indexed coefficient vectors of exp-polynomials.
#[derive(Clone, Debug)]
pub struct HarmonicSols {
    band: i64,
    comps: Vec<Vec<ExpPolyS>>,
}

impl HarmonicSols {
    pub fn zero(dim: usize, band: i64) -> Self {
        Self {
            band,
            comps: vec![vec![ExpPolyS::zero(); dim]; (2 * band + 1) as usize],
        }
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn get(&self, n: i64) -> Option<&Vec<ExpPolyS>> {
        if n.abs() <= self.band {
            Some(&self.comps[(n + self.band) as usize])
        } else {
            None
        }
    }

    pub fn set(&mut self, n: i64, v: Vec<ExpPolyS>) {
        assert!(n.abs() <= self.band, "harmonic {n} outside band {}", self.band);
        let i = (n + self.band) as usize;
        self.comps[i] = v;
    }
}

impl FlowHistory {
    pub fn engine(&self) -> Engine {
        match self {
            FlowHistory::Continuous { engine, .. } => *engine,
            FlowHistory::Discrete { .. } => Engine::Discrete,
        }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        match self {
            FlowHistory::Continuous { alg, .. } => alg,
            FlowHistory::Discrete { alg, .. } => alg,
        }
    }

    pub fn input_band(&self) -> i64 {
        match self {
            FlowHistory::Continuous { input_band, .. } => *input_band,
            FlowHistory::Discrete { input_band, .. } => *input_band,
        }
    }

    /// Number of stored off-diagonal orders (continuous) or steps (discrete).
    pub fn depth(&self) -> usize {
        match self {
            FlowHistory::Continuous { sols, .. } => sols.len(),
            FlowHistory::Discrete { step_generators, .. } => step_generators.len(),
        }
    }

    /// Solved flow component H^(n) at a given expansion order (continuous
    /// histories only).
    pub fn solution(&self, order: usize, n: i64) -> Option<&Vec<ExpPolyS>> {
        match self {
            FlowHistory::Continuous { sols, .. } => sols.get(order).and_then(|h| h.get(n)),
            FlowHistory::Discrete { .. } => None,
        }
    }

    /// Largest |n| stored at the given order.
    pub fn band_at_order(&self, order: usize) -> Option<i64> {
        match self {
            FlowHistory::Continuous { sols, .. } => sols.get(order).map(|h| h.band()),
            FlowHistory::Discrete { .. } => None,
        }
    }

    /// Component of the flow generator iS(s) at grade g >= 1 and harmonic
    /// m != 0, as a coefficient vector of exp-polynomials. The engine's
    /// harmonic weight (sgn m for Toda, m for VMM) is applied here; the
    /// overall eps carried by the 1/(hbar omega) prefactor is what raises
    /// the flow solution of order g-1 to generator grade g.
    pub fn generator_component(&self, grade: usize, m: i64) -> Option<Vec<ExpPolyS>> {
        if grade == 0 || m == 0 {
            return None;
        }
        match self {
            FlowHistory::Continuous { engine, sols, .. } => {
                let sol = sols.get(grade - 1)?.get(m)?;
                let weight = match engine {
                    Engine::Toda => crate::scalar::GaussRational::from_int(m.signum()),
                    Engine::Vmm => crate::scalar::GaussRational::from_int(m),
                    Engine::Discrete => unreachable!(),
                };
                Some(sol.iter().map(|x| x.scale(&weight)).collect())
            }
            FlowHistory::Discrete { .. } => None,
        }
    }
}

/// Diagnostics carried alongside every expansion result.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Set when series arithmetic dropped orders beyond the truncation.
    pub truncated: bool,
    /// Closure residual of the underlying algebra (0 for built-ins).
    pub closure_residual: f64,
    pub notes: Vec<String>,
}

/// Output of an expansion engine.
#[derive(Clone, Debug)]
pub struct ExpansionResult {
    pub engine: Engine,
    pub alg: Arc<LieAlgebra>,
    /// Effective Hamiltonian orders; each order is a band-0 Fourier operator.
    pub h_eff: EpsSeries,
    pub history: FlowHistory,
    pub diagnostics: Diagnostics,
}

impl ExpansionResult {
    pub fn order(&self, i: usize) -> &[crate::symbolic::EnvelopeExpr] {
        self.h_eff.order(i).component(0).expect("band-0 operator")
    }

    /// Every stored effective order must be a self-conjugate coefficient
    /// vector (Hermitian operator); orders >= 1 must be traceless in any
    /// faithful representation since they are nested commutators.
    pub fn check_hermiticity(&self) -> bool {
        self.h_eff.iter().all(|(_, op)| op.is_hermitian())
    }
}

/// Validate expansion input shared by all engines.
pub(crate) fn validate_input(h: &FourierOperator) -> Result<()> {
    if !h.is_hermitian() {
        return Err(Error::Model(
            "input Fourier operator is not Hermitian: component(-n) must equal conj(component(n))"
                .into(),
        ));
    }
    Ok(())
}

/// Toda-generator expansion to order `n_max` (banded flow equations; the
/// stored spectrum never exceeds the input band).
pub fn toda_expand(h: &FourierOperator, n_max: usize) -> Result<ExpansionResult> {
    continuous::expand(h, n_max, Engine::Toda)
}

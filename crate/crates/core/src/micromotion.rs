//! Micromotion exponent S = S_1 + S_2 + ... from the flow-generator history.
//!
//! For continuous flows the net transformation is a flow-ordered exponential
//! over s (larger s to the left), whose logarithm is built with the Magnus
//! recursion; every integrand is an exp-polynomial, so the nested integrals
//! are exact. For the discrete flow the step exponentials are combined by
//! the graded Baker-Campbell-Hausdorff flow dZ/dt = sum_k (B_k/k!) ad_Z^k(A)
//! integrated exactly over t-polynomials.

use crate::algebra::{commutator, LieAlgebra};
use crate::error::{Error, Result};
use crate::flow::{FlowHistory, HarmonicSols};
use crate::fourier::FourierOperator;
use crate::linalg::CMat;
use crate::scalar::{GaussRational, Rational};
use crate::symbolic::{Bindings, EnvelopeExpr, ExpPolyS};
use num_bigint::BigInt;
use std::sync::Arc;

/// Bernoulli numbers B_0.. with the B_1 = -1/2 convention.
fn bernoulli(k: usize) -> GaussRational {
    let table: [(i64, i64); 11] = [
        (1, 1),
        (-1, 2),
        (1, 6),
        (0, 1),
        (-1, 30),
        (0, 1),
        (1, 42),
        (0, 1),
        (-1, 30),
        (0, 1),
        (5, 66),
    ];
    let (n, d) = table[k];
    GaussRational::from_rational(Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn inv_factorial(k: usize) -> GaussRational {
    let mut f = Rational::from_integer(1.into());
    for j in 1..=k {
        f *= Rational::from_integer((j as i64).into());
    }
    GaussRational::from_rational(Rational::from_integer(1.into()) / f)
}

/// Per order k, the Fourier operator S_k (harmonic m -> coefficient vector);
/// the extended-space shift P_m becomes the phase factor e^{i m (omega t +
/// theta)} at evaluation time.
#[derive(Clone, Debug)]
pub struct MicromotionSeries {
    alg: Arc<LieAlgebra>,
    orders: Vec<FourierOperator>,
}

impl MicromotionSeries {
    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn order(&self, k: usize) -> &FourierOperator {
        &self.orders[k]
    }

    /// Hermiticity of the reconstructed S at every order:
    /// component(-m) = conj(component(m)).
    pub fn is_hermitian(&self) -> bool {
        self.orders.iter().all(FourierOperator::is_hermitian)
    }

    /// Assemble the Hermitian matrix S(omega t + theta, t) in the
    /// representation, truncated at `n_max` orders.
    pub fn matrix_at(
        &self,
        n_max: usize,
        omega: f64,
        t: f64,
        theta: f64,
        bindings: &Bindings,
    ) -> Result<CMat> {
        let rep_dim = self.alg.rep_dim().ok_or(Error::MissingRep)?;
        let mut out = CMat::zeros(rep_dim);
        let phase = omega * t + theta;
        let mut eps_pow = 1.0;
        for k in 0..=n_max.min(self.max_order()) {
            let m = self.orders[k].matrix_at(phase, bindings)?;
            out.axpy(num_complex::Complex64::new(eps_pow, 0.0), &m);
            eps_pow /= omega;
        }
        Ok(out)
    }
}

/// Evaluates the micromotion unitary U_micro = exp(-i S) in the matrix
/// representation; unitary by construction (Hermitian eigendecomposition).
pub fn micromotion_unitary(
    series: &MicromotionSeries,
    n_max: usize,
    omega: f64,
    t: f64,
    theta: f64,
    bindings: &Bindings,
) -> Result<CMat> {
    let s = series.matrix_at(n_max, omega, t, theta, bindings)?;
    let dev = s.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::InternalConsistency(format!(
            "micromotion exponent not Hermitian (deviation {dev:.2e})"
        )));
    }
    Ok(s.expm_i_hermitian(-1.0))
}

// ---------------------------------------------------------------------------
// Graded s-dependent operators for the continuous Magnus expansion
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct GradedS {
    dim: usize,
    band: i64,
    grades: Vec<HarmonicSols>,
}

impl GradedS {
    fn zero(dim: usize, band: i64, max_grade: usize) -> Self {
        Self {
            dim,
            band,
            grades: (0..=max_grade).map(|_| HarmonicSols::zero(dim, band)).collect(),
        }
    }

    fn max_grade(&self) -> usize {
        self.grades.len() - 1
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for g in 0..=self.max_grade() {
            for n in -self.band..=self.band {
                let a = out.grades[g].get(n).unwrap().clone();
                let b = other.grades[g].get(n).unwrap();
                let sum: Vec<ExpPolyS> = a.iter().zip(b).map(|(x, y)| x.add(y)).collect();
                out.grades[g].set(n, sum);
            }
        }
        out
    }

    fn scale(&self, c: &GaussRational) -> Self {
        let mut out = self.clone();
        for g in 0..=self.max_grade() {
            for n in -self.band..=self.band {
                let v: Vec<ExpPolyS> =
                    out.grades[g].get(n).unwrap().iter().map(|x| x.scale(c)).collect();
                out.grades[g].set(n, v);
            }
        }
        out
    }

    fn bracket(&self, other: &Self, alg: &LieAlgebra) -> Result<Self> {
        let mut out = Self::zero(self.dim, self.band, self.max_grade());
        for g1 in 0..=self.max_grade() {
            for g2 in 0..=other.max_grade() {
                let g = g1 + g2;
                if g > out.max_grade() {
                    continue;
                }
                for m1 in -self.band..=self.band {
                    let u = self.grades[g1].get(m1).unwrap();
                    if u.iter().all(ExpPolyS::is_zero) {
                        continue;
                    }
                    for m2 in -other.band..=other.band {
                        let m = m1 + m2;
                        if m.abs() > out.band {
                            continue;
                        }
                        let v = other.grades[g2].get(m2).unwrap();
                        if v.iter().all(ExpPolyS::is_zero) {
                            continue;
                        }
                        let comm = commutator(u, v, alg)?;
                        let dst = out.grades[g].get(m).unwrap().clone();
                        let sum: Vec<ExpPolyS> =
                            dst.iter().zip(&comm).map(|(x, y)| x.add(y)).collect();
                        out.grades[g].set(m, sum);
                    }
                }
            }
        }
        Ok(out)
    }

    fn integrate_from_zero(&self) -> Self {
        let mut out = self.clone();
        for g in 0..=self.max_grade() {
            for n in -self.band..=self.band {
                let v: Vec<ExpPolyS> = out.grades[g]
                    .get(n)
                    .unwrap()
                    .iter()
                    .map(ExpPolyS::integrate_from_zero)
                    .collect();
                out.grades[g].set(n, v);
            }
        }
        out
    }

    /// s -> infinity limits, per grade, as Fourier operators.
    fn s_limits(&self, alg: &Arc<LieAlgebra>) -> Result<Vec<FourierOperator>> {
        let mut out = Vec::with_capacity(self.grades.len());
        for h in &self.grades {
            let mut op = FourierOperator::zero(alg.clone(), self.band);
            for n in -self.band..=self.band {
                let lim: Result<Vec<EnvelopeExpr>> =
                    h.get(n).unwrap().iter().map(|x| x.s_limit()).collect();
                op.set_component(n, lim?)?;
            }
            out.push(op);
        }
        Ok(out)
    }
}

/// Build the flow generator A(s) = iS(s) as a graded s-dependent operator
/// from a continuous history: grade g holds the engine-weighted flow
/// solution of order g-1.
fn generator_from_history(history: &FlowHistory, n_max: usize) -> Result<GradedS> {
    let alg = history.algebra();
    let dim = alg.dim();
    let n0 = history.input_band().max(1);
    let band = n0 * n_max.max(1) as i64;
    let mut a = GradedS::zero(dim, band, n_max);
    for g in 1..=n_max {
        let Some(order_band) = history.band_at_order(g - 1) else {
            return Err(Error::Model(format!(
                "history does not contain flow order {} needed for micromotion order {n_max}",
                g - 1
            )));
        };
        for m in -order_band..=order_band {
            if m == 0 {
                continue;
            }
            if let Some(v) = history.generator_component(g, m) {
                a.grades[g].set(m, v);
            }
        }
    }
    Ok(a)
}

/// Magnus terms over the flow-ordered exponential, truncated at total grade
/// `n_max`; nesting depth d contributes at grade >= d since every generator
/// is at least first order.
fn magnus_continuous(history: &FlowHistory, n_max: usize) -> Result<GradedS> {
    let alg = history.algebra().clone();
    let a = generator_from_history(history, n_max)?;
    let mut omega: Vec<GradedS> = Vec::with_capacity(n_max + 1);
    omega.push(GradedS::zero(a.dim, a.band, n_max)); // unused slot 0
    omega.push(a.integrate_from_zero());
    // s_table[n][j] = S_n^(j), 1 <= j < n.
    let mut s_table: Vec<Vec<GradedS>> = vec![Vec::new(), Vec::new()];
    for n in 2..=n_max {
        let mut row: Vec<GradedS> = Vec::with_capacity(n);
        // j = 1: [Omega_{n-1}, A]
        row.push(omega[n - 1].bracket(&a, &alg)?);
        for j in 2..n {
            let mut acc = GradedS::zero(a.dim, a.band, n_max);
            for m in 1..=(n - j) {
                acc = acc.add(&omega[m].bracket(&s_table[n - m][j - 2], &alg)?);
            }
            row.push(acc);
        }
        let mut omega_n = GradedS::zero(a.dim, a.band, n_max);
        for (idx, s_nj) in row.iter().enumerate() {
            let j = idx + 1;
            let b = bernoulli(j);
            if b.is_zero() {
                continue;
            }
            let w = &b * &inv_factorial(j);
            omega_n = omega_n.add(&s_nj.integrate_from_zero().scale(&w));
        }
        s_table.push(row);
        omega.push(omega_n);
    }
    let mut total = GradedS::zero(a.dim, a.band, n_max);
    for om in omega.iter().skip(1) {
        total = total.add(om);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Discrete path: graded BCH over t-polynomials
// ---------------------------------------------------------------------------

use crate::flow::graded::{ad_graded, GradedOp};

/// t-polynomial with graded Fourier-operator coefficients.
type TPoly = Vec<GradedOp>;

fn tp_add(a: &TPoly, b: &TPoly, alg: &Arc<LieAlgebra>, band: i64, max_grade: usize) -> TPoly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let zero = GradedOp::zero(alg, band, max_grade);
            let x = a.get(k).unwrap_or(&zero);
            let y = b.get(k).unwrap_or(&zero);
            x.add(y)
        })
        .collect()
}

fn tp_bracket(a: &TPoly, b: &TPoly, alg: &LieAlgebra) -> Result<TPoly> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: TPoly = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let term = ad_graded(x, y, alg)?;
            while out.len() <= i + j {
                out.push(GradedOp::zero(
                    x.grades[0].algebra(),
                    term.band(),
                    term.max_grade(),
                ));
            }
            out[i + j] = out[i + j].add(&term);
        }
    }
    Ok(out)
}

fn tp_integrate(a: &TPoly) -> TPoly {
    let mut out: TPoly = Vec::with_capacity(a.len() + 1);
    if a.is_empty() {
        return out;
    }
    out.push(GradedOp::zero(
        a[0].grades[0].algebra(),
        a[0].band(),
        a[0].max_grade(),
    ));
    for (k, x) in a.iter().enumerate() {
        out.push(x.scale(&GaussRational::from_ratio(1, (k + 1) as i64)));
    }
    out
}

fn tp_eval_one(a: &TPoly, alg: &Arc<LieAlgebra>, band: i64, max_grade: usize) -> GradedOp {
    let mut acc = GradedOp::zero(alg, band, max_grade);
    for x in a {
        acc = acc.add(x);
    }
    acc
}

/// ln(e^A e^{Z0}) in the graded truncated Lie algebra, by exact Picard
/// iteration of dZ/dt = sum_k (B_k/k!) ad_Z^k(A), Z(0) = Z0.
fn bch_combine(a: &GradedOp, z0: &GradedOp, alg: &Arc<LieAlgebra>) -> Result<GradedOp> {
    let max_grade = a.max_grade();
    let band = a.band().max(z0.band()) * (max_grade as i64).max(1);
    let z0_tp: TPoly = vec![z0.clone()];
    let a_tp: TPoly = vec![a.clone()];
    let mut z = z0_tp.clone();
    for _ in 0..=max_grade {
        // Phi(Z) = sum_j (B_j / j!) ad_Z^j (A)
        let mut phi = a_tp.clone();
        let mut nested = a_tp.clone();
        for j in 1..=max_grade {
            nested = tp_bracket(&z, &nested, alg)?;
            let b = bernoulli(j);
            if b.is_zero() {
                continue;
            }
            let w = &b * &inv_factorial(j);
            let scaled: TPoly = nested.iter().map(|x| x.scale(&w)).collect();
            phi = tp_add(&phi, &scaled, alg, band, max_grade);
        }
        z = tp_add(&z0_tp, &tp_integrate(&phi), alg, band, max_grade);
    }
    Ok(tp_eval_one(&z, alg, band, max_grade))
}

fn magnus_discrete(
    alg: &Arc<LieAlgebra>,
    steps: &[(usize, FourierOperator)],
    n_max: usize,
) -> Result<GradedOp> {
    let band = steps
        .iter()
        .map(|(_, op)| op.band())
        .max()
        .unwrap_or(1)
        .max(1)
        * (n_max as i64).max(1);
    let mut z = GradedOp::zero(alg, band, n_max);
    for (idx, (grade, gen)) in steps.iter().enumerate() {
        if *grade > n_max {
            break;
        }
        let mut a = GradedOp::zero(alg, band, n_max);
        a.grades[*grade] = a.grades[*grade].add(gen);
        if idx == 0 {
            z = a;
        } else {
            z = bch_combine(&a, &z, alg)?;
        }
    }
    Ok(z)
}

/// Builds the micromotion exponent S through order `n_max` from a flow
/// history: the single flow integral, the half double-bracket integral, and
/// the deeper Magnus nests the requested order requires (nesting depth is
/// bounded by `n_max` since every generator is at least first order).
pub fn magnus_s(history: &FlowHistory, n_max: usize) -> Result<MicromotionSeries> {
    let alg = history.algebra().clone();
    let minus_i = GaussRational::from_parts((0, 1), (-1, 1));
    let orders: Vec<FourierOperator> = match history {
        FlowHistory::Continuous { .. } => {
            // Generator grade g needs the solved off-diagonal flow order
            // g - 1; an expansion to order N solves off-diagonals through
            // N - 1, so micromotion order n_max needs an expansion of at
            // least the same order.
            if history.depth() <= n_max {
                return Err(Error::Model(format!(
                    "history from an order-{} expansion supports micromotion through \
                     order {}; order {n_max} requested",
                    history.depth().saturating_sub(1),
                    history.depth().saturating_sub(1),
                )));
            }
            let total = magnus_continuous(history, n_max)?;
            let limits = total.s_limits(&alg).map_err(|e| match e {
                Error::Divergent(msg) => Error::InternalConsistency(format!(
                    "divergent Magnus integral: {msg}"
                )),
                other => other,
            })?;
            limits.into_iter().map(|op| op.scale(&minus_i)).collect()
        }
        FlowHistory::Discrete {
            alg: _,
            input_band: _,
            step_generators,
        } => {
            // s' steps leave an off-diagonal residue at grade s', so the
            // combined exponent is trustworthy through order s' only (the
            // diagonal converges faster, through 2 s').
            if step_generators.len() < n_max {
                return Err(Error::Model(format!(
                    "discrete history with {} steps supports micromotion through \
                     order {}; order {n_max} requested",
                    step_generators.len(),
                    step_generators.len(),
                )));
            }
            let z = magnus_discrete(&alg, step_generators, n_max)?;
            z.grades.iter().map(|op| op.scale(&minus_i)).collect()
        }
    };
    Ok(MicromotionSeries { alg, orders })
}

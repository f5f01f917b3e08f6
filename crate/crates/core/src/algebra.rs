//! Finite operator algebras: generator bases, exact structure constants,
//! commutators of coefficient vectors, and construction from explicit matrix
//! representations.
//!
//! Structure constants are stored as exact Gaussian rationals. The built-in
//! algebras (su(2) Pauli and the two-boson dimer tau set) are constructed by
//! exact arithmetic in the field Q(i, sqrt2), so their gamma tensors are
//! exact and their closure residuals are exactly zero.

use crate::error::{Error, Result};
use crate::linalg::{solve_real, CMat};
use crate::scalar::{rationalize, GaussRational, Rational};
use crate::symbolic::{EnvelopeExpr, ExpPolyS};
use num_complex::Complex64 as C64;
use num_traits::Zero;
use std::sync::Arc;

/// Hermiticity tolerance for user-supplied representations.
const HERMITICITY_TOL: f64 = 1e-12;

/// A finite Lie algebra with Hermitian generators G_l and exact structure
/// constants gamma[l][m][n] defined by [G_l, G_m] = sum_n gamma_lmn G_n.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    labels: Vec<String>,
    gamma: Vec<GaussRational>,
    /// Nonzero (n, gamma_lmn) per (l, m), flattened l * dim + m.
    table: Vec<Vec<(usize, GaussRational)>>,
    rep: Option<Vec<CMat>>,
    has_identity: Option<usize>,
    closure_residual: f64,
}

/// How well a set of matrices closes under commutation within its own span.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    /// Root-sum-square over pairs of the unrepresentable parts.
    pub residual_norm: f64,
    /// Frobenius norm of the unexplained part of each commutator [l, m].
    pub per_pair: Vec<((usize, usize), f64)>,
}

impl ClosureReport {
    pub fn exact() -> Self {
        Self {
            residual_norm: 0.0,
            per_pair: Vec::new(),
        }
    }
}

impl LieAlgebra {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn gamma(&self, l: usize, m: usize, n: usize) -> &GaussRational {
        let d = self.dim();
        &self.gamma[(l * d + m) * d + n]
    }

    pub fn bracket_table(&self, l: usize, m: usize) -> &[(usize, GaussRational)] {
        &self.table[l * self.dim() + m]
    }

    pub fn rep(&self) -> Option<&[CMat]> {
        self.rep.as_deref()
    }

    pub fn has_identity(&self) -> Option<usize> {
        self.has_identity
    }

    /// Closure residual recorded at construction (0 for exact algebras).
    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// Matrix-representation dimension, if a representation is attached.
    pub fn rep_dim(&self) -> Option<usize> {
        self.rep.as_ref().map(|r| r[0].dim())
    }

    fn from_gamma(
        labels: Vec<String>,
        gamma: Vec<GaussRational>,
        rep: Option<Vec<CMat>>,
        has_identity: Option<usize>,
    ) -> Self {
        let d = labels.len();
        assert_eq!(gamma.len(), d * d * d);
        let mut table = vec![Vec::new(); d * d];
        for l in 0..d {
            for m in 0..d {
                let mut row = Vec::new();
                for n in 0..d {
                    let g = &gamma[(l * d + m) * d + n];
                    if !g.is_zero() {
                        row.push((n, g.clone()));
                    }
                }
                table[l * d + m] = row;
            }
        }
        let alg = Self {
            labels,
            gamma,
            table,
            rep,
            has_identity,
            closure_residual: 0.0,
        };
        debug_assert!(alg.check_antisymmetry());
        alg
    }

    /// gamma_lmn = -gamma_mln for all l, m, n.
    pub fn check_antisymmetry(&self) -> bool {
        let d = self.dim();
        for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    if *self.gamma(l, m, n) != -self.gamma(m, l, n) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Jacobi identity on the structure constants, by direct quadruple loop:
    /// sum_p (g_lmp g_pkn + g_mkp g_pln + g_klp g_pmn) = 0.
    pub fn check_jacobi(&self) -> bool {
        let d = self.dim();
        for l in 0..d {
            for m in 0..d {
                for k in 0..d {
                    for n in 0..d {
                        let mut acc = GaussRational::zero();
                        for p in 0..d {
                            acc += &(self.gamma(l, m, p) * self.gamma(p, k, n));
                            acc += &(self.gamma(m, k, p) * self.gamma(p, l, n));
                            acc += &(self.gamma(k, l, p) * self.gamma(p, m, n));
                        }
                        if !acc.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Largest elementwise deviation between matrix commutators and their
    /// gamma-projected reconstruction, over all generator pairs.
    pub fn rep_consistency_deviation(&self) -> Result<f64> {
        let rep = self.rep.as_ref().ok_or(Error::MissingRep)?;
        let d = self.dim();
        let mut worst = 0.0f64;
        for l in 0..d {
            for m in 0..d {
                let comm = rep[l].commutator(&rep[m]);
                let mut recon = CMat::zeros(rep[l].dim());
                for (n, g) in self.bracket_table(l, m) {
                    recon.axpy(g.to_c64(), &rep[*n]);
                }
                worst = worst.max((&comm - &recon).frobenius_norm());
            }
        }
        Ok(worst)
    }

    /// Evaluate a symbolic coefficient vector into a representation matrix.
    pub fn vector_to_matrix(
        &self,
        coeffs: &[EnvelopeExpr],
        bindings: &crate::symbolic::Bindings,
    ) -> Result<CMat> {
        let rep = self.rep.as_ref().ok_or(Error::MissingRep)?;
        if coeffs.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let mut out = CMat::zeros(rep[0].dim());
        for (c, g) in coeffs.iter().zip(rep) {
            let v = c.eval(bindings)?;
            out.axpy(v, g);
        }
        Ok(out)
    }
}

/// Coefficient rings the structure-constant commutator can act on.
pub trait LieCoeff: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn scale_gr(&self, c: &GaussRational) -> Self;
}

impl LieCoeff for EnvelopeExpr {
    fn zero() -> Self {
        EnvelopeExpr::zero()
    }
    fn is_zero(&self) -> bool {
        EnvelopeExpr::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scale_gr(&self, c: &GaussRational) -> Self {
        self.scale(c)
    }
}

impl LieCoeff for ExpPolyS {
    fn zero() -> Self {
        ExpPolyS::zero()
    }
    fn is_zero(&self) -> bool {
        ExpPolyS::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scale_gr(&self, c: &GaussRational) -> Self {
        self.scale(c)
    }
}

/// Commutator of coefficient vectors: result_n = sum_{l,m} u_l v_m gamma_lmn.
/// Bilinear, exact.
pub fn commutator<T: LieCoeff>(u: &[T], v: &[T], alg: &LieAlgebra) -> Result<Vec<T>> {
    let d = alg.dim();
    if u.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: u.len(),
        });
    }
    if v.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: v.len(),
        });
    }
    let mut out = vec![T::zero(); d];
    for (l, ul) in u.iter().enumerate() {
        if ul.is_zero() {
            continue;
        }
        for (m, vm) in v.iter().enumerate() {
            if vm.is_zero() {
                continue;
            }
            let entries = alg.bracket_table(l, m);
            if entries.is_empty() {
                continue;
            }
            let prod = ul.mul_ref(vm);
            for (n, g) in entries {
                out[*n] = out[*n].add_ref(&prod.scale_gr(g));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Exact construction: the field Q(i, sqrt 2) and small exact matrices.
// ---------------------------------------------------------------------------

/// Element x + y*sqrt(2) with Gaussian-rational x, y.
#[derive(Clone, PartialEq, Debug)]
struct Sqrt2c {
    x: GaussRational,
    y: GaussRational,
}

impl Sqrt2c {
    fn zero() -> Self {
        Self {
            x: GaussRational::zero(),
            y: GaussRational::zero(),
        }
    }
    fn rat(x: GaussRational) -> Self {
        Self {
            x,
            y: GaussRational::zero(),
        }
    }
    fn sqrt2(y: GaussRational) -> Self {
        Self {
            x: GaussRational::zero(),
            y,
        }
    }
    fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Self {
            x: &self.x + &o.x,
            y: &self.y + &o.y,
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Self {
            x: &self.x - &o.x,
            y: &self.y - &o.y,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let two = GaussRational::from_int(2);
        Self {
            x: &(&self.x * &o.x) + &(&(&self.y * &o.y) * &two),
            y: &(&self.x * &o.y) + &(&self.y * &o.x),
        }
    }
    fn conj(&self) -> Self {
        Self {
            x: self.x.conj(),
            y: self.y.conj(),
        }
    }
    /// Field inverse: 1/(x + y sqrt2) = (x - y sqrt2)/(x^2 - 2 y^2).
    fn inv(&self) -> Self {
        let two = GaussRational::from_int(2);
        let denom = &(&self.x * &self.x) - &(&(&self.y * &self.y) * &two);
        let d_inv = denom.inv();
        Self {
            x: &self.x * &d_inv,
            y: &(-&self.y) * &d_inv,
        }
    }
    fn to_c64(&self) -> C64 {
        self.x.to_c64() + self.y.to_c64() * std::f64::consts::SQRT_2
    }
}

#[derive(Clone, Debug)]
struct ExactMat {
    n: usize,
    data: Vec<Sqrt2c>,
}

impl ExactMat {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Sqrt2c::zero(); n * n],
        }
    }
    fn at(&self, i: usize, j: usize) -> &Sqrt2c {
        &self.data[i * self.n + j]
    }
    fn set(&mut self, i: usize, j: usize, v: Sqrt2c) {
        self.data[i * self.n + j] = v;
    }
    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self.at(i, k).clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.n {
                    let v = out.at(i, j).add(&a.mul(o.at(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }
    fn commutator(&self, o: &Self) -> Self {
        let ab = self.mul(o);
        let ba = o.mul(self);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n * self.n {
            out.data[i] = ab.data[i].sub(&ba.data[i]);
        }
        out
    }
    /// Frobenius inner product Tr(A^dagger B) in the exact field.
    fn inner(&self, o: &Self) -> Sqrt2c {
        let mut acc = Sqrt2c::zero();
        for i in 0..self.n * self.n {
            acc = acc.add(&self.data[i].conj().mul(&o.data[i]));
        }
        acc
    }
    fn is_zero(&self) -> bool {
        self.data.iter().all(Sqrt2c::is_zero)
    }
    fn to_cmat(&self) -> CMat {
        let mut m = CMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.at(i, j).to_c64();
            }
        }
        m
    }
}

/// Exact Gram solve: expand each pairwise commutator over the basis and
/// verify the residual vanishes identically. Returns the gamma tensor.
/// Errors if a coefficient falls outside the Gaussian rationals or the
/// expansion leaves a remainder (the built-ins admit neither).
fn exact_structure_constants(basis: &[ExactMat]) -> Result<Vec<GaussRational>> {
    let d = basis.len();
    // Gram matrix and its LU-style exact inverse action via Gaussian
    // elimination, done once per right-hand side for simplicity (d <= 9).
    let gram: Vec<Vec<Sqrt2c>> = basis
        .iter()
        .map(|a| basis.iter().map(|b| a.inner(b)).collect())
        .collect();
    let mut gamma = vec![GaussRational::zero(); d * d * d];
    for l in 0..d {
        for m in 0..d {
            let comm = basis[l].commutator(&basis[m]);
            let rhs: Vec<Sqrt2c> = basis.iter().map(|g| g.inner(&comm)).collect();
            let coeffs = solve_exact(&gram, &rhs)?;
            // Verify the expansion is exact: residual must vanish.
            let mut recon = ExactMat::zeros(comm.n);
            for (n, c) in coeffs.iter().enumerate() {
                for i in 0..comm.n * comm.n {
                    recon.data[i] = recon.data[i].add(&c.mul(&basis[n].data[i]));
                }
            }
            let mut residual = comm.clone();
            for i in 0..comm.n * comm.n {
                residual.data[i] = residual.data[i].sub(&recon.data[i]);
            }
            if !residual.is_zero() {
                return Err(Error::InternalConsistency(format!(
                    "built-in algebra commutator [{l},{m}] does not close exactly"
                )));
            }
            for (n, c) in coeffs.into_iter().enumerate() {
                if !c.y.is_zero() {
                    return Err(Error::InternalConsistency(format!(
                        "structure constant gamma[{l}][{m}][{n}] is irrational"
                    )));
                }
                gamma[(l * d + m) * d + n] = c.x;
            }
        }
    }
    Ok(gamma)
}

/// Gaussian elimination with exact field arithmetic.
#[allow(clippy::needless_range_loop)] // elimination indices mirror the math
fn solve_exact(a: &[Vec<Sqrt2c>], b: &[Sqrt2c]) -> Result<Vec<Sqrt2c>> {
    let n = b.len();
    let mut m: Vec<Vec<Sqrt2c>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::DependentGenerators {
                detail: format!("exact Gram matrix singular at column {col}"),
            })?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].inv();
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].mul(&inv);
            for c2 in col..n {
                let v = m[r][c2].sub(&f.mul(&m[col][c2]));
                m[r][c2] = v;
            }
            let v = rhs[r].sub(&f.mul(&rhs[col]));
            rhs[r] = v;
        }
    }
    let mut x = vec![Sqrt2c::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c2 in (row + 1)..n {
            acc = acc.sub(&m[row][c2].mul(&x[c2]));
        }
        x[row] = acc.mul(&m[row][row].inv());
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Built-in algebras
// ---------------------------------------------------------------------------

fn gr(re: (i64, i64), im: (i64, i64)) -> GaussRational {
    GaussRational::from_parts(re, im)
}

/// su(2) spanned by the Pauli matrices; gamma_lmn = 2i epsilon_lmn.
pub fn builtin_su2() -> Arc<LieAlgebra> {
    let rat = |v: i64| Sqrt2c::rat(GaussRational::from_int(v));
    let im = |v: i64| Sqrt2c::rat(gr((0, 1), (v, 1)));
    let mut sx = ExactMat::zeros(2);
    sx.set(0, 1, rat(1));
    sx.set(1, 0, rat(1));
    let mut sy = ExactMat::zeros(2);
    sy.set(0, 1, im(-1));
    sy.set(1, 0, im(1));
    let mut sz = ExactMat::zeros(2);
    sz.set(0, 0, rat(1));
    sz.set(1, 1, rat(-1));
    let basis = vec![sx, sy, sz];
    let gamma = exact_structure_constants(&basis).expect("su(2) closes exactly");
    let rep = basis.iter().map(ExactMat::to_cmat).collect();
    Arc::new(LieAlgebra::from_gamma(
        vec!["sx".into(), "sy".into(), "sz".into()],
        gamma,
        Some(rep),
        None,
    ))
}

/// The two-boson dimer algebra tau_1..tau_9 in the two-particle basis
/// |1> = c1+ c1+ |0>/sqrt2, |2> = c1+ c2+ |0>, |3> = c2+ c2+ |0>/sqrt2.
///
/// The nine tau operators span the full space of Hermitian 3x3 matrices
/// (the identity equals (tau4 + 2 tau7)/2, so it is inside the span and is
/// not carried as a separate basis element); closure is exact.
pub fn builtin_dimer() -> Arc<LieAlgebra> {
    let s2 = |num: i64| Sqrt2c::sqrt2(GaussRational::from_int(num));
    let is2 = |num: i64| Sqrt2c::sqrt2(gr((0, 1), (num, 1)));
    let rat = |v: i64| Sqrt2c::rat(GaussRational::from_int(v));
    let im = |v: i64| Sqrt2c::rat(gr((0, 1), (v, 1)));

    let mut tau = Vec::with_capacity(9);
    // tau1: hopping, sqrt2 on the (1,2) and (2,3) bonds.
    let mut t1 = ExactMat::zeros(3);
    t1.set(0, 1, s2(1));
    t1.set(1, 0, s2(1));
    t1.set(1, 2, s2(1));
    t1.set(2, 1, s2(1));
    tau.push(t1);
    // tau2 = i(c1+ c2 - c2+ c1)
    let mut t2 = ExactMat::zeros(3);
    t2.set(0, 1, is2(1));
    t2.set(1, 0, is2(-1));
    t2.set(1, 2, is2(1));
    t2.set(2, 1, is2(-1));
    tau.push(t2);
    // tau3 = n2 - n1
    let mut t3 = ExactMat::zeros(3);
    t3.set(0, 0, rat(-2));
    t3.set(2, 2, rat(2));
    tau.push(t3);
    // tau4 = n1(n1-1) + n2(n2-1)
    let mut t4 = ExactMat::zeros(3);
    t4.set(0, 0, rat(2));
    t4.set(2, 2, rat(2));
    tau.push(t4);
    // tau5 = i(n2 c1+ c2 + n1 c2+ c1) + h.c.
    let mut t5 = ExactMat::zeros(3);
    t5.set(1, 2, is2(1));
    t5.set(2, 1, is2(-1));
    t5.set(1, 0, is2(1));
    t5.set(0, 1, is2(-1));
    tau.push(t5);
    // tau6 = n2 c1+ c2 - n1 c2+ c1 + h.c.
    let mut t6 = ExactMat::zeros(3);
    t6.set(1, 2, s2(1));
    t6.set(2, 1, s2(1));
    t6.set(1, 0, s2(-1));
    t6.set(0, 1, s2(-1));
    tau.push(t6);
    // tau7 = n1 n2
    let mut t7 = ExactMat::zeros(3);
    t7.set(1, 1, rat(1));
    tau.push(t7);
    // tau8 = c1+ c1+ c2 c2 + h.c.
    let mut t8 = ExactMat::zeros(3);
    t8.set(0, 2, rat(2));
    t8.set(2, 0, rat(2));
    tau.push(t8);
    // tau9 = i(c2+ c2+ c1 c1 - c1+ c1+ c2 c2)
    let mut t9 = ExactMat::zeros(3);
    t9.set(0, 2, im(-2));
    t9.set(2, 0, im(2));
    tau.push(t9);

    let gamma = exact_structure_constants(&tau).expect("dimer tau set closes exactly");
    let rep = tau.iter().map(ExactMat::to_cmat).collect();
    let labels = (1..=9).map(|k| format!("tau{k}")).collect();
    Arc::new(LieAlgebra::from_gamma(labels, gamma, Some(rep), None))
}

// ---------------------------------------------------------------------------
// Construction from floating-point representations
// ---------------------------------------------------------------------------

/// Derive structure constants from an explicit matrix representation by
/// solving the Gram system <G_n, [G_l, G_m]> in the Frobenius inner product.
///
/// Coefficients are snapped to nearby rationals (continued fractions,
/// denominator <= 2^20) so the stored gamma tensor stays exact; whatever the
/// snapped expansion fails to reproduce is reported as closure residual.
pub fn close_from_representation(
    matrices: &[CMat],
    include_identity: bool,
) -> Result<(Arc<LieAlgebra>, ClosureReport)> {
    if matrices.is_empty() {
        return Err(Error::Model("empty generator list".into()));
    }
    let dim = matrices[0].dim();
    for (k, m) in matrices.iter().enumerate() {
        if m.dim() != dim {
            return Err(Error::Model(format!(
                "matrix {k} has dimension {} but matrix 0 has {dim}",
                m.dim()
            )));
        }
        let dev = m.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                index: k,
                deviation: dev,
            });
        }
    }
    let mut basis: Vec<CMat> = matrices.to_vec();
    let mut labels: Vec<String> = (0..matrices.len()).map(|k| format!("g{k}")).collect();
    let mut has_identity = None;
    if include_identity {
        has_identity = Some(basis.len());
        basis.push(CMat::eye(dim));
        labels.push("id".into());
    }
    let d = basis.len();

    // Real Gram matrix (Hermitian basis => real inner products).
    let gram: Vec<Vec<f64>> = basis
        .iter()
        .map(|a| basis.iter().map(|b| a.inner(b).re).collect())
        .collect();
    // Detect linear dependence by incremental Gram-Schmidt on the Gram data.
    if let Some(detail) = dependent_member(&basis) {
        return Err(Error::DependentGenerators { detail });
    }

    let mut gamma = vec![GaussRational::zero(); d * d * d];
    let mut per_pair = Vec::new();
    let mut sum_sq = 0.0;
    for l in 0..d {
        for m in 0..d {
            let comm = basis[l].commutator(&basis[m]);
            // [H1, H2] is anti-Hermitian; expand (comm / i) over the real span.
            let rhs: Vec<f64> = basis.iter().map(|g| (g.inner(&comm) * C64::new(0.0, -1.0)).re).collect();
            let coeffs = solve_real(&gram, &rhs, 1e-9).ok_or_else(|| Error::DependentGenerators {
                detail: "Gram matrix singular".into(),
            })?;
            let mut recon = CMat::zeros(dim);
            for (n, c) in coeffs.iter().enumerate() {
                let snapped = rationalize(*c, 1 << 20);
                let g = GaussRational::new(Rational::zero(), snapped);
                recon.axpy(g.to_c64(), &basis[n]);
                gamma[(l * d + m) * d + n] = g;
            }
            let res = (&comm - &recon).frobenius_norm();
            if res > 1e-13 {
                per_pair.push(((l, m), res));
            }
            sum_sq += res * res;
        }
    }
    // Snapping can break exact antisymmetry only if inputs were inconsistent;
    // enforce it so the algebra invariants hold by construction.
    for l in 0..d {
        for m in 0..l {
            for n in 0..d {
                let g = gamma[(l * d + m) * d + n].clone();
                gamma[(m * d + l) * d + n] = -g;
            }
        }
        for n in 0..d {
            gamma[(l * d + l) * d + n] = GaussRational::zero();
        }
    }
    let report = ClosureReport {
        residual_norm: sum_sq.sqrt(),
        per_pair,
    };
    let mut alg = LieAlgebra::from_gamma(labels, gamma, Some(basis), has_identity);
    alg.closure_residual = report.residual_norm;
    Ok((Arc::new(alg), report))
}

/// Returns a description of the first basis member lying in the span of the
/// previous ones, if any (modified Gram-Schmidt on the flattened matrices).
fn dependent_member(basis: &[CMat]) -> Option<String> {
    let mut ortho: Vec<CMat> = Vec::new();
    for (k, m) in basis.iter().enumerate() {
        let mut r = m.clone();
        for q in &ortho {
            let denom = q.inner(q).re;
            let c = q.inner(&r) / denom;
            r.axpy(-c, q);
        }
        let norm = r.frobenius_norm();
        if norm < 1e-9 * m.frobenius_norm().max(1.0) {
            return Some(format!(
                "matrix {k} lies in the span of matrices 0..{k} (residual {norm:.2e})"
            ));
        }
        ortho.push(r);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::EnvelopeExpr;

    fn unit_vec(alg: &LieAlgebra, label: &str) -> Vec<EnvelopeExpr> {
        let mut v = vec![EnvelopeExpr::zero(); alg.dim()];
        v[alg.label_index(label).unwrap()] = EnvelopeExpr::one();
        v
    }

    #[test]
    fn su2_structure_constants_are_levi_civita() {
        let alg = builtin_su2();
        // [sx, sy] = 2i sz
        let g = alg.gamma(0, 1, 2);
        assert_eq!(*g, GaussRational::from_parts((0, 1), (2, 1)));
        assert!(alg.gamma(0, 1, 0).is_zero());
        assert!(alg.check_antisymmetry());
        assert!(alg.check_jacobi());
        assert!(alg.rep_consistency_deviation().unwrap() < 1e-12);
    }

    #[test]
    fn su2_commutator_example() {
        let alg = builtin_su2();
        let ex = unit_vec(&alg, "sx");
        let ey = unit_vec(&alg, "sy");
        let out = commutator(&ex, &ey, &alg).unwrap();
        // 2i e_z
        assert!(out[0].is_zero() && out[1].is_zero());
        assert_eq!(
            out[2],
            EnvelopeExpr::constant(GaussRational::from_parts((0, 1), (2, 1)))
        );
        // [u, u] = 0
        let zero = commutator(&ex, &ex, &alg).unwrap();
        assert!(zero.iter().all(EnvelopeExpr::is_zero));
    }

    #[test]
    fn commutator_length_mismatch_errors() {
        let alg = builtin_su2();
        let bad = vec![EnvelopeExpr::one(); 2];
        let ok = vec![EnvelopeExpr::one(); 3];
        assert!(matches!(
            commutator(&bad, &ok, &alg),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dimer_tau1_matrix_entries() {
        let alg = builtin_dimer();
        let rep = alg.rep().unwrap();
        let t1 = &rep[0];
        let s2 = std::f64::consts::SQRT_2;
        assert!((t1[(0, 1)].re - s2).abs() < 1e-15);
        assert!((t1[(1, 2)].re - s2).abs() < 1e-15);
        assert!(t1[(0, 2)].norm() < 1e-15);
        // tau4 is diagonal diag(2, 0, 2) from the second-quantized definition.
        let t4 = &rep[3];
        assert!((t4[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!(t4[(1, 1)].norm() < 1e-15);
        assert!((t4[(2, 2)].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dimer_closes_exactly_with_rational_gamma() {
        let alg = builtin_dimer();
        assert!(alg.check_antisymmetry());
        assert!(alg.check_jacobi());
        assert!(alg.rep_consistency_deviation().unwrap() < 1e-12);
        // Identity sits inside the span: tau4 + 2 tau7 = 2 * 1.
        let rep = alg.rep().unwrap();
        let mut combo = rep[3].clone();
        combo.axpy(C64::new(2.0, 0.0), &rep[6]);
        assert!((&combo - &CMat::eye(3).scale(C64::new(2.0, 0.0))).frobenius_norm() < 1e-14);
    }

    #[test]
    fn dimer_commutator_matches_matrix_oracle() {
        // [tau1, tau3] projected back onto the basis by brute-force matrix
        // arithmetic must reproduce the gamma-based commutator.
        let alg = builtin_dimer();
        let rep = alg.rep().unwrap();
        let e1 = unit_vec(&alg, "tau1");
        let e3 = unit_vec(&alg, "tau3");
        let sym = commutator(&e1, &e3, &alg).unwrap();
        let comm = rep[0].commutator(&rep[2]);
        let mut recon = CMat::zeros(3);
        for (n, c) in sym.iter().enumerate() {
            recon.axpy(c.constant_part().to_c64(), &rep[n]);
        }
        assert!((&comm - &recon).frobenius_norm() < 1e-12);
    }

    #[test]
    fn pauli_closure_from_float_representation() {
        let alg0 = builtin_su2();
        let (alg, report) = close_from_representation(alg0.rep().unwrap(), false).unwrap();
        assert!(report.residual_norm < 1e-12);
        assert_eq!(
            *alg.gamma(0, 1, 2),
            GaussRational::from_parts((0, 1), (2, 1))
        );
        assert!(alg.check_jacobi());
    }

    #[test]
    fn single_generator_is_abelian() {
        let alg0 = builtin_su2();
        let sz = alg0.rep().unwrap()[2].clone();
        let (alg, report) = close_from_representation(&[sz], false).unwrap();
        assert_eq!(alg.dim(), 1);
        assert!(alg.gamma(0, 0, 0).is_zero());
        assert!(report.residual_norm == 0.0);
    }

    #[test]
    fn dimer_plus_identity_is_dependent() {
        // tau4 + 2 tau7 already equals twice the identity, so appending the
        // identity must be rejected as a dependent generator.
        let alg = builtin_dimer();
        let result = close_from_representation(alg.rep().unwrap(), true);
        assert!(matches!(result, Err(Error::DependentGenerators { .. })));
    }

    #[test]
    fn dimer_float_closure_matches_exact_gamma() {
        let alg = builtin_dimer();
        let (alg2, report) = close_from_representation(alg.rep().unwrap(), false).unwrap();
        assert!(report.residual_norm < 1e-10, "residual {}", report.residual_norm);
        for l in 0..9 {
            for m in 0..9 {
                for n in 0..9 {
                    assert_eq!(alg.gamma(l, m, n), alg2.gamma(l, m, n), "({l},{m},{n})");
                }
            }
        }
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let mut m = CMat::zeros(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            close_from_representation(&[m], false),
            Err(Error::NotHermitian { .. })
        ));
    }
}

//! Dense complex matrices for the numeric side.
//!
//! Matrix dimensions here are tiny (the physical space is 2- or 3-dimensional
//! and truncated Kamiltonian blocks stay below ~100), so everything is a plain
//! row-major `Vec<Complex64>` with straightforward O(n^3) kernels: a cyclic
//! Jacobi eigensolver for Hermitian matrices, exponentials and principal
//! logarithms of normal matrices via eigendecomposition, and a pivoted real
//! solve for Gram systems.

use num_complex::Complex64 as C64;
use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from rows of (re, im) pairs.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &(re, im)) in row.iter().enumerate() {
                m[(i, j)] = C64::new(re, im);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product <A, B> = Tr(A^dagger B).
    pub fn inner(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (self - &self.dagger()).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn axpy(&mut self, c: C64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns ascending eigenvalues and the unitary of column
    /// eigenvectors.
    pub fn eigh(&self) -> (Vec<f64>, CMat) {
        let n = self.n;
        let mut a = self.clone();
        let mut v = CMat::eye(n);
        let tol = 1e-15 * self.frobenius_norm().max(1.0);
        for _sweep in 0..200 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    // Unitary 2x2 rotation zeroing the (p,q) element:
                    // G = [[c, s], [-conj(s), c]] with s = sin(theta) e^{i phi}.
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = phase * (t * c);
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * c - akq * s.conj();
                        a[(k, q)] = akp * s + akq * c;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * c - aqk * s;
                        a[(q, k)] = apk * s.conj() + aqk * c;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * s.conj();
                        v[(k, q)] = vkp * s + vkq * c;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
        let eigvals = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vecs = CMat::zeros(n);
        for (col, &i) in order.iter().enumerate() {
            for k in 0..n {
                vecs[(k, col)] = v[(k, i)];
            }
        }
        (eigvals, vecs)
    }

    /// exp(i factor H) for Hermitian H, via eigendecomposition. Unitary to
    /// machine precision.
    pub fn expm_i_hermitian(&self, factor: f64) -> CMat {
        let (vals, vecs) = self.eigh();
        let mut out = CMat::zeros(self.n);
        for (k, lam) in vals.iter().enumerate() {
            let phase = C64::from_polar(1.0, factor * lam);
            for i in 0..self.n {
                for j in 0..self.n {
                    out[(i, j)] += vecs[(i, k)] * phase * vecs[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Principal logarithm of a unitary matrix, returned as the Hermitian
    /// generator Omega with U = exp(i Omega) and eigenphases in (-pi, pi].
    /// Also returns the smallest distance of any eigenphase to ±pi.
    ///
    /// Works by simultaneous diagonalization of the commuting Hermitian pair
    /// C = (U + U†)/2 and S = (U - U†)/(2i): eigenvectors of C are grouped by
    /// eigenvalue and S is rediagonalized inside each degenerate block.
    pub fn unitary_log_principal(&self) -> (CMat, f64) {
        let n = self.n;
        let c = (self + &self.dagger()).scale(C64::new(0.5, 0.0));
        let s = (self - &self.dagger()).scale(C64::new(0.0, -0.5));
        let (cvals, cvecs) = c.eigh();
        // Group near-degenerate eigenvalues of C.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in 0..n {
            match groups.last_mut() {
                Some(g) if (cvals[k] - cvals[g[0]]).abs() < 1e-8 => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        let mut omega = CMat::zeros(n);
        let mut min_margin = f64::INFINITY;
        for g in groups {
            // Project S into the block and diagonalize it there.
            let m = g.len();
            let mut block = CMat::zeros(m);
            for (a, &ka) in g.iter().enumerate() {
                for (b, &kb) in g.iter().enumerate() {
                    let mut val = C64::new(0.0, 0.0);
                    for i in 0..n {
                        for j in 0..n {
                            val += cvecs[(i, ka)].conj() * s[(i, j)] * cvecs[(j, kb)];
                        }
                    }
                    block[(a, b)] = val;
                }
            }
            let (svals, svecs) = block.eigh();
            for (col, sv) in svals.iter().enumerate() {
                // Joint eigenvector in the original basis.
                let mut vec = vec![C64::new(0.0, 0.0); n];
                for (a, &ka) in g.iter().enumerate() {
                    for (i, item) in vec.iter_mut().enumerate() {
                        *item += cvecs[(i, ka)] * svecs[(a, col)];
                    }
                }
                let cv = cvals[g[0]];
                let phase = sv.atan2(cv);
                min_margin = min_margin.min(std::f64::consts::PI - phase.abs());
                for i in 0..n {
                    for j in 0..n {
                        omega[(i, j)] += vec[i] * phase * vec[j].conj();
                    }
                }
            }
        }
        (omega, min_margin)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Solve the real linear system A x = b by partial-pivoted Gaussian
/// elimination. Returns None if A is singular to tolerance.
#[allow(clippy::needless_range_loop)] // elimination indices mirror the math
pub fn solve_real(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if piv_val <= tol {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c2 in col..n {
                m[r][c2] -= f * m[col][c2];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c2 in (row + 1)..n {
            acc -= m[row][c2] * x[c2];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

//! Grade-indexed stacks of Fourier operators and their truncated bracket.
//! Grade i carries an implicit eps^i; brackets add grades and harmonics and
//! silently drop anything beyond the grade budget.

use crate::algebra::{commutator, LieAlgebra};
use crate::error::Result;
use crate::fourier::FourierOperator;
use crate::scalar::GaussRational;
use crate::symbolic::EnvelopeExpr;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct GradedOp {
    pub grades: Vec<FourierOperator>,
}

impl GradedOp {
    pub fn zero(alg: &Arc<LieAlgebra>, band: i64, max_grade: usize) -> Self {
        Self {
            grades: (0..=max_grade)
                .map(|_| FourierOperator::zero(alg.clone(), band))
                .collect(),
        }
    }

    pub fn max_grade(&self) -> usize {
        self.grades.len() - 1
    }

    pub fn band(&self) -> i64 {
        self.grades.iter().map(FourierOperator::band).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut grades = Vec::with_capacity(self.grades.len());
        for (g, op) in self.grades.iter().enumerate() {
            match other.grades.get(g) {
                Some(o) => grades.push(op.add(o)),
                None => grades.push(op.clone()),
            }
        }
        Self { grades }
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        Self {
            grades: self.grades.iter().map(|op| op.scale(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.grades.iter().all(FourierOperator::is_zero)
    }
}

/// Graded bracket [x, y]: grades add, harmonics add, overflow grades drop.
pub fn ad_graded(x: &GradedOp, y: &GradedOp, alg: &LieAlgebra) -> Result<GradedOp> {
    let max_grade = x.max_grade().min(y.max_grade().max(x.max_grade()));
    let alg_arc = x.grades[0].algebra().clone();
    let band = x.band() + y.band();
    let mut out = GradedOp::zero(&alg_arc, band, max_grade);
    for (g1, opx) in x.grades.iter().enumerate() {
        if opx.is_zero() {
            continue;
        }
        for (g2, opy) in y.grades.iter().enumerate() {
            let g = g1 + g2;
            if g > max_grade {
                continue;
            }
            if opy.is_zero() {
                continue;
            }
            for m1 in -opx.band()..=opx.band() {
                let u = opx.component(m1).unwrap();
                if u.iter().all(EnvelopeExpr::is_zero) {
                    continue;
                }
                for m2 in -opy.band()..=opy.band() {
                    let v = opy.component(m2).unwrap();
                    if v.iter().all(EnvelopeExpr::is_zero) {
                        continue;
                    }
                    let comm = commutator(u, v, alg)?;
                    out.grades[g].add_to_component(m1 + m2, &comm)?;
                }
            }
        }
    }
    Ok(out)
}

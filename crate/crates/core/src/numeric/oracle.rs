//! Dense-matrix flow oracle: integrates the continuous flow equations
//! numerically on harmonic-indexed matrices, without any inverse-frequency
//! expansion. Cross-validates the symbolic engines.

use super::NumericModel;
use crate::error::{Error, Result};
use crate::flow::Engine;
use crate::linalg::CMat;
use num_complex::Complex64 as C64;

/// Truncated quasienergy operator: harmonics |n| <= cutoff as dense blocks.
#[derive(Clone, Debug)]
pub struct TruncatedKamiltonian {
    pub cutoff: i64,
    pub omega: f64,
    /// Harmonic-indexed blocks h^(n); index n + cutoff.
    pub blocks: Vec<CMat>,
}

impl TruncatedKamiltonian {
    pub fn from_model(model: &NumericModel, cutoff: i64, t: f64) -> Result<Self> {
        let d = model.alg.rep_dim().ok_or(Error::MissingRep)?;
        let mut blocks = vec![CMat::zeros(d); (2 * cutoff + 1) as usize];
        for (n, m) in model.fourier_matrices(t)? {
            if n.abs() <= cutoff {
                blocks[(n + cutoff) as usize] = m;
            }
        }
        Ok(Self {
            cutoff,
            omega: model.omega,
            blocks,
        })
    }

    pub fn block(&self, n: i64) -> &CMat {
        &self.blocks[(n + self.cutoff) as usize]
    }

    /// Assemble the full (2K+1)d block matrix
    /// <k| K |k'> = k hbar omega delta_{kk'} 1 + h^(k - k').
    pub fn assemble(&self) -> CMat {
        let d = self.blocks[0].dim();
        let k = self.cutoff;
        let size = ((2 * k + 1) as usize) * d;
        let mut out = CMat::zeros(size);
        for bi in -k..=k {
            for bj in -k..=k {
                let diff = bi - bj;
                let row0 = ((bi + k) as usize) * d;
                let col0 = ((bj + k) as usize) * d;
                if diff.abs() <= k {
                    let blk = self.block(diff);
                    for i in 0..d {
                        for j in 0..d {
                            out[(row0 + i, col0 + j)] = blk[(i, j)];
                        }
                    }
                }
                if bi == bj {
                    for i in 0..d {
                        out[(row0 + i, col0 + i)] += C64::new(bi as f64 * self.omega, 0.0);
                    }
                }
            }
        }
        out
    }

}

/// Oracle result: the flowed central block, the full harmonic-indexed final
/// state, and convergence data.
#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub h_eff: CMat,
    pub residual: f64,
    pub s_reached: f64,
    pub cutoff: i64,
    /// Final flowed blocks H^(n), index n + cutoff.
    pub blocks: Vec<CMat>,
}

impl OracleOutput {
    /// Largest Frobenius norm among harmonics with |n| > band.
    pub fn offband_norm(&self, band: i64) -> f64 {
        let mut worst = 0.0f64;
        for n in -self.cutoff..=self.cutoff {
            if n.abs() > band {
                worst = worst.max(self.blocks[(n + self.cutoff) as usize].frobenius_norm());
            }
        }
        worst
    }
}

fn flow_rhs(blocks: &[CMat], cutoff: i64, omega: f64, engine: Engine) -> Vec<CMat> {
    let d = blocks[0].dim();
    let get = |n: i64| -> &CMat { &blocks[(n + cutoff) as usize] };
    let mut out = vec![CMat::zeros(d); blocks.len()];
    let eps = 1.0 / omega;
    for n in -cutoff..=cutoff {
        let idx = (n + cutoff) as usize;
        let mut acc = CMat::zeros(d);
        if n == 0 {
            for m in 1..=cutoff {
                let comm = get(m).commutator(get(-m));
                let w = match engine {
                    Engine::Toda => 2.0,
                    Engine::Vmm => 2.0 * m as f64,
                    Engine::Discrete => unreachable!(),
                };
                acc.axpy(C64::new(w * eps, 0.0), &comm);
            }
        } else {
            let decay = match engine {
                Engine::Toda => n.abs() as f64,
                Engine::Vmm => (n * n) as f64,
                Engine::Discrete => unreachable!(),
            };
            acc.axpy(C64::new(-decay, 0.0), get(n));
            for m in (-cutoff).max(n - cutoff)..=cutoff.min(n + cutoff) {
                if m == n {
                    continue;
                }
                let w = match engine {
                    Engine::Toda => ((m - n).signum()) as f64,
                    Engine::Vmm => (m - n) as f64,
                    Engine::Discrete => unreachable!(),
                };
                let comm = get(m).commutator(get(n - m));
                acc.axpy(C64::new(w * eps, 0.0), &comm);
            }
        }
        out[idx] = acc;
    }
    out
}

fn add_scaled(dst: &mut [CMat], c: f64, src: &[CMat]) {
    for (d, s) in dst.iter_mut().zip(src) {
        d.axpy(C64::new(c, 0.0), s);
    }
}

fn norm_of(blocks: &[CMat]) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let f = b.frobenius_norm();
            f * f
        })
        .sum::<f64>()
        .sqrt()
}

/// Integrate the static-envelope flow equations with an embedded RKF45
/// stepper until the off-diagonal Frobenius norm drops below `target` or
/// `s_max` is reached (the latter is reported as non-convergence).
///
/// The model must have static envelopes (the dense flow has no d/dt term).
pub fn dense_flow_oracle(
    model: &NumericModel,
    cutoff: i64,
    s_max: f64,
    engine: Engine,
    target: f64,
) -> Result<OracleOutput> {
    if !model.is_static_envelope() {
        return Err(Error::Model(
            "dense flow oracle requires static envelopes".into(),
        ));
    }
    if engine == Engine::Discrete {
        return Err(Error::Model("dense flow oracle supports toda and vmm".into()));
    }
    let kam = TruncatedKamiltonian::from_model(model, cutoff, model.t_in)?;
    let mut blocks = kam.blocks.clone();
    let omega = model.omega;

    // Cash-Karp RKF45 with PI-free simple step control.
    let mut s = 0.0;
    let mut h = 1e-2;
    let rtol = 1e-12;
    let atol = 1e-14;
    let offdiag = |blocks: &[CMat]| -> f64 {
        let mut acc = 0.0;
        for n in -cutoff..=cutoff {
            if n != 0 {
                let f = blocks[(n + cutoff) as usize].frobenius_norm();
                acc += f * f;
            }
        }
        acc.sqrt()
    };
    let mut res = offdiag(&blocks);
    while res > target && s < s_max {
        if s + h > s_max {
            h = s_max - s;
        }
        // Cash-Karp coefficients.
        let k1 = flow_rhs(&blocks, cutoff, omega, engine);
        let mut y = blocks.clone();
        add_scaled(&mut y, h / 5.0, &k1);
        let k2 = flow_rhs(&y, cutoff, omega, engine);
        let mut y = blocks.clone();
        add_scaled(&mut y, 3.0 * h / 40.0, &k1);
        add_scaled(&mut y, 9.0 * h / 40.0, &k2);
        let k3 = flow_rhs(&y, cutoff, omega, engine);
        let mut y = blocks.clone();
        add_scaled(&mut y, 3.0 * h / 10.0, &k1);
        add_scaled(&mut y, -9.0 * h / 10.0, &k2);
        add_scaled(&mut y, 6.0 * h / 5.0, &k3);
        let k4 = flow_rhs(&y, cutoff, omega, engine);
        let mut y = blocks.clone();
        add_scaled(&mut y, -11.0 * h / 54.0, &k1);
        add_scaled(&mut y, 5.0 * h / 2.0, &k2);
        add_scaled(&mut y, -70.0 * h / 27.0, &k3);
        add_scaled(&mut y, 35.0 * h / 27.0, &k4);
        let k5 = flow_rhs(&y, cutoff, omega, engine);
        let mut y = blocks.clone();
        add_scaled(&mut y, 1631.0 * h / 55296.0, &k1);
        add_scaled(&mut y, 175.0 * h / 512.0, &k2);
        add_scaled(&mut y, 575.0 * h / 13824.0, &k3);
        add_scaled(&mut y, 44275.0 * h / 110592.0, &k4);
        add_scaled(&mut y, 253.0 * h / 4096.0, &k5);
        let k6 = flow_rhs(&y, cutoff, omega, engine);

        // 5th-order solution.
        let mut y5 = blocks.clone();
        add_scaled(&mut y5, 37.0 * h / 378.0, &k1);
        add_scaled(&mut y5, 250.0 * h / 621.0, &k3);
        add_scaled(&mut y5, 125.0 * h / 594.0, &k4);
        add_scaled(&mut y5, 512.0 * h / 1771.0, &k6);
        // 4th-order solution for the error estimate.
        let mut y4 = blocks.clone();
        add_scaled(&mut y4, 2825.0 * h / 27648.0, &k1);
        add_scaled(&mut y4, 18575.0 * h / 48384.0, &k3);
        add_scaled(&mut y4, 13525.0 * h / 55296.0, &k4);
        add_scaled(&mut y4, 277.0 * h / 14336.0, &k5);
        add_scaled(&mut y4, h / 4.0, &k6);

        let mut err = 0.0;
        for (a, b) in y5.iter().zip(&y4) {
            let e = (a - b).frobenius_norm();
            err += e * e;
        }
        let err = err.sqrt();
        let scale = atol + rtol * norm_of(&y5).max(1.0);
        if err <= scale {
            s += h;
            blocks = y5;
            res = offdiag(&blocks);
        }
        let safety = 0.9 * (scale / err.max(1e-300)).powf(0.2);
        h *= safety.clamp(0.2, 5.0);
        h = h.min(2.0);
        if h < 1e-12 {
            return Err(Error::NonConvergence(format!(
                "flow step collapsed at s = {s:.3} (residual {res:.3e})"
            )));
        }
    }
    if res > target {
        return Err(Error::NonConvergence(format!(
            "off-diagonal residual {res:.3e} above target {target:.1e} at s_max = {s_max}"
        )));
    }
    Ok(OracleOutput {
        h_eff: blocks[cutoff as usize].clone(),
        residual: res,
        s_reached: s,
        cutoff,
        blocks,
    })
}

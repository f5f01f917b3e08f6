//! Time propagation: RK4 integration of the Schrodinger equation and the
//! effective-plus-micromotion evolution formula.

use super::NumericModel;
use crate::error::{Error, Result};
use crate::fourier::EpsSeries;
use crate::linalg::CMat;
use crate::micromotion::{micromotion_unitary, MicromotionSeries};
use num_complex::Complex64 as C64;

/// A propagated trajectory on a uniform grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
}

impl Trajectory {
    pub fn populations(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|psi| psi.iter().map(|a| a.norm_sqr()).collect())
            .collect()
    }

    pub fn norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|psi| {
                let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
                (n - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn rhs(model: &NumericModel, t: f64, psi: &[C64]) -> Result<Vec<C64>> {
    let h = model.h_matrix(t)?;
    let hpsi = h.apply(psi);
    Ok(hpsi.iter().map(|z| z * C64::new(0.0, -1.0)).collect())
}

fn axpy(dst: &mut [C64], c: f64, src: &[C64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += C64::new(c, 0.0) * s;
    }
}

/// Fourth-order Runge-Kutta propagation of i d/dt psi = h(omega t + theta, t) psi
/// on a uniform grid with `steps` steps. The step must resolve the drive:
/// dt <= 2 pi / (40 omega).
pub fn propagate_exact(model: &NumericModel, steps: usize) -> Result<Trajectory> {
    let dt = (model.t_fn - model.t_in) / steps as f64;
    let max_dt = std::f64::consts::TAU / (40.0 * model.omega.abs());
    if dt > max_dt {
        return Err(Error::Model(format!(
            "time step {dt:.3e} too large; need <= 2 pi / (40 omega) = {max_dt:.3e}"
        )));
    }
    let d = model.alg.rep_dim().ok_or(Error::MissingRep)?;
    let mut psi: Vec<C64> = vec![C64::new(0.0, 0.0); d];
    psi[initial_index(model)] = C64::new(1.0, 0.0);
    propagate_from(model, psi, steps)
}

fn initial_index(_model: &NumericModel) -> usize {
    // Default initial state; callers that need something specific use
    // `propagate_from`.
    0
}

/// RK4 from a given initial state.
pub fn propagate_from(
    model: &NumericModel,
    psi0: Vec<C64>,
    steps: usize,
) -> Result<Trajectory> {
    let dt = (model.t_fn - model.t_in) / steps as f64;
    let mut psi = psi0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(model.t_in);
    states.push(psi.clone());
    for k in 0..steps {
        let t = model.t_in + k as f64 * dt;
        let k1 = rhs(model, t, &psi)?;
        let mut y = psi.clone();
        axpy(&mut y, dt / 2.0, &k1);
        let k2 = rhs(model, t + dt / 2.0, &y)?;
        let mut y = psi.clone();
        axpy(&mut y, dt / 2.0, &k2);
        let k3 = rhs(model, t + dt / 2.0, &y)?;
        let mut y = psi.clone();
        axpy(&mut y, dt, &k3);
        let k4 = rhs(model, t + dt, &y)?;
        for i in 0..psi.len() {
            psi[i] += C64::new(dt / 6.0, 0.0) * (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]);
        }
        times.push(t + dt);
        states.push(psi.clone());
    }
    Ok(Trajectory { times, states })
}

/// Evolution through the block-diagonal frame:
///   psi(t) = U_micro(omega t + theta, t) U_eff(t, t_in)
///            U_micro^dagger(omega t_in + theta, t_in) psi(t_in),
/// with U_eff built by exponential midpoint steps on the evaluated
/// h_eff(t) truncated at `n_max` orders, and the micromotion exponent
/// truncated at the same order (pass `micromotion = None` to skip it).
pub fn evolve_full(
    model: &NumericModel,
    h_eff: &EpsSeries,
    micromotion: Option<&MicromotionSeries>,
    n_max: usize,
    psi0: Vec<C64>,
    steps: usize,
) -> Result<Trajectory> {
    let d = model.alg.rep_dim().ok_or(Error::MissingRep)?;
    let dt = (model.t_fn - model.t_in) / steps as f64;
    let max_deriv = 4 + n_max as u32;

    let micro_at = |t: f64| -> Result<CMat> {
        match micromotion {
            None => Ok(CMat::eye(d)),
            Some(series) => {
                let bindings = model.bindings_at(t, max_deriv);
                micromotion_unitary(series, n_max, model.omega, t, model.theta, &bindings)
            }
        }
    };

    let micro_in_dag = micro_at(model.t_in)?.dagger();
    let start: Vec<C64> = micro_in_dag.apply(&psi0);

    let mut u_eff = CMat::eye(d);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(model.t_in);
    states.push(micro_at(model.t_in)?.apply(&start));
    for k in 0..steps {
        let t_mid = model.t_in + (k as f64 + 0.5) * dt;
        let bindings = model.bindings_at(t_mid, max_deriv);
        let h = h_eff.matrix_at(n_max, model.omega, 0.0, &bindings)?;
        let step = h.expm_i_hermitian(-dt);
        u_eff = &step * &u_eff;
        let t = model.t_in + (k + 1) as f64 * dt;
        let mid_state = u_eff.apply(&start);
        states.push(micro_at(t)?.apply(&mid_state));
        times.push(t);
    }
    Ok(Trajectory { times, states })
}

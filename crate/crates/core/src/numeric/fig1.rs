//! Transition-probability benchmark for a driven two-level system: exact
//! propagation against effective evolution at increasing truncation orders,
//! with and without micromotion.

use super::propagate::{evolve_full, propagate_from, Trajectory};
use super::NumericModel;
use crate::error::{Error, Result};
use crate::fourier::EpsSeries;
use crate::micromotion::MicromotionSeries;
use num_complex::Complex64 as C64;

/// Five curves over the scaled-time grid, plus max deviations from exact.
#[derive(Clone, Debug)]
pub struct Fig1Data {
    pub omega_t: Vec<f64>,
    pub p_exact: Vec<f64>,
    pub p_micro2: Vec<f64>,
    pub p_n0: Vec<f64>,
    pub p_n1: Vec<f64>,
    pub p_n2: Vec<f64>,
    /// max |P_exact - P_approx| for (micro2, n2, n1, n0).
    pub max_dev: [f64; 4],
}

fn excited_population(traj: &Trajectory) -> Vec<f64> {
    traj.states.iter().map(|psi| psi[0].norm_sqr()).collect()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Run the four approximations on a two-level model, starting from the bare
/// ground state (the sigma_z eigenstate with eigenvalue -1), and report the
/// probability of transition to the excited state on a uniform grid with
/// `keep` stored points.
pub fn run_fig1(
    model: &NumericModel,
    h_eff: &EpsSeries,
    micromotion: &MicromotionSeries,
    steps: usize,
    keep: usize,
) -> Result<Fig1Data> {
    let d = model.alg.rep_dim().ok_or(Error::MissingRep)?;
    if d != 2 {
        return Err(Error::Model(
            "transition-probability benchmark needs a two-level representation".into(),
        ));
    }
    let ground = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let exact = propagate_from(model, ground.clone(), steps)?;
    if exact.norm_drift() > 1e-8 {
        return Err(Error::NonConvergence(format!(
            "norm drift {:.2e} above 1e-8; reduce the step",
            exact.norm_drift()
        )));
    }
    let micro2 = evolve_full(model, h_eff, Some(micromotion), 2, ground.clone(), steps)?;
    let n0 = evolve_full(model, h_eff, None, 0, ground.clone(), steps)?;
    let n1 = evolve_full(model, h_eff, None, 1, ground.clone(), steps)?;
    let n2 = evolve_full(model, h_eff, None, 2, ground, steps)?;

    let p_exact = excited_population(&exact);
    let p_micro2 = excited_population(&micro2);
    let p_n0 = excited_population(&n0);
    let p_n1 = excited_population(&n1);
    let p_n2 = excited_population(&n2);
    let max_dev = [
        max_dev(&p_exact, &p_micro2),
        max_dev(&p_exact, &p_n2),
        max_dev(&p_exact, &p_n1),
        max_dev(&p_exact, &p_n0),
    ];

    // Thin the grid for output.
    let stride = (steps / keep.max(1)).max(1);
    let pick = |v: &[f64]| -> Vec<f64> { v.iter().step_by(stride).copied().collect() };
    let omega_t: Vec<f64> = exact
        .times
        .iter()
        .step_by(stride)
        .map(|t| t * model.omega)
        .collect();
    Ok(Fig1Data {
        omega_t,
        p_exact: pick(&p_exact),
        p_micro2: pick(&p_micro2),
        p_n0: pick(&p_n0),
        p_n1: pick(&p_n1),
        p_n2: pick(&p_n2),
        max_dev,
    })
}

//! Stroboscopic Hamiltonian: the principal logarithm of the one-period
//! propagator, and its first three high-frequency terms by direct nested
//! quadrature of the ordered phase integrals.

use super::NumericModel;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use num_complex::Complex64 as C64;

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.525_532_409_916_329, 0.3137066458778873),
    (-0.1834346424956498, 0.362_683_783_378_362),
    (0.1834346424956498, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

/// Composite 8-point Gauss-Legendre over [a, b] with `panels` panels.
fn gauss_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(8 * panels);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + width / 2.0;
        let half = width / 2.0;
        for (x, w) in GL8 {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

fn require_static(model: &NumericModel) -> Result<()> {
    if !model.is_static_envelope() {
        return Err(Error::Model(
            "stroboscopic quantities are defined for a purely periodic drive".into(),
        ));
    }
    Ok(())
}

/// h(theta) as a matrix, from the static harmonic matrices.
fn phase_hamiltonian(parts: &[(i64, CMat)], theta: f64) -> CMat {
    let d = parts[0].1.dim();
    let mut out = CMat::zeros(d);
    for (n, m) in parts {
        out.axpy(C64::from_polar(1.0, *n as f64 * theta), m);
    }
    out
}

/// One-period monodromy propagator U(t_in + T, t_in) at initial phase
/// theta_in, by matrix RK4 with `steps` substeps.
pub fn monodromy(model: &NumericModel, theta_in: f64, steps: usize) -> Result<CMat> {
    require_static(model)?;
    let parts = model.fourier_matrices(model.t_in)?;
    let d = parts[0].1.dim();
    let period = std::f64::consts::TAU / model.omega;
    let dt = period / steps as f64;
    let h_at = |t: f64| phase_hamiltonian(&parts, model.omega * t + theta_in);
    let rhs = |t: f64, u: &CMat| -> CMat { (&h_at(t) * u).scale(C64::new(0.0, -1.0)) };
    let mut u = CMat::eye(d);
    for k in 0..steps {
        let t = model.t_in + k as f64 * dt;
        let k1 = rhs(t, &u);
        let mut y = u.clone();
        y.axpy(C64::new(dt / 2.0, 0.0), &k1);
        let k2 = rhs(t + dt / 2.0, &y);
        let mut y = u.clone();
        y.axpy(C64::new(dt / 2.0, 0.0), &k2);
        let k3 = rhs(t + dt / 2.0, &y);
        let mut y = u.clone();
        y.axpy(C64::new(dt, 0.0), &k3);
        let k4 = rhs(t + dt, &y);
        u.axpy(C64::new(dt / 6.0, 0.0), &k1);
        u.axpy(C64::new(dt / 3.0, 0.0), &k2);
        u.axpy(C64::new(dt / 3.0, 0.0), &k3);
        u.axpy(C64::new(dt / 6.0, 0.0), &k4);
    }
    Ok(u)
}

/// Stroboscopic Hamiltonian h_FS(theta_in) = (i/T) ln U(t_in + T, t_in),
/// principal branch. Eigenphases within 1e-6 of +-pi are a branch ambiguity
/// and are reported as an error rather than resolved.
pub fn fs_hamiltonian(model: &NumericModel, theta_in: f64) -> Result<CMat> {
    let u = monodromy(model, theta_in, 4096)?;
    let (omega_gen, margin) = u.unitary_log_principal();
    if margin < 1e-6 {
        return Err(Error::BranchAmbiguity {
            phase: std::f64::consts::PI - margin,
            margin,
        });
    }
    // U = e^{i Omega} = e^{-i h_FS T}  =>  h_FS = -Omega / T.
    let period = std::f64::consts::TAU / model.omega;
    Ok(omega_gen.scale(C64::new(-1.0 / period, 0.0)))
}

/// First three high-frequency terms of h_FS by nested composite
/// Gauss-Legendre quadrature of the ordered integrals (128 nodes per period
/// per nesting level):
///   term1 = (1/2pi) I1[h],
///   term2 = (1/(2 i omega)) (1/2pi) I2[[h1, h2]],
///   term3 = (1/(6 (i omega)^2)) (1/2pi) I3[[h1,[h2,h3]] + [h3,[h2,h1]]].
pub fn fs_magnus_terms(model: &NumericModel, theta_in: f64) -> Result<[CMat; 3]> {
    require_static(model)?;
    let parts = model.fourier_matrices(model.t_in)?;
    let d = parts[0].1.dim();
    let h = |theta: f64| phase_hamiltonian(&parts, theta);
    let (a, b) = (theta_in, theta_in + std::f64::consts::TAU);
    let panels = 16; // 128 nodes per level
    let outer = gauss_nodes(a, b, panels);

    // F(theta) = integral_a^theta h
    let prefix = |theta: f64| -> CMat {
        let mut acc = CMat::zeros(d);
        for (x, w) in gauss_nodes(a, theta, panels) {
            acc.axpy(C64::new(w, 0.0), &h(x));
        }
        acc
    };

    let mut term1 = CMat::zeros(d);
    for (x, w) in &outer {
        term1.axpy(C64::new(*w, 0.0), &h(*x));
    }
    term1 = term1.scale(C64::new(1.0 / std::f64::consts::TAU, 0.0));

    let mut i2 = CMat::zeros(d);
    for (x1, w1) in &outer {
        let inner = prefix(*x1);
        i2.axpy(C64::new(*w1, 0.0), &h(*x1).commutator(&inner));
    }
    // 1/(2 i omega) * (1/2pi)
    let term2 = i2.scale(C64::new(0.0, -1.0 / (2.0 * model.omega)) * C64::new(1.0 / std::f64::consts::TAU, 0.0));

    let mut i3 = CMat::zeros(d);
    for (x1, w1) in &outer {
        let h1 = h(*x1);
        // A-part inner: G(x1) = int_{a}^{x1} [h(x2), F(x2)] dx2
        let mut g = CMat::zeros(d);
        // B-part inner: int_{a}^{x1} [F(x2), [h(x2), h(x1)]] dx2
        let mut bpart = CMat::zeros(d);
        for (x2, w2) in gauss_nodes(a, *x1, panels) {
            let h2 = h(x2);
            let f2 = prefix(x2);
            g.axpy(C64::new(w2, 0.0), &h2.commutator(&f2));
            bpart.axpy(C64::new(w2, 0.0), &f2.commutator(&h2.commutator(&h1)));
        }
        i3.axpy(C64::new(*w1, 0.0), &(&h1.commutator(&g) + &bpart));
    }
    // 1/(6 (i omega)^2) * (1/2pi) = -1/(6 omega^2) * (1/2pi)
    let term3 = i3.scale(C64::new(
        -1.0 / (6.0 * model.omega * model.omega * std::f64::consts::TAU),
        0.0,
    ));

    Ok([term1, term2, term3])
}

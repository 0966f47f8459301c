//! Input-to-state stability certificates for the IDA-PBC closed loop.
//!
//! With `z = [|e|, |p_e|]` the Lyapunov function `V = H_d + rho e^T M^-1 p_e`
//! satisfies `k1 |z|^2 <= V <= k2 |z|^2` and
//! `V_dot <= -k3 |z|^2 + k_gamma |d|^2` inside the region where
//! `tr(I - R_e) <= alpha` and `|p| <= beta`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{desired_hamiltonian, potential_error, ErrorState, EuclideanGains, Gains};

#[derive(Debug, Error, PartialEq)]
pub enum CertError {
    #[error("{0} is not positive definite (min eigenvalue {1:e})")]
    NotPositiveDefinite(&'static str, f64),
    #[error("level sets are inverted: c1 = {c1} >= c2 = {c2}")]
    LevelSetsInverted { c1: f64, c2: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Smallest and largest eigenvalue of a symmetric matrix.
fn sym_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let e = SymmetricEigen::new(m.clone()).eigenvalues;
    (e.min(), e.max())
}

fn sym2_extremes(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mid = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid - r, mid + r)
}

/// `(lambda_min, lambda_max)` of the inverse mass matrix.
pub fn mass_bounds(minv: &DMatrix<f64>) -> Result<(f64, f64), CertError> {
    let (lo, hi) = sym_extremes(&(minv + minv.transpose()).scale(0.5));
    if !(lo > 0.0) {
        return Err(CertError::NotPositiveDefinite("M^-1", lo));
    }
    Ok((lo, hi))
}

fn dyn6(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(6, 6, m.as_slice())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QMatrices {
    pub q1: Matrix2<f64>,
    pub q2: Matrix2<f64>,
    pub q3: Matrix2<f64>,
}

impl QMatrices {
    fn check(&self) -> Result<(), CertError> {
        for (name, q) in [("Q1", &self.q1), ("Q2", &self.q2), ("Q3", &self.q3)] {
            let lo = sym2_extremes(q).0;
            if !(lo > 0.0) {
                return Err(CertError::NotPositiveDefinite(name, lo));
            }
        }
        Ok(())
    }

    fn constants(&self) -> (f64, f64, f64) {
        (0.5 * sym2_extremes(&self.q1).0, 0.5 * sym2_extremes(&self.q2).1, 0.5 * sym2_extremes(&self.q3).0)
    }
}

fn check_region(alpha: f64, beta: f64) -> Result<(), CertError> {
    if !(alpha > 0.0 && alpha < 4.0) {
        return Err(CertError::Invalid("alpha must lie in (0, 4)".into()));
    }
    if !(beta > 0.0) {
        return Err(CertError::Invalid("beta must be positive".into()));
    }
    Ok(())
}

/// The three 2x2 matrices bounding `V` and `V_dot`; errors if any is not positive definite.
pub fn q_matrices(minv: &Matrix6<f64>, gains: &Gains, alpha: f64, beta: f64) -> Result<QMatrices, CertError> {
    let q = q_matrices_unchecked(minv, gains, alpha, beta)?;
    q.check()?;
    Ok(q)
}

fn q_matrices_unchecked(minv: &Matrix6<f64>, gains: &Gains, alpha: f64, beta: f64) -> Result<QMatrices, CertError> {
    check_region(alpha, beta)?;
    let m = dyn6(minv);
    let (l1, l2) = mass_bounds(&m)?;
    let kd = dyn6(&gains.damping());
    let (gd, _) = sym_extremes(&kd);
    if !(gd > 0.0) {
        return Err(CertError::NotPositiveDefinite("K_d", gd));
    }
    let (_, mkm) = sym_extremes(&(&m * &kd * &m));
    let (kp, kr, rho) = (gains.k_p, gains.k_r, gains.rho);
    let off1 = rho * l2;
    let q1 = Matrix2::new((1.0 / kp).min(1.0 / kr), -off1, -off1, l1);
    let q2 = Matrix2::new((1.0 / kp).max(4.0 / (kr * (4.0 - alpha))), off1, off1, l2);
    let q12 = -rho * (mkm + beta * l2 * l2);
    let q3 = Matrix2::new(rho * l1, q12, q12, gd * l1 * l1 - 2.0 * rho * l2 * l2 * kp.max(kr));
    Ok(QMatrices { q1, q2, q3 })
}

/// Every number a certificate reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub alpha: f64,
    pub beta: f64,
    pub delta_d: f64,
    pub rho: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k_gamma: f64,
    /// Level of the ultimate bound set.
    pub c1: f64,
    /// Largest level set inside the certified region.
    pub c2: f64,
    /// Ultimate bound on the position error.
    pub uub_radius: f64,
    /// Largest disturbance bound that keeps `c1 < c2`.
    pub delta_cap: f64,
    pub q: QMatrices,
    pub valid: bool,
}

impl Certificate {
    /// Computes the constants without insisting on `c1 < c2`.
    pub fn compute(minv: &Matrix6<f64>, gains: &Gains, alpha: f64, beta: f64, delta_d: f64) -> Result<Self, CertError> {
        if !(delta_d >= 0.0 && delta_d.is_finite()) {
            return Err(CertError::Invalid("delta_d must be non-negative".into()));
        }
        let q = q_matrices(minv, gains, alpha, beta)?;
        let (l1, l2) = mass_bounds(&dyn6(minv))?;
        let (gd, _) = sym_extremes(&dyn6(&gains.damping()));
        let (k1, k2, k3) = q.constants();
        let k_gamma = 1.0 / (2.0 * gd) + gains.rho * l2 * l2 / (2.0 * l1);
        let c1 = k2 * k_gamma * delta_d * delta_d / k3;
        let c2 = k1 * (gains.k_r * gains.k_r * alpha * (4.0 - alpha) / 4.0).min(beta * beta);
        let uub_radius = (k2 * k_gamma / (k1 * k3 * gains.k_p * gains.k_p)).sqrt() * delta_d;
        let delta_cap = (c2 * k3 / (k2 * k_gamma)).sqrt();
        Ok(Self {
            alpha,
            beta,
            delta_d,
            rho: gains.rho,
            lambda1: l1,
            lambda2: l2,
            k1,
            k2,
            k3,
            k_gamma,
            c1,
            c2,
            uub_radius,
            delta_cap,
            q,
            valid: c1 < c2,
        })
    }
}

/// Certificate for the given gains and disturbance bound; errors when `c1 >= c2`.
pub fn certify(minv: &Matrix6<f64>, gains: &Gains, alpha: f64, beta: f64, delta_d: f64) -> Result<Certificate, CertError> {
    let c = Certificate::compute(minv, gains, alpha, beta, delta_d)?;
    if !c.valid {
        return Err(CertError::LevelSetsInverted { c1: c.c1, c2: c.c2 });
    }
    Ok(c)
}

/// Admissible cross-term weights, smallest first is the binding one.
pub fn rho_caps(minv: &Matrix6<f64>, gains: &Gains, beta: f64) -> Result<[f64; 4], CertError> {
    let (l1, l2) = mass_bounds(&dyn6(minv))?;
    let (gd, _) = sym_extremes(&dyn6(&gains.damping()));
    let (kp, kr) = (gains.k_p, gains.k_r);
    Ok([
        (l1 / (kr * l2 * l2)).sqrt(),
        (1.0 / (kp * l2)).sqrt(),
        gd * l1 * l1 / (2.0 * kr * l2 * l2),
        gd * l1.powi(3) / (l2 * l2 * (2.0 * l1 * kr + l2 * l2 * (gd + beta).powi(2))),
    ])
}

/// `margin * min(caps)`, the largest cross-term weight keeping all Q matrices definite.
pub fn select_rho(minv: &Matrix6<f64>, gains: &Gains, beta: f64, margin: f64) -> Result<f64, CertError> {
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(CertError::Invalid("margin must lie in (0, 1]".into()));
    }
    let caps = rho_caps(minv, gains, beta)?;
    let m = caps.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(m > 0.0 && m.is_finite()) {
        return Err(CertError::Invalid("no admissible rho".into()));
    }
    Ok(margin * m)
}

/// `V = H_d + rho e^T M^-1 p_e`.
pub fn lyapunov(err: &ErrorState, minv: &Matrix6<f64>, gains: &Gains) -> f64 {
    let e = potential_error(err, gains);
    desired_hamiltonian(err, gains, minv) + gains.rho * e.dot(&(minv * err.momentum))
}

/// `[|e|, |p_e|]`.
pub fn z_norms(err: &ErrorState, gains: &Gains) -> (f64, f64) {
    (potential_error(err, gains).norm(), err.momentum.norm())
}

/// Whether the error lies in the region where the certificate holds.
pub fn in_region(err: &ErrorState, alpha: f64, beta: f64) -> bool {
    3.0 - err.rotation.trace() <= alpha && err.momentum.norm() <= beta
}

/// Energy margin to the obstacle field:
/// `min(c2, k1 k_p^2 dbar^2) - V + max(c1 - V, 0)`.
pub fn delta_e(v: f64, dbar: f64, c1: f64, c2: f64, k1: f64, k_p: f64) -> f64 {
    c2.min(k1 * k_p * k_p * dbar * dbar) - v + (c1 - v).max(0.0)
}

/// Constants for a Euclidean system with `z = [k_p |q_e|, |p_e|]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanCertificate {
    pub delta_d: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k_gamma: f64,
    pub c1: f64,
    pub uub_radius: f64,
    pub q: QMatrices,
}

pub fn euclidean_q_matrices(minv: &DMatrix<f64>, gains: &EuclideanGains) -> Result<QMatrices, CertError> {
    let q = euclidean_q_unchecked(minv, gains)?;
    q.check()?;
    Ok(q)
}

fn euclidean_q_unchecked(minv: &DMatrix<f64>, gains: &EuclideanGains) -> Result<QMatrices, CertError> {
    let (l1, l2) = mass_bounds(minv)?;
    let kd = gains.damping();
    if kd.nrows() != minv.nrows() {
        return Err(CertError::Invalid("damping dimension mismatch".into()));
    }
    let (gd, _) = sym_extremes(&kd);
    if !(gd > 0.0) {
        return Err(CertError::NotPositiveDefinite("K_d", gd));
    }
    let (_, mkm) = sym_extremes(&(minv * &kd * minv));
    let (kp, rho) = (gains.k_p, gains.rho);
    let q1 = Matrix2::new(1.0 / kp, -rho * l2, -rho * l2, l1);
    let q2 = Matrix2::new(1.0 / kp, rho * l2, rho * l2, l2);
    let q3 = Matrix2::new(rho * l1, -rho * mkm, -rho * mkm, gd * l1 * l1 - 2.0 * rho * l2 * l2 * kp);
    Ok(QMatrices { q1, q2, q3 })
}

pub fn euclidean_certify(minv: &DMatrix<f64>, gains: &EuclideanGains, delta_d: f64) -> Result<EuclideanCertificate, CertError> {
    let q = euclidean_q_matrices(minv, gains)?;
    let (l1, l2) = mass_bounds(minv)?;
    let (gd, _) = sym_extremes(&gains.damping());
    let (k1, k2, k3) = q.constants();
    let k_gamma = 1.0 / (2.0 * gd) + gains.rho * l2 * l2 / (2.0 * l1);
    Ok(EuclideanCertificate {
        delta_d,
        lambda1: l1,
        lambda2: l2,
        k1,
        k2,
        k3,
        k_gamma,
        c1: k2 * k_gamma * delta_d * delta_d / k3,
        uub_radius: (k2 * k_gamma / (k1 * k3 * gains.k_p * gains.k_p)).sqrt() * delta_d,
        q,
    })
}

/// `V = 1/2 p^T M^-1 p + k_p/2 |q_e|^2 + rho k_p q_e^T M^-1 p`.
pub fn euclidean_lyapunov(q_e: &DVector<f64>, p: &DVector<f64>, minv: &DMatrix<f64>, gains: &EuclideanGains) -> f64 {
    let mp = minv * p;
    0.5 * p.dot(&mp) + 0.5 * gains.k_p * q_e.norm_squared() + gains.rho * gains.k_p * q_e.dot(&mp)
}

/// `k1 k_p^2 dbar^2 - V + max(c1 - V, 0)`.
pub fn euclidean_delta_e(v: f64, dbar: f64, c1: f64, k1: f64, k_p: f64) -> f64 {
    k1 * k_p * k_p * dbar * dbar - v + (c1 - v).max(0.0)
}

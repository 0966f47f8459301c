//! Explicit reference governor: moves a virtual goal along a path only as far
//! as the current energy margin allows.

use nalgebra::Vector3;
use thiserror::Error;

use crate::plant::State;
use crate::se3::Pose;
use crate::world::ReferencePath;

#[derive(Debug, Error, PartialEq)]
pub enum GovernorError {
    #[error("governor gain and time step must be positive")]
    BadParameters,
    #[error("initial energy margin {0} is not positive; start on the path at rest")]
    InfeasibleStart(f64),
}

/// Target state at `g` with identity attitude and zero momentum.
pub fn lift(g: &Vector3<f64>) -> State {
    State::at_rest(Pose::at(*g))
}

pub fn safe_zone_radius(delta_e: f64) -> f64 {
    delta_e.max(0.0).sqrt()
}

/// Largest path parameter whose point lies within `radius` of `g`, never below `sigma`.
pub fn local_projected_goal(path: &ReferencePath, sigma: f64, g: &Vector3<f64>, radius: f64) -> f64 {
    let (w, k) = (path.waypoints(), path.knots());
    let r2 = radius * radius;
    for i in (1..w.len()).rev() {
        if k[i] < sigma {
            break;
        }
        let (a, b) = (w[i - 1], w[i]);
        let seg = b - a;
        let ag = a - g;
        // |a + t seg - g|^2 = r^2
        let qa = seg.norm_squared();
        let qb = 2.0 * seg.dot(&ag);
        let qc = ag.norm_squared() - r2;
        let t = if qa == 0.0 {
            (qc <= 0.0).then_some(1.0)
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                None
            } else {
                let (lo, hi) = ((-qb - disc.sqrt()) / (2.0 * qa), (-qb + disc.sqrt()) / (2.0 * qa));
                (hi >= 0.0 && lo <= 1.0).then_some(hi.min(1.0))
            }
        };
        if let Some(t) = t {
            return (k[i - 1] + t * (k[i] - k[i - 1])).max(sigma);
        }
    }
    sigma
}

/// First-order update `sigma += dt k_g (sigma* - sigma)`, clamped to `[sigma, 1]`.
pub fn governor_step(sigma: f64, sigma_star: f64, k_g: f64, dt: f64) -> Result<f64, GovernorError> {
    if !(k_g > 0.0 && dt > 0.0) {
        return Err(GovernorError::BadParameters);
    }
    Ok((sigma + dt * k_g * (sigma_star - sigma)).clamp(sigma, 1.0))
}

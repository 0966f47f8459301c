//! Trajectory datasets and their JSONL form.

use std::io::{BufRead, Write};

use nalgebra::{Matrix3, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::LearnError;
use crate::se3::{is_rotation, Pose};

/// One recorded sequence under zero-order-hold inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// Position then row-major rotation.
    pub q: Vec<[f64; 12]>,
    pub zeta: Vec<[f64; 6]>,
    /// One input per interval.
    pub u: Vec<Vec<f64>>,
}

pub fn pose_from_q(q: &[f64; 12]) -> Pose {
    Pose::new(Vector3::new(q[0], q[1], q[2]), Matrix3::from_row_slice(&q[3..]))
}

pub fn q_from_pose(pose: &Pose) -> [f64; 12] {
    let mut q = [0.0; 12];
    q[..3].copy_from_slice(pose.position.as_slice());
    q[3..].copy_from_slice(&pose.rotation_entries());
    q
}

/// Single-interval training pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub q0: Pose,
    pub zeta0: Vector6<f64>,
    pub u: Vec<f64>,
    pub dt: f64,
    pub q1: Pose,
    pub zeta1: Vector6<f64>,
}

impl Trajectory {
    pub fn validate(&self) -> Result<(), LearnError> {
        let n = self.t.len();
        if n < 2 || self.q.len() != n || self.zeta.len() != n || self.u.len() != n - 1 {
            return Err(LearnError::Data("inconsistent sequence lengths".into()));
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LearnError::Data("times must be strictly increasing".into()));
        }
        if self.q.iter().any(|q| !is_rotation(&pose_from_q(q).rotation, 1e-6)) {
            return Err(LearnError::Data("configuration with an invalid rotation".into()));
        }
        Ok(())
    }

    /// Shift positions so the sequence starts at the origin.
    pub fn shift_to_origin(&mut self) {
        let p0 = [self.q[0][0], self.q[0][1], self.q[0][2]];
        for q in &mut self.q {
            for k in 0..3 {
                q[k] -= p0[k];
            }
        }
    }

    /// Consecutive pairs, each shifted to start at the origin.
    pub fn samples(&self) -> Vec<Sample> {
        (0..self.u.len())
            .map(|n| {
                let mut a = pose_from_q(&self.q[n]);
                let mut b = pose_from_q(&self.q[n + 1]);
                let off = a.position;
                a.position -= off;
                b.position -= off;
                Sample {
                    q0: a,
                    zeta0: Vector6::from_column_slice(&self.zeta[n]),
                    u: self.u[n].clone(),
                    dt: self.t[n + 1] - self.t[n],
                    q1: b,
                    zeta1: Vector6::from_column_slice(&self.zeta[n + 1]),
                }
            })
            .collect()
    }
}

pub fn dataset_samples(data: &[Trajectory]) -> Vec<Sample> {
    data.iter().flat_map(|t| t.samples()).collect()
}

pub fn write_jsonl<W: Write>(data: &[Trajectory], mut w: W) -> Result<(), LearnError> {
    for t in data {
        let line = serde_json::to_string(t).map_err(|e| LearnError::Data(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| LearnError::Data(e.to_string()))?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Trajectory>, LearnError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| LearnError::Data(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trajectory = serde_json::from_str(&line).map_err(|e| LearnError::Data(format!("line {}: {e}", i + 1)))?;
        t.validate()?;
        out.push(t);
    }
    Ok(out)
}

/// Hex SHA-256 of the JSONL encoding.
pub fn dataset_hash(data: &[Trajectory]) -> String {
    let mut buf = Vec::new();
    write_jsonl(data, &mut buf).expect("writing to memory");
    Sha256::digest(&buf).iter().map(|b| format!("{b:02x}")).collect()
}

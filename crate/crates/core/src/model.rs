//! Domain types and the frame convention shared by every other module.
//!
//! Frame: the origin is the intersection of the three actuator axes, leg `i`
//! slides along axis `i` (x, y, z). The base point `A_i` sits at the signed
//! coordinate `a` on its axis, the slider `B_i` at `a + rho_i`, and the leg end
//! `C_i` at `P - e * n_i`. The prescribed cube is `[q1, q2]^3` with
//! `q1 < 0 < q2`.
//!
//! Leg angles use cyclic components: the unit link direction of leg `i`,
//! expressed along (axis_i, axis_{i+1}, axis_{i+2}), is
//! `(cos(theta) cos(beta), sin(theta) cos(beta), -sin(beta))`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Relative tolerance used when checking the geometric invariants.
const INVARIANT_RTOL: f64 = 1e-9;

/// Unit vector along actuator axis `leg` (0, 1 or 2).
pub fn axis(leg: usize) -> Vec3 {
    let mut v = Vec3::zeros();
    v[leg] = 1.0;
    v
}

/// Indices of the two axes following `leg` cyclically.
#[inline]
pub(crate) fn cyclic(leg: usize) -> (usize, usize) {
    ((leg + 1) % 3, (leg + 2) % 3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    pub axes: [Vec3; 3],
}

impl Frame {
    /// Position of the tool point at which the mechanism is isotropic.
    pub fn isotropic_point(&self) -> Vec3 {
        self.origin
    }
}

pub fn canonical_frame() -> Frame {
    Frame { origin: Vec3::zeros(), axes: [axis(0), axis(1), axis(2)] }
}

/// Inputs of the design procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRequirements {
    /// Edge of the prescribed cubic workspace, mm.
    pub workspace_edge: f64,
    /// Upper bound on every velocity transmission factor.
    pub psi_max: f64,
    /// Offset `e` between the leg end points and the tool centre point, mm.
    pub tool_offset: f64,
}

impl DesignRequirements {
    pub fn new(workspace_edge: f64, psi_max: f64, tool_offset: f64) -> Result<Self> {
        let req = Self { workspace_edge, psi_max, tool_offset };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.workspace_edge.is_finite() && self.workspace_edge > 0.0) {
            return Err(Error::InvalidRequirement(format!(
                "workspace edge must be positive, got {}",
                self.workspace_edge
            )));
        }
        if !(self.tool_offset.is_finite() && self.tool_offset >= 0.0) {
            return Err(Error::InvalidRequirement(format!(
                "tool offset must be non-negative, got {}",
                self.tool_offset
            )));
        }
        if !self.psi_max.is_finite() || self.psi_max < 1.0 {
            return Err(Error::InvalidRequirement(format!(
                "psi_max must be at least 1, got {}",
                self.psi_max
            )));
        }
        Ok(())
    }

    pub fn psi_min(&self) -> f64 {
        1.0 / self.psi_max
    }
}

/// Fixed dimensions of one Orthoglide instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismGeometry {
    /// Parallelogram length `L = |B_i C_i|`, mm.
    pub leg_length: f64,
    /// Tool offset `e`, mm.
    pub tool_offset: f64,
    /// Signed base point coordinate `a = OA_i`, mm.
    pub base_offset: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Cube corner coordinate closest to the circle singularity, mm.
    pub q1: f64,
    /// Cube corner coordinate closest to the sphere singularity, mm.
    pub q2: f64,
}

impl MechanismGeometry {
    pub fn workspace_edge(&self) -> f64 {
        self.q2 - self.q1
    }

    pub fn stroke(&self) -> f64 {
        self.rho_max - self.rho_min
    }

    /// Ratio of the cube edge to the actuator stroke.
    pub fn stroke_ratio(&self) -> f64 {
        self.workspace_edge() / self.stroke()
    }

    pub fn q1_point(&self) -> Vec3 {
        Vec3::repeat(self.q1)
    }

    pub fn q2_point(&self) -> Vec3 {
        Vec3::repeat(self.q2)
    }

    /// Joint value shared by the three legs at the isotropic configuration.
    pub fn isotropic_rho(&self) -> f64 {
        -self.base_offset - self.leg_length - self.tool_offset
    }

    /// Every length multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            leg_length: self.leg_length * k,
            tool_offset: self.tool_offset * k,
            base_offset: self.base_offset * k,
            rho_min: self.rho_min * k,
            rho_max: self.rho_max * k,
            q1: self.q1 * k,
            q2: self.q2 * k,
        }
    }

    /// Basic sanity needed by every analysis routine.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.leg_length,
            self.tool_offset,
            self.base_offset,
            self.rho_min,
            self.rho_max,
            self.q1,
            self.q2,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite field".into()));
        }
        if self.leg_length <= 0.0 {
            return Err(Error::InvalidGeometry("leg length must be positive".into()));
        }
        if self.rho_max <= self.rho_min {
            return Err(Error::InvalidGeometry("rho_max must exceed rho_min".into()));
        }
        if self.q2 <= self.q1 {
            return Err(Error::InvalidGeometry("q2 must exceed q1".into()));
        }
        Ok(())
    }

    /// Full invariant set of a synthesized design. Returns the list of violated
    /// invariants, empty when the geometry is consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.validate() {
            out.push(e.to_string());
            return out;
        }
        let rel = |x: f64, y: f64| (x - y).abs() <= INVARIANT_RTOL * self.leg_length.max(y.abs());
        if self.rho_min != 0.0 {
            out.push(format!("rho_min = {} (expected 0)", self.rho_min));
        }
        let expected_a = self.q1 - self.tool_offset - self.leg_length;
        if !rel(self.base_offset, expected_a) {
            out.push(format!("base_offset = {} but q1 - e - L = {}", self.base_offset, expected_a));
        }
        if !(self.q1 < 0.0 && self.q2 > 0.0) {
            out.push(format!("expected q1 < 0 < q2, got q1 = {}, q2 = {}", self.q1, self.q2));
        }
        for (name, q) in [("Q1", self.q1), ("Q2", self.q2)] {
            if 3f64.sqrt() * q.abs() >= self.leg_length {
                out.push(format!("{name} is not strictly inside the sphere of radius L"));
            }
        }
        out
    }
}

/// Joint state of one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPosture {
    pub rho: f64,
    pub theta: f64,
    pub beta: f64,
    /// Unit direction of `C_i - B_i`.
    pub link_dir: Vec3,
}

/// Parallel Jacobian `A`, the diagonal of the serial Jacobian `B`, and
/// `J^-1 = B^-1 A` when `B` is invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianSet {
    pub a: Matrix3<f64>,
    pub b_diag: [f64; 3],
    pub j_inv: Option<Matrix3<f64>>,
}

impl JacobianSet {
    /// Index of the first leg in serial singularity, if any.
    pub fn serial_singular_leg(&self) -> Option<usize> {
        if self.j_inv.is_some() {
            None
        } else {
            self.b_diag.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(i, _)| i)
        }
    }

    pub fn inverse_jacobian(&self) -> Result<&Matrix3<f64>> {
        self.j_inv
            .as_ref()
            .ok_or(Error::SerialSingular { leg: self.serial_singular_leg().unwrap_or(0) })
    }
}

/// Velocity transmission factors along the principal axes of the
/// manipulability ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionReport {
    /// Ascending; an axis in parallel singularity carries `f64::INFINITY`.
    pub psi: [f64; 3],
    /// Principal directions, matched with `psi`.
    pub axes: [Vec3; 3],
    /// Condition number of `J^-1`, infinite at a parallel singularity.
    pub kappa: f64,
    /// Semi-axis lengths `1 / psi`, descending.
    pub xi: [f64; 3],
    pub parallel_singular: bool,
}

impl TransmissionReport {
    /// Force transmission factors, taken as the reciprocals of the velocity
    /// factors along the same axes (static duality of `J^-T`).
    pub fn force_factors(&self) -> [f64; 3] {
        self.xi
    }

    pub fn psi_max(&self) -> f64 {
        self.psi[2]
    }

    pub fn psi_min(&self) -> f64 {
        self.psi[0]
    }

    /// Transmission factor along the principal axis closest to `dir`.
    pub fn psi_along(&self, dir: &Vec3) -> f64 {
        let d = dir.normalize();
        let (i, _) = self
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.dot(&d).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three axes");
        self.psi[i]
    }
}

/// Joint limits along the cube diagonal for a given `psi_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimitSolution {
    /// Diagonal slope `t = c / sqrt(L^2 - 2 c^2)` at Q1 (negative).
    pub t_q1: f64,
    /// Diagonal slope at Q2 (positive).
    pub t_q2: f64,
    pub theta_q1: f64,
    pub beta_q1: f64,
    pub theta_q2: f64,
    pub beta_q2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_axes_are_the_coordinate_axes() {
        let f = canonical_frame();
        assert_eq!(f.axes[0], Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(f.axes[2], Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(f.isotropic_point(), Vec3::zeros());
    }

    #[test]
    fn requirements_validation() {
        assert!(DesignRequirements::new(200.0, 2.0, 0.0).is_ok());
        assert!(DesignRequirements::new(0.0, 2.0, 0.0).is_err());
        assert!(DesignRequirements::new(200.0, 0.5, 0.0).is_err());
        assert!(DesignRequirements::new(200.0, 2.0, -1.0).is_err());
        let r = DesignRequirements::new(200.0, 2.0, 0.0).unwrap();
        assert_eq!(r.psi_min(), 0.5);
    }

    #[test]
    fn tampered_geometry_reports_violation() {
        let g = MechanismGeometry {
            leg_length: 300.0,
            tool_offset: 0.0,
            base_offset: -373.0,
            rho_min: 0.0,
            rho_max: 250.0,
            q1: -73.0,
            q2: 127.0,
        };
        assert!(g.invariant_violations().is_empty());
        let bad = MechanismGeometry { leg_length: 270.0, ..g };
        assert_eq!(bad.invariant_violations().len(), 1);
    }
}

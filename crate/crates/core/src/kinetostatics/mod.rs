//! Manipulability ellipsoid, velocity transmission factors, condition number
//! and isotropy residuals.
//!
//! For joint rates in the unit ball, tool velocities fill the ellipsoid
//! `v^T (J J^T) v <= 1`. Its semi-axes `xi_i` are the square roots of the
//! eigenvalues of `(J J^T)^-1 = J^-T J^-1`, and the transmission factors are
//! `psi_i = 1 / xi_i`.

pub mod eigen;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::kinematics::{self, JointLimits};
use crate::model::{cyclic, MechanismGeometry, TransmissionReport, Vec3};

pub use eigen::{symmetric_eigen, SymmetricEigen};

/// A semi-axis shorter than this marks a parallel singularity.
pub const PARALLEL_TOL: f64 = 1e-10;

pub fn transmission(geom: &MechanismGeometry, p: &Vec3) -> Result<TransmissionReport> {
    let jac = kinematics::jacobians(geom, p)?;
    Ok(transmission_from_inverse_jacobian(jac.inverse_jacobian()?))
}

pub fn transmission_from_inverse_jacobian(j_inv: &Matrix3<f64>) -> TransmissionReport {
    let m = j_inv.transpose() * j_inv;
    let eig = symmetric_eigen(&m);
    // Semi-axis lengths as |J^-1 v|: same as sqrt(v^T M v) but without
    // squaring, so a vanishing axis is resolved to machine precision.
    let xi: [f64; 3] = std::array::from_fn(|i| (j_inv * eig.vectors[i]).norm());
    let axes = eig.vectors;
    // descending xi <=> ascending psi
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| xi[j].total_cmp(&xi[i]));
    let xi = order.map(|i| xi[i]);
    let axes = order.map(|i| axes[i]);

    let parallel_singular = xi[2] < PARALLEL_TOL;
    let psi = xi.map(|x| if x < PARALLEL_TOL { f64::INFINITY } else { 1.0 / x });
    let kappa = if parallel_singular { f64::INFINITY } else { xi[0] / xi[2] };
    TransmissionReport { psi, axes, kappa, xi, parallel_singular }
}

/// Condition number of `J^-1`; infinite at a parallel singularity.
pub fn condition_number(geom: &MechanismGeometry, p: &Vec3) -> Result<f64> {
    Ok(transmission(geom, p)?.kappa)
}

/// Transmission factors on the cube diagonal `p = (c, c, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalTransmission {
    /// `[along (1,1,1), orthogonal, orthogonal]`.
    pub psi: [f64; 3],
    pub parallel_singular: bool,
}

/// Diagonal slope `t = c / sqrt(L^2 - 2 c^2)`: the off-diagonal entry of
/// `J^-1` at `(c, c, c)`.
pub fn diagonal_slope(geom: &MechanismGeometry, c: f64) -> Result<f64> {
    let l = geom.leg_length;
    let radicand = l * l - 2.0 * c * c;
    if radicand <= 0.0 {
        return Err(Error::DomainError(format!(
            "|c| = {} must be below L / sqrt(2) = {}",
            c.abs(),
            l / 2f64.sqrt()
        )));
    }
    Ok(c / radicand.sqrt())
}

/// Closed form: `psi_1 = 1 / |1 + 2t|` along the diagonal and
/// `psi_2 = psi_3 = 1 / |1 - t|` across it.
pub fn diagonal_transmission(geom: &MechanismGeometry, c: f64) -> Result<DiagonalTransmission> {
    let t = diagonal_slope(geom, c)?;
    let xi = [(1.0 + 2.0 * t).abs(), (1.0 - t).abs(), (1.0 - t).abs()];
    let psi = xi.map(|x| if x < PARALLEL_TOL { f64::INFINITY } else { 1.0 / x });
    Ok(DiagonalTransmission { psi, parallel_singular: xi.iter().any(|&x| x < PARALLEL_TOL) })
}

/// Deviations from the isotropy conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyResiduals {
    /// `| |c_i - b_i| / eta_i - 1 |` per leg.
    pub length: [f64; 3],
    /// Cosines between links (1,2), (2,3) and (3,1), in absolute value.
    pub orthogonality: [f64; 3],
}

impl IsotropyResiduals {
    pub fn max(&self) -> f64 {
        self.length.iter().chain(&self.orthogonality).fold(0.0, |m, &v| m.max(v))
    }
}

pub fn isotropy_residual(geom: &MechanismGeometry, p: &Vec3) -> Result<IsotropyResiduals> {
    let rho = kinematics::inverse_kinematics(geom, p, JointLimits::Ignore)?;
    let links = kinematics::link_vectors(geom, p, &rho);
    let length = std::array::from_fn(|i| {
        let eta = links[i][i];
        if eta == 0.0 {
            f64::INFINITY
        } else {
            (links[i].norm() / eta - 1.0).abs()
        }
    });
    let orthogonality = std::array::from_fn(|i| {
        let (j, _) = cyclic(i);
        (links[i].dot(&links[j]) / (links[i].norm() * links[j].norm())).abs()
    });
    Ok(IsotropyResiduals { length, orthogonality })
}

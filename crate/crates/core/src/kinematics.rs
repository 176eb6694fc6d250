//! Closed-form inverse kinematics, forward kinematics by sphere intersection,
//! leg postures and the Jacobian triple.
//!
//! Each leg closes the loop `A_i B_i C_i P`: with the slider at `(a + rho_i) n_i`
//! and `C_i = P - e n_i`, the link `C_i - B_i` has length `L`, so `P` lies on a
//! sphere of radius `L` centred at `(a + e + rho_i) n_i`. Only the assembly mode
//! whose links point along `+n_i` is used, and among those poses only the ones
//! on the isotropic side of the parallel singularity surface (`det A > 0`).

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::model::{axis, cyclic, JacobianSet, LegPosture, MechanismGeometry, Vec3};

/// `|eta_i| < SERIAL_TOL * L` flags a serial singularity.
pub const SERIAL_TOL: f64 = 1e-10;

/// Slack on the stroke limits, relative to `L`.
const LIMIT_RTOL: f64 = 1e-9;

/// Negative reach radicands down to `-REACH_RTOL * L^2` count as zero, so
/// points on a reach cylinder survive rounding.
const REACH_RTOL: f64 = 1e-12;

/// Tolerance on the forward kinematics discriminant and branch test, relative
/// to `L^2` and `L` respectively.
const FK_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointLimits {
    /// Reject joint values outside `[rho_min, rho_max]`.
    Enforce,
    /// Geometric analysis mode: stroke limits are ignored.
    Ignore,
}

/// `L^2 - p_j^2 - p_k^2` for leg `leg`; negative outside its reach cylinder.
pub fn reach_radicand(geom: &MechanismGeometry, p: &Vec3, leg: usize) -> f64 {
    let (j, k) = cyclic(leg);
    let l = geom.leg_length;
    l * l - p[j] * p[j] - p[k] * p[k]
}

pub fn inverse_kinematics(geom: &MechanismGeometry, p: &Vec3, limits: JointLimits) -> Result<[f64; 3]> {
    let mut rho = [0.0; 3];
    for (leg, r) in rho.iter_mut().enumerate() {
        let radicand = reach_radicand(geom, p, leg);
        if radicand < -REACH_RTOL * geom.leg_length * geom.leg_length {
            return Err(Error::OutOfReach { leg, radicand });
        }
        *r = p[leg] - geom.tool_offset - geom.base_offset - radicand.max(0.0).sqrt();
    }
    if limits == JointLimits::Enforce {
        let slack = LIMIT_RTOL * geom.leg_length;
        for (leg, &r) in rho.iter().enumerate() {
            if r < geom.rho_min - slack || r > geom.rho_max + slack {
                return Err(Error::JointLimit { leg, rho: r, min: geom.rho_min, max: geom.rho_max });
            }
        }
    }
    Ok(rho)
}

/// Link vectors `c_i - b_i` for a tool point and the matching joint values.
pub fn link_vectors(geom: &MechanismGeometry, p: &Vec3, rho: &[f64; 3]) -> [Vec3; 3] {
    std::array::from_fn(|i| {
        let c = p - geom.tool_offset * axis(i);
        let b = (geom.base_offset + rho[i]) * axis(i);
        c - b
    })
}

/// Sign slack on `det A / L^3` for the working-mode test. Points on the
/// parallel singularity sphere, where `det A` touches zero, stay in the mode.
const MODE_TOL: f64 = 1e-10;

/// `det A / L^3` from link vectors.
fn det_links(links: &[Vec3; 3], l: f64) -> f64 {
    Matrix3::from_rows(&[links[0].transpose(), links[1].transpose(), links[2].transpose()]).determinant() / l.powi(3)
}

/// Whether the pose lies in the working assembly mode: links along `+n_i` and
/// `det A` of the same sign as at the isotropic configuration.
pub fn in_working_mode(geom: &MechanismGeometry, p: &Vec3, rho: &[f64; 3]) -> bool {
    let links = link_vectors(geom, p, rho);
    (0..3).all(|i| links[i][i] >= -FK_RTOL * geom.leg_length) && det_links(&links, geom.leg_length) >= -MODE_TOL
}

/// Tool point from joint values.
///
/// With `h_i = a + e + rho_i` and `w = |P|^2 - L^2`, each sphere equation gives
/// `p_i = (w + h_i^2) / (2 h_i)`, and substituting into `|P|^2 = w + L^2`
/// leaves a quadratic in `w`. The root is picked by the assembly-mode rule and
/// refined with one Newton step on the three sphere equations.
pub fn forward_kinematics(geom: &MechanismGeometry, rho: &[f64; 3]) -> Result<Vec3> {
    let l = geom.leg_length;
    let h: [f64; 3] = std::array::from_fn(|i| geom.base_offset + geom.tool_offset + rho[i]);
    let tiny = 1e-12 * l;
    let zero_legs: Vec<usize> = (0..3).filter(|&i| h[i].abs() < tiny).collect();

    let candidates: Vec<Vec3> = match zero_legs.as_slice() {
        [] => {
            let k: f64 = h.iter().map(|hi| 1.0 / (4.0 * hi * hi)).sum();
            let c0 = h.iter().map(|hi| hi * hi).sum::<f64>() / 4.0 - l * l;
            // k w^2 + w / 2 + c0 = 0
            let disc = 0.25 - 4.0 * k * c0;
            if disc < -FK_RTOL {
                return Err(Error::NoSolution);
            }
            let sq = disc.max(0.0).sqrt();
            let roots = [(-0.5 + sq) / (2.0 * k), (-0.5 - sq) / (2.0 * k)];
            roots
                .iter()
                .map(|w| Vec3::from_fn(|i, _| (w + h[i] * h[i]) / (2.0 * h[i])))
                .collect()
        }
        [i] => {
            // |P| = L, the other two coordinates follow directly.
            let (j, k) = cyclic(*i);
            let mut p = Vec3::zeros();
            p[j] = h[j] / 2.0;
            p[k] = h[k] / 2.0;
            let r = l * l - p[j] * p[j] - p[k] * p[k];
            if r < -FK_RTOL * l * l {
                return Err(Error::NoSolution);
            }
            let s = r.max(0.0).sqrt();
            let mut lo = p;
            p[*i] = s;
            lo[*i] = -s;
            vec![p, lo]
        }
        _ => return Err(Error::Degenerate),
    };

    let axial = |p: &Vec3| -> f64 { (0..3).map(|i| p[i] - h[i]).fold(f64::INFINITY, f64::min) };
    let det = |p: &Vec3| det_links(&std::array::from_fn(|i| p - h[i] * axis(i)), l);
    let tol = FK_RTOL * l;
    let mut valid: Vec<Vec3> = candidates.into_iter().filter(|p| axial(p) >= -tol).collect();
    let p = match valid.len() {
        0 => return Err(Error::NoSolution),
        1 => valid.pop().unwrap(),
        _ => {
            let working = |p: &Vec3| det(p) >= -MODE_TOL;
            let inside = |p: &Vec3| inverse_kinematics(geom, p, JointLimits::Enforce).is_ok();
            valid.sort_by(|a, b| {
                working(b)
                    .cmp(&working(a))
                    .then(inside(b).cmp(&inside(a)))
                    .then(axial(b).total_cmp(&axial(a)))
            });
            valid[0]
        }
    };
    Ok(newton_polish(&h, l, p))
}

fn newton_polish(h: &[f64; 3], l: f64, p: Vec3) -> Vec3 {
    let links: [Vec3; 3] = std::array::from_fn(|i| p - h[i] * axis(i));
    let jac = Matrix3::from_rows(&[links[0].transpose(), links[1].transpose(), links[2].transpose()]);
    let f = Vec3::from_fn(|i, _| (links[i].norm_squared() - l * l) / 2.0);
    match jac.lu().solve(&f) {
        Some(delta) if delta.iter().all(|d| d.is_finite()) && delta.norm() < 1e-3 * l => p - delta,
        _ => p,
    }
}

pub fn leg_postures(geom: &MechanismGeometry, p: &Vec3) -> Result<[LegPosture; 3]> {
    let rho = inverse_kinematics(geom, p, JointLimits::Ignore)?;
    Ok(postures_from(geom, p, &rho))
}

fn postures_from(geom: &MechanismGeometry, p: &Vec3, rho: &[f64; 3]) -> [LegPosture; 3] {
    let links = link_vectors(geom, p, rho);
    std::array::from_fn(|i| {
        let d = links[i] / geom.leg_length;
        let (j, k) = cyclic(i);
        LegPosture {
            rho: rho[i],
            theta: d[j].atan2(d[i]),
            beta: (-d[k]).clamp(-1.0, 1.0).asin(),
            link_dir: d,
        }
    })
}

/// Jacobians at `p`, in analysis mode (stroke limits ignored).
///
/// A serial singularity does not fail the call: `A` and `B` are returned and
/// `j_inv` is left empty.
pub fn jacobians(geom: &MechanismGeometry, p: &Vec3) -> Result<JacobianSet> {
    let rho = inverse_kinematics(geom, p, JointLimits::Ignore)?;
    Ok(jacobians_from(geom, p, &rho))
}

fn jacobians_from(geom: &MechanismGeometry, p: &Vec3, rho: &[f64; 3]) -> JacobianSet {
    let links = link_vectors(geom, p, rho);
    let a = Matrix3::from_rows(&[links[0].transpose(), links[1].transpose(), links[2].transpose()]);
    let b_diag: [f64; 3] = std::array::from_fn(|i| links[i][i]);
    let singular = b_diag.iter().any(|eta| eta.abs() < SERIAL_TOL * geom.leg_length);
    let j_inv = (!singular).then(|| {
        let mut m = a;
        for i in 0..3 {
            let mut row = m.row_mut(i);
            row /= b_diag[i];
        }
        m
    });
    JacobianSet { a, b_diag, j_inv }
}

/// Complete kinematic state at one tool point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseState {
    pub p: Vec3,
    pub legs: [LegPosture; 3],
    pub jacobians: JacobianSet,
}

pub fn pose_state(geom: &MechanismGeometry, p: &Vec3, limits: JointLimits) -> Result<PoseState> {
    let rho = inverse_kinematics(geom, p, limits)?;
    Ok(PoseState { p: *p, legs: postures_from(geom, p, &rho), jacobians: jacobians_from(geom, p, &rho) })
}

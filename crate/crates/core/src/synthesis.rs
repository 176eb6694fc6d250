//! Design procedure: from a cube edge, a transmission-factor bound and a tool
//! offset to the leg length, base position and actuator stroke.
//!
//! Along the cube diagonal `p = (c, c, c)` the inverse Jacobian is
//! `I + t (11^T - I)` with `t = c / sqrt(L^2 - 2 c^2)`, so the transmission
//! factors are `1 / |1 + 2t|` (diagonal axis) and `1 / |1 - t|` (twice). The
//! bounds `1/psi_max <= psi <= psi_max` cut an interval `[t_q1, t_q2]` around
//! the isotropic point, whose end points are the cube corners Q1 and Q2. The
//! diagonal slope maps back to a coordinate through `c = L t / sqrt(1 + 2 t^2)`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::kinetostatics;
use crate::model::{DesignRequirements, JointLimitSolution, MechanismGeometry, Vec3};

/// Largest supported `psi_max`. Above it the Q2 corner approaches the sphere
/// singularity and corner extremality is no longer checked by construction.
pub const PSI_MAX_CAP: f64 = 4.0;

/// Absolute slack on the transmission bounds when sampling a design.
pub const BOUND_TOL: f64 = 1e-6;

/// Grids coarser than this only probe the cube corners.
pub const LOW_RESOLUTION_GRID: usize = 3;

/// Crossing points of the diagonal transmission curves, as leg angles
/// `theta` in the angle convention where `tan(theta) = -t`. Only used to
/// bracket the numeric joint-limit solver and to place the Q2 branch switch.
mod crossings {
    pub fn s1() -> f64 {
        -((1.0 + 17f64.sqrt()) / 4.0).atan()
    }
    pub fn s2() -> f64 {
        -(0.5f64).atan()
    }
    pub fn s4() -> f64 {
        ((-1.0 + 17f64.sqrt()) / 4.0).atan()
    }
    /// `|2 tan(s2) - 1|`, the `psi_max` at which the Q2 branches meet.
    pub fn f1_s2() -> f64 {
        (2.0 * s2().tan() - 1.0).abs()
    }
}

/// `c / L` on the diagonal as a function of the slope `t`.
pub fn diagonal_coordinate_ratio(t: f64) -> f64 {
    t / (1.0 + 2.0 * t * t).sqrt()
}

fn check_psi_max(psi_max: f64) -> Result<()> {
    if !psi_max.is_finite() || psi_max < 1.0 {
        return Err(Error::InvalidRequirement(format!("psi_max must be at least 1, got {psi_max}")));
    }
    if psi_max == 1.0 {
        return Err(Error::DegenerateRequirement);
    }
    if psi_max > PSI_MAX_CAP {
        return Err(Error::UnsupportedRange(psi_max));
    }
    Ok(())
}

/// Diagonal slopes and leg angle magnitudes at Q1 and Q2.
pub fn joint_limits(psi_max: f64) -> Result<JointLimitSolution> {
    check_psi_max(psi_max)?;
    let t_q1 = -(psi_max - 1.0) / (2.0 * psi_max);
    let t_q2 = if psi_max <= crossings::f1_s2() {
        // the diagonal factor 1/|1+2t| reaches 1/psi_max first
        (psi_max - 1.0) / 2.0
    } else {
        // the transverse factors 1/|1-t| reach psi_max first
        (psi_max - 1.0) / psi_max
    };
    let angles = |t: f64| {
        let t = t.abs();
        (t.atan(), diagonal_coordinate_ratio(t).asin())
    };
    let (theta_q1, beta_q1) = angles(t_q1);
    let (theta_q2, beta_q2) = angles(t_q2);
    Ok(JointLimitSolution { t_q1, t_q2, theta_q1, beta_q1, theta_q2, beta_q2 })
}

/// Whether every diagonal transmission factor at slope `t` lies within the
/// bounds.
fn diagonal_feasible(t: f64, psi_max: f64) -> bool {
    let lo = 1.0 / psi_max;
    [(1.0 + 2.0 * t).abs(), (1.0 - t).abs()].iter().all(|&xi| {
        let psi = 1.0 / xi;
        psi >= lo && psi <= psi_max
    })
}

/// Joint-limit slopes found by bisection on the bound inequalities, without
/// using the closed forms. Returns `(t_q1, t_q2)`.
pub fn joint_limit_slopes_numeric(psi_max: f64) -> Result<(f64, f64)> {
    check_psi_max(psi_max)?;
    // Feasibility is monotone on each side of the isotropic point up to the
    // nearest singularity: t = -1/2 (circle) and t = 1 (sphere).
    let lower = (-0.5f64).max(-crossings::s4().tan());
    let upper = 1f64.min(-crossings::s1().tan());
    let bisect = |mut inside: f64, mut outside: f64| {
        while (outside - inside).abs() > 1e-15 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if diagonal_feasible(mid, psi_max) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    Ok((bisect(0.0, lower), bisect(0.0, upper)))
}

/// Leg angles at Q1 as closed-form functions of `psi_max`, signed in the
/// convention `tan(theta) = -t`: `(theta, beta)`.
pub fn q1_angles_closed_form(psi_max: f64) -> (f64, f64) {
    let k = psi_max - 1.0;
    let theta = (k / (2.0 * psi_max)).atan();
    let beta = -(k / (5.0 * psi_max * psi_max - 2.0 * psi_max + 1.0).sqrt()).atan();
    (theta, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Q2Branch {
    /// Binding constraint: transverse factors reach `psi_max`.
    Transverse,
    /// Binding constraint: diagonal factor reaches `1/psi_max`.
    Diagonal,
}

/// Leg angles at Q2 for one branch, same sign convention as
/// [`q1_angles_closed_form`].
pub fn q2_angles_closed_form(psi_max: f64, branch: Q2Branch) -> (f64, f64) {
    let k = psi_max - 1.0;
    match branch {
        Q2Branch::Transverse => (
            -(k / psi_max).atan(),
            (k / (2.0 * psi_max * psi_max - 2.0 * psi_max + 1.0).sqrt()).atan(),
        ),
        Q2Branch::Diagonal => {
            (-(k / 2.0).atan(), (k / (psi_max * psi_max - 2.0 * psi_max + 5.0).sqrt()).atan())
        }
    }
}

pub fn synthesize(req: &DesignRequirements) -> Result<MechanismGeometry> {
    req.validate()?;
    let limits = joint_limits(req.psi_max)?;
    let ratio_q1 = diagonal_coordinate_ratio(limits.t_q1);
    let ratio_q2 = diagonal_coordinate_ratio(limits.t_q2);
    let leg_length = req.workspace_edge / (ratio_q2 - ratio_q1);
    let q1 = leg_length * ratio_q1;
    let q2 = leg_length * ratio_q2;
    let e = req.tool_offset;
    let base_offset = q1 - e - leg_length;
    // L^2 - 2 q2^2 = L^2 cos^2(theta_q2) cos^2(beta_q2)
    let rho_max = q2 - base_offset - leg_length * (1.0 - 2.0 * ratio_q2 * ratio_q2).sqrt() - e;
    debug_assert!(ratio_q2 < FRAC_1_SQRT_2);
    Ok(MechanismGeometry { leg_length, tool_offset: e, base_offset, rho_min: 0.0, rho_max, q1, q2 })
}

/// Outcome of sampling the transmission factors over the prescribed cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalityReport {
    pub grid_n: usize,
    pub samples: usize,
    /// Largest transmission factor over the grid and where it occurs.
    pub max_psi: f64,
    pub max_psi_at: Vec3,
    /// Smallest transmission factor over the grid and where it occurs.
    pub min_psi: f64,
    pub min_psi_at: Vec3,
    pub psi_at_q1: [f64; 3],
    pub psi_at_q2: [f64; 3],
    /// Grid extrema are attained (within 1e-9) at the Q1 or Q2 cells.
    pub extrema_at_corners: bool,
    pub low_resolution: bool,
}

impl ExtremalityReport {
    pub fn passed(&self) -> bool {
        self.extrema_at_corners
    }
}

/// Grid check that the transmission bounds hold over `[q1, q2]^3` and that
/// the extreme factors sit at the Q1/Q2 corners.
pub fn verify_extremality(geom: &MechanismGeometry, psi_max: f64, grid_n: usize) -> Result<ExtremalityReport> {
    if psi_max.is_nan() || psi_max <= 1.0 {
        return Err(Error::InvalidRequirement(format!("psi_max must exceed 1, got {psi_max}")));
    }
    if grid_n < 2 {
        return Err(Error::DomainError(format!("grid must have at least 2 nodes per axis, got {grid_n}")));
    }
    geom.validate()?;
    let psi_lo = 1.0 / psi_max;
    let coords = lattice(geom.q1, geom.q2, grid_n);

    let mut worst: Option<(f64, Vec3, [f64; 3])> = None;
    let mut max_psi = (f64::NEG_INFINITY, Vec3::zeros());
    let mut min_psi = (f64::INFINITY, Vec3::zeros());
    let mut corner_psi = [[f64::NAN; 3]; 2];
    for (ix, &x) in coords.iter().enumerate() {
        for (iy, &y) in coords.iter().enumerate() {
            for (iz, &z) in coords.iter().enumerate() {
                let p = Vec3::new(x, y, z);
                let psi = match kinetostatics::transmission(geom, &p) {
                    Ok(r) => r.psi,
                    Err(_) => [f64::INFINITY; 3],
                };
                let severity = (psi[2] / psi_max).max(psi_lo / psi[0]);
                let violated = psi[2] > psi_max + BOUND_TOL || psi[0] < psi_lo - BOUND_TOL;
                if violated && worst.is_none_or(|w| severity > w.0) {
                    worst = Some((severity, p, psi));
                }
                if psi[2] > max_psi.0 {
                    max_psi = (psi[2], p);
                }
                if psi[0] < min_psi.0 {
                    min_psi = (psi[0], p);
                }
                let last = grid_n - 1;
                if ix == 0 && iy == 0 && iz == 0 {
                    corner_psi[0] = psi;
                } else if ix == last && iy == last && iz == last {
                    corner_psi[1] = psi;
                }
            }
        }
    }
    if let Some((_, point, psi)) = worst {
        return Err(Error::BoundViolation { point, psi });
    }
    let corner_max = corner_psi[0][2].max(corner_psi[1][2]);
    let corner_min = corner_psi[0][0].min(corner_psi[1][0]);
    let extrema_at_corners =
        max_psi.0 <= corner_max * (1.0 + 1e-9) && min_psi.0 >= corner_min * (1.0 - 1e-9);
    Ok(ExtremalityReport {
        grid_n,
        samples: grid_n.pow(3),
        max_psi: max_psi.0,
        max_psi_at: max_psi.1,
        min_psi: min_psi.0,
        min_psi_at: min_psi.1,
        psi_at_q1: corner_psi[0],
        psi_at_q2: corner_psi[1],
        extrema_at_corners,
        low_resolution: grid_n < LOW_RESOLUTION_GRID,
    })
}

/// `n` evenly spaced values from `lo` to `hi`, end points exact.
pub(crate) fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

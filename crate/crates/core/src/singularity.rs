//! Parallel and serial singularity detection and locus sampling.
//!
//! Parallel singularities are the zeros of `det A` (links coplanar or, with
//! all three links parallel, the sphere `|p| = L`); serial singularities are
//! the zeros of `det B = eta_1 eta_2 eta_3`, where a link is perpendicular to
//! its actuator axis.

use crate::error::{Error, Result};
use crate::kinematics::{self, JointLimits};
use crate::kinetostatics;
use crate::model::{axis, cyclic, MechanismGeometry, Vec3};
use crate::synthesis::lattice;

/// Normalised determinant threshold below which a Jacobian counts as singular.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Position tolerance of locus refinement, relative to `L`.
const REFINE_RTOL: f64 = 1e-6;

/// Tighter bracket used when a zero of `det A` is a tangential (double) root.
const TOUCH_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    Regular,
    Parallel,
    Serial,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityReport {
    /// `det A / L^3`.
    pub det_a_normalized: f64,
    /// `det B / L^3`.
    pub det_b_normalized: f64,
    pub class: SingularityClass,
}

/// `det A / L^3` at `p`, stroke limits ignored.
pub fn det_a_normalized(geom: &MechanismGeometry, p: &Vec3) -> Result<f64> {
    let jac = kinematics::jacobians(geom, p)?;
    Ok(jac.a.determinant() / geom.leg_length.powi(3))
}

pub fn classify(geom: &MechanismGeometry, p: &Vec3) -> Result<SingularityReport> {
    let jac = kinematics::jacobians(geom, p)?;
    let l3 = geom.leg_length.powi(3);
    let det_a_normalized = jac.a.determinant() / l3;
    let det_b_normalized = jac.b_diag.iter().product::<f64>() / l3;
    let parallel = det_a_normalized.abs() < SINGULAR_TOL;
    let serial = det_b_normalized.abs() < SINGULAR_TOL;
    let class = match (parallel, serial) {
        (false, false) => SingularityClass::Regular,
        (true, false) => SingularityClass::Parallel,
        (false, true) => SingularityClass::Serial,
        (true, true) => SingularityClass::Both,
    };
    Ok(SingularityReport { det_a_normalized, det_b_normalized, class })
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl BoundingBox {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if (0..3).any(|i| !min[i].is_finite() || !max[i].is_finite() || min[i] > max[i]) {
            return Err(Error::DomainError(format!("invalid box {min:?} .. {max:?}")));
        }
        Ok(Self { min, max })
    }

    pub fn cube(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Vec3::repeat(lo), Vec3::repeat(hi))
    }
}

/// Points of the parallel singularity locus inside `bbox`.
///
/// `det A` is sampled on a `grid_n^3` lattice and scanned along every lattice
/// line. A sign change between neighbours is refined by bisection to
/// `1e-6 L`. The sphere `|p| = L` is a double root of `det A` (no sign change),
/// so local minima of `|det A|` along a line are also refined, by golden
/// section, and kept when the refined value is below the singular tolerance.
/// The result is sorted lexicographically.
pub fn parallel_locus_sample(geom: &MechanismGeometry, bbox: &BoundingBox, grid_n: usize) -> Result<Vec<Vec3>> {
    if grid_n < 8 {
        return Err(Error::DomainError(format!("grid must have at least 8 nodes per axis, got {grid_n}")));
    }
    geom.validate()?;
    let l = geom.leg_length;
    let det = |p: &Vec3| det_a_normalized(geom, p).unwrap_or(f64::NAN);
    let ticks: [Vec<f64>; 3] = std::array::from_fn(|i| lattice(bbox.min[i], bbox.max[i], grid_n));

    let mut points = Vec::new();
    for dir in 0..3 {
        let (u, v) = cyclic(dir);
        for &cu in &ticks[u] {
            for &cv in &ticks[v] {
                let at = |s: f64| {
                    let mut p = Vec3::zeros();
                    p[dir] = s;
                    p[u] = cu;
                    p[v] = cv;
                    p
                };
                let line = &ticks[dir];
                let values: Vec<f64> = line.iter().map(|&s| det(&at(s))).collect();
                scan_line(line, &values, &|s| det(&at(s)), l, &mut |s| points.push(at(s)));
            }
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    points.dedup_by(|a, b| (*a - *b).norm() <= TOUCH_RTOL * l);
    if points.is_empty() {
        return Err(Error::EmptyLocus);
    }
    Ok(points)
}

fn scan_line(line: &[f64], values: &[f64], f: &dyn Fn(f64) -> f64, l: f64, emit: &mut dyn FnMut(f64)) {
    let n = line.len();
    for i in 0..n {
        let fi = values[i];
        if fi.is_nan() {
            continue;
        }
        if fi == 0.0 {
            emit(line[i]);
            continue;
        }
        if i + 1 < n {
            let fj = values[i + 1];
            if !fj.is_nan() && fj != 0.0 && fi.signum() != fj.signum() {
                emit(bisect(f, line[i], line[i + 1], fi, REFINE_RTOL * l));
            }
        }
        let left = if i > 0 { values[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { values[i + 1] } else { f64::INFINITY };
        let same_side = |g: f64| g.is_infinite() || (!g.is_nan() && g.signum() == fi.signum());
        if same_side(left) && same_side(right) && fi.abs() <= left.abs() && fi.abs() < right.abs() {
            let a = line[i.saturating_sub(1)];
            let b = line[(i + 1).min(n - 1)];
            let s = golden_min(&|s| f(s).abs(), a, b, TOUCH_RTOL * l);
            let g = f(s);
            if g.abs() < SINGULAR_TOL && g.signum() == fi.signum() {
                emit(s);
            }
        }
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.is_nan() || fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        // NaN (out of reach) counts as large
        if fc < fd || fd.is_nan() {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Serial singularity locus of one leg: the link is perpendicular to axis
/// `leg` exactly on the boundary of the reach cylinder
/// `p_j^2 + p_k^2 = L^2`. For a given slider position the locus is the circle
/// of that cylinder lying in the plane `p_leg = a + e + rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerialLocus {
    pub leg: usize,
    /// Normal of the planes swept by the locus.
    pub normal: Vec3,
    pub cylinder_radius: f64,
    /// Plane offsets covered by the stroke `[rho_min, rho_max]`.
    pub offset_range: (f64, f64),
}

impl SerialLocus {
    /// Plane coordinate along the leg axis for a slider position.
    pub fn plane_offset(&self, geom: &MechanismGeometry, rho: f64) -> f64 {
        geom.base_offset + geom.tool_offset + rho
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        let (j, k) = cyclic(self.leg);
        ((p[j] * p[j] + p[k] * p[k]).sqrt() - self.cylinder_radius).abs() <= tol
    }
}

pub fn serial_locus_planes(geom: &MechanismGeometry) -> [SerialLocus; 3] {
    let base = geom.base_offset + geom.tool_offset;
    std::array::from_fn(|leg| SerialLocus {
        leg,
        normal: axis(leg),
        cylinder_radius: geom.leg_length,
        offset_range: (base + geom.rho_min, base + geom.rho_max),
    })
}

/// Smallest semi-axis of the manipulability ellipsoid, for cross-checks with
/// [`classify`].
pub fn smallest_semi_axis(geom: &MechanismGeometry, p: &Vec3) -> Result<f64> {
    Ok(kinetostatics::transmission(geom, p)?.xi[2])
}

/// Whether a tool point lies inside the workspace and away from both kinds
/// of singularity by `margin` in normalised determinant.
pub fn is_clear(geom: &MechanismGeometry, p: &Vec3, margin: f64) -> bool {
    kinematics::inverse_kinematics(geom, p, JointLimits::Enforce).is_ok()
        && classify(geom, p).is_ok_and(|r| r.det_a_normalized.abs() >= margin && r.det_b_normalized.abs() >= margin)
}

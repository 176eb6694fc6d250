//! Workspace membership, prescribed-cube inclusion and cross-section field maps.

use std::io::{self, Write};

use crate::kinematics::{self, JointLimits};
use crate::kinetostatics;
use crate::model::{MechanismGeometry, Vec3};
use crate::singularity;

/// Default number of probes per cube edge in [`cube_inclusion`].
pub const DEFAULT_FACE_GRID: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inside,
    /// Outside the reach cylinder of at least one leg.
    OutsideReach,
    /// Reachable, but a joint value leaves `[rho_min, rho_max]`.
    OutsideStroke,
    /// Reachable within the strokes, but past the parallel singularity surface
    /// that bounds the working assembly mode.
    OtherMode,
}

pub fn contains(geom: &MechanismGeometry, p: &Vec3) -> Verdict {
    match kinematics::inverse_kinematics(geom, p, JointLimits::Enforce) {
        Ok(rho) if kinematics::in_working_mode(geom, p, &rho) => Verdict::Inside,
        Ok(_) => Verdict::OtherMode,
        Err(crate::Error::OutOfReach { .. }) => Verdict::OutsideReach,
        Err(_) => Verdict::OutsideStroke,
    }
}

/// How far `p` is from being inside, relative to `L`: 0 inside or in the other
/// assembly mode, the worst stroke overrun when reachable, and `1 +` the worst
/// reach overrun otherwise.
fn violation(geom: &MechanismGeometry, p: &Vec3) -> f64 {
    let l = geom.leg_length;
    match kinematics::inverse_kinematics(geom, p, JointLimits::Ignore) {
        Ok(rho) => rho
            .iter()
            .map(|&r| (geom.rho_min - r).max(r - geom.rho_max).max(0.0) / l)
            .fold(0.0, f64::max),
        Err(_) => {
            1.0 + (0..3)
                .map(|i| -kinematics::reach_radicand(geom, p, i) / (l * l))
                .fold(0.0, f64::max)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeInclusion {
    pub included: bool,
    /// Most severe failing probe, with its verdict.
    pub failure: Option<(Vec3, Verdict)>,
    pub probes: usize,
}

/// Probes the boundary of `[anchor, anchor + edge]^3` on a `per_edge`-point
/// lattice (faces, edges and corners).
pub fn cube_inclusion(geom: &MechanismGeometry, edge: f64, anchor: &Vec3, per_edge: usize) -> CubeInclusion {
    let n = per_edge.max(2);
    let ticks: [Vec<f64>; 3] =
        std::array::from_fn(|i| crate::synthesis::lattice(anchor[i], anchor[i] + edge, n));
    let mut worst: Option<(f64, Vec3, Verdict)> = None;
    let mut probes = 0;
    let last = n - 1;
    for (ix, &x) in ticks[0].iter().enumerate() {
        for (iy, &y) in ticks[1].iter().enumerate() {
            for (iz, &z) in ticks[2].iter().enumerate() {
                let on_boundary = [ix, iy, iz].iter().any(|&i| i == 0 || i == last);
                if !on_boundary {
                    continue;
                }
                probes += 1;
                let p = Vec3::new(x, y, z);
                let verdict = contains(geom, &p);
                if verdict != Verdict::Inside {
                    let v = violation(geom, &p);
                    if worst.is_none_or(|w| v > w.0) {
                        worst = Some((v, p, verdict));
                    }
                }
            }
        }
    }
    CubeInclusion { included: worst.is_none(), failure: worst.map(|(_, p, v)| (p, v)), probes }
}

/// Section plane `coordinate[axis] = offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub axis: usize,
    pub offset: f64,
}

impl Plane {
    /// In-plane axes, in increasing index order.
    pub fn in_plane_axes(&self) -> (usize, usize) {
        match self.axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRow {
    pub point: Vec3,
    pub psi: Option<[f64; 3]>,
    pub kappa: Option<f64>,
    pub det_a_norm: Option<f64>,
    pub rho: Option<[f64; 3]>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub plane: Plane,
    pub grid_n: usize,
    /// Row-major: the first in-plane axis varies fastest.
    pub rows: Vec<FieldRow>,
}

pub const CSV_HEADER: &str =
    "x_mm,y_mm,z_mm,psi1,psi2,psi3,kappa,detA_norm,rho1_mm,rho2_mm,rho3_mm,inside";

fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "nan".to_string(),
        Some(x) => format!("{x}"),
        None => "nan".to_string(),
    }
}

impl FieldMap {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            let mut cols: Vec<String> = (0..3).map(|i| fmt_num(Some(r.point[i]))).collect();
            cols.extend((0..3).map(|i| fmt_num(r.psi.map(|p| p[i]))));
            cols.push(fmt_num(r.kappa));
            cols.push(fmt_num(r.det_a_norm));
            cols.extend((0..3).map(|i| fmt_num(r.rho.map(|p| p[i]))));
            cols.push(if r.verdict == Verdict::Inside { "1" } else { "0" }.to_string());
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }

    /// Row whose node is closest to `(u, v)` in plane coordinates.
    pub fn nearest(&self, u: f64, v: f64) -> &FieldRow {
        let (iu, iv) = self.plane.in_plane_axes();
        self.rows
            .iter()
            .min_by(|a, b| {
                let da = (a.point[iu] - u).hypot(a.point[iv] - v);
                let db = (b.point[iu] - u).hypot(b.point[iv] - v);
                da.total_cmp(&db)
            })
            .expect("non-empty map")
    }
}

/// Node coordinates along one in-plane axis: the cube edge `[q1, q2]` padded
/// by about 5% on each side, with the padding snapped to whole grid steps so
/// that `q1` and `q2` fall on nodes whenever `grid_n` allows it.
pub fn section_ticks(geom: &MechanismGeometry, grid_n: usize) -> Vec<f64> {
    let intervals = grid_n.max(2) - 1;
    let pad = if intervals >= 3 { ((intervals as f64) / 22.0).round() as usize } else { 0 };
    let cube = intervals - 2 * pad;
    let step = geom.workspace_edge() / cube as f64;
    (0..=intervals)
        .map(|i| {
            if i == pad {
                geom.q1
            } else if i == pad + cube {
                geom.q2
            } else {
                geom.q1 + (i as f64 - pad as f64) * step
            }
        })
        .collect()
}

pub fn field_map(geom: &MechanismGeometry, plane: Plane, grid_n: usize) -> FieldMap {
    let ticks = section_ticks(geom, grid_n);
    let (iu, iv) = plane.in_plane_axes();
    let mut rows = Vec::with_capacity(ticks.len() * ticks.len());
    for &v in &ticks {
        for &u in &ticks {
            let mut p = Vec3::zeros();
            p[plane.axis] = plane.offset;
            p[iu] = u;
            p[iv] = v;
            rows.push(sample(geom, &p));
        }
    }
    FieldMap { plane, grid_n: ticks.len(), rows }
}

fn sample(geom: &MechanismGeometry, p: &Vec3) -> FieldRow {
    let verdict = contains(geom, p);
    if verdict != Verdict::Inside {
        return FieldRow { point: *p, psi: None, kappa: None, det_a_norm: None, rho: None, verdict };
    }
    let rho = kinematics::inverse_kinematics(geom, p, JointLimits::Enforce).ok();
    let report = kinetostatics::transmission(geom, p).ok();
    FieldRow {
        point: *p,
        psi: report.map(|r| r.psi),
        kappa: report.map(|r| r.kappa),
        det_a_norm: singularity::det_a_normalized(geom, p).ok(),
        rho,
        verdict,
    }
}

/// Whether `p` lies in the prescribed cube of `geom` (closed, with slack `tol`).
pub fn in_prescribed_cube(geom: &MechanismGeometry, p: &Vec3, tol: f64) -> bool {
    p.iter().all(|&c| c >= geom.q1 - tol && c <= geom.q2 + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::synthesize;
    use crate::DesignRequirements;
    use approx::assert_relative_eq;

    fn geom() -> MechanismGeometry {
        synthesize(&DesignRequirements::new(200.0, 2.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn cube_corners_inside() {
        let g = geom();
        for i in 0..8 {
            let p = Vec3::from_fn(|k, _| if i >> k & 1 == 1 { g.q2 } else { g.q1 });
            assert_eq!(contains(&g, &p), Verdict::Inside, "{p:?}");
        }
        let rho = kinematics::inverse_kinematics(&g, &Vec3::new(g.q2, g.q1, g.q1), JointLimits::Enforce).unwrap();
        // q2 - q1 + rho(Q1)
        assert_relative_eq!(rho[0], 217.7625, epsilon = 1e-4);
    }

    #[test]
    fn verdicts() {
        let g = geom();
        assert_eq!(contains(&g, &Vec3::repeat(130.0)), Verdict::OutsideStroke);
        assert_eq!(contains(&g, &Vec3::new(0.0, 400.0, 400.0)), Verdict::OutsideReach);
        // past the diagonal singularity at c = -L/sqrt(6), strokes still fine
        assert_eq!(contains(&g, &Vec3::repeat(-0.45 * g.leg_length)), Verdict::OtherMode);
    }

    #[test]
    fn prescribed_cube_is_included() {
        let g = geom();
        let r = cube_inclusion(&g, 200.0, &g.q1_point(), DEFAULT_FACE_GRID);
        assert!(r.included);
        assert_eq!(r.probes, 9usize.pow(3) - 7usize.pow(3));
    }

    #[test]
    fn larger_cube_fails_at_far_corner() {
        let g = geom();
        let r = cube_inclusion(&g, 220.0, &g.q1_point(), DEFAULT_FACE_GRID);
        assert!(!r.included);
        let (p, verdict) = r.failure.unwrap();
        assert_eq!(verdict, Verdict::OutsideStroke);
        assert!((p - Vec3::repeat(g.q1 + 220.0)).norm() < 1e-9);
    }

    #[test]
    fn tiny_cube_at_isotropic_point() {
        let g = geom();
        assert!(cube_inclusion(&g, 1e-6, &Vec3::zeros(), 3).included);
    }

    #[test]
    fn section_ticks_hit_cube_corners() {
        let g = geom();
        let t = section_ticks(&g, 50);
        assert_eq!(t.len(), 50);
        assert_eq!(t[2], g.q1);
        assert_eq!(t[47], g.q2);
        let t = section_ticks(&g, 2);
        assert_eq!(t, vec![g.q1, g.q2]);
    }

    #[test]
    fn map_through_q1() {
        let g = geom();
        let map = field_map(&g, Plane { axis: 2, offset: g.q1 }, 50);
        assert_eq!(map.rows.len(), 2500);
        for r in &map.rows {
            if in_prescribed_cube(&g, &r.point, 1e-9) {
                assert_eq!(r.verdict, Verdict::Inside);
                let psi = r.psi.unwrap();
                assert!(psi[0] >= 0.5 - 1e-6 && psi[2] <= 2.0 + 1e-6);
            }
        }
        let q1 = map.nearest(g.q1, g.q1);
        assert_relative_eq!(q1.psi.unwrap()[2], 2.0, epsilon = 1e-9);
        // row-major, x fastest
        assert!(map.rows[1].point.x > map.rows[0].point.x);
        assert_eq!(map.rows[1].point.y, map.rows[0].point.y);
    }

    #[test]
    fn map_through_isotropic_point() {
        let g = geom();
        let map = field_map(&g, Plane { axis: 2, offset: 0.0 }, 41);
        let r = map.nearest(0.0, 0.0);
        for psi in r.psi.unwrap() {
            assert!((psi - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn map_values_match_pointwise_calls() {
        let g = geom();
        let map = field_map(&g, Plane { axis: 0, offset: 10.0 }, 12);
        for r in map.rows.iter().filter(|r| r.verdict == Verdict::Inside) {
            let t = kinetostatics::transmission(&g, &r.point).unwrap();
            assert_eq!(r.psi.unwrap(), t.psi);
            assert_eq!(r.kappa.unwrap(), t.kappa);
        }
    }

    #[test]
    fn csv_uses_nan_for_outside_cells() {
        let g = geom();
        let map = field_map(&g, Plane { axis: 2, offset: g.q2 }, 20);
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let outside = lines.filter(|l| l.ends_with(",0")).collect::<Vec<_>>();
        assert!(!outside.is_empty());
        assert!(outside[0].contains(",nan,nan,nan,"));
    }
}

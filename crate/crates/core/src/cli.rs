//! Command-line front end of the `orthoglide` binary.
//!
//! Exit codes: 0 success, 1 failed verification or I/O error, 2 invalid
//! arguments or input files, 3 unsatisfiable design requirements, 4 point out
//! of reach, 5 no singularity in the sampled box.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::kinematics;
use crate::kinetostatics;
use crate::model::{DesignRequirements, JointLimitSolution, MechanismGeometry, Vec3};
use crate::singularity::{self, BoundingBox, SingularityClass};
use crate::synthesis;
use crate::workspace::{self, Plane, Verdict};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REQUIREMENT: i32 = 3;
pub const EXIT_OUT_OF_REACH: i32 = 4;
pub const EXIT_EMPTY_LOCUS: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "orthoglide", version, about = "Orthoglide design synthesis and kinetostatic analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a design from a cube size and a transmission-factor bound.
    Synth {
        /// Edge of the prescribed cubic workspace, mm.
        #[arg(long)]
        workspace: f64,
        /// Upper bound on the velocity transmission factors, in (1, 4].
        #[arg(long = "psi-max")]
        psi_max: f64,
        /// Tool offset e, mm.
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kinematic and kinetostatic report at one tool point.
    Analyze {
        /// Design file written by `synth`.
        design: PathBuf,
        /// Tool point "x,y,z" in mm.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Human-readable output instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Sample a cross-section of the workspace into a CSV file.
    Map {
        /// Design file written by `synth`.
        design: PathBuf,
        /// Section plane, e.g. "z=-73.2".
        #[arg(long, allow_hyphen_values = true)]
        plane: String,
        /// Samples per side of the section.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the parallel singularity locus inside a box.
    Singularities {
        /// Design file written by `synth`.
        design: PathBuf,
        /// "xmin,ymin,zmin,xmax,ymax,zmax" in mm.
        #[arg(long = "box", allow_hyphen_values = true)]
        bbox: String,
        /// Scan lines per box edge.
        #[arg(long, default_value_t = 24)]
        grid: usize,
        /// Point-cloud output path, one "x y z" line per point.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check transmission bounds and cube inclusion of a design.
    Verify {
        /// Design file written by `synth`.
        design: PathBuf,
        /// Samples per cube edge for the transmission bounds.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Probes per cube edge for the inclusion check.
        #[arg(long = "face-grid", default_value_t = workspace::DEFAULT_FACE_GRID)]
        face_grid: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimitsDeg {
    pub theta_q1_deg: f64,
    pub beta_q1_deg: f64,
    pub theta_q2_deg: f64,
    pub beta_q2_deg: f64,
}

impl From<&JointLimitSolution> for JointLimitsDeg {
    fn from(j: &JointLimitSolution) -> Self {
        Self {
            theta_q1_deg: j.theta_q1.to_degrees(),
            beta_q1_deg: j.beta_q1.to_degrees(),
            theta_q2_deg: j.theta_q2.to_degrees(),
            beta_q2_deg: j.beta_q2.to_degrees(),
        }
    }
}

/// On-disk design file written by `synth` and read by every other command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub leg_length_mm: f64,
    pub tool_offset_mm: f64,
    pub base_offset_mm: f64,
    pub rho_min_mm: f64,
    pub rho_max_mm: f64,
    pub q1_mm: f64,
    pub q2_mm: f64,
    pub psi_max: f64,
    pub workspace_edge_mm: f64,
    pub joint_limits: JointLimitsDeg,
    pub stroke_ratio: f64,
}

impl DesignDocument {
    pub fn new(req: &DesignRequirements, geom: &MechanismGeometry, limits: &JointLimitSolution) -> Self {
        Self {
            leg_length_mm: geom.leg_length,
            tool_offset_mm: geom.tool_offset,
            base_offset_mm: geom.base_offset,
            rho_min_mm: geom.rho_min,
            rho_max_mm: geom.rho_max,
            q1_mm: geom.q1,
            q2_mm: geom.q2,
            psi_max: req.psi_max,
            workspace_edge_mm: req.workspace_edge,
            joint_limits: limits.into(),
            stroke_ratio: req.workspace_edge / geom.stroke(),
        }
    }

    pub fn geometry(&self) -> MechanismGeometry {
        MechanismGeometry {
            leg_length: self.leg_length_mm,
            tool_offset: self.tool_offset_mm,
            base_offset: self.base_offset_mm,
            rho_min: self.rho_min_mm,
            rho_max: self.rho_max_mm,
            q1: self.q1_mm,
            q2: self.q2_mm,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read design {}: {e}", path.display())))?;
        let doc: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("malformed design {}: {e}", path.display())))?;
        doc.geometry().validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    fn io(e: io::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Synth { workspace, psi_max, offset, out: path } => {
            let doc = cmd_synth(*workspace, *psi_max, *offset)?;
            let text = serde_json::to_string_pretty(&doc).expect("design serializes");
            emit(path.as_deref(), &text, out)?;
            Ok(0)
        }
        Command::Analyze { design, point, text } => {
            let doc = DesignDocument::load(design)?;
            let p = parse_point(point)?;
            let report = cmd_analyze(&doc.geometry(), &p)?;
            if *text {
                write!(out, "{}", report.to_text()).map_err(CliError::io)?;
            } else {
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                writeln!(out, "{json}").map_err(CliError::io)?;
            }
            Ok(0)
        }
        Command::Map { design, plane, grid, out: path } => {
            let doc = DesignDocument::load(design)?;
            let plane = parse_plane(plane)?;
            if *grid < 2 {
                return Err(CliError::usage("--grid must be at least 2"));
            }
            let map = workspace::field_map(&doc.geometry(), plane, *grid);
            let file = fs::File::create(path).map_err(CliError::io)?;
            map.write_csv(io::BufWriter::new(file)).map_err(CliError::io)?;
            let inside = map.rows.iter().filter(|r| r.verdict == Verdict::Inside).count();
            writeln!(out, "wrote {} rows ({inside} inside) to {}", map.rows.len(), path.display())
                .map_err(CliError::io)?;
            Ok(0)
        }
        Command::Singularities { design, bbox, grid, out: path } => {
            let doc = DesignDocument::load(design)?;
            let bbox = parse_box(bbox)?;
            let points = cmd_singularities(&doc.geometry(), &bbox, *grid)?;
            let mut text = String::new();
            for p in &points {
                text.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
            }
            fs::write(path, text).map_err(CliError::io)?;
            writeln!(out, "wrote {} points to {}", points.len(), path.display()).map_err(CliError::io)?;
            Ok(0)
        }
        Command::Verify { design, grid, face_grid } => {
            let doc = DesignDocument::load(design)?;
            let outcome = cmd_verify(&doc, *grid, *face_grid)?;
            write!(out, "{}", outcome.text).map_err(CliError::io)?;
            if outcome.low_resolution {
                writeln!(err, "warning: LowResolution: grid {grid} samples only the cube corners")
                    .map_err(CliError::io)?;
            }
            Ok(if outcome.passed { 0 } else { EXIT_FAILURE })
        }
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(CliError::io),
        None => writeln!(out, "{text}").map_err(CliError::io),
    }
}

pub fn cmd_synth(workspace: f64, psi_max: f64, offset: f64) -> Result<DesignDocument, CliError> {
    let req = DesignRequirements::new(workspace, psi_max, offset).map_err(|e| match e {
        // psi_max = 1 passes validation and is rejected by the solver below
        e @ Error::InvalidRequirement(_) => CliError::usage(e.to_string()),
        e => CliError::new(EXIT_REQUIREMENT, e.to_string()),
    })?;
    let requirement = |e: Error| CliError::new(EXIT_REQUIREMENT, e.to_string());
    let limits = synthesis::joint_limits(req.psi_max).map_err(requirement)?;
    let geom = synthesis::synthesize(&req).map_err(requirement)?;
    Ok(DesignDocument::new(&req, &geom, &limits))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegReport {
    pub rho_mm: f64,
    pub theta_deg: f64,
    pub beta_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub point_mm: [f64; 3],
    pub verdict: &'static str,
    pub legs: Vec<LegReport>,
    /// Ascending; null for an axis in parallel singularity, or when the pose
    /// is serial singular.
    pub psi: Option<[Option<f64>; 3]>,
    pub psi_axes: Option<[[f64; 3]; 3]>,
    pub kappa: Option<f64>,
    #[serde(rename = "detA_norm")]
    pub det_a_norm: f64,
    #[serde(rename = "detB_norm")]
    pub det_b_norm: f64,
    pub singularity: &'static str,
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("inf".to_string(), |x| format!("{x:.6}"));
        let [x, y, z] = self.point_mm;
        let mut s = format!("point      ({x:.3}, {y:.3}, {z:.3}) mm\nverdict    {}\n", self.verdict);
        for (i, leg) in self.legs.iter().enumerate() {
            s.push_str(&format!(
                "leg {}      rho {:.6} mm  theta {:.4} deg  beta {:.4} deg\n",
                i + 1,
                leg.rho_mm,
                leg.theta_deg,
                leg.beta_deg
            ));
        }
        match &self.psi {
            Some(psi) => {
                s.push_str(&format!("psi        {} {} {}\n", fmt(psi[0]), fmt(psi[1]), fmt(psi[2])));
                s.push_str(&format!("kappa      {}\n", fmt(self.kappa)));
            }
            None => s.push_str("psi        undefined (serial singularity)\n"),
        }
        s.push_str(&format!("detA/L^3   {:.6}\nsingular   {}\n", self.det_a_norm, self.singularity));
        s
    }
}

pub fn cmd_analyze(geom: &MechanismGeometry, p: &Vec3) -> Result<AnalysisReport, CliError> {
    let reach = |e: Error| match e {
        Error::OutOfReach { .. } => CliError::new(EXIT_OUT_OF_REACH, e.to_string()),
        e => CliError::new(EXIT_FAILURE, e.to_string()),
    };
    let legs = kinematics::leg_postures(geom, p).map_err(reach)?;
    let class = singularity::classify(geom, p).map_err(reach)?;
    let verdict = match workspace::contains(geom, p) {
        Verdict::Inside => "inside",
        Verdict::OutsideStroke => "outside_stroke",
        Verdict::OutsideReach => "outside_reach",
        Verdict::OtherMode => "other_mode",
    };
    let finite = |v: f64| v.is_finite().then_some(v);
    let (psi, psi_axes, kappa) = match kinetostatics::transmission(geom, p) {
        Ok(t) => (
            Some(t.psi.map(finite)),
            Some(t.axes.map(|a| [a.x, a.y, a.z])),
            finite(t.kappa),
        ),
        Err(Error::SerialSingular { .. }) => (None, None, None),
        Err(e) => return Err(reach(e)),
    };
    Ok(AnalysisReport {
        point_mm: [p.x, p.y, p.z],
        verdict,
        legs: legs
            .iter()
            .map(|l| LegReport { rho_mm: l.rho, theta_deg: l.theta.to_degrees(), beta_deg: l.beta.to_degrees() })
            .collect(),
        psi,
        psi_axes,
        kappa,
        det_a_norm: class.det_a_normalized,
        det_b_norm: class.det_b_normalized,
        singularity: match class.class {
            SingularityClass::Regular => "regular",
            SingularityClass::Parallel => "parallel",
            SingularityClass::Serial => "serial",
            SingularityClass::Both => "both",
        },
    })
}

pub fn cmd_singularities(geom: &MechanismGeometry, bbox: &BoundingBox, grid: usize) -> Result<Vec<Vec3>, CliError> {
    singularity::parallel_locus_sample(geom, bbox, grid).map_err(|e| match e {
        Error::EmptyLocus => CliError::new(EXIT_EMPTY_LOCUS, e.to_string()),
        e => CliError::usage(e.to_string()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub passed: bool,
    pub low_resolution: bool,
    pub text: String,
}

pub fn cmd_verify(doc: &DesignDocument, grid: usize, face_grid: usize) -> Result<VerifyOutcome, CliError> {
    if grid < 2 {
        return Err(CliError::usage("--grid must be at least 2"));
    }
    let geom = doc.geometry();
    let mut text = String::new();
    let mut passed = true;

    let violations = geom.invariant_violations();
    if violations.is_empty() {
        text.push_str("geometry     ok\n");
    } else {
        passed = false;
        for v in &violations {
            text.push_str(&format!("geometry     FAIL {v}\n"));
        }
    }

    let mut low_resolution = grid < synthesis::LOW_RESOLUTION_GRID;
    match synthesis::verify_extremality(&geom, doc.psi_max, grid) {
        Ok(r) => {
            low_resolution = r.low_resolution;
            text.push_str(&format!(
                "bounds       ok on {}^3 grid: psi in [{:.9}, {:.9}]\n",
                r.grid_n, r.min_psi, r.max_psi
            ));
            if r.extrema_at_corners {
                text.push_str("extrema      ok at Q1/Q2 corners\n");
            } else {
                passed = false;
                let (a, b) = (r.max_psi_at, r.min_psi_at);
                text.push_str(&format!(
                    "extrema      FAIL max at ({:.3}, {:.3}, {:.3}), min at ({:.3}, {:.3}, {:.3})\n",
                    a.x, a.y, a.z, b.x, b.y, b.z
                ));
            }
        }
        Err(e @ Error::BoundViolation { .. }) => {
            passed = false;
            text.push_str(&format!("bounds       FAIL {e}\n"));
        }
        Err(e) => return Err(CliError::usage(e.to_string())),
    }

    let inclusion = workspace::cube_inclusion(&geom, geom.workspace_edge(), &geom.q1_point(), face_grid);
    match inclusion.failure {
        None => text.push_str(&format!("inclusion    ok ({} boundary probes)\n", inclusion.probes)),
        Some((p, verdict)) => {
            passed = false;
            text.push_str(&format!(
                "inclusion    FAIL {verdict:?} at ({:.3}, {:.3}, {:.3})\n",
                p.x, p.y, p.z
            ));
        }
    }
    text.push_str(if passed { "result       PASS\n" } else { "result       FAIL\n" });
    Ok(VerifyOutcome { passed, low_resolution, text })
}

fn parse_numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::usage(format!("expected {n} comma-separated numbers for {what}, got {s:?}"))),
    }
}

pub fn parse_point(s: &str) -> Result<Vec3, CliError> {
    let v = parse_numbers(s, 3, "--point")?;
    Ok(Vec3::new(v[0], v[1], v[2]))
}

pub fn parse_plane(s: &str) -> Result<Plane, CliError> {
    let bad = || CliError::usage(format!("plane must look like \"z=<mm>\", got {s:?}"));
    let (name, value) = s.split_once('=').ok_or_else(bad)?;
    let axis = match name.trim() {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        _ => return Err(bad()),
    };
    let offset: f64 = value.trim().parse().map_err(|_| bad())?;
    if !offset.is_finite() {
        return Err(bad());
    }
    Ok(Plane { axis, offset })
}

pub fn parse_box(s: &str) -> Result<BoundingBox, CliError> {
    let v = parse_numbers(s, 6, "--box")?;
    BoundingBox::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
        .map_err(|e| CliError::usage(e.to_string()))
}

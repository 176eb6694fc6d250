//! Design synthesis and kinetostatic analysis of the Orthoglide, a three-axis
//! translational parallel kinematic machine with orthogonal linear actuators and
//! parallelogram legs.
//!
//! The crate maps a prescribed cubic workspace and a bound on the velocity
//! transmission factors to a full mechanism geometry ([`synthesis`]), and provides
//! the analyses needed to check a design: closed-form kinematics
//! ([`kinematics`]), manipulability and transmission factors ([`kinetostatics`]),
//! singularity classification and loci ([`singularity`]), and workspace sampling
//! ([`workspace`]). The [`cli`] module backs the `orthoglide` binary.
//!
//! All lengths are in millimetres and all angles in radians unless a name says
//! otherwise.

pub mod cli;
pub mod error;
pub mod kinematics;
pub mod kinetostatics;
pub mod model;
pub mod singularity;
pub mod synthesis;
pub mod workspace;

pub use error::{Error, Result};
pub use model::{
    canonical_frame, DesignRequirements, Frame, JacobianSet, JointLimitSolution, LegPosture,
    MechanismGeometry, TransmissionReport, Vec3,
};

use crate::model::Vec3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid design requirements: {0}")]
    InvalidRequirement(String),

    #[error("invalid mechanism geometry: {0}")]
    InvalidGeometry(String),

    /// The point lies outside the reachability cylinder of a leg.
    #[error("leg {leg} cannot reach the point (radicand {radicand:.6e} mm^2)")]
    OutOfReach { leg: usize, radicand: f64 },

    #[error("leg {leg} joint value {rho:.6} mm is outside [{min}, {max}]")]
    JointLimit { leg: usize, rho: f64, min: f64, max: f64 },

    #[error("the three leg spheres do not intersect")]
    NoSolution,

    #[error("forward kinematics is degenerate for the given joint values")]
    Degenerate,

    #[error("serial singularity: leg {leg} link is perpendicular to its actuator axis")]
    SerialSingular { leg: usize },

    #[error("parallel singularity: the manipulability ellipsoid is flat")]
    ParallelSingular,

    #[error("{0}")]
    DomainError(String),

    #[error("no singularity found in the sampled box")]
    EmptyLocus,

    #[error("psi_max = 1 collapses the joint limits onto the isotropic point")]
    DegenerateRequirement,

    #[error("psi_max = {0} is above the supported cap of {cap}", cap = crate::synthesis::PSI_MAX_CAP)]
    UnsupportedRange(f64),

    #[error("transmission bound violated at ({:.6}, {:.6}, {:.6}): psi = {psi:?}", point.x, point.y, point.z)]
    BoundViolation { point: Vec3, psi: [f64; 3] },
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, OrbitError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("grid of {n_t} points is too coarse for {harmonics} odd harmonics (need at least {min})")]
    GridTooCoarse {
        n_t: usize,
        harmonics: usize,
        min: usize,
    },

    #[error("pairwise quantities need at least two bodies")]
    SingleBody,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("separation must be positive, got {0}")]
    NonPositiveSeparation(f64),

    #[error("pair potential is undefined for i = j = {0}")]
    SelfPair(usize),

    #[error("bodies {i} and {j} coincide at grid node {node}")]
    CollisionSample { node: usize, i: usize, j: usize },

    #[error("r = {r} lies outside the strong-force witness range (0, {r1})")]
    OutOfWitnessRange { r: f64, r1: f64 },

    #[error("theta = {0} violates theta < 2; no finite coercivity bound exists")]
    ThetaOutOfRange(f64),

    #[error("starting loop touches the collision set: {0}")]
    InvalidStart(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invalid orbit file: {0}")]
    OrbitFileInvalid(String),
}

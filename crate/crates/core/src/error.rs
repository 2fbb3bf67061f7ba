use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-hyperbolic data: [Phi'] = {dphi_jump}, [r] = {r_jump}")]
    NonHyperbolic { dphi_jump: f64, r_jump: f64 },

    #[error("argument {w} outside [-1, 1]")]
    OutOfDomain { w: f64 },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("degenerate jump: r- equals r+ ({r})")]
    DegenerateJump { r: f64 },

    #[error("complex sound speed: Phi''({r}) = {d2}")]
    ComplexSoundSpeed { r: f64, d2: f64 },

    #[error("corrector diverged near ({r_minus}, {r_plus})")]
    CorrectorDiverged { r_minus: f64, r_plus: f64 },

    #[error("profile has no sign change on the grid")]
    NoCrossing,

    #[error("profile value {value} at node {index} outside the tolerated band")]
    PotentialDomain { index: usize, value: f64 },

    #[error("no regime pattern matched after {iterations} iterations")]
    Indeterminate { iterations: usize },

    #[error("sonic limit: lambda = {lambda}")]
    Sonic { lambda: f64 },

    #[error("lambda must be positive, got {lambda}")]
    NonPositive { lambda: f64 },

    #[error("only {found} nodes inside the fit band (need 8)")]
    InsufficientPoints { found: usize },

    #[error("profile and shock data do not describe the same front: {0}")]
    MismatchedShock(String),

    #[error("blow-up at t = {time}: |v| = {speed} at atom {atom}")]
    Instability { time: f64, atom: usize, speed: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors surfaced by the algebra, bracket and simulation layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoreError {
    #[error("incompatible Grassmann algebras: {0} vs {1} generators")]
    IncompatibleAlgebras(usize, usize),
    #[error("generator index {index} out of range for {n_generators} generators")]
    GeneratorOutOfRange { index: usize, n_generators: usize },
    #[error("generator budget exceeded: {0} > 16")]
    TooManyGenerators(usize),
    #[error("statistics mismatch between operands")]
    StatisticsMismatch,
    #[error("derivative side {side} not available in the {track} track")]
    WrongDerivativeSide { side: String, track: String },
    #[error("bracket requires homogeneous parity, got a mixed-parity operand")]
    MixedParity,
    #[error("bracket kind rejects these operands: {0}")]
    BracketDomain(String),
    #[error("no value assigned to atom {0}")]
    MissingAtomValue(String),
    #[error("invalid track/Lagrangian pairing: {0}")]
    InvalidPairing(String),
    #[error("constraint matrix is singular; a first-class constraint slipped through")]
    SingularConstraintMatrix,
    #[error("consistency condition failed to determine the multiplier for {0}")]
    IndeterminateMultiplier(String),
    #[error("lattice too small: need at least 3 sites per axis for central differences")]
    LatticeTooSmall,
    #[error("configuration is off shell: constraint residual {0:.3e} above 1e-10")]
    OffShell(f64),
    #[error("integration unstable: norm grew by factor {0:.3e}")]
    Unstable(f64),
    #[error("time step {dt} violates the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("Fock mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },
    #[error("Fock space too large: {0} modes > 12")]
    FockTooLarge(usize),
    #[error("quantization recipe expects a spinor on the left and a Dirac adjoint on the right, got {0}")]
    RecipePairing(String),
    #[error("functional is not a sum of adjoint-times-spinor bilinears: {0}")]
    NonBilinear(String),
    #[error("operator scales differ; cannot combine v^{0}/2 with v^{1}/2")]
    ScaleMismatch(i32, i32),
    #[error("config parse error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

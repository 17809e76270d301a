use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("branch points not distinct")]
    BranchPointsNotDistinct,
    #[error("point lies on a branch point")]
    BranchPointInput,
    #[error("continuation failed: {0}")]
    ContinuationFailure(String),
    #[error("vertical line through the two points")]
    VerticalLine,
    #[error("root deflation residual {0:.3e} too large")]
    RootDeflationFailure(f64),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("base divisor is degenerate")]
    DegenerateBase,
    #[error("homology basis construction failed: {0}")]
    BasisConstructionFailure(String),
    #[error("quadrature did not converge")]
    QuadratureStall,
    #[error("lattice coordinates not integral (off by {0:.3e})")]
    NonIntegralSolution(f64),
    #[error("theta truncation insufficient at radius {0}")]
    TruncationInsufficient(usize),
    #[error("characteristic search found {0} candidates")]
    CharacteristicAmbiguous(usize),
    #[error("normalization derivative vanishes")]
    DegenerateNormalization,
    #[error("argument lies on the theta divisor")]
    OnThetaDivisor,
    #[error("F vanishes at this divisor")]
    BranchDegeneracy,
    #[error("residue contour too close to another pole")]
    ContourTooClose,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of the numerical machinery as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::BranchPointsNotDistinct | Error::BranchPointInput | Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

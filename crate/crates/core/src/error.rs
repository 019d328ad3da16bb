use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian in the weighted inner product (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("potential is not Hermitian at node {node} (asymmetry {asymmetry:.3e})")]
    NonHermitianPotential { node: usize, asymmetry: f64 },

    #[error("state violates the boundary constraints by {violation:.3e}")]
    ConstraintViolation { violation: f64 },

    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),

    #[error("boundary map is not surjective on the deficiency span (rank {rank} < {required})")]
    NotSurjective { rank: usize, required: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("singular step matrix in time stepping")]
    SingularStep,

    #[error("empty subspace basis")]
    EmptyBasis,

    #[error("degenerate characteristic matrix: {0}")]
    Degenerate(String),
}

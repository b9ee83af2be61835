use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: model expects {expected}, state has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite energy {value} at state {state}")]
    NonFiniteEnergy { value: f64, state: String },

    #[error("model has no gradient (binary state space)")]
    NotDifferentiable,

    #[error("operation needs at least {required} particles, ensemble has {found}")]
    TooFewParticles { required: usize, found: usize },

    #[error("non-finite log-weight for particle {particle} at level {level}")]
    NonFiniteWeight { particle: usize, level: usize },

    #[error("non-finite state for particle {particle} at level {level}")]
    NonFiniteState { particle: usize, level: usize },

    #[error("enumeration of {spins} spins refused (limit is {limit})")]
    EnumerationTooLarge { spins: usize, limit: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("mode balls overlap: centers {first} and {second} are closer than twice the radius")]
    OverlappingModes { first: usize, second: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

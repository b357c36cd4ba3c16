use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no key at point ({x}, {y})")]
    NoKeyAtPoint { x: f64, y: f64 },

    #[error("invalid keyboard layout: {0}")]
    InvalidLayout(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("field `{field_id}` has no committed character with seq {seq}")]
    SeqNotFound { field_id: String, seq: u64 },

    #[error("hook id `{0}` is already registered")]
    DuplicateHookId(String),

    #[error("a replace hook is already set at {point}")]
    ReplaceAlreadySet { point: &'static str },

    #[error("dispatch arguments do not match the shape of {point}")]
    ArgShapeMismatch { point: &'static str },

    #[error("channel {channel} does not match the installed {kind} IME")]
    ChannelMismatch { channel: String, kind: String },

    #[error("cipher key must not be empty")]
    EmptyKey,

    #[error("cipher key is {0} bytes, maximum is 256")]
    KeyTooLong(usize),

    #[error("code point {0} is outside the printable range 32..=126")]
    NotPrintable(u32),

    #[error("keystream desync in field `{field_id}` at seq {seq}: {detail}")]
    DesyncDetected {
        field_id: String,
        seq: u64,
        detail: String,
    },

    #[error("captured data does not align with ground truth: {0}")]
    RunMismatch(String),

    #[error("runs replay different traces or adversaries")]
    TraceMismatch,

    #[error("trace has {0} key events, the benchmark needs at least 60")]
    TraceTooShort(usize),

    #[error("benchmark repetitions must be at least 1")]
    InvalidReps,

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),

    #[error("no batched decision recorded for seq {0}")]
    BatchDecisionMissing(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for faults that indicate broken encrypt/decrypt synchronization.
    pub fn is_desync(&self) -> bool {
        matches!(self, Error::DesyncDetected { .. })
    }
}

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("state has {found} registers, signature expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("action argument {arg} is not an object (|Ω| = {objects})")]
    ArgumentOutOfRange { arg: usize, objects: usize },
    #[error("{args} action arguments but only {latent} latent registers")]
    TooManyArguments { args: usize, latent: usize },
    #[error("line {line}: write to a pre-state register")]
    WriteToPreState { line: usize },
    #[error("line {line}: read of a post-state register")]
    ReadOfPostState { line: usize },
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("program incomplete")]
    Incomplete,
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("program is not in STRIPS form: {0}")]
    NotStrips(String),
    #[error("invalid STRIPS schema: {0}")]
    InvalidSchema(String),
    #[error("rule {0} out of range (0..=255)")]
    RuleOutOfRange(u32),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("program addresses register {index} which does not exist at |Ω| = {objects}")]
    NonGeneralizable { index: usize, objects: usize },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("no examples")]
    NoExamples,
}

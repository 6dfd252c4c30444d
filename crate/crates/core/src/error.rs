use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("name '{0}' is not declared in the signature")]
    Undeclared(String),
    #[error("name '{name}' has arity {expected}, used with {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("design is not linear: {0}")]
    NonLinear(String),
    #[error("variable '{0}' is bound in the design")]
    BoundBinding(String),
    #[error("expected a {expected} design")]
    Polarity { expected: &'static str },
    #[error("design is not atomic")]
    NotAtomic,
    #[error("design has cuts")]
    HasCuts,
    #[error("not a path: {0}")]
    NotPath(String),
    #[error("incompatible multi-designs: {0}")]
    Incompatible(String),
    #[error("invalid multi-design: {0}")]
    MultiDesign(String),
    #[error("reserved name '{0}'")]
    Reserved(String),
    #[error("pattern error: {0}")]
    Pattern(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("witness validation failed: {0}")]
    Witness(String),
    #[error("enumeration exceeded {0} designs")]
    Budget(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::symm::ConeClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("curvature outside Γ_{required} (largest cone Γ_{}){}", class.max_k, node.map(|n| format!(" at node {n}")).unwrap_or_default())]
    ConeViolation { required: usize, class: ConeClass, node: Option<usize> },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("boundary condition error: {0}")]
    Boundary(String),

    #[error("time step {dt:.3e} underflowed the stiffness floor {floor:.3e}")]
    Stiffness { dt: f64, floor: f64 },

    #[error("config error{}: {message}", field.as_ref().map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Config { field: Option<String>, message: String },

    #[error("malformed data at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: Some(field.into()), message: message.into() }
    }
}

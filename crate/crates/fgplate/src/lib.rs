//! Finite-element free-vibration analysis of functionally graded Mindlin
//! plates in a thermal environment.
//!
//! The engine models rectangular or skew plates, optionally with a through
//! center crack, built from a two-phase ceramic/metal gradient. A QUAD-8
//! shear-flexible element with selective reduced integration supplies
//! stiffness, consistent mass, thermal load and thermal geometric
//! stiffness; a static pre-solve recovers in-plane stress resultants which
//! then enter the generalized eigenproblem `(K + K_G) phi = omega^2 M phi`.
//!
//! The crate is organized along the analysis pipeline:
//!
//! * [`material`] — constituent phases, Mori-Tanaka homogenization and the
//!   through-thickness temperature field,
//! * [`section`] — thickness integration into plate constitutive data,
//! * [`mesh`] — structured QUAD-8 meshes with crack-face node splitting,
//! * [`element`] — element matrices,
//! * [`solver`] — assembly, boundary conditions, static prestress and the
//!   eigensolver,
//! * [`study`] — configuration-driven parameter sweeps and CSV/grid output.

pub mod element;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod quadrature;
pub mod section;
pub mod solver;
pub mod study;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("temperature series diverged: {0}")]
    SeriesDivergence(String),
    #[error("quadrature accuracy: {0}")]
    Accuracy(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("element quality: {0}")]
    ElementQuality(String),
    #[error("over-constrained system: no free degrees of freedom")]
    OverConstrained,
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("thermal buckling exceeded: smallest eigenvalue {lambda:.6e} is negative")]
    BucklingExceeded { lambda: f64 },
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("mode index {requested} out of range, {available} modes available")]
    ModeIndex { requested: usize, available: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn series_divergence(msg: impl Into<String>) -> Self {
        Error::SeriesDivergence(msg.into())
    }
    pub(crate) fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }
    pub(crate) fn solve(msg: impl Into<String>) -> Self {
        Error::Solve(msg.into())
    }
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }
    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Degrees of freedom per node: (u0, v0, w0, theta_x, theta_y).
pub const DOF_PER_NODE: usize = 5;

//! Crate-wide error type.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation requested at a point excluded from the domain
    /// (weight pole, resolvent eigenvalue, s = 0, ...).
    #[error("domain error: {what} at s = {s}")]
    Domain { what: &'static str, s: Complex64 },

    /// The quartic characteristic roots collapsed; the exponential basis
    /// is not a basis at this s. Retry at s*(1 + 1e-9).
    #[error("degenerate exponential basis at s = {s} (repeated characteristic roots)")]
    DegenerateBasis { s: Complex64 },

    /// A linear system along the evaluation path was singular.
    #[error("singular system: {what} at omega = {omega}")]
    Singular { what: &'static str, omega: f64 },

    /// det(I + GK) vanished at a sample: the loop is marginally unstable there.
    #[error("marginal stability: det(I+GK) = 0 at omega = {omega}")]
    MarginalStability { omega: f64 },

    /// Phase moved more than pi/2 between consecutive Nyquist samples;
    /// the winding number cannot be trusted without refinement.
    #[error("undersampled Nyquist contour on [{lo}, {hi}] (|\u{394}arg| = {dphase:.3} > pi/2)")]
    Undersampled { lo: f64, hi: f64, dphase: f64 },

    /// The loop gain has not rolled off at the end of the grid; the
    /// contour cannot be closed reliably. Extend the Nyquist band.
    #[error("no roll-off at omega_max = {omega_max}: |f - 1| = {dist:.3} >= 0.5; extend the Nyquist grid")]
    NoRollOff { omega_max: f64, dist: f64 },

    /// |F| has not decayed at the quadrature truncation point.
    #[error("Laplace inversion truncation: |F(a + j omega_max)| = {tail:.3e} not below 1e-3 of peak {peak:.3e}")]
    Truncation { tail: f64, peak: f64 },

    /// Bad user-supplied configuration (bands, meshes, json schema, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Synthesis cannot start from the supplied controller.
    #[error("infeasible initial controller: {0}")]
    InfeasibleStart(String),

    /// The controller violates the stable-controller precondition of the gate.
    #[error("controller is not stable (min damping = {zeta:.3e}); the Nyquist gate requires a stable K")]
    UnstableController { zeta: f64 },

    /// An open-loop unstable plant without pre-stabilizer has infinitely
    /// many unstable poles; the Nyquist test is unavailable.
    #[error("plant is open-loop unstable and has no pre-stabilizer; the Nyquist test cannot be used")]
    NoPrestabilizer,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

//! # multidisk
//!
//! Structured H-infinity synthesis for plants known only through exact
//! frequency-domain data, with the machinery needed to make that safe for
//! infinite-dimensional beam models whose poles hug the imaginary axis:
//!
//! - exact transfer-function evaluation of a cantilever Timoshenko beam
//!   (boundary controlled, three damping scenarios, optional proportional
//!   pre-stabilizer) and of a piezo-actuated Euler-Bernoulli beam;
//! - an independent finite-difference boundary-value solver used as ground
//!   truth for the formal transfer functions;
//! - multi-band frequency grids with a first-order sampling certificate and
//!   certificate-driven refinement;
//! - a winding-number Nyquist test gating every optimization step;
//! - a nonsmooth solver for the sampled multidisk program
//!   (weighted S/T objectives, disk-margin, controller radius and damping
//!   constraints);
//! - time-domain verification through numerical inverse Laplace on a
//!   shifted Bromwich contour.
//!
//! The `examples/` directory walks through each capability; the `multidisk`
//! binary wires them into `sweep`, `certify`, `synthesize` and `simulate`
//! subcommands driven by a JSON config.

pub mod error;
pub mod grid;
pub mod linalg;
pub mod lti;

pub use error::{Error, Result};

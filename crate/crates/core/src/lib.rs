//! Transonic shock fronts in almost-flat two-dimensional nozzles.
//!
//! The pipeline locates admissible shock positions from the solvability condition of the
//! linearized free boundary problem, solves that linear problem, and then iterates the
//! nonlinear free boundary problem in Lagrange coordinates to a fixed point.

pub mod elliptic;
pub mod error;
pub mod expr;
pub mod fields;
pub mod gas;
pub mod grid;
pub mod linalg;
pub mod linear_fbp;
pub mod locator;
pub mod nozzle;
pub mod output;
pub mod profile;
pub mod quadrature;
pub mod supersonic;
pub mod transonic;

pub use error::{Error, Result};
pub use fields::StateFields;
pub use gas::{BackgroundShock, FlowState, GasConstants};
pub use grid::{RectGrid, ScalarField2D};
pub use nozzle::NozzleSpec;
pub use profile::Profile1D;
pub use transonic::{solve_transonic, ShockSolution, TransonicOptions};

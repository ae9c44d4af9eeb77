//! First-order elliptic boundary value problems on a rectangle:
//!
//! ∂₂u₁ + a₁∂₁u₂ = f₁,   ∂₂u₂ − a₂∂₁u₁ = f₂,
//!
//! with u₁ prescribed on x₁ = 0 (g₁) and x₁ = ℓ₁ (g₃), u₂ on x₂ = 0 (g₂) and x₂ = ℓ₂ (g₄).

mod cauchy_riemann;
pub mod poisson;

pub use cauchy_riemann::{
    compatibility_residual, compatibility_scale, solve_cauchy_riemann, solve_first_order_elliptic, EllipticProblem,
    SolveOptions, Traces,
};
pub use poisson::{poisson_solve, EdgeData, PoissonBc};

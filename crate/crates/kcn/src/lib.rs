//! Normalized solutions of Kirchhoff–Choquard equations on radial grids.
//!
//! This crate computes, classifies, and verifies L²-mass-constrained critical
//! points of the Kirchhoff–Choquard energy
//!
//! ```text
//!   J_α(u) = (a/2)‖∇u‖₂² + (b/2θ)‖∇u‖₂^{2θ} − (α/2q)∫(I_μ∗|u|^q)|u|^q − (1/2p)∫(I_μ∗|u|^p)|u|^p
//! ```
//!
//! on the sphere ‖u‖₂ = c in H¹_rad(R^N), together with the closed-form
//! exponent algebra and coupling thresholds that govern the geometry of the
//! constrained landscape (local minimum + mountain pass in the mixed regime,
//! a single mountain pass in the supercritical regime).
//!
//! Modules, roughly bottom-up:
//!
//! * [`exponents`] — scalar algebra: derived exponents, case taxonomy,
//!   thresholds α₁/α₂/α₃, Cardano closed forms, critical energy level.
//! * [`radial`] — radial grids with moment-exact quadrature weights, grid
//!   functions, norms, mass normalization, dilation, the Talenti-type bubble.
//! * [`riesz`] — the Riesz-potential kernel on a radial grid (adaptive
//!   Gauss–Kronrod in the angular variable), its disk cache, the Choquard
//!   bilinear form, and a Monte-Carlo cross-check estimator.
//! * [`energy`] — energy/Pohozaev evaluations, fiber-map derivatives, the
//!   Lagrange multiplier, Euler–Lagrange residuals, constrained gradients.
//! * [`fiber`] — scalar fiber-landscape analysis: critical points of the
//!   dilation map, the lower envelope, the two-extrema condition.
//! * [`constants`] — variational estimation of the Gagliardo–Nirenberg and
//!   Hardy–Littlewood–Sobolev quotient constants with provenance records.
//! * [`solver`] — mass-constrained projected-gradient descent to the local
//!   minimizer, the reduced mountain-pass ascent, and coupling sweeps.
//! * [`config`] / [`commands`] — flat key=value run configuration and the
//!   five CLI subcommands built on it.
//!
//! The `examples/` directory is the primary tour of the API; each example is
//! a runnable, self-verifying walkthrough of one module:
//!
//! ```text
//!   cargo run --release --example thresholds       # exponent algebra + α-thresholds
//!   cargo run --release --example riesz_newton     # kernel vs Newton's theorem
//!   cargo run --release --example fiber_report     # fiber map geometry
//!   cargo run --release --example local_minimum    # m(c,α) < 0 minimizer
//!   cargo run --release --example mountain_pass    # ς(c,α) > 0 saddle
//!   cargo run --release --example alpha_sweep      # coupling ladder
//!   cargo run --release --example sharp_constants  # C_r and S_HL estimation
//!   cargo run --release --example critical_bound   # Cardano bound at p = 2*_μ
//! ```

pub mod config;
pub mod constants;
pub mod commands;
pub mod energy;
pub mod error;
pub mod exponents;
pub mod fiber;
pub mod radial;
pub mod riesz;
pub mod solver;

pub use error::{KcnError, Result};

//! Numerical laboratory for anisotropic fractional operators of order 2s.
//!
//! The crate studies the integro-differential operator
//!
//! ```text
//! Lu(x) = κ_s ∫_0^∞ dρ ∫_{S^1} da(ω) [2u(x) − u(x+ρω) − u(x−ρω)] / ρ^{1+2s}
//! ```
//!
//! driven by a spectral measure `a` on the unit circle, with the normalization
//! κ_s chosen so that a pair of unit atoms at ±ω realizes the standard
//! one-dimensional fractional Laplacian (symbol |ξ·ω|^{2s}) along ω.  The
//! sum of axis atoms turns `L` into (−∂²₁)ˢ + (−∂²₂)ˢ, which is what the grid
//! solver discretizes.
//!
//! What lives where:
//!
//! * [`measure`] — spectral measures (atoms + piecewise densities), total mass
//!   and ellipticity constants;
//! * [`geometry`] — domains (balls, convex polygons, graph patches, a cusp
//!   domain, a smooth non-convex "counterexample" domain with a flat boundary
//!   segment), distances, inner tangent balls, boundary bands;
//! * [`operator`] — pointwise quadrature of `L`, 1D discretization weights,
//!   grid application, and the explicit barrier (1−|x|²)ˢ₊;
//! * [`solver`] — the Dirichlet problem Lu = g in Ω, u = 0 outside, in 1D/2D;
//! * [`norms`] — classical and boundary-weighted Hölder norms plus local
//!   exponent fitting;
//! * [`integral_bounds`] — truncated ray/annulus integrals of boundary-band
//!   and distance-weighted kernels, with their explicit or calibrated bounds;
//! * [`experiments`] — the convex-domain regularity experiment and the
//!   non-convex scaling experiment (boundary growth, J₁/J₂ integrals);
//! * [`cli`] — the reproducible command-line front end used by the `afrac`
//!   binary.
//!
//! Every major capability has a runnable demo under `examples/`:
//!
//! ```text
//! cargo run --release --example barrier_constant
//! cargo run --release --example ellipticity
//! cargo run --release --example dirichlet_1d
//! cargo run --release --example dirichlet_ball
//! cargo run --release --example boundary_band_integrals
//! cargo run --release --example plane_tail_integrals
//! cargo run --release --example cutoff_remainder
//! cargo run --release --example weighted_norms
//! cargo run --release --example inner_balls_and_bands
//! cargo run --release --example convex_regularity
//! cargo run --release --example nonconvex_scaling
//! cargo run --release --example regularity_gap
//! ```

pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod integral_bounds;
pub mod measure;
pub mod norms;
pub mod operator;
pub mod quad;
pub mod solver;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

//! Numerical toolkit for radial weighted spaces of analytic functions on the
//! unit disc and on the plane.
//!
//! The pieces, bottom up:
//!
//! - [`weight`]: radial weights `h` with Laplacian `Δh = h'' + h'/r` and the
//!   induced length scale `ρ = (Δh)^{-1/2}`, truncated weights, and validation
//!   of the standing regularity assumptions.
//! - [`atomize`]: splitting of the measure `Δh·dm/2π` into concentric rings of
//!   integer mass, producing the ring lattice `{s_k e^{2πim/N_k}}`.
//! - [`geometry`]: point sets, the `d_ρ` distance, spatial indexing, local
//!   counts and density profiles, ring thinning.
//! - [`products`]: overflow-free log-space evaluation of the canonical ring
//!   product, its truncations, and boundedness diagnostics.
//! - [`weierstrass`]: partial products of the sigma function over the square
//!   lattice and their two-sided growth bands.
//! - [`peaks`]: localized analytic peak functions (cubic-decay and Gaussian
//!   profile), certified Taylor truncations, interpolation atoms, tail sums.
//! - [`verify`]: weighted norms, Lipschitz/mean-value checks, the iterative
//!   interpolation solver, sampling ratios, the Jensen counting diagnostic,
//!   and the thinned-lattice index demo.

pub mod atomize;
pub mod error;
pub mod geometry;
pub mod logcx;
pub mod peaks;
pub mod products;
pub mod quad;
pub mod report;
pub mod verify;
pub mod weierstrass;
pub mod weight;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

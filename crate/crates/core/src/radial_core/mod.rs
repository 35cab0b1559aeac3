//! Grids, quadrature, closed-form kernels and discrete operators for radial
//! functions in four dimensions.

pub mod function;
pub mod grid;
pub mod kernels;
pub mod ops;
pub mod quad;

pub use function::RadialFunction;
pub use grid::{GridSpec, RadialGrid};
pub use kernels::Cutoff;
pub use ops::{OuterBc, TailLaw};

//! Numerical pseudodifferential calculus on the torus `T² = S¹ₓ × S¹ᵧ`, fibered over the base
//! circle by `π(x, y) = x`.
//!
//! Symbols are compatible pairs `(a_M, a_X)`: a degree-0 principal symbol on `T*T²` that may
//! be discontinuous across the horizontal covectors `η = 0`, together with a family of fiber
//! operators over `T*S¹` whose fiber principal symbol matches the directional limit of `a_M`.
//! They are quantized to Galerkin operators on truncated Fourier windows, and every structural
//! statement of the calculus (composition modulo compact operators, essential norms, Fredholm
//! criteria, boundary problems in projected subspaces, the boundary obstruction) is checked as a
//! finite-dimensional computation.

pub mod boundary;
pub mod builtins;
pub mod calkin;
pub mod error;
pub mod expr;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod obstruction;
pub mod operator;
pub mod quantize;
pub mod sigma0;
pub mod sobolev;
pub mod symbols;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use num_complex::Complex64;
pub use operator::QuantizedOperator;
pub use symbols::{CompatibleSymbol, OperatorSymbol, PrincipalSymbol};

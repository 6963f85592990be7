//! Mixed-norm martingale Hardy spaces on finite filtered product probability
//! spaces.
//!
//! Everything is computed exactly on finite spaces: iterated `L_p⃗` norms,
//! conditional expectations, the maximal, square and conditional square
//! functions, the five Hardy quasi-norms, atomic and Davis decompositions.
//! The [`experiment`] module runs seeded verification suites over these
//! objects.

pub mod atomic;
pub mod error;
pub mod experiment;
pub mod io;
pub mod martingale;
pub mod mixed_norm;
pub mod operators;
pub mod sampling;
pub mod space;

pub use error::{Error, Result};
pub use martingale::{cond_exp, first_passage, partial_cond_exp, stop, AdaptedEnvelope, Martingale, StoppingTime};
pub use mixed_norm::{dual_extremal, mixed_norm, pairing, weighted_norm, MixedExponent};
pub use space::{
    atoms_of, make_dyadic_space, regularity_constant, CoordinateSpace, ProductFilteredSpace, RandomVariable,
    Regularity, Weight,
};

//! Generalized inverse of `delta`: index splitting, primed coordinates and
//! the contracting homotopy `delta^+`.

mod ops;
mod primed;
mod split;

pub use ops::{Resolution, SigmaPatch};
pub use primed::PrimedCoordinates;
pub use split::{invert_unimodular, IndexRole, IndexSplit};

//! Finite hypercovers, basis refinements and descent checks over finite
//! topological spaces.

pub mod descent;
pub mod fin;
pub mod homotopy;
pub mod hypercover;
pub mod io;
pub mod simplicial;
pub mod topology;

pub use fin::{FinMap, SymElement, SymmetricSet};
pub use hypercover::{Hypercover, RefinedHypercover, RefinedSimplex};
pub use simplicial::{BoundarySphere, Extent, FiniteTypeSimplicialSet, MonotoneMap, SimplexRef};
pub use topology::{Basis, FiniteSpace, OpenSet};

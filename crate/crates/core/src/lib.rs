//! Exact sl2 Verlinde numbers as lattice-point counts on weighted stable
//! graphs.
//!
//! * [`graph`]: genus-labelled multigraphs with legs, contraction and
//!   canonical labels.
//! * [`lattice`]: admissible weightings at a level, counted by tensor
//!   contraction, by brute force, and enumerated.
//! * [`verlinde`]: Verlinde numbers via lattice counts, the factorization
//!   recursion and the trigonometric closed form.
//! * [`semigroup`]: Hilbert functions, the Gorenstein test, degree-one
//!   generation and edge functionals.
//! * [`moduli`]: enumeration of trivalent and stable graph types, the
//!   contraction poset and flip moves.
//!
//! ```
//! use vk_core::verlinde::{verlinde, verlinde_closed_form, VerlindeInstance};
//!
//! let inst = VerlindeInstance::new(2, vec![], 1);
//! assert_eq!(verlinde(&inst), 4);
//! assert_eq!(verlinde_closed_form(&inst).unwrap(), 4);
//! ```

pub mod graph;
pub mod lattice;
pub mod moduli;
pub mod semigroup;
pub mod verlinde;

mod contract;

pub use graph::{are_isomorphic, CanonicalLabel, EdgeSlot, GraphError, MarkedGraph};
pub use lattice::{CountResult, LatticeError, LevelledWeighting, Weighting};
pub use moduli::{GraphClass, ModuliError};
pub use semigroup::{Functional, HilbertTable, SemigroupError};
pub use verlinde::{FusionQuery, VerlindeError, VerlindeInstance};

//! Pathwise dualities of monotone and additive Markov processes on finite
//! partially ordered sets, built constructively and verified exhaustively.
//!
//! Modules, bottom-up:
//!
//! * [`poset`]: finite posets as bit rows, with dual views and products.
//! * [`lattice`]: lattice operations, Birkhoff representation, and the set
//!   embedding that extends additive maps of nondistributive lattices.
//! * [`maps`]: total maps between posets with monotone and additive checks.
//! * [`duality`]: pairings, additive duals and the monotone dual maps.
//! * [`markov`]: random mapping representations, generators and semigroups.
//! * [`flow`]: Poisson event logs and pathwise checks on stochastic flows.
//! * [`percolation`]: arrow encodings of additive maps and open paths.
//! * [`models`]: built-in particle systems and constructive decompositions.
//! * [`engine`]: the verification and simulation layer behind the CLI and
//!   the C bindings.

pub mod duality;
pub mod engine;
pub mod error;
pub mod flow;
pub mod lattice;
pub mod maps;
pub mod markov;
pub mod models;
pub mod num;
pub mod percolation;
pub mod poset;
pub mod rng;

pub use error::{Error, Result};
pub use poset::{ElementSet, Poset};

//! Decision procedures for finite-state automorphisms of regular rooted trees.

pub mod classify;
pub mod conj_aut;
pub mod conj_restricted;
pub mod dot;
pub mod error;
mod graph;
pub mod group;
pub mod oracle;
pub mod order;
pub mod perm;
pub mod system;
mod universe;

pub use error::{Error, Result};
pub use group::{Budgets, Element, Equality, Group, Machine, SymId};
pub use perm::{Alphabet, Letter, Perm};
pub use system::{parse_system, parse_word, Definition, FRSystem, SymbolPower, Word};
pub use universe::{StateId, TRIVIAL};

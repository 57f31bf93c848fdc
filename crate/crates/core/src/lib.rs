//! Nanophrases over a homotopy data, their rewriting moves, and the mu / Delta /
//! mu-bar link-homotopy invariants computed through the Magnus expansion.

pub mod error;
pub mod fixtures;
pub mod forest;
pub mod fuzz;
pub mod generate;
pub mod homotopy;
pub mod invariants;
pub mod magnus;
pub mod moves;
pub mod phrase;
pub mod walk;

pub use error::{DataError, InvariantError, MoveError, ParseError, PhraseError};
pub use fixtures::{fixture, fixture_text};
pub use fuzz::{run_fuzz, FuzzConfig, FuzzReport};
pub use homotopy::{builtin_virtual, builtin_welded, linking_matrix, HomotopyData};
pub use invariants::{delta, delta_subsequences, mu, mu_bar, IndexSequence, InvariantEngine, InvariantReport, Residue};
pub use moves::{apply_move, enumerate_sites, fresh_letters, Direction, MoveKind, MoveSite};
pub use phrase::{isomorphic, parse_nanophrase, render_nanophrase, validate, Letter, Nanophrase, Symbol};
pub use walk::{random_walk, replay, WalkConfig, WalkTrace, WalkVariant};

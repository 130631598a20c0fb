//! Mixed sessions, classical sessions, and a type-directed translation
//! between them, together with executable checks of its correctness.

pub mod corpus;
pub mod export;
pub mod gen;
pub mod parse;
pub mod print;
pub mod semantics;
pub mod syntax;
pub mod translate;
pub mod types;
pub mod typing;
pub mod verify;

pub use typing::TypeError;

//! Names, the two process languages, and structural congruence.

pub mod canon;
pub mod classical;
pub mod mixed;
pub mod name;
pub mod process;

pub use canon::{canonicalize, canonicalize_ext, congruent, ext_congruent, flatten, Flat, Restriction};
pub use classical::{ClassicalAction, ClassicalProcess};
pub use mixed::{Choice, Comm, MixedBranch, MixedProcess};
pub use name::{Label, Mark, Name, NameKind, Polarity, Qualifier, Value, View};
pub use process::{fresh_name, Action, Mapper, Process, Visitor};

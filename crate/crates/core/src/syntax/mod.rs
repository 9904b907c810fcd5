pub mod parse;
pub mod print;
pub mod term;
pub mod typecheck;
pub mod types;

pub use parse::{parse_term, parse_type, ParseError};
pub use print::{print_canonical, print_term};
pub use term::{Kind, Name, Term};
pub use typecheck::{elaborate, elaborate_against, fresh_name, typecheck, Const, TNode, TypeEnv, TypeError, Typed};
pub use types::Type;

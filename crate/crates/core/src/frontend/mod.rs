//! Text formats and the command-line driver.

pub mod cli;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod structure_file;

pub use lexer::SourceSpan;
pub use parser::{parse_formula, parse_formula_with, parse_name, parse_prop, ParseError, ParsedFormula};
pub use pretty::print_formula;
pub use structure_file::{load_file, load_structure, StructureFileError};

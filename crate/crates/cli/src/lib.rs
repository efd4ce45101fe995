//! Library surface of the `oh` command-line tool: the expression grammar and
//! the text/JSON renderers. The binary in `main.rs` is a thin dispatcher
//! over these plus `oh-core`.

pub mod output;
pub mod parser;

//! Library surface of the `mf` command-line tool: file formats, command
//! implementations, and the fixture runner, kept as a library so
//! integration tests can drive them directly.

pub mod commands;
pub mod fixtures;
pub mod formats;

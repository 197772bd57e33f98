//! Library surface of the command-line tool: file formats and reports.

pub mod io;

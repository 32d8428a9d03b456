//! Library surface of the CLI: config schema, archive format, and report
//! writers, shared with the `cuspscan` binary and its integration tests.

pub mod archive;
pub mod config;
pub mod report;

//! Library side of the `quadembed` binary: file formats, the problem-file
//! schema, run reports, and the subcommand implementations. Split from the
//! binary so integration tests can call everything in process.

pub mod commands;
pub mod format;
pub mod problem;
pub mod report;

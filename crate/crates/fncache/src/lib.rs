//! Standard-library companion to `fncache-core`: file formats, property
//! suites and the `fncache` command line.

pub mod cli;
pub mod formats;
pub mod verify;

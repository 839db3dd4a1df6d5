//! Config ingestion, subcommand implementations and CSV/report emission.
//!
//! The binary front end (`rdpp`) is a thin dispatcher over this library so
//! that tests and fuzz targets can drive the exact production code paths.

pub mod commands;
pub mod config;
pub mod fmt;

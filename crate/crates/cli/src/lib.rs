//! File-based front end: JSON documents, validators, theorem checks.

pub mod commands;
pub mod document;
pub mod fixtures;
pub mod report;
pub mod theorems;

pub use commands::run;

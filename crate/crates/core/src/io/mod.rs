//! Serialization formats.

pub mod json;

//! Counting constraint satisfaction (#CSP) and Holant problems over the
//! Boolean domain: exact evaluation, tractable-class recognition, and
//! mechanically verified reductions.

pub mod classify;
pub mod cli;
pub mod instance;
pub mod io;
pub mod numeric;
pub mod reduce;
pub mod signature;
pub mod tracteval;

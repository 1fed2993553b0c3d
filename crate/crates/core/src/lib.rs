//! A bulk-synchronous graph engine programmed with neighborhood expressions.
//!
//! Vertices are hash-partitioned over in-process workers. Every worker keeps
//! local guest copies of the remote neighbors its hosts read, so an
//! expression only ever touches local memory; the engine ships changed
//! critical attributes to those copies after each superstep and activates the
//! next superstep's vertices through inverse neighbor indexes.

pub mod algorithms;
pub mod engine;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod runner;
pub mod store;
pub mod transport;
pub mod verify;

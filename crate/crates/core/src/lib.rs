//! Exact-arithmetic toolkit for completely replicable functions.
//!
//! The crate is organized around one carrier type, [`series::QSeries`]
//! (truncated Puiseux series with exact integer coefficients and an explicit
//! precision window), and the machinery built on top of it:
//!
//! - [`faber`]: normalized Faber polynomials and their evaluation,
//! - [`replication`]: the replication identity, finite-window verification
//!   certificates and coefficient extension by unknown elimination,
//! - [`eta`]: Dedekind eta products, eta quotients, Eisenstein series and the
//!   modular `j` function as an independent ground-truth generator,
//! - [`catalog`]: the data model for the function records the pipeline
//!   reasons about,
//! - [`elimination`]: the classification rules and the report they produce.

pub mod catalog;
pub mod elimination;
pub mod eta;
pub mod faber;
pub mod replication;
pub mod series;

pub use series::{QSeries, SeriesError};

//! Shapley-value responsibility for answers of (conjunctive) regular path
//! queries on edge-labeled graphs.
//!
//! The crate is layered bottom-up:
//!
//! - [`graph`]: labeled graphs with endogenous/exogenous items,
//! - [`regex`] and [`dfa`]: query-atom languages and their analyses,
//! - [`query`]: RPQ/CRPQ evaluation, the valuation oracle of every game,
//! - [`game`]: generic exact and sampled Shapley machinery for 0/1 games,
//! - [`explain`]: the edge and vertex games, the polynomial short-word
//!   algorithm, approximation wrappers and the dispatcher [`explain::solve`].

pub mod dfa;
pub mod error;
pub mod explain;
pub mod game;
pub mod graph;
pub mod query;
pub mod regex;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};

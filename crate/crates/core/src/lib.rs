//! Compound-Dirichlet-Multinomial (CDM) prediction for lottery draw histories.
//!
//! The crate is organised bottom-up:
//!
//! - [`dm`]: log-space densities for the multinomial, Dirichlet and CDM
//!   distributions, conjugate posterior updates and predictive expectations.
//! - [`estimators`]: closed-form maximum likelihood, method of moments and
//!   main-diagonal estimates of the Dirichlet concentration vector.
//! - [`ingest`]: draw history CSV parsing, game validation and indicator
//!   count matrices.
//! - [`backtest`]: walk-forward prediction over a history, hit/gap statistics
//!   and report rendering.
//! - [`strategy`]: quarterly player-escalation staking simulation with exact
//!   integer-cent accounting.
//! - [`synth`]: seeded uniform-random histories used as a null model.

pub mod backtest;
pub mod dm;
pub mod error;
pub mod estimators;
pub mod ingest;
pub mod strategy;
pub mod synth;

pub use error::{Error, Result};

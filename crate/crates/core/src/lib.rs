//! Exact computations on growth of product sets and convolution powers in
//! groups of polynomial growth.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`] exact group arithmetic behind a single [`GroupOracle`].
//! * [`nilprog`] nilprogressions, coset nilprogressions, dilations and the
//!   three dilation norms, plus normal-form verification.
//! * [`liealg`] exp/log over unitriangular rational matrices, formal
//!   commutator words and their coefficient matrices.
//! * [`growth`] product-set series, the volume polynomial, tropical and
//!   fitted piecewise-linear profiles, and sandwich containment checks.
//! * [`measures`] finitely supported measures, convolution functionals,
//!   the symmetrization chain and the drift gauge.
//! * [`lo`] concentration of signed sums and symmetrized walks, subgroup
//!   search and growth degrees.

pub mod error;
pub mod group;
pub mod growth;
pub mod liealg;
pub mod lo;
pub mod measures;
pub mod nilprog;
pub mod rational;
pub mod rng;

pub use error::{Error, Result};
pub use group::{CayleyTable, GroupElement, GroupOracle};
pub use rational::ExtRational;

/// Default cap on enumeration states shared by every exhaustive routine.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

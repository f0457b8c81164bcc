//! Faithful fraction decompositions.
//!
//! A decomposition `m/n = a1/b1 + ... + at/bt` (distinct `bi`) is faithful
//! when no partial sum `x1/b1 + ... + xt/bt` with `0 <= xi <= ai` lands in
//! `(1/n)Z` other than `0` and `m/n`. This crate builds such decompositions
//! and decides faithfulness exactly.

pub mod cli;
pub mod construct;
pub mod json;
pub mod model;
pub mod numeric;
pub mod partition;
pub mod search;
pub mod verifier;

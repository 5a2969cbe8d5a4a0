//! Curvature of two-dimensional Finsler metrics by truncated Taylor
//! arithmetic, with a verification suite for a family of Einstein
//! `(α, β)`-metrics of vanishing S-curvature.
//!
//! The guide in `book/` walks through each module; its code listings are
//! compiled and run as doctests of this crate.

pub mod ab;
pub mod cli;
pub mod error;
pub mod expr;
pub mod family;
pub mod geometry;
pub mod jet;
pub mod residual;
pub mod verify;

pub use error::{Error, Result};

// The book's listings run as doctests: one module per chapter, so a failure
// names its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/alpha-beta.md")]
    mod alpha_beta {}
    #[doc = include_str!("../../../book/src/family.md")]
    mod family {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

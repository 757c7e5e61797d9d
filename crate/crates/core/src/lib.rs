//! Laboratory for sparse Bernoulli(p) random 0/1 matrices.
//!
//! The crate covers exact singularity testing with structural witness
//! attribution, spectral diagnostics, Lévy concentration functions and the
//! u-degree anti-concentration functional, membership tests for the vector
//! classes used to decompose the unit sphere, closed-form bounds, and a
//! reproducible Monte Carlo harness tying them together.
//!
//! ```
//! use bernlab::matrix::{generate, BernoulliParams};
//! use bernlab::exact::decide_singular;
//!
//! let m = generate(&BernoulliParams::new(20, 0.3, 1, 0)?)?;
//! let verdict = decide_singular(&m);
//! assert_eq!(verdict.singular, verdict.rank.map_or(true, |r| r < 20));
//! # Ok::<(), bernlab::Error>(())
//! ```

pub mod anticoncentration;
pub mod bounds;
pub mod classes;
mod error;
pub mod exact;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/singularity.md")]
    mod singularity {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/anticoncentration.md")]
    mod anticoncentration {}
    #[doc = include_str!("../../../book/src/classes.md")]
    mod classes {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

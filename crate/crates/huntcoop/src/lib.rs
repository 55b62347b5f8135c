//! Predator-prey dynamics with hunting cooperation and an Allee effect.
//!
//! The model couples a cubic Allee growth term for the prey with a
//! ratio-dependent functional response whose attack rate grows with
//! predator density:
//!
//! ```text
//! du/dt = a·u·(u−b)·(1−u) − u·v·(1+αv) / (v + (1+αv)·u)
//! dv/dt = c·u·v·(1+αv) / (v + (1+αv)·u) − d·v
//! ```
//!
//! The crate finds its equilibria, classifies them by eigenvalues,
//! integrates trajectories, and scans parameters for the two bifurcations
//! the system exhibits: folds, where interior equilibria appear or vanish
//! in pairs, and a stability switch of the coexistence state as hunting
//! cooperation `α` grows.
//!
//! # Quick tour
//!
//! ```
//! use huntcoop::model::{ModelParams, State};
//! use huntcoop::equilibria::interior_equilibria;
//! use huntcoop::stability::classify_equilibrium;
//!
//! let params = ModelParams::default(); // a=10, b=0.25, c=2, d=1, alpha=0.92
//! let eqs = interior_equilibria(&params);
//! assert_eq!(eqs.len(), 2);
//!
//! // the larger-u point is the coexistence state; it is stable here
//! let coexistence = classify_equilibrium(&eqs[1], &params);
//! assert!(coexistence.class.label.is_stable());
//! ```
//!
//! The guide under `book/` walks through each subsystem; its code blocks
//! are compiled and run as part of `cargo test`.

pub mod bifurcation;
pub mod config;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod io;
pub mod model;
pub mod phase;
pub mod stability;

pub use error::{Error, Result};

// Keep the book's code blocks compiling and passing: each chapter is
// checked as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/equilibria.md")]
    mod equilibria {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/bifurcation.md")]
    mod bifurcation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! Sequential social learning on random observation networks.
//!
//! Agents act once, in order. Each receives a Gaussian private signal about a
//! binary state and observes each predecessor's action independently with
//! probability `q`. This crate provides:
//!
//! * [`naive`]: the exact action-count recursion for agents who neglect
//!   correlation between the actions they observe;
//! * [`rational`]: lower bounds on rational accuracy from one-neighbor
//!   strategies;
//! * [`sim`]: a seeded Monte Carlo engine for whole trials;
//! * [`analytics`] and [`ols`]: the trial-level regressions with
//!   heteroskedasticity-robust standard errors.
//!
//! ```
//! use netlearn::model::{NetworkParams, SignalParams};
//! use netlearn::naive::{naive_accuracy_curve, ChoiceProbVariant, EllVariant};
//!
//! let params = SignalParams::experiment();
//! let sparse = naive_accuracy_curve(
//!     &NetworkParams::new(0.25, 40).unwrap(),
//!     &params,
//!     EllVariant::TruncatedMean,
//!     ChoiceProbVariant::DerivedArgument,
//! )
//! .unwrap();
//! assert!((sparse.at(40) - 0.8808).abs() < 5e-5);
//! ```

pub mod analytics;
pub mod error;
pub mod gauss;
pub mod io;
pub mod model;
pub mod naive;
pub mod ols;
pub mod rational;
pub mod report;
pub mod repro;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};

// The guide's code listings run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/naive.md")]
    mod naive {}
    #[doc = include_str!("../../../book/src/rational.md")]
    mod rational {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/analytics.md")]
    mod analytics {}
    #[doc = include_str!("../../../book/src/reproduction.md")]
    mod reproduction {}
}

//! The guide in `book/`, compiled so that every snippet runs as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/problems.md")]
pub mod problems {}
#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}
#[doc = include_str!("../../../book/src/hybrid-step.md")]
pub mod hybrid_step {}
#[doc = include_str!("../../../book/src/queries.md")]
pub mod queries {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("../../../book/src/running.md")]
pub mod running {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

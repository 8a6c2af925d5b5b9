#![doc = include_str!("../../../book/src/introduction.md")]
// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binomial;
mod engine;
pub mod normal_direct;
pub mod normal_gibbs;
pub mod error;
pub mod inference;
pub mod normal_known;
pub mod relative_risk;
pub mod numerics;

pub use engine::importance::EndpointGaps;
pub use error::{Error, Result};
pub use inference::*;

/// The guide chapters, compiled and run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/normal-known.md")]
    mod normal_known {}
    #[doc = include_str!("../../../book/src/smoothing.md")]
    mod smoothing {}
    #[doc = include_str!("../../../book/src/binomial.md")]
    mod binomial {}
    #[doc = include_str!("../../../book/src/unknown-variance.md")]
    mod unknown_variance {}
    #[doc = include_str!("../../../book/src/relative-risk.md")]
    mod relative_risk {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! Rational points of a given denominator in compact orthogonal and
//! unitary groups of integral forms.
//!
//! See the guide in `book/` for a tour; each chapter's examples run as
//! doc-tests of this crate.

pub mod arith;
pub mod cartan;
pub mod enumerate;
pub mod equidist;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod locals;
pub mod padic;
pub mod so3;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/enumeration.md")]
    mod enumeration {}
    #[doc = include_str!("../../../book/src/local.md")]
    mod local {}
    #[doc = include_str!("../../../book/src/rotations.md")]
    mod rotations {}
    #[doc = include_str!("../../../book/src/equidistribution.md")]
    mod equidistribution {}
    #[doc = include_str!("../../../book/src/cosets.md")]
    mod cosets {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

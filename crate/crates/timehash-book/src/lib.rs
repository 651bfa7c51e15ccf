//! Runs the code blocks of the guide in `book/src` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hierarchy.md")]
pub mod hierarchy {}

#[doc = include_str!("../../../book/src/keys.md")]
pub mod keys {}

#[doc = include_str!("../../../book/src/queries.md")]
pub mod queries {}

#[doc = include_str!("../../../book/src/schedules.md")]
pub mod schedules {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/index.md")]
pub mod index {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}

//! The guide's chapters, compiled so that `cargo test --doc` runs every
//! listing in the book.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/index-sets.md")]
pub mod index_sets {}
#[doc = include_str!("../../../book/src/interpolation.md")]
pub mod interpolation {}
#[doc = include_str!("../../../book/src/varieties.md")]
pub mod varieties {}
#[doc = include_str!("../../../book/src/curvature.md")]
pub mod curvature {}
#[doc = include_str!("../../../book/src/signed-distance.md")]
pub mod signed_distance {}
#[doc = include_str!("../../../book/src/regression.md")]
pub mod regression {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}

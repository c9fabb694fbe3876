//! The README and the chapters of the guide in `book/`, included as module docs so that
//! `cargo test` compiles and runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/conventions.md")]
pub mod conventions {}

#[doc = include_str!("../../../book/src/evolution-space.md")]
pub mod evolution_space {}

#[doc = include_str!("../../../book/src/two-forms.md")]
pub mod two_forms {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}

#[doc = include_str!("../../../book/src/observables.md")]
pub mod observables {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}

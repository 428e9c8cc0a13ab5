//! The user guide, one module per chapter.
//!
//! Each chapter is the verbatim markdown source of the mdBook under `book/`
//! at the repository root, so `cargo test --doc` compiles and runs every
//! code snippet in the book. That keeps the guide honest: if an example in
//! the prose stops working, the build says so.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/channel-model.md")]
pub mod channel_model {}

#[doc = include_str!("../../../book/src/two-phase-protocol.md")]
pub mod two_phase_protocol {}

#[doc = include_str!("../../../book/src/closed-form.md")]
pub mod closed_form {}

#[doc = include_str!("../../../book/src/genie-search.md")]
pub mod genie_search {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

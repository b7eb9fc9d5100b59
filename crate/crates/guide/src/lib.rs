//! The chapters of the guide, compiled so that `cargo test --doc` runs every
//! snippet against the current library. One module per chapter keeps the
//! origin of a failing snippet visible.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/cosets.md")]
pub mod cosets {}
#[doc = include_str!("../../../book/src/jumps.md")]
pub mod jumps {}
#[doc = include_str!("../../../book/src/tfactors.md")]
pub mod tfactors {}
#[doc = include_str!("../../../book/src/rectifier.md")]
pub mod rectifier {}
#[doc = include_str!("../../../book/src/chi.md")]
pub mod chi {}
#[doc = include_str!("../../../book/src/transfer.md")]
pub mod transfer {}
#[doc = include_str!("../../../book/src/constants.md")]
pub mod constants {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

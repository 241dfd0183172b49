//! Guide chapters compiled as doc-tests, one module per chapter so a failing
//! listing points at its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/posets.md")]
pub mod posets {}
#[doc = include_str!("../../../book/src/polytopes.md")]
pub mod polytopes {}
#[doc = include_str!("../../../book/src/polyptych.md")]
pub mod polyptych {}
#[doc = include_str!("../../../book/src/algebra.md")]
pub mod algebra {}
#[doc = include_str!("../../../book/src/degeneration.md")]
pub mod degeneration {}
#[doc = include_str!("../../../book/src/cox.md")]
pub mod cox {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/acceptance.md")]
pub mod acceptance {}

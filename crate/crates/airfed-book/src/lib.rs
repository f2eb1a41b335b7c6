//! Runs every code block in the guide as a doc-test, one module per
//! chapter so a failure names its chapter. mdbook cannot execute
//! snippets against crate dependencies itself; including the chapters
//! here keeps the book and the API from drifting apart.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/quickstart.md")]
pub mod quickstart {}

#[doc = include_str!("../../../book/src/channels-and-energy.md")]
pub mod channels_and_energy {}

#[doc = include_str!("../../../book/src/client-selection.md")]
pub mod client_selection {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}

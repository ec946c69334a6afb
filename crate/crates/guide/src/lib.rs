//! The book under ../../book is the narrative documentation for `bpekit`,
//! but mdbook cannot run example code against the real crate. This shim
//! includes every chapter as a doc comment, so `cargo test --doc` compiles
//! and runs each code block exactly as rustdoc sees it. One module per
//! chapter keeps failures attributable to their source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/tokenizer-model.md")]
pub mod tokenizer_model {}

#[doc = include_str!("../../../book/src/pretokenization.md")]
pub mod pretokenization {}

#[doc = include_str!("../../../book/src/encoders.md")]
pub mod encoders {}

#[doc = include_str!("../../../book/src/corruption.md")]
pub mod corruption {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

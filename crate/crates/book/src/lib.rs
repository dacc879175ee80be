//! Keeps the book honest: every fenced Rust block in `book/src/*.md` is
//! attached here as module documentation, so `cargo test --doc` compiles and
//! runs the snippets against the current engine. A chapter edit that breaks
//! an example fails the build.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/automata.md")]
pub mod automata {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/classification.md")]
pub mod classification {}

#[doc = include_str!("../../../book/src/embedding.md")]
pub mod embedding {}

#[doc = include_str!("../../../book/src/state-space.md")]
pub mod state_space {}

#[doc = include_str!("../../../book/src/rbe.md")]
pub mod rbe {}

#[doc = include_str!("../../../book/src/datasets.md")]
pub mod datasets {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

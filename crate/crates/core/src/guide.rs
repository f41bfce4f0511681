//! The narrative guide, pulled in from `book/src/` so that every code
//! block in it compiles and runs under `cargo test --doc`. The book tool
//! renders the same files, which keeps the guide and the doc-tests in
//! sync by construction. Chapters appear here in reading order.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/frontier.md")]
pub mod frontier {}

#[doc = include_str!("../../../book/src/aggregation.md")]
pub mod aggregation {}

#[doc = include_str!("../../../book/src/informativeness.md")]
pub mod informativeness {}

#[doc = include_str!("../../../book/src/hurwicz.md")]
pub mod hurwicz_preferences {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

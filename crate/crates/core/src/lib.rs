//! Euclidean distance attacks on network embeddings.
//!
//! A genetic search picks edge flips that scramble the pairwise distances of
//! a node embedding. [`attack`] holds that search and the baseline attacks,
//! [`embed`] the DeepWalk and HOPE embedders, [`objective`] the score being
//! maximized, [`downstream`] the tasks that measure the damage, and [`bench`]
//! the seeded sweep runner behind the `eda` binary.
//!
//! ```
//! use eda_core::attack::{ra_attack, AttackBudget, AttackMode};
//! use eda_core::bench::Dataset;
//!
//! let g = Dataset::karate().graph;
//! let p = ra_attack(&g, AttackBudget::new(AttackMode::Rewire, 2), &mut eda_core::seed::rng(0)).unwrap();
//! assert_eq!(g.apply(&p).unwrap().edge_count(), g.edge_count());
//! ```

pub mod attack;
pub mod bench;
pub mod downstream;
pub mod embed;
pub mod error;
pub mod graph;
pub mod objective;
pub mod partition;
pub mod seed;

// Book chapters, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    mod embeddings {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/attacks.md")]
    mod attacks {}
    #[doc = include_str!("../../../book/src/downstream.md")]
    mod downstream {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

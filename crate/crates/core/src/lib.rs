//! Decision procedures for dendricity of morphic shift spaces.
//!
//! A shift is given by a [`MorphicSpec`]: a primitive substitution, a seed
//! letter and an outer morphism. From there the crate computes factor
//! languages and extension graphs, derived sequences by return words, the
//! multi-clique graphs of left and right special factors, and decides
//! whether the shift is dendric, eventually dendric, or neither. The
//! [`sadic_graph`] and [`iet`] modules build the graphs that characterise
//! dendric and interval-exchange S-adic directive sequences.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

pub mod cliques;
pub mod decide;
pub mod error;
pub mod format;
pub mod iet;
pub mod language;
pub mod returns;
pub mod sadic_graph;
pub mod words;

pub use cliques::{MultiClique, PartialLetterMap};
pub use decide::{Classification, TripletVerdict, Verdict};
pub use error::{Error, Result};
pub use language::{ExtensionData, ExtensionGraph, FiniteLanguage, Language, MorphicSpec, Shift};
pub use returns::{ReturnMorphism, ReturnRepresentation};
pub use words::{compose, Alphabet, Letter, LetterSet, Morphism, Word};

/// Which side of a factor an extension lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Cooperative cancellation shared between a driver and long scans.
#[derive(Clone, Debug, Default)]
pub struct CancelToken {
    flag: Arc<AtomicBool>,
    deadline: Option<Instant>,
}

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_deadline(deadline: Instant) -> Self {
        CancelToken { flag: Arc::default(), deadline: Some(deadline) }
    }

    pub fn cancel(&self) {
        self.flag.store(true, Ordering::Relaxed)
    }

    pub fn is_cancelled(&self) -> bool {
        self.flag.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn check(&self) -> Result<()> {
        if self.is_cancelled() {
            Err(Error::Cancelled)
        } else {
            Ok(())
        }
    }
}

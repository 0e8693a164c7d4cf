//! Knot-diagram corpus generation and evaluation.
//!
//! Diagrams are PD codes ([`pd::Diagram`]). [`moves`] edits them by
//! Reidemeister moves, [`walker`] runs Metropolis–Hastings walks over them,
//! [`invariants`] checks that knot type never changes, [`render`] draws them,
//! [`bench`] turns walks into evaluation items and [`score`] grades answers.
//!
//! ```
//! use knotforge::pd::parse_pd;
//!
//! let trefoil = parse_pd("[[2,5,3,6],[4,1,5,2],[6,3,1,4]]").unwrap();
//! assert_eq!(trefoil.len(), 3);
//! assert_eq!(trefoil.faces().len(), 5);
//! assert_eq!(trefoil.to_dt().as_str(), "bca");
//! ```

pub mod bench;
pub mod digest;
pub mod invariants;
pub mod moves;
pub mod pd;
pub mod poly;
pub mod render;
pub mod score;
pub mod walker;

pub use invariants::InvariantSet;
pub use pd::{parse_pd, CanonicalCode, Diagram, DtCode};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pd-codes.md")]
    mod pd_codes {}
    #[doc = include_str!("../../../book/src/moves.md")]
    mod moves {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/walks.md")]
    mod walks {}
    #[doc = include_str!("../../../book/src/rendering.md")]
    mod rendering {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/exports.md")]
    mod exports {}
}

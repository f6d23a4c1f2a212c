//! Structural indexing for XML documents.
//!
//! The crate covers three layers that build on each other:
//!
//! * a document model ([`doc`], [`parse`], [`region`]): an ordered labeled
//!   tree with start/end/level region codes assigned by a single counter,
//! * path summaries and evaluation ([`summary`], [`path`], [`eval`]):
//!   DataGuide, A(k) and 1-index summaries with extent sets, plus naive and
//!   summary-backed evaluation of a small path language,
//! * structural joins ([`join`]): a start-sorted interval index and
//!   stack-based ancestor/descendant joins over region codes,
//! * a star-schema warehouse ([`warehouse`]): facts and dimension
//!   hierarchies loaded from XML, a fused join index that inlines every
//!   dimension attribute next to its fact, and query rewriting that turns
//!   join-based analytic queries into single index scans.
//!
//! Everything here is allocation-only; IO, persistence formats and the CLI
//! live in the companion `idx` crate. Documents, region maps, summary
//! graphs and warehouse structures are immutable once built and safe to
//! share across threads; evaluation and both query executors are pure
//! reads.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod decimal;
pub mod doc;
pub mod eval;
pub mod join;
pub mod parse;
pub mod path;
pub mod region;
pub mod summary;
pub mod warehouse;

pub use doc::{Document, DocumentBuilder, LabelPath, NodeId, NodeKind, XmlNode};
pub use parse::{parse_document, ParseError};
pub use region::{assign_regions, RegionCode, RegionMap};

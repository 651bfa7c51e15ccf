//! Hierarchical multi-resolution time keys for "open at time t" filtering.
//!
//! A daily opening range is decomposed into a handful of aligned blocks drawn
//! from a hierarchy of block sizes (by default 4h, 1h, 15m, 5m, 1m) and each
//! block becomes one human-readable index term. A point query generates one
//! key per level; the document matches iff one of its blocks contains the
//! query minute.
//!
//! ```
//! use timehash::{index_terms, point_query_terms, parse_hhmm, Hierarchy, TimeRange};
//!
//! let h = Hierarchy::default();
//! let open = TimeRange::new(parse_hhmm("1140")?, parse_hhmm("2100")?)?;
//! let keys: Vec<String> = index_terms(open, &h).iter().map(|k| k.to_string()).collect();
//! assert_eq!(keys, ["08113040", "081145", "12", "16", "2020"]);
//!
//! let query = point_query_terms(parse_hhmm("1430")?, &h)?;
//! assert_eq!(query[0].as_str(), "12");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bench;
pub mod datagen;
pub mod hierarchy;
pub mod index;
pub mod keygen;
pub mod time;

pub use hierarchy::{Component, Hierarchy, HierarchyError, Measure, DAY_MINUTES};
pub use keygen::{
    cover, document_key_count, document_terms, encode, index_key_count, index_terms, point_query_terms,
    range_query_terms, Block, KeygenError, TimehashKey,
};
pub use time::{parse_hhmm, split_wrapping, MinuteOfDay, TimeError, TimeRange};

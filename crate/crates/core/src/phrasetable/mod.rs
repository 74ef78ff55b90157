//! Moses phrase tables and lexicalized reordering tables.
//!
//! Rows look like `src ||| tgt ||| f1 … fn ||| i-j … ||| c1 c2 c3`. Only
//! the first three fields are required; alignment, counts and any further
//! fields are kept as they were. Tables may be gzip-compressed.

mod bitext;
mod io;
mod merge;
mod reordering;
mod row;
mod table;

pub use bitext::{concat_bitexts, count_lines};
pub use io::{create_maybe_gzip, open_maybe_gzip};
pub use merge::{backoff_merge, indicator_merge, INDICATOR_ON};
pub use reordering::{reordering_merge, ReorderingRow, ReorderingTable, DEFAULT_BLOCK_SIZE};
pub use row::{join_fields, Number, PhraseTableRow};
pub use table::PhraseTable;

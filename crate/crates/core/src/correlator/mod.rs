//! Cross-correlation of time-tag streams.

mod histogram;
mod io;

pub use histogram::{
    auto_correlate, cross_correlate, cross_correlate_partitioned, cross_correlate_segmented,
    cross_correlate_slices, merge, normalize_to_g2, normalize_to_plateau, CorrelationHistogram,
    HistogramMeta,
};
pub use io::{
    read_tag_csv, read_tag_file, read_tags_auto, write_tag_csv, write_tag_file, TagRecord, TAG_MAGIC,
    TAG_VERSION,
};

/// Default HBT bin width in ps.
pub const DEFAULT_BIN_PS: u64 = 64;
/// Default HBT half-window in ps.
pub const DEFAULT_HBT_WINDOW_PS: u64 = 20_000;
/// Default HOM half-window in ps.
pub const DEFAULT_HOM_WINDOW_PS: u64 = 80_000;

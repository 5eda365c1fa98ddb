mod codes;
mod family;
mod procedures;

pub use codes::{code_lookup, greedy_code, BundledCodes, CodeProvider, CodeTable};
pub use family::{validate_partition, PartitionFailure, PartitionReport, Rect, RectangleFamily, Side, ValidationMode};
pub use procedures::{
    merged_alpha_volume, merged_partition, merged_terms, simple_alpha_volume, simple_partition, simple_terms, Letter,
    WordSpec,
};

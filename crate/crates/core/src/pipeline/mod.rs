//! Persistence of eigenvalue data, batch scans and their tables.

mod record;
mod scan;
mod store;
mod table;

pub use record::{load_record, save_record, Coords, EigenformRecord, Provenance, StoredEigenform, FORMAT_VERSION};
pub use scan::{level_pairs, scan, EllChoice, RatioShape, ScanConfig};
pub use store::{default_cache_root, import_external, CachedForm, CachedSource, EigenStore, CACHE_ENV, DEFAULT_CACHE};
pub use table::{emit_table, parse_table, verify_table, RowKey, TableFormat, TableRow};

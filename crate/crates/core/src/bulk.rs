//! Parallel annotation of many documents with order-preserving output.

use rayon::prelude::*;

use crate::engine::Engine;
use crate::error::{EdlError, Result};
use crate::record::{DocumentRecord, InputDocument};

/// Annotates `docs` on `workers` threads. The result is in input order and
/// does not depend on the worker count; failed documents become error
/// records.
pub fn annotate_bulk(engine: &Engine, docs: &[InputDocument], workers: usize) -> Result<Vec<DocumentRecord>> {
    if workers <= 1 {
        return Ok(docs.iter().map(|d| engine.annotate_or_error(d)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EdlError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| docs.par_iter().map(|d| engine.annotate_or_error(d)).collect()))
}

/// One JSON line per record.
pub fn render_jsonl(records: &[DocumentRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    out
}

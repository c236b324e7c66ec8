//! Runtime versus document length.

use std::fmt::Write as _;
use std::time::Duration;

use crate::engine::Engine;
use crate::record::InputDocument;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocTiming {
    pub bytes: usize,
    pub preprocess: Duration,
    pub disambiguation: Duration,
}

impl DocTiming {
    pub fn total(&self) -> Duration {
        self.preprocess + self.disambiguation
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares. `None` with fewer than two distinct x values.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LinearFit { slope, intercept, r_squared })
}

/// Mean stage times of the documents whose length falls in
/// `[min_bytes, max_bytes)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub min_bytes: usize,
    pub max_bytes: usize,
    pub documents: usize,
    pub mean_bytes: f64,
    pub preprocess_ms: f64,
    pub disambiguation_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub rows: Vec<ProfileRow>,
    /// Total milliseconds against bytes, over individual documents.
    pub fit: Option<LinearFit>,
    pub failed: usize,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Buckets are powers of two: a document of `b` bytes lands in
/// `[2^k, 2^(k+1))` with `k = floor(log2 b)`; empty documents in `[0, 1)`.
pub fn bucket_rows(timings: &[DocTiming]) -> Vec<ProfileRow> {
    let mut buckets: std::collections::BTreeMap<u32, Vec<&DocTiming>> = Default::default();
    for t in timings {
        let k = if t.bytes == 0 { 0 } else { usize::BITS - t.bytes.leading_zeros() };
        buckets.entry(k).or_default().push(t);
    }
    buckets
        .into_iter()
        .map(|(k, ts)| {
            let n = ts.len() as f64;
            let mean = |f: &dyn Fn(&DocTiming) -> f64| ts.iter().map(|t| f(t)).sum::<f64>() / n;
            let (min_bytes, max_bytes) = if k == 0 { (0, 1) } else { (1usize << (k - 1), 1usize << k) };
            ProfileRow {
                min_bytes,
                max_bytes,
                documents: ts.len(),
                mean_bytes: mean(&|t| t.bytes as f64),
                preprocess_ms: mean(&|t| ms(t.preprocess)),
                disambiguation_ms: mean(&|t| ms(t.disambiguation)),
                total_ms: mean(&|t| ms(t.total())),
            }
        })
        .collect()
}

/// Times every document `repeats` times (keeping the fastest run) on the
/// calling thread.
pub fn time_documents(engine: &Engine, docs: &[InputDocument], repeats: usize) -> (Vec<DocTiming>, usize) {
    let mut out = Vec::with_capacity(docs.len());
    let mut failed = 0;
    for d in docs {
        let mut best: Option<DocTiming> = None;
        for _ in 0..repeats.max(1) {
            match engine.annotate_timed(d) {
                Ok((_, t)) => {
                    let timing = DocTiming {
                        bytes: d.text.len(),
                        preprocess: t.preprocess,
                        disambiguation: t.disambiguation,
                    };
                    if best.is_none_or(|b| timing.total() < b.total()) {
                        best = Some(timing);
                    }
                }
                Err(_) => break,
            }
        }
        match best {
            Some(t) => out.push(t),
            None => failed += 1,
        }
    }
    (out, failed)
}

pub fn profile(engine: &Engine, docs: &[InputDocument], repeats: usize) -> ProfileReport {
    let (timings, failed) = time_documents(engine, docs, repeats);
    let points: Vec<(f64, f64)> = timings.iter().map(|t| (t.bytes as f64, ms(t.total()))).collect();
    ProfileReport {
        rows: bucket_rows(&timings),
        fit: linear_fit(&points),
        failed,
    }
}

impl ProfileReport {
    pub fn to_table(&self) -> String {
        let mut s = String::from("min_bytes\tmax_bytes\tdocuments\tmean_bytes\tpreprocess_ms\tdisambiguation_ms\ttotal_ms\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{:.1}\t{:.4}\t{:.4}\t{:.4}",
                r.min_bytes, r.max_bytes, r.documents, r.mean_bytes, r.preprocess_ms, r.disambiguation_ms, r.total_ms
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let fit = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[(1.0, 1.0)]).is_none());
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn noisy_line_r_squared() {
        let pts = [(0.0, 1.0), (1.0, 0.0), (2.0, 3.0), (3.0, 2.0)];
        let fit = linear_fit(&pts).unwrap();
        let my = 1.5;
        let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
        let ss_res: f64 = pts.iter().map(|p| (p.1 - fit.slope * p.0 - fit.intercept).powi(2)).sum();
        assert!((fit.r_squared - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
        assert!(fit.r_squared > 0.0 && fit.r_squared < 1.0);
    }

    #[test]
    fn buckets_are_powers_of_two() {
        let t = |bytes| DocTiming { bytes, preprocess: Duration::from_millis(1), disambiguation: Duration::ZERO };
        let rows = bucket_rows(&[t(0), t(100), t(127), t(128), t(5000)]);
        let bounds: Vec<(usize, usize, usize)> = rows.iter().map(|r| (r.min_bytes, r.max_bytes, r.documents)).collect();
        assert_eq!(bounds, vec![(0, 1, 1), (64, 128, 2), (128, 256, 1), (4096, 8192, 1)]);
        assert!(bucket_rows(&[]).is_empty());
    }
}

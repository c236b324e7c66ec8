//! Exhaustive grid search over the hyperparameters on a validation set.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::disambig::Hyperparameters;
use crate::engine::{render, Engine, PreparedDocument};
use crate::error::{EdlError, Result};
use crate::eval::{evaluate_spans, AlignmentPolicy, ConfusionCounts, Metrics, Span};
use crate::record::GoldDocument;

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
    pub window: Vec<usize>,
}

impl Grid {
    /// A single-point grid at `hp`.
    pub fn at(hp: &Hyperparameters) -> Self {
        Grid {
            lambda1: vec![hp.lambda1],
            lambda2: vec![hp.lambda2],
            lambda3: vec![hp.lambda3],
            window: vec![hp.window],
        }
    }

    /// Parses `name=values;name=values`, where values are either a comma
    /// list (`0.5,0.9`) or an inclusive range `start:step:end`. Axes not
    /// named keep the value from `base`. Names: `lambda1`, `lambda2`,
    /// `lambda3`, `window`.
    pub fn parse(spec: &str, base: &Hyperparameters) -> Result<Self> {
        let mut grid = Grid::at(base);
        let mut seen = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| EdlError::Grid(format!("expected name=values, got {part:?}")))?;
            let name = name.trim();
            if seen.contains(&name) {
                return Err(EdlError::Grid(format!("{name} given twice")));
            }
            seen.push(name);
            let values = parse_values(values.trim())?;
            match name {
                "lambda1" => grid.lambda1 = unit_values(name, values)?,
                "lambda2" => grid.lambda2 = unit_values(name, values)?,
                "lambda3" => grid.lambda3 = unit_values(name, values)?,
                "window" | "W" => {
                    grid.window = values
                        .into_iter()
                        .map(|v| {
                            if v >= 1.0 && v.fract() == 0.0 {
                                Ok(v as usize)
                            } else {
                                Err(EdlError::Grid(format!("window values must be positive integers, got {v}")))
                            }
                        })
                        .collect::<Result<_>>()?;
                }
                other => return Err(EdlError::Grid(format!("unknown hyperparameter {other:?}"))),
            }
        }
        grid.lambda1.dedup();
        grid.lambda2.dedup();
        grid.lambda3.dedup();
        grid.window.dedup();
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.lambda1.len() * self.lambda2.len() * self.lambda3.len() * self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The Cartesian product, in nested order (lambda1 outermost).
    pub fn points(&self) -> Vec<Hyperparameters> {
        let mut out = Vec::with_capacity(self.len());
        for &lambda1 in &self.lambda1 {
            for &lambda2 in &self.lambda2 {
                for &lambda3 in &self.lambda3 {
                    for &window in &self.window {
                        out.push(Hyperparameters { lambda1, lambda2, lambda3, window });
                    }
                }
            }
        }
        out
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| EdlError::Grid(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(EdlError::Grid(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

/// Rounds away accumulated floating error in range steps.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(EdlError::Grid("empty value list".into()));
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (parse_number(start)?, parse_number(step)?, parse_number(end)?);
            if step <= 0.0 {
                return Err(EdlError::Grid(format!("range step must be positive, got {step}")));
            }
            if end < start {
                return Err(EdlError::Grid(format!("range end {end} is below start {start}")));
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(EdlError::Grid("range has too many values".into()));
            }
            Ok((0..=n).map(|i| tidy(start + i as f64 * step)).collect())
        }
        [_] => s.split(',').map(parse_number).collect(),
        _ => Err(EdlError::Grid(format!("expected a list or start:step:end, got {s:?}"))),
    }
}

fn unit_values(name: &str, values: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(EdlError::Grid(format!("{name} values must be in [0,1], got {v}")));
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub hp: Hyperparameters,
    pub metrics: Metrics,
}

fn canonical_order(a: &Hyperparameters, b: &Hyperparameters) -> Ordering {
    a.lambda1
        .total_cmp(&b.lambda1)
        .then(a.lambda2.total_cmp(&b.lambda2))
        .then(a.lambda3.total_cmp(&b.lambda3))
        .then(a.window.cmp(&b.window))
}

/// `Less` when `a` is the better point: higher F1, then higher accuracy,
/// then smaller lambda3, then smaller lambda1, lambda2 and window.
pub fn compare_points(a: &SweepPoint, b: &SweepPoint) -> Ordering {
    b.metrics
        .f1
        .total_cmp(&a.metrics.f1)
        .then(b.metrics.accuracy.total_cmp(&a.metrics.accuracy))
        .then(a.hp.lambda3.total_cmp(&b.hp.lambda3))
        .then(a.hp.lambda1.total_cmp(&b.hp.lambda1))
        .then(a.hp.lambda2.total_cmp(&b.hp.lambda2))
        .then(a.hp.window.cmp(&b.hp.window))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Every point, in canonical order (lambda1, lambda2, lambda3, window
    /// ascending).
    pub points: Vec<SweepPoint>,
    pub best: SweepPoint,
}

impl SweepResult {
    pub fn from_points(mut points: Vec<SweepPoint>) -> Result<Self> {
        points.sort_by(|a, b| canonical_order(&a.hp, &b.hp));
        let best = *points
            .iter()
            .min_by(|a, b| compare_points(a, b))
            .ok_or_else(|| EdlError::Grid("empty grid".into()))?;
        Ok(SweepResult { points, best })
    }

    /// Tab-separated table with a header row.
    pub fn to_table(&self) -> String {
        let mut s = String::from("lambda1\tlambda2\tlambda3\twindow\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\taccuracy\n");
        for p in &self.points {
            let c = &p.metrics.counts;
            let m = &p.metrics;
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                p.hp.lambda1, p.hp.lambda2, p.hp.lambda3, p.hp.window, c.tp, c.fp, c.fn_, c.tn, m.precision, m.recall, m.f1,
                m.accuracy
            );
        }
        s
    }
}

/// Config-file fragment holding the hyperparameters.
pub fn config_fragment(hp: &Hyperparameters) -> String {
    format!(
        "lambda1 = {:?}\nlambda2 = {:?}\nlambda3 = {:?}\nwindow = {}\n",
        hp.lambda1, hp.lambda2, hp.lambda3, hp.window
    )
}

/// Evaluates every point with `score` (in parallel) and picks the best.
pub fn sweep_with<F>(points: &[Hyperparameters], score: F) -> Result<SweepResult>
where
    F: Fn(&Hyperparameters) -> Result<Metrics> + Sync,
{
    if points.is_empty() {
        return Err(EdlError::Grid("empty grid".into()));
    }
    let evaluated = points
        .par_iter()
        .map(|hp| score(hp).map(|metrics| SweepPoint { hp: *hp, metrics }))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_points(evaluated)
}

/// Sweeps `grid` over the validation documents. Preprocessing runs once per
/// document; only disambiguation is repeated per point.
pub fn parameter_sweep(
    validation: &[GoldDocument],
    grid: &Grid,
    engine: &Engine,
    policy: AlignmentPolicy,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(EdlError::Grid("empty grid".into()));
    }
    if validation.is_empty() {
        return Err(EdlError::Grid("empty validation set".into()));
    }
    for hp in grid.points() {
        hp.validate()?;
    }
    let prepared: Vec<PreparedDocument> = validation
        .par_iter()
        .map(|g| engine.prepare(&g.input()))
        .collect::<Result<_>>()?;
    let gold: Vec<Vec<(Span, crate::entity::EntityId)>> = validation
        .iter()
        .map(|g| g.mentions.iter().map(|m| (m.span(), m.entity.clone())).collect())
        .collect();
    sweep_with(&grid.points(), |hp| {
        let mut counts = ConfusionCounts::default();
        for (doc, g) in prepared.iter().zip(&gold) {
            let record = render(None, doc, &engine.resolve(doc, hp)?);
            let spans: Vec<_> = record.mentions.iter().map(|m| (m.span(), m.entity.clone())).collect();
            counts += evaluate_spans(&spans, g, policy)?;
        }
        Ok(counts.metrics())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parsing() {
        let base = Hyperparameters::default();
        let g = Grid::parse("lambda1=0.5:0.05:0.95; lambda2=0.5,0.9", &base).unwrap();
        assert_eq!(g.lambda1.len(), 10);
        assert_eq!(g.lambda1[3], 0.65);
        assert_eq!(*g.lambda1.last().unwrap(), 0.95);
        assert_eq!(g.lambda2, vec![0.5, 0.9]);
        assert_eq!(g.lambda3, vec![0.5]);
        assert_eq!(g.window, vec![400]);
        assert_eq!(g.len(), 20);
        let g = Grid::parse("window=100:100:400", &base).unwrap();
        assert_eq!(g.window, vec![100, 200, 300, 400]);
    }

    #[test]
    fn malformed_specs() {
        let base = Hyperparameters::default();
        for bad in ["lambda1", "lambda9=0.5", "lambda1=0.5:0:1", "lambda1=1.5", "window=0.5", "lambda1=a,b", "lambda1=0.9:0.1:0.5", "lambda1=0.5;lambda1=0.6", "lambda1="] {
            assert!(Grid::parse(bad, &base).is_err(), "{bad}");
        }
        assert_eq!(Grid::parse("", &base).unwrap().len(), 1);
    }

    fn point(l1: f64, l3: f64, f1: f64, acc: f64) -> SweepPoint {
        SweepPoint {
            hp: Hyperparameters { lambda1: l1, lambda3: l3, ..Default::default() },
            metrics: Metrics { f1, accuracy: acc, ..Default::default() },
        }
    }

    #[test]
    fn best_point_tie_breaks() {
        let r = SweepResult::from_points(vec![point(0.5, 0.5, 0.8, 0.7), point(0.6, 0.5, 0.9, 0.1)]).unwrap();
        assert_eq!(r.best.hp.lambda1, 0.6);
        let r = SweepResult::from_points(vec![point(0.5, 0.5, 0.8, 0.7), point(0.6, 0.5, 0.8, 0.9)]).unwrap();
        assert_eq!(r.best.hp.lambda1, 0.6);
        let r = SweepResult::from_points(vec![point(0.5, 0.6, 0.8, 0.7), point(0.6, 0.4, 0.8, 0.7)]).unwrap();
        assert_eq!(r.best.hp.lambda3, 0.4);
        let r = SweepResult::from_points(vec![point(0.6, 0.5, 0.8, 0.7), point(0.5, 0.5, 0.8, 0.7)]).unwrap();
        assert_eq!(r.best.hp.lambda1, 0.5);
        assert!(SweepResult::from_points(vec![]).is_err());
    }

    #[test]
    fn fragment_is_valid_toml_numbers() {
        let s = config_fragment(&Hyperparameters { lambda1: 1.0, ..Default::default() });
        assert_eq!(s, "lambda1 = 1.0\nlambda2 = 0.9\nlambda3 = 0.5\nwindow = 400\n");
    }
}

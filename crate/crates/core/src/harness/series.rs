use std::io::Write;

use super::events::ImprovementEvent;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Arithmetic means over the seeds of one instance, in seconds.
    PerInstance,
    /// [`SeriesKind::PerInstance`] with times divided by `t_I`.
    Normalized,
    /// Geometric means over instances of normalized series.
    CrossInstance,
}

/// Event-based average quality over time.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSeries {
    pub kind: SeriesKind,
    /// `(time, value)` with nondecreasing times.
    pub points: Vec<(f64, f64)>,
}

impl ConvergenceSeries {
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 <= w[0].1)
    }

    pub fn final_value(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }
}

/// Starts from the average of every source's first point, then sweeps the
/// remaining points in time order, swapping in the source's new value and
/// emitting the recomputed average. Times are clamped so that they never
/// run backwards.
fn sweep(sources: &[Vec<(f64, f64)>], average: impl Fn(&[f64]) -> f64) -> Vec<(f64, f64)> {
    let mut current: Vec<f64> = sources.iter().map(|s| s[0].1).collect();
    let start = sources.iter().map(|s| s[0].0).sum::<f64>() / sources.len() as f64;
    let mut rest: Vec<(f64, usize, f64)> = sources
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s[1..].iter().map(move |&(t, v)| (t, i, v)))
        .collect();
    rest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut points = vec![(start, average(&current))];
    let mut last = start;
    for (t, i, v) in rest {
        current[i] = v;
        last = last.max(t);
        points.push((last, average(&current)));
    }
    points
}

fn arithmetic_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn geometric_mean(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    values.iter().map(|v| v.powf(1.0 / n)).product()
}

/// Per-instance series `T_min` from the event streams of several seeds.
pub fn merge_events(runs: &[Vec<ImprovementEvent>]) -> Result<ConvergenceSeries> {
    if runs.is_empty() {
        return Err(Error::usage("merge_events needs at least one run"));
    }
    let mut sources = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        if run.is_empty() {
            return Err(Error::usage(format!("run {i} has no events")));
        }
        let mut s: Vec<(f64, f64)> = run.iter().map(|e| (e.time, e.value as f64)).collect();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        sources.push(s);
    }
    Ok(ConvergenceSeries { kind: SeriesKind::PerInstance, points: sweep(&sources, arithmetic_mean) })
}

/// Divides every time by `t_i`.
pub fn normalize_series(s: &ConvergenceSeries, t_i: f64) -> Result<ConvergenceSeries> {
    if !(t_i > 0.0) || !t_i.is_finite() {
        return Err(Error::usage(format!("t_I must be positive, got {t_i}")));
    }
    Ok(ConvergenceSeries {
        kind: SeriesKind::Normalized,
        points: s.points.iter().map(|&(t, v)| (t / t_i, v)).collect(),
    })
}

/// Inverse of [`normalize_series`].
pub fn denormalize_series(s: &ConvergenceSeries, t_i: f64) -> Result<ConvergenceSeries> {
    if !(t_i > 0.0) || !t_i.is_finite() {
        return Err(Error::usage(format!("t_I must be positive, got {t_i}")));
    }
    Ok(ConvergenceSeries {
        kind: SeriesKind::PerInstance,
        points: s.points.iter().map(|&(t, v)| (t * t_i, v)).collect(),
    })
}

/// Geometric-mean series over instances. Zero values count as one.
pub fn cross_instance_series(all: &[(String, ConvergenceSeries)]) -> Result<ConvergenceSeries> {
    if all.is_empty() {
        return Err(Error::usage("cross_instance_series needs at least one instance"));
    }
    let mut sources = Vec::with_capacity(all.len());
    for (name, s) in all {
        if s.points.is_empty() {
            return Err(Error::usage(format!("instance {name} has an empty series")));
        }
        let mut points = Vec::with_capacity(s.points.len());
        for &(t, v) in &s.points {
            let v = if v == 0.0 { 1.0 } else { v };
            if !(v > 0.0) {
                return Err(Error::Internal(format!("instance {name} has non-positive value {v}")));
            }
            points.push((t, v));
        }
        sources.push(points);
    }
    Ok(ConvergenceSeries { kind: SeriesKind::CrossInstance, points: sweep(&sources, geometric_mean) })
}

pub fn write_convergence_csv<W: Write>(out: W, s: &ConvergenceSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_norm", "geo_mean"])?;
    for &(t, v) in &s.points {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(time: f64, seed: u64, value: i64) -> ImprovementEvent {
        ImprovementEvent { time, seed, value }
    }

    #[test]
    fn two_run_example() {
        let s = merge_events(&[vec![ev(1.0, 0, 10)], vec![ev(1.0, 1, 10), ev(2.0, 1, 8)]]).unwrap();
        assert_eq!(s.points, vec![(1.0, 10.0), (2.0, 9.0)]);
    }

    #[test]
    fn single_run_is_identity() {
        let run = vec![ev(0.5, 0, 30), ev(1.0, 0, 20), ev(4.0, 0, 7)];
        let s = merge_events(&[run]).unwrap();
        assert_eq!(s.points, vec![(0.5, 30.0), (1.0, 20.0), (4.0, 7.0)]);
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(merge_events(&[]).is_err());
        assert!(merge_events(&[vec![]]).is_err());
        assert!(cross_instance_series(&[]).is_err());
    }

    #[test]
    fn normalization_roundtrip() {
        let s = merge_events(&[vec![ev(1.0, 0, 9), ev(3.0, 0, 4)]]).unwrap();
        let n = normalize_series(&s, 2.0).unwrap();
        assert_eq!(n.points, vec![(0.5, 9.0), (1.5, 4.0)]);
        assert_eq!(denormalize_series(&n, 2.0).unwrap().points, s.points);
        assert_eq!(normalize_series(&s, 1.0).unwrap().points, s.points);
        assert!(normalize_series(&s, 0.0).is_err());
    }

    #[test]
    fn geometric_mean_of_constants() {
        let a = ConvergenceSeries { kind: SeriesKind::Normalized, points: vec![(1.0, 4.0)] };
        let b = ConvergenceSeries { kind: SeriesKind::Normalized, points: vec![(1.0, 9.0)] };
        let g = cross_instance_series(&[("a".into(), a), ("b".into(), b)]).unwrap();
        assert_eq!(g.points, vec![(1.0, 6.0)]);
    }

    #[test]
    fn zero_counts_as_one() {
        let a = ConvergenceSeries { kind: SeriesKind::Normalized, points: vec![(1.0, 0.0)] };
        let b = ConvergenceSeries { kind: SeriesKind::Normalized, points: vec![(1.0, 16.0)] };
        let g = cross_instance_series(&[("a".into(), a), ("b".into(), b)]).unwrap();
        assert_eq!(g.points, vec![(1.0, 4.0)]);
    }
}

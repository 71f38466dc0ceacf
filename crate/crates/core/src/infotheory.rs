//! Histogram-based Shannon measures over quantized position samples.
//!
//! All quantities are in bits. Samples are binned on a global grid anchored at
//! `origin`, so overlapping windows share bin edges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::{window_bounds, AxisSet, ElementId, PipelineConfig, Recording};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationGrid {
    pub q: f64,
    pub origin: f64,
}

impl QuantizationGrid {
    pub fn new(q: f64, origin: f64) -> Result<Self> {
        if !(q > 0.0) || !origin.is_finite() {
            return Err(Error::Config(format!("invalid grid q={q} origin={origin}")));
        }
        Ok(QuantizationGrid { q, origin })
    }

    #[inline]
    pub fn bin(&self, v: f64) -> i64 {
        ((v - self.origin) / self.q).floor() as i64
    }
}

/// Occupancy counts over (possibly multi-dimensional) bins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<Vec<i64>, usize>,
    total: usize,
}

impl EmpiricalDistribution {
    pub fn from_bins(bins: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for b in bins {
            *counts.entry(b).or_insert(0) += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::EmptySamples);
        }
        Ok(EmpiricalDistribution { counts, total })
    }

    /// Joint distribution of equally long scalar signals.
    pub fn joint(signals: &[&[f64]], grid: &QuantizationGrid) -> Result<Self> {
        let n = check_lengths(signals)?;
        Self::from_bins((0..n).map(|i| signals.iter().map(|s| grid.bin(s[i])).collect()))
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (&[i64], f64)> + '_ {
        let n = self.total as f64;
        self.counts.iter().map(move |(k, &c)| (k.as_slice(), c as f64 / n))
    }

    pub fn entropy(&self) -> f64 {
        let mut counts: Vec<usize> = self.counts.values().copied().collect();
        entropy_from_counts(&mut counts, self.total)
    }
}

/// `-Σ p log2 p` with counts summed in sorted order so equal multisets give
/// bit-identical results.
pub(crate) fn entropy_from_counts(counts: &mut [usize], total: usize) -> f64 {
    counts.sort_unstable();
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts.iter() {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Entropy of already-binned keys; sorts `keys` in place.
pub(crate) fn entropy_of_keys<T: Ord>(keys: &mut [T]) -> f64 {
    if keys.is_empty() {
        return 0.0;
    }
    keys.sort_unstable();
    let mut counts = Vec::new();
    let mut run = 1;
    for i in 1..keys.len() {
        if keys[i] == keys[i - 1] {
            run += 1;
        } else {
            counts.push(run);
            run = 1;
        }
    }
    counts.push(run);
    entropy_from_counts(&mut counts, keys.len())
}

/// MI of two equally long bin sequences, clamped at zero.
pub(crate) fn mutual_information_of_bins(a: &[i64], b: &[i64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ha = entropy_of_keys(&mut a.to_vec());
    let hb = entropy_of_keys(&mut b.to_vec());
    let mut ab: Vec<(i64, i64)> = a.iter().copied().zip(b.iter().copied()).collect();
    let hab = entropy_of_keys(&mut ab);
    ((ha + hb) - hab).max(0.0)
}

fn check_lengths(signals: &[&[f64]]) -> Result<usize> {
    let n = signals.first().map_or(0, |s| s.len());
    for s in signals {
        if s.len() != n {
            return Err(Error::LengthMismatch(n, s.len()));
        }
    }
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(n)
}

fn bins(samples: &[f64], grid: &QuantizationGrid) -> Vec<i64> {
    samples.iter().map(|&v| grid.bin(v)).collect()
}

pub fn entropy(samples: &[f64], grid: &QuantizationGrid) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(entropy_of_keys(&mut bins(samples, grid)))
}

pub fn joint_entropy(x: &[f64], y: &[f64], grid: &QuantizationGrid) -> Result<f64> {
    joint_entropy_nd(&[x, y], grid)
}

/// Entropy of the joint binned distribution of any number of signals.
pub fn joint_entropy_nd(signals: &[&[f64]], grid: &QuantizationGrid) -> Result<f64> {
    let n = check_lengths(signals)?;
    let mut keys: Vec<Vec<i64>> = (0..n)
        .map(|i| signals.iter().map(|s| grid.bin(s[i])).collect())
        .collect();
    Ok(entropy_of_keys(&mut keys))
}

/// `H(x) + H(y) - H(x, y)`, clamped at zero.
pub fn mutual_information(x: &[f64], y: &[f64], grid: &QuantizationGrid) -> Result<f64> {
    check_lengths(&[x, y])?;
    Ok(mutual_information_of_bins(&bins(x, grid), &bins(y, grid)))
}

/// Sum of per-axis MI between two position tracks.
pub fn mutual_information_nd(
    track_a: &[[f64; 3]],
    track_b: &[[f64; 3]],
    axes: &AxisSet,
    grid: &QuantizationGrid,
) -> Result<f64> {
    if track_a.len() != track_b.len() {
        return Err(Error::LengthMismatch(track_a.len(), track_b.len()));
    }
    let mut total = 0.0;
    for i in axes.indices() {
        let a: Vec<f64> = track_a.iter().map(|p| p[i]).collect();
        let b: Vec<f64> = track_b.iter().map(|p| p[i]).collect();
        total += mutual_information(&a, &b, grid)?;
    }
    Ok(total)
}

/// Inclusion-exclusion sum `Σ_{S ≠ ∅} (-1)^{|S|+1} H(S)`; reduces to MI for
/// two signals and to `H` for identical signals.
pub fn subset_information(signals: &[&[f64]], grid: &QuantizationGrid) -> Result<f64> {
    check_lengths(signals)?;
    let m = signals.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << m) {
        let subset: Vec<&[f64]> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| signals[i]).collect();
        let h = joint_entropy_nd(&subset, grid)?;
        if subset.len() % 2 == 1 {
            total += h;
        } else {
            total -= h;
        }
    }
    Ok(total)
}

/// Co-information of three or more signals.
pub fn co_information(signals: &[&[f64]], grid: &QuantizationGrid) -> Result<f64> {
    if signals.len() < 3 {
        return Err(Error::TooFewSignals(signals.len()));
    }
    if signals.len() > 16 {
        return Err(Error::Config("co-information supports at most 16 signals".into()));
    }
    subset_information(signals, grid)
}

/// A windowed statistic indexed by frame. `values[i]` belongs to frame
/// `start_frame + i`; `None` where an element was absent inside the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub start_frame: usize,
    pub values: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn empty() -> Self {
        TimeSeries {
            start_frame: 0,
            values: Vec::new(),
        }
    }

    pub fn get(&self, frame: usize) -> Option<f64> {
        frame
            .checked_sub(self.start_frame)
            .and_then(|i| self.values.get(i).copied().flatten())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Option<f64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start_frame + i, *v))
    }

    /// Centered sliding entropy over this series' own values.
    pub fn sliding_entropy(&self, w: usize, grid: &QuantizationGrid) -> TimeSeries {
        let half = w / 2;
        if self.values.len() <= 2 * half {
            return TimeSeries::empty();
        }
        let values = (half..self.values.len() - half)
            .map(|i| {
                let mut keys = Vec::with_capacity(w + 1);
                for v in &self.values[i - half..=i + half] {
                    keys.push(grid.bin((*v)?));
                }
                Some(entropy_of_keys(&mut keys))
            })
            .collect();
        TimeSeries {
            start_frame: self.start_frame + half,
            values,
        }
    }

    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["frame", "value"])?;
        for (k, v) in self.iter() {
            w.write_record([k.to_string(), v.map(|v| v.to_string()).unwrap_or_default()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Per-axis position entropy of one element, summed over axes.
    Entropy,
    /// Per-axis MI between two elements, summed over axes.
    Mi,
    AvgDistance,
    /// Sliding entropy of the average-distance series.
    EntropyOfDistance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Element(ElementId),
    Pair(ElementId, ElementId),
}

/// Per-frame windowed statistic over every frame with a full window.
pub fn sliding_series(
    recording: &Recording,
    selector: &Selector,
    statistic: Statistic,
    config: &PipelineConfig,
) -> Result<TimeSeries> {
    let w = config.window_samples;
    let n = recording.duration();
    if n <= w {
        return Err(Error::WindowOutOfRange {
            frame: 0,
            window: w,
            duration: n,
        });
    }
    let grid = config.grid();
    let axes = &config.axes;
    let half = w / 2;
    let window_positions = |idx: usize, t: usize| -> Option<Vec<[f64; 3]>> {
        let (lo, hi) = window_bounds(t, w, n)?;
        (lo..=hi).map(|k| recording.pose(idx, k).map(|p| p.position)).collect()
    };
    let frames = half..n - half;
    let values: Vec<Option<f64>> = match (statistic, selector) {
        (Statistic::Entropy, Selector::Element(id)) => {
            let idx = recording.index_of(id)?;
            frames
                .map(|t| {
                    let pos = window_positions(idx, t)?;
                    Some(
                        axes.indices()
                            .map(|a| entropy_of_keys(&mut pos.iter().map(|p| grid.bin(p[a])).collect::<Vec<_>>()))
                            .sum(),
                    )
                })
                .collect()
        }
        (Statistic::Mi, Selector::Pair(a, b)) => {
            let (ia, ib) = (recording.index_of(a)?, recording.index_of(b)?);
            frames
                .map(|t| {
                    let pa = window_positions(ia, t)?;
                    let pb = window_positions(ib, t)?;
                    mutual_information_nd(&pa, &pb, axes, &grid).ok()
                })
                .collect()
        }
        (Statistic::AvgDistance, Selector::Pair(a, b)) => {
            return avg_distance_series(recording, a, b, config);
        }
        (Statistic::EntropyOfDistance, Selector::Pair(a, b)) => {
            return Ok(avg_distance_series(recording, a, b, config)?.sliding_entropy(w, &grid));
        }
        (s, sel) => {
            return Err(Error::Config(format!("statistic {s:?} does not apply to {sel:?}")));
        }
    };
    Ok(TimeSeries {
        start_frame: half,
        values,
    })
}

fn avg_distance_series(
    recording: &Recording,
    a: &ElementId,
    b: &ElementId,
    config: &PipelineConfig,
) -> Result<TimeSeries> {
    let (ia, ib) = (recording.index_of(a)?, recording.index_of(b)?);
    let d: Vec<Option<f64>> = (0..recording.duration())
        .map(|k| {
            let pa = recording.pose(ia, k)?;
            let pb = recording.pose(ib, k)?;
            Some(config.axes.distance(&pa.position, &pb.position))
        })
        .collect();
    Ok(window_mean(&d, config.window_samples))
}

/// Centered moving average of a per-frame series; `None` if any sample in the window is.
pub(crate) fn window_mean(per_frame: &[Option<f64>], w: usize) -> TimeSeries {
    let half = w / 2;
    let n = per_frame.len();
    if n <= 2 * half {
        return TimeSeries::empty();
    }
    let values = (half..n - half)
        .map(|t| {
            let mut s = 0.0;
            for v in &per_frame[t - half..=t + half] {
                s += (*v)?;
            }
            Some(s / (w + 1) as f64)
        })
        .collect();
    TimeSeries {
        start_frame: half,
        values,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Negative,
    NonNegative,
}

/// Negative iff strictly more than half of the last `horizon` consecutive
/// differences ending at `t` are negative.
pub fn trend_sign(series: &TimeSeries, t: usize, horizon: usize) -> Result<Trend> {
    let insufficient = Error::InsufficientHistory {
        frame: t,
        needed: horizon + 1,
    };
    let Some(first) = t.checked_sub(horizon) else {
        return Err(insufficient);
    };
    let mut values = Vec::with_capacity(horizon + 1);
    for k in first..=t {
        match series.get(k) {
            Some(v) => values.push(v),
            None => return Err(insufficient),
        }
    }
    let decreasing = values.windows(2).filter(|p| p[1] < p[0]).count();
    Ok(if 2 * decreasing > horizon {
        Trend::Negative
    } else {
        Trend::NonNegative
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    const GRID: QuantizationGrid = QuantizationGrid { q: 0.01, origin: 0.0 };

    // Independent counting oracle: hash-map histogram, textbook formula.
    fn oracle_h(rows: &[Vec<f64>]) -> f64 {
        let mut hist: HashMap<Vec<i64>, f64> = HashMap::new();
        for r in rows {
            let key = r.iter().map(|v| (v / 0.01).floor() as i64).collect();
            *hist.entry(key).or_default() += 1.0;
        }
        let n = rows.len() as f64;
        hist.values().map(|c| -(c / n) * (c / n).log2()).sum()
    }

    fn col(x: &[f64]) -> Vec<Vec<f64>> {
        x.iter().map(|&v| vec![v]).collect()
    }

    fn zip2(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
        x.iter().zip(y).map(|(&a, &b)| vec![a, b]).collect()
    }

    fn scripted() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        // deterministic pseudo-random bin centres
        let x: Vec<f64> = (0..40).map(|i| ((i * 7 + 3) % 11) as f64 * 0.01 + 0.005).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + ((i % 3) as f64) * 0.01).collect();
        let z: Vec<f64> = (0..40).map(|i| ((i * 5) % 4) as f64 * 0.01 + 0.005).collect();
        (x, y, z)
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.123; 40], &GRID).unwrap(), 0.0);
        let two: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.005 } else { 0.015 }).collect();
        assert_eq!(entropy(&two, &GRID).unwrap(), 1.0);
        let four: Vec<f64> = (0..40).map(|i| (i % 4) as f64 * 0.01 + 0.005).collect();
        assert_eq!(entropy(&four, &GRID).unwrap(), 2.0);
        let (x, _, _) = scripted();
        assert!((entropy(&x, &GRID).unwrap() - oracle_h(&col(&x))).abs() < 1e-12);
        assert!(matches!(entropy(&[], &GRID), Err(Error::EmptySamples)));
    }

    #[test]
    fn joint_entropy_examples() {
        let (x, y, _) = scripted();
        assert_eq!(joint_entropy(&x, &x, &GRID).unwrap(), entropy(&x, &GRID).unwrap());
        let c = vec![0.5; 40];
        assert_eq!(joint_entropy(&c, &y, &GRID).unwrap(), entropy(&y, &GRID).unwrap());
        assert!((joint_entropy(&x, &y, &GRID).unwrap() - oracle_h(&zip2(&x, &y))).abs() < 1e-12);
        assert!(matches!(
            joint_entropy(&x, &y[..3], &GRID),
            Err(Error::LengthMismatch(40, 3))
        ));
        assert!(matches!(joint_entropy(&[], &[], &GRID), Err(Error::EmptySamples)));
    }

    #[test]
    fn mutual_information_examples() {
        let (x, y, _) = scripted();
        assert_eq!(mutual_information(&x, &x, &GRID).unwrap(), entropy(&x, &GRID).unwrap());
        assert_eq!(mutual_information(&[0.3; 40], &y, &GRID).unwrap(), 0.0);
        let oracle = oracle_h(&col(&x)) + oracle_h(&col(&y)) - oracle_h(&zip2(&x, &y));
        assert!((mutual_information(&x, &y, &GRID).unwrap() - oracle).abs() < 1e-12);
        assert_eq!(
            mutual_information(&x, &y, &GRID).unwrap(),
            mutual_information(&y, &x, &GRID).unwrap()
        );
    }

    #[test]
    fn mutual_information_nd_examples() {
        let axes = AxisSet::xy();
        let still = vec![[0.1, 0.2, 0.0]; 41];
        assert_eq!(mutual_information_nd(&still, &still, &axes, &GRID).unwrap(), 0.0);
        let a: Vec<[f64; 3]> = (0..41).map(|k| [0.005 + 0.004 * k as f64, 0.2, 0.0]).collect();
        let b: Vec<[f64; 3]> = a.iter().map(|p| [p[0] + 0.1, 0.5, 0.3]).collect();
        let ax: Vec<f64> = a.iter().map(|p| p[0]).collect();
        let bx: Vec<f64> = b.iter().map(|p| p[0]).collect();
        let per_axis = oracle_h(&col(&ax)) + oracle_h(&col(&bx)) - oracle_h(&zip2(&ax, &bx));
        let got = mutual_information_nd(&a, &b, &axes, &GRID).unwrap();
        assert!((got - per_axis).abs() < 1e-12);
        assert!(got > 0.05);
    }

    #[test]
    fn co_information_examples() {
        let (x, y, z) = scripted();
        let h = entropy(&x, &GRID).unwrap();
        assert!((co_information(&[&x, &x, &x], &GRID).unwrap() - h).abs() < 1e-12);
        assert!(co_information(&[&x, &y, &[0.7; 40]], &GRID).unwrap().abs() < 1e-12);
        let (hx, hy, hz) = (oracle_h(&col(&x)), oracle_h(&col(&y)), oracle_h(&col(&z)));
        let hxy = oracle_h(&zip2(&x, &y));
        let hxz = oracle_h(&zip2(&x, &z));
        let hyz = oracle_h(&zip2(&y, &z));
        let hxyz = oracle_h(
            &x.iter()
                .zip(&y)
                .zip(&z)
                .map(|((a, b), c)| vec![*a, *b, *c])
                .collect::<Vec<_>>(),
        );
        let oracle = hx + hy + hz - hxy - hxz - hyz + hxyz;
        assert!((co_information(&[&x, &y, &z], &GRID).unwrap() - oracle).abs() < 1e-12);
        assert!(matches!(co_information(&[&x, &y], &GRID), Err(Error::TooFewSignals(2))));
        assert!(matches!(
            co_information(&[&x, &y, &z[..5]], &GRID),
            Err(Error::LengthMismatch(..))
        ));
        // two-signal subset formula equals MI
        let two = subset_information(&[&x, &y], &GRID).unwrap();
        assert!((two - mutual_information(&x, &y, &GRID).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn trend_examples() {
        let series = |v: Vec<f64>| TimeSeries {
            start_frame: 100,
            values: v.into_iter().map(Some).collect(),
        };
        let ramp = series((0..21).map(|i| -(i as f64)).collect());
        assert_eq!(trend_sign(&ramp, 120, 20).unwrap(), Trend::Negative);
        let flat = series(vec![1.0; 21]);
        assert_eq!(trend_sign(&flat, 120, 20).unwrap(), Trend::NonNegative);
        // 11 decreasing, 9 increasing steps
        let mut v = vec![10.0];
        for i in 0..20 {
            let last = *v.last().unwrap();
            v.push(if i < 11 { last - 1.0 } else { last + 0.5 });
        }
        assert_eq!(trend_sign(&series(v.clone()), 120, 20).unwrap(), Trend::Negative);
        // exactly half decreasing is a tie -> non-negative
        let mut tie = vec![10.0];
        for i in 0..20 {
            let last = *tie.last().unwrap();
            tie.push(if i % 2 == 0 { last - 1.0 } else { last + 1.0 });
        }
        assert_eq!(trend_sign(&series(tie), 120, 20).unwrap(), Trend::NonNegative);
        assert!(matches!(
            trend_sign(&series(v), 119 - 1, 20),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn window_mean_and_sliding_entropy() {
        let d: Vec<Option<f64>> = (0..10).map(|k| Some(k as f64)).collect();
        let m = window_mean(&d, 4);
        assert_eq!(m.start_frame, 2);
        assert_eq!(m.values, (2..8).map(|k| Some(k as f64)).collect::<Vec<_>>());
        let h = m.sliding_entropy(4, &QuantizationGrid { q: 1.0, origin: 0.0 });
        assert_eq!(h.start_frame, 4);
        assert!(h.values.iter().all(|v| (v.unwrap() - 5f64.log2()).abs() < 1e-12));
    }
}

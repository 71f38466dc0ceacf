use crate::infotheory::{entropy_of_keys, mutual_information_of_bins, window_mean, QuantizationGrid, TimeSeries};
use crate::signal_io::{window_bounds, PipelineConfig, Recording};

/// Windowed statistics for every element and element pair, computed once per
/// recording so the frame-sequential detector only does lookups.
#[derive(Clone, Debug)]
pub struct WindowedSignals {
    elements: usize,
    /// Per element, per frame: bin index on each configured axis.
    bins: Vec<Vec<Option<Vec<i64>>>>,
    /// Per element, per frame: all window samples share one bin on every axis.
    stationary: Vec<Vec<bool>>,
    /// Per unordered pair (upper-triangular index).
    avg_distance: Vec<TimeSeries>,
    mi: Vec<TimeSeries>,
    distance_entropy: Vec<TimeSeries>,
}

impl WindowedSignals {
    pub fn new(recording: &Recording, config: &PipelineConfig) -> Self {
        let n = recording.duration();
        let w = config.window_samples;
        let grid: QuantizationGrid = config.grid();
        let axes: Vec<usize> = config.axes.indices().collect();
        let m = recording.elements().len();

        let bins: Vec<Vec<Option<Vec<i64>>>> = (0..m)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        recording
                            .pose(i, k)
                            .map(|p| axes.iter().map(|&a| grid.bin(p.position[a])).collect())
                    })
                    .collect()
            })
            .collect();

        let stationary = bins
            .iter()
            .map(|b| {
                (0..n)
                    .map(|t| match window_bounds(t, w, n) {
                        Some((lo, hi)) => {
                            let first = &b[lo];
                            first.is_some() && b[lo..=hi].iter().all(|x| x == first)
                        }
                        None => false,
                    })
                    .collect()
            })
            .collect();

        let mut avg_distance = Vec::new();
        let mut mi = Vec::new();
        let mut distance_entropy = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let d: Vec<Option<f64>> = (0..n)
                    .map(|k| {
                        let a = recording.pose(i, k)?;
                        let b = recording.pose(j, k)?;
                        Some(config.axes.distance(&a.position, &b.position))
                    })
                    .collect();
                let dbar = window_mean(&d, w);
                distance_entropy.push(dbar.sliding_entropy(w, &grid));
                avg_distance.push(dbar);
                mi.push(pair_mi(&bins[i], &bins[j], axes.len(), w));
            }
        }

        WindowedSignals {
            elements: m,
            bins,
            stationary,
            avg_distance,
            mi,
            distance_entropy,
        }
    }

    fn pair(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        debug_assert!(i != j && j < self.elements);
        i * self.elements - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn avg_distance(&self, a: usize, b: usize, k: usize) -> Option<f64> {
        if a == b {
            return self.avg_distance.first().and_then(|s| s.get(k)).map(|_| 0.0);
        }
        self.avg_distance[self.pair(a, b)].get(k)
    }

    pub fn mi(&self, a: usize, b: usize, k: usize) -> Option<f64> {
        self.mi[self.pair(a, b)].get(k)
    }

    pub fn mi_series(&self, a: usize, b: usize) -> &TimeSeries {
        &self.mi[self.pair(a, b)]
    }

    pub fn avg_distance_series(&self, a: usize, b: usize) -> &TimeSeries {
        &self.avg_distance[self.pair(a, b)]
    }

    /// Sliding entropy of the average-distance series.
    pub fn distance_entropy_series(&self, a: usize, b: usize) -> &TimeSeries {
        &self.distance_entropy[self.pair(a, b)]
    }

    pub fn is_stationary(&self, element: usize, k: usize) -> bool {
        self.stationary[element].get(k).copied().unwrap_or(false)
    }

    /// Window of per-axis bins for an element (None if absent anywhere in it).
    pub fn window_bins(&self, element: usize, lo: usize, hi: usize, axis_slot: usize) -> Option<Vec<i64>> {
        self.bins[element][lo..=hi]
            .iter()
            .map(|b| b.as_ref().map(|v| v[axis_slot]))
            .collect()
    }
}

fn pair_mi(a: &[Option<Vec<i64>>], b: &[Option<Vec<i64>>], naxes: usize, w: usize) -> TimeSeries {
    let n = a.len();
    let half = w / 2;
    if n <= 2 * half {
        return TimeSeries::empty();
    }
    let values = (half..n - half)
        .map(|t| {
            let (lo, hi) = (t - half, t + half);
            let mut total = 0.0;
            for axis in 0..naxes {
                let xa: Option<Vec<i64>> = a[lo..=hi].iter().map(|v| v.as_ref().map(|v| v[axis])).collect();
                let xb: Option<Vec<i64>> = b[lo..=hi].iter().map(|v| v.as_ref().map(|v| v[axis])).collect();
                total += mutual_information_of_bins(&xa?, &xb?);
            }
            Some(total)
        })
        .collect();
    TimeSeries {
        start_frame: half,
        values,
    }
}

/// Entropy of a window of bins (sorted in place).
pub(crate) fn bins_entropy(bins: &mut [i64]) -> f64 {
    entropy_of_keys(bins)
}

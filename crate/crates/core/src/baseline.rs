//! Finite-difference velocity detector used as a comparison baseline for
//! manipulation detection, plus interval-overlap scoring.
//!
//! A frame counts as manipulation when the hand and the object both move
//! (speed above `moving_min`) and their relative speed stays below
//! `relative_max`. Both thresholds are picked by a ROC sweep.

use serde::{Deserialize, Serialize};

use crate::scene_graph::{GraphSequence, HoType};
use crate::signal_io::{ElementId, Recording};
use crate::Result;

/// Central-difference speeds at one frame, m/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Speeds {
    pub hand: f64,
    pub object: f64,
    pub relative: f64,
}

/// Per-frame speeds of the hand, the object and their difference on the
/// configured axes; `None` at the ends or where either is absent.
pub fn velocity_features(
    recording: &Recording,
    object: &ElementId,
    axes: &crate::signal_io::AxisSet,
) -> Result<Vec<Option<Speeds>>> {
    let h = recording.hand_index();
    let o = recording.index_of(object)?;
    let n = recording.duration();
    let fs = recording.sample_rate();
    let vel = |i: usize, k: usize| -> Option<[f64; 3]> {
        let a = recording.pose(i, k - 1)?.position;
        let b = recording.pose(i, k + 1)?.position;
        let mut v = [0.0; 3];
        for ax in axes.indices() {
            v[ax] = (b[ax] - a[ax]) * fs / 2.0;
        }
        Some(v)
    };
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    Ok((0..n)
        .map(|k| {
            if k == 0 || k + 1 >= n {
                return None;
            }
            let vh = vel(h, k)?;
            let vo = vel(o, k)?;
            Some(Speeds {
                hand: norm(vh),
                object: norm(vo),
                relative: norm([vh[0] - vo[0], vh[1] - vo[1], vh[2] - vo[2]]),
            })
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityThresholds {
    pub moving_min: f64,
    pub relative_max: f64,
}

pub fn velocity_detect(features: &[Option<Speeds>], t: &VelocityThresholds) -> Vec<bool> {
    features
        .iter()
        .map(|f| f.is_some_and(|s| s.hand > t.moving_min && s.object > t.moving_min && s.relative < t.relative_max))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub thresholds: VelocityThresholds,
    pub tpr: f64,
    pub fpr: f64,
}

impl RocPoint {
    pub fn youden(&self) -> f64 {
        self.tpr - self.fpr
    }
}

/// Sweeps both thresholds over `steps` quantiles of the pooled speeds and
/// returns the ROC point with the largest Youden index (TPR − FPR).
pub fn roc_sweep(samples: &[(Vec<Option<Speeds>>, Vec<bool>)], steps: usize) -> RocPoint {
    let mut moving: Vec<f64> = Vec::new();
    let mut relative: Vec<f64> = Vec::new();
    for (f, _) in samples {
        for s in f.iter().flatten() {
            moving.push(s.hand.min(s.object));
            relative.push(s.relative);
        }
    }
    let quantiles = |mut v: Vec<f64>| -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return vec![0.0];
        }
        (0..=steps).map(|i| v[(v.len() - 1) * i / steps.max(1)]).collect()
    };
    let (mq, rq) = (quantiles(moving), quantiles(relative));
    let mut best: Option<RocPoint> = None;
    for &moving_min in &mq {
        for &relative_max in &rq {
            let t = VelocityThresholds {
                moving_min,
                relative_max,
            };
            let (mut tp, mut fp, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
            for (f, truth) in samples {
                for (d, &y) in velocity_detect(f, &t).into_iter().zip(truth) {
                    match (d, y) {
                        (true, true) => tp += 1,
                        (true, false) => fp += 1,
                        _ => {}
                    }
                    if y {
                        pos += 1;
                    } else {
                        neg += 1;
                    }
                }
            }
            let p = RocPoint {
                thresholds: t,
                tpr: tp as f64 / pos.max(1) as f64,
                fpr: fp as f64 / neg.max(1) as f64,
            };
            if best.is_none_or(|b| p.youden() > b.youden()) {
                best = Some(p);
            }
        }
    }
    best.expect("at least one threshold pair")
}

/// Frames where the graph holds a manipulation HO whose target contains `object`.
pub fn mi_detect(graphs: &GraphSequence, object: &ElementId, duration: usize) -> Vec<bool> {
    let mut out = vec![false; duration];
    for (k, g) in graphs.iter() {
        if let Some(g) = g {
            if g.ho_type() == HoType::Manipulation && g.ho_target().contains(object) {
                out[k] = true;
            }
        }
    }
    out
}

/// Boolean mask of an inclusive frame interval.
pub fn interval_mask(start: usize, end: usize, duration: usize) -> Vec<bool> {
    (0..duration).map(|k| (start..=end).contains(&k)).collect()
}

/// Intersection over union of two frame sets; 1 when both are empty.
pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

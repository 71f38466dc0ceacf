//! Pose recordings: ingestion, gap filling, windowing and pipeline configuration.
//!
//! A [`Recording`] holds one dense track per scene element (one hand, any
//! number of objects). Every track is defined on `[0, duration)`; frames
//! where the element was never observed, or where a detection gap was longer
//! than `max_gap_frames`, are `None`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unique label of a scene element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        ElementId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Hand,
    Object,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
}

/// Position in meters plus a unit quaternion stored scalar-last `[qx, qy, qz, qw]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose6D {
    #[serde(rename = "p")]
    pub position: [f64; 3],
    #[serde(rename = "q")]
    pub orientation: [f64; 4],
}

impl Pose6D {
    pub const IDENTITY_ORIENTATION: [f64; 4] = [0.0, 0.0, 0.0, 1.0];

    pub fn from_position(position: [f64; 3]) -> Self {
        Pose6D {
            position,
            orientation: Self::IDENTITY_ORIENTATION,
        }
    }

    /// Pose rotated by `yaw` radians about the vertical axis.
    pub fn from_position_yaw(position: [f64; 3], yaw: f64) -> Self {
        let (s, c) = (yaw / 2.0).sin_cos();
        Pose6D {
            position,
            orientation: [0.0, 0.0, s, c],
        }
    }

    pub fn quaternion_norm(&self) -> f64 {
        self.orientation.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Checks the quaternion norm; normalizes small drift (< 1e-3), rejects the rest.
    pub fn normalized(mut self) -> std::result::Result<Self, String> {
        let n = self.quaternion_norm();
        if !n.is_finite() || self.position.iter().any(|v| !v.is_finite()) {
            return Err("non-finite pose".into());
        }
        if (n - 1.0).abs() <= 1e-6 {
            return Ok(self);
        }
        if (n - 1.0).abs() > 1e-3 {
            return Err(format!("quaternion norm {n} is not 1"));
        }
        for v in &mut self.orientation {
            *v /= n;
        }
        Ok(self)
    }
}

/// Spatial axis selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Nonempty subset of `{x, y, z}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Axis>", into = "Vec<Axis>")]
pub struct AxisSet(Vec<Axis>);

impl AxisSet {
    pub fn new(axes: impl IntoIterator<Item = Axis>) -> Result<Self> {
        let mut v: Vec<Axis> = axes.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            return Err(Error::Config("axes must be nonempty".into()));
        }
        Ok(AxisSet(v))
    }

    pub fn xy() -> Self {
        AxisSet(vec![Axis::X, Axis::Y])
    }

    pub fn xyz() -> Self {
        AxisSet(vec![Axis::X, Axis::Y, Axis::Z])
    }

    pub fn iter(&self) -> impl Iterator<Item = Axis> + '_ {
        self.0.iter().copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|a| a.index())
    }

    /// Euclidean distance restricted to these axes.
    pub fn distance(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        self.indices()
            .map(|i| (a[i] - b[i]) * (a[i] - b[i]))
            .sum::<f64>()
            .sqrt()
    }
}

impl TryFrom<Vec<Axis>> for AxisSet {
    type Error = Error;
    fn try_from(v: Vec<Axis>) -> Result<Self> {
        AxisSet::new(v)
    }
}

impl From<AxisSet> for Vec<Axis> {
    fn from(a: AxisSet) -> Self {
        a.0
    }
}

/// Fully resolved pipeline parameters. Defaults reproduce the reference
/// setup: 30 Hz, 40-sample window, 1 cm bins, ε_MI = 0.05 bit,
/// 0.15 m hand-object and 0.2 m object-object distance thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sample_rate: f64,
    /// Window length `w` in frames. Centered windows hold `w + 1` samples.
    pub window_samples: usize,
    /// Quantization bin width `q`, meters.
    pub quantization: f64,
    pub quantization_origin: f64,
    pub mi_epsilon: f64,
    pub d_ho_threshold: f64,
    pub d_oo_threshold: f64,
    pub trend_horizon: usize,
    pub axes: AxisSet,
    pub angle_threshold_deg: f64,
    pub max_gap_frames: usize,
    /// Largest per-step MI increase (bits) still counted as monotone decreasing.
    pub complexity_tolerance: f64,
    /// Debug switch: disable temporary-IU filtering.
    pub filter_temporary: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sample_rate: 30.0,
            window_samples: 40,
            quantization: 0.01,
            quantization_origin: 0.0,
            mi_epsilon: 0.05,
            d_ho_threshold: 0.15,
            d_oo_threshold: 0.2,
            trend_horizon: 20,
            axes: AxisSet::xy(),
            angle_threshold_deg: 45.0,
            max_gap_frames: 5,
            complexity_tolerance: 0.01,
            filter_temporary: true,
        }
    }
}

/// Partial configuration as read from a TOML file or CLI flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub sample_rate: Option<f64>,
    pub window_samples: Option<usize>,
    pub window_seconds: Option<f64>,
    pub quantization: Option<f64>,
    pub quantization_origin: Option<f64>,
    pub mi_epsilon: Option<f64>,
    pub d_ho_threshold: Option<f64>,
    pub d_oo_threshold: Option<f64>,
    pub trend_horizon: Option<usize>,
    pub axes: Option<AxisSet>,
    pub angle_threshold_deg: Option<f64>,
    pub max_gap_frames: Option<usize>,
    pub complexity_tolerance: Option<f64>,
    pub filter_temporary: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Field-wise override: values set in `other` win.
    pub fn merged(self, other: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            sample_rate,
            window_samples,
            window_seconds,
            quantization,
            quantization_origin,
            mi_epsilon,
            d_ho_threshold,
            d_oo_threshold,
            trend_horizon,
            axes,
            angle_threshold_deg,
            max_gap_frames,
            complexity_tolerance,
            filter_temporary
        )
    }
}

impl PipelineConfig {
    /// Resolves a partial config on top of the defaults and validates it.
    pub fn resolve(file: &ConfigFile) -> Result<Self> {
        let d = PipelineConfig::default();
        let sample_rate = file.sample_rate.unwrap_or(d.sample_rate);
        let window_samples = match (file.window_samples, file.window_seconds) {
            (Some(n), _) => n,
            (None, Some(s)) => window_from_seconds(s, sample_rate),
            (None, None) => d.window_samples,
        };
        let cfg = PipelineConfig {
            sample_rate,
            window_samples,
            quantization: file.quantization.unwrap_or(d.quantization),
            quantization_origin: file.quantization_origin.unwrap_or(d.quantization_origin),
            mi_epsilon: file.mi_epsilon.unwrap_or(d.mi_epsilon),
            d_ho_threshold: file.d_ho_threshold.unwrap_or(d.d_ho_threshold),
            d_oo_threshold: file.d_oo_threshold.unwrap_or(d.d_oo_threshold),
            trend_horizon: file.trend_horizon.unwrap_or(window_samples / 2),
            axes: file.axes.clone().unwrap_or(d.axes),
            angle_threshold_deg: file.angle_threshold_deg.unwrap_or(d.angle_threshold_deg),
            max_gap_frames: file.max_gap_frames.unwrap_or(d.max_gap_frames),
            complexity_tolerance: file.complexity_tolerance.unwrap_or(d.complexity_tolerance),
            filter_temporary: file.filter_temporary.unwrap_or(d.filter_temporary),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.window_samples < 4 || self.window_samples % 2 != 0 {
            return bad("window_samples must be even and >= 4");
        }
        if !(self.sample_rate > 0.0) {
            return bad("sample_rate must be positive");
        }
        if !(self.quantization > 0.0) {
            return bad("quantization must be positive");
        }
        if !(self.mi_epsilon > 0.0) {
            return bad("mi_epsilon must be positive");
        }
        if !(self.d_ho_threshold > 0.0 && self.d_oo_threshold > 0.0) {
            return bad("distance thresholds must be positive");
        }
        if !(self.angle_threshold_deg > 0.0) {
            return bad("angle_threshold_deg must be positive");
        }
        if self.trend_horizon == 0 {
            return bad("trend_horizon must be positive");
        }
        if !(self.complexity_tolerance >= 0.0) {
            return bad("complexity_tolerance must be nonnegative");
        }
        Ok(())
    }

    pub fn half_window(&self) -> usize {
        self.window_samples / 2
    }

    pub fn grid(&self) -> crate::infotheory::QuantizationGrid {
        crate::infotheory::QuantizationGrid {
            q: self.quantization,
            origin: self.quantization_origin,
        }
    }
}

/// Seconds to an even sample count (`1.3 s @ 30 Hz -> 40`).
pub fn window_from_seconds(seconds: f64, sample_rate: f64) -> usize {
    let n = (seconds * sample_rate).round() as usize;
    n + n % 2
}

/// One observed pose row.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub frame: usize,
    pub id: ElementId,
    pub kind: ElementKind,
    pub pose: Pose6D,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recording {
    sample_rate: f64,
    elements: Vec<Element>,
    tracks: Vec<Vec<Option<Pose6D>>>,
    duration: usize,
}

impl Recording {
    /// Builds a recording from dense tracks (one per element, equal lengths).
    pub fn from_tracks(sample_rate: f64, elements: Vec<Element>, tracks: Vec<Vec<Option<Pose6D>>>) -> Result<Self> {
        let duration = tracks.first().map_or(0, Vec::len);
        if duration == 0 {
            return Err(Error::EmptyRecording);
        }
        if tracks.len() != elements.len() || tracks.iter().any(|t| t.len() != duration) {
            return Err(Error::Config("tracks must match elements and share one length".into()));
        }
        let mut ids: Vec<&ElementId> = elements.iter().map(|e| &e.id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate element id `{}`", w[0])));
        }
        let hands = elements.iter().filter(|e| e.kind == ElementKind::Hand).count();
        if hands != 1 {
            return Err(Error::HandCount(hands));
        }
        Ok(Recording {
            sample_rate,
            elements,
            tracks,
            duration,
        })
    }

    /// Builds a recording from sparse samples, filling gaps of at most
    /// `max_gap_frames` with the last observed pose.
    pub fn from_samples(sample_rate: f64, samples: Vec<Sample>, max_gap_frames: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyRecording);
        }
        let mut by_id: BTreeMap<ElementId, (ElementKind, BTreeMap<usize, Pose6D>)> = BTreeMap::new();
        let mut order: Vec<ElementId> = Vec::new();
        let mut duration = 0;
        for s in samples {
            duration = duration.max(s.frame + 1);
            let entry = by_id.entry(s.id.clone()).or_insert_with(|| {
                order.push(s.id.clone());
                (s.kind, BTreeMap::new())
            });
            if entry.0 != s.kind {
                return Err(Error::Config(format!("element `{}` changes kind", s.id)));
            }
            if entry.1.insert(s.frame, s.pose).is_some() {
                return Err(Error::DuplicateSample {
                    id: s.id.0,
                    frame: s.frame,
                });
            }
        }
        let mut elements = Vec::with_capacity(order.len());
        let mut tracks = Vec::with_capacity(order.len());
        for id in order {
            let (kind, obs) = by_id.remove(&id).expect("present");
            tracks.push(fill_gaps(&obs, duration, max_gap_frames));
            elements.push(Element { id, kind });
        }
        Recording::from_tracks(sample_rate, elements, tracks)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn duration(&self) -> usize {
        self.duration
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn hand_index(&self) -> usize {
        self.elements
            .iter()
            .position(|e| e.kind == ElementKind::Hand)
            .expect("validated at construction")
    }

    pub fn hand(&self) -> &ElementId {
        &self.elements[self.hand_index()].id
    }

    pub fn object_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == ElementKind::Object)
            .map(|(i, _)| i)
    }

    pub fn index_of(&self, id: &ElementId) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| &e.id == id)
            .ok_or_else(|| Error::UnknownElement(id.0.clone()))
    }

    pub fn id(&self, index: usize) -> &ElementId {
        &self.elements[index].id
    }

    pub fn pose(&self, index: usize, frame: usize) -> Option<&Pose6D> {
        self.tracks[index].get(frame).and_then(Option::as_ref)
    }

    pub fn track(&self, index: usize) -> &[Option<Pose6D>] {
        &self.tracks[index]
    }

    /// Present samples in frame-major order, elements in recording order.
    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.duration).flat_map(move |k| {
            self.elements.iter().enumerate().filter_map(move |(i, e)| {
                self.tracks[i][k].map(|pose| Sample {
                    frame: k,
                    id: e.id.clone(),
                    kind: e.kind,
                    pose,
                })
            })
        })
    }

    /// Copy without the given element.
    pub fn without(&self, id: &ElementId) -> Result<Recording> {
        let i = self.index_of(id)?;
        let mut r = self.clone();
        r.elements.remove(i);
        r.tracks.remove(i);
        Recording::from_tracks(r.sample_rate, r.elements, r.tracks)
    }

    /// Applies `f` to every present pose.
    pub fn map_poses(&self, mut f: impl FnMut(&Pose6D) -> Pose6D) -> Recording {
        let mut r = self.clone();
        for t in &mut r.tracks {
            for p in t.iter_mut().flatten() {
                *p = f(p);
            }
        }
        r
    }
}

fn fill_gaps(obs: &BTreeMap<usize, Pose6D>, duration: usize, max_gap: usize) -> Vec<Option<Pose6D>> {
    let mut track = vec![None; duration];
    let mut prev: Option<(usize, Pose6D)> = None;
    for (&k, &pose) in obs {
        if let Some((pk, pp)) = prev {
            let gap = k - pk - 1;
            if gap > 0 && gap <= max_gap {
                for slot in &mut track[pk + 1..k] {
                    *slot = Some(pp);
                }
            }
        }
        track[k] = Some(pose);
        prev = Some((k, pose));
    }
    if let Some((pk, pp)) = prev {
        let tail = duration - pk - 1;
        if tail > 0 && tail <= max_gap {
            for slot in &mut track[pk + 1..] {
                *slot = Some(pp);
            }
        }
    }
    track
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordingFormat {
    Jsonl,
    Csv,
}

impl RecordingFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => RecordingFormat::Csv,
            _ => RecordingFormat::Jsonl,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    id: String,
    kind: ElementKind,
    p: [f64; 3],
    q: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    frame: usize,
    id: String,
    kind: ElementKind,
    px: f64,
    py: f64,
    pz: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    qw: f64,
}

/// Loads a JSONL or CSV recording and gap-fills it per `config`.
pub fn load_recording(path: &Path, format: RecordingFormat, config: &PipelineConfig) -> Result<Recording> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    match format {
        RecordingFormat::Jsonl => read_jsonl(reader, config),
        RecordingFormat::Csv => read_csv(reader, config),
    }
}

pub fn read_jsonl(reader: impl BufRead, config: &PipelineConfig) -> Result<Recording> {
    let mut samples = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let frame = match (row.k, row.t) {
            (Some(k), _) => k,
            (None, Some(t)) if t >= 0.0 => (t * config.sample_rate).round() as usize,
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "row needs a frame `k` or a nonnegative timestamp `t`".into(),
                })
            }
        };
        let pose = Pose6D {
            position: row.p,
            orientation: row.q,
        }
        .normalized()
        .map_err(|message| Error::Parse { line: line_no, message })?;
        samples.push(Sample {
            frame,
            id: ElementId(row.id),
            kind: row.kind,
            pose,
        });
    }
    Recording::from_samples(config.sample_rate, samples, config.max_gap_frames)
}

pub fn read_csv(reader: impl Read, config: &PipelineConfig) -> Result<Recording> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut samples = Vec::new();
    for rec in rdr.deserialize::<CsvRow>() {
        let row = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let pose = Pose6D {
            position: [row.px, row.py, row.pz],
            orientation: [row.qx, row.qy, row.qz, row.qw],
        }
        .normalized()
        .map_err(|message| Error::Parse {
            line: samples.len() + 2,
            message,
        })?;
        samples.push(Sample {
            frame: row.frame,
            id: ElementId(row.id),
            kind: row.kind,
            pose,
        });
    }
    Recording::from_samples(config.sample_rate, samples, config.max_gap_frames)
}

pub fn write_jsonl(recording: &Recording, mut out: impl Write) -> std::io::Result<()> {
    for s in recording.samples() {
        let row = JsonlRow {
            k: Some(s.frame),
            t: None,
            id: s.id.0,
            kind: s.kind,
            p: s.pose.position,
            q: s.pose.orientation,
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv(recording: &Recording, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in recording.samples() {
        let [px, py, pz] = s.pose.position;
        let [qx, qy, qz, qw] = s.pose.orientation;
        w.serialize(CsvRow {
            frame: s.frame,
            id: s.id.0,
            kind: s.kind,
            px,
            py,
            pz,
            qx,
            qy,
            qz,
            qw,
        })?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Inclusive bounds `[t - w/2, t + w/2]` if the window fits the recording.
pub fn window_bounds(t: usize, w: usize, duration: usize) -> Option<(usize, usize)> {
    let half = w / 2;
    (t >= half && t + half < duration).then(|| (t - half, t + half))
}

/// First and last frame with a full centered window, if any.
pub fn valid_frames(w: usize, duration: usize) -> Option<(usize, usize)> {
    let half = w / 2;
    (duration > 2 * half).then(|| (half, duration - 1 - half))
}

/// Mean over the centered window of the per-frame distance between `a` and
/// `b`, restricted to `axes`.
pub fn average_distance(
    recording: &Recording,
    a: &ElementId,
    b: &ElementId,
    t: usize,
    w: usize,
    axes: &AxisSet,
) -> Result<f64> {
    let (ia, ib) = (recording.index_of(a)?, recording.index_of(b)?);
    let (lo, hi) = window_bounds(t, w, recording.duration()).ok_or(Error::WindowOutOfRange {
        frame: t,
        window: w,
        duration: recording.duration(),
    })?;
    let mut sum = 0.0;
    for k in lo..=hi {
        let pa = recording.pose(ia, k).ok_or_else(|| Error::ElementAbsent {
            id: a.0.clone(),
            frame: t,
        })?;
        let pb = recording.pose(ib, k).ok_or_else(|| Error::ElementAbsent {
            id: b.0.clone(),
            frame: t,
        })?;
        sum += axes.distance(&pa.position, &pb.position);
    }
    Ok(sum / (hi - lo + 1) as f64)
}

//! Interaction Units and Activities.
//!
//! A new unit starts whenever the graph topology or any node identity
//! changes; interaction-type changes (manipulation to contact-only,
//! temporary to significant) stay inside one unit.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene_graph::{GraphSequence, OoType, SceneGraph, Topology};
use crate::signal_io::PipelineConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IuKind {
    Idle,
    Ho,
    Hoo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionUnit {
    pub index: usize,
    /// First frame, inclusive.
    pub start: usize,
    /// Last frame, inclusive.
    pub end: usize,
    pub kind: IuKind,
    /// Member graphs in frame order (empty for idle units). Not serialized.
    #[serde(skip)]
    pub graphs: Vec<SceneGraph>,
    /// Representative graph, carrying the complexity flag for HOO units.
    pub repr: Option<SceneGraph>,
    /// Whether the unit's OO reached `static_significant` at any frame.
    #[serde(default)]
    pub significant: bool,
}

type Signature = Option<(Topology, Vec<String>)>;

fn signature(g: Option<&SceneGraph>) -> Signature {
    g.map(|g| {
        let (t, ids) = g.signature();
        (t, ids.into_iter().map(str::to_owned).collect())
    })
}

impl InteractionUnit {
    fn idle(start: usize, end: usize) -> Self {
        InteractionUnit {
            index: 0,
            start,
            end,
            kind: IuKind::Idle,
            graphs: Vec::new(),
            repr: None,
            significant: false,
        }
    }

    /// Builds a non-idle unit from contiguous graphs sharing one signature,
    /// picking the representative graph and its complexity flag.
    fn from_graphs(graphs: Vec<SceneGraph>, config: &PipelineConfig) -> Result<Self> {
        let first = graphs.first().ok_or_else(|| Error::Segmentation("empty unit".into()))?;
        let kind = match first.topology() {
            Topology::A | Topology::B => IuKind::Ho,
            Topology::C | Topology::D => IuKind::Hoo,
        };
        let mut iu = InteractionUnit {
            index: 0,
            start: first.frame,
            end: graphs.last().map_or(first.frame, |g| g.frame),
            kind,
            significant: graphs.iter().any(|g| g.oo_type() == Some(OoType::StaticSignificant)),
            graphs,
            repr: None,
        };
        let mut repr = representative_graph(&iu)?.clone();
        if kind == IuKind::Hoo {
            repr.set_interaction_complexity(interaction_complexity(&iu, config.complexity_tolerance)?);
        }
        iu.repr = Some(repr);
        Ok(iu)
    }

    fn signature(&self) -> Signature {
        signature(self.graphs.first())
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// HO target node id of the representative graph.
    pub fn ho_target(&self) -> Option<&str> {
        self.repr.as_ref().map(|g| g.ho_target().id.as_str())
    }
}

/// Splits the graph sequence into units; consecutive graph-less frames form
/// one idle unit.
pub fn segment_ius(graphs: &GraphSequence, config: &PipelineConfig) -> Result<Vec<InteractionUnit>> {
    let mut out = Vec::new();
    let mut run: Vec<SceneGraph> = Vec::new();
    let mut run_start = graphs.start_frame;
    let mut current: Signature = None;
    let mut started = false;
    for (k, g) in graphs.iter() {
        let sig = signature(g);
        if started && sig != current {
            out.push(close_run(std::mem::take(&mut run), run_start, k - 1, config)?);
            run_start = k;
        }
        started = true;
        current = sig;
        if let Some(g) = g {
            run.push(g.clone());
        }
    }
    if started {
        let end = graphs.start_frame + graphs.len() - 1;
        out.push(close_run(run, run_start, end, config)?);
    }
    reindex(&mut out);
    Ok(out)
}

fn close_run(graphs: Vec<SceneGraph>, start: usize, end: usize, config: &PipelineConfig) -> Result<InteractionUnit> {
    if graphs.is_empty() {
        Ok(InteractionUnit::idle(start, end))
    } else {
        InteractionUnit::from_graphs(graphs, config)
    }
}

fn reindex(ius: &mut [InteractionUnit]) {
    for (i, iu) in ius.iter_mut().enumerate() {
        iu.index = i;
    }
}

/// Drops the OO of every HOO unit that never became significant and merges
/// the result into neighbouring units with the same signature. A temporary
/// unit without such a neighbour stays in place as an HO unit.
pub fn filter_temporary(ius: Vec<InteractionUnit>, config: &PipelineConfig) -> Result<Vec<InteractionUnit>> {
    let mut out: Vec<InteractionUnit> = Vec::with_capacity(ius.len());
    for mut iu in ius {
        if iu.kind == IuKind::Hoo && !iu.significant {
            let graphs = iu.graphs.iter().map(SceneGraph::without_oo).collect();
            iu = InteractionUnit::from_graphs(graphs, config)?;
        }
        match out.last_mut() {
            Some(prev) if prev.kind != IuKind::Idle && prev.signature() == iu.signature() => {
                let mut graphs = std::mem::take(&mut prev.graphs);
                graphs.extend(iu.graphs);
                *prev = InteractionUnit::from_graphs(graphs, config)?;
            }
            Some(prev) if prev.kind == IuKind::Idle && iu.kind == IuKind::Idle => prev.end = iu.end,
            _ => out.push(iu),
        }
    }
    reindex(&mut out);
    Ok(out)
}

/// The member graph with the smallest HO mutual information; earliest wins ties.
pub fn representative_graph(iu: &InteractionUnit) -> Result<&SceneGraph> {
    let mut best: Option<&SceneGraph> = None;
    for g in &iu.graphs {
        if best.is_none_or(|b| g.ho_mi() < b.ho_mi()) {
            best = Some(g);
        }
    }
    best.ok_or_else(|| Error::Segmentation(format!("unit {} is idle and has no representative graph", iu.index)))
}

/// True unless the HO MI never rises by more than `tolerance` bits between
/// consecutive frames of the unit.
pub fn interaction_complexity(iu: &InteractionUnit, tolerance: f64) -> Result<bool> {
    if iu.kind != IuKind::Hoo {
        return Err(Error::Segmentation(format!("unit {} is not an HOO unit", iu.index)));
    }
    if iu.graphs.len() < 2 {
        return Ok(false);
    }
    Ok(iu.graphs.windows(2).any(|p| p[1].ho_mi() - p[0].ho_mi() > tolerance))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    /// Indices into the unit list, in order.
    pub ius: Vec<usize>,
    pub ho_target: String,
}

/// Groups consecutive non-idle units that share the HO target node.
pub fn group_activities(ius: &[InteractionUnit]) -> Vec<Activity> {
    let mut out: Vec<Activity> = Vec::new();
    let mut open = false;
    for iu in ius {
        let Some(target) = iu.ho_target() else {
            open = false;
            continue;
        };
        match out.last_mut() {
            Some(a) if open && a.ho_target == target => {
                a.end = iu.end;
                a.ius.push(iu.index);
            }
            _ => {
                out.push(Activity {
                    index: out.len(),
                    start: iu.start,
                    end: iu.end,
                    ius: vec![iu.index],
                    ho_target: target.to_owned(),
                });
                open = true;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub ius: Vec<InteractionUnit>,
    pub activities: Vec<Activity>,
}

impl Segmentation {
    pub fn activity_ius<'a>(&'a self, activity: &'a Activity) -> impl Iterator<Item = &'a InteractionUnit> + 'a {
        activity.ius.iter().map(|&i| &self.ius[i])
    }

    /// Unit start frames after the first, i.e. the segmentation boundaries.
    pub fn boundaries(&self) -> Vec<usize> {
        self.ius.iter().skip(1).map(|iu| iu.start).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Segmentation = serde_json::from_str(text)?;
        for iu in &s.ius {
            if let Some(g) = &iu.repr {
                g.validate()?;
            }
            if (iu.kind == IuKind::Idle) != iu.repr.is_none() {
                return Err(Error::Schema(format!(
                    "unit {}: repr graph must exist iff non-idle",
                    iu.index
                )));
            }
        }
        for a in &s.activities {
            if a.ius.iter().any(|&i| i >= s.ius.len()) {
                return Err(Error::Schema(format!("activity {} refers to a missing unit", a.index)));
            }
        }
        Ok(s)
    }

    /// Per-frame timeline: unit, kind, activity and node ids.
    pub fn write_timeline_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["frame", "iu", "kind", "activity", "ho_target", "oo_target"])?;
        for iu in &self.ius {
            let activity = self
                .activities
                .iter()
                .find(|a| a.ius.contains(&iu.index))
                .map(|a| a.index.to_string())
                .unwrap_or_default();
            let kind = match iu.kind {
                IuKind::Idle => "idle",
                IuKind::Ho => "ho",
                IuKind::Hoo => "hoo",
            };
            let ho = iu.ho_target().unwrap_or("");
            let oo = iu
                .repr
                .as_ref()
                .and_then(|g| g.oo_target())
                .map_or("", |n| n.id.as_str());
            for k in iu.start..=iu.end {
                w.write_record([&k.to_string(), &iu.index.to_string(), kind, &activity, ho, oo])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Segmentation, optional temporary filtering and activity grouping.
pub fn segment(graphs: &GraphSequence, config: &PipelineConfig) -> Result<Segmentation> {
    let mut ius = segment_ius(graphs, config)?;
    if config.filter_temporary {
        ius = filter_temporary(ius, config)?;
    }
    let activities = group_activities(&ius);
    Ok(Segmentation { ius, activities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_graph::test_support::graph;
    use crate::scene_graph::HoType::{ContactOnly, Manipulation};
    use crate::scene_graph::OoType::{StaticSignificant, StaticTemporary};

    fn seq(start: usize, graphs: Vec<Option<SceneGraph>>) -> GraphSequence {
        GraphSequence {
            start_frame: start,
            graphs,
        }
    }

    fn frames(start: usize, n: usize, f: impl Fn(usize) -> Option<SceneGraph>) -> Vec<Option<SceneGraph>> {
        (start..start + n).map(f).collect()
    }

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    #[test]
    fn all_idle_is_one_unit() {
        let ius = segment_ius(&seq(20, vec![None; 30]), &cfg()).unwrap();
        assert_eq!(ius.len(), 1);
        assert_eq!((ius[0].kind, ius[0].start, ius[0].end), (IuKind::Idle, 20, 49));
    }

    #[test]
    fn type_changes_do_not_split_but_topology_and_ids_do() {
        let mut g = frames(0, 5, |_| None);
        g.extend(frames(5, 5, |k| Some(graph(k, "cup", Manipulation, 0.5, None))));
        g.extend(frames(10, 5, |k| Some(graph(k, "cup", ContactOnly, 0.0, None))));
        g.extend(frames(15, 5, |k| {
            Some(graph(k, "cup", ContactOnly, 0.0, Some(("plate", StaticSignificant))))
        }));
        g.extend(frames(20, 5, |k| {
            Some(graph(k, "cup", ContactOnly, 0.0, Some(("tray", StaticSignificant))))
        }));
        let ius = segment_ius(&seq(0, g), &cfg()).unwrap();
        let kinds: Vec<_> = ius.iter().map(|i| (i.kind, i.start, i.end)).collect();
        assert_eq!(
            kinds,
            vec![
                (IuKind::Idle, 0, 4),
                (IuKind::Ho, 5, 14),
                (IuKind::Hoo, 15, 19),
                (IuKind::Hoo, 20, 24)
            ]
        );
    }

    #[test]
    fn representative_tie_takes_earliest() {
        let mis = [0.3, 0.1, 0.1, 0.2];
        let g = (0..4)
            .map(|k| Some(graph(k, "cup", Manipulation, mis[k], None)))
            .collect();
        let ius = segment_ius(&seq(0, g), &cfg()).unwrap();
        assert_eq!(representative_graph(&ius[0]).unwrap().frame, 1);
    }

    #[test]
    fn complexity_tolerance() {
        let unit = |mis: &[f64]| {
            let g = mis
                .iter()
                .enumerate()
                .map(|(k, &m)| Some(graph(k, "cup", Manipulation, m, Some(("plate", StaticSignificant)))))
                .collect();
            segment_ius(&seq(0, g), &cfg()).unwrap().remove(0)
        };
        assert!(!interaction_complexity(&unit(&[0.5, 0.4, 0.3, 0.2]), 0.01).unwrap());
        assert!(!interaction_complexity(&unit(&[0.5, 0.4, 0.401, 0.2]), 0.01).unwrap());
        assert!(interaction_complexity(&unit(&[0.5, 0.2, 0.6, 0.1]), 0.01).unwrap());
        let ho = segment_ius(&seq(0, vec![Some(graph(0, "cup", Manipulation, 0.1, None))]), &cfg()).unwrap();
        assert!(interaction_complexity(&ho[0], 0.01).is_err());
    }

    fn pass_by() -> GraphSequence {
        let mut g = frames(0, 4, |_| None);
        g.extend(frames(4, 4, |k| {
            Some(graph(k, "cup", Manipulation, 0.6, Some(("box", StaticTemporary))))
        }));
        g.extend(frames(8, 4, |k| Some(graph(k, "cup", Manipulation, 0.5, None))));
        g.extend(frames(12, 4, |k| {
            let t = if k < 14 { StaticTemporary } else { StaticSignificant };
            Some(graph(
                k,
                "cup",
                Manipulation,
                0.4 - 0.1 * (k - 12) as f64,
                Some(("plate", t)),
            ))
        }));
        g.extend(frames(16, 3, |_| None));
        seq(0, g)
    }

    #[test]
    fn temporary_unit_merges_and_filter_is_idempotent() {
        let ius = segment_ius(&pass_by(), &cfg()).unwrap();
        assert_eq!(ius.len(), 5);
        let once = filter_temporary(ius, &cfg()).unwrap();
        let kinds: Vec<_> = once.iter().map(|i| (i.kind, i.start, i.end)).collect();
        assert_eq!(
            kinds,
            vec![
                (IuKind::Idle, 0, 3),
                (IuKind::Ho, 4, 11),
                (IuKind::Hoo, 12, 15),
                (IuKind::Idle, 16, 18)
            ]
        );
        let twice = filter_temporary(once.clone(), &cfg()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn lone_temporary_unit_becomes_ho_in_place() {
        let mut g = frames(0, 3, |k| {
            Some(graph(k, "cup", Manipulation, 0.3, Some(("box", StaticTemporary))))
        });
        g.extend(frames(3, 2, |_| None));
        let ius = filter_temporary(segment_ius(&seq(0, g), &cfg()).unwrap(), &cfg()).unwrap();
        assert_eq!(ius[0].kind, IuKind::Ho);
        assert_eq!((ius[0].start, ius[0].end), (0, 2));
        assert!(ius[0].repr.as_ref().unwrap().oo_edge().is_none());
    }

    #[test]
    fn activities_split_on_idle_and_target_change() {
        let mut g = frames(0, 2, |_| None);
        g.extend(frames(2, 3, |k| Some(graph(k, "a", Manipulation, 0.3, None))));
        g.extend(frames(5, 3, |k| {
            Some(graph(k, "a", ContactOnly, 0.0, Some(("s", StaticSignificant))))
        }));
        g.extend(frames(8, 3, |k| Some(graph(k, "b", Manipulation, 0.3, None))));
        g.extend(frames(11, 2, |_| None));
        g.extend(frames(13, 3, |k| Some(graph(k, "b", Manipulation, 0.3, None))));
        let s = segment(&seq(0, g), &cfg()).unwrap();
        let acts: Vec<_> = s
            .activities
            .iter()
            .map(|a| (a.ho_target.as_str(), a.start, a.end, a.ius.len()))
            .collect();
        assert_eq!(acts, vec![("a", 2, 7, 2), ("b", 8, 10, 1), ("b", 13, 15, 1)]);
        let back = Segmentation::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.activities, s.activities);
        let mut csv = Vec::new();
        s.write_timeline_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 17);
    }
}

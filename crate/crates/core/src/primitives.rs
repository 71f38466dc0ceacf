//! Graph differencing between consecutive representative graphs and the
//! mapping of each difference to move / grasp / release primitives.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene_graph::{Edge, Node, Relation, SceneGraph};
use crate::segmentation::{Activity, Segmentation};
use crate::signal_io::{ElementId, Pose6D};
use crate::transform::HomogeneousTransform;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffCase {
    HoStarted,
    HoEnded,
    OoStarted,
    OoEnded,
}

/// A started or expired edge with its endpoint nodes, as found in the graph
/// that holds it (the effect graph for `*_started`, the precondition graph
/// for `*_ended`).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDiff {
    pub case: DiffCase,
    pub edge: Edge,
    pub source: Node,
    pub target: Node,
    /// The graph the subgraph was taken from.
    pub graph: SceneGraph,
}

impl GraphDiff {
    fn from_edge(case: DiffCase, graph: &SceneGraph, edge_index: usize) -> Self {
        GraphDiff {
            case,
            edge: graph.edges[edge_index].clone(),
            source: graph.nodes[edge_index].clone(),
            target: graph.nodes[edge_index + 1].clone(),
            graph: graph.clone(),
        }
    }

    /// The HO expiry closing an activity whose last representative graph is `last`.
    pub fn activity_end(last: &SceneGraph) -> Self {
        Self::from_edge(DiffCase::HoEnded, last, 0)
    }
}

fn edge_key(e: &Edge) -> (&str, &str, bool) {
    (&e.source, &e.target, matches!(e.relation, Relation::Ho { .. }))
}

/// Edges present in `eff` but not in `prec` are started, the reverse are
/// ended. HO differences come before OO differences, and an expiry comes
/// before a start of the same category. `prec = None` is the
/// idle boundary at the start of an activity.
pub fn graph_diff(eff: &SceneGraph, prec: Option<&SceneGraph>) -> Result<Vec<GraphDiff>> {
    if let Some(p) = prec {
        if p.ho_target().id != eff.ho_target().id {
            return Err(Error::CrossActivityDiff(
                p.ho_target().id.clone(),
                eff.ho_target().id.clone(),
            ));
        }
    }
    let empty = SceneGraph {
        frame: eff.frame,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    let prec = prec.unwrap_or(&empty);
    let has = |g: &SceneGraph, e: &Edge| g.edges.iter().any(|x| edge_key(x) == edge_key(e));
    let mut out = Vec::new();
    // Index 0 is always the HO edge, index 1 the OO edge.
    for idx in 0..2 {
        let (started, ended) = if idx == 0 {
            (DiffCase::HoStarted, DiffCase::HoEnded)
        } else {
            (DiffCase::OoStarted, DiffCase::OoEnded)
        };
        if let Some(e) = prec.edges.get(idx) {
            if !has(eff, e) {
                out.push(GraphDiff::from_edge(ended, prec, idx));
            }
        }
        if let Some(e) = eff.edges.get(idx) {
            if !has(prec, e) {
                out.push(GraphDiff::from_edge(started, eff, idx));
            }
        }
    }
    Ok(out)
}

/// A manipulated node as the plan sees it: id, the element whose pose stands
/// for it, and every element that moves with it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectRef {
    pub id: String,
    pub anchor: ElementId,
    pub members: Vec<ElementId>,
}

impl From<&Node> for ObjectRef {
    fn from(n: &Node) -> Self {
        ObjectRef {
            id: n.id.clone(),
            anchor: n.anchor.clone(),
            members: n.elements(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Primitive {
    /// Bring the moving frame (the effector, or a held object) to
    /// `T_world_target · relative`; the effector goes to that pose composed
    /// with `effector_offset`.
    #[serde(rename = "move_to")]
    Move {
        target: ElementId,
        /// `None` moves the bare effector.
        moving: Option<ObjectRef>,
        relative: HomogeneousTransform,
        effector_offset: HomogeneousTransform,
    },
    /// Placeholder for a patterned motion over the unit `[start, end]`.
    #[serde(rename = "move_complex")]
    ComplexMove {
        object: ObjectRef,
        start: usize,
        end: usize,
    },
    /// Effector to a configured world pose.
    MoveAway {
        object: ObjectRef,
        pose: Pose6D,
    },
    Grasp {
        object: ObjectRef,
    },
    Release {
        object: ObjectRef,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    MoveTo,
    MoveComplex,
    MoveAway,
    Grasp,
    Release,
}

impl PrimitiveKind {
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::MoveTo => "move_to",
            PrimitiveKind::MoveComplex => "move_complex",
            PrimitiveKind::MoveAway => "move_away",
            PrimitiveKind::Grasp => "grasp",
            PrimitiveKind::Release => "release",
        }
    }
}

impl Primitive {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Primitive::Move { .. } => PrimitiveKind::MoveTo,
            Primitive::ComplexMove { .. } => PrimitiveKind::MoveComplex,
            Primitive::MoveAway { .. } => PrimitiveKind::MoveAway,
            Primitive::Grasp { .. } => PrimitiveKind::Grasp,
            Primitive::Release { .. } => PrimitiveKind::Release,
        }
    }

    /// Short human-readable label, e.g. `move_to(plate)`.
    pub fn label(&self) -> String {
        let arg = match self {
            Primitive::Move { target, .. } => target.as_str(),
            Primitive::ComplexMove { object, .. }
            | Primitive::MoveAway { object, .. }
            | Primitive::Grasp { object }
            | Primitive::Release { object } => &object.id,
        };
        format!("{}({arg})", self.kind().name())
    }
}

/// Per-object extras: grasp-point offsets composed onto the approach
/// transform, and optional move-away poses used when an OO expires.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    /// `T^{hand}_{effector}` per manipulated node id.
    #[serde(default)]
    pub grasp_offsets: BTreeMap<String, HomogeneousTransform>,
    /// World effector pose per manipulated node id.
    #[serde(default)]
    pub move_away: BTreeMap<String, Pose6D>,
}

impl ObjectConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn grasp_offset(&self, node: &str) -> HomogeneousTransform {
        self.grasp_offsets
            .get(node)
            .copied()
            .unwrap_or_else(HomogeneousTransform::identity)
    }
}

fn pose_of(n: &Node) -> HomogeneousTransform {
    HomogeneousTransform::from_pose(&n.pose)
}

/// `T^{a}_{b}` from two world poses.
fn relative(a: &Node, b: &Node) -> HomogeneousTransform {
    pose_of(a).inverse().compose(&pose_of(b))
}

/// Primitives for one activity from its representative graphs.
pub fn map_primitives(
    segmentation: &Segmentation,
    activity: &Activity,
    config: &ObjectConfig,
) -> Result<Vec<Primitive>> {
    let mut out = Vec::new();
    let mut grasped: Option<String> = None;
    let mut prec: Option<&SceneGraph> = None;
    let mut diffs: Vec<(GraphDiff, Option<(usize, usize)>)> = Vec::new();
    for iu in segmentation.activity_ius(activity) {
        let eff = iu
            .repr
            .as_ref()
            .ok_or_else(|| Error::Segmentation(format!("unit {} has no repr", iu.index)))?;
        for d in graph_diff(eff, prec)? {
            diffs.push((d, Some((iu.start, iu.end))));
        }
        prec = Some(eff);
    }
    let last = prec.ok_or(Error::NoActivities)?;
    diffs.push((GraphDiff::activity_end(last), None));

    for (d, bounds) in diffs {
        match d.case {
            DiffCase::HoStarted => {
                let (hand, om) = (&d.source, &d.target);
                out.push(Primitive::Move {
                    target: om.anchor.clone(),
                    moving: None,
                    relative: relative(om, hand).compose(&config.grasp_offset(&om.id)),
                    effector_offset: HomogeneousTransform::identity(),
                });
                out.push(Primitive::Grasp { object: om.into() });
                grasped = Some(om.id.clone());
            }
            DiffCase::OoStarted => {
                let (om, oj) = (&d.source, &d.target);
                let hand = d.graph.hand();
                out.push(Primitive::Move {
                    target: oj.anchor.clone(),
                    moving: Some(om.into()),
                    relative: relative(oj, om),
                    effector_offset: relative(om, hand).compose(&config.grasp_offset(&om.id)),
                });
                if d.graph.interaction_complexity() {
                    let (start, end) = bounds.unwrap_or((d.graph.frame, d.graph.frame));
                    out.push(Primitive::ComplexMove {
                        object: om.into(),
                        start,
                        end,
                    });
                }
            }
            DiffCase::OoEnded => {
                let om = &d.source;
                if let Some(pose) = config.move_away.get(&om.id) {
                    out.push(Primitive::MoveAway {
                        object: om.into(),
                        pose: *pose,
                    });
                }
            }
            DiffCase::HoEnded => {
                let om = &d.target;
                if grasped.as_deref() != Some(om.id.as_str()) {
                    return Err(Error::ReleaseWithoutGrasp(om.id.clone()));
                }
                out.push(Primitive::Release { object: om.into() });
                grasped = None;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityPrimitives {
    pub activity: usize,
    pub target: String,
    pub start: usize,
    pub end: usize,
    pub primitives: Vec<Primitive>,
}

/// Primitive lists for every activity, in demonstration order.
pub fn extract_primitives(segmentation: &Segmentation, config: &ObjectConfig) -> Result<Vec<ActivityPrimitives>> {
    if segmentation.activities.is_empty() {
        return Err(Error::NoActivities);
    }
    segmentation
        .activities
        .iter()
        .map(|a| {
            Ok(ActivityPrimitives {
                activity: a.index,
                target: a.ho_target.clone(),
                start: a.start,
                end: a.end,
                primitives: map_primitives(segmentation, a, config)?,
            })
        })
        .collect()
}

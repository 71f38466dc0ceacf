//! Per-frame scene graphs: hand, manipulated node (object or moving unity)
//! and optionally one stationary background object.

mod detect;
mod signals;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::{ElementId, Pose6D};

pub use detect::{
    build_scene_graph, detect_dynamic_oo, detect_ho, detect_static_oo, displacement_angle, generate_graphs,
    DetectionContext, DetectorState,
};
pub use signals::WindowedSignals;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Hand,
    Object,
    Unity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Element id, or `unity:` followed by the sorted member ids.
    pub id: String,
    pub kind: NodeKind,
    /// Element whose pose the node carries (for a unity: the member closest to the hand).
    pub anchor: ElementId,
    pub pose: Pose6D,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<ElementId>,
}

impl Node {
    pub fn element(id: &ElementId, kind: NodeKind, pose: Pose6D) -> Self {
        Node {
            id: id.0.clone(),
            kind,
            anchor: id.clone(),
            pose,
            members: Vec::new(),
        }
    }

    pub fn unity(mut members: Vec<ElementId>, anchor: ElementId, pose: Pose6D) -> Self {
        members.sort();
        members.dedup();
        Node {
            id: unity_id(&members),
            kind: NodeKind::Unity,
            anchor,
            pose,
            members,
        }
    }

    /// Elements represented by this node.
    pub fn elements(&self) -> Vec<ElementId> {
        match self.kind {
            NodeKind::Unity => self.members.clone(),
            _ => vec![self.anchor.clone()],
        }
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        match self.kind {
            NodeKind::Unity => self.members.contains(id),
            _ => &self.anchor == id,
        }
    }
}

pub fn unity_id(sorted_members: &[ElementId]) -> String {
    let names: Vec<&str> = sorted_members.iter().map(ElementId::as_str).collect();
    format!("unity:{}", names.join("+"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoType {
    Manipulation,
    ContactOnly,
}

/// Object-object interaction type. `Dynamic` interactions are encoded by the
/// unity node itself and never appear as an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OoType {
    Dynamic,
    StaticSignificant,
    StaticTemporary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "category")]
pub enum Relation {
    #[serde(rename = "HO")]
    Ho { ho_type: HoType, mi_value: f64 },
    #[serde(rename = "OO")]
    Oo {
        oo_type: OoType,
        #[serde(default)]
        interaction_complexity: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub relation: Relation,
}

/// The four reachable layouts: hand→object, hand→unity, hand→object→object,
/// hand→unity→object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub frame: usize,
    /// `[hand, manipulated, background?]`.
    pub nodes: Vec<Node>,
    /// `[HO, OO?]`.
    pub edges: Vec<Edge>,
}

impl SceneGraph {
    pub fn hand(&self) -> &Node {
        &self.nodes[0]
    }

    /// The node the hand interacts with.
    pub fn ho_target(&self) -> &Node {
        &self.nodes[1]
    }

    pub fn oo_target(&self) -> Option<&Node> {
        self.nodes.get(2)
    }

    pub fn ho_edge(&self) -> &Edge {
        &self.edges[0]
    }

    pub fn oo_edge(&self) -> Option<&Edge> {
        self.edges.get(1)
    }

    pub fn ho_type(&self) -> HoType {
        match self.edges[0].relation {
            Relation::Ho { ho_type, .. } => ho_type,
            _ => unreachable!("first edge is always HO"),
        }
    }

    pub fn ho_mi(&self) -> f64 {
        match self.edges[0].relation {
            Relation::Ho { mi_value, .. } => mi_value,
            _ => unreachable!("first edge is always HO"),
        }
    }

    pub fn oo_type(&self) -> Option<OoType> {
        match self.oo_edge()?.relation {
            Relation::Oo { oo_type, .. } => Some(oo_type),
            _ => None,
        }
    }

    pub fn interaction_complexity(&self) -> bool {
        matches!(
            self.oo_edge().map(|e| &e.relation),
            Some(Relation::Oo {
                interaction_complexity: true,
                ..
            })
        )
    }

    pub fn topology(&self) -> Topology {
        match (self.ho_target().kind == NodeKind::Unity, self.oo_target().is_some()) {
            (false, false) => Topology::A,
            (true, false) => Topology::B,
            (false, true) => Topology::C,
            (true, true) => Topology::D,
        }
    }

    /// Topology plus node identities; equal signatures mean "similar" graphs.
    pub fn signature(&self) -> (Topology, Vec<&str>) {
        (self.topology(), self.nodes.iter().map(|n| n.id.as_str()).collect())
    }

    /// Drops the OO edge and background node, if any.
    pub fn without_oo(&self) -> SceneGraph {
        let mut g = self.clone();
        g.nodes.truncate(2);
        g.edges.truncate(1);
        g
    }

    pub fn set_interaction_complexity(&mut self, value: bool) {
        if let Some(Edge {
            relation: Relation::Oo {
                interaction_complexity, ..
            },
            ..
        }) = self.edges.get_mut(1)
        {
            *interaction_complexity = value;
        }
    }

    /// Structural invariants of a well-formed graph.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Schema(format!("graph at frame {}: {m}", self.frame)));
        if !(2..=3).contains(&self.nodes.len()) || self.edges.len() + 1 != self.nodes.len() {
            return bad("expected 2-3 nodes and one fewer edges");
        }
        if self.nodes[0].kind != NodeKind::Hand || self.nodes[1..].iter().any(|n| n.kind == NodeKind::Hand) {
            return bad("hand must be the first and only hand node");
        }
        if self.nodes.get(2).is_some_and(|n| n.kind == NodeKind::Unity) {
            return bad("background node cannot be a unity");
        }
        if self.nodes[1..]
            .iter()
            .any(|n| n.kind == NodeKind::Unity && n.members.len() < 2)
        {
            return bad("unity needs at least two members");
        }
        match &self.edges[0] {
            Edge {
                source,
                target,
                relation: Relation::Ho { mi_value, .. },
            } if *source == self.nodes[0].id && *target == self.nodes[1].id && *mi_value >= 0.0 => {}
            _ => return bad("first edge must be HO from hand to the manipulated node"),
        }
        if let Some(e) = self.edges.get(1) {
            match &e.relation {
                Relation::Oo { oo_type, .. }
                    if *oo_type != OoType::Dynamic && e.source == self.nodes[1].id && e.target == self.nodes[2].id => {}
                _ => return bad("second edge must be a static OO from the manipulated node"),
            }
        }
        Ok(())
    }
}

/// Contiguous per-frame graphs; `None` marks frames without interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSequence {
    pub start_frame: usize,
    pub graphs: Vec<Option<SceneGraph>>,
}

#[derive(Serialize, Deserialize)]
struct FrameLine {
    frame: usize,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl GraphSequence {
    pub fn iter(&self) -> impl Iterator<Item = (usize, Option<&SceneGraph>)> + '_ {
        self.graphs
            .iter()
            .enumerate()
            .map(move |(i, g)| (self.start_frame + i, g.as_ref()))
    }

    /// Graph at `frame`, if one was generated there.
    pub fn get(&self, frame: usize) -> Option<&SceneGraph> {
        frame
            .checked_sub(self.start_frame)
            .and_then(|i| self.graphs.get(i)?.as_ref())
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// One JSON object per frame; frames without a graph have empty `nodes`.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for (frame, g) in self.iter() {
            let line = match g {
                Some(g) => FrameLine {
                    frame,
                    nodes: g.nodes.clone(),
                    edges: g.edges.clone(),
                },
                None => FrameLine {
                    frame,
                    nodes: Vec::new(),
                    edges: Vec::new(),
                },
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n").map_err(|e| Error::io("<graphs>", e))?;
        }
        Ok(())
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self> {
        let mut start = None;
        let mut graphs = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let fl: FrameLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            let expected = start.map_or(fl.frame, |s| s + graphs.len());
            if fl.frame != expected {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("expected frame {expected}, got {}", fl.frame),
                });
            }
            start.get_or_insert(fl.frame);
            if fl.nodes.is_empty() {
                graphs.push(None);
            } else {
                let g = SceneGraph {
                    frame: fl.frame,
                    nodes: fl.nodes,
                    edges: fl.edges,
                };
                g.validate().map_err(|e| Error::Parse {
                    line: n + 1,
                    message: e.to_string(),
                })?;
                graphs.push(Some(g));
            }
        }
        Ok(GraphSequence {
            start_frame: start.unwrap_or(0),
            graphs,
        })
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::graph;
    use super::*;

    #[test]
    fn topologies_and_validation() {
        let a = graph(0, "cup", HoType::Manipulation, 0.4, None);
        assert_eq!(a.topology(), Topology::A);
        let b = graph(0, "unity:cup+tray", HoType::Manipulation, 0.4, None);
        assert_eq!(b.topology(), Topology::B);
        assert_eq!(b.ho_target().id, "unity:cup+tray");
        let c = graph(
            0,
            "cup",
            HoType::Manipulation,
            0.4,
            Some(("plate", OoType::StaticTemporary)),
        );
        assert_eq!(c.topology(), Topology::C);
        let d = graph(
            0,
            "unity:cup+tray",
            HoType::ContactOnly,
            0.0,
            Some(("shelf", OoType::StaticSignificant)),
        );
        assert_eq!(d.topology(), Topology::D);
        for g in [&a, &b, &c, &d] {
            g.validate().unwrap();
        }
        assert_eq!(c.without_oo(), a);
        let mut bad = c.clone();
        bad.edges.pop();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let seq = GraphSequence {
            start_frame: 20,
            graphs: vec![
                None,
                Some(graph(21, "cup", HoType::Manipulation, 0.25, None)),
                Some(graph(
                    22,
                    "cup",
                    HoType::ContactOnly,
                    0.0,
                    Some(("plate", OoType::StaticSignificant)),
                )),
            ],
        };
        let mut buf = Vec::new();
        seq.write_jsonl(&mut buf).unwrap();
        let back = GraphSequence::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, seq);
        let first = String::from_utf8(buf).unwrap();
        assert!(first.starts_with(r#"{"frame":20,"nodes":[],"edges":[]}"#));
    }
}

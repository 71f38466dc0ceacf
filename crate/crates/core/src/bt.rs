//! Behavior-tree plans: a root over one sequence per activity, each sequence
//! holding action leaves in primitive order.
//!
//! Plans are stored as versioned JSON. Every transform is relative, so the
//! same document drives execution in any scene; only [`resolve_target`]
//! looks at world poses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{ActivityPrimitives, Primitive};
use crate::signal_io::ElementId;
use crate::transform::HomogeneousTransform;

pub const PLAN_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BtNode {
    Root { children: Vec<BtNode> },
    Sequence { name: String, children: Vec<BtNode> },
    Action(Primitive),
}

impl BtNode {
    pub fn children(&self) -> &[BtNode] {
        match self {
            BtNode::Root { children } | BtNode::Sequence { children, .. } => children,
            BtNode::Action(_) => &[],
        }
    }

    /// Action leaves in tick order.
    pub fn leaves(&self) -> Vec<&Primitive> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Primitive>) {
        match self {
            BtNode::Action(p) => out.push(p),
            _ => self.children().iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Root holds only sequences, sequences hold only actions.
    pub fn validate(&self) -> Result<()> {
        let BtNode::Root { children } = self else {
            return Err(Error::Schema("plan must start with a root node".into()));
        };
        for (i, seq) in children.iter().enumerate() {
            let BtNode::Sequence { children, .. } = seq else {
                return Err(Error::Schema(format!("root child {i} is not a sequence")));
            };
            if let Some(j) = children.iter().position(|c| !matches!(c, BtNode::Action(_))) {
                return Err(Error::Schema(format!("sequence {i} child {j} is not an action")));
            }
        }
        Ok(())
    }
}

/// One sequence per activity, leaves in primitive order.
pub fn build_bt(activities: &[ActivityPrimitives]) -> Result<BtNode> {
    if activities.is_empty() {
        return Err(Error::NoActivities);
    }
    let children = activities
        .iter()
        .map(|a| BtNode::Sequence {
            name: format!("A{}:{}", a.activity + 1, a.target),
            children: a.primitives.iter().cloned().map(BtNode::Action).collect(),
        })
        .collect();
    Ok(BtNode::Root { children })
}

#[derive(Serialize, Deserialize)]
struct PlanDocument {
    version: u32,
    root: BtNode,
}

pub fn serialize_plan(root: &BtNode) -> Result<String> {
    root.validate()?;
    Ok(serde_json::to_string_pretty(&PlanDocument {
        version: PLAN_VERSION,
        root: root.clone(),
    })?)
}

pub fn deserialize_plan(text: &str) -> Result<BtNode> {
    let doc: PlanDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.version != PLAN_VERSION {
        return Err(Error::Schema(format!("unsupported plan version {}", doc.version)));
    }
    doc.root.validate()?;
    Ok(doc.root)
}

/// World pose per element.
pub type Scene = BTreeMap<ElementId, HomogeneousTransform>;

/// Effector target of a `move_to` leaf:
/// `T_world_target · relative · effector_offset`.
pub fn resolve_target(action: &Primitive, scene: &Scene) -> Result<HomogeneousTransform> {
    let Primitive::Move {
        target,
        relative,
        effector_offset,
        ..
    } = action
    else {
        return Err(Error::Schema(format!("{} has no target to resolve", action.label())));
    };
    let world = scene
        .get(target)
        .ok_or_else(|| Error::UnknownElement(target.to_string()))?;
    Ok(world.compose(relative).compose(effector_offset))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    Failure,
    Running,
}

/// Carries out one action leaf per call.
pub trait Executor {
    fn execute(&mut self, sequence: usize, leaf: usize, action: &Primitive) -> Status;
}

/// Sequence-with-memory ticking: each tick resumes at the first leaf that
/// has not yet succeeded.
#[derive(Clone, Debug)]
pub struct Ticker<'a> {
    root: &'a BtNode,
    /// (sequence, leaf) of the next leaf to run.
    cursor: (usize, usize),
}

impl<'a> Ticker<'a> {
    pub fn new(root: &'a BtNode) -> Self {
        Ticker { root, cursor: (0, 0) }
    }

    pub fn tick(&mut self, exec: &mut impl Executor) -> Status {
        let seqs = self.root.children();
        while let Some(seq) = seqs.get(self.cursor.0) {
            let leaves = seq.children();
            while let Some(BtNode::Action(a)) = leaves.get(self.cursor.1) {
                match exec.execute(self.cursor.0, self.cursor.1, a) {
                    Status::Success => self.cursor.1 += 1,
                    other => return other,
                }
            }
            self.cursor = (self.cursor.0 + 1, 0);
        }
        Status::Success
    }

    /// Ticks until the tree leaves RUNNING or `max_ticks` is spent.
    pub fn run(&mut self, exec: &mut impl Executor, max_ticks: usize) -> Status {
        for _ in 0..max_ticks {
            match self.tick(exec) {
                Status::Running => continue,
                s => return s,
            }
        }
        Status::Running
    }
}

/// Graphviz rendering of the tree.
pub fn to_dot(root: &BtNode) -> String {
    let mut s = String::from("digraph plan {\n  node [fontname=\"Helvetica\"];\n  root [label=\"root\", shape=box];\n");
    for (i, seq) in root.children().iter().enumerate() {
        let name = match seq {
            BtNode::Sequence { name, .. } => name.as_str(),
            _ => "?",
        };
        let _ = writeln!(s, "  s{i} [label=\"→ {name}\", shape=box];\n  root -> s{i};");
        for (j, leaf) in seq.children().iter().enumerate() {
            if let BtNode::Action(p) = leaf {
                let style = if matches!(p, Primitive::ComplexMove { .. }) {
                    ", style=dashed"
                } else {
                    ""
                };
                let _ = writeln!(s, "  a{i}_{j} [label=\"{}\"{style}];\n  s{i} -> a{i}_{j};", p.label());
            }
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::ObjectRef;

    fn obj(id: &str) -> ObjectRef {
        ObjectRef {
            id: id.into(),
            anchor: id.into(),
            members: vec![id.into()],
        }
    }

    fn sample() -> BtNode {
        let mv = Primitive::Move {
            target: "plate".into(),
            moving: Some(obj("cup")),
            relative: HomogeneousTransform::from_yaw(0.3, [0.01, 0.02, 0.03]),
            effector_offset: HomogeneousTransform::from_yaw(-1.2, [0.1 / 3.0, 0.0, 0.06]),
        };
        build_bt(&[ActivityPrimitives {
            activity: 0,
            target: "cup".into(),
            start: 10,
            end: 90,
            primitives: vec![
                Primitive::Grasp { object: obj("cup") },
                mv,
                Primitive::Release { object: obj("cup") },
            ],
        }])
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let t = sample();
        let back = deserialize_plan(&serialize_plan(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn sequence_under_sequence_is_rejected() {
        let doc = r#"{"version":1,"root":{"type":"root","children":[
            {"type":"sequence","name":"a","children":[{"type":"sequence","name":"b","children":[]}]}]}}"#;
        assert!(matches!(deserialize_plan(doc), Err(Error::Schema(_))));
        let doc = r#"{"version":1,"root":{"type":"root","children":[{"type":"action","action":"grasp",
            "object":{"id":"c","anchor":"c","members":["c"]}}]}}"#;
        assert!(deserialize_plan(doc).is_err());
    }

    #[test]
    fn resolve_identity_and_missing_target() {
        let mv = Primitive::Move {
            target: "p".into(),
            moving: None,
            relative: HomogeneousTransform::identity(),
            effector_offset: HomogeneousTransform::identity(),
        };
        let pose = HomogeneousTransform::from_yaw(0.4, [1.0, 2.0, 0.0]);
        let scene: Scene = [(ElementId::from("p"), pose)].into();
        assert_eq!(resolve_target(&mv, &scene).unwrap(), pose);
        assert!(resolve_target(&mv, &Scene::new()).is_err());
    }

    struct Flaky(usize);
    impl Executor for Flaky {
        fn execute(&mut self, _: usize, leaf: usize, _: &Primitive) -> Status {
            if leaf == 1 && self.0 > 0 {
                self.0 -= 1;
                Status::Running
            } else {
                Status::Success
            }
        }
    }

    #[test]
    fn ticking_resumes_running_leaf() {
        let t = sample();
        let mut ticker = Ticker::new(&t);
        let mut exec = Flaky(2);
        assert_eq!(ticker.tick(&mut exec), Status::Running);
        assert_eq!(ticker.run(&mut exec, 10), Status::Success);
        assert!(to_dot(&t).contains("move_to(plate)"));
    }
}

//! Kinematic plan execution: moves teleport the effector, grasp attaches
//! rigidly, release detaches. No physics, no collisions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bt::{resolve_target, BtNode, Executor, Scene, Status, Ticker};
use crate::primitives::{ObjectRef, Primitive};
use crate::signal_io::{ElementId, Pose6D};
use crate::transform::{wrap_angle, HomogeneousTransform};

pub const DEFAULT_GRASP_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub object: String,
    /// `T^{effector}_{member}` per attached element.
    pub links: BTreeMap<ElementId, HomogeneousTransform>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub objects: Scene,
    pub effector: HomogeneousTransform,
    pub attached: Option<Attachment>,
}

impl WorldState {
    pub fn new(objects: Scene, effector: HomogeneousTransform) -> Self {
        WorldState {
            objects,
            effector,
            attached: None,
        }
    }

    /// Scene file format: element id to pose.
    pub fn from_poses(poses: &BTreeMap<ElementId, Pose6D>, effector: HomogeneousTransform) -> Self {
        let objects = poses
            .iter()
            .map(|(k, p)| (k.clone(), HomogeneousTransform::from_pose(p)))
            .collect();
        Self::new(objects, effector)
    }

    fn set_effector(&mut self, pose: HomogeneousTransform) {
        self.effector = pose;
        if let Some(att) = &self.attached {
            for (id, link) in &att.links {
                self.objects.insert(id.clone(), pose.compose(link));
            }
        }
    }

    /// The same world moved by a rigid transform `g`.
    pub fn transformed(&self, g: &HomogeneousTransform) -> WorldState {
        WorldState {
            objects: self.objects.iter().map(|(k, t)| (k.clone(), g.compose(t))).collect(),
            effector: g.compose(&self.effector),
            attached: self.attached.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub sequence: usize,
    pub leaf: usize,
    pub action: String,
    pub status: Status,
    pub effector: HomogeneousTransform,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub entries: Vec<TraceEntry>,
    pub status: Option<Status>,
}

pub struct SimExecutor {
    pub world: WorldState,
    pub trace: ExecutionTrace,
    pub grasp_tolerance: f64,
    /// Effector pose expected at grasp time, per approached element, from
    /// the most recent bare-effector move to it.
    grasp_points: BTreeMap<ElementId, HomogeneousTransform>,
}

impl SimExecutor {
    pub fn new(world: WorldState) -> Self {
        SimExecutor {
            world,
            trace: ExecutionTrace::default(),
            grasp_tolerance: DEFAULT_GRASP_TOLERANCE,
            grasp_points: BTreeMap::new(),
        }
    }

    fn grasp(&mut self, object: &ObjectRef) -> Result<(), String> {
        let point = self
            .grasp_points
            .get(&object.anchor)
            .ok_or_else(|| format!("no approach move for {}", object.id))?;
        let p = point.position();
        let e = self.world.effector.position();
        let d = ((p[0] - e[0]).powi(2) + (p[1] - e[1]).powi(2) + (p[2] - e[2]).powi(2)).sqrt();
        if d > self.grasp_tolerance {
            return Err(format!("effector {d:.4} m from grasp point of {}", object.id));
        }
        let inv = self.world.effector.inverse();
        let mut links = BTreeMap::new();
        for m in &object.members {
            let pose = self.world.objects.get(m).ok_or_else(|| format!("{m} not in scene"))?;
            links.insert(m.clone(), inv.compose(pose));
        }
        self.world.attached = Some(Attachment {
            object: object.id.clone(),
            links,
        });
        Ok(())
    }

    fn step(&mut self, action: &Primitive) -> Result<Option<String>, String> {
        match action {
            Primitive::Move {
                moving,
                target: element,
                ..
            } => {
                let target = resolve_target(action, &self.world.objects).map_err(|e| e.to_string())?;
                match moving {
                    None => {
                        self.grasp_points.insert(element.clone(), target);
                    }
                    Some(m) => {
                        if self.world.attached.as_ref().map(|a| &a.object) != Some(&m.id) {
                            return Err(format!("{} is not held", m.id));
                        }
                    }
                }
                self.world.set_effector(target);
                Ok(None)
            }
            Primitive::MoveAway { pose, .. } => {
                self.world.set_effector(HomogeneousTransform::from_pose(pose));
                Ok(None)
            }
            Primitive::ComplexMove { object, start, end } => Ok(Some(format!(
                "patterned motion of {} over frames {start}-{end} not synthesized",
                object.id
            ))),
            Primitive::Grasp { object } => self.grasp(object).map(|_| None),
            Primitive::Release { object } => {
                if self.world.attached.as_ref().map(|a| &a.object) != Some(&object.id) {
                    return Err(format!("{} is not held", object.id));
                }
                self.world.attached = None;
                Ok(None)
            }
        }
    }
}

impl Executor for SimExecutor {
    fn execute(&mut self, sequence: usize, leaf: usize, action: &Primitive) -> Status {
        let (status, note) = match self.step(action) {
            Ok(note) => (Status::Success, note),
            Err(msg) => (Status::Failure, Some(msg)),
        };
        self.trace.entries.push(TraceEntry {
            sequence,
            leaf,
            action: action.label(),
            status,
            effector: self.world.effector,
            note,
        });
        status
    }
}

/// Runs the plan to completion against `initial`.
pub fn execute_bt(root: &BtNode, initial: WorldState) -> (WorldState, ExecutionTrace) {
    let mut exec = SimExecutor::new(initial);
    let status = Ticker::new(root).run(&mut exec, 1);
    exec.trace.status = Some(status);
    (exec.world, exec.trace)
}

/// A demonstrated final relation: `object` relative to `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub object: ElementId,
    pub target: ElementId,
    /// `T^{target}_{object}`.
    pub relative: HomogeneousTransform,
}

/// The last placement move before each release, unless a move-away follows
/// it. An object placed again later keeps only its final placement.
pub fn placements(root: &BtNode) -> Vec<Placement> {
    let mut out = Vec::new();
    for seq in root.children() {
        let mut last: Option<Placement> = None;
        for leaf in seq.children() {
            match leaf {
                BtNode::Action(Primitive::Move {
                    target,
                    moving: Some(m),
                    relative,
                    ..
                }) => {
                    last = Some(Placement {
                        object: m.anchor.clone(),
                        target: target.clone(),
                        relative: *relative,
                    })
                }
                // Carried away again: the demonstrated relation no longer holds.
                BtNode::Action(Primitive::MoveAway { .. }) => last = None,
                BtNode::Action(Primitive::Release { .. }) => {
                    if let Some(p) = last.take() {
                        out.retain(|q: &Placement| q.object != p.object);
                        out.push(p);
                    }
                }
                _ => {}
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementError {
    pub object: ElementId,
    pub target: ElementId,
    pub position_error: f64,
    pub yaw_error: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub position_tolerance: f64,
    pub yaw_tolerance: f64,
    pub placements: Vec<PlacementError>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &PlacementError> {
        self.placements.iter().filter(|p| !p.pass)
    }
}

/// Compares achieved and demonstrated relative poses: position distance in
/// meters and absolute yaw difference in radians.
pub fn verify_relative_poses(
    world: &WorldState,
    reference: &[Placement],
    position_tolerance: f64,
    yaw_tolerance: f64,
) -> VerificationReport {
    let placements: Vec<PlacementError> = reference
        .iter()
        .map(|p| {
            let (Some(obj), Some(tgt)) = (world.objects.get(&p.object), world.objects.get(&p.target)) else {
                return PlacementError {
                    object: p.object.clone(),
                    target: p.target.clone(),
                    position_error: f64::INFINITY,
                    yaw_error: f64::INFINITY,
                    pass: false,
                    problem: Some("element missing from final scene".into()),
                };
            };
            let achieved = tgt.inverse().compose(obj);
            let (a, r) = (achieved.position(), p.relative.position());
            let position_error = ((a[0] - r[0]).powi(2) + (a[1] - r[1]).powi(2) + (a[2] - r[2]).powi(2)).sqrt();
            let yaw_error = wrap_angle(achieved.yaw() - p.relative.yaw()).abs();
            PlacementError {
                object: p.object.clone(),
                target: p.target.clone(),
                position_error,
                yaw_error,
                pass: position_error <= position_tolerance && yaw_error <= yaw_tolerance,
                problem: None,
            }
        })
        .collect();
    VerificationReport {
        position_tolerance,
        yaw_tolerance,
        pass: placements.iter().all(|p| p.pass),
        placements,
    }
}

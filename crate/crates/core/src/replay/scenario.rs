//! Scripted demonstrations with ground truth.
//!
//! Each template drives one hand through approach / dwell / carry / dwell /
//! retreat phases with minimum-jerk profiles. Held objects keep a fixed
//! offset from the hand, so hand-object relations are exact. The seed
//! jitters phase durations, shifts the layout and picks object headings;
//! noise is added last and never touches the ground truth.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{ObjectConfig, PrimitiveKind};
use crate::segmentation::IuKind;
use crate::signal_io::{Element, ElementId, ElementKind, PipelineConfig, Pose6D, Recording};
use crate::transform::HomogeneousTransform;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Relocate,
    StirAndPlace,
    CarryAssembly,
    PickAndPlace,
    PassByDistractor,
    Cashier,
    WeighAndBox,
    TrayTwoCups,
    CleanSurface,
}

impl Template {
    pub const ALL: [Template; 9] = [
        Template::Relocate,
        Template::StirAndPlace,
        Template::CarryAssembly,
        Template::PickAndPlace,
        Template::PassByDistractor,
        Template::Cashier,
        Template::WeighAndBox,
        Template::TrayTwoCups,
        Template::CleanSurface,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Relocate => "relocate",
            Template::StirAndPlace => "stir_and_place",
            Template::CarryAssembly => "carry_assembly",
            Template::PickAndPlace => "pick_and_place",
            Template::PassByDistractor => "pass_by_distractor",
            Template::Cashier => "cashier",
            Template::WeighAndBox => "weigh_and_box",
            Template::TrayTwoCups => "tray_two_cups",
            Template::CleanSurface => "clean_surface",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown template `{s}`")))
    }
}

/// Phase durations in frames. The seed perturbs each by up to `jitter`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Timing {
    /// Idle frames at both ends of the recording.
    pub pad: usize,
    pub approach: usize,
    pub grasp_dwell: usize,
    pub carry: usize,
    pub release_dwell: usize,
    pub retreat: usize,
    /// Idle frames between activities.
    pub between: usize,
    /// Duration of patterned motions (stirring, scanning, wiping).
    pub pattern: usize,
    pub jitter: usize,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            pad: 75,
            approach: 40,
            grasp_dwell: 30,
            carry: 60,
            release_dwell: 30,
            retreat: 40,
            between: 40,
            pattern: 90,
            jitter: 4,
        }
    }
}

/// Generator behind layout jitter and position noise, seeded from `ScenarioSpec::seed`.
pub const NOISE_GENERATOR: &str = "rand_chacha::ChaCha8Rng";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub template: Template,
    #[serde(default)]
    pub timing: Timing,
    /// Per-axis Gaussian position noise, meters.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Elements dropped from the generated recording (the script still
    /// moves everything else as if they were there).
    #[serde(default)]
    pub remove: Vec<ElementId>,
}

impl ScenarioSpec {
    pub fn new(template: Template, seed: u64) -> Self {
        ScenarioSpec {
            template,
            timing: Timing::default(),
            noise_sigma: 0.0,
            seed,
            remove: Vec::new(),
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }
}

/// Expected unit: kind, first frame and node ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtUnit {
    pub kind: IuKind,
    pub start: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ho_target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oo_target: Option<String>,
}

/// An interval during which `object` moves with the hand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtInterval {
    pub object: ElementId,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Units after temporary-OO filtering, in order; each runs until the
    /// next one starts.
    pub ius: Vec<GtUnit>,
    pub activities: Vec<(usize, usize)>,
    pub manipulation: Vec<GtInterval>,
    pub primitives: Vec<Vec<PrimitiveKind>>,
    /// Final `T^{target}_{object}` per placement.
    pub placements: Vec<crate::replay::Placement>,
}

impl GroundTruth {
    pub fn boundaries(&self) -> Vec<usize> {
        self.ius.iter().skip(1).map(|u| u.start).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub recording: Recording,
    pub truth: GroundTruth,
    pub object_config: ObjectConfig,
    /// Noise-free initial pose of every object.
    pub initial: BTreeMap<ElementId, Pose6D>,
}

/// Minimum-jerk progress `10τ³ − 15τ⁴ + 6τ⁵`.
pub fn min_jerk(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

const HAND: &str = "hand";
/// Hand position relative to a grasped object, a whole number of bins on
/// every axis so hand and object change bins together.
const GRIP: [f64; 3] = [-0.04, 0.0, 0.06];

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn lerp(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * s,
        a[1] + (b[1] - a[1]) * s,
        a[2] + (b[2] - a[2]) * s,
    ]
}

fn xy_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Frame-by-frame script. Element 0 is the hand.
struct Script {
    ids: Vec<ElementId>,
    yaw: Vec<f64>,
    pos: Vec<[f64; 3]>,
    frames: Vec<Vec<[f64; 3]>>,
    held: Vec<(usize, [f64; 3])>,
    timing: Timing,
    rng: ChaCha8Rng,
}

impl Script {
    fn new(hand: [f64; 3], objects: &[(&str, [f64; 3])], timing: Timing, mut rng: ChaCha8Rng) -> Self {
        let mut ids = vec![ElementId::from(HAND)];
        let mut pos = vec![hand];
        let mut yaw = vec![0.0];
        for (id, p) in objects {
            ids.push(ElementId::from(*id));
            pos.push(*p);
            yaw.push(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        }
        let mut s = Script {
            yaw,
            ids,
            frames: Vec::new(),
            pos,
            held: Vec::new(),
            timing,
            rng,
        };
        s.push();
        s
    }

    fn idx(&self, id: &str) -> usize {
        self.ids
            .iter()
            .position(|e| e.as_str() == id)
            .expect("scripted element")
    }

    fn at(&self, id: &str, k: usize) -> [f64; 3] {
        self.frames[k][self.idx(id)]
    }

    fn now(&self) -> usize {
        self.frames.len() - 1
    }

    fn push(&mut self) {
        self.frames.push(self.pos.clone());
    }

    fn dur(&mut self, base: usize) -> usize {
        let j = self.timing.jitter as i64;
        let d = base as i64 + if j > 0 { self.rng.random_range(-j..=j) } else { 0 };
        d.max(2) as usize
    }

    fn hold(&mut self, n: usize) {
        for _ in 0..n {
            self.push();
        }
    }

    fn set_hand(&mut self, p: [f64; 3]) {
        self.pos[0] = p;
        for &(i, off) in &self.held {
            self.pos[i] = add(p, off);
        }
    }

    /// Hand along a minimum-jerk segment to `to`; returns the first and last
    /// frame of the motion.
    fn hand_to(&mut self, to: [f64; 3], n: usize) -> (usize, usize) {
        let from = self.pos[0];
        let first = self.now() + 1;
        for i in 1..=n {
            self.set_hand(lerp(from, to, min_jerk(i as f64 / n as f64)));
            self.push();
        }
        (first, self.now())
    }

    /// Hand offset from its current position by `f(τ)`, τ ∈ (0, 1].
    fn hand_path(&mut self, n: usize, f: impl Fn(f64) -> [f64; 3]) -> (usize, usize) {
        let base = self.pos[0];
        let first = self.now() + 1;
        for i in 1..=n {
            self.set_hand(add(base, f(i as f64 / n as f64)));
            self.push();
        }
        (first, self.now())
    }

    fn grip(&mut self, ids: &[&str]) {
        let hand = self.pos[0];
        self.held = ids
            .iter()
            .map(|id| (self.idx(id), sub(self.pos[self.idx(id)], hand)))
            .collect();
    }

    fn let_go(&mut self) {
        self.held.clear();
    }

    fn approach(&mut self, id: &str, grip: [f64; 3]) {
        let n = self.dur(self.timing.approach);
        self.hand_to(add(self.pos[self.idx(id)], grip), n);
        let n = self.dur(self.timing.grasp_dwell);
        self.hold(n);
    }

    /// Carries the held set so that `anchor` ends at `to`.
    fn carry(&mut self, anchor: &str, to: [f64; 3]) -> (usize, usize) {
        let off = sub(self.pos[0], self.pos[self.idx(anchor)]);
        let n = self.dur(self.timing.carry);
        self.hand_to(add(to, off), n)
    }

    /// Releases, retreats to `rest` and returns the first frame at which the
    /// hand is farther than `d_ho` from `anchor`.
    fn release_and_retreat(&mut self, anchor: &str, rest: [f64; 3], d_ho: f64) -> usize {
        let n = self.dur(self.timing.release_dwell);
        self.hold(n);
        self.let_go();
        let n = self.dur(self.timing.retreat);
        let (a, b) = self.hand_to(rest, n);
        let obj = self.pos[self.idx(anchor)];
        (a..=b)
            .find(|&k| xy_dist(self.frames[k][0], obj) > d_ho)
            .expect("retreat leaves the hand-object threshold")
    }

    /// First frame in `[a, b]` where `members` come within `d` of `target`.
    fn first_near(&self, members: &[&str], target: &str, (a, b): (usize, usize), d: f64) -> usize {
        (a..=b)
            .find(|&k| members.iter().any(|m| xy_dist(self.at(m, k), self.at(target, k)) < d))
            .expect("carry reaches the target zone")
    }

    /// First frame in `[a, b]` where every member is at least `d` from `target`.
    fn first_far(&self, members: &[&str], target: &str, (a, b): (usize, usize), d: f64) -> usize {
        (a..=b)
            .find(|&k| members.iter().all(|m| xy_dist(self.at(m, k), self.at(target, k)) >= d))
            .expect("carry leaves the target zone")
    }

    fn relative(&self, target: &str, object: &str) -> crate::replay::Placement {
        let k = self.now();
        let t = HomogeneousTransform::from_pose(&Pose6D::from_position_yaw(
            self.at(target, k),
            self.yaw[self.idx(target)],
        ));
        let o = HomogeneousTransform::from_pose(&Pose6D::from_position_yaw(
            self.at(object, k),
            self.yaw[self.idx(object)],
        ));
        crate::replay::Placement {
            object: object.into(),
            target: target.into(),
            relative: t.inverse().compose(&o),
        }
    }
}

fn unit(kind: IuKind, start: usize, ho: Option<&str>, oo: Option<&str>) -> GtUnit {
    GtUnit {
        kind,
        start,
        ho_target: ho.map(str::to_owned),
        oo_target: oo.map(str::to_owned),
    }
}

use PrimitiveKind::{Grasp, MoveAway, MoveComplex, MoveTo, Release};

struct Built {
    script: Script,
    truth: GroundTruth,
    object_config: ObjectConfig,
}

fn truth() -> GroundTruth {
    GroundTruth {
        ius: vec![unit(IuKind::Idle, 0, None, None)],
        activities: Vec::new(),
        manipulation: Vec::new(),
        primitives: Vec::new(),
        placements: Vec::new(),
    }
}

fn rest_point(layout_shift: [f64; 2]) -> [f64; 3] {
    [layout_shift[0] - 0.05, layout_shift[1] - 0.45, 0.1]
}

/// Carry one object from its spot to `to` near `target` (if any); appends
/// units, interval, activity and primitive kinds. `temporary` names an
/// object the carry starts next to (filtered, so no unit).
fn single_activity(
    s: &mut Script,
    t: &mut GroundTruth,
    obj: &str,
    to: [f64; 3],
    target: Option<&str>,
    cfg: &PipelineConfig,
    rest: [f64; 3],
) {
    s.approach(obj, GRIP);
    s.grip(&[obj]);
    let carry = s.carry(obj, to);
    t.manipulation.push(GtInterval {
        object: obj.into(),
        start: carry.0,
        end: carry.1,
    });
    t.ius.push(unit(IuKind::Ho, carry.0, Some(obj), None));
    let mut kinds = vec![MoveTo, Grasp];
    if let Some(tg) = target {
        let near = s.first_near(&[obj], tg, carry, cfg.d_oo_threshold);
        t.ius.push(unit(IuKind::Hoo, near, Some(obj), Some(tg)));
        kinds.push(MoveTo);
    }
    let end = s.release_and_retreat(obj, rest, cfg.d_ho_threshold);
    if let Some(tg) = target {
        t.placements.push(s.relative(tg, obj));
    }
    t.ius.push(unit(IuKind::Idle, end, None, None));
    t.activities.push((carry.0, end - 1));
    kinds.push(Release);
    t.primitives.push(kinds);
}

fn build(template: Template, timing: Timing, rng: ChaCha8Rng, shift: [f64; 2], cfg: &PipelineConfig) -> Built {
    let at = |x: f64, y: f64| [shift[0] + x, shift[1] + y, 0.0];
    let rest = rest_point(shift);
    let mut t = truth();
    let mut object_config = ObjectConfig::default();
    let pad = timing.pad;
    let between = timing.between;
    let d_ho = cfg.d_ho_threshold;
    let d_oo = cfg.d_oo_threshold;
    let script = match template {
        Template::Relocate => {
            let mut s = Script::new(rest, &[("cup", at(-0.15, 0.0))], timing, rng);
            s.hold(pad);
            single_activity(&mut s, &mut t, "cup", at(0.25, 0.1), None, cfg, rest);
            s.hold(pad);
            s
        }
        Template::PickAndPlace => {
            let mut s = Script::new(rest, &[("cup", at(-0.3, 0.0)), ("plate", at(0.25, 0.05))], timing, rng);
            s.hold(pad);
            single_activity(&mut s, &mut t, "cup", at(0.25, 0.05), Some("plate"), cfg, rest);
            s.hold(pad);
            s
        }
        Template::PassByDistractor => {
            let objs = [
                ("cup", at(-0.3, 0.0)),
                ("plate", at(0.25, 0.05)),
                ("box", at(-0.4, 0.0)),
            ];
            let mut s = Script::new(rest, &objs, timing, rng);
            s.hold(pad);
            single_activity(&mut s, &mut t, "cup", at(0.25, 0.05), Some("plate"), cfg, rest);
            s.hold(pad);
            s
        }
        Template::StirAndPlace => {
            let pan = at(0.0, 0.05);
            let handle = [-0.08, 0.0, 0.06];
            let mut s = Script::new(rest, &[("pan", pan)], timing, rng);
            s.hold(pad);
            s.approach("pan", handle);
            s.grip(&["pan"]);
            let pull = s.carry("pan", at(0.0, -0.15));
            let n = s.dur(s.timing.grasp_dwell);
            s.hold(n);
            s.let_go();
            // Stir: hand over the pan centre, circling with a 3 cm radius.
            let center = add(s.pos[s.idx("pan")], [0.0, 0.0, 0.08]);
            let n = s.dur(20);
            s.hand_to(add(center, [0.03, 0.0, 0.0]), n);
            let n = s.dur(s.timing.pattern);
            let turns = 3.0;
            s.hand_path(n, |tau| {
                let a = std::f64::consts::TAU * turns * tau;
                [0.03 * a.cos() - 0.03, 0.03 * a.sin(), 0.0]
            });
            let n = s.dur(20);
            s.hand_to(add(s.pos[s.idx("pan")], handle), n);
            let n = s.dur(s.timing.grasp_dwell);
            s.hold(n);
            s.grip(&["pan"]);
            let back = s.carry("pan", pan);
            let end = s.release_and_retreat("pan", rest, d_ho);
            t.manipulation.push(GtInterval {
                object: "pan".into(),
                start: pull.0,
                end: pull.1,
            });
            t.manipulation.push(GtInterval {
                object: "pan".into(),
                start: back.0,
                end: back.1,
            });
            t.ius.push(unit(IuKind::Ho, pull.0, Some("pan"), None));
            t.ius.push(unit(IuKind::Idle, end, None, None));
            t.activities.push((pull.0, end - 1));
            t.primitives.push(vec![MoveTo, Grasp, Release]);
            s.hold(pad);
            s
        }
        Template::CarryAssembly => {
            let tray = at(-0.25, 0.0);
            let objs = [
                ("tray", tray),
                ("cup_a", add(tray, [-0.07, 0.03, 0.0])),
                ("cup_b", add(tray, [0.07, 0.03, 0.0])),
                ("mat", at(0.3, 0.0)),
            ];
            let mut s = Script::new(rest, &objs, timing, rng);
            s.hold(pad);
            s.approach("tray", [0.0, -0.1, 0.06]);
            s.grip(&["tray", "cup_a", "cup_b"]);
            let carry = s.carry("tray", at(0.3, 0.0));
            let unity = "unity:cup_a+cup_b+tray";
            let near = s.first_near(&["tray", "cup_a", "cup_b"], "mat", carry, d_oo);
            let end = s.release_and_retreat("tray", rest, d_ho);
            t.placements.push(s.relative("mat", "tray"));
            t.manipulation.push(GtInterval {
                object: "tray".into(),
                start: carry.0,
                end: carry.1,
            });
            t.ius.push(unit(IuKind::Ho, carry.0, Some(unity), None));
            t.ius.push(unit(IuKind::Hoo, near, Some(unity), Some("mat")));
            t.ius.push(unit(IuKind::Idle, end, None, None));
            t.activities.push((carry.0, end - 1));
            t.primitives.push(vec![MoveTo, Grasp, MoveTo, Release]);
            s.hold(pad);
            s
        }
        Template::Cashier => {
            let scanner = at(-0.05, 0.2);
            let objs = [
                ("bottle", at(-0.4, -0.1)),
                ("scanner", scanner),
                ("packing", at(0.55, 0.0)),
            ];
            let mut s = Script::new(rest, &objs, timing, rng);
            s.hold(pad);
            s.approach("bottle", GRIP);
            s.grip(&["bottle"]);
            let to_scanner = s.carry("bottle", add(scanner, [0.0, -0.06, 0.0]));
            let n = s.dur(s.timing.pattern);
            s.hand_path(n, |tau| [0.04 * (std::f64::consts::TAU * 3.0 * tau).sin(), 0.0, 0.0]);
            let to_pack = s.carry("bottle", at(0.55, 0.0));
            let in_scanner = s.first_near(&["bottle"], "scanner", to_scanner, d_oo);
            let out_scanner = s.first_far(&["bottle"], "scanner", to_pack, d_oo);
            let in_pack = s.first_near(&["bottle"], "packing", to_pack, d_oo);
            let end = s.release_and_retreat("bottle", rest, d_ho);
            t.placements.push(s.relative("packing", "bottle"));
            t.manipulation.push(GtInterval {
                object: "bottle".into(),
                start: to_scanner.0,
                end: to_pack.1,
            });
            t.ius.push(unit(IuKind::Ho, to_scanner.0, Some("bottle"), None));
            t.ius
                .push(unit(IuKind::Hoo, in_scanner, Some("bottle"), Some("scanner")));
            t.ius.push(unit(IuKind::Ho, out_scanner, Some("bottle"), None));
            t.ius.push(unit(IuKind::Hoo, in_pack, Some("bottle"), Some("packing")));
            t.ius.push(unit(IuKind::Idle, end, None, None));
            t.activities.push((to_scanner.0, end - 1));
            t.primitives
                .push(vec![MoveTo, Grasp, MoveTo, MoveComplex, MoveTo, Release]);
            s.hold(pad);
            s
        }
        Template::WeighAndBox => {
            let scale = at(0.05, 0.2);
            let objs = [
                ("profile_c", at(-0.35, -0.05)),
                ("profile_b2", at(-0.45, -0.05)),
                ("scale", scale),
                ("profile_b1", at(0.5, -0.1)),
            ];
            let mut s = Script::new(rest, &objs, timing, rng);
            s.hold(pad);
            single_activity(&mut s, &mut t, "profile_c", scale, Some("scale"), cfg, rest);
            s.hold(between);
            // Second activity: picked off the scale (temporary, filtered) and
            // put down next to B1.
            single_activity(
                &mut s,
                &mut t,
                "profile_c",
                at(0.42, -0.1),
                Some("profile_b1"),
                cfg,
                rest,
            );
            s.hold(pad);
            s
        }
        Template::TrayTwoCups => {
            let tray = at(0.05, 0.1);
            let objs = [("tray", tray), ("cup_1", at(-0.4, 0.05)), ("cup_2", at(0.5, 0.15))];
            let mut s = Script::new(rest, &objs, timing, rng);
            s.hold(pad);
            single_activity(
                &mut s,
                &mut t,
                "cup_1",
                add(tray, [-0.07, 0.0, 0.0]),
                Some("tray"),
                cfg,
                rest,
            );
            s.hold(between);
            single_activity(
                &mut s,
                &mut t,
                "cup_2",
                add(tray, [0.07, 0.0, 0.0]),
                Some("tray"),
                cfg,
                rest,
            );
            s.hold(pad);
            s
        }
        Template::CleanSurface => {
            let cooker = at(0.0, 0.2);
            let away = at(0.45, -0.15);
            let objs = [("sponge", at(-0.4, -0.05)), ("cooker", cooker)];
            let mut s = Script::new(rest, &objs, timing, rng);
            s.hold(pad);
            s.approach("sponge", GRIP);
            s.grip(&["sponge"]);
            let to_cooker = s.carry("sponge", add(cooker, [-0.04, -0.02, 0.0]));
            let n = s.dur(s.timing.pattern);
            s.hand_path(n, |tau| {
                let a = std::f64::consts::TAU * 4.0 * tau;
                [0.08 * tau, 0.04 * a.sin(), 0.0]
            });
            let leave = s.carry("sponge", away);
            let in_cooker = s.first_near(&["sponge"], "cooker", to_cooker, d_oo);
            let out_cooker = s.first_far(&["sponge"], "cooker", leave, d_oo);
            let end = s.release_and_retreat("sponge", rest, d_ho);
            t.manipulation.push(GtInterval {
                object: "sponge".into(),
                start: to_cooker.0,
                end: leave.1,
            });
            t.ius.push(unit(IuKind::Ho, to_cooker.0, Some("sponge"), None));
            t.ius.push(unit(IuKind::Hoo, in_cooker, Some("sponge"), Some("cooker")));
            t.ius.push(unit(IuKind::Ho, out_cooker, Some("sponge"), None));
            t.ius.push(unit(IuKind::Idle, end, None, None));
            t.activities.push((to_cooker.0, end - 1));
            t.primitives
                .push(vec![MoveTo, Grasp, MoveTo, MoveComplex, MoveAway, Release]);
            object_config
                .move_away
                .insert("sponge".into(), Pose6D::from_position(add(away, GRIP)));
            s.hold(pad);
            s
        }
    };
    Built {
        script,
        truth: t,
        object_config,
    }
}

/// Generates the recording and ground truth for `spec` under the pipeline
/// thresholds in `config` (ground-truth boundaries depend on them).
pub fn generate_scenario(spec: &ScenarioSpec, config: &PipelineConfig) -> Result<Scenario> {
    if !(spec.noise_sigma >= 0.0) || !spec.noise_sigma.is_finite() {
        return Err(Error::Scenario(format!("invalid noise sigma {}", spec.noise_sigma)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shift = [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)];
    let layout_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let Built {
        script,
        truth,
        object_config,
    } = build(spec.template, spec.timing.clone(), layout_rng, shift, config);

    let noise =
        Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).map_err(|e| Error::Scenario(e.to_string()))?;
    let n = script.frames.len();
    let mut elements = Vec::new();
    let mut tracks = Vec::new();
    let mut initial = BTreeMap::new();
    for (i, id) in script.ids.iter().enumerate() {
        if spec.remove.contains(id) {
            continue;
        }
        let kind = if i == 0 { ElementKind::Hand } else { ElementKind::Object };
        elements.push(Element { id: id.clone(), kind });
        let yaw = script.yaw[i];
        if i > 0 {
            initial.insert(id.clone(), Pose6D::from_position_yaw(script.frames[0][i], yaw));
        }
        let track = (0..n)
            .map(|k| {
                let mut p = script.frames[k][i];
                if spec.noise_sigma > 0.0 {
                    for v in &mut p {
                        *v += noise.sample(&mut rng);
                    }
                }
                Some(Pose6D::from_position_yaw(p, yaw))
            })
            .collect();
        tracks.push(track);
    }
    let recording = Recording::from_tracks(config.sample_rate, elements, tracks)?;
    Ok(Scenario {
        spec: spec.clone(),
        recording,
        truth,
        object_config,
        initial,
    })
}

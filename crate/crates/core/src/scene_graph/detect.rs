use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::infotheory::{trend_sign, Trend};
use crate::signal_io::{valid_frames, window_bounds, ElementId, PipelineConfig, Recording};

use super::signals::{bins_entropy, WindowedSignals};
use super::{Edge, GraphSequence, HoType, Node, NodeKind, OoType, Relation, SceneGraph};

/// MI below this is treated as exactly zero when testing for shared information.
const MI_POSITIVE_FLOOR: f64 = 1e-9;
/// Displacements shorter than this have no direction.
const MIN_DISPLACEMENT: f64 = 1e-9;

#[derive(Clone, Copy)]
pub struct DetectionContext<'a> {
    pub recording: &'a Recording,
    pub signals: &'a WindowedSignals,
    pub config: &'a PipelineConfig,
}

impl<'a> DetectionContext<'a> {
    pub fn new(recording: &'a Recording, signals: &'a WindowedSignals, config: &'a PipelineConfig) -> Self {
        DetectionContext {
            recording,
            signals,
            config,
        }
    }

    fn check_window(&self, k: usize) -> Result<()> {
        let w = self.config.window_samples;
        let n = self.recording.duration();
        window_bounds(k, w, n).map(|_| ()).ok_or(Error::WindowOutOfRange {
            frame: k,
            window: w,
            duration: n,
        })
    }

    fn position(&self, element: usize, k: usize) -> Option<[f64; 3]> {
        self.recording.pose(element, k).map(|p| p.position)
    }

    fn instant_distance(&self, a: usize, b: usize, k: usize) -> Option<f64> {
        Some(self.config.axes.distance(&self.position(a, k)?, &self.position(b, k)?))
    }

    /// Candidates ordered nearest-first by instantaneous distance, ties by id.
    fn nearest_first(&self, from: &[usize], candidates: impl Iterator<Item = usize>, k: usize) -> Vec<usize> {
        let mut v: Vec<(f64, usize)> = candidates
            .filter_map(|c| {
                let d = from
                    .iter()
                    .filter_map(|&f| self.instant_distance(f, c, k))
                    .fold(f64::INFINITY, f64::min);
                d.is_finite().then_some((d, c))
            })
            .collect();
        v.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| self.recording.id(a.1).cmp(self.recording.id(b.1)))
        });
        v.into_iter().map(|(_, c)| c).collect()
    }

    fn trend(&self, series: &crate::infotheory::TimeSeries, k: usize) -> Option<Trend> {
        trend_sign(series, k, self.config.trend_horizon).ok()
    }
}

/// Detector memory carried from frame `k-1` to `k`.
#[derive(Clone, Debug, Default)]
pub struct DetectorState {
    pub previous: Option<SceneGraph>,
    /// Objects the hand has manipulated and not yet moved away from.
    pub manipulated: BTreeSet<ElementId>,
    /// Element the hand interacted with at `k-1`.
    pub touched: Option<ElementId>,
}

impl DetectorState {
    fn previous_ho(&self) -> Option<(&Node, HoType)> {
        self.previous.as_ref().map(|g| (g.ho_target(), g.ho_type()))
    }
}

/// Hand-object interaction at frame `k`: the nearest object that satisfies
/// the manipulation or contact-only rule, with the hand-object MI.
pub fn detect_ho(ctx: &DetectionContext<'_>, k: usize, state: &DetectorState) -> Result<Option<(usize, HoType, f64)>> {
    ctx.check_window(k)?;
    let cfg = ctx.config;
    let hand = ctx.recording.hand_index();
    for o in ctx.nearest_first(&[hand], ctx.recording.object_indices(), k) {
        let Some(d) = ctx.signals.avg_distance(hand, o, k) else {
            continue;
        };
        if d >= cfg.d_ho_threshold {
            continue;
        }
        let Some(mi) = ctx.signals.mi(hand, o, k) else {
            continue;
        };
        if mi > cfg.mi_epsilon {
            return Ok(Some((o, HoType::Manipulation, mi)));
        }
        let id = ctx.recording.id(o);
        if !state.manipulated.contains(id) {
            continue;
        }
        let held = matches!(state.previous_ho(), Some((node, HoType::ContactOnly)) if node.contains(id));
        let fading = mi < cfg.mi_epsilon && ctx.trend(ctx.signals.mi_series(hand, o), k) == Some(Trend::Negative);
        if held || fading {
            return Ok(Some((o, HoType::ContactOnly, mi)));
        }
    }
    Ok(None)
}

/// Angle in degrees between the displacements `p(t + w/2) - p(t)` of two
/// elements; 180° when either displacement is shorter than 1e-9 m.
pub fn displacement_angle(recording: &Recording, a: usize, b: usize, t: usize, config: &PipelineConfig) -> Result<f64> {
    let later = t + config.half_window();
    let get = |e: usize, k: usize| {
        recording
            .pose(e, k)
            .map(|p| p.position)
            .ok_or_else(|| Error::ElementAbsent {
                id: recording.id(e).0.clone(),
                frame: k,
            })
    };
    let (a0, a1, b0, b1) = (get(a, t)?, get(a, later)?, get(b, t)?, get(b, later)?);
    let da: Vec<f64> = config.axes.indices().map(|i| a1[i] - a0[i]).collect();
    let db: Vec<f64> = config.axes.indices().map(|i| b1[i] - b0[i]).collect();
    let na = da.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = db.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na < MIN_DISPLACEMENT || nb < MIN_DISPLACEMENT {
        return Ok(180.0);
    }
    let cos = da.iter().zip(&db).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    Ok(cos.clamp(-1.0, 1.0).acos().to_degrees())
}

/// Summed per-axis co-information of the members' windowed positions.
fn members_co_information(ctx: &DetectionContext<'_>, members: &[usize], k: usize) -> Option<f64> {
    let (lo, hi) = window_bounds(k, ctx.config.window_samples, ctx.recording.duration())?;
    let naxes = ctx.config.axes.indices().count();
    let mut total = 0.0;
    for axis in 0..naxes {
        let cols: Vec<Vec<i64>> = members
            .iter()
            .map(|&m| ctx.signals.window_bins(m, lo, hi, axis))
            .collect::<Option<_>>()?;
        let len = hi - lo + 1;
        let m = cols.len();
        for mask in 1u32..(1 << m) {
            let chosen: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let mut keys: Vec<Vec<i64>> = (0..len).map(|r| chosen.iter().map(|&c| cols[c][r]).collect()).collect();
            let h = if chosen.len() == 1 {
                bins_entropy(&mut cols[chosen[0]].clone())
            } else {
                crate::infotheory::entropy_of_keys(&mut keys)
            };
            if chosen.len() % 2 == 1 {
                total += h;
            } else {
                total -= h;
            }
        }
    }
    Some(total)
}

/// Moving unity around the manipulated object `om`, if any object moves
/// cohesively with it. Membership carried over from `k-1` persists while the
/// hand keeps interacting with the unity and members stay within `d_oo`.
pub fn detect_dynamic_oo(
    ctx: &DetectionContext<'_>,
    om: usize,
    ho_type: HoType,
    k: usize,
    state: &DetectorState,
) -> Result<Option<Node>> {
    ctx.check_window(k)?;
    let cfg = ctx.config;
    let rec = ctx.recording;
    let hand = rec.hand_index();
    let om_id = rec.id(om);

    let mut members: Vec<usize> = vec![om];
    if let Some((prev, _)) = state.previous_ho() {
        if prev.kind == NodeKind::Unity && prev.contains(om_id) {
            for m in &prev.members {
                let Ok(i) = rec.index_of(m) else { continue };
                if i != om
                    && ctx
                        .signals
                        .avg_distance(om, i, k)
                        .is_some_and(|d| d < cfg.d_oo_threshold)
                {
                    members.push(i);
                }
            }
        }
    }

    if ho_type == HoType::Manipulation {
        let candidates = rec.object_indices().filter(|o| !members.contains(o));
        for oj in ctx.nearest_first(&[om], candidates, k) {
            let close = ctx
                .signals
                .avg_distance(om, oj, k)
                .is_some_and(|d| d < cfg.d_oo_threshold);
            if !close {
                continue;
            }
            let shares = ctx.signals.mi(om, oj, k).is_some_and(|mi| mi > MI_POSITIVE_FLOOR);
            if !shares {
                continue;
            }
            let aligned = displacement_angle(rec, om, oj, k, cfg).is_ok_and(|a| a <= cfg.angle_threshold_deg);
            if !aligned {
                continue;
            }
            let mut trial = members.clone();
            trial.push(oj);
            if trial.len() >= 3 && !members_co_information(ctx, &trial, k).is_some_and(|c| c > MI_POSITIVE_FLOOR) {
                continue;
            }
            members = trial;
        }
    }

    if members.len() < 2 {
        return Ok(None);
    }
    let anchor = ctx.nearest_first(&[hand], members.iter().copied(), k)[0];
    let pose = *rec.pose(anchor, k).ok_or_else(|| Error::ElementAbsent {
        id: rec.id(anchor).0.clone(),
        frame: k,
    })?;
    let ids = members.iter().map(|&m| rec.id(m).clone()).collect();
    Ok(Some(Node::unity(ids, rec.id(anchor).clone(), pose)))
}

/// Static OO between the manipulated node and the nearest stationary object
/// within `d_oo`, classified significant or temporary.
pub fn detect_static_oo(
    ctx: &DetectionContext<'_>,
    manipulated: &Node,
    k: usize,
    ho_type: HoType,
    state: &DetectorState,
) -> Result<Option<(usize, OoType)>> {
    ctx.check_window(k)?;
    let cfg = ctx.config;
    let rec = ctx.recording;
    let members: Vec<usize> = manipulated
        .elements()
        .iter()
        .map(|id| rec.index_of(id))
        .collect::<Result<_>>()?;
    let candidates = rec.object_indices().filter(|o| !members.contains(o));
    for oj in ctx.nearest_first(&members, candidates, k) {
        if !ctx.signals.is_stationary(oj, k) {
            continue;
        }
        let Some(&near) = ctx.nearest_first(&[oj], members.iter().copied(), k).first() else {
            continue;
        };
        if !ctx
            .signals
            .avg_distance(near, oj, k)
            .is_some_and(|d| d < cfg.d_oo_threshold)
        {
            continue;
        }
        let oj_id = rec.id(oj);
        let was_significant = state.previous.as_ref().is_some_and(|g| {
            g.ho_target().id == manipulated.id
                && g.oo_target().is_some_and(|n| &n.anchor == oj_id)
                && g.oo_type() == Some(OoType::StaticSignificant)
        });
        let oo_type = if ho_type == HoType::ContactOnly || was_significant {
            OoType::StaticSignificant
        } else if ctx.trend(ctx.signals.distance_entropy_series(near, oj), k) == Some(Trend::Negative) {
            OoType::StaticSignificant
        } else {
            OoType::StaticTemporary
        };
        return Ok(Some((oj, oo_type)));
    }
    Ok(None)
}

/// Scene graph at frame `k` (or none), updating the detector state.
pub fn build_scene_graph(
    ctx: &DetectionContext<'_>,
    k: usize,
    state: &mut DetectorState,
) -> Result<Option<SceneGraph>> {
    ctx.check_window(k)?;
    let rec = ctx.recording;
    let hand = rec.hand_index();
    let d_ho = ctx.config.d_ho_threshold;
    state.manipulated.retain(|id| {
        rec.index_of(id)
            .ok()
            .and_then(|o| ctx.signals.avg_distance(hand, o, k))
            .is_some_and(|d| d < d_ho)
    });

    let Some((om, ho_type, mi)) = detect_ho(ctx, k, state)? else {
        state.previous = None;
        state.touched = None;
        return Ok(None);
    };
    let om_id = rec.id(om).clone();
    if ho_type == HoType::Manipulation {
        state.manipulated.insert(om_id.clone());
    }

    let pose_at = |e: usize| {
        rec.pose(e, k).copied().ok_or_else(|| Error::ElementAbsent {
            id: rec.id(e).0.clone(),
            frame: k,
        })
    };
    let hand_node = Node::element(rec.id(hand), NodeKind::Hand, pose_at(hand)?);
    let manipulated = match detect_dynamic_oo(ctx, om, ho_type, k, state)? {
        Some(unity) => unity,
        None => Node::element(&om_id, NodeKind::Object, pose_at(om)?),
    };
    let mut graph = SceneGraph {
        frame: k,
        edges: vec![Edge {
            source: hand_node.id.clone(),
            target: manipulated.id.clone(),
            relation: Relation::Ho { ho_type, mi_value: mi },
        }],
        nodes: vec![hand_node],
    };
    if let Some((oj, oo_type)) = detect_static_oo(ctx, &manipulated, k, ho_type, state)? {
        let bg = Node::element(rec.id(oj), NodeKind::Object, pose_at(oj)?);
        graph.edges.push(Edge {
            source: manipulated.id.clone(),
            target: bg.id.clone(),
            relation: Relation::Oo {
                oo_type,
                interaction_complexity: false,
            },
        });
        graph.nodes.push(manipulated);
        graph.nodes.push(bg);
    } else {
        graph.nodes.push(manipulated);
    }

    state.previous = Some(graph.clone());
    state.touched = Some(om_id);
    Ok(Some(graph))
}

/// Runs the detector over every frame with a full window.
pub fn generate_graphs(recording: &Recording, config: &PipelineConfig) -> Result<GraphSequence> {
    let (first, last) = valid_frames(config.window_samples, recording.duration()).ok_or(Error::WindowOutOfRange {
        frame: 0,
        window: config.window_samples,
        duration: recording.duration(),
    })?;
    let signals = WindowedSignals::new(recording, config);
    let ctx = DetectionContext::new(recording, &signals, config);
    let mut state = DetectorState::default();
    let mut graphs = Vec::with_capacity(last - first + 1);
    for k in first..=last {
        graphs.push(build_scene_graph(&ctx, k, &mut state)?);
    }
    Ok(GraphSequence {
        start_frame: first,
        graphs,
    })
}

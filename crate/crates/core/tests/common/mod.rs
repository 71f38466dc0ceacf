//! Independent oracles and builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use infoplan::scene_graph::{Edge, HoType, Node, NodeKind, OoType, Relation, SceneGraph};
use infoplan::signal_io::{Element, ElementId, ElementKind, Pose6D, Recording};

/// Entropy in bits by explicit histogram: count each bin index, then sum
/// `-p log2 p` over occupied bins.
pub fn oracle_entropy(xs: &[f64], q: f64) -> f64 {
    oracle_joint(&[xs], q)
}

pub fn oracle_joint(signals: &[&[f64]], q: f64) -> f64 {
    let n = signals[0].len();
    let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
    for i in 0..n {
        let key: Vec<i64> = signals.iter().map(|s| (s[i] / q).floor() as i64).collect();
        *counts.entry(key).or_default() += 1;
    }
    let mut h = 0.0;
    for c in counts.values() {
        let p = *c as f64 / n as f64;
        h -= p * p.log2();
    }
    h
}

pub fn oracle_mi(x: &[f64], y: &[f64], q: f64) -> f64 {
    (oracle_entropy(x, q) + oracle_entropy(y, q) - oracle_joint(&[x, y], q)).max(0.0)
}

/// Alternating sum of joint entropies over all non-empty subsets.
pub fn oracle_co_information(signals: &[&[f64]], q: f64) -> f64 {
    let m = signals.len();
    let mut total = 0.0;
    for mask in 1usize..(1 << m) {
        let subset: Vec<&[f64]> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| signals[i]).collect();
        let sign = if subset.len() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * oracle_joint(&subset, q);
    }
    total
}

/// Recording from per-element position functions; the first element is the hand.
pub fn scripted(n: usize, paths: &[(&str, &dyn Fn(usize) -> [f64; 3])]) -> Recording {
    let elements = paths
        .iter()
        .enumerate()
        .map(|(i, (id, _))| Element {
            id: ElementId::from(*id),
            kind: if i == 0 { ElementKind::Hand } else { ElementKind::Object },
        })
        .collect();
    let tracks = paths
        .iter()
        .map(|(_, f)| (0..n).map(|k| Some(Pose6D::from_position(f(k)))).collect())
        .collect();
    Recording::from_tracks(30.0, elements, tracks).unwrap()
}

/// Hand → `target` graph with an optional OO edge to `background`.
pub fn graph(frame: usize, target: &str, ho: HoType, mi: f64, oo: Option<(&str, OoType)>) -> SceneGraph {
    let pose = Pose6D::from_position([0.0; 3]);
    let hand = Node::element(&ElementId::from("hand"), NodeKind::Hand, pose);
    let tgt = Node::element(&ElementId::from(target), NodeKind::Object, pose);
    let mut g = SceneGraph {
        frame,
        edges: vec![Edge {
            source: hand.id.clone(),
            target: tgt.id.clone(),
            relation: Relation::Ho {
                ho_type: ho,
                mi_value: mi,
            },
        }],
        nodes: vec![hand, tgt],
    };
    if let Some((bg, t)) = oo {
        let n = Node::element(&ElementId::from(bg), NodeKind::Object, pose);
        g.edges.push(Edge {
            source: g.nodes[1].id.clone(),
            target: n.id.clone(),
            relation: Relation::Oo {
                oo_type: t,
                interaction_complexity: false,
            },
        });
        g.nodes.push(n);
    }
    g
}

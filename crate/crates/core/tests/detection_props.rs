mod common;

use common::scripted;
use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::scene_graph::{generate_graphs, GraphSequence, HoType};
use infoplan::signal_io::{
    average_distance, load_recording, write_jsonl, AxisSet, Element, ElementId, ElementKind, PipelineConfig, Pose6D,
    Recording, RecordingFormat,
};
use proptest::prelude::*;

fn scenario(template: Template, seed: u64) -> Recording {
    generate_scenario(&ScenarioSpec::new(template, seed), &PipelineConfig::default())
        .unwrap()
        .recording
}

fn with_distractors(r: &Recording, spots: &[[f64; 2]]) -> Recording {
    let mut elements: Vec<Element> = r.elements().to_vec();
    let mut tracks: Vec<Vec<Option<Pose6D>>> = (0..elements.len()).map(|i| r.track(i).to_vec()).collect();
    for (i, p) in spots.iter().enumerate() {
        elements.push(Element {
            id: ElementId::new(format!("far_{i}")),
            kind: ElementKind::Object,
        });
        tracks.push(vec![Some(Pose6D::from_position([p[0], p[1], 0.0])); r.duration()]);
    }
    Recording::from_tracks(r.sample_rate(), elements, tracks).unwrap()
}

fn graphs(r: &Recording) -> GraphSequence {
    generate_graphs(r, &PipelineConfig::default()).unwrap()
}

fn template() -> impl Strategy<Value = Template> {
    prop::sample::select(Template::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn average_distance_symmetry_and_translation(
        a in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 41),
        b in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 41),
        shift in prop::array::uniform3(-5.0f64..5.0),
        xyz in any::<bool>(),
    ) {
        let axes = if xyz { AxisSet::xyz() } else { AxisSet::xy() };
        let (fa, fb) = (|k: usize| a[k], |k: usize| b[k]);
        let r = scripted(41, &[("hand", &fa), ("cup", &fb)]);
        let moved = |p: [f64; 3]| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]];
        let (ga, gb) = (|k: usize| moved(a[k]), |k: usize| moved(b[k]));
        let s = scripted(41, &[("hand", &ga), ("cup", &gb)]);
        let (h, c) = (ElementId::from("hand"), ElementId::from("cup"));
        let ab = average_distance(&r, &h, &c, 20, 40, &axes).unwrap();
        prop_assert_eq!(ab.to_bits(), average_distance(&r, &c, &h, 20, 40, &axes).unwrap().to_bits());
        prop_assert_eq!(average_distance(&r, &h, &h, 20, 40, &axes).unwrap(), 0.0);
        prop_assert!((ab - average_distance(&s, &h, &c, 20, 40, &axes).unwrap()).abs() < 1e-12);
        // Brute-force oracle.
        let idx: Vec<usize> = axes.indices().collect();
        let oracle = (0..41)
            .map(|k| idx.iter().map(|&i| (a[k][i] - b[k][i]).powi(2)).sum::<f64>().sqrt())
            .sum::<f64>() / 41.0;
        prop_assert!((ab - oracle).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Static objects beyond every threshold never enter a graph.
    #[test]
    fn far_static_distractors_change_nothing(t in template(), seed in 0u64..50, k in 1usize..4) {
        let r = scenario(t, seed);
        let spots: Vec<[f64; 2]> = (0..k).map(|i| [3.0 + i as f64, -2.0]).collect();
        prop_assert_eq!(graphs(&with_distractors(&r, &spots)), graphs(&r));
    }

    #[test]
    fn graphs_are_deterministic(t in template(), seed in 0u64..50) {
        let r = scenario(t, seed);
        prop_assert_eq!(graphs(&r), graphs(&r.clone()));
    }

    #[test]
    fn every_graph_is_well_formed_and_contact_needs_history(t in template(), seed in 0u64..50) {
        let g = graphs(&scenario(t, seed));
        let mut manipulated: Vec<String> = Vec::new();
        for (_, graph) in g.iter() {
            let Some(graph) = graph else { continue };
            graph.validate().unwrap();
            prop_assert!(graph.oo_edge().is_none() || graph.edges.len() == 2);
            for e in graph.ho_target().elements() {
                match graph.ho_type() {
                    HoType::Manipulation => manipulated.push(e.to_string()),
                    HoType::ContactOnly => prop_assert!(
                        manipulated.contains(&e.to_string()),
                        "contact with {} before any manipulation", e
                    ),
                }
            }
        }
    }
}

#[test]
fn loading_is_deterministic() {
    let r = scenario(Template::Cashier, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.jsonl");
    write_jsonl(&r, std::fs::File::create(&path).unwrap()).unwrap();
    let cfg = PipelineConfig::default();
    let a = load_recording(&path, RecordingFormat::Jsonl, &cfg).unwrap();
    let b = load_recording(&path, RecordingFormat::Jsonl, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, r);
}

/// Rigidly co-moving tray and cups stay one unity for every manipulation
/// frame of the carry.
#[test]
fn rigid_assembly_stays_unified() {
    let cfg = PipelineConfig::default();
    for seed in 0..5 {
        let s = generate_scenario(&ScenarioSpec::new(Template::CarryAssembly, seed), &cfg).unwrap();
        let g = generate_graphs(&s.recording, &cfg).unwrap();
        let carry = &s.truth.manipulation[0];
        let mut seen = 0;
        for k in carry.start..=carry.end {
            if let Some(graph) = g.get(k) {
                if graph.ho_type() == HoType::Manipulation {
                    assert_eq!(graph.ho_target().id, "unity:cup_a+cup_b+tray", "seed {seed} frame {k}");
                    seen += 1;
                }
            }
        }
        assert!(seen > 0);
    }
}

/// A cup carried along x past a spoon pushed along y: both move and their
/// windowed MI is positive, but the displacement directions differ by 90°,
/// so they never fuse.
#[test]
fn crossing_movers_do_not_fuse() {
    let cfg = PipelineConfig::default();
    let x = |k: usize| 0.3 * (k as f64 / 200.0);
    let hand = |k: usize| [x(k), 0.0, 0.06];
    let cup = |k: usize| [x(k), 0.0, 0.0];
    let spoon = |k: usize| [0.15, -0.1 + 0.2 * (k as f64 / 200.0), 0.0];
    let r = scripted(200, &[("hand", &hand), ("cup", &cup), ("spoon", &spoon)]);
    let g = generate_graphs(&r, &cfg).unwrap();
    assert!(g.iter().filter_map(|(_, g)| g).count() > 100);
    for graph in g.iter().filter_map(|(_, g)| g) {
        assert_eq!(graph.ho_target().id, "cup", "frame {}", graph.frame);
    }
}

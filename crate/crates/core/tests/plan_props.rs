use infoplan::bt::{resolve_target, BtNode, Scene};
use infoplan::pipeline::{compile, run_pipeline, Compiled};
use infoplan::primitives::{graph_diff, Primitive, PrimitiveKind};
use infoplan::replay::{
    execute_bt, generate_scenario, placements, verify_relative_poses, Scenario, ScenarioSpec, Template, WorldState,
};
use infoplan::segmentation::IuKind;
use infoplan::signal_io::{write_jsonl, ConfigFile, PipelineConfig};
use infoplan::transform::{wrap_angle, HomogeneousTransform};
use proptest::prelude::*;

fn build(template: Template, seed: u64) -> (Scenario, Compiled) {
    let cfg = PipelineConfig::default();
    let s = generate_scenario(&ScenarioSpec::new(template, seed), &cfg).unwrap();
    let c = compile(&s.recording, &cfg, &s.object_config).unwrap();
    (s, c)
}

fn close(a: &HomogeneousTransform, b: &HomogeneousTransform, tol: f64) -> bool {
    let (x, y) = (a.to_row_major(), b.to_row_major());
    x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol)
}

fn transform() -> impl Strategy<Value = HomogeneousTransform> {
    (-3.2f64..3.2, prop::array::uniform3(-2.0f64..2.0)).prop_map(|(yaw, t)| HomogeneousTransform::from_yaw(yaw, t))
}

fn demo_world(s: &Scenario) -> WorldState {
    WorldState::from_poses(&s.initial, HomogeneousTransform::identity())
}

#[test]
fn every_activity_opens_with_approach_and_closes_with_release() {
    for t in Template::ALL {
        for seed in 0..3 {
            let (s, c) = build(t, seed);
            for a in &c.primitives {
                let kinds: Vec<PrimitiveKind> = a.primitives.iter().map(Primitive::kind).collect();
                assert_eq!(
                    &kinds[..2],
                    &[PrimitiveKind::MoveTo, PrimitiveKind::Grasp],
                    "{t} seed {seed}"
                );
                assert_eq!(kinds.last(), Some(&PrimitiveKind::Release));
            }
            let got: Vec<Vec<PrimitiveKind>> = c
                .primitives
                .iter()
                .map(|a| a.primitives.iter().map(Primitive::kind).collect())
                .collect();
            assert_eq!(got, s.truth.primitives, "{t} seed {seed}");
        }
    }
}

#[test]
fn diff_of_a_graph_with_itself_is_empty() {
    let (_, c) = build(Template::Cashier, 0);
    for iu in c.segmentation.ius.iter().filter(|iu| iu.kind != IuKind::Idle) {
        let g = iu.repr.as_ref().unwrap();
        assert!(graph_diff(g, Some(g)).unwrap().is_empty());
    }
}

/// Each placement move's relative transform, composed onto the recorded
/// pose of the target at the unit's representative frame, gives the
/// recorded pose of the moving object at that frame.
#[test]
fn placement_transforms_match_recorded_poses() {
    for t in Template::ALL {
        let (s, c) = build(t, 1);
        let r = &s.recording;
        for a in &c.primitives {
            let act = &c.segmentation.activities[a.activity];
            let hoo: Vec<_> = act
                .ius
                .iter()
                .map(|&i| &c.segmentation.ius[i])
                .filter(|iu| iu.kind == IuKind::Hoo)
                .collect();
            let moves: Vec<_> = a
                .primitives
                .iter()
                .filter_map(|p| match p {
                    Primitive::Move {
                        target,
                        moving: Some(m),
                        relative,
                        ..
                    } => Some((target, m, relative)),
                    _ => None,
                })
                .collect();
            assert_eq!(moves.len(), hoo.len(), "{t}");
            for ((target, m, relative), iu) in moves.into_iter().zip(hoo) {
                let k = iu.repr.as_ref().unwrap().frame;
                let pose = |id| HomogeneousTransform::from_pose(r.pose(r.index_of(id).unwrap(), k).unwrap());
                let predicted = pose(target).compose(relative);
                let recorded = pose(&m.anchor);
                assert!(close(&predicted, &recorded, 1e-9), "{t} frame {k}");
            }
        }
    }
}

/// Shifting the whole demonstration by a grid-aligned offset changes no
/// tree structure and moves no transform by more than rounding.
#[test]
fn plan_is_invariant_under_grid_aligned_translation() {
    let cfg = PipelineConfig::default();
    for t in [
        Template::PickAndPlace,
        Template::Cashier,
        Template::TrayTwoCups,
        Template::CarryAssembly,
    ] {
        let s = generate_scenario(&ScenarioSpec::new(t, 2), &cfg).unwrap();
        let shifted = s.recording.map_poses(|p| {
            let mut q = *p;
            q.position = [p.position[0] + 2.0, p.position[1] - 1.0, p.position[2] + 0.5];
            q
        });
        let a = compile(&s.recording, &cfg, &s.object_config).unwrap().plan;
        let b = compile(&shifted, &cfg, &s.object_config).unwrap().plan;
        assert_eq!(a.children().len(), b.children().len());
        for (x, y) in a.leaves().into_iter().zip(b.leaves()) {
            assert_eq!(x.label(), y.label(), "{t}");
            match (x, y) {
                (
                    Primitive::Move {
                        relative: r1,
                        effector_offset: e1,
                        ..
                    },
                    Primitive::Move {
                        relative: r2,
                        effector_offset: e2,
                        ..
                    },
                ) => assert!(close(r1, r2, 1e-9) && close(e1, e2, 1e-9), "{t}"),
                (Primitive::MoveAway { .. }, Primitive::MoveAway { .. }) => {}
                (p, q) => assert_eq!(p, q),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn resolve_target_is_equivariant(g in transform(), world in transform(), rel in transform(), off in transform()) {
        let mv = Primitive::Move { target: "plate".into(), moving: None, relative: rel, effector_offset: off };
        let scene: Scene = [("plate".into(), world)].into();
        let moved: Scene = [("plate".into(), g.compose(&world))].into();
        let a = g.compose(&resolve_target(&mv, &scene).unwrap());
        let b = resolve_target(&mv, &moved).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
        // Matrix oracle: plain 4×4 products.
        let m = |t: &HomogeneousTransform| t.to_row_major();
        let mul = |x: [f64; 16], y: [f64; 16]| {
            let mut o = [0.0; 16];
            for i in 0..4 { for j in 0..4 { for k in 0..4 { o[i * 4 + j] += x[i * 4 + k] * y[k * 4 + j]; } } }
            o
        };
        let oracle = mul(mul(m(&world), m(&rel)), m(&off));
        let got = resolve_target(&mv, &scene).unwrap().to_row_major();
        prop_assert!(oracle.iter().zip(&got).all(|(p, q)| (p - q).abs() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn execution_is_equivariant(seed in 0u64..100, g in transform()) {
        let (s, c) = build(Template::TrayTwoCups, seed);
        let (a, ta) = execute_bt(&c.plan, demo_world(&s));
        let (b, tb) = execute_bt(&c.plan, demo_world(&s).transformed(&g));
        prop_assert_eq!(ta.status, tb.status);
        for (id, pose) in &a.objects {
            prop_assert!(close(&g.compose(pose), &b.objects[id], 1e-9));
        }
    }
}

#[test]
fn replay_on_demo_layout_closes() {
    for t in Template::ALL {
        let (s, c) = build(t, 0);
        let (end, trace) = execute_bt(&c.plan, demo_world(&s));
        assert_eq!(trace.status, Some(infoplan::bt::Status::Success), "{t}");
        let report = verify_relative_poses(&end, &placements(&c.plan), 1e-9, 1e-9);
        assert!(report.pass, "{t}: {report:?}");
        // Demonstrated finals from the generator agree with the plan's.
        let finals = s
            .truth
            .placements
            .iter()
            .enumerate()
            .filter(|(i, p)| !s.truth.placements[i + 1..].iter().any(|q| q.object == p.object));
        for (_, p) in finals {
            let got = end.objects[&p.target].inverse().compose(&end.objects[&p.object]);
            let (a, b) = (got.position(), p.relative.position());
            assert!((0..3).all(|i| (a[i] - b[i]).abs() < 1e-9), "{t}");
            assert!(wrap_angle(got.yaw() - p.relative.yaw()).abs() < 1e-9, "{t}");
        }
    }
}

#[test]
fn tree_shape_is_stable_across_layouts() {
    let (_, c) = build(Template::WeighAndBox, 0);
    let shape = |n: &BtNode| n.children().iter().map(|s| s.children().len()).collect::<Vec<_>>();
    for seed in 1..4 {
        let (other, _) = build(Template::WeighAndBox, seed);
        let (_, trace) = execute_bt(&c.plan, demo_world(&other));
        assert_eq!(trace.status, Some(infoplan::bt::Status::Success));
    }
    assert_eq!(shape(&c.plan), vec![4, 4]);
}

#[test]
fn pipeline_reruns_are_byte_identical() {
    let cfg = PipelineConfig::default();
    let s = generate_scenario(&ScenarioSpec::new(Template::Cashier, 5), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec.jsonl");
    write_jsonl(&s.recording, std::fs::File::create(&rec).unwrap()).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ma = run_pipeline(&rec, None, None, ConfigFile::default(), &a).unwrap();
    let mb = run_pipeline(&rec, None, None, ConfigFile::default(), &b).unwrap();
    assert_eq!(ma.outputs.len(), 4);
    for name in ["graphs.jsonl", "segmentation.json", "primitives.json", "plan.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let strip = |p: &std::path::Path| {
        std::fs::read_to_string(p.join("manifest.json"))
            .unwrap()
            .replace(p.to_str().unwrap(), "")
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(ma.inputs, mb.inputs);
}

//! Learns "put both cups on the tray" once, then replays the plan on a
//! rearranged table. Targets are resolved against the new scene, so the
//! cups end up where they sat relative to the tray in the demonstration.

use std::collections::BTreeMap;

use infoplan::pipeline::compile;
use infoplan::replay::{
    execute_bt, generate_scenario, placements, verify_relative_poses, ScenarioSpec, Template, WorldState,
};
use infoplan::signal_io::{ElementId, PipelineConfig, Pose6D};
use infoplan::transform::HomogeneousTransform;

fn main() -> infoplan::Result<()> {
    let config = PipelineConfig::default();
    let demo = generate_scenario(&ScenarioSpec::new(Template::TrayTwoCups, 0), &config)?;
    let plan = compile(&demo.recording, &config, &demo.object_config)?.plan;

    // Tray turned 90° and pushed to the far corner; cups swapped around.
    let scene: BTreeMap<ElementId, Pose6D> = [
        (
            "tray",
            Pose6D::from_position_yaw([0.45, 0.35, 0.0], std::f64::consts::FRAC_PI_2),
        ),
        ("cup_1", Pose6D::from_position_yaw([-0.4, -0.2, 0.0], 1.0)),
        ("cup_2", Pose6D::from_position_yaw([-0.1, 0.3, 0.0], -2.0)),
    ]
    .into_iter()
    .map(|(id, p)| (ElementId::from(id), p))
    .collect();

    let (end, trace) = execute_bt(&plan, WorldState::from_poses(&scene, HomogeneousTransform::identity()));
    for e in &trace.entries {
        println!("{:<24} {:?}", e.action, e.status);
    }
    let report = verify_relative_poses(&end, &placements(&plan), 1e-6, 1e-6);
    for p in &report.placements {
        println!(
            "{} on {}: position error {:.1e} m, yaw error {:.1e} rad",
            p.object, p.target, p.position_error, p.yaw_error
        );
    }
    println!("verification {}", if report.pass { "passed" } else { "FAILED" });
    Ok(())
}

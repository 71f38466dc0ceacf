//! Synthesizes a pick-and-place demonstration and compiles it into a plan.
//!
//! ```text
//! cargo run --example compile_demo [template] [seed]
//! ```

use infoplan::bt::serialize_plan;
use infoplan::pipeline::compile;
use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::signal_io::PipelineConfig;

fn main() -> infoplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let template: Template = args.next().as_deref().unwrap_or("pick_and_place").parse()?;
    let seed = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));

    let config = PipelineConfig::default();
    let scenario = generate_scenario(&ScenarioSpec::new(template, seed), &config)?;
    let r = &scenario.recording;
    println!(
        "{template}: {} frames at {} Hz, {} elements",
        r.duration(),
        r.sample_rate(),
        r.elements().len()
    );

    let compiled = compile(r, &config, &scenario.object_config)?;
    let interacting = compiled.graphs.iter().filter(|(_, g)| g.is_some()).count();
    println!("{interacting} frames carry a scene graph");
    println!(
        "{} interaction units in {} activities",
        compiled.segmentation.ius.len(),
        compiled.segmentation.activities.len()
    );
    for (a, prims) in compiled.primitives.iter().enumerate() {
        let labels: Vec<String> = prims.primitives.iter().map(|p| p.label()).collect();
        println!("  A{}: {}", a + 1, labels.join(" -> "));
    }
    println!("{}", serialize_plan(&compiled.plan)?);
    Ok(())
}

// Two activities (weigh, then box) as a behavior tree in Graphviz form.
//
//   cargo run --example plan_graphviz | dot -Tsvg > plan.svg

use infoplan::bt::to_dot;
use infoplan::pipeline::compile;
use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::signal_io::PipelineConfig;

fn main() -> infoplan::Result<()> {
    let config = PipelineConfig::default();
    let s = generate_scenario(&ScenarioSpec::new(Template::WeighAndBox, 0), &config)?;
    let plan = compile(&s.recording, &config, &s.object_config)?.plan;
    print!("{}", to_dot(&plan));
    Ok(())
}

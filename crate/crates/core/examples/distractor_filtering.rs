//! Carrying a cup past a box creates a short object–object relation that
//! means nothing. Filtering temporary relations drops it; without the
//! filter the plan gains a pointless detour.

use infoplan::pipeline::compile;
use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::signal_io::{ElementId, PipelineConfig};

fn main() -> infoplan::Result<()> {
    let filtered = PipelineConfig::default();
    let unfiltered = PipelineConfig {
        filter_temporary: false,
        ..PipelineConfig::default()
    };
    let with_box = generate_scenario(&ScenarioSpec::new(Template::PassByDistractor, 0), &filtered)?;
    let mut spec = ScenarioSpec::new(Template::PassByDistractor, 0);
    spec.remove = vec![ElementId::from("box")];
    let without_box = generate_scenario(&spec, &filtered)?;

    let runs = [
        ("box present, filtered", &with_box, &filtered),
        ("box removed, filtered", &without_box, &filtered),
        ("box present, unfiltered", &with_box, &unfiltered),
    ];
    for (name, s, config) in runs {
        let plan = compile(&s.recording, config, &s.object_config)?.plan;
        let leaves: Vec<String> = plan.leaves().iter().map(|p| p.label()).collect();
        println!("{name:<24} {}", leaves.join(" "));
    }
    Ok(())
}

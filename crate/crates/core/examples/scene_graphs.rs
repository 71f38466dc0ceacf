//! Prints the scene-graph timeline of a demonstration as runs of equal
//! labels: who the hand interacts with, how, and which object the held
//! one relates to.

use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::scene_graph::{generate_graphs, SceneGraph};
use infoplan::signal_io::PipelineConfig;

fn describe(g: Option<&SceneGraph>) -> String {
    let Some(g) = g else { return "-".into() };
    let mut s = format!("{:?} hand~{} ({:?})", g.topology(), g.ho_target().id, g.ho_type());
    if let (Some(o), Some(ty)) = (g.oo_target(), g.oo_type()) {
        s += &format!(", {}~{} ({ty:?})", g.ho_target().id, o.id);
    }
    s
}

fn main() -> infoplan::Result<()> {
    let template: Template = std::env::args().nth(1).as_deref().unwrap_or("carry_assembly").parse()?;
    let config = PipelineConfig::default();
    let s = generate_scenario(&ScenarioSpec::new(template, 0), &config)?;
    let graphs = generate_graphs(&s.recording, &config)?;

    let mut runs: Vec<(usize, usize, String)> = Vec::new();
    for (k, g) in graphs.iter() {
        let label = describe(g);
        match runs.last_mut() {
            Some(run) if run.2 == label => run.1 = k,
            _ => runs.push((k, k, label)),
        }
    }
    for (a, b, label) in runs {
        println!("{a:>4}..{b:<4} {label}");
    }
    Ok(())
}

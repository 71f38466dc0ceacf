//! Interaction units and activities of the cashier demonstration, next to
//! the generator's ground truth. The scanning pass shows up as a complex
//! HOO unit.

use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::scene_graph::generate_graphs;
use infoplan::segmentation::{segment, IuKind};
use infoplan::signal_io::PipelineConfig;

fn main() -> infoplan::Result<()> {
    let template: Template = std::env::args().nth(1).as_deref().unwrap_or("cashier").parse()?;
    let config = PipelineConfig::default();
    let s = generate_scenario(&ScenarioSpec::new(template, 0), &config)?;
    let seg = segment(&generate_graphs(&s.recording, &config)?, &config)?;

    for iu in &seg.ius {
        let mut line = format!("IU{:<2} {:>4}..{:<4} {:?}", iu.index, iu.start, iu.end, iu.kind);
        if let Some(r) = &iu.repr {
            line += &format!("  repr@{} hand~{}", r.frame, r.ho_target().id);
            if let Some(o) = r.oo_target() {
                line += &format!(" ~{}", o.id);
            }
            if iu.kind == IuKind::Hoo && r.interaction_complexity() {
                line += "  [complex]";
            }
        }
        println!("{line}");
    }
    for a in &seg.activities {
        println!(
            "A{} {}..{} on {} ({} units)",
            a.index + 1,
            a.start,
            a.end,
            a.ho_target,
            a.ius.len()
        );
    }
    println!("detected boundaries {:?}", seg.boundaries());
    println!("truth boundaries    {:?}", s.truth.boundaries());
    Ok(())
}

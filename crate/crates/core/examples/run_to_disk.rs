//! The file-based driver: write a recording, run every stage, and read
//! back the manifest that lists inputs (with hashes) and artifacts.

use infoplan::pipeline::run_pipeline;
use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::signal_io::{write_jsonl, ConfigFile, PipelineConfig};

fn main() -> infoplan::Result<()> {
    let dir = std::env::temp_dir().join("infoplan-run-to-disk");
    std::fs::create_dir_all(&dir).map_err(|e| infoplan::Error::io(&dir, e))?;

    let s = generate_scenario(
        &ScenarioSpec::new(Template::StirAndPlace, 3),
        &PipelineConfig::default(),
    )?;
    let rec = dir.join("demo.jsonl");
    let file = std::fs::File::create(&rec).map_err(|e| infoplan::Error::io(&rec, e))?;
    write_jsonl(&s.recording, std::io::BufWriter::new(file)).map_err(|e| infoplan::Error::io(&rec, e))?;

    // Overrides take precedence over the config file (none here) and defaults.
    let overrides = ConfigFile {
        mi_epsilon: Some(0.05),
        ..ConfigFile::default()
    };
    let manifest = run_pipeline(&rec, None, None, overrides, &dir.join("out"))?;
    for input in &manifest.inputs {
        println!("input  {} sha256:{}", input.path, &input.sha256[..16]);
    }
    for (stage, path) in &manifest.outputs {
        println!("output {stage:<12} {path}");
    }
    println!("sequences with {:?} leaves", manifest.sequence_leaves);
    Ok(())
}

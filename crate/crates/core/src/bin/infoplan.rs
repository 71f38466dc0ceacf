use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use infoplan::bt::{build_bt, deserialize_plan, serialize_plan, to_dot};
use infoplan::infotheory::{sliding_series, Selector, Statistic};
use infoplan::pipeline::{load_config, run_pipeline};
use infoplan::primitives::{extract_primitives, ObjectConfig};
use infoplan::replay::{
    execute_bt, generate_scenario, placements, verify_relative_poses, ScenarioSpec, Template, WorldState,
    NOISE_GENERATOR,
};
use infoplan::scene_graph::{generate_graphs, GraphSequence};
use infoplan::segmentation::{segment, Segmentation};
use infoplan::signal_io::{load_recording, write_csv, write_jsonl, ConfigFile, ElementId, Pose6D, RecordingFormat};
use infoplan::transform::HomogeneousTransform;
use infoplan::{Error, Result};

/// Compile hand/object pose recordings into behavior-tree plans.
#[derive(Parser)]
#[command(name = "infoplan", version)]
struct Cli {
    /// TOML file with pipeline parameters; flags override its values.
    #[arg(long, global = true, env = "INFOPLAN_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Keep temporary object-object relations (debugging aid).
    #[arg(long, global = true)]
    no_filter: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic demonstration with ground truth.
    Synth(SynthArgs),
    /// Load and validate a recording, rewrite it as JSONL.
    Ingest { recording: PathBuf },
    /// Write windowed statistics as `frame,value` CSV files.
    Analyze(AnalyzeArgs),
    /// Recording to scene-graph sequence (JSONL).
    Graph { recording: PathBuf },
    /// Scene graphs to interaction units and activities.
    Segment {
        graphs: PathBuf,
        /// Also write a per-frame timeline CSV.
        #[arg(long)]
        timeline: bool,
    },
    /// Segmentation to plan document.
    Plan(PlanArgs),
    /// Execute a plan in the kinematic simulator and verify placements.
    Replay(ReplayArgs),
    /// Every stage from recording to plan, plus a run manifest.
    Run {
        recording: PathBuf,
        #[arg(long)]
        objects: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    template: Template,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian position noise per axis, meters.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Drop an element from the recording (repeatable).
    #[arg(long)]
    remove: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct AnalyzeArgs {
    recording: PathBuf,
    /// Element whose position entropy to write (repeatable). Defaults to all.
    #[arg(long)]
    element: Vec<String>,
    /// Pair `a,b` for MI, average distance and its entropy (repeatable).
    /// Defaults to the hand with every object.
    #[arg(long)]
    pair: Vec<String>,
}

#[derive(Args)]
struct PlanArgs {
    segmentation: PathBuf,
    /// Grasp offsets and move-away poses (JSON).
    #[arg(long)]
    objects: Option<PathBuf>,
    /// Also write the per-activity primitive lists.
    #[arg(long)]
    primitives: bool,
    /// Also write a Graphviz rendering of the tree.
    #[arg(long)]
    dot: bool,
}

#[derive(Args)]
struct ReplayArgs {
    plan: PathBuf,
    /// JSON map from element id to initial pose. A `hand` entry sets the
    /// starting effector pose.
    scene: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    position_tolerance: f64,
    #[arg(long, default_value_t = 1e-6)]
    yaw_tolerance: f64,
}

fn overrides(cli: &Cli) -> ConfigFile {
    ConfigFile {
        filter_temporary: cli.no_filter.then_some(false),
        ..ConfigFile::default()
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(create(path)?, value)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let out = &cli.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let config = load_config(cli.config.as_deref(), overrides(cli))?;
    let load = |p: &Path| load_recording(p, RecordingFormat::from_path(p), &config);

    match &cli.command {
        Command::Synth(a) => {
            let mut spec = ScenarioSpec::new(a.template, a.seed).with_noise(a.sigma);
            spec.remove = a.remove.iter().map(|s| ElementId::from(s.as_str())).collect();
            let s = generate_scenario(&spec, &config)?;
            let rec = match a.format {
                Format::Jsonl => {
                    let p = out.join("recording.jsonl");
                    write_jsonl(&s.recording, create(&p)?).map_err(|e| Error::io(&p, e))?;
                    p
                }
                Format::Csv => {
                    let p = out.join("recording.csv");
                    write_csv(&s.recording, create(&p)?)?;
                    p
                }
            };
            let provenance = serde_json::json!({ "generator": NOISE_GENERATOR, "spec": &s.spec });
            write_json(&out.join("scenario.json"), &provenance)?;
            write_json(&out.join("truth.json"), &s.truth)?;
            write_json(&out.join("objects.json"), &s.object_config)?;
            write_json(&out.join("scene.json"), &s.initial)?;
            println!(
                "{}: {} frames, {} elements -> {}",
                a.template,
                s.recording.duration(),
                s.recording.elements().len(),
                rec.display()
            );
        }
        Command::Ingest { recording } => {
            let r = load(recording)?;
            let p = out.join("recording.jsonl");
            write_jsonl(&r, create(&p)?).map_err(|e| Error::io(&p, e))?;
            let ids: Vec<&str> = r.elements().iter().map(|e| e.id.as_str()).collect();
            println!(
                "{} frames at {} Hz, elements: {}",
                r.duration(),
                r.sample_rate(),
                ids.join(", ")
            );
        }
        Command::Analyze(a) => {
            let r = load(&a.recording)?;
            let elements: Vec<ElementId> = if a.element.is_empty() {
                r.elements().iter().map(|e| e.id.clone()).collect()
            } else {
                a.element.iter().map(|s| ElementId::from(s.as_str())).collect()
            };
            let pairs: Vec<(ElementId, ElementId)> = if a.pair.is_empty() {
                r.object_indices()
                    .map(|i| (r.hand().clone(), r.id(i).clone()))
                    .collect()
            } else {
                a.pair
                    .iter()
                    .map(|p| match p.split_once(',') {
                        Some((x, y)) => Ok((ElementId::from(x), ElementId::from(y))),
                        None => Err(Error::Config(format!("pair {p:?} is not of the form a,b"))),
                    })
                    .collect::<Result<_>>()?
            };
            let mut jobs: Vec<(String, Selector, Statistic)> = elements
                .into_iter()
                .map(|e| (format!("entropy_{e}"), Selector::Element(e), Statistic::Entropy))
                .collect();
            for (x, y) in pairs {
                for (name, stat) in [
                    ("mi", Statistic::Mi),
                    ("avg_distance", Statistic::AvgDistance),
                    ("entropy_of_distance", Statistic::EntropyOfDistance),
                ] {
                    jobs.push((format!("{name}_{x}_{y}"), Selector::Pair(x.clone(), y.clone()), stat));
                }
            }
            for (name, sel, stat) in jobs {
                let p = out.join(format!("{name}.csv"));
                sliding_series(&r, &sel, stat, &config)?.write_csv(create(&p)?)?;
                println!("{}", p.display());
            }
        }
        Command::Graph { recording } => {
            let graphs = generate_graphs(&load(recording)?, &config)?;
            graphs.write_jsonl(create(&out.join("graphs.jsonl"))?)?;
            let n = graphs.iter().filter(|(_, g)| g.is_some()).count();
            println!("{n} of {} frames hold an interaction", graphs.len());
        }
        Command::Segment { graphs, timeline } => {
            let g = GraphSequence::read_jsonl(open(graphs)?)?;
            let s = segment(&g, &config)?;
            write_text(&out.join("segmentation.json"), &s.to_json()?)?;
            if *timeline {
                s.write_timeline_csv(create(&out.join("timeline.csv"))?)?;
            }
            println!("{} units, {} activities", s.ius.len(), s.activities.len());
        }
        Command::Plan(a) => {
            let text = std::fs::read_to_string(&a.segmentation).map_err(|e| Error::io(&a.segmentation, e))?;
            let s = Segmentation::from_json(&text)?;
            let objects = match &a.objects {
                Some(p) => ObjectConfig::load(p)?,
                None => ObjectConfig::default(),
            };
            let prims = extract_primitives(&s, &objects)?;
            if a.primitives {
                write_json(&out.join("primitives.json"), &prims)?;
            }
            let root = build_bt(&prims)?;
            write_text(&out.join("plan.json"), &serialize_plan(&root)?)?;
            if a.dot {
                write_text(&out.join("plan.dot"), &to_dot(&root))?;
            }
            for p in &prims {
                let labels: Vec<String> = p.primitives.iter().map(|x| x.label()).collect();
                println!("A{} [{}-{}] {}", p.activity + 1, p.start, p.end, labels.join(" "));
            }
        }
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.plan).map_err(|e| Error::io(&a.plan, e))?;
            let root = deserialize_plan(&text)?;
            let mut poses: BTreeMap<ElementId, Pose6D> = serde_json::from_reader(open(&a.scene)?)?;
            let effector = poses
                .remove(&ElementId::from("hand"))
                .map_or_else(HomogeneousTransform::identity, |p| HomogeneousTransform::from_pose(&p));
            let (world, trace) = execute_bt(&root, WorldState::from_poses(&poses, effector));
            let report = verify_relative_poses(&world, &placements(&root), a.position_tolerance, a.yaw_tolerance);
            write_json(&out.join("trace.json"), &trace)?;
            write_json(&out.join("verification.json"), &report)?;
            for e in trace.entries.iter().filter(|e| e.note.is_some()) {
                println!(
                    "A{} leaf {} {}: {}",
                    e.sequence + 1,
                    e.leaf,
                    e.action,
                    e.note.as_deref().unwrap_or("")
                );
            }
            for p in &report.placements {
                println!(
                    "{} on {}: {:.2e} m, {:.2e} rad {}",
                    p.object,
                    p.target,
                    p.position_error,
                    p.yaw_error,
                    if p.pass { "ok" } else { "FAILED" }
                );
            }
            let executed = trace.status == Some(infoplan::bt::Status::Success);
            if !(executed && report.pass) {
                eprintln!("verification failed (status {:?})", trace.status);
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Run { recording, objects } => {
            let m = run_pipeline(
                recording,
                cli.config.as_deref(),
                objects.as_deref(),
                overrides(cli),
                out,
            )?;
            for (stage, path) in &m.outputs {
                println!("{stage:<10} {path}");
            }
            println!(
                "plan: {} sequence(s), leaves {:?}",
                m.sequence_leaves.len(),
                m.sequence_leaves
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

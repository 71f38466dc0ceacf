//! Detects when the hand manipulates the cup under Gaussian marker noise,
//! once from scene graphs and once by thresholding hand and object speeds
//! (thresholds picked by an ROC sweep over the same runs), and scores
//! both against the true interval by IoU.
//!
//! ```text
//! cargo run --release --example noise_robustness [sigma]
//! ```

use infoplan::baseline::{interval_mask, iou, mi_detect, roc_sweep, velocity_detect, velocity_features};
use infoplan::replay::{generate_scenario, ScenarioSpec, Template, Timing};
use infoplan::scene_graph::generate_graphs;
use infoplan::signal_io::PipelineConfig;

fn main() -> infoplan::Result<()> {
    let sigma: f64 = std::env::args()
        .nth(1)
        .map_or(0.03, |s| s.parse().expect("sigma in meters"));
    let config = PipelineConfig::default();
    let timing = Timing {
        grasp_dwell: 6,
        carry: 150,
        release_dwell: 6,
        ..Timing::default()
    };

    let mut mi = Vec::new();
    let mut samples = Vec::new();
    for seed in 0..20 {
        let mut spec = ScenarioSpec::new(Template::Relocate, seed).with_noise(sigma);
        spec.timing = timing.clone();
        let s = generate_scenario(&spec, &config)?;
        let n = s.recording.duration();
        let truth_interval = &s.truth.manipulation[0];
        let truth = interval_mask(truth_interval.start, truth_interval.end, n);
        let graphs = generate_graphs(&s.recording, &config)?;
        mi.push(iou(&mi_detect(&graphs, &truth_interval.object, n), &truth));
        samples.push((
            velocity_features(&s.recording, &truth_interval.object, &config.axes)?,
            truth,
        ));
    }
    let best = roc_sweep(&samples, 40);
    let velocity: Vec<f64> = samples
        .iter()
        .map(|(f, t)| iou(&velocity_detect(f, &best.thresholds), t))
        .collect();

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("sigma {sigma} m, 20 seeds");
    println!(
        "scene graphs  mean IoU {:.3}, {} seeds >= 0.8",
        mean(&mi),
        mi.iter().filter(|&&x| x >= 0.8).count()
    );
    println!(
        "velocity      mean IoU {:.3} (thresholds {:?})",
        mean(&velocity),
        best.thresholds
    );
    Ok(())
}

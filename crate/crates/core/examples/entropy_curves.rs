//! Windowed entropy of the cup and hand–cup mutual information while the
//! cup is picked up, carried and set down. Entropy rises and falls with the
//! motion; MI is nonzero only while the two move together.

use infoplan::infotheory::{sliding_series, Selector, Statistic, TimeSeries};
use infoplan::replay::{generate_scenario, ScenarioSpec, Template};
use infoplan::signal_io::{ElementId, PipelineConfig};

fn bar(v: f64, scale: f64) -> String {
    "#".repeat((v * scale).round() as usize)
}

fn main() -> infoplan::Result<()> {
    let config = PipelineConfig::default();
    let s = generate_scenario(&ScenarioSpec::new(Template::Relocate, 0), &config)?;
    let cup = ElementId::from("cup");
    let hand = s.recording.hand().clone();

    let h = sliding_series(
        &s.recording,
        &Selector::Element(cup.clone()),
        Statistic::Entropy,
        &config,
    )?;
    let mi = sliding_series(&s.recording, &Selector::Pair(hand, cup), Statistic::Mi, &config)?;
    let carry = &s.truth.manipulation[0];
    println!("carry: frames {}..={}", carry.start, carry.end);

    let peak = |ts: &TimeSeries| ts.values.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let (hs, ms) = (30.0 / peak(&h), 30.0 / peak(&mi));
    println!("{:>5}  {:<32}{}", "frame", "H(cup)", "I(hand;cup)");
    for (t, v) in h.iter().step_by(6) {
        let m = mi.get(t).unwrap_or(0.0);
        let v = v.unwrap_or(0.0);
        println!("{t:>5}  {:<32}{}", bar(v, hs), bar(m, ms));
    }
    Ok(())
}

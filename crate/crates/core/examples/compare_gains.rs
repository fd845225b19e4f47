//! Optimistic, aggressive and empirical gains on the K=15 experiment-B
//! instance with `ε = ε* = 1`.
//!
//! Usage: `cargo run --release --example compare_gains [repetitions]`

use mislid::bench::{gen_experiment_c, repetition_seed, Normalization};
use mislid::mislid::{run, GainMode, MislidConfig};

fn main() -> mislid::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let problem = gen_experiment_c(1, Some([0.35, 0.45]), Normalization::WholeMatrix)?;
    for gain_mode in [GainMode::Optimistic, GainMode::Aggressive, GainMode::Empirical] {
        let config = MislidConfig { gain_mode, ..Default::default() };
        let mut taus = Vec::new();
        let mut errors = 0;
        for r in 0..reps {
            let res = run(&problem.instance, &problem.query, &problem.model, &config, repetition_seed(1, r))?;
            taus.push(res.tau as f64);
            errors += usize::from(!res.correct);
        }
        let mean = taus.iter().sum::<f64>() / reps as f64;
        println!("{gain_mode:?}: mean tau {mean:.0} over {reps} runs, {errors} errors");
    }
    Ok(())
}

//! One run of the sampling algorithm on a small misspecified instance, stepping
//! manually to show the allocation, then the same run through `run`.

use mislid::mislid::{run, AlgorithmState, MislidConfig};
use mislid::{FeatureMatrix, GaussianEnv, Instance, ModelSet, TopMQuery};

fn main() -> mislid::Result<()> {
    let features = FeatureMatrix::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.6, 0.6],
        vec![-0.4, 0.9],
        vec![0.9, -0.3],
        vec![0.2, 0.2],
    ])?;
    let theta = vec![1.0, 0.5];
    let eta = vec![0.0, 0.1, -0.1, 0.0, -0.1, 0.1];
    let mu: Vec<f64> = features.apply(&theta).iter().zip(&eta).map(|(a, e)| a + e).collect();
    let instance = Instance::with_witness(mu.clone(), theta, eta);
    let model = ModelSet::new(features, 0.1, 10.0)?;
    let query = TopMQuery::new(2, 0.05, 6)?;
    let config = MislidConfig::default();
    let seed = 7;

    let mut state = AlgorithmState::new(&model, &query, &config, seed)?;
    let mut env = GaussianEnv::new(instance.clone(), seed);
    while state.answer().is_none() {
        state.step(&mut env, &query, &model, &config)?;
        if state.pulls().is_power_of_two() && state.pulls() >= 16 {
            let counts: Vec<String> = state.stats.counts.iter().map(|c| format!("{c:>5.0}")).collect();
            println!("t = {:>6}  pulls per arm [{}]", state.pulls(), counts.join(" "));
        }
    }
    println!("means {mu:.3?}");
    println!("stopped after {} pulls with answer {:?}", state.pulls(), state.answer().unwrap());

    let result = run(&instance, &query, &model, &config, seed)?;
    println!("run(): tau = {}, answer {:?}, correct = {}", result.tau, result.answer, result.correct);
    Ok(())
}

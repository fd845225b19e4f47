//! The unstructured LUCB baseline against the structured algorithm on a linear
//! instance, where the features should save a large share of the samples.

use mislid::baselines::{lucb_run, BaselineConfig};
use mislid::bench::{gen_experiment_a, repetition_seed, Normalization};
use mislid::mislid::{run, MislidConfig};

fn main() -> mislid::Result<()> {
    let problem = gen_experiment_a(1, 0.0, Some([0.27, 0.29]), Normalization::WholeMatrix)?;
    let reps = 5;
    let (mut lucb, mut structured) = (0.0, 0.0);
    for r in 0..reps {
        let seed = repetition_seed(3, r);
        lucb += lucb_run(&problem.instance, &problem.query, &BaselineConfig::default(), seed)?.tau as f64;
        structured += run(&problem.instance, &problem.query, &problem.model, &MislidConfig::default(), seed)?.tau as f64;
    }
    println!("mean tau over {reps} runs: LUCB {:.0}, structured {:.0}", lucb / reps as f64, structured / reps as f64);
    Ok(())
}

//! How the closest alternative model moves as the deviation budget `ε` grows.
//!
//! At `ε = 0` the alternative must stay linear; once `ε` exceeds the spread of
//! the means every model is admissible and the value matches the unstructured one.

use mislid::geometry::closest_alternative;
use mislid::{top_m_answer, FeatureMatrix, ModelSet};

fn main() -> mislid::Result<()> {
    let features = FeatureMatrix::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.7, 0.7],
        vec![-0.5, 0.8],
        vec![0.3, -0.6],
    ])?;
    let mu = vec![1.0, 0.6, 0.9, 0.1, -0.2];
    let weights = vec![0.3, 0.2, 0.3, 0.1, 0.1];
    let m = 2;
    let answer = top_m_answer(&mu, m)?;
    println!("top-{m} arms of mu: {answer:?}");

    for eps in [0.0, 0.05, 0.1, 0.2, 0.5, 2.0] {
        let model = ModelSet::new(features.clone(), eps, 10.0)?;
        let alt = closest_alternative(&mu, &weights, &answer, &model)?;
        let lambda: Vec<String> = alt.lambda.iter().map(|x| format!("{x:+.3}")).collect();
        println!(
            "eps {eps:<4}  value {:.5}  swaps arm {} with arm {}  lambda [{}]",
            alt.value,
            alt.pair.i,
            alt.pair.j,
            lambda.join(", ")
        );
    }
    Ok(())
}

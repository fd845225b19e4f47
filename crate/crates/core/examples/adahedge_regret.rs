//! AdaHedge against an adversary that keeps moving the best arm, with the
//! measured regret next to its worst-case bound.

use mislid::learner::{adahedge_regret_bound, regret, LearnerKind, LearnerState};

fn main() -> mislid::Result<()> {
    let (arms, horizon, sigma) = (5, 10_000usize, 1.0);
    let mut learner = LearnerState::new(LearnerKind::Adahedge, arms);
    let mut history = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let leader = (t / 700) % arms;
        let gains: Vec<f64> = (0..arms).map(|a| if a == leader { sigma } else { 0.2 * sigma }).collect();
        learner.update(&gains)?;
        history.push(gains);
        if (t + 1) % 2000 == 0 {
            println!(
                "t = {:>5}  regret {:>8.2}  bound {:>8.2}  weights {:.3?}",
                t + 1,
                regret(&learner, &history)?,
                adahedge_regret_bound(sigma, (t + 1) as u64, arms),
                learner.propose().as_slice()
            );
        }
    }
    Ok(())
}

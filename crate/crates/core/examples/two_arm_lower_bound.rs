//! Characteristic time of a two-armed Gaussian bandit against the closed form
//! `Δ²/8`, and the matching sample complexity floor.

use mislid::bounds::{sample_complexity_floor, unstructured_characteristic_value};
use mislid::Instance;

fn main() -> mislid::Result<()> {
    let delta = 0.05;
    println!("{:>6} {:>12} {:>12} {:>14}", "gap", "H", "gap^2/8", "floor(0.05)");
    for gap in [0.1, 0.25, 0.5, 1.0] {
        let instance = Instance::new(vec![gap, 0.0]);
        let saddle = unstructured_characteristic_value(&instance, 1, 1e-9, 5000)?;
        println!(
            "{gap:>6.2} {:>12.6} {:>12.6} {:>14.1}",
            saddle.h_mu,
            gap * gap / 8.0,
            sample_complexity_floor(saddle.h_mu, delta)?
        );
    }
    Ok(())
}

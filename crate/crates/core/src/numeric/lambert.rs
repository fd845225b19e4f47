use crate::error::{Error, Result};

/// `W̄(x)`: the root `y >= 1` of `y - ln y = x`, defined for `x >= 1`.
///
/// Newton iteration on the convex increasing map `y -> y - ln y - x`,
/// started from the upper bracket `x + ln x + min(1/2, 1/sqrt x)` so that
/// iterates decrease monotonically onto the root.
pub fn lambert_w_bar(x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 {
        return Err(Error::Domain(format!("lambert_w_bar needs x >= 1, got {x}")));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut y = x + x.ln() + (1.0 / x.sqrt()).min(0.5);
    for _ in 0..100 {
        let f = y - y.ln() - x;
        let step = f / (1.0 - 1.0 / y);
        y -= step;
        if step.abs() <= 1e-15 * y {
            break;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(x: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - mid.ln() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn known_values() {
        assert_eq!(lambert_w_bar(1.0).unwrap(), 1.0);
        let y = lambert_w_bar(2.0).unwrap();
        assert!((y - bisect(2.0, 2.0, 4.0)).abs() < 1e-12);
        assert!((y - 3.146).abs() < 1e-3);
        let y = lambert_w_bar(50.0).unwrap();
        let lo = 50.0 + 50f64.ln();
        assert!(y >= lo && y <= lo + 1.0 / 50f64.sqrt());
    }

    #[test]
    fn near_one_is_accurate() {
        for x in [1.0 + 1e-12, 1.0 + 1e-6, 1.001, 1.1] {
            let y = lambert_w_bar(x).unwrap();
            assert!(y >= 1.0);
            assert!((y - y.ln() - x).abs() <= 1e-10, "x={x} y={y}");
        }
    }

    #[test]
    fn rejects_domain() {
        assert!(matches!(lambert_w_bar(0.5), Err(Error::Domain(_))));
        assert!(lambert_w_bar(f64::NAN).is_err());
    }

    #[test]
    fn bracketing_and_residual_on_grid() {
        let mut x = 1.0;
        while x <= 1e4 {
            let y = lambert_w_bar(x).unwrap();
            assert!((y - y.ln() - x).abs() <= 1e-10 * x.max(1.0), "residual at {x}");
            let lo = x + x.ln();
            let hi = lo + (1.0 / x.sqrt()).min(0.5);
            assert!(y >= lo - 1e-12 && y <= hi + 1e-12, "bracket at {x}: {y}");
            x *= 1.07;
        }
    }
}

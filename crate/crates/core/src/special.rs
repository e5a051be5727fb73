//! Gamma function via the Lanczos approximation (g = 7, nine coefficients).

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)] // published digits
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x`, using the reflection formula below 1/2.
/// Returns NaN at the poles (non-positive integers).
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn integer_and_half_integer_values() {
        let mut fact = 1.0;
        for n in 1..12 {
            assert!(rel(gamma(n as f64), fact) < 1e-13, "Γ({n})");
            fact *= n as f64;
        }
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.5), 0.5 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(2.5), 0.75 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn reference_values_on_unit_interval() {
        // Γ(1/4), Γ(3/4), Γ(1/3)
        assert!(rel(gamma(0.25), 3.625_609_908_221_908) < 1e-13);
        assert!(rel(gamma(0.75), 1.225_416_702_465_177_6) < 1e-13);
        assert!(rel(gamma(1.0 / 3.0), 2.678_938_534_707_747_6) < 1e-13);
        assert!(rel(gamma(0.1), 9.513_507_698_668_732) < 1e-13);
    }

    #[test]
    fn recurrence_holds_on_needed_range() {
        let mut x = 0.05;
        while x < 3.0 {
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 1e-13, "x = {x}");
            x += 0.0371;
        }
    }

    #[test]
    fn poles_are_nan() {
        assert!(gamma(0.0).is_nan());
        assert!(gamma(-2.0).is_nan());
    }
}

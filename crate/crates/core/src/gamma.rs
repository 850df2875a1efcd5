//! Gamma function helpers: sign-tracked log-gamma over the whole real line
//! and the rising power `k^(a) = Gamma(k + a) / Gamma(k)`.

use crate::error::{Error, Result};

/// Lanczos coefficients, g = 7, n = 9.
const LANCZOS: [f64; 9] = [
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

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.5 && (x - x.round()).abs() < 1e-12 * x.abs().max(1.0) && x.round() <= 0.0
}

fn ln_gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // One reflection keeps the Lanczos argument above 1/2.
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln()
            - ln_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `(ln |Gamma(x)|, sign of Gamma(x))`; errors at the poles 0, -1, -2, ...
pub fn ln_gamma_sign(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole { x });
    }
    if x > 0.0 {
        return Ok((ln_gamma_positive(x), 1.0));
    }
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    let sin_pi_x = (std::f64::consts::PI * x).sin();
    let ln_abs = (std::f64::consts::PI / sin_pi_x.abs()).ln() - ln_gamma_positive(1.0 - x);
    Ok((ln_abs, sin_pi_x.signum()))
}

pub fn gamma(x: f64) -> Result<f64> {
    let (ln_abs, sign) = ln_gamma_sign(x)?;
    Ok(sign * ln_abs.exp())
}

/// Rising power `k^(a) = Gamma(k + a) / Gamma(k)`.
///
/// Poles are handled as limits: a pole in the denominator alone gives 0, a
/// pole in both gives the finite limit `(-1)^(m-n) m! / n!` for `k = -m`,
/// `k + a = -n`; a pole in the numerator alone is a genuine infinity.
pub fn rising_factorial(k: f64, a: f64) -> Result<f64> {
    let num_pole = is_nonpositive_integer(k + a);
    let den_pole = is_nonpositive_integer(k);
    match (num_pole, den_pole) {
        (true, false) => Err(Error::GammaPole { x: k + a }),
        (false, true) => Ok(0.0),
        (true, true) => {
            let m = (-k.round()) as i64;
            let n = (-(k + a).round()) as i64;
            let mut value = 1.0f64;
            // m! / n! with sign (-1)^(m - n)
            if m >= n {
                for i in n + 1..=m {
                    value *= i as f64;
                }
            } else {
                for i in m + 1..=n {
                    value /= i as f64;
                }
            }
            if (m - n).rem_euclid(2) == 1 {
                value = -value;
            }
            Ok(value)
        }
        (false, false) => {
            let (ln_num, sign_num) = ln_gamma_sign(k + a)?;
            let (ln_den, sign_den) = ln_gamma_sign(k)?;
            Ok(sign_num * sign_den * (ln_num - ln_den).exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_of_small_integers_and_half() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-10);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(0.5).unwrap() - sqrt_pi).abs() < 1e-12);
        // Gamma(-0.5) = -2 sqrt(pi)
        assert!((gamma(-0.5).unwrap() + 2.0 * sqrt_pi).abs() < 1e-12);
        // Gamma(-1.5) = 4 sqrt(pi) / 3
        assert!((gamma(-1.5).unwrap() - 4.0 * sqrt_pi / 3.0).abs() < 1e-12);
    }

    #[test]
    fn poles_detected() {
        assert!(matches!(gamma(0.0), Err(Error::GammaPole { .. })));
        assert!(matches!(gamma(-3.0), Err(Error::GammaPole { .. })));
        assert!(gamma(-2.5).is_ok());
    }

    #[test]
    fn recurrence_identity() {
        // Gamma(x + 1) = x Gamma(x) on both sides of zero.
        for &x in &[0.3, 1.7, -0.7, -2.3] {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn rising_power_factorial_values() {
        // 1^(2) = Gamma(3)/Gamma(1) = 2, 2^(3) = Gamma(5)/Gamma(2) = 24.
        assert!((rising_factorial(1.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((rising_factorial(2.0, 3.0).unwrap() - 24.0).abs() < 1e-10);
        // a = 0 is always 1.
        assert!((rising_factorial(4.7, 0.0).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rising_power_pole_cases() {
        // Denominator pole only: Gamma(k) infinite makes the ratio zero.
        assert_eq!(rising_factorial(-2.0, 2.5).unwrap(), 0.0);
        // Numerator pole only: infinite value.
        assert!(matches!(
            rising_factorial(1.0, -2.0),
            Err(Error::GammaPole { .. })
        ));
        // Both poles: lim Gamma(z-n)/Gamma(z-m) at z -> 0 equals
        // (-1)^(m-n) m!/n!; here k = -2, k+a = -1: (-1)^1 2!/1! = -2.
        assert!((rising_factorial(-2.0, 1.0).unwrap() + 2.0).abs() < 1e-12);
    }
}

//! Modified Bessel function K_1 by quadrature of its cosh representation.

use crate::error::{PkError, Result};
use crate::quad;

pub const BESSEL_K1_X_MIN: f64 = 1e-3;
pub const BESSEL_K1_X_MAX: f64 = 50.0;

/// K_1(x) = int_0^inf e^{-x cosh u} cosh u du on [1e-3, 50].
///
/// The integrand is scaled by e^{x} so the quadrature works on
/// e^{-x (cosh u - 1)} cosh u, which starts at 1 and avoids underflow; the
/// truncation point is chosen from the e^{-x sinh u} tail bound.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if !(BESSEL_K1_X_MIN..=BESSEL_K1_X_MAX).contains(&x) {
        return Err(PkError::Bounds(format!(
            "bessel_k1 accepts x in [{BESSEL_K1_X_MIN}, {BESSEL_K1_X_MAX}], got {x}"
        )));
    }
    // cosh(u_max) = 1 + 75/x makes the dropped tail < e^{-75} of the peak
    let u_max = (1.0 + 75.0 / x).acosh();
    let q = quad::adaptive(
        |u: f64| {
            let c = u.cosh();
            (-x * (c - 1.0)).exp() * c
        },
        0.0,
        u_max,
        1e-300,
        1e-12,
    )?;
    Ok((-x).exp() * q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let cases = [
            (0.001, 999.9962381560855534612_f64),
            (0.5, 1.656441120003300893696),
            (1.0, 0.6019072301972345747375),
            (10.0, 0.00001864877345382558459682),
            (50.0, 3.444102226717555612592e-23),
        ];
        for (x, expect) in cases {
            let got = bessel_k1(x).unwrap();
            let rel = (got - expect).abs() / expect;
            assert!(rel < 1e-10, "K1({x}) rel {rel:.2e}");
        }
    }

    #[test]
    fn small_argument_limit() {
        // x K_1(x) -> 1
        let x = 1e-3;
        assert!((x * bessel_k1(x).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_decreasing() {
        let mut prev = f64::INFINITY;
        let mut x = BESSEL_K1_X_MIN;
        while x <= BESSEL_K1_X_MAX {
            let v = bessel_k1(x).unwrap();
            assert!(v < prev);
            prev = v;
            x *= 2.0;
        }
    }

    #[test]
    fn domain_checked() {
        assert!(bessel_k1(1e-4).is_err());
        assert!(bessel_k1(51.0).is_err());
    }
}

//! Hermite function in the probabilists' normalization used throughout this
//! crate: h_0 = 1, h_{-1} is Mill's ratio, and h_{nu+1}(z) = z h_nu(z) - nu
//! h_{nu-1}(z).
//!
//! Values at negative index are Laplace-type integrals
//!
//!   h_{-2q}(z) = Gamma(2q)^{-1} int_0^inf t^{2q-1} e^{-t^2/2 - z t} dt
//!
//! which we evaluate after shifting by the peak of the log-integrand. The
//! recursion itself amplifies the complementary solution like e^{2 z sqrt(m)}
//! as the index descends, so chains deeper than a couple dozen steps lose all
//! precision in doubles; every index here is therefore computed directly from
//! the integral, which stays at machine accuracy down to indices of -400 and
//! beyond. The power series is kept only as a small-z cross-check.

use super::erf::erfcx;
use super::gamma::ln_gamma;
use crate::error::{PkError, Result};
use crate::quad;

/// How a Hermite function value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermiteEvalMethod {
    Series,
    Integral,
    DownwardRecursion,
}

/// A Hermite function value with its evaluation-method tag.
#[derive(Debug, Clone, Copy)]
pub struct HermiteEval {
    pub value: f64,
    pub method: HermiteEvalMethod,
}

pub const HERMITE_Z_MAX: f64 = 40.0;

/// Mill's ratio P(B_1 > x) / phi(x), in scaled form.
pub fn mills_ratio(x: f64) -> Result<f64> {
    if !(x >= 0.0) || x > HERMITE_Z_MAX {
        return Err(PkError::Bounds(format!(
            "mills_ratio needs 0 <= x <= {HERMITE_Z_MAX}, got {x}"
        )));
    }
    Ok((std::f64::consts::PI / 2.0).sqrt() * erfcx(x / std::f64::consts::SQRT_2))
}

/// log of int_0^inf t^{m-1} e^{-t^2/2 - z t} dt for real m >= 1.
fn ln_laplace_integral(m: f64, z: f64) -> Result<f64> {
    debug_assert!(m >= 1.0 && z >= 0.0);
    if m == 1.0 {
        // decreasing integrand starting at 1
        let hi = -z + (z * z + 160.0).sqrt();
        let q = quad::adaptive(|t: f64| (-0.5 * t * t - z * t).exp(), 0.0, hi, 1e-300, 5e-14)?;
        return Ok(q.value.ln());
    }
    let g = |t: f64| (m - 1.0) * t.ln() - 0.5 * t * t - z * t;
    let t_star = 0.5 * (-z + (z * z + 4.0 * (m - 1.0)).sqrt());
    let g_max = g(t_star);
    const DROP: f64 = 42.0;
    // left edge: g is increasing on (0, t_star)
    let mut lo_lo = t_star;
    while g(lo_lo) > g_max - DROP && lo_lo > 1e-280 {
        lo_lo *= 0.5;
    }
    let lo = bisect(|t| g(t) - (g_max - DROP), lo_lo, t_star);
    // right edge: decreasing beyond t_star
    let mut hi_hi = t_star + 1.0;
    while g(hi_hi) > g_max - DROP {
        hi_hi *= 2.0;
    }
    let hi = bisect(|t| g(t) - (g_max - DROP), t_star, hi_hi);
    let q = quad::adaptive(|t: f64| (g(t) - g_max).exp(), lo, hi, 1e-300, 5e-14)?;
    Ok(g_max + q.value.ln())
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    // f(a) and f(b) straddle zero by construction of the callers
    let a_positive = f(a) > 0.0;
    for _ in 0..120 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) > 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// log of h_{-2q}(z) for q > 0, z in [0, HERMITE_Z_MAX].
///
/// This is the workhorse behind the block-count laws, where indices reach
/// -2n and the values underflow doubles long before n = 200.
pub fn ln_hermite_h_neg(q: f64, z: f64) -> Result<f64> {
    if !(q > 0.0) || !(0.0..=HERMITE_Z_MAX).contains(&z) {
        return Err(PkError::Bounds(format!(
            "ln_hermite_h_neg needs q > 0 and 0 <= z <= {HERMITE_Z_MAX}, got q={q}, z={z}"
        )));
    }
    let m = 2.0 * q;
    if m >= 1.0 {
        Ok(ln_laplace_integral(m, z)? - ln_gamma(m))
    } else {
        // t = s^{1/m} removes the t^{m-1} endpoint singularity
        let inv_m = 1.0 / m;
        let f = |s: f64| {
            if s <= 0.0 {
                return 1.0;
            }
            let t = s.powf(inv_m);
            (-0.5 * t * t - z * t).exp()
        };
        // integrand decays once t(s) is past the usual cutoff
        let hi = {
            let t_hi = -z + (z * z + 160.0).sqrt();
            t_hi.powf(m)
        };
        let q15 = quad::adaptive(f, 0.0, hi, 1e-300, 5e-14)?;
        Ok((q15.value * inv_m).ln() - ln_gamma(m))
    }
}

/// Series form of h_{-2q}, kept as an independent cross-check for z <= 1.
pub fn hermite_h_series(q: f64, z: f64) -> Result<f64> {
    if !(q > 0.0) || !(0.0..=1.0).contains(&z) {
        return Err(PkError::Bounds(format!(
            "hermite series cross-check needs q > 0 and z <= 1, got q={q}, z={z}"
        )));
    }
    // split into even and odd parts; each advances by an exact term ratio
    let ln_front = -(2.0f64.ln()) - ln_gamma(2.0 * q);
    let mut even = ln_gamma(q).exp() * 2.0f64.powf(q);
    let mut odd = -z * ln_gamma(q + 0.5).exp() * 2.0f64.powf(q + 0.5);
    let mut sum = even + odd;
    let mut max_term = even.abs().max(odd.abs());
    let mut tiny_run = 0;
    for j in 0..400u32 {
        let jf = j as f64;
        // t_{j+2} = t_j * 2 (q + j/2) z^2 / ((j+1)(j+2)), applied per parity
        let t = if j % 2 == 0 {
            even *= 2.0 * (q + jf / 2.0) * z * z / ((jf + 1.0) * (jf + 2.0));
            even
        } else {
            odd *= 2.0 * (q + jf / 2.0) * z * z / ((jf + 1.0) * (jf + 2.0));
            odd
        };
        sum += t;
        max_term = max_term.max(t.abs());
        if t.abs() < 1e-17 * sum.abs().max(1e-300) {
            tiny_run += 1;
            if tiny_run >= 4 {
                break;
            }
        } else {
            tiny_run = 0;
        }
    }
    if max_term > 1e12 * sum.abs() {
        return Err(PkError::NumericalAccuracy(format!(
            "hermite series cancellation beyond budget at q={q}, z={z}"
        )));
    }
    Ok(ln_front.exp() * sum)
}

/// Hermite function h_nu(z) for nu <= 1, z in [0, HERMITE_Z_MAX].
pub fn hermite_h(nu: f64, z: f64) -> Result<HermiteEval> {
    if !nu.is_finite() || nu > 1.0 || !(0.0..=HERMITE_Z_MAX).contains(&z) {
        return Err(PkError::Bounds(format!(
            "hermite_h accepts nu <= 1 and 0 <= z <= {HERMITE_Z_MAX}, got nu={nu}, z={z}"
        )));
    }
    if nu == 1.0 {
        return Ok(HermiteEval {
            value: z,
            method: HermiteEvalMethod::DownwardRecursion,
        });
    }
    if nu == 0.0 {
        return Ok(HermiteEval {
            value: 1.0,
            method: HermiteEvalMethod::DownwardRecursion,
        });
    }
    if nu == -1.0 {
        return Ok(HermiteEval {
            value: mills_ratio(z)?,
            method: HermiteEvalMethod::DownwardRecursion,
        });
    }
    if nu < 0.0 {
        let ln = ln_hermite_h_neg(-0.5 * nu, z)?;
        if ln < -708.0 {
            return Err(PkError::NumericalAccuracy(format!(
                "h_({nu})({z}) underflows f64; use ln_hermite_h_neg"
            )));
        }
        return Ok(HermiteEval {
            value: ln.exp(),
            method: HermiteEvalMethod::Integral,
        });
    }
    // nu in (0, 1): one step of the recursion on integral-path values
    let h_down1 = hermite_h(nu - 1.0, z)?.value;
    let h_down2 = hermite_h(nu - 2.0, z)?.value;
    Ok(HermiteEval {
        value: z * h_down1 - (nu - 1.0) * h_down2,
        method: HermiteEvalMethod::DownwardRecursion,
    })
}

/// Closed forms for h_{-2}, 2! h_{-3}, 3! h_{-4} in terms of Mill's ratio.
/// Exposed for the identity suite.
pub fn mills_chain(z: f64) -> Result<[f64; 3]> {
    let m = mills_ratio(z)?;
    Ok([
        1.0 - z * m,
        -z + (1.0 + z * z) * m,
        2.0 + z * z - (3.0 * z + z * z * z) * m,
    ])
}

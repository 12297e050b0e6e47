//! EPPF evaluators for every partition family in the crate, prediction
//! rules, block-count laws and chains, power-sum moments, and the generic
//! Laplace-exponent quadrature path.
//!
//! Closed forms are evaluated in log space so the block-count laws remain
//! usable at sample sizes in the hundreds.

use crate::error::{PkError, Result};
use crate::partitions::{index_partitions, Composition};
use crate::quad;
use crate::specfun::{
    gamma, ln_gamma, ln_hermite_h_neg, stable_density, structural_moment,
    structural_moment_quadrature,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Largest n accepted by the Brownian block-count law.
pub const KN_BROWNIAN_MAX_N: u32 = 200;
/// Largest n accepted by the exact unconditional block-count law.
pub const KN_UNCONDITIONAL_MAX_N: u32 = 64;
/// Largest n accepted by the generic Levy quadrature EPPF.
pub const EPPF_QUADRATURE_MAX_N: u32 = 12;
/// Factorial-growth bound on power-sum moments: m * k <= this.
pub const POWER_SUM_MAX_MK: u32 = 24;

/// A parameterization selecting which EPPF / sampler family applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionModel {
    /// One-parameter family with concentration theta > 0.
    Ewens { theta: f64 },
    /// Two-parameter family, 0 < alpha < 1, theta > -alpha.
    TwoParam { alpha: f64, theta: f64 },
    /// Stable(alpha) frequencies conditioned on the total T = t.
    StableConditioned { alpha: f64, t: f64 },
    /// Brownian excursion lengths conditioned on local time lambda;
    /// semantically the alpha = 1/2 slice with t = lambda^{-2}/2.
    BrownianConditioned { lambda: f64 },
    /// Normalized generalized-gamma jumps (Levy density c x^{-a-1} e^{-b x}).
    GeneralizedGamma { alpha: f64, b: f64, c: f64 },
}

impl PartitionModel {
    /// Validate parameters; alpha = 0 routes the two-parameter family to
    /// Ewens, and the open boundary theta = -alpha is rejected.
    pub fn ewens(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(PkError::Bounds(format!("ewens needs theta > 0, got {theta}")));
        }
        Ok(Self::Ewens { theta })
    }

    pub fn two_param(alpha: f64, theta: f64) -> Result<Self> {
        if alpha == 0.0 {
            return Self::ewens(theta);
        }
        if !(alpha > 0.0 && alpha < 1.0) || !(theta > -alpha) || !theta.is_finite() {
            return Err(PkError::Bounds(format!(
                "two-parameter family needs alpha in (0,1) and theta > -alpha, got ({alpha}, {theta})"
            )));
        }
        Ok(Self::TwoParam { alpha, theta })
    }

    pub fn stable_conditioned(alpha: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(t > 0.0) {
            return Err(PkError::Bounds(format!(
                "conditioned stable model needs alpha in (0,1), t > 0, got ({alpha}, {t})"
            )));
        }
        Ok(Self::StableConditioned { alpha, t })
    }

    pub fn brownian_conditioned(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(PkError::Bounds(format!(
                "brownian model needs lambda > 0, got {lambda}"
            )));
        }
        Ok(Self::BrownianConditioned { lambda })
    }

    pub fn generalized_gamma(alpha: f64, b: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(b > 0.0) || !(c > 0.0) {
            return Err(PkError::Bounds(format!(
                "generalized gamma needs alpha in (0,1), b > 0, c > 0, got ({alpha}, {b}, {c})"
            )));
        }
        Ok(Self::GeneralizedGamma { alpha, b, c })
    }

    /// Short machine-readable family tag.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Ewens { .. } => "ewens",
            Self::TwoParam { .. } => "two_param",
            Self::StableConditioned { .. } => "stable_conditioned",
            Self::BrownianConditioned { .. } => "brownian_conditioned",
            Self::GeneralizedGamma { .. } => "generalized_gamma",
        }
    }
}

fn ln_half_rising(m: u32) -> f64 {
    // ln [1/2]_m
    crate::specfun::ln_rising(0.5, m)
}

/// log of the EPPF; None of the paths can represent p = 0, so log space is
/// total on valid inputs.
pub fn ln_eppf(model: &PartitionModel, c: &Composition) -> Result<f64> {
    let n = c.n();
    let k = c.k() as u32;
    match *model {
        PartitionModel::Ewens { theta } => {
            let mut ln = k as f64 * theta.ln() + ln_gamma(theta) - ln_gamma(theta + n as f64);
            for &ni in c.parts() {
                ln += ln_gamma(ni as f64);
            }
            Ok(ln)
        }
        PartitionModel::TwoParam { alpha, theta } => {
            // [theta + alpha]_{k-1; alpha} / [theta + 1]_{n-1} * prod [1-alpha]_{n_i - 1}
            let mut ln = 0.0;
            for j in 1..k {
                ln += (theta + j as f64 * alpha).ln();
            }
            ln -= ln_gamma(theta + n as f64) - ln_gamma(theta + 1.0);
            for &ni in c.parts() {
                ln += ln_gamma(ni as f64 - alpha) - ln_gamma(1.0 - alpha);
            }
            Ok(ln)
        }
        PartitionModel::BrownianConditioned { lambda } => {
            let mut ln = (n - k) as f64 * 2.0f64.ln() + (k as f64 - 1.0) * lambda.ln()
                + ln_h_int(2 * n - k - 1, lambda)?;
            for &ni in c.parts() {
                ln += ln_half_rising(ni - 1);
            }
            Ok(ln)
        }
        PartitionModel::StableConditioned { alpha, t } => {
            let q = n as f64 - 1.0 - k as f64 * alpha + alpha;
            let mu = structural_moment(alpha, q, t)?;
            let mut ln = ln_gamma(1.0 - alpha) - ln_gamma(n as f64 - k as f64 * alpha)
                + (k as f64 - 1.0) * (alpha.ln() - alpha * t.ln())
                + mu.ln();
            for &ni in c.parts() {
                ln += ln_gamma(ni as f64 - alpha) - ln_gamma(1.0 - alpha);
            }
            Ok(ln)
        }
        PartitionModel::GeneralizedGamma { alpha, b, c: rate } => {
            let lm = LevyModel::generalized_gamma(alpha, b, rate)?;
            Ok(eppf_generic_quadrature(&lm, c)?.ln())
        }
    }
}

/// ln h_{-m}(z) extended to m = 0.
fn ln_h_int(m: u32, z: f64) -> Result<f64> {
    if m == 0 {
        Ok(0.0)
    } else {
        ln_hermite_h_neg(m as f64 / 2.0, z)
    }
}

/// p(n_1, ..., n_k) under the model.
///
/// The Ewens and two-parameter closed forms are evaluated as direct products
/// at small n (exact to an ulp or two); larger arguments and the remaining
/// families go through log space.
pub fn eppf(model: &PartitionModel, c: &Composition) -> Result<f64> {
    let n = c.n();
    if n <= 100 {
        match *model {
            PartitionModel::Ewens { theta } => {
                // theta^{k-1} prod (n_i - 1)! / prod_{j=1}^{n-1} (theta + j)
                let mut p = 1.0f64;
                for _ in 1..c.k() {
                    p *= theta;
                }
                for &ni in c.parts() {
                    for j in 1..ni {
                        p *= j as f64;
                    }
                }
                for j in 1..n {
                    p /= theta + j as f64;
                }
                return Ok(p);
            }
            PartitionModel::TwoParam { alpha, theta } => {
                let mut p = 1.0f64;
                for j in 1..c.k() as u32 {
                    p *= theta + j as f64 * alpha;
                }
                for &ni in c.parts() {
                    for j in 1..ni {
                        p *= j as f64 - alpha;
                    }
                }
                for j in 0..n - 1 {
                    p /= theta + 1.0 + j as f64;
                }
                return Ok(p);
            }
            _ => {}
        }
    }
    Ok(ln_eppf(model, c)?.exp())
}

/// EPPF of a conditioned stable model forced through the structural-moment
/// quadrature, regardless of alpha. The independent route behind the
/// Hermite-vs-quadrature agreement checks.
pub fn eppf_stable_quadrature(alpha: f64, t: f64, c: &Composition) -> Result<f64> {
    let n = c.n();
    let k = c.k() as u32;
    let q = n as f64 - 1.0 - k as f64 * alpha + alpha;
    let mu = structural_moment_quadrature(alpha, q, t)?;
    let mut ln = ln_gamma(1.0 - alpha) - ln_gamma(n as f64 - k as f64 * alpha)
        + (k as f64 - 1.0) * (alpha.ln() - alpha * t.ln())
        + mu.ln();
    for &ni in c.parts() {
        ln += ln_gamma(ni as f64 - alpha) - ln_gamma(1.0 - alpha);
    }
    Ok(ln.exp())
}

/// Alternative conditioned-stable form through the normalized convolution
/// g_alpha(q | t) = (Gamma(q) f(t))^{-1} int_0^t f(t-v) v^{q-1} dv.
pub fn eppf_stable_alternative(alpha: f64, t: f64, c: &Composition) -> Result<f64> {
    let n = c.n();
    let k = c.k() as u32;
    let q = n as f64 - k as f64 * alpha;
    let f_t = stable_density(alpha, t)?;
    let (kernel, err) = crate::specfun::stable_kernel_integral(alpha, q - 1.0, t)?;
    if err > 1e-4 * kernel.abs().max(1e-12) {
        return Err(PkError::NumericalAccuracy(format!(
            "convolution kernel error bound {err:.2e} too large at alpha={alpha}, t={t}"
        )));
    }
    // int_0^t f(t-v) v^{q-1} dv = t^q * kernel(q - 1)
    let ln_g = q * t.ln() + kernel.ln() - ln_gamma(q) - f_t.ln();
    let mut ln = k as f64 * alpha.ln() - n as f64 * t.ln() + ln_g;
    for &ni in c.parts() {
        ln += ln_gamma(ni as f64 - alpha) - ln_gamma(1.0 - alpha);
    }
    Ok(ln.exp())
}

/// Exhaustively confirm that the evaluator is symmetric in the composition.
pub fn eppf_symmetric_check(model: &PartitionModel, c: &Composition) -> Result<bool> {
    let reference = eppf(model, c)?;
    let tol = match model {
        PartitionModel::GeneralizedGamma { .. } | PartitionModel::StableConditioned { .. } => 1e-8,
        _ => 1e-12,
    };
    let mut parts = c.parts().to_vec();
    parts.sort_unstable();
    // Heap's algorithm over distinct permutations, capped for large k
    let mut perms: Vec<Vec<u32>> = vec![parts.clone()];
    while next_permutation(&mut parts) {
        perms.push(parts.clone());
        if perms.len() >= 120 {
            break;
        }
    }
    for perm in perms {
        let value = eppf(model, &Composition::new(perm)?)?;
        if (value - reference).abs() > tol * reference.abs().max(1e-300) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn next_permutation(arr: &mut [u32]) -> bool {
    if arr.len() < 2 {
        return false;
    }
    let mut i = arr.len() - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = arr.len() - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}

/// Probabilities of attaching element n+1 to each existing block (entries
/// 1..k) or opening a new one (entry k+1). An empty composition stands for
/// n = 0 and returns the trivial new-block distribution.
pub fn prediction_rule(model: &PartitionModel, c: Option<&Composition>) -> Result<Vec<f64>> {
    let c = match c {
        None => return Ok(vec![1.0]),
        Some(c) => c,
    };
    let n = c.n() as f64;
    let k = c.k();
    match *model {
        PartitionModel::Ewens { theta } => {
            let mut out: Vec<f64> = c.parts().iter().map(|&nj| nj as f64 / (n + theta)).collect();
            out.push(theta / (n + theta));
            Ok(out)
        }
        PartitionModel::TwoParam { alpha, theta } => {
            let mut out: Vec<f64> = c
                .parts()
                .iter()
                .map(|&nj| (nj as f64 - alpha) / (n + theta))
                .collect();
            out.push((k as f64 * alpha + theta) / (n + theta));
            Ok(out)
        }
        PartitionModel::BrownianConditioned { lambda } => {
            let nn = c.n();
            let kk = k as u32;
            let ln_denominator = ln_h_int(2 * nn - kk - 1, lambda)?;
            let ln_join = ln_h_int(2 * nn - kk + 1, lambda)?;
            let ln_new = ln_h_int(2 * nn - kk, lambda)?;
            let mut out: Vec<f64> = c
                .parts()
                .iter()
                .map(|&nj| (2.0 * nj as f64 - 1.0) * (ln_join - ln_denominator).exp())
                .collect();
            out.push(lambda * (ln_new - ln_denominator).exp());
            finish_prediction(out)
        }
        _ => {
            // generic ratios p(..., n_j + 1, ...) / p and p(n_1..n_k, 1) / p
            let base = ln_eppf(model, c)?;
            let mut out = Vec::with_capacity(k + 1);
            for j in 0..k {
                let mut parts = c.parts().to_vec();
                parts[j] += 1;
                out.push((ln_eppf(model, &Composition::new(parts)?)? - base).exp());
            }
            let mut parts = c.parts().to_vec();
            parts.push(1);
            out.push((ln_eppf(model, &Composition::new(parts)?)? - base).exp());
            finish_prediction(out)
        }
    }
}

fn finish_prediction(mut out: Vec<f64>) -> Result<Vec<f64>> {
    let sum: f64 = out.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(PkError::Consistency(format!(
            "prediction probabilities sum to {sum}, expected 1"
        )));
    }
    for p in &mut out {
        *p /= sum;
    }
    Ok(out)
}

/// P(K_n(lambda) = k) for k = 1..n under the Brownian conditioned law.
pub fn kn_distribution_brownian(n: u32, lambda: f64) -> Result<Vec<f64>> {
    if n == 0 || n > KN_BROWNIAN_MAX_N {
        return Err(PkError::Bounds(format!(
            "kn_distribution_brownian accepts n in 1..={KN_BROWNIAN_MAX_N}, got {n}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(PkError::Bounds(format!("lambda must be positive, got {lambda}")));
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let kf = k as f64;
        let ln = ln_gamma(2.0 * nf - kf) + (kf - 1.0) * lambda.ln()
            + ln_h_int(2 * n - k - 1, lambda)?
            - ln_gamma(nf - kf + 1.0)
            - ln_gamma(kf)
            - (nf - kf) * 2.0f64.ln();
        out.push(ln.exp());
    }
    let sum: f64 = out.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(PkError::NumericalAccuracy(format!(
            "block-count law sums to {sum} at n={n}, lambda={lambda}"
        )));
    }
    Ok(out)
}

/// Exact unconditional law of K_n: P(K_n = k) = C(2n-k-1, n-1) 2^{k+1-2n}.
pub fn kn_distribution_unconditional(n: u32) -> Result<Vec<BigRational>> {
    if n == 0 || n > KN_UNCONDITIONAL_MAX_N {
        return Err(PkError::Bounds(format!(
            "kn_distribution_unconditional accepts n in 1..={KN_UNCONDITIONAL_MAX_N}, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let c = binomial(2 * n - k - 1, n - 1);
        let pow = BigInt::one() << (2 * n - k - 1) as usize;
        out.push(BigRational::new(BigInt::from(c), pow));
    }
    let total: BigRational = out.iter().cloned().sum();
    debug_assert!(total == BigRational::one());
    Ok(out)
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One step of the unconditional block-count chain: (stay, up) from state
/// (n, k), exact.
pub fn kn_transition_unconditional(n: u32, k: u32) -> Result<(BigRational, BigRational)> {
    if n == 0 || k == 0 || k > n {
        return Err(PkError::Bounds(format!("invalid chain state (n, k) = ({n}, {k})")));
    }
    let stay = BigRational::new(BigInt::from(2 * n - k), BigInt::from(2 * n));
    let up = BigRational::new(BigInt::from(k), BigInt::from(2 * n));
    Ok((stay, up))
}

/// One step of the conditioned chain: (stay, up) from state (n, k).
pub fn kn_transition_brownian(lambda: f64, n: u32, k: u32) -> Result<(f64, f64)> {
    if n == 0 || k == 0 || k > n {
        return Err(PkError::Bounds(format!("invalid chain state (n, k) = ({n}, {k})")));
    }
    if !(lambda > 0.0) {
        return Err(PkError::Bounds(format!("lambda must be positive, got {lambda}")));
    }
    let ln_denominator = ln_h_int(2 * n - k - 1, lambda)?;
    let stay = (2 * n - k) as f64 * (ln_h_int(2 * n - k + 1, lambda)? - ln_denominator).exp();
    let up = lambda * (ln_h_int(2 * n - k, lambda)? - ln_denominator).exp();
    if (stay + up - 1.0).abs() > 1e-10 {
        return Err(PkError::NumericalAccuracy(format!(
            "conditioned transitions sum to {} at (n, k) = ({n}, {k})",
            stay + up
        )));
    }
    Ok((stay, up))
}

/// Co-transition probabilities shared by every lambda:
/// (P(K_n = k | K_{n+1} = k), P(K_n = k-1 | K_{n+1} = k)), exact.
pub fn kn_cotransition(n: u32, k: u32) -> Result<(BigRational, BigRational)> {
    if n == 0 || k == 0 || k > n + 1 {
        return Err(PkError::Bounds(format!(
            "co-transition needs 1 <= k <= n+1, got (n, k) = ({n}, {k})"
        )));
    }
    let den = BigInt::from(2 * n - k + 1);
    let same = if k <= n {
        BigRational::new(BigInt::from(2 * (n - k + 1)), den.clone())
    } else {
        BigRational::zero()
    };
    let down = BigRational::new(BigInt::from(k - 1), den);
    Ok((same, down))
}

/// E[S_m^k] expanded over ordered compositions of k, calling the EPPF.
pub fn power_sum_moment(model: &PartitionModel, m: u32, k: u32) -> Result<f64> {
    if m == 0 || k == 0 || m * k > POWER_SUM_MAX_MK {
        return Err(PkError::Bounds(format!(
            "power-sum moment needs m, k >= 1 with m*k <= {POWER_SUM_MAX_MK}, got ({m}, {k})"
        )));
    }
    if m == 1 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for j in 1..=k {
        let mut acc = 0.0;
        for comp in ordered_compositions(k, j) {
            let mut ln_multi = ln_gamma(k as f64 + 1.0);
            for &ki in &comp {
                ln_multi -= ln_gamma(ki as f64 + 1.0);
            }
            let parts: Vec<u32> = comp.iter().map(|&ki| m * ki).collect();
            let p = eppf(model, &Composition::new(parts)?)?;
            acc += ln_multi.exp() * p;
        }
        total += acc / ln_gamma(j as f64 + 1.0).exp();
    }
    Ok(total)
}

fn ordered_compositions(total: u32, parts: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: u32, slots: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            if remaining >= 1 {
                current.push(remaining);
                out.push(current.clone());
                current.pop();
            }
            return;
        }
        for v in 1..=(remaining + 1 - slots) {
            current.push(v);
            rec(remaining - v, slots - 1, current, out);
            current.pop();
        }
    }
    if parts >= 1 && total >= parts {
        rec(total, parts, &mut current, &mut out);
    }
    out
}

/// P(Pi_n >= pi) for pi with block sizes `c`: the chance that the sampled
/// partition is coarser, summed over set partitions of the index set.
pub fn prob_coarser(model: &PartitionModel, c: &Composition) -> Result<f64> {
    let k = c.k();
    let mut total = 0.0;
    for blocks in index_partitions(k)? {
        let merged: Vec<u32> = blocks
            .iter()
            .map(|b| b.iter().map(|&i| c.parts()[i]).sum())
            .collect();
        total += eppf(model, &Composition::new(merged)?)?;
    }
    Ok(total)
}

/// A Levy density bundle: rho, the Laplace exponent psi, its derivatives
/// psi_m (signs alternate as (-1)^{m-1}), and optionally the density of the
/// total T. Construction validates the closed forms against quadrature of
/// their defining integrals.
pub struct LevyModel {
    pub rho: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub psi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Signed m-th derivative of psi.
    pub psi_m: Box<dyn Fn(u32, f64) -> f64 + Send + Sync>,
    /// Density of T where available.
    pub f_total: Option<Box<dyn Fn(f64) -> Result<f64> + Send + Sync>>,
    pub label: String,
}

impl LevyModel {
    /// Generalized gamma: rho(x) = c x^{-alpha-1} e^{-b x}; b = 0 is the
    /// stable sub-family.
    pub fn generalized_gamma(alpha: f64, b: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(b >= 0.0) || !(c > 0.0) {
            return Err(PkError::Bounds(format!(
                "generalized gamma Levy model needs alpha in (0,1), b >= 0, c > 0, got ({alpha}, {b}, {c})"
            )));
        }
        let g1a = gamma(1.0 - alpha)?;
        let canonical_stable = b == 0.0 && (c - alpha / g1a).abs() < 1e-12 * (alpha / g1a);
        let f_total: Option<Box<dyn Fn(f64) -> Result<f64> + Send + Sync>> = if canonical_stable {
            Some(Box::new(move |t: f64| stable_density(alpha, t)))
        } else if b > 0.0 && (c - alpha / g1a).abs() < 1e-12 * (alpha / g1a) {
            // exponentially tilted stable total
            Some(Box::new(move |t: f64| {
                Ok(stable_density(alpha, t)? * (b.powf(alpha) - b * t).exp())
            }))
        } else {
            None
        };
        let model = Self {
            rho: Box::new(move |x: f64| c * x.powf(-alpha - 1.0) * (-b * x).exp()),
            psi: Box::new(move |lam: f64| c * g1a / alpha * ((lam + b).powf(alpha) - b.powf(alpha))),
            psi_m: Box::new(move |m: u32, lam: f64| {
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign * c
                    * (ln_gamma(m as f64 - alpha) + (alpha - m as f64) * (lam + b).ln()).exp()
            }),
            f_total,
            label: format!("generalized_gamma(alpha={alpha}, b={b}, c={c})"),
        };
        model.validate()?;
        Ok(model)
    }

    /// Rate-parameterized Ewens family: rho(x) = theta x^{-1} e^{-b x}.
    pub fn ewens_rate(theta: f64, b: f64) -> Result<Self> {
        if !(theta > 0.0) || !(b > 0.0) {
            return Err(PkError::Bounds(format!(
                "ewens Levy model needs theta > 0 and b > 0, got ({theta}, {b})"
            )));
        }
        let model = Self {
            rho: Box::new(move |x: f64| theta / x * (-b * x).exp()),
            psi: Box::new(move |lam: f64| theta * (1.0 + lam / b).ln()),
            psi_m: Box::new(move |m: u32, lam: f64| {
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign * theta * (ln_gamma(m as f64) - m as f64 * (lam + b).ln()).exp()
            }),
            f_total: Some(Box::new(move |t: f64| {
                if t <= 0.0 {
                    return Err(PkError::Bounds(format!("gamma density needs t > 0, got {t}")));
                }
                Ok((theta * b.ln() + (theta - 1.0) * t.ln() - b * t - ln_gamma(theta)).exp())
            })),
            label: format!("ewens_rate(theta={theta}, b={b})"),
        };
        model.validate()?;
        Ok(model)
    }

    /// Check psi and psi_m against quadrature of their defining integrals at
    /// a few sample points.
    fn validate(&self) -> Result<()> {
        for &lam in &[0.5, 1.0, 2.0] {
            let psi_closed = (self.psi)(lam);
            let rho = &self.rho;
            let psi_quad = quad::adaptive_zero_to_inf(
                |x| {
                    if x <= 0.0 {
                        return 0.0;
                    }
                    (-(-lam * x).exp_m1()) * rho(x)
                },
                1e-12,
                1e-11,
            )?;
            if (psi_closed - psi_quad.value).abs() > 1e-9 * psi_closed.abs().max(1.0) {
                return Err(PkError::Consistency(format!(
                    "{}: psi({lam}) = {psi_closed} but quadrature gives {}",
                    self.label, psi_quad.value
                )));
            }
            for m in 1..=3u32 {
                let closed = (self.psi_m)(m, lam);
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                if closed * sign <= 0.0 {
                    return Err(PkError::Consistency(format!(
                        "{}: psi_{m} has the wrong sign",
                        self.label
                    )));
                }
                let quadrature = quad::adaptive_zero_to_inf(
                    |x| {
                        if x <= 0.0 {
                            return 0.0;
                        }
                        x.powi(m as i32) * (-lam * x).exp() * rho(x)
                    },
                    1e-12,
                    1e-11,
                )?;
                if (closed.abs() - quadrature.value).abs() > 1e-9 * closed.abs().max(1.0) {
                    return Err(PkError::Consistency(format!(
                        "{}: |psi_{m}({lam})| = {} but quadrature gives {}",
                        self.label,
                        closed.abs(),
                        quadrature.value
                    )));
                }
            }
        }
        let psi_zero = (self.psi)(0.0);
        if psi_zero.abs() > 1e-12 {
            return Err(PkError::Consistency(format!(
                "{}: psi(0) = {psi_zero}, expected 0",
                self.label
            )));
        }
        Ok(())
    }
}

/// Closed-form Levy bundle for a model whose jumps have one; currently the
/// generalized gamma family (the rate-parameterized Ewens bundle is
/// constructed directly via [`LevyModel::ewens_rate`]).
pub fn levy_model_for(model: &PartitionModel) -> Result<LevyModel> {
    match *model {
        PartitionModel::GeneralizedGamma { alpha, b, c } => {
            LevyModel::generalized_gamma(alpha, b, c)
        }
        _ => Err(PkError::Config(format!(
            "no closed-form Levy bundle for the {} family",
            model.family()
        ))),
    }
}

/// EPPF of the unconditioned model with Levy bundle `lm`:
/// Gamma(n)^{-1} int_0^inf lambda^{n-1} e^{-psi} prod |psi_{n_i}| d lambda.
pub fn eppf_generic_quadrature(lm: &LevyModel, c: &Composition) -> Result<f64> {
    let n = c.n();
    if n > EPPF_QUADRATURE_MAX_N {
        return Err(PkError::Bounds(format!(
            "generic quadrature EPPF accepts n <= {EPPF_QUADRATURE_MAX_N}, got {n}"
        )));
    }
    let parts = c.parts().to_vec();
    let psi = &lm.psi;
    let psi_m = &lm.psi_m;
    let integrand = move |lam: f64| -> f64 {
        if lam <= 0.0 {
            return 0.0;
        }
        let mut ln = (n as f64 - 1.0) * lam.ln() - psi(lam);
        for &ni in &parts {
            ln += psi_m(ni, lam).abs().ln();
        }
        if ln < -740.0 {
            0.0
        } else {
            ln.exp()
        }
    };
    let q = quad::adaptive_zero_to_inf(integrand, 1e-300, 1e-9)?;
    let value = q.value / ln_gamma(n as f64).exp();
    if !(value.is_finite()) || q.abs_error > 1e-6 * q.value.abs().max(1e-12) {
        return Err(PkError::NumericalAccuracy(format!(
            "generic EPPF quadrature unreliable for {} at {c}",
            lm.label
        )));
    }
    Ok(value)
}

/// An EPPF table over all decreasing shapes of n.
pub struct EppfTable {
    pub model: PartitionModel,
    pub n: u32,
    pub entries: Vec<EppfEntry>,
}

pub struct EppfEntry {
    pub shape: Vec<u32>,
    pub count: BigUint,
    pub p: f64,
}

pub fn eppf_table(model: &PartitionModel, n: u32) -> Result<EppfTable> {
    if n == 0 || n > 20 {
        return Err(PkError::Bounds(format!("EPPF tables accept n in 1..=20, got {n}")));
    }
    let mut entries = Vec::new();
    for shape in crate::partitions::decreasing_shapes(n) {
        let count = crate::partitions::count_shape_arrangements(&shape)?;
        let p = eppf(model, &shape)?;
        entries.push(EppfEntry {
            shape: shape.parts().to_vec(),
            count,
            p,
        });
    }
    Ok(EppfTable {
        model: *model,
        n,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{composition_of, enumerate_set_partitions};
    use crate::specfun::mills_ratio;

    fn comp(parts: &[u32]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn ewens_point_values() {
        let m = PartitionModel::ewens(1.0).unwrap();
        // theta = 1, single block of 3: Gamma(1) * 1 * 2! / Gamma(4) = 1/3
        assert!((eppf(&m, &comp(&[3])).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((eppf(&m, &comp(&[1])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_param_point_values() {
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let m = PartitionModel::two_param(alpha, 0.0).unwrap();
            assert!((eppf(&m, &comp(&[2])).unwrap() - (1.0 - alpha)).abs() < 1e-15);
            assert!((eppf(&m, &comp(&[1, 1])).unwrap() - alpha).abs() < 1e-15);
        }
        let m = PartitionModel::two_param(0.5, 0.5).unwrap();
        assert!((eppf(&m, &comp(&[2, 1])).unwrap() - 0.1333333333333333333333).abs() < 1e-15);
        let m = PartitionModel::two_param(0.3, 1.2).unwrap();
        assert!((eppf(&m, &comp(&[3, 1, 1])).unwrap() - 0.02089707167832167832168).abs() < 1e-15);
    }

    #[test]
    fn any_model_p1_is_one() {
        let models = [
            PartitionModel::ewens(2.0).unwrap(),
            PartitionModel::two_param(0.5, 0.5).unwrap(),
            PartitionModel::stable_conditioned(0.5, 1.0).unwrap(),
            PartitionModel::brownian_conditioned(1.0).unwrap(),
            PartitionModel::generalized_gamma(0.5, 1.0, 0.5).unwrap(),
        ];
        for m in &models {
            let tol = if matches!(m, PartitionModel::GeneralizedGamma { .. }) {
                1e-8
            } else {
                1e-12
            };
            assert!(
                (eppf(m, &comp(&[1])).unwrap() - 1.0).abs() < tol,
                "{:?}",
                m.family()
            );
        }
    }

    #[test]
    fn brownian_pair_probability() {
        for lambda in [0.5, 1.0, 2.0] {
            let m = PartitionModel::brownian_conditioned(lambda).unwrap();
            let expect = 1.0 - lambda * mills_ratio(lambda).unwrap();
            assert!((eppf(&m, &comp(&[2])).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn brownian_reference_values() {
        let m = PartitionModel::brownian_conditioned(1.0).unwrap();
        assert!((eppf(&m, &comp(&[2, 1])).unwrap() - 0.1556795424187984715439).abs() < 1e-12);
        let m = PartitionModel::brownian_conditioned(0.5).unwrap();
        assert!((eppf(&m, &comp(&[3, 1])).unwrap() - 0.08583830203562320824661).abs() < 1e-12);
    }

    #[test]
    fn brownian_matches_conditioned_stable_dispatch() {
        // same parameter point through the two tagged families
        for lambda in [0.5f64, 1.0, 2.0] {
            let t = 0.5 / (lambda * lambda);
            let bm = PartitionModel::brownian_conditioned(lambda).unwrap();
            let st = PartitionModel::stable_conditioned(0.5, t).unwrap();
            for c in [comp(&[2]), comp(&[2, 1]), comp(&[3, 2, 1]), comp(&[1, 1, 1, 1])] {
                let a = eppf(&bm, &c).unwrap();
                let b = eppf(&st, &c).unwrap();
                assert!(
                    ((a - b) / a).abs() < 1e-10,
                    "lambda={lambda}, c={c}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn stable_quadrature_route_agrees_with_hermite() {
        for lambda in [0.5f64, 1.0, 2.0] {
            let t = 0.5 / (lambda * lambda);
            let bm = PartitionModel::brownian_conditioned(lambda).unwrap();
            for c in [comp(&[2]), comp(&[3, 1]), comp(&[2, 2, 1])] {
                let hermite = eppf(&bm, &c).unwrap();
                let quadrature = eppf_stable_quadrature(0.5, t, &c).unwrap();
                assert!(
                    ((hermite - quadrature) / hermite).abs() < 1e-6,
                    "lambda={lambda}, c={c}"
                );
                let alternative = eppf_stable_alternative(0.5, t, &c).unwrap();
                assert!(
                    ((hermite - alternative) / hermite).abs() < 1e-6,
                    "alt route, lambda={lambda}, c={c}"
                );
            }
        }
    }

    #[test]
    fn normalization_over_enumerated_partitions() {
        let models = [
            (PartitionModel::ewens(1.0).unwrap(), 1e-9),
            (PartitionModel::two_param(0.5, 0.5).unwrap(), 1e-9),
            (PartitionModel::two_param(0.3, 1.2).unwrap(), 1e-9),
            (PartitionModel::brownian_conditioned(1.0).unwrap(), 1e-9),
        ];
        for (m, tol) in &models {
            for n in [3usize, 5] {
                let mut total = 0.0;
                for p in enumerate_set_partitions(n).unwrap() {
                    total += eppf(m, &composition_of(&p)).unwrap();
                }
                assert!(
                    (total - 1.0).abs() < *tol,
                    "{} n={n}: sum {total}",
                    m.family()
                );
            }
        }
    }

    #[test]
    fn addition_rule_spot_checks() {
        // p(n_1..n_k) = sum_j p(.., n_j+1, ..) + p(n_1..n_k, 1)
        let models = [
            PartitionModel::ewens(2.0).unwrap(),
            PartitionModel::two_param(0.5, 0.5).unwrap(),
            PartitionModel::brownian_conditioned(1.0).unwrap(),
            PartitionModel::stable_conditioned(0.5, 1.0).unwrap(),
        ];
        for m in &models {
            for c in [comp(&[1]), comp(&[2, 1]), comp(&[3, 2])] {
                let lhs = eppf(m, &c).unwrap();
                let mut rhs = 0.0;
                for j in 0..c.k() {
                    let mut parts = c.parts().to_vec();
                    parts[j] += 1;
                    rhs += eppf(m, &comp(&parts)).unwrap();
                }
                let mut parts = c.parts().to_vec();
                parts.push(1);
                rhs += eppf(m, &comp(&parts)).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-9 * lhs.max(1e-12),
                    "{} at {c}: {lhs} vs {rhs}",
                    m.family()
                );
            }
        }
    }

    #[test]
    fn symmetric_check_passes() {
        let m = PartitionModel::two_param(0.5, 0.5).unwrap();
        assert!(eppf_symmetric_check(&m, &comp(&[3, 1])).unwrap());
        let m = PartitionModel::ewens(2.0).unwrap();
        assert!(eppf_symmetric_check(&m, &comp(&[2, 2, 1])).unwrap());
        let m = PartitionModel::generalized_gamma(0.5, 1.0, 1.0).unwrap();
        assert!(eppf_symmetric_check(&m, &comp(&[2, 1])).unwrap());
    }

    #[test]
    fn prediction_rule_two_param() {
        let m = PartitionModel::two_param(0.5, 0.0).unwrap();
        let probs = prediction_rule(&m, Some(&comp(&[2, 1]))).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-15);
        assert!((probs[1] - 1.0 / 6.0).abs() < 1e-15);
        assert!((probs[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn prediction_rule_empty_and_consistency() {
        let m = PartitionModel::brownian_conditioned(1.0).unwrap();
        assert_eq!(prediction_rule(&m, None).unwrap(), vec![1.0]);
        // new-block probability from c = (1) must equal 1 - p(2)/p(1)
        let probs = prediction_rule(&m, Some(&comp(&[1]))).unwrap();
        let p2 = eppf(&m, &comp(&[2])).unwrap();
        assert!((probs[1] - (1.0 - p2)).abs() < 1e-12);
        // and the Hermite form at n = k = 1: lambda h_{-1} / h_0
        let lam = 1.0f64;
        let expect = lam * mills_ratio(lam).unwrap();
        assert!((probs[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn prediction_rule_generic_models_sum_to_one() {
        let models = [
            PartitionModel::stable_conditioned(0.7, 1.0).unwrap(),
            PartitionModel::generalized_gamma(0.5, 1.0, 0.5).unwrap(),
        ];
        for m in &models {
            let probs = prediction_rule(m, Some(&comp(&[2, 1]))).unwrap();
            let sum: f64 = probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12); // renormalized
            assert!(probs.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn kn_brownian_small_cases() {
        // n = 3: (3 h_{-4}, 3 lambda h_{-3}, lambda^2 h_{-2})
        let reference = [
            (0.5, [0.4129538791313749682836, 0.4465916779253365750574, 0.140454442943288456659]),
            (1.0, [0.1886409151624030569123, 0.4670386272563954146316, 0.3443204575812015284561]),
            (2.0, [0.05041539498361868742546, 0.320538439320817098374, 0.6290461656955642142005]),
        ];
        for (lambda, expect) in reference {
            let got = kn_distribution_brownian(3, lambda).unwrap();
            for (g, e) in got.iter().zip(expect.iter()) {
                assert!((g - e).abs() < 1e-10, "lambda={lambda}");
            }
            let sum: f64 = got.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert_eq!(kn_distribution_brownian(1, 1.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn kn_brownian_mean_at_200() {
        // frozen from a 40-digit evaluation of the law
        let law = kn_distribution_brownian(200, 1.0).unwrap();
        let mean: f64 = law.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        assert!(
            (mean - 19.96250413945726875259).abs() < 1e-8,
            "mean {mean}"
        );
    }

    #[test]
    fn kn_unconditional_exact() {
        let law = kn_distribution_unconditional(3).unwrap();
        let expect = [
            BigRational::new(BigInt::from(3), BigInt::from(8)),
            BigRational::new(BigInt::from(3), BigInt::from(8)),
            BigRational::new(BigInt::from(1), BigInt::from(4)),
        ];
        assert_eq!(law, expect);
        let law = kn_distribution_unconditional(2).unwrap();
        assert_eq!(law[0], BigRational::new(BigInt::from(1), BigInt::from(2)));
        // exact normalization at larger n
        let law = kn_distribution_unconditional(40).unwrap();
        let total: BigRational = law.iter().cloned().sum();
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn kn_transitions() {
        let (stay, up) = kn_transition_unconditional(2, 1).unwrap();
        assert_eq!(stay, BigRational::new(BigInt::from(3), BigInt::from(4)));
        assert_eq!(up, BigRational::new(BigInt::from(1), BigInt::from(4)));
        // conditioned chain sums to one through the Hermite recursion
        for lambda in [0.5, 1.0, 2.0] {
            for (n, k) in [(1u32, 1u32), (5, 3), (40, 11)] {
                let (stay, up) = kn_transition_brownian(lambda, n, k).unwrap();
                assert!((stay + up - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kn_cotransitions_exact() {
        let (same, down) = kn_cotransition(1, 1).unwrap();
        assert_eq!(same, BigRational::one());
        assert_eq!(down, BigRational::zero());
        let (same, down) = kn_cotransition(2, 2).unwrap();
        assert_eq!(same, BigRational::new(BigInt::from(2), BigInt::from(3)));
        assert_eq!(down, BigRational::new(BigInt::from(1), BigInt::from(3)));
    }

    #[test]
    fn power_sum_moments() {
        let m = PartitionModel::two_param(0.5, 0.0).unwrap();
        assert_eq!(power_sum_moment(&m, 1, 3).unwrap(), 1.0);
        // E[S_2] = p(2) = 1/2
        assert!((power_sum_moment(&m, 2, 1).unwrap() - 0.5).abs() < 1e-14);
        // Brownian E[S_2^2] = p(4) + p(2,2)
        let bm = PartitionModel::brownian_conditioned(1.0).unwrap();
        let expect = eppf(&bm, &comp(&[4])).unwrap() + eppf(&bm, &comp(&[2, 2])).unwrap();
        assert!((power_sum_moment(&bm, 2, 2).unwrap() - expect).abs() < 1e-12);
        assert!(power_sum_moment(&m, 5, 5).is_err());
    }

    #[test]
    fn coarser_sums_to_one_on_singletons() {
        // c = (1,1): p(2) + p(1,1) = 1; c = (1,1,1): p(3) + 3 p(2,1) + p(1^3) = 1
        let models = [
            PartitionModel::two_param(0.5, 0.0).unwrap(),
            PartitionModel::ewens(1.5).unwrap(),
            PartitionModel::brownian_conditioned(2.0).unwrap(),
        ];
        for m in &models {
            assert!((prob_coarser(m, &comp(&[1, 1])).unwrap() - 1.0).abs() < 1e-12);
            assert!((prob_coarser(m, &comp(&[1, 1, 1])).unwrap() - 1.0).abs() < 1e-11);
            let single = prob_coarser(m, &comp(&[4])).unwrap();
            assert!((single - eppf(m, &comp(&[4])).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn levy_model_validation_and_limits() {
        let gg = LevyModel::generalized_gamma(0.5, 1.0, 1.0).unwrap();
        assert_eq!((gg.psi)(0.0), 0.0);
        // stable limit: psi(lambda) = lambda^alpha
        let alpha = 0.5;
        let c = alpha / gamma(1.0 - alpha).unwrap();
        let stable = LevyModel::generalized_gamma(alpha, 0.0, c).unwrap();
        for lam in [0.5, 1.0, 4.0] {
            assert!(((stable.psi)(lam) - lam.powf(alpha)).abs() < 1e-12);
        }
        // Ewens b=1, theta=1: psi_1(lambda) = 1/(1+lambda)
        let ew = LevyModel::ewens_rate(1.0, 1.0).unwrap();
        assert!(((ew.psi_m)(1, 1.0) - 0.5).abs() < 1e-12);
        assert!(LevyModel::ewens_rate(0.0, 1.0).is_err());
    }

    #[test]
    fn generic_quadrature_reproduces_closed_forms() {
        // Ewens rate form at theta = 1, b = 1: p(2) = 1/2
        let ew = LevyModel::ewens_rate(1.0, 1.0).unwrap();
        let got = eppf_generic_quadrature(&ew, &comp(&[2])).unwrap();
        assert!((got - 0.5).abs() < 1e-7, "got {got}");
        // stable b = 0, alpha = 1/2: p(1,1) = alpha
        let alpha = 0.5;
        let c = alpha / gamma(1.0 - alpha).unwrap();
        let stable = LevyModel::generalized_gamma(alpha, 0.0, c).unwrap();
        let got = eppf_generic_quadrature(&stable, &comp(&[1, 1])).unwrap();
        assert!((got - alpha).abs() < 1e-7, "got {got}");
        let got = eppf_generic_quadrature(&stable, &comp(&[1])).unwrap();
        assert!((got - 1.0).abs() < 1e-7);
    }

    #[test]
    fn gibbs_factorization() {
        // p(c) / prod [1-alpha]_{n_i - 1} depends only on (n, k)
        use std::collections::HashMap;
        for (alpha, theta) in [(0.5f64, 0.5f64), (0.3, 1.2), (0.7, -0.2)] {
            let m = PartitionModel::two_param(alpha, theta).unwrap();
            let mut by_nk: HashMap<(u32, usize), f64> = HashMap::new();
            for n in 1..=8u32 {
                for shape in crate::partitions::decreasing_shapes(n) {
                    let mut ln_w = 0.0;
                    for &ni in shape.parts() {
                        ln_w += ln_gamma(ni as f64 - alpha) - ln_gamma(1.0 - alpha);
                    }
                    let ratio = (ln_eppf(&m, &shape).unwrap() - ln_w).exp();
                    let key = (n, shape.k());
                    match by_nk.get(&key) {
                        None => {
                            by_nk.insert(key, ratio);
                        }
                        Some(&first) => assert!(
                            ((ratio - first) / first).abs() < 1e-12,
                            "(alpha, theta) = ({alpha}, {theta}), (n, k) = {key:?}"
                        ),
                    }
                }
            }
        }
    }

    #[test]
    fn levy_model_for_gg_only() {
        let gg = PartitionModel::generalized_gamma(0.5, 1.0, 1.0).unwrap();
        let lm = levy_model_for(&gg).unwrap();
        assert!((lm.psi)(1.0) > 0.0);
        assert!(levy_model_for(&PartitionModel::ewens(1.0).unwrap()).is_err());
    }

    #[test]
    fn model_constructors_reject_bad_parameters() {
        assert!(PartitionModel::ewens(0.0).is_err());
        assert!(PartitionModel::two_param(0.5, -0.5).is_err());
        assert!(PartitionModel::two_param(1.0, 0.5).is_err());
        assert!(PartitionModel::stable_conditioned(0.5, 0.0).is_err());
        assert!(PartitionModel::brownian_conditioned(0.0).is_err());
        // alpha = 0 routes to Ewens
        let m = PartitionModel::two_param(0.0, 2.0).unwrap();
        assert_eq!(m.family(), "ewens");
    }

    #[test]
    fn eppf_table_shapes() {
        let m = PartitionModel::ewens(1.0).unwrap();
        let table = eppf_table(&m, 4).unwrap();
        assert_eq!(table.entries.len(), 5); // partitions of the integer 4
        let total: f64 = table
            .entries
            .iter()
            .map(|e| e.count.to_f64().unwrap() * e.p)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

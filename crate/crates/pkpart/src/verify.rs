//! The identity and oracle suite: exact enumeration checks, Monte Carlo
//! comparisons, and every closed-form relation the other modules promise,
//! packaged as named, reproducible checks.
//!
//! Statistical checks declare their sample size and use the fixed
//! significance threshold [`P_THRESHOLD`]; seeds are derived from the master
//! seed per check, never retried.

use crate::error::{PkError, Result};
use crate::models::{
    binomial, eppf, eppf_generic_quadrature, eppf_stable_alternative, eppf_stable_quadrature,
    kn_cotransition, kn_distribution_brownian, kn_distribution_unconditional,
    kn_transition_unconditional, LevyModel, PartitionModel,
};
use crate::partitions::{
    composition_of, count_shape_arrangements, decreasing_shapes, enumerate_set_partitions,
    Composition, SetPartition,
};
use crate::quad;
use crate::rng::RandomSource;
use crate::samplers::{
    sample_jump_partition, sample_jumps, sample_pk_deletion, sample_residual_construction,
    sample_tilted_stable_counted, CrpSampler, JumpProcessSpec,
};
use crate::specfun::{
    gamma, gaussian_abs_moment, gaussian_pdf, hermite_h, ln_gamma, ln_gamma_signed, mills_chain,
    stable_density, structural_cdf_brownian, structural_density_invgauss, structural_moment,
    structural_quantile_brownian,
};
use crate::stats::{chi_square_gof, ks_two_sample};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// Fixed significance threshold for every statistical check.
pub const P_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NumericalError,
}

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub status: CheckStatus,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    pub grid: String,
    pub runtime: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Fast,
    Full,
}

impl Tier {
    pub fn parse(s: &str) -> Result<Tier> {
        match s {
            "fast" => Ok(Tier::Fast),
            "full" => Ok(Tier::Full),
            _ => Err(PkError::Config(format!("unknown tier '{s}'"))),
        }
    }
}

/// Residual accumulator: tracks worst absolute and relative deviations
/// against a tolerance on the relative (or absolute, whichever is larger
/// scaled) side.
struct Residuals {
    max_abs: f64,
    max_rel: f64,
    tol: f64,
    ok: bool,
}

impl Residuals {
    fn new(tol: f64) -> Self {
        Self {
            max_abs: 0.0,
            max_rel: 0.0,
            tol,
            ok: true,
        }
    }

    /// Record |got - want| with scale max(1, |want|) for the pass decision.
    fn record(&mut self, got: f64, want: f64) {
        let abs = (got - want).abs();
        let rel = abs / want.abs().max(1e-300);
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(rel);
        if abs > self.tol * want.abs().max(1.0) {
            self.ok = false;
        }
    }

    /// Record with a strict relative criterion.
    fn record_rel(&mut self, got: f64, want: f64) {
        let abs = (got - want).abs();
        let rel = abs / want.abs().max(1e-300);
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(rel);
        if rel > self.tol {
            self.ok = false;
        }
    }

    fn fail(&mut self) {
        self.ok = false;
    }

    fn into_report(self, name: &str, grid: String, started: Instant) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            status: if self.ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: self.max_abs,
            max_rel_residual: self.max_rel,
            grid,
            runtime: started.elapsed(),
        }
    }
}

fn error_report(name: &str, grid: String, started: Instant, err: &PkError) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        status: CheckStatus::NumericalError,
        max_abs_residual: f64::NAN,
        max_rel_residual: f64::NAN,
        grid: format!("{grid}; error: {err}"),
        runtime: started.elapsed(),
    }
}

/// Run a closure that returns `Residuals`, mapping numerical errors to the
/// dedicated status instead of a panic.
fn run_check<F>(name: &str, grid: &str, body: F) -> CheckReport
where
    F: FnOnce() -> Result<Residuals>,
{
    let started = Instant::now();
    match body() {
        Ok(res) => res.into_report(name, grid.to_string(), started),
        Err(e) => error_report(name, grid.to_string(), started, &e),
    }
}

/// Sum an EPPF over every set partition of {1..n}. The closure sees the
/// composition in appearance order; results are memoized per sorted shape.
pub fn sum_over_partitions<F>(n: usize, mut f: F) -> Result<f64>
where
    F: FnMut(&Composition) -> Result<f64>,
{
    let mut memo: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut total = 0.0;
    for p in enumerate_set_partitions(n)? {
        let c = composition_of(&p);
        let key = c.sorted_desc().parts().to_vec();
        let value = match memo.get(&key) {
            Some(&v) => v,
            None => {
                let v = f(&c)?;
                memo.insert(key, v);
                v
            }
        };
        total += value;
    }
    Ok(total)
}

fn quadrature_path(model: &PartitionModel) -> bool {
    matches!(
        model,
        PartitionModel::StableConditioned { alpha, .. } if *alpha != 0.5
    ) || matches!(model, PartitionModel::GeneralizedGamma { .. })
}

/// Normalization: the EPPF sums to one over all partitions of {1..n}.
pub fn check_normalization(model: &PartitionModel, n_max: usize) -> CheckReport {
    let name = format!("normalization-{}", model_slug(model));
    let tol = if quadrature_path(model) { 1e-6 } else { 1e-9 };
    run_check(&name, &format!("n <= {n_max}"), || {
        let mut res = Residuals::new(tol);
        for n in 1..=n_max {
            let total = sum_over_partitions(n, |c| eppf(model, c))?;
            res.record(total, 1.0);
        }
        Ok(res)
    })
}

/// Addition rules over all compositions with n <= n_max.
pub fn check_addition_rules(model: &PartitionModel, n_max: u32) -> CheckReport {
    let name = format!("addition-rules-{}", model_slug(model));
    let tol = if quadrature_path(model) { 1e-6 } else { 1e-9 };
    run_check(&name, &format!("compositions with n <= {n_max}"), || {
        let mut memo: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut eval = |parts: &[u32]| -> Result<f64> {
            let mut key = parts.to_vec();
            key.sort_unstable_by(|a, b| b.cmp(a));
            if let Some(&v) = memo.get(&key) {
                return Ok(v);
            }
            let v = eppf(model, &Composition::new(key.clone())?)?;
            memo.insert(key, v);
            Ok(v)
        };
        let mut res = Residuals::new(tol);
        for n in 1..=n_max {
            for shape in decreasing_shapes(n) {
                let lhs = eval(shape.parts())?;
                let mut rhs = 0.0;
                for j in 0..shape.k() {
                    let mut parts = shape.parts().to_vec();
                    parts[j] += 1;
                    rhs += eval(&parts)?;
                }
                let mut parts = shape.parts().to_vec();
                parts.push(1);
                rhs += eval(&parts)?;
                res.record(lhs, rhs);
            }
        }
        Ok(res)
    })
}

fn model_slug(model: &PartitionModel) -> String {
    match model {
        PartitionModel::Ewens { theta } => format!("ewens-{theta}"),
        PartitionModel::TwoParam { alpha, theta } => format!("pd-{alpha}-{theta}"),
        PartitionModel::StableConditioned { alpha, t } => format!("stable-{alpha}-{t}"),
        PartitionModel::BrownianConditioned { lambda } => format!("brownian-{lambda}"),
        PartitionModel::GeneralizedGamma { alpha, b, c } => format!("gg-{alpha}-{b}-{c}"),
    }
    .replace('.', "")
}

/// Structural moment mu(q) of a model, through its family's own machinery.
pub fn structural_moment_for(model: &PartitionModel, q: f64) -> Result<f64> {
    match *model {
        PartitionModel::Ewens { theta } => {
            // beta(1, theta) moments
            Ok((ln_gamma(1.0 + q) + ln_gamma(1.0 + theta) - ln_gamma(1.0 + q + theta)).exp())
        }
        PartitionModel::TwoParam { alpha, theta } => Ok((ln_gamma(1.0 - alpha + q)
            + ln_gamma(1.0 + theta)
            - ln_gamma(1.0 + theta + q)
            - ln_gamma(1.0 - alpha))
        .exp()),
        PartitionModel::BrownianConditioned { lambda } => {
            structural_moment(0.5, q, 0.5 / (lambda * lambda))
        }
        PartitionModel::StableConditioned { alpha, t } => structural_moment(alpha, q, t),
        PartitionModel::GeneralizedGamma { alpha, b, c } => {
            if alpha != 0.5 {
                return Err(PkError::Config(
                    "structural moments of the generalized gamma family are wired for alpha = 1/2"
                        .into(),
                ));
            }
            let canonical = alpha / gamma(1.0 - alpha)?;
            if (c - canonical).abs() > 1e-12 * canonical {
                return Err(PkError::Config(
                    "structural moments need the canonical stable normalization".into(),
                ));
            }
            // quartic pullback softens the p^{-1/2} endpoint
            let q15 = quad::adaptive(
                |u: f64| {
                    let p = u * u * u * u;
                    if p <= 0.0 || p >= 1.0 {
                        return 0.0;
                    }
                    p.powf(q) * structural_density_invgauss(b, p).unwrap_or(0.0)
                        * 4.0 * u * u * u
                },
                0.0,
                1.0,
                1e-12,
                1e-10,
            )?;
            Ok(q15.value)
        }
    }
}

/// First consistency relations: p(1) = 1, the n <= 3 addition chain, and
/// the structural-moment identities p(n) = mu(n-1), p(1,1) = 1 - mu(1),
/// p(2,1) = mu(1) - mu(2), p(1,1,1) = 1 - 3 mu(1) + 2 mu(2).
pub fn check_consistency_moments(model: &PartitionModel) -> CheckReport {
    let name = format!("cons-moments-{}", model_slug(model));
    let tol = if quadrature_path(model) || matches!(model, PartitionModel::GeneralizedGamma { .. })
    {
        1e-6
    } else {
        1e-11
    };
    run_check(&name, "p(1), addition chain n <= 3, moment forms", || {
        let mut res = Residuals::new(tol);
        let p = |parts: &[u32]| -> Result<f64> { eppf(model, &Composition::new(parts.to_vec())?) };
        let p1 = p(&[1])?;
        let p2 = p(&[2])?;
        let p11 = p(&[1, 1])?;
        let p3 = p(&[3])?;
        let p21 = p(&[2, 1])?;
        let p111 = p(&[1, 1, 1])?;
        res.record(p1, 1.0);
        res.record(p2 + p11, 1.0);
        res.record(p3 + p21, p2);
        res.record(2.0 * p21 + p111, p11);
        let mu1 = structural_moment_for(model, 1.0)?;
        let mu2 = structural_moment_for(model, 2.0)?;
        res.record(p2, mu1);
        res.record(p3, mu2);
        res.record(p11, 1.0 - mu1);
        res.record(p21, mu1 - mu2);
        res.record(p111, 1.0 - 3.0 * mu1 + 2.0 * mu2);
        for n in [1u32, 4] {
            res.record(p(&[n])?, structural_moment_for(model, n as f64 - 1.0)?);
        }
        Ok(res)
    })
}

/// Point values fixed by the two-parameter family at theta = 0 and by the
/// three-sample Brownian block-count formulas.
pub fn check_point_values() -> CheckReport {
    run_check(
        "point-values",
        "pd(alpha,0) pair probabilities; K_3 formulas at lambda in {0.5,1,2}",
        || {
            let mut res = Residuals::new(1e-10);
            for i in 1..=9 {
                let alpha = i as f64 / 10.0;
                let m = PartitionModel::two_param(alpha, 0.0)?;
                let strict = (eppf(&m, &Composition::new(vec![2])?)? - (1.0 - alpha)).abs();
                let strict2 = (eppf(&m, &Composition::new(vec![1, 1])?)? - alpha).abs();
                // machine precision: a few ulps
                if strict > 1e-15 || strict2 > 1e-15 {
                    res.fail();
                }
                res.record(strict + 1.0, 1.0);
            }
            for lambda in [0.5f64, 1.0, 2.0] {
                let law = kn_distribution_brownian(3, lambda)?;
                let chain = mills_chain(lambda)?;
                let h4 = chain[2] / 6.0;
                let h3 = chain[1] / 2.0;
                let h2 = chain[0];
                res.record(law[0], 3.0 * h4);
                res.record(law[1], 3.0 * lambda * h3);
                res.record(law[2], lambda * lambda * h2);
                res.record(law.iter().sum::<f64>(), 1.0);
            }
            Ok(res)
        },
    )
}

/// Moment recursion of the conditioned stable structural distribution.
pub fn check_moment_recursion(alpha: f64, t: f64, n_max: u32, k_max: u32) -> CheckReport {
    let name = format!("moment-recursion-{}", format!("{alpha}-{t}").replace('.', ""));
    let tol = if alpha == 0.5 { 1e-8 } else { 1e-6 };
    run_check(&name, &format!("1 <= k <= n <= {n_max}, k <= {k_max}"), || {
        let mut res = Residuals::new(tol);
        for n in 1..=n_max {
            for k in 1..=n.min(k_max) {
                let nf = n as f64;
                let kf = k as f64;
                let lhs = structural_moment(alpha, nf - 1.0 - kf * alpha + alpha, t)?;
                let a = structural_moment(alpha, nf - kf * alpha + alpha, t)?;
                let b = structural_moment(alpha, nf - kf * alpha, t)?;
                let coeff = (ln_gamma(nf - kf * alpha) - ln_gamma(nf + 1.0 - kf * alpha - alpha))
                    .exp()
                    * alpha
                    * t.powf(-alpha);
                res.record(lhs, a + coeff * b);
            }
        }
        Ok(res)
    })
}

/// Weighted Gaussian integrals of the Hermite function:
/// 2 int lambda^{2 theta} h_{-2q}(lambda) phi(lambda) d lambda
///   = 2^{-theta-q} Gamma(2 theta + 1) / Gamma(q + theta + 1).
pub fn check_hermite_weighted_gaussian() -> CheckReport {
    run_check(
        "hermite-weighted-gaussian",
        "theta x q in {0.5,1,2} x {0.25, 0.5, 0.75, 1.5}",
        || {
            let mut res = Residuals::new(1e-8);
            for &theta in &[0.5f64, 1.0, 2.0] {
                for &q in &[0.25f64, 0.5, 0.75, 1.5] {
                    let integral = quad::adaptive(
                        |lam: f64| {
                            if lam <= 0.0 {
                                return 0.0;
                            }
                            lam.powf(2.0 * theta)
                                * hermite_h(-2.0 * q, lam).map(|h| h.value).unwrap_or(0.0)
                                * gaussian_pdf(lam)
                        },
                        0.0,
                        14.0,
                        1e-12,
                        1e-10,
                    )?;
                    let lhs = 2.0 * integral.value;
                    let rhs = (-(theta + q) * 2.0f64.ln() + ln_gamma(2.0 * theta + 1.0)
                        - ln_gamma(q + theta + 1.0))
                    .exp();
                    res.record_rel(lhs, rhs);
                }
            }
            Ok(res)
        },
    )
}

/// Symmetric gamma-series identity: sum_j Gamma(q + j/2) Gamma(r + j/2)
/// (-2)^j / j! = 2^{2-2q-2r} sqrt(pi) Gamma(2q) Gamma(2r) / Gamma(q+r+1/2),
/// absolutely convergent for q + r + 1/2 < -1. The constant follows from
/// integrating the Hermite series against the weighted Gaussian identity
/// term by term and reduces to 4 sqrt(pi) when q + r = 0.
pub fn check_gamma_series_symmetric(q: f64, r: f64) -> CheckReport {
    let name = format!("gamma-series-symmetric-{}", format!("{q}-{r}").replace('.', ""));
    run_check(&name, format!("(q, r) = ({q}, {r})").as_str(), || {
        if q + r + 0.5 >= -1.0 {
            return Err(PkError::Bounds(format!(
                "series needs q + r + 1/2 < -1, got {}",
                q + r + 0.5
            )));
        }
        let mut res = Residuals::new(1e-8);
        // per-parity term recurrences: t_{j+2} = t_j 4 (q + j/2)(r + j/2) / ((j+1)(j+2))
        let (ln_a, sg_a) = ln_gamma_signed(q)?;
        let (ln_b, sg_b) = ln_gamma_signed(r)?;
        let mut even = sg_a * sg_b * (ln_a + ln_b).exp();
        let (ln_a, sg_a) = ln_gamma_signed(q + 0.5)?;
        let (ln_b, sg_b) = ln_gamma_signed(r + 0.5)?;
        let mut odd = -2.0 * sg_a * sg_b * (ln_a + ln_b).exp();
        let mut sum = even + odd;
        let mut comp = 0.0f64;
        for j in 0..40_000u32 {
            let jf = j as f64;
            let t = if j % 2 == 0 {
                even *= 4.0 * (q + jf / 2.0) * (r + jf / 2.0) / ((jf + 1.0) * (jf + 2.0));
                even
            } else {
                odd *= 4.0 * (q + jf / 2.0) * (r + jf / 2.0) / ((jf + 1.0) * (jf + 2.0));
                odd
            };
            let y = t - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        let (ln_n1, s1) = ln_gamma_signed(2.0 * q)?;
        let (ln_n2, s2) = ln_gamma_signed(2.0 * r)?;
        let (ln_d, s3) = ln_gamma_signed(q + r + 0.5)?;
        let front = (2.0 - 2.0 * q - 2.0 * r) * 2.0f64.ln();
        let rhs =
            std::f64::consts::PI.sqrt() * s1 * s2 * s3 * (front + ln_n1 + ln_n2 - ln_d).exp();
        res.record_rel(sum, rhs);
        Ok(res)
    })
}

fn half_rising_rational(m: u32) -> BigRational {
    // [1/2]_m = (2m)! / (4^m m!)
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 1..=m {
        num *= BigInt::from(2 * j - 1);
        den *= BigInt::from(2);
    }
    BigRational::new(num, den)
}

fn factorial_int(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Exact shape-count identity behind the unconditional block-count law:
/// sum over decreasing shapes of #(shape) prod [1/2]_{n_i - 1}
///   = C(2n-k-1, n-1) Gamma(n)/Gamma(k) 2^{2k-2n}, in rationals.
pub fn check_hfiden(n_max: u32) -> CheckReport {
    run_check("hfiden", &format!("all (n, k), n <= {n_max}"), || {
        let mut res = Residuals::new(0.0);
        for n in 1..=n_max {
            let mut by_k: HashMap<u32, BigRational> = HashMap::new();
            for shape in decreasing_shapes(n) {
                let count = count_shape_arrangements(&shape)?;
                let mut term = BigRational::from_integer(BigInt::from(count));
                for &ni in shape.parts() {
                    term *= half_rising_rational(ni - 1);
                }
                *by_k.entry(shape.k() as u32).or_insert_with(BigRational::zero) += term;
            }
            for (k, lhs) in by_k {
                let rhs = BigRational::from_integer(BigInt::from(binomial(2 * n - k - 1, n - 1)))
                    * BigRational::from_integer(factorial_int(n - 1))
                    / BigRational::from_integer(factorial_int(k - 1))
                    * BigRational::new(BigInt::one(), BigInt::one() << (2 * (n - k)) as usize);
                if lhs != rhs {
                    res.fail();
                    res.max_abs = res
                        .max_abs
                        .max((lhs.clone() - rhs.clone()).abs().to_f64().unwrap_or(f64::NAN));
                }
            }
        }
        Ok(res)
    })
}

// dense polynomial helpers over rationals, ascending powers
fn poly_mul_linear(p: &[BigRational], shift: BigRational) -> Vec<BigRational> {
    // p(x) * (x + shift)
    let mut out = vec![BigRational::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c.clone();
        out[i] += c * shift.clone();
    }
    out
}

fn rising_poly(shift: BigRational, m: u32) -> Vec<BigRational> {
    // prod_{i=0}^{m-1} (x + shift + i)
    let mut p = vec![BigRational::one()];
    for i in 0..m {
        p = poly_mul_linear(&p, shift.clone() + BigRational::from_integer(BigInt::from(i)));
    }
    p
}

fn falling_poly(shift: BigRational, m: u32) -> Vec<BigRational> {
    // prod_{i=0}^{m-1} (x + shift - i)
    let mut p = vec![BigRational::one()];
    for i in 0..m {
        p = poly_mul_linear(&p, shift.clone() - BigRational::from_integer(BigInt::from(i)));
    }
    p
}

fn poly_add_scaled(acc: &mut Vec<BigRational>, p: &[BigRational], scale: BigRational) {
    if acc.len() < p.len() {
        acc.resize(p.len(), BigRational::zero());
    }
    for (i, c) in p.iter().enumerate() {
        acc[i] += c * scale.clone();
    }
}

fn hermite_poly_coeff(n: u32, k: u32) -> BigRational {
    // h_{n,k} = (-1)^k C(n, 2k) (2k)! / (2^k k!)
    let sign = if k.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let c = BigInt::from(binomial(n, 2 * k));
    let num = sign * c * factorial_int(2 * k);
    let den = (BigInt::one() << k as usize) * factorial_int(k);
    BigRational::new(num, den)
}

/// Exact polynomial identities tying Hermite coefficients to rising and
/// falling factorials:
///   sum_k h_{2m,k} 2^{-k} [x + 1/2]_{m-k} = (x)_m
///   sum_k h_{2m+1,k} 2^{-k} [x + 1]_{m-k} = (x - 1/2)_m.
pub fn check_hermite_stirling(m_max: u32) -> CheckReport {
    run_check("hermite-stirling", &format!("m <= {m_max}, both parities"), || {
        let mut res = Residuals::new(0.0);
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for m in 0..=m_max {
            // even family
            let mut lhs: Vec<BigRational> = Vec::new();
            for k in 0..=m {
                let coeff = hermite_poly_coeff(2 * m, k)
                    * BigRational::new(BigInt::one(), BigInt::one() << k as usize);
                poly_add_scaled(&mut lhs, &rising_poly(half.clone(), m - k), coeff);
            }
            let rhs = falling_poly(BigRational::zero(), m);
            if normalize_poly(lhs) != normalize_poly(rhs) {
                res.fail();
            }
            // odd family
            let mut lhs: Vec<BigRational> = Vec::new();
            for k in 0..=m {
                let coeff = hermite_poly_coeff(2 * m + 1, k)
                    * BigRational::new(BigInt::one(), BigInt::one() << k as usize);
                poly_add_scaled(&mut lhs, &rising_poly(BigRational::one(), m - k), coeff);
            }
            let rhs = falling_poly(-half.clone(), m);
            if normalize_poly(lhs) != normalize_poly(rhs) {
                res.fail();
            }
        }
        Ok(res)
    })
}

fn normalize_poly(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

/// Gamma-mixture route to the structural moment:
/// mu(q || lambda) = E exp(-lambda sqrt(2 Gamma_q)).
pub fn check_gamma_laplace_moment() -> CheckReport {
    run_check(
        "gamma-laplace-moment",
        "q x lambda in {0.5,1,2}^2",
        || {
            let mut res = Residuals::new(1e-7);
            for &q in &[0.5f64, 1.0, 2.0] {
                for &lambda in &[0.5f64, 1.0, 2.0] {
                    let gamma_route = quad::adaptive_zero_to_inf(
                        |t: f64| {
                            if t <= 0.0 {
                                return 0.0;
                            }
                            (-lambda * (2.0 * t).sqrt()).exp()
                                * ((q - 1.0) * t.ln() - t - ln_gamma(q)).exp()
                        },
                        1e-13,
                        1e-11,
                    )?;
                    let hermite_route =
                        gaussian_abs_moment(q)? * hermite_h(-2.0 * q, lambda)?.value;
                    res.record_rel(gamma_route.value, hermite_route);
                }
            }
            Ok(res)
        },
    )
}

/// Hermite three-term recursion residual on a (nu, z) grid.
pub fn check_hermite_recursion() -> CheckReport {
    run_check(
        "hermite-recursion",
        "nu in [-6, 0] step 1/2, z in [0, 5] step 1/4",
        || {
            let mut res = Residuals::new(1e-10);
            let mut nu = -6.0f64;
            while nu <= 0.0 {
                for iz in 0..=20 {
                    let z = iz as f64 * 0.25;
                    let up = hermite_h(nu + 1.0, z)?.value;
                    let mid = hermite_h(nu, z)?.value;
                    let dn = hermite_h(nu - 1.0, z)?.value;
                    let resid = (up - z * mid + nu * dn).abs();
                    res.max_abs = res.max_abs.max(resid);
                    res.max_rel = res.max_rel.max(resid / up.abs().max(1.0));
                    if resid > 1e-10 * up.abs().max(1.0) {
                        res.fail();
                    }
                }
                nu += 0.5;
            }
            Ok(res)
        },
    )
}

/// Mill's-ratio closed forms for h_{-2}, 2! h_{-3}, 3! h_{-4}.
pub fn check_mills_chain() -> CheckReport {
    run_check("mills-chain", "z in [0, 5] step 1/4", || {
        let mut res = Residuals::new(1e-10);
        for iz in 0..=20 {
            let z = iz as f64 * 0.25;
            let chain = mills_chain(z)?;
            res.record(chain[0], hermite_h(-2.0, z)?.value);
            res.record(chain[1], 2.0 * hermite_h(-3.0, z)?.value);
            res.record(chain[2], 6.0 * hermite_h(-4.0, z)?.value);
        }
        Ok(res)
    })
}

/// Closed form vs series for the half-stable density.
pub fn check_halfdens_series() -> CheckReport {
    run_check("halfdens-series", "t in [0.5, 10] step 1/4", || {
        let mut res = Residuals::new(1e-8);
        let mut t = 0.5;
        while t <= 10.0 {
            let series = crate::specfun::stable_density_series(0.5, t)?;
            let closed = crate::specfun::stable_density_half(t);
            res.record_rel(series, closed);
            t += 0.25;
        }
        Ok(res)
    })
}

/// Brownian Hermite EPPF against the conditioned-stable quadrature path and
/// the convolution form, over all compositions with n <= n_max.
pub fn check_brownian_stable_agreement(n_max: u32) -> CheckReport {
    run_check(
        "brownian-stable-agreement",
        &format!("lambda in {{0.5, 1, 2}}, shapes with n <= {n_max}"),
        || {
            let mut res = Residuals::new(1e-6);
            for &lambda in &[0.5f64, 1.0, 2.0] {
                let t = 0.5 / (lambda * lambda);
                let bm = PartitionModel::brownian_conditioned(lambda)?;
                for n in 1..=n_max {
                    for shape in decreasing_shapes(n) {
                        let hermite = eppf(&bm, &shape)?;
                        let quadrature = eppf_stable_quadrature(0.5, t, &shape)?;
                        res.record_rel(quadrature, hermite);
                        let alternative = eppf_stable_alternative(0.5, t, &shape)?;
                        res.record_rel(alternative, hermite);
                    }
                }
            }
            Ok(res)
        },
    )
}

/// Generic Levy quadrature against the closed Ewens and two-parameter forms.
pub fn check_generic_quadrature_closed_forms(n_max: u32) -> CheckReport {
    run_check(
        "generic-quadrature-closed-forms",
        &format!("ewens theta in {{0.5, 2}} b=1; stable alpha in {{0.3, 0.5, 0.7}}; n <= {n_max}"),
        || {
            let mut res = Residuals::new(1e-6);
            for &theta in &[0.5f64, 2.0] {
                let lm = LevyModel::ewens_rate(theta, 1.0)?;
                let closed = PartitionModel::ewens(theta)?;
                for n in 1..=n_max {
                    for shape in decreasing_shapes(n) {
                        res.record_rel(
                            eppf_generic_quadrature(&lm, &shape)?,
                            eppf(&closed, &shape)?,
                        );
                    }
                }
            }
            for &alpha in &[0.3f64, 0.5, 0.7] {
                let c = alpha / gamma(1.0 - alpha)?;
                let lm = LevyModel::generalized_gamma(alpha, 0.0, c)?;
                let closed = PartitionModel::two_param(alpha, 0.0)?;
                for n in 1..=n_max {
                    for shape in decreasing_shapes(n) {
                        res.record_rel(
                            eppf_generic_quadrature(&lm, &shape)?,
                            eppf(&closed, &shape)?,
                        );
                    }
                }
            }
            Ok(res)
        },
    )
}

/// Scaling relation: rescaling the stable Levy density leaves the
/// unconditioned law invariant, and the conditioned law shifts its total as
/// pk(c rho_a | t) = pk(rho_a | c^{-1/a} t).
pub fn check_stable_scaling() -> CheckReport {
    run_check(
        "stable-scaling",
        "alpha = 1/2, scale in {0.5, 2}, t in {0.5, 1}, shapes n <= 4",
        || {
            let mut res = Residuals::new(1e-6);
            let alpha = 0.5f64;
            let base_c = alpha / gamma(1.0 - alpha)?;
            for &scale in &[0.5f64, 2.0] {
                // unconditioned invariance through the quadrature path
                let lm = LevyModel::generalized_gamma(alpha, 0.0, scale * base_c)?;
                let closed = PartitionModel::two_param(alpha, 0.0)?;
                for n in 1..=4u32 {
                    for shape in decreasing_shapes(n) {
                        res.record_rel(
                            eppf_generic_quadrature(&lm, &shape)?,
                            eppf(&closed, &shape)?,
                        );
                    }
                }
                // conditioned: evaluate the scaled-density structural moment
                // literally and compare against the shifted-total model
                for &t in &[0.5f64, 1.0] {
                    let t_shift = scale.powf(-1.0 / alpha) * t;
                    let shifted = PartitionModel::stable_conditioned(alpha, t_shift)?;
                    for n in 1..=4u32 {
                        for shape in decreasing_shapes(n) {
                            let k = shape.k() as f64;
                            let nf = n as f64;
                            let q = nf - 1.0 - k * alpha + alpha;
                            // mu under c rho_alpha at total t, by direct quadrature
                            let mu = scaled_structural_moment(alpha, scale, q, t)?;
                            let mut ln = ln_gamma(1.0 - alpha) - ln_gamma(nf - k * alpha)
                                + (k - 1.0) * ((scale * alpha).ln() - alpha * t.ln())
                                + mu.ln();
                            for &ni in shape.parts() {
                                ln += ln_gamma(ni as f64 - alpha) - ln_gamma(1.0 - alpha);
                            }
                            res.record_rel(ln.exp(), eppf(&shifted, &shape)?);
                        }
                    }
                }
            }
            Ok(res)
        },
    )
}

/// q-th structural moment under the rescaled Levy density c rho_alpha,
/// conditioned on total t, evaluated literally from the density ratio.
fn scaled_structural_moment(alpha: f64, scale: f64, q: f64, t: f64) -> Result<f64> {
    // density of the scaled total: f_c(x) = s f_alpha(s x), s = scale^{-1/alpha}
    let s = scale.powf(-1.0 / alpha);
    let f_c = move |x: f64| -> Result<f64> { Ok(s * stable_density(alpha, s * x)?) };
    let denom = f_c(t)?;
    let rho_scaled =
        move |x: f64| -> Result<f64> { Ok(scale * alpha / gamma(1.0 - alpha)? * x.powf(-alpha - 1.0)) };
    let integrand = move |p: f64| -> f64 {
        if p <= 0.0 || p >= 1.0 {
            return 0.0;
        }
        let num = match f_c((1.0 - p) * t) {
            Ok(v) => v,
            Err(_) => return 0.0,
        };
        let rho = match rho_scaled(p * t) {
            Ok(v) => v,
            Err(_) => return 0.0,
        };
        p.powf(q) * p * t * rho * num / denom
    };
    // quartic maps at both endpoints
    let left = quad::adaptive(
        |u: f64| {
            let p = 0.5 * u * u * u * u;
            integrand(p) * 2.0 * u * u * u
        },
        0.0,
        1.0,
        1e-12,
        1e-9,
    )?;
    let right = quad::adaptive(
        |v: f64| {
            let p = 1.0 - 0.5 * v * v * v * v;
            integrand(p) * 2.0 * v * v * v
        },
        0.0,
        1.0,
        1e-12,
        1e-9,
    )?;
    Ok(left.value + right.value)
}

/// Exponential tilting: the unconditioned tilted model mixes the conditioned
/// laws against the tilted total density.
pub fn check_tilted_mixture() -> CheckReport {
    run_check(
        "tilted-mixture",
        "alpha = 1/2, b in {0.5, 1}, shapes n <= 4",
        || {
            let mut res = Residuals::new(1e-6);
            let alpha = 0.5f64;
            let c = alpha / gamma(1.0 - alpha)?;
            for &b in &[0.5f64, 1.0] {
                let lm = LevyModel::generalized_gamma(alpha, b, c)?;
                let psi_b = b.powf(alpha);
                for n in 1..=4u32 {
                    for shape in decreasing_shapes(n) {
                        let direct = eppf_generic_quadrature(&lm, &shape)?;
                        let shape_owned = shape.clone();
                        let mixed = quad::adaptive(
                            |t: f64| {
                                if t <= 0.0 {
                                    return 0.0;
                                }
                                let m = match PartitionModel::stable_conditioned(alpha, t) {
                                    Ok(m) => m,
                                    Err(_) => return 0.0,
                                };
                                let p = match eppf(&m, &shape_owned) {
                                    Ok(p) => p,
                                    Err(_) => return 0.0,
                                };
                                let f = stable_density(0.5, t).unwrap_or(0.0);
                                p * f * (psi_b - b * t).exp()
                            },
                            1e-4,
                            70.0 / b.max(1.0),
                            1e-11,
                            1e-9,
                        )?;
                        res.record_rel(mixed.value, direct);
                    }
                }
            }
            Ok(res)
        },
    )
}

/// Gaussian mixture of Brownian conditioned laws against the two-parameter
/// family: int p(c || lambda) 2 lambda^{2 theta} phi(lambda) dlambda /
/// E|B|^{2 theta} = p_{1/2, theta}(c).
pub fn check_brownian_mixture(n_max: u32) -> CheckReport {
    run_check(
        "brownian-mixture",
        &format!("theta in {{0, 1/2, 1}}, shapes n <= {n_max}"),
        || {
            let mut res = Residuals::new(1e-6);
            for &theta in &[0.0f64, 0.5, 1.0] {
                let target = PartitionModel::two_param(0.5, theta)?;
                let norm = gaussian_abs_moment(theta)?;
                for n in 1..=n_max {
                    for shape in decreasing_shapes(n) {
                        let shape_owned = shape.clone();
                        let mixed = quad::adaptive(
                            |lam: f64| {
                                if lam <= 0.0 {
                                    return 0.0;
                                }
                                let m = match PartitionModel::brownian_conditioned(lam) {
                                    Ok(m) => m,
                                    Err(_) => return 0.0,
                                };
                                match eppf(&m, &shape_owned) {
                                    Ok(p) => {
                                        p * 2.0 * lam.powf(2.0 * theta) * gaussian_pdf(lam) / norm
                                    }
                                    Err(_) => 0.0,
                                }
                            },
                            0.0,
                            13.0,
                            1e-11,
                            1e-9,
                        )?;
                        res.record_rel(mixed.value, eppf(&target, &shape)?);
                    }
                }
            }
            Ok(res)
        },
    )
}

/// Block-count law against the shape sum: P(K_n = k) = sum over shapes of
/// #(shape) p(shape).
pub fn check_blockcount_sumform(n_max: u32) -> CheckReport {
    run_check(
        "blockcount-sumform",
        &format!("lambda in {{0.5, 1, 2}}, n <= {n_max}"),
        || {
            let mut res = Residuals::new(1e-8);
            for &lambda in &[0.5f64, 1.0, 2.0] {
                let m = PartitionModel::brownian_conditioned(lambda)?;
                for n in 1..=n_max {
                    let law = kn_distribution_brownian(n, lambda)?;
                    let mut by_k = vec![0.0f64; n as usize];
                    for shape in decreasing_shapes(n) {
                        let count = count_shape_arrangements(&shape)?
                            .to_f64()
                            .ok_or_else(|| PkError::Domain("count overflow".into()))?;
                        by_k[shape.k() - 1] += count * eppf(&m, &shape)?;
                    }
                    for (got, want) in by_k.iter().zip(law.iter()) {
                        res.record_rel(*got, *want);
                    }
                }
            }
            Ok(res)
        },
    )
}

/// Bayes inversion of the unconditional forward chain against the shared
/// co-transition probabilities, exact in rationals.
pub fn check_blockcount_bayes(n_max: u32) -> CheckReport {
    run_check("blockcount-bayes", &format!("n <= {n_max}"), || {
        let mut res = Residuals::new(0.0);
        for n in 1..=n_max {
            let marg_n = kn_distribution_unconditional(n)?;
            let marg_next = kn_distribution_unconditional(n + 1)?;
            for k in 1..=n + 1 {
                let (same, down) = kn_cotransition(n, k)?;
                let same_bayes = if k <= n {
                    let (stay, _) = kn_transition_unconditional(n, k)?;
                    marg_n[k as usize - 1].clone() * stay / marg_next[k as usize - 1].clone()
                } else {
                    BigRational::zero()
                };
                let down_bayes = if k >= 2 {
                    let (_, up) = kn_transition_unconditional(n, k - 1)?;
                    marg_n[k as usize - 2].clone() * up / marg_next[k as usize - 1].clone()
                } else {
                    BigRational::zero()
                };
                if same_bayes != same || down_bayes != down {
                    res.fail();
                }
            }
        }
        Ok(res)
    })
}

/// Frozen oracle points for the Brownian structural distribution function.
pub fn check_structural_cdf_oracle() -> CheckReport {
    run_check("structural-cdf-oracle", "lambda = 1, ten points", || {
        let mut res = Residuals::new(1e-14);
        let oracle = [
            (1.0 / 11.0, 0.24817036595415071751),
            (2.0 / 11.0, 0.36264811176606293341),
            (3.0 / 11.0, 0.45970862539258010143),
            (4.0 / 11.0, 0.55030820203110910264),
            (5.0 / 11.0, 0.63868957147382117946),
            (6.0 / 11.0, 0.72667832170770185497),
            (7.0 / 11.0, 0.81412326763412407198),
            (8.0 / 11.0, 0.89752956514025057231),
            (9.0 / 11.0, 0.96610514647531072707),
            (10.0 / 11.0, 0.99843459774199745032),
        ];
        for (y, want) in oracle {
            res.record_rel(structural_cdf_brownian(1.0, y)?, want);
            // quantile inverts the oracle point
            let back = structural_quantile_brownian(1.0, want)?;
            res.max_abs = res.max_abs.max((back - y).abs());
            if (back - y).abs() > 1e-12 {
                res.fail();
            }
        }
        Ok(res)
    })
}

/// Chi-square comparison of a sequential sampler's empirical partition law
/// with the model EPPF over all partitions of {1..n}.
pub fn mc_compare_eppf_crp(
    model: &PartitionModel,
    n: usize,
    samples: u64,
    r: &mut RandomSource,
) -> CheckReport {
    let name = format!("mc-crp-{}", model_slug(model));
    let grid = format!("n = {n}, N = {samples}");
    let started = Instant::now();
    let mut body = || -> Result<(f64, f64)> {
        if n > 5 {
            return Err(PkError::Bounds("mc comparison capped at n = 5".into()));
        }
        let all: Vec<SetPartition> = enumerate_set_partitions(n)?.collect();
        let probs: Vec<f64> = all
            .iter()
            .map(|p| eppf(model, &composition_of(p)))
            .collect::<Result<_>>()?;
        let sampler = CrpSampler::new(*model, n as u32)?;
        let mut counts = vec![0u64; all.len()];
        for _ in 0..samples {
            let s = sampler.sample(r)?;
            let idx = all
                .iter()
                .position(|p| *p == s)
                .ok_or_else(|| PkError::Consistency("sampled partition not enumerated".into()))?;
            counts[idx] += 1;
        }
        let t = chi_square_gof(&counts, &probs)?;
        Ok((t.statistic, t.p_value))
    };
    match body() {
        Ok((stat, p_value)) => CheckReport {
            name,
            status: if p_value > P_THRESHOLD {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: stat,
            max_rel_residual: p_value,
            grid: format!("{grid}; chi2 = {stat:.3}, p = {p_value:.4}"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// Chi-square comparison of the truncated jump sampler against the generic
/// quadrature EPPF, allowing the documented O(delta) bias.
pub fn mc_compare_eppf_jump(
    spec: &JumpProcessSpec,
    n: usize,
    samples: u64,
    r: &mut RandomSource,
) -> CheckReport {
    let name = "mc-jump-eppf".to_string();
    let grid = format!(
        "alpha={}, b={}, c={}, delta={}, n={n}, N={samples}",
        spec.alpha, spec.b, spec.c, spec.delta
    );
    let started = Instant::now();
    let mut body = || -> Result<(f64, f64)> {
        let lm = LevyModel::generalized_gamma(spec.alpha, spec.b, spec.c)?;
        let all: Vec<SetPartition> = enumerate_set_partitions(n)?.collect();
        let probs: Vec<f64> = all
            .iter()
            .map(|p| eppf_generic_quadrature(&lm, &composition_of(p)))
            .collect::<Result<_>>()?;
        let mut counts = vec![0u64; all.len()];
        for _ in 0..samples {
            let s = sample_jump_partition(spec, n as u32, r)?;
            let idx = all
                .iter()
                .position(|p| *p == s)
                .ok_or_else(|| PkError::Consistency("sampled partition not enumerated".into()))?;
            counts[idx] += 1;
        }
        let t = chi_square_gof(&counts, &probs)?;
        Ok((t.statistic, t.p_value))
    };
    match body() {
        Ok((stat, p_value)) => CheckReport {
            name,
            status: if p_value > P_THRESHOLD {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: stat,
            max_rel_residual: p_value,
            grid: format!("{grid}; chi2 = {stat:.3}, p = {p_value:.4}"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// Monte Carlo of the cumulant form: p(n_1..n_k) = E[(T + sum J_i)^{-n}]
/// prod kappa_{n_i}, with T tilted stable and J_i gamma(n_i - alpha, b),
/// against the generic quadrature EPPF, within four standard errors.
pub fn mc_cumulant_form(
    alpha: f64,
    b: f64,
    c: &Composition,
    samples: u64,
    r: &mut RandomSource,
) -> CheckReport {
    let name = format!(
        "mc-cumulant-{}-{}",
        format!("{alpha}-{b}").replace('.', ""),
        c.parts().iter().map(|p| p.to_string()).collect::<Vec<_>>().join("")
    );
    let grid = format!("alpha={alpha}, b={b}, shape {c}, N={samples}");
    let started = Instant::now();
    let mut body = || -> Result<(f64, f64, f64)> {
        let rate = alpha / gamma(1.0 - alpha)?;
        let lm = LevyModel::generalized_gamma(alpha, b, rate)?;
        let expect = eppf_generic_quadrature(&lm, c)?;
        let n = c.n();
        // prod kappa_{n_i} with kappa_m = c Gamma(m - alpha) b^{alpha - m}
        let mut ln_kappa = 0.0;
        for &ni in c.parts() {
            ln_kappa += rate.ln() + ln_gamma(ni as f64 - alpha) + (alpha - ni as f64) * b.ln();
        }
        let kappa = ln_kappa.exp();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..samples {
            let t = sample_tilted_stable_counted(alpha, b, r)?.0;
            let mut total = t;
            for &ni in c.parts() {
                total += r.gamma(ni as f64 - alpha, b)?;
            }
            let x = kappa * total.powi(-(n as i32));
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / samples as f64;
        let sd = ((sumsq / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
        Ok((mean, expect, sd))
    };
    match body() {
        Ok((mean, expect, sd)) => {
            let ok = (mean - expect).abs() < 4.0 * sd.max(1e-12);
            CheckReport {
                name,
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                max_abs_residual: (mean - expect).abs(),
                max_rel_residual: (mean - expect).abs() / expect.abs().max(1e-300),
                grid: format!("{grid}; mc = {mean:.6e}, exact = {expect:.6e}, se = {sd:.2e}"),
                runtime: started.elapsed(),
            }
        }
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// KS of the residual construction's first coordinate against the inverse
/// structural distribution function.
pub fn check_residual_ks(lambda: f64, samples: u64, r: &mut RandomSource) -> CheckReport {
    let name = "ks-residual".to_string();
    let grid = format!("lambda = {lambda}, N = {samples}");
    let started = Instant::now();
    let mut body = || -> Result<f64> {
        let mut a: Vec<f64> = (0..samples)
            .map(|_| Ok(sample_residual_construction(lambda, 1, r)?.masses()[0]))
            .collect::<Result<_>>()?;
        let mut q = r.split(0xACCE55);
        let mut b: Vec<f64> = (0..samples)
            .map(|_| structural_quantile_brownian(lambda, q.uniform()))
            .collect::<Result<_>>()?;
        Ok(ks_two_sample(&mut a, &mut b)?.p_value)
    };
    match body() {
        Ok(p_value) => CheckReport {
            name,
            status: if p_value > P_THRESHOLD {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: 0.0,
            max_rel_residual: p_value,
            grid: format!("{grid}; p = {p_value:.4}"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// Deletion experiment: removing the first class of a (1/2, 1/2) partition
/// leaves pair probability 1/4.
pub fn check_deletion_theta_shift(samples: u64, r: &mut RandomSource) -> CheckReport {
    let name = "deletion-theta-shift".to_string();
    let grid = format!("(alpha, theta, k) = (0.5, 0.5, 1), N = {samples}");
    let started = Instant::now();
    let mut body = || -> Result<(f64, f64)> {
        let mut together = 0u64;
        for _ in 0..samples {
            if sample_pk_deletion(0.5, 0.5, 1, 2, r)?.block_count() == 1 {
                together += 1;
            }
        }
        let p_hat = together as f64 / samples as f64;
        let sigma = (0.25 * 0.75 / samples as f64).sqrt();
        Ok((p_hat, sigma))
    };
    match body() {
        Ok((p_hat, sigma)) => CheckReport {
            name,
            status: if (p_hat - 0.25).abs() < 4.0 * sigma {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: (p_hat - 0.25).abs(),
            max_rel_residual: (p_hat - 0.25).abs() / 0.25,
            grid: format!("{grid}; p_hat = {p_hat:.5}"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// Tilted-stable rejection rate against exp(-b^alpha).
pub fn check_tilted_acceptance(samples: u64, r: &mut RandomSource) -> CheckReport {
    let name = "tilted-acceptance".to_string();
    let (alpha, b) = (0.5f64, 1.0f64);
    let grid = format!("alpha = {alpha}, b = {b}, N = {samples}");
    let started = Instant::now();
    let mut body = || -> Result<(f64, f64, f64)> {
        let mut attempts = 0u64;
        for _ in 0..samples {
            attempts += sample_tilted_stable_counted(alpha, b, r)?.1;
        }
        let rate = samples as f64 / attempts as f64;
        let expect = (-b.powf(alpha)).exp();
        let sigma = (expect * (1.0 - expect) / attempts as f64).sqrt();
        Ok((rate, expect, sigma))
    };
    match body() {
        Ok((rate, expect, sigma)) => CheckReport {
            name,
            status: if (rate - expect).abs() < 4.0 * sigma {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: (rate - expect).abs(),
            max_rel_residual: (rate - expect).abs() / expect,
            grid: format!("{grid}; rate = {rate:.5} vs {expect:.5}"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// Simulated mean of K_n(lambda) against the exact law, and the jump
/// sampler's total against the tilted-stable law.
pub fn check_kn_chain_mean(reps: u64, r: &mut RandomSource) -> CheckReport {
    let name = "kn-chain-mean".to_string();
    let (lambda, n) = (1.0f64, 200u32);
    let grid = format!("lambda = {lambda}, n = {n}, reps = {reps}");
    let started = Instant::now();
    let mut body = || -> Result<(f64, f64, f64)> {
        let law = kn_distribution_brownian(n, lambda)?;
        let mean_exact: f64 = law.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        let var_exact: f64 = law
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64 - mean_exact).powi(2) * p)
            .sum();
        let sampler = crate::samplers::KnChainSampler::new(lambda, n)?;
        let mut sum = 0.0;
        for _ in 0..reps {
            sum += *sampler.sample(r).last().unwrap() as f64;
        }
        let mean_hat = sum / reps as f64;
        let se = (var_exact / reps as f64).sqrt();
        Ok((mean_hat, mean_exact, se))
    };
    match body() {
        Ok((mean_hat, mean_exact, se)) => CheckReport {
            name,
            status: if (mean_hat - mean_exact).abs() < 3.0 * se {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: (mean_hat - mean_exact).abs(),
            max_rel_residual: (mean_hat - mean_exact).abs() / mean_exact,
            grid: format!("{grid}; mean = {mean_hat:.4} vs {mean_exact:.4} (se {se:.4})"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// KS of the jump-process total against the tilted stable sampler.
pub fn check_jump_total_law(samples: u64, r: &mut RandomSource) -> CheckReport {
    let name = "jump-total-law".to_string();
    let started = Instant::now();
    let grid = format!("alpha = 0.5, b = 1, canonical c, N = {samples}");
    let mut body = || -> Result<f64> {
        let alpha = 0.5f64;
        let c = alpha / gamma(1.0 - alpha)?;
        let spec = JumpProcessSpec::new(alpha, 1.0, c, 1e-3)?;
        let mut totals: Vec<f64> = (0..samples)
            .map(|_| Ok(sample_jumps(&spec, r)?.1))
            .collect::<Result<_>>()?;
        let mut reference: Vec<f64> = (0..samples)
            .map(|_| Ok(sample_tilted_stable_counted(alpha, 1.0, r)?.0))
            .collect::<Result<_>>()?;
        Ok(ks_two_sample(&mut totals, &mut reference)?.p_value)
    };
    match body() {
        Ok(p_value) => CheckReport {
            name,
            status: if p_value > P_THRESHOLD {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_abs_residual: 0.0,
            max_rel_residual: p_value,
            grid: format!("{grid}; p = {p_value:.4}"),
            runtime: started.elapsed(),
        },
        Err(e) => error_report(&name, grid, started, &e),
    }
}

/// GG structural density consistency: the direct Bessel form against the
/// tilted stable expectation route, plus normalization.
pub fn check_invgauss_structural() -> CheckReport {
    run_check(
        "invgauss-structural",
        "b in {0.5, 1, 4} normalization; composition route at (1, 0.3)",
        || {
            let mut res = Residuals::new(1e-8);
            for &b in &[0.5f64, 1.0, 4.0] {
                let q15 = quad::adaptive(
                    |u: f64| {
                        let p = u * u * u * u;
                        if p <= 0.0 || p >= 1.0 {
                            return 0.0;
                        }
                        structural_density_invgauss(b, p).unwrap_or(0.0) * 4.0 * u * u * u
                    },
                    0.0,
                    1.0,
                    1e-12,
                    1e-10,
                )?;
                res.record(q15.value, 1.0);
            }
            // independent route through E[T^{-1/2} e^{-xi T}]
            let (b, p) = (1.0f64, 0.3f64);
            let xi = b / (1.0 - p);
            let expectation = quad::adaptive(
                |t: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    t.powf(-0.5) * (-xi * t).exp() * stable_density(0.5, t).unwrap_or(0.0)
                },
                1e-6,
                60.0,
                1e-13,
                1e-11,
            )?;
            let composed = 0.5 / gamma(0.5)?
                * p.powf(-0.5)
                * (1.0 - p).powf(-0.5)
                * b.sqrt().exp()
                * expectation.value;
            res.record_rel(composed, structural_density_invgauss(b, p)?);
            Ok(res)
        },
    )
}

type Job = Box<dyn FnOnce() -> CheckReport + Send>;

/// The full battery at the requested tier, reports in stable name order.
pub fn run_all(seed: u64, tier: Tier) -> Vec<CheckReport> {
    run_selected(seed, tier, None)
}

/// Run the suite, or only the checks whose name contains `filter`.
pub fn run_selected(seed: u64, tier: Tier, filter: Option<&str>) -> Vec<CheckReport> {
    let mut jobs = build_jobs(seed, tier);
    if let Some(f) = filter {
        jobs.retain(|(name, _)| name.contains(f));
    }
    let mut reports = run_jobs(jobs.into_iter().map(|(_, j)| j).collect());
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    reports
}

fn build_jobs(seed: u64, tier: Tier) -> Vec<(String, Job)> {
    let (n_norm, n_addr, n_mc, n_sumform, n_bayes, reps_chain) = match tier {
        Tier::Fast => (6usize, 5u32, 30_000u64, 6u32, 10u32, 1500u64),
        Tier::Full => (8, 7, 100_000, 8, 20, 4000),
    };
    let root = RandomSource::new(seed);
    let closed_models = [
        PartitionModel::ewens(1.0).unwrap(),
        PartitionModel::two_param(0.5, 0.5).unwrap(),
        PartitionModel::two_param(0.3, 1.2).unwrap(),
        PartitionModel::brownian_conditioned(1.0).unwrap(),
    ];
    let stable_model = PartitionModel::stable_conditioned(0.7, 1.0).unwrap();

    let mut jobs: Vec<(String, Job)> = Vec::new();
    for m in closed_models {
        jobs.push((
            format!("normalization-{}", model_slug(&m)),
            Box::new(move || check_normalization(&m, n_norm)),
        ));
        jobs.push((
            format!("addition-rules-{}", model_slug(&m)),
            Box::new(move || check_addition_rules(&m, n_addr)),
        ));
        jobs.push((
            format!("cons-moments-{}", model_slug(&m)),
            Box::new(move || check_consistency_moments(&m)),
        ));
    }
    jobs.push((
        format!("normalization-{}", model_slug(&stable_model)),
        Box::new(move || check_normalization(&stable_model, n_norm.min(6))),
    ));
    jobs.push((
        format!("addition-rules-{}", model_slug(&stable_model)),
        Box::new(move || check_addition_rules(&stable_model, n_addr.min(6))),
    ));
    jobs.push((
        format!("cons-moments-{}", model_slug(&stable_model)),
        Box::new(move || check_consistency_moments(&stable_model)),
    ));
    {
        let gg = PartitionModel::generalized_gamma(0.5, 1.0, 0.5 / gamma(0.5).unwrap()).unwrap();
        jobs.push((
            format!("cons-moments-{}", model_slug(&gg)),
            Box::new(move || check_consistency_moments(&gg)),
        ));
    }
    jobs.push(("point-values".into(), Box::new(check_point_values)));
    for (alpha, t) in [(0.5, 0.5), (0.5, 2.0), (0.3, 1.0), (0.7, 1.0)] {
        jobs.push((
            format!("moment-recursion-{}", format!("{alpha}-{t}").replace('.', "")),
            Box::new(move || check_moment_recursion(alpha, t, 6, 6)),
        ));
    }
    jobs.push(("hermite-recursion".into(), Box::new(check_hermite_recursion)));
    jobs.push(("mills-chain".into(), Box::new(check_mills_chain)));
    jobs.push((
        "hermite-weighted-gaussian".into(),
        Box::new(check_hermite_weighted_gaussian),
    ));
    for (q, r) in [(-0.9, -0.7), (-1.2, -0.6)] {
        jobs.push((
            format!("gamma-series-symmetric-{}", format!("{q}-{r}").replace('.', "")),
            Box::new(move || check_gamma_series_symmetric(q, r)),
        ));
    }
    jobs.push(("hfiden".into(), Box::new(|| check_hfiden(9))));
    jobs.push(("hermite-stirling".into(), Box::new(|| check_hermite_stirling(6))));
    jobs.push((
        "gamma-laplace-moment".into(),
        Box::new(check_gamma_laplace_moment),
    ));
    jobs.push(("halfdens-series".into(), Box::new(check_halfdens_series)));
    jobs.push((
        "brownian-stable-agreement".into(),
        Box::new(move || check_brownian_stable_agreement(if tier == Tier::Full { 6 } else { 4 })),
    ));
    jobs.push((
        "generic-quadrature-closed-forms".into(),
        Box::new(move || {
            check_generic_quadrature_closed_forms(if tier == Tier::Full { 6 } else { 4 })
        }),
    ));
    jobs.push(("stable-scaling".into(), Box::new(check_stable_scaling)));
    jobs.push(("tilted-mixture".into(), Box::new(check_tilted_mixture)));
    jobs.push((
        "brownian-mixture".into(),
        Box::new(move || check_brownian_mixture(if tier == Tier::Full { 5 } else { 4 })),
    ));
    jobs.push((
        "blockcount-sumform".into(),
        Box::new(move || check_blockcount_sumform(n_sumform)),
    ));
    jobs.push((
        "blockcount-bayes".into(),
        Box::new(move || check_blockcount_bayes(n_bayes)),
    ));
    jobs.push((
        "structural-cdf-oracle".into(),
        Box::new(check_structural_cdf_oracle),
    ));
    jobs.push((
        "invgauss-structural".into(),
        Box::new(check_invgauss_structural),
    ));
    // statistical checks with per-check derived streams
    let models_for_mc = [
        PartitionModel::ewens(1.0).unwrap(),
        PartitionModel::two_param(0.5, 0.5).unwrap(),
        PartitionModel::two_param(0.3, 1.2).unwrap(),
        PartitionModel::brownian_conditioned(1.0).unwrap(),
    ];
    for (i, m) in models_for_mc.into_iter().enumerate() {
        let mut r = root.split(1000 + i as u64);
        jobs.push((
            format!("mc-crp-{}", model_slug(&m)),
            Box::new(move || mc_compare_eppf_crp(&m, 3, n_mc, &mut r)),
        ));
    }
    {
        let mut r = root.split(1100);
        jobs.push((
            "mc-jump-eppf".into(),
            Box::new(move || {
                let alpha = 0.5f64;
                let c = alpha / gamma(1.0 - alpha).unwrap();
                let spec = JumpProcessSpec::new(alpha, 1.0, c, 1e-3).unwrap();
                mc_compare_eppf_jump(&spec, 3, n_mc, &mut r)
            }),
        ));
    }
    for (i, (alpha, b, parts)) in [
        (0.5, 1.0, vec![2u32, 1]),
        (0.5, 1.0, vec![3]),
        (0.3, 2.0, vec![2, 1]),
        (0.3, 2.0, vec![3]),
    ]
    .into_iter()
    .enumerate()
    {
        let mut r = root.split(1200 + i as u64);
        let name = format!(
            "mc-cumulant-{}-{}",
            format!("{alpha}-{b}").replace('.', ""),
            parts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("")
        );
        jobs.push((
            name,
            Box::new(move || {
                mc_cumulant_form(alpha, b, &Composition::new(parts).unwrap(), n_mc, &mut r)
            }),
        ));
    }
    {
        let mut r = root.split(1300);
        jobs.push((
            "ks-residual".into(),
            Box::new(move || check_residual_ks(1.0, 10_000, &mut r)),
        ));
    }
    {
        let mut r = root.split(1400);
        jobs.push((
            "deletion-theta-shift".into(),
            Box::new(move || check_deletion_theta_shift(n_mc, &mut r)),
        ));
    }
    {
        let mut r = root.split(1500);
        jobs.push((
            "tilted-acceptance".into(),
            Box::new(move || check_tilted_acceptance(20_000, &mut r)),
        ));
    }
    {
        let mut r = root.split(1600);
        jobs.push((
            "kn-chain-mean".into(),
            Box::new(move || check_kn_chain_mean(reps_chain, &mut r)),
        ));
    }
    {
        let mut r = root.split(1700);
        jobs.push((
            "jump-total-law".into(),
            Box::new(move || check_jump_total_law(6_000, &mut r)),
        ));
    }
    jobs
}

/// Execute jobs, optionally in parallel under the PKPART_THREADS cap.
fn run_jobs(jobs: Vec<Job>) -> Vec<CheckReport> {
    let threads = std::env::var("PKPART_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    if threads == 1 {
        return jobs.into_iter().map(|j| j()).collect();
    }
    let queue = std::sync::Mutex::new(jobs.into_iter().enumerate().collect::<Vec<_>>());
    let results = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let job = {
                    let mut q = queue.lock().unwrap();
                    q.pop()
                };
                match job {
                    Some((i, j)) => {
                        let report = j();
                        results.lock().unwrap().push((i, report));
                    }
                    None => break,
                }
            });
        }
    });
    let mut out = results.into_inner().unwrap();
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}

/// Aggregate exit status: 0 all pass, 1 any fail, 2 numerical errors only.
pub fn exit_status(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(|r| r.status == CheckStatus::Fail) {
        1
    } else if reports.iter().any(|r| r.status == CheckStatus::NumericalError) {
        2
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_addition_pass() {
        let m = PartitionModel::two_param(0.3, 1.2).unwrap();
        let r = check_normalization(&m, 6);
        assert_eq!(r.status, CheckStatus::Pass, "{:?}", r);
        let r = check_addition_rules(&m, 5);
        assert_eq!(r.status, CheckStatus::Pass, "{:?}", r);
    }

    #[test]
    fn injected_fault_is_detected() {
        // perturbing the two-parameter exponent must break normalization
        let alpha = 0.5f64;
        let theta = 0.5f64;
        let total = sum_over_partitions(5, |c| {
            let mut ln = 0.0;
            for j in 1..c.k() {
                ln += (theta + j as f64 * alpha).ln();
            }
            ln -= ln_gamma(theta + c.n() as f64) - ln_gamma(theta + 1.0);
            for &ni in c.parts() {
                // exponent bug: rising factorial shifted by one
                ln += ln_gamma(ni as f64 + 1.0 - alpha) - ln_gamma(1.0 - alpha);
            }
            Ok(ln.exp())
        })
        .unwrap();
        assert!((total - 1.0).abs() > 1e-3, "fault not detected: {total}");
    }

    #[test]
    fn exact_identities_pass() {
        assert_eq!(check_hfiden(7).status, CheckStatus::Pass);
        assert_eq!(check_hermite_stirling(6).status, CheckStatus::Pass);
        assert_eq!(check_blockcount_bayes(12).status, CheckStatus::Pass);
    }

    #[test]
    fn analytic_identities_pass() {
        assert_eq!(check_mills_chain().status, CheckStatus::Pass);
        assert_eq!(check_structural_cdf_oracle().status, CheckStatus::Pass);
        let r = check_gamma_series_symmetric(-0.9, -0.7);
        assert_eq!(r.status, CheckStatus::Pass, "{:?}", r);
        let r = check_moment_recursion(0.5, 0.5, 4, 4);
        assert_eq!(r.status, CheckStatus::Pass, "{:?}", r);
    }

    #[test]
    fn gamma_series_rejects_divergent_region() {
        let r = check_gamma_series_symmetric(-0.3, -0.2);
        assert_eq!(r.status, CheckStatus::NumericalError);
    }

    #[test]
    fn consistency_moments_brownian() {
        let m = PartitionModel::brownian_conditioned(1.0).unwrap();
        let r = check_consistency_moments(&m);
        assert_eq!(r.status, CheckStatus::Pass, "{:?}", r);
    }

    #[test]
    fn exit_status_aggregation() {
        let mk = |status| CheckReport {
            name: "x".into(),
            status,
            max_abs_residual: 0.0,
            max_rel_residual: 0.0,
            grid: String::new(),
            runtime: Duration::ZERO,
        };
        assert_eq!(exit_status(&[mk(CheckStatus::Pass)]), 0);
        assert_eq!(exit_status(&[mk(CheckStatus::Pass), mk(CheckStatus::NumericalError)]), 2);
        assert_eq!(exit_status(&[mk(CheckStatus::NumericalError), mk(CheckStatus::Fail)]), 1);
    }
}

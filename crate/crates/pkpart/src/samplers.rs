//! Random generation: stick-breaking frequencies, sequential partition
//! growth, block-count chains, the Brownian residual construction, exact
//! stable variates, and Poisson jump simulation for generalized-gamma
//! models.
//!
//! Every sampler draws from an explicit `RandomSource`; parallel use goes
//! through `RandomSource::split`.

use crate::error::{PkError, Result};
use crate::models::{prediction_rule, PartitionModel};
use crate::partitions::{Composition, MassVector, SetPartition};
use crate::rng::RandomSource;
use crate::specfun::{gamma, gamma_p, ln_hermite_h_neg};

/// First k size-biased frequencies of the two-parameter family by stick
/// breaking with beta(1 - alpha, theta + j alpha) residual fractions.
pub fn sample_gem(alpha: f64, theta: f64, k: u32, r: &mut RandomSource) -> Result<MassVector> {
    if !(0.0..1.0).contains(&alpha) || !(theta > -alpha) || k == 0 {
        return Err(PkError::Bounds(format!(
            "gem sampler needs alpha in [0,1), theta > -alpha, k >= 1; got ({alpha}, {theta}, {k})"
        )));
    }
    let mut remaining = 1.0f64;
    let mut masses = Vec::with_capacity(k as usize);
    for j in 1..=k {
        let w = r.beta(1.0 - alpha, theta + j as f64 * alpha)?;
        masses.push(remaining * w);
        remaining *= 1.0 - w;
    }
    MassVector::truncated(masses)
}

enum StepRule {
    /// Ewens / two-parameter closed prediction weights (alpha = 0 is Ewens).
    Closed { alpha: f64, theta: f64 },
    /// Brownian conditioned weights from a precomputed log-Hermite ladder.
    Brownian { lambda: f64, ln_h: Vec<f64> },
    /// Anything else goes through the generic EPPF ratios each step.
    Generic,
}

/// Sequential (Chinese-restaurant style) partition sampler. Construction
/// precomputes whatever the per-step rule needs, so repeated `sample` calls
/// stay cheap.
pub struct CrpSampler {
    model: PartitionModel,
    n: u32,
    rule: StepRule,
}

impl CrpSampler {
    pub fn new(model: PartitionModel, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(PkError::Bounds("sample length must be positive".into()));
        }
        let rule = match model {
            PartitionModel::Ewens { theta } => StepRule::Closed { alpha: 0.0, theta },
            PartitionModel::TwoParam { alpha, theta } => StepRule::Closed { alpha, theta },
            PartitionModel::BrownianConditioned { lambda } => {
                let mut ln_h = Vec::with_capacity(2 * n as usize + 1);
                for m in 0..=2 * n {
                    ln_h.push(if m == 0 {
                        0.0
                    } else {
                        ln_hermite_h_neg(m as f64 / 2.0, lambda)?
                    });
                }
                StepRule::Brownian { lambda, ln_h }
            }
            _ => StepRule::Generic,
        };
        Ok(Self { model, n, rule })
    }

    pub fn sample(&self, r: &mut RandomSource) -> Result<SetPartition> {
        let mut assignment = Vec::with_capacity(self.n as usize);
        let mut sizes: Vec<u32> = Vec::new();
        assignment.push(1u32);
        sizes.push(1);
        let mut probs: Vec<f64> = Vec::new();
        for s in 1..self.n {
            probs.clear();
            match &self.rule {
                StepRule::Closed { alpha, theta } => {
                    let denom = s as f64 + theta;
                    for &nj in &sizes {
                        probs.push((nj as f64 - alpha) / denom);
                    }
                    probs.push((theta + sizes.len() as f64 * alpha) / denom);
                }
                StepRule::Brownian { lambda, ln_h } => {
                    let k = sizes.len() as u32;
                    let ln_den = ln_h[(2 * s - k - 1) as usize];
                    let stay_ratio = (ln_h[(2 * s - k + 1) as usize] - ln_den).exp();
                    for &nj in &sizes {
                        probs.push((2.0 * nj as f64 - 1.0) * stay_ratio);
                    }
                    probs.push(lambda * (ln_h[(2 * s - k) as usize] - ln_den).exp());
                }
                StepRule::Generic => {
                    let comp = Composition::new(sizes.clone())?;
                    probs = prediction_rule(&self.model, Some(&comp))?;
                }
            }
            let choice = r.categorical(&probs);
            if choice == sizes.len() {
                sizes.push(1);
            } else {
                sizes[choice] += 1;
            }
            assignment.push(choice as u32 + 1);
        }
        SetPartition::from_assignment(assignment)
    }
}

/// One partition of {1..n} grown sequentially under the model's prediction
/// rule.
pub fn sample_crp(model: &PartitionModel, n: u32, r: &mut RandomSource) -> Result<SetPartition> {
    CrpSampler::new(*model, n)?.sample(r)
}

/// Block-count chain sampler for the Brownian conditioned partition.
/// Precomputes the log-Hermite ladder once for paths of length `n`.
pub struct KnChainSampler {
    lambda: f64,
    n: u32,
    ln_h: Vec<f64>,
}

pub const KN_CHAIN_MAX_N: u32 = 100_000;

impl KnChainSampler {
    pub fn new(lambda: f64, n: u32) -> Result<Self> {
        if n == 0 || n > KN_CHAIN_MAX_N {
            return Err(PkError::Bounds(format!(
                "chain length must lie in 1..={KN_CHAIN_MAX_N}, got {n}"
            )));
        }
        if !(lambda > 0.0) {
            return Err(PkError::Bounds(format!("lambda must be positive, got {lambda}")));
        }
        let mut ln_h = Vec::with_capacity(2 * n as usize + 1);
        for m in 0..=2 * n {
            ln_h.push(if m == 0 {
                0.0
            } else {
                ln_hermite_h_neg(m as f64 / 2.0, lambda)?
            });
        }
        Ok(Self { lambda, n, ln_h })
    }

    /// One path K_1..K_n.
    pub fn sample(&self, r: &mut RandomSource) -> Vec<u32> {
        let mut path = Vec::with_capacity(self.n as usize);
        let mut k = 1u32;
        path.push(k);
        for s in 1..self.n {
            let ln_den = self.ln_h[(2 * s - k - 1) as usize];
            let up = self.lambda * (self.ln_h[(2 * s - k) as usize] - ln_den).exp();
            if r.uniform() < up {
                k += 1;
            }
            path.push(k);
        }
        path
    }
}

/// Markov path K_1..K_n of block counts given local time lambda.
pub fn sample_kn_chain(lambda: f64, n: u32, r: &mut RandomSource) -> Result<Vec<u32>> {
    Ok(KnChainSampler::new(lambda, n)?.sample(r))
}

/// First k size-biased excursion lengths given local time lambda, from sums
/// of squared Gaussians: P_j = lambda^2/(lambda^2 + S_{j-1}) -
/// lambda^2/(lambda^2 + S_j).
pub fn sample_residual_construction(
    lambda: f64,
    k: u32,
    r: &mut RandomSource,
) -> Result<MassVector> {
    if !(lambda > 0.0) || k == 0 {
        return Err(PkError::Bounds(format!(
            "residual construction needs lambda > 0 and k >= 1, got ({lambda}, {k})"
        )));
    }
    let l2 = lambda * lambda;
    let mut s = 0.0f64;
    let mut prev = 1.0f64; // lambda^2 / (lambda^2 + S_0)
    let mut masses = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let g = r.standard_normal();
        s += g * g;
        let next = l2 / (l2 + s);
        masses.push(prev - next);
        prev = next;
    }
    MassVector::truncated(masses)
}

/// Exact one-sided stable(alpha) variate with E e^{-lambda T} =
/// exp(-lambda^alpha), by the trigonometric (Kanter) representation.
pub fn sample_stable(alpha: f64, r: &mut RandomSource) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PkError::Bounds(format!(
            "stable index must lie in (0,1), got {alpha}"
        )));
    }
    let u = std::f64::consts::PI * r.uniform();
    let e = r.exponential();
    let ratio = (1.0 - alpha) / alpha;
    Ok(((alpha * u).sin() / u.sin().powf(1.0 / alpha))
        * (((1.0 - alpha) * u).sin() / e).powf(ratio))
}

/// Exponentially tilted stable variate (density proportional to e^{-b t}
/// f_alpha(t)) together with the number of proposals consumed.
pub fn sample_tilted_stable_counted(
    alpha: f64,
    b: f64,
    r: &mut RandomSource,
) -> Result<(f64, u64)> {
    if !(b > 0.0) {
        return Err(PkError::Bounds(format!("tilt must be positive, got {b}")));
    }
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let t = sample_stable(alpha, r)?;
        if r.uniform() < (-b * t).exp() {
            return Ok((t, attempts));
        }
        if attempts > 100_000_000 {
            return Err(PkError::Config(format!(
                "tilted stable rejection stalled at alpha={alpha}, b={b}"
            )));
        }
    }
}

pub fn sample_tilted_stable(alpha: f64, b: f64, r: &mut RandomSource) -> Result<f64> {
    Ok(sample_tilted_stable_counted(alpha, b, r)?.0)
}

/// Truncated Poisson-jump simulation of a generalized-gamma model.
#[derive(Debug, Clone, Copy)]
pub struct JumpProcessSpec {
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    /// Jumps below epsilon are dropped from the simulation ...
    pub epsilon: f64,
    /// ... and their mean mass (at most delta * kappa_1) is added back to
    /// the normalizing total, leaving total-variation bias O(delta).
    pub delta: f64,
}

pub const JUMP_DELTA_DEFAULT: f64 = 1e-4;
pub const JUMP_PARTITION_MAX_N: u32 = 1000;

impl JumpProcessSpec {
    /// Choose the truncation epsilon so the discarded mean mass is at most
    /// `delta * kappa_1`.
    pub fn new(alpha: f64, b: f64, c: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(b > 0.0) || !(c > 0.0) {
            return Err(PkError::Bounds(format!(
                "jump spec needs alpha in (0,1), b > 0, c > 0; got ({alpha}, {b}, {c})"
            )));
        }
        if !(delta > 0.0 && delta < 0.1) {
            return Err(PkError::Config(format!(
                "remainder budget delta must lie in (0, 0.1), got {delta}"
            )));
        }
        let kappa1 = c * gamma(1.0 - alpha)? * b.powf(alpha - 1.0);
        // int_0^eps x rho(x) dx <= c eps^{1-alpha} / (1-alpha)
        let epsilon = (delta * kappa1 * (1.0 - alpha) / c).powf(1.0 / (1.0 - alpha));
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(PkError::Config(format!(
                "no feasible truncation for delta = {delta}"
            )));
        }
        let spec = Self {
            alpha,
            b,
            c,
            epsilon,
            delta,
        };
        debug_assert!(spec.remainder_mean().unwrap() <= delta * kappa1 * (1.0 + 1e-9));
        Ok(spec)
    }

    pub fn with_default_delta(alpha: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(alpha, b, c, JUMP_DELTA_DEFAULT)
    }

    /// Mean total mass of the discarded small jumps,
    /// int_0^eps x rho(x) dx = c b^{alpha-1} gammainc(1-alpha, b eps).
    pub fn remainder_mean(&self) -> Result<f64> {
        Ok(self.c
            * self.b.powf(self.alpha - 1.0)
            * gamma(1.0 - self.alpha)?
            * gamma_p(1.0 - self.alpha, self.b * self.epsilon)?)
    }

    /// First moment of the Levy measure.
    pub fn kappa1(&self) -> Result<f64> {
        Ok(self.c * gamma(1.0 - self.alpha)? * self.b.powf(self.alpha - 1.0))
    }
}

/// Jumps above epsilon (descending) by inverting the stable tail measure on
/// unit-rate Poisson arrivals and thinning by e^{-b J}, plus the total mass
/// including the deterministic remainder correction.
pub fn sample_jumps(spec: &JumpProcessSpec, r: &mut RandomSource) -> Result<(Vec<f64>, f64)> {
    let JumpProcessSpec {
        alpha, b, c, epsilon, ..
    } = *spec;
    // untilted tail R_0(x) = c x^{-alpha} / alpha inverts in closed form
    let gamma_cap = c * epsilon.powf(-alpha) / alpha;
    let mut jumps = Vec::new();
    let mut arrival = 0.0f64;
    loop {
        arrival += r.exponential();
        if arrival > gamma_cap {
            break;
        }
        let j = (alpha * arrival / c).powf(-1.0 / alpha);
        if r.uniform() < (-b * j).exp() {
            jumps.push(j);
        }
    }
    let total: f64 = jumps.iter().sum::<f64>() + spec.remainder_mean()?;
    Ok((jumps, total))
}

/// Partition of {1..n} by dropping n uniform points onto the normalized
/// jump lengths. Points landing in the remainder sliver become singletons,
/// so the law approximates the exact model with total-variation bias
/// O(delta).
pub fn sample_jump_partition(
    spec: &JumpProcessSpec,
    n: u32,
    r: &mut RandomSource,
) -> Result<SetPartition> {
    if n == 0 || n > JUMP_PARTITION_MAX_N {
        return Err(PkError::Bounds(format!(
            "jump partition accepts n in 1..={JUMP_PARTITION_MAX_N}, got {n}"
        )));
    }
    let (jumps, total) = sample_jumps(spec, r)?;
    // prefix sums for interval lookup
    let mut cuts = Vec::with_capacity(jumps.len());
    let mut acc = 0.0;
    for j in &jumps {
        acc += j;
        cuts.push(acc);
    }
    let mut labels = Vec::with_capacity(n as usize);
    let mut next_dust = -1i64;
    for _ in 0..n {
        let x = r.uniform() * total;
        let idx = cuts.partition_point(|&cut| cut < x);
        if idx < cuts.len() {
            labels.push(idx as i64);
        } else {
            // remainder sliver: its own block
            labels.push(next_dust);
            next_dust -= 1;
        }
    }
    canonical_from_labels(&labels)
}

fn canonical_from_labels(labels: &[i64]) -> Result<SetPartition> {
    let mut assignment = Vec::with_capacity(labels.len());
    let mut seen: Vec<i64> = Vec::new();
    for &l in labels {
        let block = match seen.iter().position(|&s| s == l) {
            Some(i) => i + 1,
            None => {
                seen.push(l);
                seen.len()
            }
        };
        assignment.push(block as u32);
    }
    SetPartition::from_assignment(assignment)
}

/// Deletion experiment: sample a two-parameter partition of a long prefix,
/// delete its first k classes, and restrict the survivors to {1..n}. The
/// result approximates a two-parameter partition with theta + k alpha.
pub fn sample_pk_deletion(
    alpha: f64,
    theta: f64,
    k: u32,
    n: u32,
    r: &mut RandomSource,
) -> Result<SetPartition> {
    if n == 0 {
        return Err(PkError::Bounds("sample length must be positive".into()));
    }
    let model = PartitionModel::two_param(alpha, theta)?;
    let prefix = 50 * n.max(2);
    let sampler = CrpSampler::new(model, prefix)?;
    for _ in 0..100 {
        let p = sampler.sample(r)?;
        if p.block_count() <= k as usize {
            continue;
        }
        let deleted = p.delete_first_k_classes(k as usize)?;
        if deleted.n() >= n as usize {
            return deleted.restrict(n as usize);
        }
    }
    Err(PkError::Config(format!(
        "deletion sampler exhausted its retries at (alpha, theta, k, n) = ({alpha}, {theta}, {k}, {n})"
    )))
}

//! Goodness-of-fit helpers for the Monte Carlo checks: chi-square against a
//! finite distribution and Kolmogorov-Smirnov in one- and two-sample form.

use crate::error::{PkError, Result};
use crate::specfun::gamma_q;

/// Survival function of the Kolmogorov distribution,
/// Q(d) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 d^2}.
pub fn kolmogorov_sf(d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * d * d).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, Copy)]
pub struct GofTest {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// Pearson chi-square of observed counts against expected probabilities.
/// Cells with expected count below 5 are merged into their neighbor.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> Result<GofTest> {
    if observed.len() != expected_probs.len() || observed.is_empty() {
        return Err(PkError::Domain("mismatched chi-square inputs".into()));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(PkError::Domain("no observations".into()));
    }
    // merge low-expectation cells left to right
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for (o, p) in observed.iter().zip(expected_probs) {
        acc_obs += *o as f64;
        acc_exp += p * n as f64;
        if acc_exp >= 5.0 {
            cells.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc_obs;
            last.1 += acc_exp;
        } else {
            cells.push((acc_obs, acc_exp));
        }
    }
    if cells.len() < 2 {
        return Err(PkError::Domain(
            "chi-square needs at least two cells after merging".into(),
        ));
    }
    let statistic: f64 = cells
        .iter()
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = cells.len() - 1;
    let p_value = gamma_q(dof as f64 / 2.0, statistic / 2.0)?;
    Ok(GofTest {
        statistic,
        p_value,
        dof,
    })
}

/// One-sample KS test of data against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &mut [f64], cdf: F) -> Result<GofTest> {
    if data.is_empty() {
        return Err(PkError::Domain("no observations".into()));
    }
    data.sort_by(f64::total_cmp);
    let n = data.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in data.iter().enumerate() {
        let u = cdf(x);
        sup = sup.max((u - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - u).abs());
    }
    let p_value = kolmogorov_sf(n.sqrt() * sup);
    Ok(GofTest {
        statistic: sup,
        p_value,
        dof: data.len(),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> Result<GofTest> {
    if a.is_empty() || b.is_empty() {
        return Err(PkError::Domain("no observations".into()));
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    let eff = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_sf(eff * sup);
    Ok(GofTest {
        statistic: sup,
        p_value,
        dof: a.len() + b.len(),
    })
}

//! Information criteria, the one-sample Kolmogorov-Smirnov test and nested
//! likelihood-ratio tests.

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{McgError, Result};
use crate::family::ModelSpec;
use crate::inference::FitResult;
use crate::real::Real;
use crate::specfun::{gamma_inc_upper, kolmogorov_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoCriteria<T> {
    pub aic: T,
    /// Absent when `n <= k + 1`.
    pub aicc: Option<T>,
    pub bic: T,
}

pub fn info_criteria<T: Real>(neg_loglik: T, k: usize, n: usize) -> InfoCriteria<T> {
    let kt = T::from_count(k);
    let nt = T::from_count(n);
    let two = T::lit(2.0);
    let aic = two * neg_loglik + two * kt;
    let aicc = (n > k + 1).then(|| aic + two * kt * (kt + T::one()) / (nt - kt - T::one()));
    let bic = two * neg_loglik + kt * nt.ln();
    InfoCriteria { aic, aicc, bic }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult<T> {
    pub statistic: T,
    pub p_value: T,
}

/// `D = max_i max(i/n - F(y_(i)), F(y_(i)) - (i-1)/n)` with the asymptotic
/// Kolmogorov p-value (no correction for estimated parameters).
pub fn ks_test<T: Real, F: Fn(T) -> Result<T>>(data: &Dataset<T>, cdf: F) -> Result<KsResult<T>> {
    let mut v = data.values.clone();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite data"));
    let n = v.len();
    let nt = T::from_count(n);
    let mut d = T::zero();
    for (i, y) in v.iter().enumerate() {
        let f = cdf(*y)?;
        let hi = T::from_count(i + 1) / nt - f;
        let lo = f - T::from_count(i) / nt;
        d = d.max(hi).max(lo);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(d, n),
    })
}

/// Upper tail of the chi-square law with `df` degrees of freedom.
pub fn chi_square_sf<T: Real>(x: T, df: usize) -> Result<T> {
    if df == 0 {
        return Err(McgError::Domain("chi-square needs df >= 1".into()));
    }
    if !(x >= T::zero()) {
        return Err(McgError::Domain(format!("chi-square argument must be >= 0, got {x}")));
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    gamma_inc_upper(T::from_count(df) / T::lit(2.0), x / T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrtResult<T> {
    pub statistic: T,
    pub df: usize,
    pub p_value: T,
}

/// Slack allowed for a nested fit that comes out marginally better than the full one.
pub const LRT_NEGATIVE_TOL: f64 = 1e-3;

/// `2 (l_full - l_nested)` against chi-square(df = free-parameter difference).
pub fn lrt<T: Real>(full: &FitResult<T>, nested: &FitResult<T>) -> Result<LrtResult<T>> {
    if !full.model.contains(&nested.model) || full.model.free_count <= nested.model.free_count {
        return Err(McgError::Model(format!(
            "{} is not nested in {}",
            nested.model.name, full.model.name
        )));
    }
    if full.n_obs != nested.n_obs {
        return Err(McgError::Model("fits use different datasets".into()));
    }
    let raw = T::lit(2.0) * (nested.neg_loglik - full.neg_loglik);
    if raw < -T::lit(LRT_NEGATIVE_TOL) {
        return Err(McgError::Optimizer(format!(
            "nested {} fit beats the full {} fit by {}: the full fit is not at its optimum",
            nested.model.name,
            full.model.name,
            -raw / T::lit(2.0)
        )));
    }
    let statistic = raw.max(T::zero());
    let df = full.model.free_count - nested.model.free_count;
    Ok(LrtResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df)?,
    })
}

/// One column of a fitted-model comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport<T> {
    pub model: ModelSpec,
    pub neg_loglik: T,
    pub k_params: usize,
    pub n_obs: usize,
    pub aic: T,
    pub aicc: Option<T>,
    pub bic: T,
    pub ks_stat: T,
    pub ks_pvalue: T,
    pub lrt_stat: Option<T>,
    pub lrt_df: Option<usize>,
    pub lrt_pvalue: Option<T>,
}

/// Report for `fit` on `data`, with the LRT against `full` when given.
pub fn gof_report<T: Real>(fit: &FitResult<T>, data: &Dataset<T>, full: Option<&FitResult<T>>) -> Result<GofReport<T>> {
    let member = fit.member()?;
    let ks = ks_test(data, |y| member.cdf(y))?;
    let ic = info_criteria(fit.neg_loglik, fit.model.free_count, fit.n_obs);
    let lrt = full.map(|f| lrt(f, fit)).transpose()?;
    Ok(GofReport {
        model: fit.model.clone(),
        neg_loglik: fit.neg_loglik,
        k_params: fit.model.free_count,
        n_obs: fit.n_obs,
        aic: ic.aic,
        aicc: ic.aicc,
        bic: ic.bic,
        ks_stat: ks.statistic,
        ks_pvalue: ks.p_value,
        lrt_stat: lrt.map(|l| l.statistic),
        lrt_df: lrt.map(|l| l.df),
        lrt_pvalue: lrt.map(|l| l.p_value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_from_published_likelihood() {
        let ic = info_criteria(219.0041_f64, 5, 50);
        assert!((ic.aic - 448.0082).abs() < 1e-3);
        assert!((ic.aicc.unwrap() - 449.3718).abs() < 1e-3);
        assert!((ic.bic - 457.5682).abs() < 1e-3);
        let z = info_criteria(3.0_f64, 0, 10);
        assert_eq!(z.aic, 6.0);
        assert!(info_criteria(1.0_f64, 3, 4).aicc.is_none());
    }

    #[test]
    fn chi_square_tail() {
        assert_eq!(chi_square_sf(0.0_f64, 3).unwrap(), 1.0);
        assert!((chi_square_sf(3.841_459_f64, 1).unwrap() - 0.05).abs() < 1e-6);
        assert!((chi_square_sf(5.9249_f64, 1).unwrap() - 0.0149).abs() < 1e-4);
    }

    #[test]
    fn ks_at_plotting_positions() {
        let n = 40;
        let data = Dataset::new((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(), "u").unwrap();
        let ks = ks_test(&data, |y| Ok(y)).unwrap();
        assert!((ks.statistic - 0.5 / n as f64).abs() < 1e-15);
        assert!(ks.p_value > 0.99);
    }
}

//! Distribution of the i-th order statistic of an iid sample.

use serde::Serialize;

use crate::base::Baseline;
use crate::distribution::{weighted, McDonald, McgParams};
use crate::error::{domain, Result};
use crate::expansions::{binom_real, gg_moment, mixture_weights_p, power_series_power, SeriesEstimate, SeriesSum, TruncationPolicy};
use crate::quadrature::QuadratureSpec;
use crate::real::{ln1mexp, Real};
use crate::shape::integrate_like;
use crate::specfun::{inc_beta_pair, ln_beta_unchecked, Tolerance};

/// Rank `i` within a sample of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrderSpec {
    pub i: usize,
    pub n: usize,
}

impl OrderSpec {
    pub fn new(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i > n {
            return domain(format!("order statistic needs 1 <= i <= n, got i={i}, n={n}"));
        }
        Ok(Self { i, n })
    }

    fn shapes<T: Real>(&self) -> (T, T) {
        (T::from_count(self.i), T::from_count(self.n - self.i + 1))
    }
}

fn check_y<T: Real>(y: T) -> Result<()> {
    if y >= T::zero() && !y.is_nan() {
        Ok(())
    } else {
        domain(format!("evaluation point must be >= 0, got {y}"))
    }
}

/// `f F^{i-1} (1-F)^{n-i} / B(i, n-i+1)`.
pub fn os_pdf<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, spec: OrderSpec, y: T) -> Result<T> {
    check_y(y)?;
    let lp = p.log_pdf(y);
    if lp == T::neg_infinity() {
        return Ok(T::zero());
    }
    let (f, s) = p.cdf_pair(y, &Tolerance::default())?;
    let (si, sr) = spec.shapes::<T>();
    let one = T::one();
    let ln = lp + weighted(si - one, f.ln()) + weighted(sr - one, s.ln()) - ln_beta_unchecked(si, sr);
    Ok(ln.exp())
}

/// `I(F(y); i, n-i+1)`.
pub fn os_cdf<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, spec: OrderSpec, y: T) -> Result<T> {
    check_y(y)?;
    let tol = Tolerance::default();
    let (f, s) = p.cdf_pair(y, &tol)?;
    let (si, sr) = spec.shapes::<T>();
    Ok(inc_beta_pair(f, s, si, sr, &tol)?.0)
}

/// The alternating binomial sum `Σ_k (-1)^k C(n-i,k) F^{k+i} / ((k+i) B(i, n-i+1))`.
/// Loses precision for large `n - i`; kept as a cross-check on `os_cdf`.
pub fn os_cdf_binomial<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, spec: OrderSpec, y: T) -> Result<T> {
    check_y(y)?;
    let f = p.cdf(y)?;
    let (si, sr) = spec.shapes::<T>();
    let norm = (-ln_beta_unchecked(si, sr)).exp();
    let mut s = T::zero();
    for k in 0..=spec.n - spec.i {
        let m = k + spec.i;
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        s = s + sign * binom_real(T::from_count(spec.n - spec.i), k) * f.powi(m as i32) / T::from_count(m);
    }
    Ok(norm * s)
}

/// `∫ y^s f_{i:n}(y) dy`.
pub fn os_moment<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, spec: OrderSpec, s: u32, q: &QuadratureSpec<T>) -> Result<T> {
    if s == 0 {
        return domain("moment order must be >= 1");
    }
    // f_{i:n} ~ y^{a i - 1} near 0 and ~ e^{-(n-i+1) b w} in the tail
    let spike = p.a * T::from_count(spec.i) + T::from_count(s as usize);
    let decay = p.b * T::from_count(spec.n - spec.i + 1);
    integrate_like(p, spike, decay, |y| y.powi(s as i32) * os_pdf(p, spec, y).unwrap_or(T::zero()), q)
}

/// Coefficients `c_{m,r}` of `F^m = G^{am} Σ_r c_{m,r} G^{cr}`, built from the
/// mixture weights (whose leading term is nonzero).
fn power_coeffs<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, m: usize, policy: &TruncationPolicy) -> Result<(Vec<T>, bool)> {
    let w = mixture_weights_p(p, policy);
    Ok((power_series_power(&w.coeffs, m as u32, policy.max_terms)?, w.converged))
}

/// Series route for `F_{i:n}`: each `F^{k+i}` expanded through `power_series_power`.
pub fn os_series_cdf<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, spec: OrderSpec, y: T, policy: &TruncationPolicy) -> Result<SeriesSum<T>> {
    check_y(y)?;
    if y == T::zero() {
        return Ok(SeriesSum {
            value: T::zero(),
            terms: 0,
            last_term: T::zero(),
            converged: true,
        });
    }
    let ln_g = ln1mexp(p.base.cum_hazard(y));
    let u = (p.c * ln_g).exp();
    let (si, sr) = spec.shapes::<T>();
    let norm = (-ln_beta_unchecked(si, sr)).exp();
    let tol = T::lit(policy.term_tol);
    let mut value = T::zero();
    let mut converged = true;
    let mut terms = 0;
    let mut worst = T::zero();
    for k in 0..=spec.n - spec.i {
        let m = k + spec.i;
        let (c, weights_ok) = power_coeffs(p, m, policy)?;
        converged &= weights_ok;
        let mut inner = T::zero();
        let mut upow = T::one();
        let mut last = T::zero();
        let mut done = false;
        for (r, cr) in c.iter().enumerate() {
            last = *cr * upow;
            inner = inner + last;
            terms += 1;
            if r > 0 && last.abs() <= tol && (r + 1 >= c.len() || (c[r + 1] * upow * u).abs() <= tol) {
                done = true;
                break;
            }
            upow = upow * u;
        }
        converged &= done;
        worst = worst.max(last.abs());
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let lead = (T::from_count(m) * p.a * ln_g).exp();
        value = value + sign * binom_real(T::from_count(spec.n - spec.i), k) / T::from_count(m) * lead * inner;
    }
    Ok(SeriesSum {
        value: norm * value,
        terms,
        last_term: worst,
        converged,
    })
}

/// Series route for `E[Y_{i:n}^s]`: `F^m` is a mixture of generalized Gompertz
/// cdfs `G^{am+cr}` with weights `c_{m,r}`, each moment from the double series.
pub fn os_moment_series<T: Real>(p: &McgParams<T>, spec: OrderSpec, s: u32, policy: &TruncationPolicy) -> Result<SeriesEstimate<T>> {
    if s == 0 {
        return domain("moment order must be >= 1");
    }
    let (si, sr) = spec.shapes::<T>();
    let norm = (-ln_beta_unchecked(si, sr)).exp();
    let mut total = T::zero();
    let mut converged = true;
    let mut reason = None;
    let mut terms = 0;
    for k in 0..=spec.n - spec.i {
        let m = k + spec.i;
        let (c, weights_ok) = power_coeffs(p, m, policy)?;
        if !weights_ok {
            converged = false;
            reason = Some("mixture weights truncated before convergence");
        }
        let mut inner = T::zero();
        let mut tail_ok = false;
        for (r, cr) in c.iter().enumerate() {
            if *cr == T::zero() {
                if r > 0 && c[r..].iter().all(|v| *v == T::zero()) {
                    tail_ok = true;
                    break;
                }
                continue;
            }
            let alpha = p.a * T::from_count(m) + p.c * T::from_count(r);
            let mu = gg_moment(alpha, p.theta(), p.gamma(), s, policy);
            terms += mu.terms;
            if !mu.converged {
                converged = false;
                reason = mu.reason;
            }
            let term = *cr * mu.partial_sum;
            inner = inner + term;
            if r > 0 && term.abs() <= T::lit(1e-8) * inner.abs() {
                tail_ok = true;
                break;
            }
        }
        if !tail_ok {
            converged = false;
            reason = reason.or(Some("c_{m,r} series not summed to tolerance"));
        }
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        total = total + sign * binom_real(T::from_count(spec.n - spec.i), k) / T::from_count(m) * inner;
    }
    Ok(SeriesEstimate {
        value: converged.then_some(norm * total),
        partial_sum: norm * total,
        converged,
        terms,
        reason,
        fidelity: None,
    })
}

//! Series forms: generalized-Gompertz mixture weights, re-expansions in powers
//! of `G`, powers of power series, and the series moment and MGF formulas.
//!
//! Every routine reports whether its truncation converged. Quadrature in
//! `shape` is the authority for moments; the series here are checked against it.

use serde::Serialize;

use crate::base::Baseline;
use crate::distribution::{McDonald, McgParams};
use crate::error::{domain, Result};
use crate::quadrature::QuadratureSpec;
use crate::real::{ln1mexp, Real};
use crate::specfun::{zeta_int, Tolerance, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    pub max_terms: usize,
    pub term_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            max_terms: 200,
            term_tol: 1e-12,
        }
    }
}

impl TruncationPolicy {
    pub fn new(max_terms: usize, term_tol: f64) -> Result<Self> {
        if max_terms == 0 || !(term_tol > 0.0) {
            return domain("truncation policy needs max_terms >= 1 and term_tol > 0");
        }
        Ok(Self { max_terms, term_tol })
    }
}

/// Coefficients of a truncated series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesState<T> {
    pub coeffs: Vec<T>,
    pub truncation: usize,
    pub last_term: T,
    pub converged: bool,
    pub tol: Tolerance<T>,
}

/// A truncated sum with its convergence diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum<T> {
    pub value: T,
    pub terms: usize,
    pub last_term: T,
    pub converged: bool,
}

/// Comparison of a series value with a numeric reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fidelity<T> {
    pub reference: T,
    pub abs_diff: T,
    pub agrees: bool,
}

/// Series estimate whose value is withheld unless the series converged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEstimate<T> {
    pub value: Option<T>,
    pub partial_sum: T,
    pub converged: bool,
    pub terms: usize,
    pub reason: Option<&'static str>,
    pub fidelity: Option<Fidelity<T>>,
}

impl<T: Real> SeriesEstimate<T> {
    fn finish(partial_sum: T, converged: bool, terms: usize, reason: Option<&'static str>) -> Self {
        let converged = converged && partial_sum.is_finite();
        Self {
            value: converged.then_some(partial_sum),
            partial_sum,
            converged,
            terms,
            reason: if converged { None } else { reason.or(Some("non-finite partial sum")) },
            fidelity: None,
        }
    }
}

fn tol_of<T: Real>(policy: &TruncationPolicy) -> Tolerance<T> {
    Tolerance {
        abs_tol: T::lit(policy.term_tol),
        ..Tolerance::default()
    }
}

/// `(-1)^k C(beta, k)` for k = 0, 1, ... as an iterator (stops after an exact zero).
struct SignedBinomial<T> {
    beta: T,
    k: usize,
    term: T,
    done: bool,
}

fn signed_binomial<T: Real>(beta: T) -> SignedBinomial<T> {
    SignedBinomial {
        beta,
        k: 0,
        term: T::one(),
        done: false,
    }
}

impl<T: Real> Iterator for SignedBinomial<T> {
    type Item = T;
    fn next(&mut self) -> Option<T> {
        if self.done {
            return None;
        }
        let out = self.term;
        if out == T::zero() {
            self.done = true;
        }
        self.k += 1;
        let k = T::from_count(self.k);
        self.term = self.term * (k - T::one() - self.beta) / k;
        Some(out)
    }
}

/// Generalized binomial coefficient `C(alpha, k)` for real `alpha`.
pub fn binom_real<T: Real>(alpha: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, i| acc * (alpha - T::from_count(i)) / T::from_count(i + 1))
}

/// Mixture weights `p_j` of `F = Σ p_j G^{a+jc}`, from the product form of
/// `(-1)^j C(b-1, j)` so integer `b` terminates exactly.
pub fn mixture_weights_p<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, policy: &TruncationPolicy) -> SeriesState<T> {
    let x = p.x();
    let inv_beta = (-p.ln_beta()).exp();
    let tol = T::lit(policy.term_tol);
    let mut coeffs = vec![inv_beta / x];
    let mut coef = T::one();
    let mut converged = false;
    for j in 1..=policy.max_terms {
        let jt = T::from_count(j);
        coef = coef * (jt - p.b) / jt;
        let pj = coef * inv_beta / (x + jt);
        coeffs.push(pj);
        if coef == T::zero() || pj.abs() <= tol {
            converged = true;
            break;
        }
    }
    let last_term = *coeffs.last().expect("nonempty");
    SeriesState {
        truncation: coeffs.len() - 1,
        converged: converged || last_term.abs() <= tol,
        last_term,
        coeffs,
        tol: tol_of(policy),
    }
}

/// Sums `Σ p_j e^{(a+jc) ln G + shift}` with on-the-fly weights.
fn mixture_sum<T: Real, B: Baseline<T>>(
    p: &McDonald<T, B>,
    ln_g: T,
    shift: T,
    with_exponent: bool,
    policy: &TruncationPolicy,
) -> SeriesSum<T> {
    let x = p.x();
    let inv_beta = (-p.ln_beta()).exp();
    let tol = T::lit(policy.term_tol);
    let mut coef = T::one();
    let mut value = T::zero();
    let mut last_term = T::zero();
    let mut terms = 0;
    let mut converged = false;
    for j in 0..=policy.max_terms {
        let jt = T::from_count(j);
        if j > 0 {
            coef = coef * (jt - p.b) / jt;
        }
        let alpha = p.a + jt * p.c;
        let pj = coef * inv_beta / (x + jt);
        let mut term = pj * (alpha * ln_g + shift).exp();
        if with_exponent {
            term = term * alpha;
        }
        value = value + term;
        last_term = term;
        terms = j + 1;
        if coef == T::zero() || (j > 0 && term.abs() <= tol) {
            converged = true;
            break;
        }
    }
    SeriesSum {
        value,
        terms,
        last_term,
        converged,
    }
}

/// Truncated mixture cdf `Σ_{j≤J} p_j G(y)^{a+jc}`.
pub fn mixture_cdf<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, y: T, policy: &TruncationPolicy) -> Result<SeriesSum<T>> {
    if !(y >= T::zero()) {
        return domain(format!("mixture_cdf needs y >= 0, got {y}"));
    }
    if y == T::zero() {
        return Ok(SeriesSum {
            value: T::zero(),
            terms: 0,
            last_term: T::zero(),
            converged: true,
        });
    }
    let ln_g = ln1mexp(p.base.cum_hazard(y));
    Ok(mixture_sum(p, ln_g, T::zero(), false, policy))
}

/// Truncated mixture density `Σ_{j≤J} p_j (a+jc) g(y) G(y)^{a+jc-1}`.
pub fn mixture_pdf<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, y: T, policy: &TruncationPolicy) -> Result<SeriesSum<T>> {
    if !(y >= T::zero()) {
        return domain(format!("mixture_pdf needs y >= 0, got {y}"));
    }
    let w = p.base.cum_hazard(y);
    let ln_g = ln1mexp(w);
    // g G^{α-1} = exp(α ln G + ln h - w - ln G)
    let shift = p.base.ln_hazard(y) - w - ln_g;
    if y == T::zero() {
        return Ok(SeriesSum {
            value: p.density_limit_at_zero(),
            terms: 0,
            last_term: T::zero(),
            converged: true,
        });
    }
    Ok(mixture_sum(p, ln_g, shift, true, policy))
}

fn power_recurrence<T: Real>(b_seq: &[T], m: u32, r_max: usize, printed_factor: bool) -> Result<Vec<T>> {
    let b0 = *b_seq.first().unwrap_or(&T::zero());
    if b0 == T::zero() || !b0.is_finite() {
        return domain("power-series power needs a finite nonzero leading coefficient");
    }
    let mt = T::from_count(m as usize);
    let mut c = Vec::with_capacity(r_max + 1);
    c.push(b0.powi(m as i32));
    for r in 1..=r_max {
        let rt = T::from_count(r);
        let mut s = T::zero();
        for k in 1..=r.min(b_seq.len() - 1) {
            let kt = T::from_count(k);
            let mut factor = kt * (mt + T::one()) - rt;
            if printed_factor {
                factor = factor + kt;
            }
            s = s + factor * b_seq[k] * c[r - k];
        }
        c.push(s / (rt * b0));
    }
    Ok(c)
}

/// Coefficients `c_{m,r}`, r ≤ r_max, of `(Σ b_r u^r)^m`, using the classical
/// recurrence `c_{m,r} = (r b_0)^{-1} Σ_k [k(m+1) - r] b_k c_{m,r-k}`.
pub fn power_series_power<T: Real>(b_seq: &[T], m: u32, r_max: usize) -> Result<Vec<T>> {
    power_recurrence(b_seq, m, r_max, false)
}

/// The recurrence with the bracket printed as `[k(m+1) - r + k]`; kept only to
/// document that it disagrees with direct convolution.
pub fn power_series_power_printed<T: Real>(b_seq: &[T], m: u32, r_max: usize) -> Result<Vec<T>> {
    power_recurrence(b_seq, m, r_max, true)
}

/// `Σ_{k≥r} (-1)^{k+r} C(alpha, k) C(k, r) = C(alpha, r) Σ_m (-1)^m C(alpha-r, m)`:
/// the coefficient of `G^r` after re-expanding `G^alpha = (1 - (1 - G))^alpha`.
fn regroup_inner<T: Real>(alpha: T, r: usize, policy: &TruncationPolicy) -> (T, bool, T) {
    let lead = binom_real(alpha, r);
    if lead == T::zero() {
        return (T::zero(), true, T::zero());
    }
    let tol = T::lit(policy.term_tol);
    let mut s = T::zero();
    let mut last = T::zero();
    for (m, t) in signed_binomial(alpha - T::from_count(r)).enumerate() {
        s = s + t;
        last = t;
        if t == T::zero() || (m > 0 && t.abs() <= tol) {
            return (lead * s, true, T::zero());
        }
        if m >= policy.max_terms {
            break;
        }
    }
    (lead * s, false, lead * last)
}

fn regrouped<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, r_max: usize, policy: &TruncationPolicy, density: bool) -> SeriesState<T> {
    let w = mixture_weights_p(p, policy);
    let mut converged = w.converged;
    let mut worst = T::zero();
    let coeffs = (0..=r_max)
        .map(|r| {
            w.coeffs
                .iter()
                .enumerate()
                .map(|(j, pj)| {
                    let alpha = p.a + T::from_count(j) * p.c;
                    let (v, ok, last) = if density {
                        let (v, ok, last) = regroup_inner(alpha - T::one(), r, policy);
                        (alpha * v, ok, alpha * last)
                    } else {
                        regroup_inner(alpha, r, policy)
                    };
                    converged &= ok;
                    worst = worst.max((*pj * last).abs());
                    *pj * v
                })
                .sum()
        })
        .collect();
    SeriesState {
        coeffs,
        truncation: r_max,
        last_term: worst,
        converged,
        tol: tol_of(policy),
    }
}

/// `b_r`, the coefficients of `F = Σ b_r G^r`. The inner series only
/// terminates for integer exponents `a + jc`; otherwise `converged` is false.
pub fn b_coeffs<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, r_max: usize, policy: &TruncationPolicy) -> SeriesState<T> {
    regrouped(p, r_max, policy, false)
}

/// `c_r`, the coefficients of `f = g Σ c_r G^r`.
pub fn c_coeffs<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, r_max: usize, policy: &TruncationPolicy) -> SeriesState<T> {
    regrouped(p, r_max, policy, true)
}

/// `E[(ln X - ln λ)^k]` for `X ~ Exp(1)`, from the cumulants of `ln X`.
fn log_exp_moment<T: Real>(k: u32, ln_lambda: T) -> T {
    let kk = k as usize;
    let mut kappa = vec![T::zero(); kk + 1];
    if kk >= 1 {
        kappa[1] = -T::lit(EULER_GAMMA) - ln_lambda;
    }
    let mut fact = T::one();
    for m in 2..=kk {
        fact = fact * T::from_count(m - 1);
        let sign = if m % 2 == 0 { T::one() } else { -T::one() };
        kappa[m] = sign * fact * zeta_int::<T>(m as u32).expect("m >= 2");
    }
    let mut mu = vec![T::one()];
    for n in 1..=kk {
        let mut s = T::zero();
        for m in 1..=n {
            s = s + binom_real(T::from_count(n - 1), m - 1) * kappa[m] * mu[n - m];
        }
        mu.push(s);
    }
    mu[kk]
}

const CAUCHY_REL: f64 = 1e-6;

/// k-th moment of the generalized Gompertz law `G^alpha` by the double series.
///
/// `complete = false` keeps only the printed terms; `true` adds the
/// `∫_{-∞}^{∞}` piece that the formal exchange of sum and integral drops.
fn gg_moment_series<T: Real>(alpha: T, theta: T, gamma: T, k: u32, policy: &TruncationPolicy, complete: bool) -> SeriesEstimate<T> {
    let eps = T::epsilon();
    let kf = T::from_count(k as usize);
    let k_fact = (1..=k as usize).fold(T::one(), |a, i| a * T::from_count(i));
    let u = theta * alpha * k_fact;
    let ratio = theta / gamma;
    let gk1 = gamma.powi(k as i32 + 1);
    let mut total = T::zero();
    let mut noise = T::zero();
    let mut terms = 0;
    let mut converged = false;
    let mut reason = Some("outer series not Cauchy within the term budget");
    for (i, bin) in signed_binomial(alpha - T::one()).enumerate() {
        if bin == T::zero() {
            converged = true;
            break;
        }
        if i > policy.max_terms {
            break;
        }
        let lambda = ratio * T::from_count(i + 1);
        let scale = lambda.exp();
        if !scale.is_finite() {
            reason = Some("exp((θ/γ)(i+1)) overflows");
            break;
        }
        // Σ_r (-λ)^r / r! · (-1/(γ(r+1)))^{k+1}
        let sign_k = if (k + 1) % 2 == 0 { T::one() } else { -T::one() };
        let mut pw = T::one();
        let mut inner = T::zero();
        let mut peak = T::zero();
        let mut r = 0usize;
        loop {
            let rt = T::from_count(r + 1);
            let t = pw * sign_k / (gk1 * rt.powf(kf + T::one()));
            inner = inner + t;
            peak = peak.max(t.abs());
            if T::from_count(r) > lambda && t.abs() <= eps * peak {
                break;
            }
            r += 1;
            pw = pw * (-lambda) / T::from_count(r);
            if r > 5000 {
                break;
            }
        }
        if complete {
            inner = inner + log_exp_moment(k, lambda.ln()) / (k_fact * lambda * gk1);
        }
        let term = u * bin * scale * inner;
        noise = noise + (u * bin * scale).abs() * peak * eps * T::from_count(r + 1);
        total = total + term;
        terms = i + 1;
        if i > 0 && term.abs() <= T::lit(CAUCHY_REL) * total.abs() {
            converged = true;
            break;
        }
    }
    if converged && noise > T::lit(CAUCHY_REL) * total.abs() {
        converged = false;
        reason = Some("cancellation in the e^{(θ/γ)(i+1)}-weighted inner series");
    }
    SeriesEstimate::finish(total, converged, terms, reason)
}

fn moment_mixture<T: Real>(p: &McgParams<T>, k: u32, policy: &TruncationPolicy, complete: bool) -> Result<SeriesEstimate<T>> {
    if k == 0 {
        return domain("moment order must be >= 1");
    }
    let w = mixture_weights_p(p, policy);
    let mut total = T::zero();
    let mut converged = true;
    let mut reason = None;
    let mut terms = 0;
    for (j, pj) in w.coeffs.iter().enumerate() {
        if *pj == T::zero() {
            continue;
        }
        let alpha = p.a + T::from_count(j) * p.c;
        let inner = gg_moment_series(alpha, p.theta(), p.gamma(), k, policy, complete);
        terms += inner.terms;
        if !inner.converged {
            converged = false;
            reason = inner.reason;
        }
        let term = *pj * inner.partial_sum;
        total = total + term;
        if j > 0 && term.abs() <= T::lit(CAUCHY_REL) * total.abs() {
            break;
        }
    }
    if !w.converged && converged {
        // the weights were cut off; accept only if the tail is already negligible
        let tail = w.last_term.abs() * T::from_count(w.truncation);
        if tail > T::lit(CAUCHY_REL) {
            converged = false;
            reason = Some("mixture weights truncated before convergence");
        }
    }
    Ok(SeriesEstimate::finish(total, converged, terms, reason))
}

/// k-th moment as `Σ_j p_j E(Y_j^k)`, each generalized-Gompertz moment from
/// the double series including the term the printed series omits.
pub fn moment_series<T: Real>(p: &McgParams<T>, k: u32, policy: &TruncationPolicy) -> Result<SeriesEstimate<T>> {
    moment_mixture(p, k, policy, true)
}

/// The double series exactly as printed (missing the whole-line integral).
pub fn moment_series_printed<T: Real>(p: &McgParams<T>, k: u32, policy: &TruncationPolicy) -> Result<SeriesEstimate<T>> {
    moment_mixture(p, k, policy, false)
}

/// k-th moment of the generalized Gompertz law with exponent `alpha`
/// (complete double series).
pub fn gg_moment<T: Real>(alpha: T, theta: T, gamma: T, k: u32, policy: &TruncationPolicy) -> SeriesEstimate<T> {
    gg_moment_series(alpha, theta, gamma, k, policy, true)
}

/// MGF by the printed double series `Σ_j p_j M_{Y_j}(t)`, compared with the
/// quadrature value. The printed inner sum over `i` does not involve `i`
/// beyond the binomial, so it collapses to `(1-1)^{a+jc-1}`.
pub fn mgf_series<T: Real>(p: &McgParams<T>, t: T, policy: &TruncationPolicy) -> Result<SeriesEstimate<T>> {
    if !t.is_finite() {
        return domain(format!("mgf argument must be finite, got {t}"));
    }
    let tol = T::lit(policy.term_tol);
    let w = mixture_weights_p(p, policy);
    let tg = t / p.gamma();
    let mut total = T::zero();
    let mut converged = w.converged;
    let mut reason = if converged { None } else { Some("mixture weights truncated before convergence") };
    let mut terms = 0;
    for (j, pj) in w.coeffs.iter().enumerate() {
        if *pj == T::zero() {
            continue;
        }
        let alpha = p.a + T::from_count(j) * p.c;
        let s = alpha * p.theta() / p.gamma();
        // Σ_i (-1)^i C(α-1, i)
        let mut isum = T::zero();
        let mut i_ok = false;
        for (i, b) in signed_binomial(alpha - T::one()).enumerate() {
            isum = isum + b;
            terms += 1;
            if b == T::zero() || (i > 0 && b.abs() <= tol) {
                i_ok = true;
                break;
            }
            if i >= policy.max_terms {
                break;
            }
        }
        // Σ_k C(t/γ, k) k! / s^{k+1}: terminates only for integer t/γ ≥ 0
        let mut ksum = T::zero();
        let mut term = s.recip();
        let mut k_ok = false;
        let mut prev = T::infinity();
        for k in 0..=policy.max_terms {
            ksum = ksum + term;
            terms += 1;
            if term == T::zero() || term.abs() <= tol * ksum.abs() {
                k_ok = true;
                break;
            }
            if term.abs() > prev && k > 1 {
                break;
            }
            prev = term.abs();
            term = term * (tg - T::from_count(k)) / s;
        }
        if !i_ok {
            converged = false;
            reason = Some("binomial sum over i does not terminate");
        }
        if !k_ok {
            converged = false;
            reason = Some("series in C(t/γ, k) k! diverges");
        }
        total = total + *pj * s * isum * ksum;
    }
    let mut est = SeriesEstimate::finish(total, converged, terms, reason);
    let reference = crate::shape::mgf_numeric(p, t, &QuadratureSpec::default())?;
    let abs_diff = (total - reference).abs();
    est.fidelity = Some(Fidelity {
        reference,
        abs_diff,
        agrees: abs_diff <= T::lit(1e-3) * reference.abs().max(T::one()),
    });
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn weights_terminate_for_integer_b() {
        let p = McgParams::<f64>::new(0.7, 1.0, 1.3, 0.5, 1.0).unwrap();
        let w = mixture_weights_p(&p, &pol());
        assert!(w.converged);
        assert!((w.coeffs[0] - 1.0).abs() < 1e-15);
        assert!(w.coeffs[1..].iter().all(|v| *v == 0.0));
        let p = McgParams::<f64>::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let w = mixture_weights_p(&p, &pol());
        assert!((w.coeffs[0] - 2.0).abs() < 1e-14 && (w.coeffs[1] + 1.0).abs() < 1e-14);
        assert_eq!(w.coeffs.len(), 3);
    }

    #[test]
    fn two_term_cdf() {
        let p = McgParams::<f64>::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let s = mixture_cdf(&p, std::f64::consts::LN_2, &pol()).unwrap();
        let g = 1.0 - (-1.0_f64).exp();
        assert!((s.value - (2.0 * g - g * g)).abs() < 1e-14);
        assert!(s.converged);
    }

    #[test]
    fn binomial_power() {
        assert_eq!(power_series_power(&[1.0_f64, 1.0], 2, 2).unwrap(), vec![1.0, 2.0, 1.0]);
        assert_eq!(power_series_power(&[1.0_f64, 2.0, 1.0], 2, 4).unwrap(), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        assert!(power_series_power(&[0.0_f64, 1.0], 2, 2).is_err());
        assert_ne!(power_series_power_printed(&[1.0_f64, 1.0], 2, 2).unwrap(), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn log_exp_moments() {
        // E ln X = -γ_E, Var ln X = π²/6
        assert!((log_exp_moment::<f64>(1, 0.0) + EULER_GAMMA).abs() < 1e-15);
        let m2 = log_exp_moment::<f64>(2, 0.0);
        assert!((m2 - (EULER_GAMMA.powi(2) + std::f64::consts::PI.powi(2) / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn gompertz_mean_by_series() {
        let p = McgParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let m = moment_series(&p, 1, &pol()).unwrap();
        assert!(m.converged);
        assert!((m.value.unwrap() - 0.596_347_362_323_194_1).abs() < 1e-10, "{:?}", m);
        let printed = moment_series_printed(&p, 1, &pol()).unwrap();
        assert!((printed.partial_sum - 0.596_347_362_323_194_1).abs() > 0.5);
    }

    #[test]
    fn large_ratio_is_withheld() {
        let p = McgParams::<f64>::new(1.5, 1.0, 1.0, 50.0, 1.0).unwrap();
        let m = moment_series(&p, 1, &pol()).unwrap();
        assert!(!m.converged && m.value.is_none());
    }

    #[test]
    fn regrouping_integer_exponent() {
        // a=2, b=1, c=1: F = G², so b_2 = 1 and everything else 0
        let p = McgParams::<f64>::new(2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let b = b_coeffs(&p, 4, &pol());
        assert!(b.converged);
        for (r, v) in b.coeffs.iter().enumerate() {
            assert!((v - if r == 2 { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
        let p = McgParams::<f64>::new(1.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(!b_coeffs(&p, 4, &pol()).converged);
    }
}

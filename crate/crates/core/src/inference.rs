//! Log-likelihood, analytic score and observed information, and the
//! multistart maximum-likelihood fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::base::{Baseline, ExpBase, GompertzBase};
use crate::data::Dataset;
use crate::distribution::{weighted, LogParts, McDonald};
use crate::error::{McgError, Result};
use crate::family::{BaseKind, Member, ModelName, ModelSpec};
use crate::linalg::{condition_number, congruence, inverse_spd, mat_vec, zeros, Matrix};
use crate::optimize::{bfgs, inf_norm, nelder_mead, BfgsConfig, Bounds};
use crate::real::{u_over_expm1, Real};
use crate::specfun::{digamma_unchecked, normal_quantile, trigamma_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Log-likelihood with optional gradient and Hessian over the full vector.
#[derive(Debug, Clone)]
pub struct LikTerms<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Matrix<T>,
}

/// `u + u/expm1(u) - 1` without cancellation for small `u`.
fn u_plus_vu_minus_one<T: Real>(u: T, vu: T) -> T {
    if u < T::lit(0.1) {
        let u2 = u * u;
        u / T::lit(2.0) + u2 / T::lit(12.0) - u2 * u2 / T::lit(720.0) + u2 * u2 * u2 / T::lit(30240.0)
    } else {
        u + vu - T::one()
    }
}

fn full_terms<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, data: &[T], order: Order) -> LikTerms<T> {
    let np = 3 + B::N_PARAMS;
    let (a, b, c) = (p.a, p.b, p.c);
    let one = T::one();
    let x = a / c;
    let n = T::from_count(data.len());
    let mut value = n * (c.ln() - p.ln_beta());
    let mut grad = vec![T::zero(); np];
    let mut hess = zeros(np, np);

    let mut d1 = T::zero();
    if order >= Order::Gradient {
        let psi_xb = digamma_unchecked(x + b);
        d1 = digamma_unchecked(x) - psi_xb;
        let db = digamma_unchecked(b) - psi_xb;
        grad[0] = n * (-d1 / c);
        grad[1] = n * (-db);
        grad[2] = n * (c.recip() + a * d1 / (c * c));
    }
    if order >= Order::Hessian {
        let tri_xb = trigamma_unchecked(x + b);
        let t1 = trigamma_unchecked(x) - tri_xb;
        let tri_b = trigamma_unchecked(b);
        let c2 = c * c;
        hess[0][0] = n * (-t1 / c2);
        hess[0][1] = n * (tri_xb / c);
        hess[0][2] = n * (d1 / c2 + a * t1 / (c2 * c));
        hess[1][1] = n * (-(tri_b - tri_xb));
        hess[1][2] = n * (-a * tri_xb / c2);
        hess[2][2] = n * (-c2.recip() - T::lit(2.0) * a * d1 / (c2 * c) - a * a * t1 / (c2 * c2));
    }

    for &y in data {
        if order == Order::Value {
            let w = p.base.cum_hazard(y);
            if w.is_infinite() {
                value = T::neg_infinity();
                continue;
            }
            let parts = LogParts::new(w, c);
            value = value + p.base.ln_hazard(y) - w + weighted(a - one, parts.ln_g) + weighted(b - one, parts.l2);
            continue;
        }
        let t = p.base.terms(y);
        if t.w.is_infinite() {
            value = T::neg_infinity();
            continue;
        }
        let parts = LogParts::new(t.w, c);
        value = value + t.ln_h - t.w + weighted(a - one, parts.ln_g) + weighted(b - one, parts.l2);
        let vu = u_over_expm1(parts.u);
        let l2_c = vu / c;
        let l2_w = -vu * parts.qr;
        let kw = weighted(a - one, parts.q) + weighted(b - one, l2_w);
        grad[0] = grad[0] + parts.ln_g;
        grad[1] = grad[1] + parts.l2;
        grad[2] = grad[2] + weighted(b - one, l2_c);
        for k in 0..B::N_PARAMS {
            grad[3 + k] = grad[3 + k] + t.dlnh[k] + (kw - one) * t.dw[k];
        }
        if order < Order::Hessian {
            continue;
        }
        let (q, qr, u) = (parts.q, parts.qr, parts.u);
        let l2_cc = -vu * (u + vu) / (c * c);
        let l2_cw = qr / c * vu * u_plus_vu_minus_one(u, vu);
        let l2_ww = vu * qr * ((one + q) - (u + vu) * qr);
        let kww = weighted(a - one, -q * (one + q)) + weighted(b - one, l2_ww);
        hess[1][2] = hess[1][2] + l2_c;
        hess[2][2] = hess[2][2] + weighted(b - one, l2_cc);
        for k in 0..B::N_PARAMS {
            let dk = t.dw[k];
            hess[0][3 + k] = hess[0][3 + k] + q * dk;
            hess[1][3 + k] = hess[1][3 + k] + l2_w * dk;
            hess[2][3 + k] = hess[2][3 + k] + weighted(b - one, l2_cw) * dk;
            for l in k..B::N_PARAMS {
                hess[3 + k][3 + l] = hess[3 + k][3 + l] + t.d2lnh[k][l] + (kw - one) * t.d2w[k][l] + kww * dk * t.dw[l];
            }
        }
    }
    for i in 0..np {
        for j in 0..i {
            hess[i][j] = hess[j][i];
        }
    }
    LikTerms { value, grad, hess }
}

fn model_terms<T: Real>(spec: &ModelSpec, free: &[T], data: &Dataset<T>, order: Order) -> Result<LikTerms<T>> {
    let full = spec.embed(free)?;
    let terms = match spec.base {
        BaseKind::Gompertz => full_terms(&McDonald::<T, GompertzBase<T>>::from_slice(&full)?, &data.values, order),
        BaseKind::Exponential => full_terms(&McDonald::<T, ExpBase<T>>::from_slice(&full)?, &data.values, order),
    };
    if order == Order::Value {
        return Ok(terms);
    }
    let (m, _) = spec.embedding();
    let m: Matrix<T> = m.iter().map(|r| r.iter().map(|v| T::lit(*v)).collect()).collect();
    let k = spec.free_count;
    let grad = (0..k).map(|j| (0..m.len()).map(|i| m[i][j] * terms.grad[i]).sum()).collect();
    let hess = if order == Order::Hessian { congruence(&m, &terms.hess) } else { zeros(k, k) };
    Ok(LikTerms {
        value: terms.value,
        grad,
        hess,
    })
}

/// Log-likelihood of `data` at the free parameters of `spec`.
pub fn log_likelihood<T: Real>(spec: &ModelSpec, free: &[T], data: &Dataset<T>) -> Result<T> {
    model_terms(spec, free, data, Order::Value).map(|t| t.value)
}

/// Analytic score vector over the free parameters.
pub fn score<T: Real>(spec: &ModelSpec, free: &[T], data: &Dataset<T>) -> Result<Vec<T>> {
    model_terms(spec, free, data, Order::Gradient).map(|t| t.grad)
}

/// Analytic second-derivative matrix of the log-likelihood over the free parameters.
pub fn hessian<T: Real>(spec: &ModelSpec, free: &[T], data: &Dataset<T>) -> Result<Matrix<T>> {
    model_terms(spec, free, data, Order::Hessian).map(|t| t.hess)
}

/// Observed information `-∂²l` with its condition number.
#[derive(Debug, Clone, Serialize)]
pub struct InfoMatrix<T> {
    pub matrix: Matrix<T>,
    pub condition: T,
}

pub fn observed_info<T: Real>(spec: &ModelSpec, free: &[T], data: &Dataset<T>) -> Result<InfoMatrix<T>> {
    let h = hessian(spec, free, data)?;
    let matrix: Matrix<T> = h.into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect();
    let condition = condition_number(&matrix);
    Ok(InfoMatrix { matrix, condition })
}

/// Standard errors from the inverse information, if it is positive definite.
pub fn standard_errors<T: Real>(info: &Matrix<T>) -> Option<Vec<T>> {
    let inv = inverse_spd(info)?;
    let se: Vec<T> = (0..inv.len()).map(|i| inv[i][i].sqrt()).collect();
    se.iter().all(|v| v.is_finite()).then_some(se)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub n_starts: usize,
    pub seed: u64,
    /// Every free parameter is kept inside `[lower, upper]`.
    pub lower: f64,
    pub upper: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            step_tol: 1e-10,
            n_starts: 8,
            seed: 0,
            lower: 1e-8,
            upper: 1e8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult<T> {
    pub model: ModelSpec,
    pub param_names: Vec<String>,
    pub estimates: Vec<T>,
    pub std_errors: Option<Vec<T>>,
    pub neg_loglik: T,
    pub info_matrix: Matrix<T>,
    pub info_condition: T,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: T,
    pub n_obs: usize,
    /// Parameters that finished on the search box.
    pub at_bound: Vec<String>,
    pub start_index: usize,
    pub n_starts: usize,
    #[serde(skip)]
    pub trace: Vec<T>,
}

impl<T: Real> FitResult<T> {
    pub fn estimate(&self, name: &str) -> Option<T> {
        self.param_names.iter().position(|n| n == name).map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<T> {
        let i = self.param_names.iter().position(|n| n == name)?;
        self.std_errors.as_ref().map(|s| s[i])
    }

    pub fn member(&self) -> Result<Member<T>> {
        self.model.member(&self.estimates)
    }

    /// Full parameter vector (constrained entries filled in).
    pub fn full_estimates(&self) -> Result<Vec<T>> {
        self.model.embed(&self.estimates)
    }
}

/// Objective in log-parameter space: `-l(e^z) / n` with gradient and Hessian.
struct LogSpace<'a, T: Real> {
    spec: &'a ModelSpec,
    data: &'a Dataset<T>,
}

impl<'a, T: Real> LogSpace<'a, T> {
    fn n(&self) -> T {
        T::from_count(self.data.len())
    }

    fn value(&self, z: &[T]) -> T {
        let free: Vec<T> = z.iter().map(|v| v.exp()).collect();
        match log_likelihood(self.spec, &free, self.data) {
            Ok(v) if v.is_finite() => -v / self.n(),
            _ => T::infinity(),
        }
    }

    fn value_grad(&self, z: &[T]) -> (T, Vec<T>) {
        let free: Vec<T> = z.iter().map(|v| v.exp()).collect();
        match model_terms(self.spec, &free, self.data, Order::Gradient) {
            Ok(t) if t.value.is_finite() && t.grad.iter().all(|g| g.is_finite()) => {
                let n = self.n();
                (-t.value / n, t.grad.iter().zip(&free).map(|(g, p)| -*g * *p / n).collect())
            }
            _ => (T::infinity(), vec![T::nan(); z.len()]),
        }
    }

    /// Log-space Hessian of the objective.
    fn hessian(&self, z: &[T]) -> Option<Matrix<T>> {
        let free: Vec<T> = z.iter().map(|v| v.exp()).collect();
        let t = model_terms(self.spec, &free, self.data, Order::Hessian).ok()?;
        let n = self.n();
        let k = z.len();
        let mut h = zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                h[i][j] = -t.hess[i][j] * free[i] * free[j] / n;
            }
            h[i][i] = h[i][i] - t.grad[i] * free[i] / n;
        }
        Some(h)
    }

    /// Inverse of the log-space Hessian, when positive definite.
    fn inverse_hessian(&self, z: &[T]) -> Option<Matrix<T>> {
        inverse_spd(&self.hessian(z)?)
    }
}

#[derive(Debug, Clone)]
struct StartOutcome<T> {
    z: Vec<T>,
    f: T,
    iterations: usize,
    grad_norm: T,
    trace: Vec<T>,
}

fn run_start<T: Real>(obj: &LogSpace<'_, T>, z0: &[T], cfg: &OptimizerConfig) -> StartOutcome<T> {
    let bounds = Bounds {
        lower: T::lit(cfg.lower.ln()),
        upper: T::lit(cfg.upper.ln()),
    };
    let nm = nelder_mead(|z| obj.value(z), z0, T::lit(0.5), bounds, cfg.max_iter, T::lit(1e-10));
    let bcfg = BfgsConfig {
        max_iter: cfg.max_iter,
        grad_tol: T::lit(cfg.grad_tol),
        step_tol: T::lit(cfg.step_tol),
        max_step: T::lit(2.0),
    };
    let mut trace = nm.trace;
    let mut z = nm.x;
    let mut f = nm.f;
    let mut iterations = nm.iterations;
    let mut grad_norm = T::infinity();
    // quasi-Newton rounds, each re-seeded with the analytic curvature
    for _ in 0..4 {
        let h0 = obj.inverse_hessian(&z);
        let r = bfgs(|z| obj.value_grad(z), &z, h0, bounds, &bcfg);
        iterations += r.iterations;
        let improved = r.f < f;
        if r.f <= f {
            z = r.x;
            f = r.f;
            trace.extend(r.trace.into_iter().skip(1).filter(|v| v.is_finite()));
        }
        grad_norm = r.grad_norm;
        if grad_norm <= T::lit(cfg.grad_tol) || !improved {
            break;
        }
    }
    if grad_norm > T::lit(cfg.grad_tol) {
        if let Some((zn, fn_, gn, it)) = newton_polish(obj, &z, f, bounds, cfg) {
            z = zn;
            f = fn_;
            grad_norm = gn;
            iterations += it;
            trace.push(f);
        }
    }
    StartOutcome {
        z,
        f,
        iterations,
        grad_norm,
        trace,
    }
}

fn projected_grad<T: Real>(z: &[T], g: &[T], bounds: &Bounds<T>) -> Vec<T> {
    let eps = T::lit(1e-9);
    z.iter()
        .zip(g)
        .map(|(zi, gi)| {
            let pinned = (*zi <= bounds.lower + eps && *gi > T::zero()) || (*zi >= bounds.upper - eps && *gi < T::zero());
            if pinned {
                T::zero()
            } else {
                *gi
            }
        })
        .collect()
}

/// Damped Newton steps on the coordinates not pinned at a bound. BFGS stalls
/// on long narrow ridges where the analytic curvature still resolves the step.
fn newton_polish<T: Real>(obj: &LogSpace<'_, T>, z0: &[T], f0: T, bounds: Bounds<T>, cfg: &OptimizerConfig) -> Option<(Vec<T>, T, T, usize)> {
    let mut z = z0.to_vec();
    let mut f = f0;
    let (_, g) = obj.value_grad(&z);
    let mut pg = projected_grad(&z, &g, &bounds);
    let mut it = 0;
    for _ in 0..50 {
        if inf_norm(&pg) <= T::lit(cfg.grad_tol) {
            break;
        }
        let act: Vec<usize> = (0..z.len()).filter(|&i| pg[i] != T::zero()).collect();
        let h = obj.hessian(&z)?;
        let mut step = None;
        let mut mu = T::zero();
        for _ in 0..12 {
            let mut sub = zeros(act.len(), act.len());
            for (a, &i) in act.iter().enumerate() {
                for (b, &j) in act.iter().enumerate() {
                    sub[a][b] = h[i][j];
                }
                sub[a][a] = sub[a][a] + mu;
            }
            if let Some(inv) = inverse_spd(&sub) {
                let ga: Vec<T> = act.iter().map(|&i| pg[i]).collect();
                step = Some(mat_vec(&inv, &ga));
                break;
            }
            mu = if mu == T::zero() { T::lit(1e-8) } else { mu * T::lit(10.0) };
        }
        let d = step?;
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let mut zn = z.clone();
            for (a, &i) in act.iter().enumerate() {
                zn[i] = (z[i] - t * d[a]).max(bounds.lower).min(bounds.upper);
            }
            let fz = obj.value(&zn);
            if fz <= f {
                z = zn;
                f = fz;
                accepted = true;
                break;
            }
            t = t * T::lit(0.5);
        }
        it += 1;
        let (_, g) = obj.value_grad(&z);
        pg = projected_grad(&z, &g, &bounds);
        if !accepted {
            break;
        }
    }
    let gn = inf_norm(&pg);
    gn.is_finite().then_some((z, f, gn, it))
}

fn clamp_start<T: Real>(v: T, cfg: &OptimizerConfig) -> T {
    v.max(T::lit(cfg.lower)).min(T::lit(cfg.upper))
}

/// Gompertz (or exponential) fit used to seed the richer models.
fn baseline_seed<T: Real>(kind: BaseKind, data: &Dataset<T>, cfg: &OptimizerConfig) -> Vec<T> {
    let mean = data.mean();
    match kind {
        BaseKind::Exponential => vec![mean.recip()],
        BaseKind::Gompertz => {
            let spec = ModelName::G.spec();
            let obj = LogSpace { spec: &spec, data };
            let median = data.median();
            let mut best: Option<StartOutcome<T>> = None;
            for k in [0.01, 0.1, 1.0, 3.0] {
                let gamma = T::lit(k) / mean;
                // match the median: (θ/γ)(e^{γm} - 1) = ln 2
                let theta = gamma * T::LN_2() / (gamma * median).exp_m1();
                let z0 = [clamp_start(theta, cfg).ln(), clamp_start(gamma, cfg).ln()];
                let r = run_start(&obj, &z0, cfg);
                if best.as_ref().map_or(true, |b| r.f < b.f) {
                    best = Some(r);
                }
            }
            best.expect("at least one start").z.iter().map(|v| v.exp()).collect()
        }
    }
}

/// Starting points in free-parameter space: the baseline fit with unit shapes,
/// then shape corners ×{0.25, 4}, then seeded log-uniform shape draws.
pub fn default_starts<T: Real>(spec: &ModelSpec, data: &Dataset<T>, cfg: &OptimizerConfig) -> Vec<Vec<T>> {
    let base = baseline_seed(spec.base, data, cfg);
    let mut full = vec![T::one(); 3];
    full.extend(base);
    let start = spec.restrict(&full);
    let names = spec.free_names();
    let shape_idx: Vec<usize> = names.iter().enumerate().filter(|(_, n)| ["a", "b", "c"].contains(n)).map(|(i, _)| i).collect();
    let wanted = cfg.n_starts.max(1);
    let mut starts = vec![start.clone()];
    if shape_idx.is_empty() {
        return starts;
    }
    for mask in 0..(1usize << shape_idx.len()) {
        if starts.len() >= wanted {
            break;
        }
        let mut s = start.clone();
        for (bit, &i) in shape_idx.iter().enumerate() {
            s[i] = s[i] * T::lit(if mask >> bit & 1 == 1 { 4.0 } else { 0.25 });
        }
        starts.push(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < wanted {
        let mut s = start.clone();
        for &i in &shape_idx {
            let e: f64 = rng.gen_range(-3.0..3.0);
            s[i] = s[i] * T::lit(e.exp());
        }
        starts.push(s);
    }
    starts
}

/// Multistart maximum likelihood over the free parameters of `spec`.
pub fn fit_mle<T: Real>(spec: &ModelSpec, data: &Dataset<T>, cfg: &OptimizerConfig) -> Result<FitResult<T>> {
    fit_mle_with_starts(spec, data, cfg, &[])
}

/// As `fit_mle`, with caller-supplied starting points appended to the defaults.
pub fn fit_mle_with_starts<T: Real>(
    spec: &ModelSpec,
    data: &Dataset<T>,
    cfg: &OptimizerConfig,
    extra: &[Vec<T>],
) -> Result<FitResult<T>> {
    if !(cfg.lower > 0.0 && cfg.upper > cfg.lower && cfg.grad_tol > 0.0 && cfg.step_tol > 0.0) {
        return Err(McgError::Domain("optimizer tolerances and bounds must be positive".into()));
    }
    let mut starts = default_starts(spec, data, cfg);
    for s in extra {
        if s.len() != spec.free_count {
            return Err(McgError::Model(format!("start has {} entries, {} expected", s.len(), spec.free_count)));
        }
        starts.push(s.clone());
    }
    let obj = LogSpace { spec, data };
    let outcomes: Vec<StartOutcome<T>> = starts
        .par_iter()
        .map(|s| {
            let z0: Vec<T> = s.iter().map(|v| clamp_start(*v, cfg).ln()).collect();
            run_start(&obj, &z0, cfg)
        })
        .collect();
    // lowest objective wins; ties go to the earliest start
    let (best_idx, best) = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.f.is_finite())
        .fold(None::<(usize, &StartOutcome<T>)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.f <= o.f => acc,
            _ => Some((i, o)),
        })
        .ok_or_else(|| McgError::Optimizer("no start produced a finite likelihood".into()))?;
    let estimates: Vec<T> = best.z.iter().map(|v| v.exp()).collect();
    let info = observed_info(spec, &estimates, data)?;
    let std_errors = standard_errors(&info.matrix);
    let names = spec.free_names();
    let lo = T::lit(cfg.lower.ln());
    let hi = T::lit(cfg.upper.ln());
    let at_bound = names
        .iter()
        .zip(&best.z)
        .filter(|(_, z)| **z <= lo + T::lit(1e-9) || **z >= hi - T::lit(1e-9))
        .map(|(n, _)| n.to_string())
        .collect();
    let grad_norm = best.grad_norm;
    Ok(FitResult {
        model: spec.clone(),
        param_names: names.iter().map(|s| s.to_string()).collect(),
        estimates,
        std_errors,
        neg_loglik: best.f * T::from_count(data.len()),
        info_matrix: info.matrix,
        info_condition: info.condition,
        converged: grad_norm <= T::lit(10.0 * cfg.grad_tol),
        iterations: best.iterations,
        grad_norm,
        n_obs: data.len(),
        at_bound,
        start_index: best_idx,
        n_starts: starts.len(),
        trace: best.trace.iter().map(|v| *v * T::from_count(data.len())).collect(),
    })
}

/// One Wald interval.
#[derive(Debug, Clone, Serialize)]
pub struct Interval<T> {
    pub param: String,
    pub estimate: T,
    pub lower: T,
    pub upper: T,
}

/// `estimate ± z_{(1+level)/2} SE` for each free parameter.
pub fn asymptotic_ci<T: Real>(fit: &FitResult<T>, level: T) -> Result<Vec<Interval<T>>> {
    if !(level >= T::zero() && level < T::one()) {
        return Err(McgError::Domain(format!("confidence level must lie in [0, 1), got {level}")));
    }
    let se = fit
        .std_errors
        .as_ref()
        .ok_or_else(|| McgError::Degenerate("standard errors unavailable: information matrix not positive definite".into()))?;
    let z = if level == T::zero() {
        T::zero()
    } else {
        normal_quantile((T::one() + level) / T::lit(2.0))?
    };
    Ok(fit
        .param_names
        .iter()
        .zip(&fit.estimates)
        .zip(se)
        .map(|((n, e), s)| Interval {
            param: n.clone(),
            estimate: *e,
            lower: *e - z * *s,
            upper: *e + z * *s,
        })
        .collect())
}

/// Scaled gradient norm `max |∂(-l/n)/∂ ln θ_i|` at a point.
pub fn scaled_gradient_norm<T: Real>(spec: &ModelSpec, free: &[T], data: &Dataset<T>) -> Result<T> {
    let g = score(spec, free, data)?;
    let n = T::from_count(data.len());
    Ok(inf_norm(&g.iter().zip(free).map(|(g, p)| *g * *p / n).collect::<Vec<T>>()))
}

//! The McDonald generator `F = I(G^c; a/c, b)` over a baseline law.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::base::{Baseline, ExpBase, GompertzBase};
use crate::error::{domain, Result};
use crate::real::{ln1mexp, ln1mexp_of_log, Real};
use crate::specfun::{self, Tolerance};

/// McDonald-generated law with shapes `(a, b, c)` over `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McDonald<T, B> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub base: B,
}

/// The five-parameter McDonald-Gompertz law.
pub type McgParams<T> = McDonald<T, GompertzBase<T>>;
/// McDonald law over the exponential base (γ→0 limit).
pub type McExpParams<T> = McDonald<T, ExpBase<T>>;

impl<T: Real> McgParams<T> {
    pub fn new(a: T, b: T, c: T, theta: T, gamma: T) -> Result<Self> {
        Self::with_base(a, b, c, GompertzBase::new(theta, gamma)?)
    }

    pub fn theta(&self) -> T {
        self.base.theta
    }

    pub fn gamma(&self) -> T {
        self.base.gamma
    }
}

impl<T: Real> McExpParams<T> {
    pub fn new(a: T, b: T, c: T, theta: T) -> Result<Self> {
        Self::with_base(a, b, c, ExpBase::new(theta)?)
    }

    pub fn theta(&self) -> T {
        self.base.theta
    }
}

/// Log-space pieces of `G` shared by the density and the likelihood.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogParts<T> {
    /// `ln G`
    pub ln_g: T,
    /// `ln(1 - G^c)`
    pub l2: T,
    /// `u = -c ln G`
    pub u: T,
    /// `1 / expm1(w)`
    pub q: T,
    /// `q / (-ln G)`, which tends to 1 in the upper tail
    pub qr: T,
}

impl<T: Real> LogParts<T> {
    pub fn new(w: T, c: T) -> Self {
        let ln_g = ln1mexp(w);
        let forty = T::lit(40.0);
        let neg = -ln_g;
        // ln(-ln G) without forming the subnormal -ln G far in the tail
        let ln_neg = if w > forty { -w + (-w).exp() / T::lit(2.0) } else { neg.ln() };
        let l2 = ln1mexp_of_log(c.ln() + ln_neg);
        let q = w.exp_m1().recip();
        let qr = if w > forty { T::one() } else { q / neg };
        Self {
            ln_g,
            l2,
            u: c * neg,
            q,
            qr,
        }
    }
}

/// `coef * v`, treating `0 * inf` as 0.
#[inline]
pub(crate) fn weighted<T: Real>(coef: T, v: T) -> T {
    if coef == T::zero() {
        T::zero()
    } else {
        coef * v
    }
}

impl<T: Real, B: Baseline<T>> McDonald<T, B> {
    pub fn with_base(a: T, b: T, c: T, base: B) -> Result<Self> {
        for (v, n) in [(a, "a"), (b, "b"), (c, "c")] {
            if !(v > T::zero() && v.is_finite()) {
                return domain(format!("{n} must be positive and finite, got {v}"));
            }
        }
        Ok(Self { a, b, c, base })
    }

    /// Parameter names in vector order.
    pub fn param_names() -> Vec<&'static str> {
        let mut v = vec!["a", "b", "c"];
        v.extend_from_slice(B::PARAM_NAMES);
        v
    }

    pub fn n_params() -> usize {
        3 + B::N_PARAMS
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = vec![self.a, self.b, self.c];
        v.extend(self.base.to_vec());
        v
    }

    pub fn from_slice(p: &[T]) -> Result<Self> {
        if p.len() != Self::n_params() {
            return domain(format!("expected {} parameters, got {}", Self::n_params(), p.len()));
        }
        Self::with_base(p[0], p[1], p[2], B::from_slice(&p[3..])?)
    }

    /// `a / c`, the first beta shape.
    pub fn x(&self) -> T {
        self.a / self.c
    }

    pub fn ln_beta(&self) -> T {
        specfun::ln_beta_unchecked(self.x(), self.b)
    }

    pub fn base_cdf(&self, y: T) -> T {
        self.base.cdf(y)
    }

    pub fn base_pdf(&self, y: T) -> T {
        self.base.pdf(y)
    }

    /// Limit of the density at `y → 0⁺`.
    pub fn density_limit_at_zero(&self) -> T {
        if self.a < T::one() {
            T::infinity()
        } else if self.a > T::one() {
            T::zero()
        } else {
            (self.base.ln_hazard(T::zero()) + self.c.ln() - self.ln_beta()).exp()
        }
    }

    pub fn log_pdf(&self, y: T) -> T {
        if y < T::zero() || y.is_nan() {
            return T::neg_infinity();
        }
        if y == T::zero() {
            return self.density_limit_at_zero().ln();
        }
        let w = self.base.cum_hazard(y);
        if w.is_infinite() {
            return T::neg_infinity();
        }
        let parts = LogParts::new(w, self.c);
        let one = T::one();
        self.c.ln() - self.ln_beta() + self.base.ln_hazard(y) - w
            + weighted(self.a - one, parts.ln_g)
            + weighted(self.b - one, parts.l2)
    }

    pub fn pdf(&self, y: T) -> T {
        self.log_pdf(y).exp()
    }

    /// `(F(y), 1 - F(y))`, each accurate in its own tail.
    pub fn cdf_pair(&self, y: T, tol: &Tolerance<T>) -> Result<(T, T)> {
        if y.is_nan() {
            return domain("cdf evaluated at NaN");
        }
        if y <= T::zero() {
            return Ok((T::zero(), T::one()));
        }
        let w = self.base.cum_hazard(y);
        if w.is_infinite() {
            return Ok((T::one(), T::zero()));
        }
        let parts = LogParts::new(w, self.c);
        specfun::inc_beta_pair_ln(self.c * parts.ln_g, parts.l2, self.x(), self.b, tol)
    }

    pub fn cdf(&self, y: T) -> Result<T> {
        self.cdf_pair(y, &Tolerance::default()).map(|p| p.0)
    }

    pub fn survival(&self, y: T) -> Result<T> {
        self.cdf_pair(y, &Tolerance::default()).map(|p| p.1)
    }

    /// `f / (1 - F)`.
    pub fn hazard(&self, y: T) -> Result<T> {
        let s = self.survival(y)?;
        if !(s > T::zero()) {
            return domain(format!("survival underflows at y = {y}"));
        }
        Ok(self.pdf(y) / s)
    }

    /// `f / F`.
    pub fn reversed_hazard(&self, y: T) -> Result<T> {
        let f = self.cdf(y)?;
        if !(f > T::zero()) {
            return domain(format!("cdf underflows at y = {y}"));
        }
        Ok(self.pdf(y) / f)
    }

    /// Unnormalised kernel `c g G^{a-1} (1 - G^c)^{b-1}` and the incomplete
    /// beta value `B_x(a/c, b)` at `x = G^c`.
    fn kernel_and_partial_beta(&self, y: T) -> Result<(T, T, T)> {
        let ln_b = self.ln_beta();
        let kernel = (self.log_pdf(y) + ln_b).exp();
        let full = ln_b.exp();
        let (i, _) = self.cdf_pair(y, &Tolerance::default())?;
        Ok((kernel, full, full * i))
    }

    /// Hazard through `c g G^{a-1}(1-G^c)^{b-1} / (B(a/c,b) - B_x(a/c,b))`.
    pub fn hazard_direct(&self, y: T) -> Result<T> {
        let (k, full, part) = self.kernel_and_partial_beta(y)?;
        let den = full - part;
        if !(den > T::zero()) {
            return domain(format!("survival underflows at y = {y}"));
        }
        Ok(k / den)
    }

    /// Reversed hazard through `c g G^{a-1}(1-G^c)^{b-1} / B_x(a/c,b)`.
    pub fn reversed_hazard_direct(&self, y: T) -> Result<T> {
        let (k, _, part) = self.kernel_and_partial_beta(y)?;
        if !(part > T::zero()) {
            return domain(format!("cdf underflows at y = {y}"));
        }
        Ok(k / part)
    }

    /// Quantile from the pair `(t, 1 - t)`; use it to reach far upper quantiles.
    pub fn quantile_pair(&self, t: T, t_c: T, tol: &Tolerance<T>) -> Result<T> {
        let (ln_v, ln_v_c) = specfun::inc_beta_inv_pair_ln(t, t_c, self.x(), self.b, tol)?;
        if ln_v == T::neg_infinity() {
            return Ok(T::zero());
        }
        if ln_v_c == T::neg_infinity() {
            return Ok(T::infinity());
        }
        // w = -ln(1 - v^{1/c})
        let w = -ln1mexp(-ln_v / self.c);
        Ok(self.base.inv_cum_hazard(w))
    }

    pub fn quantile(&self, t: T, tol: &Tolerance<T>) -> Result<T> {
        if !(t > T::zero() && t < T::one()) {
            return domain(format!("quantile requires t in (0, 1), got {t}"));
        }
        self.quantile_pair(t, T::one() - t, tol)
    }

    /// `n` inverse-transform draws from a ChaCha stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = Tolerance::default();
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile_pair(T::lit(u), T::lit(1.0 - u), &tol)
            })
            .collect()
    }
}

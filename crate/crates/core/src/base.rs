//! Baseline lifetime laws fed into the McDonald generator.
//!
//! A baseline is described by its cumulative hazard `w(y)` and log hazard
//! `ln h(y)`, so that `G = 1 - e^{-w}` and `g = h e^{-w}`. Working with `w`
//! instead of `G` keeps both tails representable.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::real::{ln1mexp, Real};

/// Value and parameter derivatives of `w` and `ln h` at one point.
///
/// Entries past `Baseline::N_PARAMS` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseTerms<T> {
    pub w: T,
    pub ln_h: T,
    pub dw: [T; 2],
    pub d2w: [[T; 2]; 2],
    pub dlnh: [T; 2],
    pub d2lnh: [[T; 2]; 2],
}

pub trait Baseline<T: Real>: Copy + Debug + PartialEq + Send + Sync + 'static {
    const N_PARAMS: usize;
    const PARAM_NAMES: &'static [&'static str];

    fn from_slice(p: &[T]) -> Result<Self>;
    fn to_vec(&self) -> Vec<T>;

    /// Cumulative hazard `w(y) = -ln(1 - G(y))`, possibly `+inf`.
    fn cum_hazard(&self, y: T) -> T;
    fn ln_hazard(&self, y: T) -> T;
    /// Inverse of `cum_hazard`.
    fn inv_cum_hazard(&self, w: T) -> T;
    fn terms(&self, y: T) -> BaseTerms<T>;

    fn cdf(&self, y: T) -> T {
        if y <= T::zero() {
            return T::zero();
        }
        -(-self.cum_hazard(y)).exp_m1()
    }

    fn pdf(&self, y: T) -> T {
        if y < T::zero() {
            return T::zero();
        }
        let w = self.cum_hazard(y);
        if w.is_infinite() {
            return T::zero();
        }
        (self.ln_hazard(y) - w).exp()
    }

    /// `ln G(y)`.
    fn ln_cdf(&self, y: T) -> T {
        ln1mexp(self.cum_hazard(y))
    }
}

fn check<T: Real>(v: T, name: &str) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

/// Gompertz law `G(y) = 1 - exp(-(θ/γ)(e^{γy} - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GompertzBase<T> {
    pub theta: T,
    pub gamma: T,
}

impl<T: Real> GompertzBase<T> {
    pub fn new(theta: T, gamma: T) -> Result<Self> {
        check(theta, "theta")?;
        check(gamma, "gamma")?;
        Ok(Self { theta, gamma })
    }
}

/// `expm1(x)/x` and its first two derivatives.
fn phi<T: Real>(x: T) -> (T, T, T) {
    if x.abs() < T::lit(0.5) {
        // Σ x^k/(k+1)! and its termwise derivatives
        let mut p0 = T::zero();
        let mut p1 = T::zero();
        let mut p2 = T::zero();
        let mut fact = T::one();
        let mut xk = T::one();
        let mut xk1 = T::zero();
        let mut xk2 = T::zero();
        for k in 0..25usize {
            fact = fact * T::from_count(k + 1);
            let kk = T::from_count(k);
            p0 = p0 + xk / fact;
            p1 = p1 + kk * xk1 / fact;
            p2 = p2 + kk * (kk - T::one()) * xk2 / fact;
            xk2 = xk1;
            xk1 = xk;
            xk = xk * x;
        }
        (p0, p1, p2)
    } else {
        let em1 = x.exp_m1();
        let ex = x.exp();
        let x2 = x * x;
        let two = T::lit(2.0);
        (em1 / x, (x * ex - em1) / x2, (x2 * ex - two * x * ex + two * em1) / (x2 * x))
    }
}

impl<T: Real> Baseline<T> for GompertzBase<T> {
    const N_PARAMS: usize = 2;
    const PARAM_NAMES: &'static [&'static str] = &["theta", "gamma"];

    fn from_slice(p: &[T]) -> Result<Self> {
        match p {
            [theta, gamma] => Self::new(*theta, *gamma),
            _ => domain("gompertz baseline takes (theta, gamma)"),
        }
    }

    fn to_vec(&self) -> Vec<T> {
        vec![self.theta, self.gamma]
    }

    fn cum_hazard(&self, y: T) -> T {
        if y <= T::zero() {
            return T::zero();
        }
        let x = self.gamma * y;
        if x < T::lit(1.0) {
            self.theta * y * phi(x).0
        } else {
            // (θ/γ) e^x (1 - e^{-x}) in log form survives e^x overflow
            let lw = (self.theta / self.gamma).ln() + x + (-(-x).exp()).ln_1p();
            lw.exp()
        }
    }

    fn ln_hazard(&self, y: T) -> T {
        self.theta.ln() + self.gamma * y
    }

    fn inv_cum_hazard(&self, w: T) -> T {
        if w <= T::zero() {
            return T::zero();
        }
        let r = self.gamma * w / self.theta;
        if r.is_finite() {
            r.ln_1p() / self.gamma
        } else {
            (self.gamma.ln() + w.ln() - self.theta.ln()) / self.gamma
        }
    }

    fn terms(&self, y: T) -> BaseTerms<T> {
        let z = T::zero();
        let x = self.gamma * y;
        let (p0, p1, p2) = phi(x);
        let th = self.theta;
        let y2 = y * y;
        BaseTerms {
            w: self.cum_hazard(y),
            ln_h: self.ln_hazard(y),
            dw: [y * p0, th * y2 * p1],
            d2w: [[z, y2 * p1], [y2 * p1, th * y2 * y * p2]],
            dlnh: [th.recip(), y],
            d2lnh: [[-(th * th).recip(), z], [z, z]],
        }
    }
}

/// Exponential law `G(y) = 1 - e^{-θy}`, the γ→0 limit of the Gompertz law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpBase<T> {
    pub theta: T,
}

impl<T: Real> ExpBase<T> {
    pub fn new(theta: T) -> Result<Self> {
        check(theta, "theta")?;
        Ok(Self { theta })
    }
}

impl<T: Real> Baseline<T> for ExpBase<T> {
    const N_PARAMS: usize = 1;
    const PARAM_NAMES: &'static [&'static str] = &["theta"];

    fn from_slice(p: &[T]) -> Result<Self> {
        match p {
            [theta] => Self::new(*theta),
            _ => domain("exponential baseline takes (theta)"),
        }
    }

    fn to_vec(&self) -> Vec<T> {
        vec![self.theta]
    }

    fn cum_hazard(&self, y: T) -> T {
        if y <= T::zero() {
            T::zero()
        } else {
            self.theta * y
        }
    }

    fn ln_hazard(&self, _y: T) -> T {
        self.theta.ln()
    }

    fn inv_cum_hazard(&self, w: T) -> T {
        w.max(T::zero()) / self.theta
    }

    fn terms(&self, y: T) -> BaseTerms<T> {
        let z = T::zero();
        let th = self.theta;
        BaseTerms {
            w: self.cum_hazard(y),
            ln_h: th.ln(),
            dw: [y, z],
            d2w: [[z; 2]; 2],
            dlnh: [th.recip(), z],
            d2lnh: [[-(th * th).recip(), z], [z, z]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gompertz_reference_values() {
        let g = GompertzBase::new(1.0_f64, 1.0).unwrap();
        assert_eq!(g.cdf(0.0), 0.0);
        assert!((g.cdf(std::f64::consts::LN_2) - (1.0 - (-1.0_f64).exp())).abs() < 1e-15);
        assert!((g.pdf(std::f64::consts::LN_2) - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        let g = GompertzBase::new(0.5_f64, 1.0).unwrap();
        assert_eq!(g.pdf(0.0), 0.5);
    }

    #[test]
    fn gompertz_high_precision_oracle() {
        // 50-digit evaluation of 1 - exp(-(θ/γ)(e^{γy}-1)) at θ=0.0012, γ=0.0875, y=45
        let g = GompertzBase::new(0.0012_f64, 0.0875).unwrap();
        assert!((g.cdf(45.0) - 0.498_270_616_780_123_86).abs() < 1e-14);
    }

    #[test]
    fn gompertz_pdf_is_cdf_derivative() {
        for &(th, ga) in &[(0.1, 0.5), (2.0, 0.01), (0.0012, 0.0875)] {
            let g = GompertzBase::new(th, ga).unwrap();
            for i in 1..40 {
                let y = 0.25 * f64::from(i);
                let h = 1e-6;
                let fd = (g.cdf(y + h) - g.cdf(y - h)) / (2.0 * h);
                assert!((fd - g.pdf(y)).abs() < 1e-6, "theta={th} gamma={ga} y={y}");
            }
        }
    }

    #[test]
    fn overflow_guard() {
        let g = GompertzBase::new(1.0_f64, 10.0).unwrap();
        assert_eq!(g.cdf(100.0), 1.0);
        assert_eq!(g.pdf(100.0), 0.0);
        assert!(g.cum_hazard(100.0).is_infinite());
    }

    #[test]
    fn inverse_cumulative_hazard_round_trip() {
        let g = GompertzBase::new(0.3_f64, 0.7).unwrap();
        for &y in &[1e-9, 0.01, 1.0, 10.0, 300.0] {
            let w = g.cum_hazard(y);
            assert!((g.inv_cum_hazard(w) - y).abs() <= 1e-12 * y.max(1.0));
        }
    }

    #[test]
    fn derivative_terms_match_finite_differences() {
        let g = GompertzBase::new(0.4_f64, 0.3).unwrap();
        for &y in &[0.2, 1.7, 9.0] {
            let t = g.terms(y);
            let h = 1e-6;
            let w = |th: f64, ga: f64| GompertzBase::new(th, ga).unwrap().cum_hazard(y);
            let fd_th = (w(0.4 + h, 0.3) - w(0.4 - h, 0.3)) / (2.0 * h);
            let fd_ga = (w(0.4, 0.3 + h) - w(0.4, 0.3 - h)) / (2.0 * h);
            assert!((t.dw[0] - fd_th).abs() < 1e-6 * fd_th.abs().max(1.0));
            assert!((t.dw[1] - fd_ga).abs() < 1e-6 * fd_ga.abs().max(1.0));
            let dwg = |ga: f64| GompertzBase::new(0.4, ga).unwrap().terms(y).dw[1];
            let fd_gg = (dwg(0.3 + h) - dwg(0.3 - h)) / (2.0 * h);
            assert!((t.d2w[1][1] - fd_gg).abs() < 1e-5 * fd_gg.abs().max(1.0));
        }
    }

    #[test]
    fn exponential_base() {
        let e = ExpBase::new(2.0_f64).unwrap();
        assert!((e.pdf(0.5) - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        assert!(ExpBase::new(0.0_f64).is_err());
    }
}

//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.

use serde::{Deserialize, Serialize};

use crate::error::{McgError, Result};
use crate::real::Real;

/// Accuracy request and subdivision budget for one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-8),
            max_subdivisions: 200,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > T::zero()) || !(rel_tol > T::zero()) || max_subdivisions == 0 {
            return Err(McgError::Domain(
                "quadrature tolerances must be positive and the budget nonzero".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let hl = half * (b - a);
    let fc = f(center);
    let mut fv = [(T::zero(), T::zero()); 7];
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = hl * T::lit(XGK[j]);
        let (f1, f2) = (f(center - dx), f(center + dx));
        *slot = (f1, f2);
        kronrod = kronrod + T::lit(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = kronrod * half;
    let mut asc = T::lit(WGK[7]) * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc = asc + T::lit(WGK[j]) * ((*f1 - mean).abs() + (*f2 - mean).abs());
    }
    let value = kronrod * hl;
    let asc = asc * hl.abs();
    let mut error = ((kronrod - gauss) * hl).abs();
    // QUADPACK rescaling of the raw Gauss/Kronrod difference
    if asc > T::zero() && error > T::zero() {
        error = asc * (T::lit(200.0) * error / asc).powf(T::lit(1.5)).min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon();
    if asc.is_finite() && error < floor * value.abs() {
        error = floor * value.abs();
    }
    Panel { a, b, value, error }
}

/// Integral estimate with the accumulated error bound and the number of panels used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub panels: usize,
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<Integral<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(McgError::Domain("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: T::zero(),
            panels: 0,
        });
    }
    if b < a {
        let r = integrate(f, b, a, spec)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    let mut panels = vec![gk15(&mut f, a, b)];
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let err: T = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            return Err(McgError::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= target {
            return Ok(Integral {
                value: total,
                error: err,
                panels: panels.len(),
            });
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(McgError::Quadrature(format!(
                "error estimate {err} above target {target} after {} panels",
                panels.len()
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let worst = panels.swap_remove(idx);
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(McgError::Quadrature("panel width underflow".into()));
        }
        panels.push(gk15(&mut f, worst.a, mid));
        panels.push(gk15(&mut f, mid, worst.b));
    }
}

/// Sums `integrate` over consecutive breakpoints, with a per-panel share of the
/// absolute tolerance.
pub fn integrate_panels<T: Real, F: FnMut(T) -> T>(mut f: F, breaks: &[T], spec: &QuadratureSpec<T>) -> Result<Integral<T>> {
    let pieces = breaks.len().saturating_sub(1).max(1);
    let sub = QuadratureSpec {
        abs_tol: spec.abs_tol / T::from_count(pieces),
        ..*spec
    };
    let mut out = Integral {
        value: T::zero(),
        error: T::zero(),
        panels: 0,
    };
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], &sub)?;
        out.value = out.value + r.value;
        out.error = out.error + r.error;
        out.panels += r.panels;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, &spec).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0 + 3.0)).abs() < 1e-13);
        assert_eq!(r.panels, 1);
    }

    #[test]
    fn smooth_and_peaked_integrands() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, &spec).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| x.cos(), 1.0, 0.0, &spec).unwrap();
        assert!((r.value + 1.0_f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        let r = integrate(|x: f64| x.powf(-0.9), 0.0, 1.0, &spec);
        assert!(matches!(r, Err(McgError::Quadrature(_))));
    }

    #[test]
    fn breakpoints_add_up() {
        let spec = QuadratureSpec::default();
        let r = integrate_panels(|x: f64| x.exp(), &[0.0, 0.3, 1.0, 2.0], &spec).unwrap();
        assert!((r.value - (2.0_f64.exp() - 1.0)).abs() < 1e-12);
    }
}

//! Moments, MGF and entropies by panelled quadrature, and the quantile-based
//! Bowley and Moors measures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::base::Baseline;
use crate::distribution::{McDonald, McgParams};
use crate::error::{domain, McgError, Result};
use crate::quadrature::{integrate, integrate_panels, QuadratureSpec};
use crate::real::Real;
use crate::specfun::{digamma_unchecked, Tolerance};

/// Quantile levels used as panel breaks.
const LEVELS: [f64; 9] = [0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999];

/// Integrates `h(y)` over `(0, ∞)` for an integrand shaped like the density of `p`.
///
/// `spike` is the exponent `e` in `h(y) ~ y^{e-1}` at the origin; `decay` is the
/// rate `r` in `h(y) ~ e^{-r w(y)}` in the upper tail.
pub(crate) fn integrate_like<T, B, H>(p: &McDonald<T, B>, spike: T, decay: T, h: H, q: &QuadratureSpec<T>) -> Result<T>
where
    T: Real,
    B: Baseline<T>,
    H: Fn(T) -> T,
{
    if !(spike > T::zero()) {
        return Err(McgError::Divergent(format!("integrand behaves like y^({}) at 0 and is not integrable", spike - T::one())));
    }
    if !(decay > T::zero()) {
        return Err(McgError::Divergent("integrand does not decay in the upper tail".into()));
    }
    let tol = Tolerance::default();
    let mut breaks = Vec::with_capacity(LEVELS.len() + 2);
    for t in LEVELS {
        let y = p.quantile_pair(T::lit(t), T::lit(1.0 - t), &tol)?;
        if y > T::zero() && y.is_finite() && breaks.last().map_or(true, |l| y > *l) {
            breaks.push(y);
        }
    }
    let far = p.quantile_pair(T::one(), T::lit(1e-14), &tol)?;
    if far.is_finite() && breaks.last().map_or(true, |l| far > *l) {
        breaks.push(far);
    }
    let last = *breaks.last().ok_or_else(|| McgError::Quadrature("no finite panel breaks".into()))?;
    // push the end until the tail factor e^{-decay·w} is below e^{-60}
    let w_end = p.base.cum_hazard(last).max(T::lit(60.0) / decay);
    let end = p.base.inv_cum_hazard(w_end);
    if end.is_finite() && end > last {
        breaks.push(end);
    }
    let n_pieces = T::from_count(breaks.len());
    let sub = QuadratureSpec {
        abs_tol: q.abs_tol / n_pieces,
        ..*q
    };
    // first panel: y = y1 s^m makes the transformed integrand ~ s^{m e - 1}
    let y1 = breaks[0];
    let m = (T::lit(2.0) / spike).max(T::one());
    let head = integrate(
        |s: T| {
            let y = y1 * s.powf(m);
            if !(y > T::zero()) {
                return T::zero();
            }
            let v = h(y) * m * y / s;
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        },
        T::zero(),
        T::one(),
        &sub,
    )?;
    let body = integrate_panels(
        |y: T| {
            let v = h(y);
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        },
        &breaks,
        &sub,
    )?;
    Ok(head.value + body.value)
}

fn density_term<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, y: T) -> T {
    let lp = p.log_pdf(y);
    if lp == T::neg_infinity() {
        T::zero()
    } else {
        lp.exp()
    }
}

/// `∫ y^k f(y) dy`.
pub fn moment_numeric<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, k: u32, q: &QuadratureSpec<T>) -> Result<T> {
    if k == 0 {
        return domain("moment order must be >= 1");
    }
    let kf = T::from_count(k as usize);
    integrate_like(p, p.a + kf, p.b, |y| y.powi(k as i32) * density_term(p, y), q)
}

/// `∫ e^{ty} f(y) dy`.
pub fn mgf_numeric<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, t: T, q: &QuadratureSpec<T>) -> Result<T> {
    if !t.is_finite() {
        return domain(format!("mgf argument must be finite, got {t}"));
    }
    // for a linear cumulative hazard e^{ty} competes with e^{-b w}
    let slope = p.base.cum_hazard(T::lit(2.0)) - p.base.cum_hazard(T::one());
    let linear = ((p.base.cum_hazard(T::lit(3.0)) - p.base.cum_hazard(T::lit(2.0))) - slope).abs() <= T::lit(1e-12) * slope;
    let decay = if linear && t > T::zero() { p.b - t / slope } else { p.b };
    integrate_like(p, p.a, decay, |y| (t * y).exp() * density_term(p, y), q)
}

/// Shannon entropy `-∫ f ln f`.
pub fn shannon_numeric<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, q: &QuadratureSpec<T>) -> Result<T> {
    integrate_like(
        p,
        p.a,
        p.b,
        |y| {
            let lp = p.log_pdf(y);
            if lp == T::neg_infinity() {
                T::zero()
            } else {
                -lp.exp() * lp
            }
        },
        q,
    )
}

/// Closed-form Shannon entropy with the expectations filled in numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShannonClosed<T> {
    /// The expression with `(a-1) ζ(a, b) + (b-1) ζ(b, a)`.
    pub printed: T,
    /// The same expression with `(a-1)/c · ζ(a/c, b) + (b-1) ζ(b, a/c)`.
    pub corrected: T,
    pub numeric: T,
    /// `printed` agrees with `numeric` within 1e-4 (relative to max(1, |numeric|)).
    pub printed_agrees: bool,
}

fn zeta_pair<T: Real>(r: T, s: T) -> T {
    digamma_unchecked(r + s) - digamma_unchecked(r)
}

pub fn shannon_closed<T: Real>(p: &McgParams<T>, q: &QuadratureSpec<T>) -> Result<ShannonClosed<T>> {
    let (a, b, c) = (p.a, p.b, p.c);
    let (theta, gamma) = (p.theta(), p.gamma());
    let one = T::one();
    let mean = moment_numeric(p, 1, q)?;
    let m_gamma = mgf_numeric(p, gamma, q)?;
    let common = p.ln_beta() - (c * theta).ln() - theta / gamma - gamma * mean + theta / gamma * m_gamma;
    let printed = common + (a - one) * zeta_pair(a, b) + (b - one) * zeta_pair(b, a);
    let x = p.x();
    let corrected = common + (a - one) / c * zeta_pair(x, b) + (b - one) * zeta_pair(b, x);
    let numeric = shannon_numeric(p, q)?;
    Ok(ShannonClosed {
        printed,
        corrected,
        numeric,
        printed_agrees: (printed - numeric).abs() <= T::lit(1e-4) * numeric.abs().max(one),
    })
}

/// Rényi entropy `(1-ρ)^{-1} ln ∫ f^ρ`.
pub fn renyi_numeric<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, rho: T, q: &QuadratureSpec<T>) -> Result<T> {
    if !(rho > T::zero()) || rho == T::one() || !rho.is_finite() {
        return domain(format!("Rényi order must be positive and != 1, got {rho}"));
    }
    let one = T::one();
    // f^ρ ~ y^{ρ(a-1)} at the origin
    let spike = rho * (p.a - one) + one;
    let integral = integrate_like(
        p,
        spike,
        rho * p.b,
        |y| {
            let lp = p.log_pdf(y);
            if lp == T::neg_infinity() {
                T::zero()
            } else {
                (rho * lp).exp()
            }
        },
        q,
    )?;
    if !(integral > T::zero() && integral.is_finite()) {
        return Err(McgError::Divergent(format!("∫ f^ρ evaluated to {integral}")));
    }
    Ok(integral.ln() / (one - rho))
}

/// Quantile function of `p` as a closure.
pub fn quantile_fn<T: Real, B: Baseline<T>>(p: McDonald<T, B>) -> impl Fn(T) -> Result<T> {
    move |t| p.quantile(t, &Tolerance::default())
}

/// `[Q(3/4) - 2Q(1/2) + Q(1/4)] / [Q(3/4) - Q(1/4)]`.
pub fn bowley<T: Real, Q: Fn(T) -> Result<T>>(q: Q) -> Result<T> {
    let (q1, q2, q3) = (q(T::lit(0.25))?, q(T::lit(0.5))?, q(T::lit(0.75))?);
    let den = q3 - q1;
    if !(den > T::zero()) {
        return Err(McgError::Degenerate("Bowley skewness: Q(3/4) = Q(1/4)".into()));
    }
    Ok((q3 - q2 - (q2 - q1)) / den)
}

/// `[Q(7/8) - Q(5/8) + Q(3/8) - Q(1/8)] / [Q(6/8) - Q(2/8)]`.
pub fn moors<T: Real, Q: Fn(T) -> Result<T>>(q: Q) -> Result<T> {
    let o = |k: f64| q(T::lit(k / 8.0));
    let den = o(6.0)? - o(2.0)?;
    if !(den > T::zero()) {
        return Err(McgError::Degenerate("Moors kurtosis: Q(6/8) = Q(2/8)".into()));
    }
    Ok((o(7.0)? - o(5.0)? + o(3.0)? - o(1.0)?) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Bowley,
    Moors,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Bowley => "bowley",
            Measure::Moors => "moors",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = McgError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bowley" => Ok(Measure::Bowley),
            "moors" => Ok(Measure::Moors),
            other => domain(format!("unknown shape measure '{other}' (expected bowley or moors)")),
        }
    }
}

/// A sweep over `c` for each `(a, b)` pair with `θ`, `γ` held fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSweep<T> {
    pub shapes: Vec<(T, T)>,
    pub theta: T,
    pub gamma: T,
    pub c_values: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeRow<T> {
    pub c: T,
    pub measure: Measure,
    pub value: T,
    pub a: T,
    pub b: T,
    pub theta: T,
    pub gamma: T,
}

/// One row per `(a, b)` pair, `c` value and measure.
pub fn shape_curves<T: Real>(sweep: &ShapeSweep<T>, measures: &[Measure]) -> Result<Vec<ShapeRow<T>>> {
    let mut rows = Vec::with_capacity(sweep.shapes.len() * sweep.c_values.len() * measures.len());
    for &(a, b) in &sweep.shapes {
        for &c in &sweep.c_values {
            let p = McgParams::new(a, b, c, sweep.theta, sweep.gamma)?;
            for &measure in measures {
                let q = quantile_fn(p);
                let value = match measure {
                    Measure::Bowley => bowley(q)?,
                    Measure::Moors => moors(q)?,
                };
                rows.push(ShapeRow {
                    c,
                    measure,
                    value,
                    a,
                    b,
                    theta: sweep.theta,
                    gamma: sweep.gamma,
                });
            }
        }
    }
    Ok(rows)
}

/// Monotonicity pattern of a hazard curve on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardShape {
    Constant,
    Increasing,
    Decreasing,
    /// decreasing then increasing
    Bathtub,
    /// increasing then decreasing
    UpsideDownBathtub,
    /// more than one turning point
    Other,
}

/// Classifies a sequence of hazard values by the signs of successive differences.
/// Differences below `rel_tol` relative to the larger neighbour count as ties and are skipped.
pub fn classify_hazard<T: Real>(values: &[T], rel_tol: T) -> HazardShape {
    let mut runs: Vec<bool> = Vec::new();
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= rel_tol * w[0].abs().max(w[1].abs()) {
            continue;
        }
        let up = d > T::zero();
        if runs.last() != Some(&up) {
            runs.push(up);
        }
    }
    match runs.as_slice() {
        [] => HazardShape::Constant,
        [true] => HazardShape::Increasing,
        [false] => HazardShape::Decreasing,
        [false, true] => HazardShape::Bathtub,
        [true, false] => HazardShape::UpsideDownBathtub,
        _ => HazardShape::Other,
    }
}

/// Hazard shape of `p` on `n` equally spaced points of `[lo, hi]`.
pub fn hazard_shape<T: Real, B: Baseline<T>>(p: &McDonald<T, B>, lo: T, hi: T, n: usize) -> Result<HazardShape> {
    if !(lo >= T::zero() && hi > lo) || n < 3 {
        return domain("hazard grid needs 0 <= lo < hi and at least 3 points");
    }
    let step = (hi - lo) / T::from_count(n - 1);
    let h = (0..n).map(|i| p.hazard(lo + step * T::from_count(i))).collect::<Result<Vec<T>>>()?;
    Ok(classify_hazard(&h, T::lit(1e-10)))
}

pub const SHAPE_CSV_HEADER: &str = "c,measure,value,a,b,theta,gamma";

/// CSV with header `c,measure,value,a,b,theta,gamma`.
pub fn shape_csv<T: Real>(rows: &[ShapeRow<T>]) -> String {
    let mut out = String::from(SHAPE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{:?},{},{:?},{:?},{:?},{:?},{:?}\n", r.c, r.measure, r.value, r.a, r.b, r.theta, r.gamma));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::normal_quantile;

    #[test]
    fn hazard_patterns() {
        let table1 = McgParams::<f64>::new(0.2619, 0.0752, 3.7652, 0.0012, 0.0875).unwrap();
        assert_eq!(hazard_shape(&table1, 0.1, 90.0, 900).unwrap(), HazardShape::Bathtub);
        let gompertz = McgParams::<f64>::new(1.0, 1.0, 1.0, 0.5, 0.7).unwrap();
        assert_eq!(hazard_shape(&gompertz, 0.0, 5.0, 200).unwrap(), HazardShape::Increasing);
        assert_eq!(classify_hazard(&[3.0, 2.0, 1.0_f64], 1e-12), HazardShape::Decreasing);
        assert_eq!(classify_hazard(&[1.0, 2.0, 1.0_f64], 1e-12), HazardShape::UpsideDownBathtub);
        assert_eq!(classify_hazard(&[1.0, 1.0_f64], 1e-12), HazardShape::Constant);
        assert_eq!(classify_hazard(&[1.0, 2.0, 1.0, 2.0_f64], 1e-12), HazardShape::Other);
    }

    const GOMPERTZ_MEAN: f64 = 0.596_347_362_323_194_1;

    fn gompertz() -> McgParams<f64> {
        McgParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn gompertz_moments_and_mgf() {
        let q = QuadratureSpec::default();
        let m = moment_numeric(&gompertz(), 1, &q).unwrap();
        assert!((m - GOMPERTZ_MEAN).abs() < 1e-9);
        assert!((mgf_numeric(&gompertz(), 0.0, &q).unwrap() - 1.0).abs() < 1e-9);
        assert!((mgf_numeric(&gompertz(), 1.0, &q).unwrap() - 2.0).abs() < 1e-8);
        let h = 1e-4;
        let d = (mgf_numeric(&gompertz(), h, &q).unwrap() - mgf_numeric(&gompertz(), -h, &q).unwrap()) / (2.0 * h);
        assert!((d - m).abs() < 1e-5);
    }

    #[test]
    fn gompertz_entropy() {
        let q = QuadratureSpec::default();
        let h = shannon_numeric(&gompertz(), &q).unwrap();
        // -1 - E(Y) + M(1) + ln(1) terms
        assert!((h - (1.0 - GOMPERTZ_MEAN - 0.0)).abs() < 1e-8, "{h}");
        let closed = shannon_closed(&gompertz(), &q).unwrap();
        assert!(closed.printed_agrees && (closed.printed - h).abs() < 1e-6);
        assert!((renyi_numeric(&gompertz(), 0.999, &q).unwrap() - h).abs() < 1e-2);
    }

    #[test]
    fn spike_integrability() {
        let q = QuadratureSpec::default();
        let p = McgParams::<f64>::new(0.3, 1.2, 1.0, 0.5, 1.0).unwrap();
        let total = integrate_like(&p, p.a, p.b, |y| density_term(&p, y), &q).unwrap();
        assert!((total - 1.0).abs() < 1e-8, "{total}");
        assert!(renyi_numeric(&p, 1.2, &q).unwrap().is_finite());
        // ρ(a-1) + 1 <= 0 once ρ >= 1/0.7
        assert!(matches!(renyi_numeric(&p, 1.5, &q), Err(McgError::Divergent(_))));
    }

    #[test]
    fn quantile_measures() {
        let std_normal = |t: f64| normal_quantile(t);
        assert!(bowley(std_normal).unwrap().abs() < 1e-10);
        assert!((moors(std_normal).unwrap() - 1.233_095_1).abs() < 1e-6);
        assert_eq!(moors(|t: f64| Ok(t)).unwrap(), 1.0);
        assert!(bowley(|_t: f64| Ok(1.0)).is_err());
    }

    #[test]
    fn curve_rows() {
        let sweep = ShapeSweep {
            shapes: vec![(0.5, 0.5)],
            theta: 0.1,
            gamma: 1.0,
            c_values: (0..10).map(|i| 0.5 + 0.5 * f64::from(i)).collect(),
        };
        let rows = shape_curves(&sweep, &[Measure::Bowley, Measure::Moors]).unwrap();
        assert_eq!(rows.len(), 20);
        assert!(rows.iter().all(|r| r.value.is_finite()));
        let csv = shape_csv(&rows);
        assert!(csv.starts_with("c,measure,value,a,b,theta,gamma\n0.5,bowley,"));
    }
}

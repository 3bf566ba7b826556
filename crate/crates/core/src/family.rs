//! Named sub-models and the linear maps that embed them in the full
//! McDonald parameter vector.
//!
//! | model | base        | constraints |
//! |-------|-------------|-------------|
//! | mcg   | Gompertz    | none        |
//! | bg    | Gompertz    | c = 1       |
//! | kumg  | Gompertz    | a = c       |
//! | gg    | Gompertz    | b = c = 1   |
//! | g     | Gompertz    | a = b = c = 1 |
//! | mce   | exponential | none (alias `bge`) |
//! | be    | exponential | c = 1       |
//! | kume  | exponential | a = c       |
//! | ge    | exponential | b = c = 1   |
//! | e     | exponential | a = b = c = 1 |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::base::{Baseline, ExpBase, GompertzBase};
use crate::distribution::{McExpParams, McgParams};
use crate::error::{McgError, Result};
use crate::real::Real;
use crate::specfun::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Mcg,
    Bg,
    Kumg,
    Gg,
    G,
    Mce,
    Be,
    Kume,
    Ge,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Gompertz,
    Exponential,
}

/// One restriction on the full parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Constraint {
    Fixed { param: &'static str, value: f64 },
    Tie { param: &'static str, to: &'static str },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Fixed { param, value } => write!(f, "{param} = {value}"),
            Constraint::Tie { param, to } => write!(f, "{param} = {to}"),
        }
    }
}

impl ModelName {
    pub const ALL: [ModelName; 10] = [
        ModelName::Mcg,
        ModelName::Bg,
        ModelName::Kumg,
        ModelName::Gg,
        ModelName::G,
        ModelName::Mce,
        ModelName::Be,
        ModelName::Kume,
        ModelName::Ge,
        ModelName::E,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Mcg => "mcg",
            ModelName::Bg => "bg",
            ModelName::Kumg => "kumg",
            ModelName::Gg => "gg",
            ModelName::G => "g",
            ModelName::Mce => "mce",
            ModelName::Be => "be",
            ModelName::Kume => "kume",
            ModelName::Ge => "ge",
            ModelName::E => "e",
        }
    }

    pub fn base_kind(self) -> BaseKind {
        match self {
            ModelName::Mcg | ModelName::Bg | ModelName::Kumg | ModelName::Gg | ModelName::G => BaseKind::Gompertz,
            _ => BaseKind::Exponential,
        }
    }

    pub fn spec(self) -> ModelSpec {
        ModelSpec::new(self)
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = McgError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "bge" {
            return Ok(ModelName::Mce);
        }
        ModelName::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == lower)
            .ok_or_else(|| McgError::Model(format!("unknown model '{s}'")))
    }
}

/// A named sub-model with its constraint map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub name: ModelName,
    pub base: BaseKind,
    pub constraints: Vec<Constraint>,
    pub free_count: usize,
}

const SHAPES: [&str; 3] = ["a", "b", "c"];

impl ModelSpec {
    pub fn new(name: ModelName) -> Self {
        use Constraint::*;
        let constraints = match name {
            ModelName::Mcg | ModelName::Mce => vec![],
            ModelName::Bg | ModelName::Be => vec![Fixed { param: "c", value: 1.0 }],
            ModelName::Kumg | ModelName::Kume => vec![Tie { param: "a", to: "c" }],
            ModelName::Gg | ModelName::Ge => vec![Fixed { param: "b", value: 1.0 }, Fixed { param: "c", value: 1.0 }],
            ModelName::G | ModelName::E => vec![
                Fixed { param: "a", value: 1.0 },
                Fixed { param: "b", value: 1.0 },
                Fixed { param: "c", value: 1.0 },
            ],
        };
        let base = name.base_kind();
        let full = 3 + base_len(base);
        Self {
            name,
            base,
            free_count: full - constraints.len(),
            constraints,
        }
    }

    /// Names of the full parameter vector for this model's base.
    pub fn full_names(&self) -> Vec<&'static str> {
        let mut v = SHAPES.to_vec();
        match self.base {
            BaseKind::Gompertz => v.extend_from_slice(GompertzBase::<f64>::PARAM_NAMES),
            BaseKind::Exponential => v.extend_from_slice(ExpBase::<f64>::PARAM_NAMES),
        }
        v
    }

    pub fn full_len(&self) -> usize {
        3 + base_len(self.base)
    }

    fn constrained(&self, name: &str) -> bool {
        self.constraints.iter().any(|c| match c {
            Constraint::Fixed { param, .. } | Constraint::Tie { param, .. } => *param == name,
        })
    }

    /// Names of the free parameters, in full-vector order.
    pub fn free_names(&self) -> Vec<&'static str> {
        self.full_names().into_iter().filter(|n| !self.constrained(n)).collect()
    }

    /// Embedding matrix `M` (full × free) with `full = M free + offset`.
    pub fn embedding(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let full = self.full_names();
        let free = self.free_names();
        let mut m = vec![vec![0.0; free.len()]; full.len()];
        let mut off = vec![0.0; full.len()];
        for (i, n) in full.iter().enumerate() {
            let target = self.constraints.iter().find_map(|c| match c {
                Constraint::Fixed { param, value } if param == n => Some(Err(*value)),
                Constraint::Tie { param, to } if param == n => Some(Ok(*to)),
                _ => None,
            });
            match target {
                None => m[i][free.iter().position(|f| f == n).expect("free")] = 1.0,
                Some(Err(v)) => off[i] = v,
                Some(Ok(to)) => m[i][free.iter().position(|f| *f == to).expect("tie target free")] = 1.0,
            }
        }
        (m, off)
    }

    /// Full parameter vector from free values.
    pub fn embed<T: Real>(&self, free: &[T]) -> Result<Vec<T>> {
        if free.len() != self.free_count {
            return Err(McgError::Model(format!(
                "{} takes {} free parameters, got {}",
                self.name,
                self.free_count,
                free.len()
            )));
        }
        let (m, off) = self.embedding();
        Ok(m.iter()
            .zip(&off)
            .map(|(row, o)| row.iter().zip(free).fold(T::lit(*o), |acc, (mij, f)| acc + T::lit(*mij) * *f))
            .collect())
    }

    /// Free values picked out of a full vector (constraints are not checked).
    pub fn restrict<T: Real>(&self, full: &[T]) -> Vec<T> {
        self.full_names()
            .iter()
            .zip(full)
            .filter(|(n, _)| !self.constrained(n))
            .map(|(_, v)| *v)
            .collect()
    }

    pub fn member<T: Real>(&self, free: &[T]) -> Result<Member<T>> {
        let full = self.embed(free)?;
        match self.base {
            BaseKind::Gompertz => Ok(Member::Gompertz(McgParams::from_slice(&full)?)),
            BaseKind::Exponential => Ok(Member::Exponential(McExpParams::from_slice(&full)?)),
        }
    }

    /// Whether `other` is obtained from `self` by adding constraints.
    pub fn contains(&self, other: &ModelSpec) -> bool {
        if self.name == other.name {
            return false;
        }
        let base_ok = self.base == other.base || (self.base == BaseKind::Gompertz && other.base == BaseKind::Exponential);
        base_ok && self.constraints.iter().all(|c| other.constraints.contains(c)) && other.free_count < self.free_count
    }
}

fn base_len(kind: BaseKind) -> usize {
    match kind {
        BaseKind::Gompertz => 2,
        BaseKind::Exponential => 1,
    }
}

/// A fully specified member of the family over either base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "base", rename_all = "lowercase")]
pub enum Member<T> {
    Gompertz(McgParams<T>),
    Exponential(McExpParams<T>),
}

macro_rules! dispatch {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            Member::Gompertz($p) => $e,
            Member::Exponential($p) => $e,
        }
    };
}

impl<T: Real> Member<T> {
    pub fn to_vec(&self) -> Vec<T> {
        dispatch!(self, p => p.to_vec())
    }
    pub fn log_pdf(&self, y: T) -> T {
        dispatch!(self, p => p.log_pdf(y))
    }
    pub fn pdf(&self, y: T) -> T {
        dispatch!(self, p => p.pdf(y))
    }
    pub fn cdf(&self, y: T) -> Result<T> {
        dispatch!(self, p => p.cdf(y))
    }
    pub fn survival(&self, y: T) -> Result<T> {
        dispatch!(self, p => p.survival(y))
    }
    pub fn hazard(&self, y: T) -> Result<T> {
        dispatch!(self, p => p.hazard(y))
    }
    pub fn quantile(&self, t: T, tol: &Tolerance<T>) -> Result<T> {
        dispatch!(self, p => p.quantile(t, tol))
    }
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<T>> {
        dispatch!(self, p => p.sample(n, seed))
    }
}

/// Builds a family member from named free-parameter values.
pub fn make_submodel<T: Real>(name: ModelName, values: &[(&str, T)]) -> Result<Member<T>> {
    let spec = ModelSpec::new(name);
    let free = spec.free_names();
    for (k, _) in values {
        if !free.contains(k) {
            return Err(McgError::Model(format!("{name} does not take parameter '{k}' (free: {free:?})")));
        }
    }
    let ordered: Result<Vec<T>> = free
        .iter()
        .map(|n| {
            let hits: Vec<T> = values.iter().filter(|(k, _)| k == n).map(|(_, v)| *v).collect();
            match hits.as_slice() {
                [v] => Ok(*v),
                [] => Err(McgError::Model(format!("{name} is missing parameter '{n}'"))),
                _ => Err(McgError::Model(format!("parameter '{n}' given more than once"))),
            }
        })
        .collect();
    spec.member(&ordered?)
}

/// Density of the McDonald law over the exponential base (the γ→0 limit).
pub fn exp_limit_pdf<T: Real>(p: &McExpParams<T>, y: T) -> T {
    p.pdf(y)
}

/// `(F_McG(y) at a = i, b = n - i + 1, c = 1, F_{i:n}(y) of the base law)`.
///
/// The second member is the binomial-sum order-statistic cdf
/// `Σ_{j=i}^{n} C(n, j) G^j (1 - G)^{n-j}`.
pub fn order_stat_identity_check<T: Real>(i: usize, n: usize, base: GompertzBase<T>, y: T) -> Result<(T, T)> {
    if i == 0 || i > n {
        return Err(McgError::Domain(format!("order statistic rank {i} outside 1..={n}")));
    }
    let p = McgParams::with_base(T::from_count(i), T::from_count(n - i + 1), T::one(), base)?;
    let g = base.cdf(y);
    let mut sum = T::zero();
    let mut binom = T::one();
    for j in 0..=n {
        if j > 0 {
            binom = binom * T::from_count(n - j + 1) / T::from_count(j);
        }
        if j >= i {
            sum = sum + binom * g.powi(j as i32) * (T::one() - g).powi((n - j) as i32);
        }
    }
    Ok((p.cdf(y)?, sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_counts() {
        let want = [
            (ModelName::Mcg, 5),
            (ModelName::Bg, 4),
            (ModelName::Kumg, 4),
            (ModelName::Mce, 4),
            (ModelName::Gg, 3),
            (ModelName::Be, 3),
            (ModelName::Kume, 3),
            (ModelName::Ge, 2),
            (ModelName::G, 2),
            (ModelName::E, 1),
        ];
        for (m, k) in want {
            assert_eq!(m.spec().free_count, k, "{m}");
            assert_eq!(m.spec().free_names().len(), k);
        }
    }

    #[test]
    fn names_round_trip() {
        for m in ModelName::ALL {
            assert_eq!(m.as_str().parse::<ModelName>().unwrap(), m);
        }
        assert_eq!("BGE".parse::<ModelName>().unwrap(), ModelName::Mce);
        assert!("weibull".parse::<ModelName>().is_err());
    }

    #[test]
    fn gompertz_is_bottom_of_lattice() {
        let m = make_submodel(ModelName::G, &[("theta", 1.0_f64), ("gamma", 1.0)]).unwrap();
        assert_eq!(m.to_vec(), vec![1.0; 5]);
    }

    #[test]
    fn kumaraswamy_tie() {
        let m = make_submodel(ModelName::Kumg, &[("b", 3.0_f64), ("c", 2.0), ("theta", 1.0), ("gamma", 1.0)]).unwrap();
        assert_eq!(m.to_vec(), vec![2.0, 3.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn missing_and_extra_parameters() {
        assert!(make_submodel(ModelName::Bg, &[("a", 1.0_f64), ("b", 1.0), ("theta", 1.0)]).is_err());
        assert!(make_submodel(ModelName::E, &[("theta", 1.0_f64), ("gamma", 1.0)]).is_err());
        assert!(make_submodel(ModelName::E, &[("theta", 1.0_f64), ("theta", 2.0)]).is_err());
    }

    #[test]
    fn nesting_relation() {
        let mcg = ModelName::Mcg.spec();
        assert!(mcg.contains(&ModelName::Bg.spec()));
        assert!(mcg.contains(&ModelName::Mce.spec()));
        assert!(mcg.contains(&ModelName::G.spec()));
        assert!(!ModelName::Bg.spec().contains(&mcg));
        assert!(!ModelName::Bg.spec().contains(&ModelName::Kumg.spec()));
        assert!(ModelName::Bg.spec().contains(&ModelName::Gg.spec()));
    }

    #[test]
    fn order_statistic_identity() {
        let base = GompertzBase::new(0.7_f64, 0.4).unwrap();
        for &(i, n) in &[(1, 1), (1, 3), (2, 5), (5, 5)] {
            for k in 1..30 {
                let y = 0.1 * f64::from(k);
                let (a, b) = order_stat_identity_check(i, n, base, y).unwrap();
                assert!((a - b).abs() < 1e-12, "i={i} n={n} y={y}");
            }
        }
        let (a, _) = order_stat_identity_check(1, 3, base, 1.0).unwrap();
        assert!((a - (1.0 - (1.0 - base.cdf(1.0)).powi(3))).abs() < 1e-14);
    }
}

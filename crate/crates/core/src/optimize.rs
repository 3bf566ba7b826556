//! Box-constrained Nelder–Mead and projected BFGS for small problems.

use crate::linalg::{identity, mat_vec, Matrix};
use crate::real::Real;

/// Outcome of one local minimisation.
#[derive(Debug, Clone)]
pub struct LocalMin<T> {
    pub x: Vec<T>,
    pub f: T,
    pub iterations: usize,
    /// Infinity norm of the projected gradient at `x` (NaN if never evaluated).
    pub grad_norm: T,
    /// Incumbent objective after every accepted step.
    pub trace: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct Bounds<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Real> Bounds<T> {
    fn clamp(&self, v: T) -> T {
        v.max(self.lower).min(self.upper)
    }
}

fn finite_or_inf<T: Real>(f: T) -> T {
    if f.is_nan() {
        T::infinity()
    } else {
        f
    }
}

/// Nelder–Mead with standard coefficients; vertices are clamped to the box.
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    step: T,
    bounds: Bounds<T>,
    max_iter: usize,
    ftol: T,
) -> LocalMin<T> {
    let n = x0.len();
    let clamp = |v: Vec<T>| v.into_iter().map(|x| bounds.clamp(x)).collect::<Vec<T>>();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let start = clamp(x0.to_vec());
    let f0 = finite_or_inf(f(&start));
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut v = start.clone();
        v[i] = if v[i] + step <= bounds.upper { v[i] + step } else { v[i] - step };
        let v = clamp(v);
        let fv = finite_or_inf(f(&v));
        simplex.push((v, fv));
    }
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut trace = vec![f0];
    let mut iterations = 0;
    let order = |s: &mut Vec<(Vec<T>, T)>| s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    order(&mut simplex);
    while iterations < max_iter {
        iterations += 1;
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = (worst - best).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if spread <= ftol * (best.abs() + ftol) && size <= T::lit(1e-8) {
            break;
        }
        let mut centroid = vec![T::zero(); n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c = *c + *x / T::from_count(n);
            }
        }
        let along = |t: T, simplex: &Vec<(Vec<T>, T)>| {
            clamp(centroid.iter().zip(&simplex[n].0).map(|(c, w)| *c + t * (*c - *w)).collect())
        };
        let xr = along(alpha, &simplex);
        let fr = finite_or_inf(f(&xr));
        if fr < simplex[0].1 {
            let xe = along(gamma, &simplex);
            let fe = finite_or_inf(f(&xe));
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(rho, &simplex);
                let fc = finite_or_inf(f(&xc));
                (xc, fc)
            } else {
                let xc = along(-rho, &simplex);
                let fc = finite_or_inf(f(&xc));
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    *v = clamp(x_best.iter().zip(v.iter()).map(|(b, x)| *b + sigma * (*x - *b)).collect());
                    *fv = finite_or_inf(f(v));
                }
            }
        }
        order(&mut simplex);
        if simplex[0].1 < *trace.last().expect("nonempty") {
            trace.push(simplex[0].1);
        }
    }
    let (x, fx) = simplex.swap_remove(0);
    LocalMin {
        x,
        f: fx,
        iterations,
        grad_norm: T::nan(),
        trace,
    }
}

fn projected<T: Real>(x: &[T], g: &[T], bounds: &Bounds<T>) -> Vec<T> {
    let eps = T::lit(1e-12);
    x.iter()
        .zip(g)
        .map(|(xi, gi)| {
            let at_lo = *xi <= bounds.lower + eps && *gi > T::zero();
            let at_hi = *xi >= bounds.upper - eps && *gi < T::zero();
            if at_lo || at_hi {
                T::zero()
            } else {
                *gi
            }
        })
        .collect()
}

pub fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Settings for `bfgs`.
#[derive(Debug, Clone, Copy)]
pub struct BfgsConfig<T> {
    pub max_iter: usize,
    pub grad_tol: T,
    pub step_tol: T,
    /// Largest coordinate move per iteration.
    pub max_step: T,
}

/// Projected BFGS with Armijo backtracking.
///
/// `fg` returns the objective and its gradient; `h0` optionally seeds the
/// inverse Hessian.
pub fn bfgs<T: Real, F: FnMut(&[T]) -> (T, Vec<T>)>(
    mut fg: F,
    x0: &[T],
    h0: Option<Matrix<T>>,
    bounds: Bounds<T>,
    cfg: &BfgsConfig<T>,
) -> LocalMin<T> {
    let n = x0.len();
    let mut x: Vec<T> = x0.iter().map(|v| bounds.clamp(*v)).collect();
    let (mut f, mut g) = fg(&x);
    let mut trace = vec![f];
    let seeded = h0.is_some();
    let mut hinv = h0.unwrap_or_else(|| identity(n));
    let mut fresh = true;
    let mut iterations = 0;
    if !f.is_finite() {
        return LocalMin {
            x,
            f: T::infinity(),
            iterations,
            grad_norm: T::infinity(),
            trace,
        };
    }
    while iterations < cfg.max_iter {
        let pg = projected(&x, &g, &bounds);
        if inf_norm(&pg) <= cfg.grad_tol {
            break;
        }
        iterations += 1;
        let mut d: Vec<T> = mat_vec(&hinv, &pg).into_iter().map(|v| -v).collect();
        for (di, (pgi, gi)) in d.iter_mut().zip(pg.iter().zip(&g)) {
            if *pgi == T::zero() && *gi != T::zero() {
                *di = T::zero();
            }
        }
        let slope: T = d.iter().zip(&pg).map(|(a, b)| *a * *b).sum();
        if !(slope < T::zero()) {
            hinv = identity(n);
            fresh = true;
            d = pg.iter().map(|v| -*v).collect();
        }
        let longest = inf_norm(&d);
        let mut t = if longest > cfg.max_step { cfg.max_step / longest } else { T::one() };
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<T> = x.iter().zip(&d).map(|(xi, di)| bounds.clamp(*xi + t * *di)).collect();
            let (fn_, gn) = fg(&xn);
            let moved: T = xn.iter().zip(&x).zip(&g).map(|((a, b), gi)| (*a - *b) * *gi).sum();
            let decrease = T::lit(1e-4) * moved.min(T::zero());
            if fn_.is_finite() && fn_ <= f + decrease && fn_ <= f {
                accepted = Some((xn, fn_, gn));
                break;
            }
            t = t * T::lit(0.5);
        }
        let Some((xn, fn_, gn)) = accepted else {
            if fresh {
                break;
            }
            hinv = identity(n);
            fresh = true;
            continue;
        };
        let s: Vec<T> = xn.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let yv: Vec<T> = gn.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy: T = s.iter().zip(&yv).map(|(a, b)| *a * *b).sum();
        let step = inf_norm(&s);
        let improvement = f - fn_;
        x = xn;
        f = fn_;
        g = gn;
        trace.push(f);
        let ss = s.iter().map(|v| *v * *v).sum::<T>().sqrt();
        let yy = yv.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if sy > T::lit(1e-12) * ss * yy {
            if fresh && !seeded {
                // Shanno scaling of the first update
                let scale = sy / yv.iter().map(|v| *v * *v).sum::<T>();
                hinv = identity::<T>(n).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
            }
            let hy = mat_vec(&hinv, &yv);
            let yhy: T = yv.iter().zip(&hy).map(|(a, b)| *a * *b).sum();
            let rho = sy.recip();
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] = hinv[i][j] - rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
        if step <= cfg.step_tol && improvement <= cfg.step_tol * (T::one() + f.abs()) {
            break;
        }
    }
    let grad_norm = inf_norm(&projected(&x, &g, &bounds));
    LocalMin {
        x,
        f,
        iterations,
        grad_norm,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosen(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn rosen_g(x: &[f64]) -> (f64, Vec<f64>) {
        let g0 = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]);
        let g1 = 200.0 * (x[1] - x[0] * x[0]);
        (rosen(x), vec![g0, g1])
    }

    const FREE: Bounds<f64> = Bounds {
        lower: -1e3,
        upper: 1e3,
    };

    #[test]
    fn nelder_mead_rosenbrock() {
        let r = nelder_mead(rosen, &[-1.2, 1.0], 0.5, FREE, 5000, 1e-14);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn bfgs_rosenbrock() {
        let cfg = BfgsConfig {
            max_iter: 500,
            grad_tol: 1e-9,
            step_tol: 1e-14,
            max_step: 1.0,
        };
        let r = bfgs(rosen_g, &[-1.2, 1.0], None, FREE, &cfg);
        assert!((r.x[0] - 1.0).abs() < 1e-7, "{:?}", r.x);
        assert!(r.grad_norm <= 1e-9);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn bfgs_respects_bounds() {
        let cfg = BfgsConfig {
            max_iter: 200,
            grad_tol: 1e-10,
            step_tol: 1e-14,
            max_step: 1.0,
        };
        let b = Bounds { lower: 2.0, upper: 5.0 };
        let r = bfgs(|x: &[f64]| ((x[0] - 1.0).powi(2) + (x[1] - 3.0).powi(2), vec![2.0 * (x[0] - 1.0), 2.0 * (x[1] - 3.0)]), &[4.0, 4.0], None, b, &cfg);
        assert_eq!(r.x[0], 2.0);
        assert!((r.x[1] - 3.0).abs() < 1e-8);
        assert!(r.grad_norm < 1e-10);
    }
}

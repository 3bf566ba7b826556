//! Dense helpers for the small symmetric matrices met in likelihood work.

use crate::real::Real;

pub type Matrix<T> = Vec<Vec<T>>;

pub fn zeros<T: Real>(r: usize, c: usize) -> Matrix<T> {
    vec![vec![T::zero(); c]; r]
}

pub fn identity<T: Real>(n: usize) -> Matrix<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn mat_vec<T: Real>(m: &Matrix<T>, v: &[T]) -> Vec<T> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| *a * *b).sum()).collect()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// `Aᵀ B A` for square `B`.
pub fn congruence<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = zeros(cols, cols);
    for i in 0..cols {
        for j in 0..cols {
            let mut s = T::zero();
            for k in 0..rows {
                if a[k][i] == T::zero() {
                    continue;
                }
                for l in 0..rows {
                    s = s + a[k][i] * b[k][l] * a[l][j];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

/// Lower Cholesky factor, or `None` when the matrix is not positive definite.
pub fn cholesky<T: Real>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.len();
    let mut l = zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive-definite matrix.
pub fn inverse_spd<T: Real>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let l = cholesky(m)?;
    let n = m.len();
    let mut inv = zeros(n, n);
    for col in 0..n {
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = if i == col { T::one() } else { T::zero() };
            for k in 0..i {
                s = s - l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - l[k][i] * inv[k][col];
            }
            inv[i][col] = s / l[i][i];
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues<T: Real>(m: &Matrix<T>) -> Vec<T> {
    let n = m.len();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: T = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Ratio of extreme absolute eigenvalues (infinite when singular).
pub fn condition_number<T: Real>(m: &Matrix<T>) -> T {
    let ev = sym_eigenvalues(m);
    let abs: Vec<T> = ev.iter().map(|e| e.abs()).collect();
    let max = abs.iter().copied().fold(T::zero(), T::max);
    let min = abs.iter().copied().fold(T::infinity(), T::min);
    if min == T::zero() {
        T::infinity()
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_inverse_and_eigenvalues() {
        let m = vec![vec![4.0_f64, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]];
        let inv = inverse_spd(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let ev = sym_eigenvalues(&m);
        let trace: f64 = ev.iter().sum();
        assert!((trace - 9.0).abs() < 1e-12);
        assert!(ev.iter().all(|e| *e > 0.0));
    }

    #[test]
    fn indefinite_has_no_cholesky() {
        let m = vec![vec![1.0_f64, 2.0], vec![2.0, 1.0]];
        assert!(cholesky(&m).is_none());
        let ev = sym_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!((condition_number(&m) - 3.0).abs() < 1e-12);
    }
}

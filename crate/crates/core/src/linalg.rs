//! Small dense solvers and a banded Cholesky factorization for the grid
//! Poisson problems.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Solves the dense `n × n` system `a x = b` in place by Gaussian
/// elimination with partial pivoting. `a` is row-major; on success `b`
/// holds `x`.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= 1e-13 * scale {
            return Err(Error::SingularSolve);
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * b[k];
        }
        b[r] = s / a[r * n + r];
    }
    Ok(())
}

/// Symmetric band matrix holding the lower band `j ∈ [i - bw, i]` of each
/// row `i`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` to entry `(i, j)`; the mirrored entry is implied.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(i - j <= self.bw, "entry outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Cholesky factorization `A = L Lᵀ`, keeping the band structure.
    pub fn cholesky(self) -> Result<BandCholesky> {
        let BandMatrix { n, bw, mut data } = self;
        let stride = bw + 1;
        let mut max_diag = 0.0f64;
        for i in 0..n {
            max_diag = max_diag.max(data[i * stride + bw].abs());
        }
        let tol = 1e-14 * max_diag.max(f64::MIN_POSITIVE);
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                // row i entries k in [lo, j) and row j entries k in [lo, j)
                let ri = i * stride + bw - i;
                let rj = j * stride + bw - j;
                let mut s = data[ri + j];
                for k in lo..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if i == j {
                    if s <= tol {
                        return Err(Error::SingularSolve);
                    }
                    data[ri + j] = s.sqrt();
                } else {
                    data[ri + j] = s / data[rj + j];
                }
            }
        }
        Ok(BandCholesky { n, bw, data })
    }
}

/// Lower-triangular band factor produced by [`BandMatrix::cholesky`].
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let stride = self.bw + 1;
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let ri = i * stride + bw - i;
            let mut s = b[i];
            for k in lo..i {
                s -= self.data[ri + k] * b[k];
            }
            b[i] = s / self.data[ri + i];
        }
        for i in (0..self.n).rev() {
            let ri = i * stride + bw - i;
            let xi = b[i] / self.data[ri + i];
            b[i] = xi;
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                b[k] -= self.data[ri + k] * xi;
            }
        }
    }
}

/// Ordinary least squares `min ‖X β − y‖` via Householder QR.
///
/// `x` is row-major `rows × cols`. Fails with [`Error::RankDeficient`] when
/// a pivot of `R` falls below `1e-10` of the largest column norm.
pub fn lstsq(x: &[f64], y: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    assert_eq!(x.len(), rows * cols);
    assert_eq!(y.len(), rows);
    if rows < cols {
        return Err(Error::RankDeficient);
    }
    // column-major copy for cache-friendly reflections
    let mut a = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            a[c * rows + r] = x[r * cols + c];
        }
    }
    let mut b = y.to_vec();
    let col_norm_max = (0..cols)
        .map(|c| a[c * rows..(c + 1) * rows].iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    if col_norm_max == 0.0 {
        return Err(Error::RankDeficient);
    }
    let mut diag = vec![0.0; cols];
    for k in 0..cols {
        let col = &mut a[k * rows..(k + 1) * rows];
        let norm = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * col_norm_max {
            return Err(Error::RankDeficient);
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        col[k] -= alpha;
        let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let v: Vec<f64> = col[k..].to_vec();
        for c in k + 1..cols {
            let cc = &mut a[c * rows + k..(c + 1) * rows];
            let dot: f64 = v.iter().zip(cc.iter()).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (q, p) in cc.iter_mut().zip(&v) {
                *q -= f * p;
            }
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / vnorm2;
        for (q, p) in b[k..].iter_mut().zip(&v) {
            *q -= f * p;
        }
    }
    let mut beta = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut s = b[k];
        for c in k + 1..cols {
            s -= a[c * rows + k] * beta[c];
        }
        beta[k] = s / diag[k];
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_matches_hand_computation() {
        let mut a = [2.0, 1.0, 1.0, 3.0];
        let mut b = [3.0, 5.0];
        solve_dense(&mut a, &mut b, 2).unwrap();
        assert!((b[0] - 0.8).abs() < 1e-12);
        assert!((b[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn dense_solve_rejects_singular() {
        let mut a = [1.0, 2.0, 2.0, 4.0];
        let mut b = [1.0, 2.0];
        assert_eq!(solve_dense(&mut a, &mut b, 2), Err(Error::SingularSolve));
    }

    #[test]
    fn band_cholesky_solves_tridiagonal() {
        let n = 50;
        let mut m = BandMatrix::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        // x = 1..n, b = A x
        let x: Vec<f64> = (1..=n).map(|v| v as f64).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 2.0 * x[i];
                if i > 0 {
                    s -= x[i - 1];
                }
                if i + 1 < n {
                    s -= x[i + 1];
                }
                s
            })
            .collect();
        let f = m.cholesky().unwrap();
        f.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn band_cholesky_rejects_indefinite() {
        let mut m = BandMatrix::zeros(2, 1);
        m.add(0, 0, 1.0);
        m.add(1, 0, 2.0);
        m.add(1, 1, 1.0);
        assert!(matches!(m.cholesky(), Err(Error::SingularSolve)));
    }

    #[test]
    fn lstsq_recovers_exact_plane() {
        let rows = 20;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..rows {
            let a = i as f64 * 0.3;
            let b = ((i * 7) % 5) as f64;
            x.extend_from_slice(&[a, b, 1.0]);
            y.push(2.0 * a - 0.5 * b + 4.0);
        }
        let beta = lstsq(&x, &y, rows, 3).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-10);
        assert!((beta[1] + 0.5).abs() < 1e-10);
        assert!((beta[2] - 4.0).abs() < 1e-10);
    }

    #[test]
    fn lstsq_detects_collinear_columns() {
        let x = [1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        let y = [1.0, 2.0, 3.0];
        assert_eq!(lstsq(&x, &y, 3, 2), Err(Error::RankDeficient));
    }
}

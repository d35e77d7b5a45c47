//! Complex banded LU with partial pivoting, LAPACK-style band storage.
//!
//! The finite-difference oracle assembles two-point boundary value problems
//! into narrow bands (kl, ku <= 5) of size up to a few thousand; a dense
//! solve would be wasteful and a tridiagonal one insufficient, so this is
//! the one structured solver the crate carries.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Band matrix of order `n` with `kl` sub- and `ku` superdiagonals.
///
/// Storage reserves `kl` extra superdiagonals for pivoting fill, as in
/// LAPACK `gbtrf`. Entry (i, j) lives at storage row `i - j + kl + ku`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Working upper bandwidth including fill: kl + ku.
    kw: usize,
    /// Column-major: data[j * ld + r].
    data: Vec<Complex64>,
    ld: usize,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let kw = kl + ku;
        let ld = kl + kw + 1;
        BandMatrix {
            n,
            kl,
            ku,
            kw,
            data: vec![Complex64::new(0.0, 0.0); ld * n],
            ld,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(i + self.kw >= j && j + self.kl >= i, "({i},{j}) outside band");
        j * self.ld + (i + self.kl + self.kw - j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    /// Factor in place with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let kw = self.kw;
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            // Pivot among rows k..=k+kl.
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).norm();
            for i in (k + 1)..=imax {
                let v = self.get(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular {
                    what: "banded LU pivot",
                    omega: k as f64,
                });
            }
            ipiv[k] = p;
            let jmax = (k + kw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            for i in (k + 1)..=imax {
                let m = self.get(i, k) / pivot;
                self.set(i, k, m);
                if m.norm_sqr() != 0.0 {
                    for j in (k + 1)..=jmax {
                        let u = self.get(k, j);
                        if u.norm_sqr() != 0.0 {
                            let v = self.get(i, j) - m * u;
                            self.set(i, j, v);
                        }
                    }
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let kw = self.m.kw;
        assert_eq!(b.len(), n);
        // Forward: apply P and L.
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(p, k);
            }
            let imax = (k + kl).min(n - 1);
            let bk = b[k];
            for i in (k + 1)..=imax {
                b[i] -= self.m.get(i, k) * bk;
            }
        }
        // Backward: U x = y.
        for k in (0..n).rev() {
            let jmax = (k + kw).min(n - 1);
            let mut s = b[k];
            for j in (k + 1)..=jmax {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }

    /// Pivot-growth condition proxy: max |u_kk| / min |u_kk|.
    pub fn diagonal_ratio(&self) -> f64 {
        let mut mx: f64 = 0.0;
        let mut mn = f64::INFINITY;
        for k in 0..self.m.n {
            let d = self.m.get(k, k).norm();
            mx = mx.max(d);
            mn = mn.min(d);
        }
        if mn == 0.0 {
            f64::INFINITY
        } else {
            mx / mn
        }
    }
}

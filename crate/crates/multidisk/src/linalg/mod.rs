//! Small complex linear-algebra kernels shared by the plant evaluators,
//! the closed-loop maps and the synthesis gradients.
//!
//! Everything here is deterministic: no randomized pivoting or starts, so
//! repeated sweeps produce bit-identical results.

pub mod band;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Thin singular value decomposition `M = U diag(sigma) V^H`.
///
/// Computed by one-sided Jacobi rotations on the columns, which is accurate
/// for the small (<= 12 x 12) matrices used throughout this crate.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Left singular vectors, one column per singular value.
    pub u: DMatrix<Complex64>,
    /// Right singular vectors, one column per singular value.
    pub v: DMatrix<Complex64>,
}

/// One-sided Jacobi SVD of a complex matrix.
pub fn svd(m: &DMatrix<Complex64>) -> Svd {
    if m.nrows() < m.ncols() {
        // Work on the (tall) adjoint and swap the factors back.
        let t = svd(&m.adjoint());
        return Svd {
            sigma: t.sigma,
            u: t.v,
            v: t.u,
        };
    }
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let mut v = DMatrix::<Complex64>::identity(cols, cols);
    let tol = 1e-15;
    for _ in 0..64 {
        let mut off = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let ci = a.column(i);
                let cj = a.column(j);
                let aa = ci.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let bb = cj.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let cc: Complex64 = ci.iter().zip(cj.iter()).map(|(x, y)| x.conj() * y).sum();
                let cn = cc.norm();
                if cn <= tol * (aa * bb).sqrt() || cn == 0.0 {
                    continue;
                }
                off = true;
                // Phase-align the pair so the coupling is real, then apply
                // the classic real Jacobi rotation.
                let phase = cc / cn;
                let tau = (bb - aa) / (2.0 * cn);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..rows {
                    let x = a[(r, i)];
                    let y = a[(r, j)] * phase.conj();
                    a[(r, i)] = cs * x - sn * y;
                    a[(r, j)] = sn * x + cs * y;
                }
                for r in 0..cols {
                    let x = v[(r, i)];
                    let y = v[(r, j)] * phase.conj();
                    v[(r, i)] = cs * x - sn * y;
                    v[(r, j)] = sn * x + cs * y;
                }
            }
        }
        if !off {
            break;
        }
    }
    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols)
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).unwrap());
    let mut sigma = Vec::with_capacity(cols);
    let mut u = DMatrix::<Complex64>::zeros(rows, cols);
    let mut vs = DMatrix::<Complex64>::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            for r in 0..rows {
                u[(r, k)] = a[(r, j)] / s;
            }
        } else {
            u[(k.min(rows - 1), k)] = Complex64::new(1.0, 0.0);
        }
        for r in 0..cols {
            vs[(r, k)] = v[(r, j)];
        }
    }
    Svd { sigma, u, v: vs }
}

/// Largest singular value.
pub fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    svd(m).sigma[0]
}

/// Smallest singular value (of the thin decomposition).
pub fn sigma_min(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    *svd(m).sigma.last().unwrap()
}

/// Largest singular value with its singular vector pair `(sigma, u, v)`.
pub fn sigma_max_vectors(m: &DMatrix<Complex64>) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    if m.nrows() == 1 && m.ncols() == 1 {
        let z = m[(0, 0)];
        let s = z.norm();
        let u = if s > 0.0 { z / s } else { Complex64::new(1.0, 0.0) };
        return (s, vec![u], vec![Complex64::new(1.0, 0.0)]);
    }
    let d = svd(m);
    (
        d.sigma[0],
        d.u.column(0).iter().copied().collect(),
        d.v.column(0).iter().copied().collect(),
    )
}

/// Scale each row to unit max-modulus. Returns the scale factors applied.
///
/// Solving the equilibrated system with an equally scaled right-hand side
/// leaves the solution unchanged but makes the condition estimate honest
/// when rows mix O(1) and O(lambda^3) magnitudes.
pub fn equilibrate_rows(m: &mut DMatrix<Complex64>) -> Vec<f64> {
    let mut scales = vec![1.0; m.nrows()];
    for i in 0..m.nrows() {
        let mx = (0..m.ncols()).map(|j| m[(i, j)].norm()).fold(0.0, f64::max);
        if mx > 0.0 {
            scales[i] = 1.0 / mx;
            for j in 0..m.ncols() {
                m[(i, j)] *= scales[i];
            }
        }
    }
    scales
}

/// 1-norm condition estimate via the explicit inverse (fine at n <= 12).
/// Returns `f64::INFINITY` when the matrix is singular.
pub fn condition_1norm(m: &DMatrix<Complex64>) -> f64 {
    let norm1 = |a: &DMatrix<Complex64>| {
        (0..a.ncols())
            .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let lu = m.clone().lu();
    match lu.try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    }
}

//! Frequency-response arithmetic: first-order weights, structured
//! controller realizations, sampled responses, closed-loop maps and
//! sampled H-infinity norms.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::linalg::band::BandMatrix;

/// First-order weighting filter `(b1 s + b0) / (s + a0)`, `a0 > 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderWeight {
    pub b1: f64,
    pub b0: f64,
    pub a0: f64,
}

impl FirstOrderWeight {
    pub fn new(b1: f64, b0: f64, a0: f64) -> Result<Self> {
        if !(a0 > 0.0) {
            return Err(Error::Config(format!("weight pole -a0 = {} must be stable", -a0)));
        }
        Ok(FirstOrderWeight { b1, b0, a0 })
    }

    /// Evaluate the weight at a complex frequency.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let den = s + self.a0;
        if den.norm() == 0.0 {
            return Err(Error::Domain { what: "weight pole", s });
        }
        Ok((self.b1 * s + self.b0) / den)
    }

    pub fn dc_gain(&self) -> f64 {
        self.b0 / self.a0
    }
}

/// State-matrix storage for a controller realization.
///
/// Synthesis tunes the tridiagonal form; dense realizations carry
/// externally supplied controllers (e.g. companion forms of printed
/// transfer functions) through the same analysis paths.
#[derive(Debug, Clone, PartialEq)]
pub enum StateMatrix {
    Tridiagonal {
        diag: Vec<f64>,
        sub: Vec<f64>,
        sup: Vec<f64>,
    },
    Dense(DMatrix<f64>),
}

/// Structured controller `K(s) = [1/(s+eps)] * C (sI - A)^-1 B`.
///
/// The D-block is identically zero and the pseudo-integrator factor is
/// fixed structure, not a tuned parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    pub n_k: usize,
    pub n_y: usize,
    pub n_u: usize,
    pub a: StateMatrix,
    /// n_k x n_y input matrix.
    pub b: DMatrix<f64>,
    /// n_u x n_k output matrix.
    pub c: DMatrix<f64>,
    /// Pseudo-integrator constant; only meaningful with `has_integrator`.
    pub eps: f64,
    pub has_integrator: bool,
}

impl ControllerParams {
    /// Zero-initialized tridiagonal structure.
    pub fn new_tridiagonal(n_k: usize, n_y: usize, n_u: usize, eps: f64, has_integrator: bool) -> Self {
        ControllerParams {
            n_k,
            n_y,
            n_u,
            a: StateMatrix::Tridiagonal {
                diag: vec![0.0; n_k],
                sub: vec![0.0; n_k - 1],
                sup: vec![0.0; n_k - 1],
            },
            b: DMatrix::zeros(n_k, n_y),
            c: DMatrix::zeros(n_u, n_k),
            eps,
            has_integrator,
        }
    }

    /// SISO companion realization of `num(s)/den(s)`, coefficients given
    /// highest power first. The fraction must be strictly proper.
    pub fn from_transfer_function(num: &[f64], den: &[f64]) -> Result<Self> {
        if den.is_empty() || den[0] == 0.0 {
            return Err(Error::Config("denominator needs a nonzero leading coefficient".into()));
        }
        if num.len() >= den.len() {
            return Err(Error::Config("transfer function must be strictly proper (D = 0)".into()));
        }
        let n = den.len() - 1;
        let lead = den[0];
        // Ascending-order monic denominator a0..a_{n-1} and padded numerator.
        let mut a_low = vec![0.0; n];
        for (k, &d) in den.iter().skip(1).enumerate() {
            a_low[n - 1 - k] = d / lead;
        }
        let mut b_low = vec![0.0; n];
        for (k, &v) in num.iter().rev().enumerate() {
            b_low[k] = v / lead;
        }
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -a_low[j];
        }
        let mut b = DMatrix::zeros(n, 1);
        b[(n - 1, 0)] = 1.0;
        let c = DMatrix::from_row_slice(1, n, &b_low);
        Ok(ControllerParams {
            n_k: n,
            n_y: 1,
            n_u: 1,
            a: StateMatrix::Dense(a),
            b,
            c,
            eps: 1e-3,
            has_integrator: false,
        })
    }

    /// Number of tuned parameters: (3 n_k - 2) + n_k n_y + n_u n_k.
    /// Only the tridiagonal structure is tunable.
    pub fn tunable_count(&self) -> Result<usize> {
        match &self.a {
            StateMatrix::Tridiagonal { .. } => Ok(3 * self.n_k - 2 + self.n_k * self.n_y + self.n_u * self.n_k),
            StateMatrix::Dense(_) => Err(Error::Config("dense controllers are not tunable".into())),
        }
    }

    /// Flatten the tuned parameters: diag, sub, sup, B row-major, C row-major.
    pub fn pack(&self) -> Result<Vec<f64>> {
        let StateMatrix::Tridiagonal { diag, sub, sup } = &self.a else {
            return Err(Error::Config("dense controllers are not tunable".into()));
        };
        let mut x = Vec::with_capacity(self.tunable_count()?);
        x.extend_from_slice(diag);
        x.extend_from_slice(sub);
        x.extend_from_slice(sup);
        for i in 0..self.n_k {
            for j in 0..self.n_y {
                x.push(self.b[(i, j)]);
            }
        }
        for i in 0..self.n_u {
            for j in 0..self.n_k {
                x.push(self.c[(i, j)]);
            }
        }
        Ok(x)
    }

    /// Inverse of [`pack`](Self::pack).
    pub fn set_params(&mut self, x: &[f64]) -> Result<()> {
        let want = self.tunable_count()?;
        if x.len() != want {
            return Err(Error::Config(format!("expected {} parameters, got {}", want, x.len())));
        }
        let n = self.n_k;
        let StateMatrix::Tridiagonal { diag, sub, sup } = &mut self.a else {
            unreachable!()
        };
        diag.copy_from_slice(&x[0..n]);
        sub.copy_from_slice(&x[n..2 * n - 1]);
        sup.copy_from_slice(&x[2 * n - 1..3 * n - 2]);
        let mut k = 3 * n - 2;
        for i in 0..self.n_k {
            for j in 0..self.n_y {
                self.b[(i, j)] = x[k];
                k += 1;
            }
        }
        for i in 0..self.n_u {
            for j in 0..self.n_k {
                self.c[(i, j)] = x[k];
                k += 1;
            }
        }
        Ok(())
    }

    /// Dense copy of the state matrix.
    pub fn state_matrix(&self) -> DMatrix<f64> {
        match &self.a {
            StateMatrix::Dense(m) => m.clone(),
            StateMatrix::Tridiagonal { diag, sub, sup } => {
                let n = self.n_k;
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = diag[i];
                }
                for i in 0..n - 1 {
                    m[(i + 1, i)] = sub[i];
                    m[(i, i + 1)] = sup[i];
                }
                m
            }
        }
    }

    /// Eigenvalues of the state matrix (the pseudo-integrator pole is fixed
    /// structure and excluded).
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.state_matrix()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    /// Spectral radius of the tuned dynamics: max |lambda_i(A)|.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// Minimum damping ratio of the tuned dynamics:
    /// min over lambda of -Re(lambda)/|lambda|, with zeta(0) = 0.
    pub fn min_damping(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|l| damping_ratio(*l))
            .fold(f64::INFINITY, f64::min)
    }

    /// Solve (sI - A) X = rhs.
    pub(crate) fn solve_resolvent(&self, s: Complex64, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        self.solve_shifted(s, rhs, false)
    }

    /// Solve (sI - A)^T X = rhs.
    pub(crate) fn solve_resolvent_t(&self, s: Complex64, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        self.solve_shifted(s, rhs, true)
    }

    fn solve_shifted(&self, s: Complex64, rhs: &DMatrix<Complex64>, transpose: bool) -> Result<DMatrix<Complex64>> {
        let n = self.n_k;
        match &self.a {
            StateMatrix::Tridiagonal { diag, sub, sup } => {
                let (lo, hi) = if transpose { (sup, sub) } else { (sub, sup) };
                let mut band = BandMatrix::zeros(n, 1, 1);
                for i in 0..n {
                    band.set(i, i, s - diag[i]);
                }
                for i in 0..n - 1 {
                    band.set(i + 1, i, Complex64::new(-lo[i], 0.0));
                    band.set(i, i + 1, Complex64::new(-hi[i], 0.0));
                }
                let lu = band
                    .factor()
                    .map_err(|_| Error::Domain { what: "singular controller resolvent", s })?;
                let mut out = rhs.clone();
                let mut col = vec![Complex64::default(); n];
                for j in 0..rhs.ncols() {
                    for i in 0..n {
                        col[i] = rhs[(i, j)];
                    }
                    lu.solve(&mut col);
                    for i in 0..n {
                        out[(i, j)] = col[i];
                    }
                }
                Ok(out)
            }
            StateMatrix::Dense(a) => {
                let mut m = DMatrix::<Complex64>::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let v = if transpose { a[(j, i)] } else { a[(i, j)] };
                        m[(i, j)] = Complex64::new(-v, 0.0);
                    }
                    m[(i, i)] += s;
                }
                m.lu()
                    .solve(rhs)
                    .ok_or(Error::Domain { what: "singular controller resolvent", s })
            }
        }
    }

    /// The tuned block `K~(s) = C (sI - A)^-1 B`, without the
    /// pseudo-integrator factor.
    pub fn response_tilde(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let bc: DMatrix<Complex64> = self.b.map(|v| Complex64::new(v, 0.0));
        let m2 = self.solve_resolvent(s, &bc)?;
        let cc: DMatrix<Complex64> = self.c.map(|v| Complex64::new(v, 0.0));
        Ok(cc * m2)
    }

    /// Full controller response, pseudo-integrator included.
    pub fn response(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let mut k = self.response_tilde(s)?;
        if self.has_integrator {
            let den = s + self.eps;
            if den.norm() == 0.0 {
                return Err(Error::Domain { what: "pseudo-integrator pole", s });
            }
            k /= den;
        }
        Ok(k)
    }
}

/// Damping ratio of one eigenvalue; a pole at the origin has none.
pub fn damping_ratio(l: Complex64) -> f64 {
    let m = l.norm();
    if m == 0.0 {
        0.0
    } else {
        -l.re / m
    }
}

// ---------------------------------------------------------------------------
// Controller JSON format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StateMatrixJson {
    Tridiagonal {
        diag: Vec<f64>,
        sub: Vec<f64>,
        #[serde(rename = "super")]
        sup: Vec<f64>,
    },
    Dense {
        rows: Vec<Vec<f64>>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerJson {
    n_k: usize,
    n_y: usize,
    n_u: usize,
    state_matrix: StateMatrixJson,
    input_matrix: Vec<Vec<f64>>,
    output_matrix: Vec<Vec<f64>>,
    eps: f64,
    has_integrator: bool,
}

fn rows_to_matrix(rows: &[Vec<f64>], nr: usize, nc: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Config(format!("{what} must be {nr} x {nc}")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl Serialize for ControllerParams {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let a = match &self.a {
            StateMatrix::Tridiagonal { diag, sub, sup } => StateMatrixJson::Tridiagonal {
                diag: diag.clone(),
                sub: sub.clone(),
                sup: sup.clone(),
            },
            StateMatrix::Dense(m) => StateMatrixJson::Dense { rows: matrix_to_rows(m) },
        };
        ControllerJson {
            n_k: self.n_k,
            n_y: self.n_y,
            n_u: self.n_u,
            state_matrix: a,
            input_matrix: matrix_to_rows(&self.b),
            output_matrix: matrix_to_rows(&self.c),
            eps: self.eps,
            has_integrator: self.has_integrator,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ControllerParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let j = ControllerJson::deserialize(de)?;
        let n = j.n_k;
        if n == 0 {
            return Err(D::Error::custom("controller order must be positive"));
        }
        let a = match j.state_matrix {
            StateMatrixJson::Tridiagonal { diag, sub, sup } => {
                if diag.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
                    return Err(D::Error::custom("tridiagonal bands inconsistent with n_k"));
                }
                StateMatrix::Tridiagonal { diag, sub, sup }
            }
            StateMatrixJson::Dense { rows } => {
                StateMatrix::Dense(rows_to_matrix(&rows, n, n, "state matrix").map_err(D::Error::custom)?)
            }
        };
        if !(j.eps > 0.0) {
            return Err(D::Error::custom("eps must be positive"));
        }
        Ok(ControllerParams {
            n_k: n,
            n_y: j.n_y,
            n_u: j.n_u,
            a,
            b: rows_to_matrix(&j.input_matrix, n, j.n_y, "input matrix").map_err(D::Error::custom)?,
            c: rows_to_matrix(&j.output_matrix, j.n_u, n, "output matrix").map_err(D::Error::custom)?,
            eps: j.eps,
            has_integrator: j.has_integrator,
        })
    }
}

// ---------------------------------------------------------------------------
// Frequency responses
// ---------------------------------------------------------------------------

/// Anything that can produce an exact frequency response at complex s.
pub trait FrequencyResponse: Send + Sync {
    /// Output and input dimensions (rows, cols).
    fn dims(&self) -> (usize, usize);
    fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>>;
}

/// Complex response matrices sampled on a frequency grid.
#[derive(Debug, Clone)]
pub struct SampledResponse {
    pub grid: Arc<FrequencyGrid>,
    pub values: Vec<DMatrix<Complex64>>,
    pub rows: usize,
    pub cols: usize,
}

impl SampledResponse {
    pub fn new(grid: Arc<FrequencyGrid>, values: Vec<DMatrix<Complex64>>) -> Self {
        assert_eq!(grid.nodes.len(), values.len(), "one matrix per grid node");
        let (rows, cols) = values
            .first()
            .map(|m| (m.nrows(), m.ncols()))
            .unwrap_or((0, 0));
        assert!(
            values.iter().all(|m| m.nrows() == rows && m.ncols() == cols),
            "all matrices share dims"
        );
        SampledResponse { grid, values, rows, cols }
    }
}

/// Sweep a plant over a grid, optionally folding a pseudo-integrator
/// `1/(s + eps)` into the samples. Parallel over frequencies with an
/// ordered (deterministic) reduction.
pub fn sweep(
    plant: &dyn FrequencyResponse,
    grid: Arc<FrequencyGrid>,
    fold_eps: Option<f64>,
) -> Result<SampledResponse> {
    let results: Vec<Result<DMatrix<Complex64>>> = grid
        .nodes
        .par_iter()
        .map(|&w| {
            let s = Complex64::new(0.0, w);
            let mut g = plant.eval(s)?;
            if let Some(eps) = fold_eps {
                g /= s + eps;
            }
            Ok(g)
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    for r in results {
        values.push(r?);
    }
    Ok(SampledResponse::new(grid, values))
}

/// Sensitivity and complementary sensitivity on the sampled grid:
/// `S = (I + G K)^-1`, `T = G K S`.
pub fn closed_loop_maps(
    g: &SampledResponse,
    k_eval: &(dyn Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync),
) -> Result<(SampledResponse, SampledResponse)> {
    if g.rows != g.cols {
        return Err(Error::Config("closed-loop maps need a square plant".into()));
    }
    let n = g.rows;
    let eye = DMatrix::<Complex64>::identity(n, n);
    let mut s_vals = Vec::with_capacity(g.values.len());
    let mut t_vals = Vec::with_capacity(g.values.len());
    for (idx, gm) in g.values.iter().enumerate() {
        let w = g.grid.nodes[idx];
        let k = k_eval(Complex64::new(0.0, w))?;
        let gk = gm * &k;
        let m = &eye + &gk;
        let s = m.clone().lu().try_inverse().ok_or(Error::Singular {
            what: "I + GK",
            omega: w,
        })?;
        let t = &gk * &s;
        // S + T = I is an algebraic identity; anything beyond rounding
        // means the inversion went bad.
        let scale = 1.0 + s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let dev = (&s + &t - &eye).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(
            dev <= 1e-12 * scale,
            "S + T - I deviation {dev:.3e} at omega = {w}"
        );
        s_vals.push(s);
        t_vals.push(t);
    }
    Ok((
        SampledResponse::new(g.grid.clone(), s_vals),
        SampledResponse::new(g.grid.clone(), t_vals),
    ))
}

/// Sampled H-infinity norm: max over grid nodes in `band` of
/// `sigma_max(w(j omega) * M(j omega))`.
pub fn sampled_hinf_norm(
    m: &SampledResponse,
    weight: Option<&FirstOrderWeight>,
    band: (f64, f64),
) -> Result<f64> {
    let idx = m.grid.band_indices(band.0, band.1);
    if idx.is_empty() {
        return Err(Error::Config(format!(
            "band [{}, {}] does not intersect the grid",
            band.0, band.1
        )));
    }
    let mut best = 0.0f64;
    for i in idx {
        let w = m.grid.nodes[i];
        let gain = match weight {
            Some(flt) => flt.eval(Complex64::new(0.0, w))?.norm(),
            None => 1.0,
        };
        best = best.max(gain * linalg::sigma_max(&m.values[i]));
    }
    Ok(best)
}

/// A constant (frequency-independent) response, used by fixtures.
#[derive(Debug, Clone)]
pub struct ConstantPlant(pub DMatrix<Complex64>);

impl FrequencyResponse for ConstantPlant {
    fn dims(&self) -> (usize, usize) {
        (self.0.nrows(), self.0.ncols())
    }
    fn eval(&self, _s: Complex64) -> Result<DMatrix<Complex64>> {
        Ok(self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Band, GridRole, Spacing};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn w1_timoshenko() -> FirstOrderWeight {
        FirstOrderWeight::new(0.05, 0.9987, 0.0009987).unwrap()
    }

    #[test]
    fn weight_dc_gain_is_1e3() {
        let w = w1_timoshenko();
        let v = w.eval(c(0.0, 0.0)).unwrap();
        assert!((v.re - 1000.0).abs() < 1e-9, "dc gain {}", v.re);
        assert!(v.im.abs() < 1e-300);
        assert!((w.dc_gain() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn weight_zero_numerator() {
        let w = FirstOrderWeight::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(w.eval(c(3.0, -2.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn weight_high_frequency_magnitude() {
        // W2 = (1000 s + 2)/(s + 2000) -> |W2| ~ 1000 at s = j 1e6.
        let w = FirstOrderWeight::new(1000.0, 2.0, 2000.0).unwrap();
        let v = w.eval(c(0.0, 1e6)).unwrap();
        assert!((v.norm() - 1000.0).abs() < 5.0);
    }

    #[test]
    fn weight_pole_hit_is_domain_error() {
        let w = FirstOrderWeight::new(1.0, 1.0, 2.0).unwrap();
        assert!(w.eval(c(-2.0, 0.0)).is_err());
    }

    #[test]
    fn unstable_weight_rejected() {
        assert!(FirstOrderWeight::new(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn zero_bc_controller_evaluates_to_zero() {
        let k = ControllerParams::new_tridiagonal(4, 2, 2, 1e-3, true);
        let mut k = k;
        if let StateMatrix::Tridiagonal { diag, .. } = &mut k.a {
            diag.iter_mut().for_each(|d| *d = -1.0);
        }
        let v = k.response(c(0.3, 2.0)).unwrap();
        assert!(v.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn scalar_lag_response() {
        let mut k = ControllerParams::new_tridiagonal(1, 1, 1, 1e-3, false);
        k.set_params(&[-1.0, 1.0, 1.0]).unwrap();
        let v = k.response(c(0.0, 1.0)).unwrap();
        let want = Complex64::new(1.0, 0.0) / c(1.0, 1.0);
        assert!((v[(0, 0)] - want).norm() < 1e-14);
    }

    #[test]
    fn printed_fifth_order_controller_dc_value() {
        let k = ControllerParams::from_transfer_function(
            &[-0.0144, -0.3585, -54.58, -9.669, -173.8],
            &[1.0, 16.9, 106.1, 108.1, 539.7, 3.678],
        )
        .unwrap();
        let v = k.response(c(0.0, 0.0)).unwrap();
        let want = -173.8 / 3.678;
        assert!(
            (v[(0, 0)].re - want).abs() < 1e-9,
            "K(0) = {} want {want}",
            v[(0, 0)].re
        );
        assert!(v[(0, 0)].im.abs() < 1e-12);
    }

    #[test]
    fn improper_transfer_function_rejected() {
        assert!(ControllerParams::from_transfer_function(&[1.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn spectral_radius_examples() {
        let mut k = ControllerParams::new_tridiagonal(1, 1, 1, 1e-3, false);
        k.set_params(&[-1.0, 0.0, 0.0]).unwrap();
        assert!((k.spectral_radius() - 1.0).abs() < 1e-12);

        // 2x2 block with eigenvalues -3 +/- 4j.
        let mut k2 = ControllerParams::new_tridiagonal(2, 1, 1, 1e-3, false);
        k2.set_params(&[-3.0, -3.0, -4.0, 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((k2.spectral_radius() - 5.0).abs() < 1e-9);

        let z = ControllerParams::new_tridiagonal(3, 1, 1, 1e-3, false);
        assert_eq!(z.spectral_radius(), 0.0);
    }

    #[test]
    fn min_damping_examples() {
        let mut k = ControllerParams::new_tridiagonal(1, 1, 1, 1e-3, false);
        k.set_params(&[-1.0, 0.0, 0.0]).unwrap();
        assert!((k.min_damping() - 1.0).abs() < 1e-12);

        let mut k2 = ControllerParams::new_tridiagonal(2, 1, 1, 1e-3, false);
        k2.set_params(&[-1.0, -1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((k2.min_damping() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);

        let mut k3 = ControllerParams::new_tridiagonal(1, 1, 1, 1e-3, false);
        k3.set_params(&[1.0, 0.0, 0.0]).unwrap();
        assert!((k3.min_damping() + 1.0).abs() < 1e-12);

        assert_eq!(damping_ratio(c(0.0, 0.0)), 0.0);
    }

    #[test]
    fn parameter_count_54_for_order_8_two_by_two() {
        let k = ControllerParams::new_tridiagonal(8, 2, 2, 1e-3, true);
        assert_eq!(k.tunable_count().unwrap(), 54);
        assert_eq!(k.pack().unwrap().len(), 54);
    }

    #[test]
    fn pack_set_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut k = ControllerParams::new_tridiagonal(5, 2, 2, 1e-3, true);
        let n = k.tunable_count().unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        k.set_params(&x).unwrap();
        assert_eq!(k.pack().unwrap(), x);
    }

    #[test]
    fn conjugate_symmetry_of_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut k = ControllerParams::new_tridiagonal(6, 2, 2, 1e-3, true);
        let n = k.tunable_count().unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        k.set_params(&x).unwrap();
        for _ in 0..20 {
            let s = c(rng.gen_range(-1.0..1.0), rng.gen_range(0.1..10.0));
            let a = k.response(s).unwrap();
            let b = k.response(s.conj()).unwrap();
            let dev = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| (a[(i, j)].conj() - b[(i, j)]).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "conjugate symmetry violated by {dev}");
        }
    }

    fn toy_grid(n: usize) -> Arc<FrequencyGrid> {
        Arc::new(build_grid(&[Band::new(0.5, 2.0, n, Spacing::Linear)], GridRole::DiskNyquist).unwrap())
    }

    #[test]
    fn closed_loop_with_zero_controller() {
        let grid = toy_grid(5);
        let plant = ConstantPlant(DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0)));
        let g = sweep(&plant, grid, None).unwrap();
        let zero = |_s: Complex64| Ok(DMatrix::<Complex64>::zeros(2, 2));
        let (s, t) = closed_loop_maps(&g, &zero).unwrap();
        for m in &s.values {
            assert!((m - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-15);
        }
        for m in &t.values {
            assert!(m.norm() == 0.0);
        }
    }

    #[test]
    fn closed_loop_scalar_half() {
        let grid = toy_grid(3);
        let plant = ConstantPlant(DMatrix::from_element(1, 1, c(1.0, 0.0)));
        let g = sweep(&plant, grid, None).unwrap();
        let one = |_s: Complex64| Ok(DMatrix::from_element(1, 1, c(1.0, 0.0)));
        let (s, t) = closed_loop_maps(&g, &one).unwrap();
        for (sm, tm) in s.values.iter().zip(&t.values) {
            assert!((sm[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
            assert!((tm[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_loop_identity_residual_small() {
        let grid = toy_grid(12);
        let plant = ConstantPlant(DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.5), c(0.2, -0.1), c(-0.3, 0.4), c(2.0, 0.0)],
        ));
        let g = sweep(&plant, grid, None).unwrap();
        let mut k = ControllerParams::new_tridiagonal(2, 2, 2, 1e-3, false);
        k.set_params(&[-1.0, -2.0, 0.3, -0.1, 1.0, 0.2, 0.1, 1.0, 0.5, 0.0, 0.0, 0.7]).unwrap();
        let eye = DMatrix::<Complex64>::identity(2, 2);
        let (s, t) = closed_loop_maps(&g, &|sv| k.response(sv)).unwrap();
        for (sm, tm) in s.values.iter().zip(&t.values) {
            let dev = (sm + tm - &eye).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev <= 1e-12);
        }
    }

    #[test]
    fn singular_loop_reports_frequency() {
        let grid = toy_grid(3);
        let plant = ConstantPlant(DMatrix::from_element(1, 1, c(1.0, 0.0)));
        let g = sweep(&plant, grid, None).unwrap();
        let minus_one = |_s: Complex64| Ok(DMatrix::from_element(1, 1, c(-1.0, 0.0)));
        let err = closed_loop_maps(&g, &minus_one).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn hinf_norm_examples() {
        let grid = toy_grid(4);
        let eye = ConstantPlant(DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0)));
        let g = sweep(&eye, grid.clone(), None).unwrap();
        assert!((sampled_hinf_norm(&g, None, (0.0, 10.0)).unwrap() - 1.0).abs() < 1e-14);

        let zero = ConstantPlant(DMatrix::zeros(2, 2));
        let gz = sweep(&zero, grid.clone(), None).unwrap();
        assert_eq!(sampled_hinf_norm(&gz, None, (0.0, 10.0)).unwrap(), 0.0);

        // Scalar M = 2 with a constant weight = 3: (3 s + 3)/(s + 1).
        let two = ConstantPlant(DMatrix::from_element(1, 1, c(2.0, 0.0)));
        let g2 = sweep(&two, grid, None).unwrap();
        let w = FirstOrderWeight::new(3.0, 3.0, 1.0).unwrap();
        assert!((sampled_hinf_norm(&g2, Some(&w), (0.0, 10.0)).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn hinf_norm_with_b1_zero_weight() {
        let grid = toy_grid(2); // nodes 0.5, 2.0
        let two = ConstantPlant(DMatrix::from_element(1, 1, c(2.0, 0.0)));
        let g = sweep(&two, grid, None).unwrap();
        let w = FirstOrderWeight::new(0.0, 3.0, 1.0).unwrap();
        // max over {0.5, 2.0} of 2 * 3/|j w + 1| attained at w = 0.5.
        let want = 2.0 * 3.0 / (0.5f64 * 0.5 + 1.0).sqrt();
        assert!((sampled_hinf_norm(&g, Some(&w), (0.0, 10.0)).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn hinf_norm_empty_band_is_config_error() {
        let grid = toy_grid(4);
        let eye = ConstantPlant(DMatrix::identity(2, 2));
        let g = sweep(&eye, grid, None).unwrap();
        assert!(sampled_hinf_norm(&g, None, (100.0, 200.0)).is_err());
    }

    #[test]
    fn hinf_norm_monotone_in_band_inclusion() {
        let grid = Arc::new(
            build_grid(&[Band::new(0.1, 10.0, 40, Spacing::Log)], GridRole::Tracking).unwrap(),
        );
        let mut k = ControllerParams::new_tridiagonal(2, 1, 1, 1e-3, false);
        k.set_params(&[-0.5, -2.0, 0.4, -0.3, 1.0, 0.0, 0.5, 0.8]).unwrap();
        let values: Vec<_> = grid
            .nodes
            .iter()
            .map(|&w| k.response(c(0.0, w)).unwrap())
            .collect();
        let m = SampledResponse::new(grid, values);
        let inner = sampled_hinf_norm(&m, None, (0.5, 2.0)).unwrap();
        let outer = sampled_hinf_norm(&m, None, (0.1, 10.0)).unwrap();
        assert!(inner <= outer + 1e-15);
    }

    #[test]
    fn controller_json_round_trip_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut k = ControllerParams::new_tridiagonal(8, 2, 2, 1e-3, true);
        let n = k.tunable_count().unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        k.set_params(&x).unwrap();
        let text = serde_json::to_string_pretty(&k).unwrap();
        let k2: ControllerParams = serde_json::from_str(&text).unwrap();
        assert_eq!(k, k2);
        // And for a dense companion realization.
        let kd = ControllerParams::from_transfer_function(&[1.0, 2.0], &[1.0, 3.0, 4.0]).unwrap();
        let text = serde_json::to_string(&kd).unwrap();
        let kd2: ControllerParams = serde_json::from_str(&text).unwrap();
        assert_eq!(kd, kd2);
    }
}

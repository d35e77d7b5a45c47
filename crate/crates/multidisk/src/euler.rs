//! Exact SISO transfer function of the piezo-actuated cantilever
//! Euler-Bernoulli beam, plus its open-loop pole relation.
//!
//! The distributional forcing `K_a (delta'(x-x2) - delta'(x-x1)) u` is
//! handled exactly: integrating the fourth-order equation across a patch
//! end shows w, w', w''' stay continuous while w'' jumps by
//! `+-K_a u / (EI + c_kv s)`. The solution is an exponential quartic basis
//! on each of the three segments, glued by those jump conditions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::FrequencyResponse;
use crate::timoshenko::PlantEval;

/// Beam and transducer constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerSpec {
    pub length: f64,
    /// Bending stiffness E I.
    pub bend_ei: f64,
    /// Mass per unit length rho A.
    pub rho_a: f64,
    /// Viscous damping coefficient.
    #[serde(default)]
    pub c_v: f64,
    /// Kelvin-Voigt damping coefficient.
    #[serde(default)]
    pub c_kv: f64,
    /// Actuator gain.
    pub k_a: f64,
    /// Sensor gain.
    pub k_s: f64,
    /// Patch ends, 0 < x1 < x2 < L.
    pub x1: f64,
    pub x2: f64,
}

impl EulerSpec {
    /// Normalized default fixture: unit beam with a patch on [0.05, 0.15].
    pub fn normalized() -> Self {
        EulerSpec {
            length: 1.0,
            bend_ei: 1.0,
            rho_a: 1.0,
            c_v: 0.0,
            c_kv: 0.0,
            k_a: 1.0,
            k_s: 1.0,
            x1: 0.05,
            x2: 0.15,
        }
    }

    pub fn with_damping(mut self, c_v: f64, c_kv: f64) -> Self {
        self.c_v = c_v;
        self.c_kv = c_kv;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("bend_ei", self.bend_ei),
            ("rho_a", self.rho_a),
            ("k_a", self.k_a),
            ("k_s", self.k_s),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.c_v >= 0.0 && self.c_kv >= 0.0) {
            return Err(Error::Config("damping coefficients must be nonnegative".into()));
        }
        if !(0.0 < self.x1 && self.x1 < self.x2 && self.x2 < self.length) {
            return Err(Error::Config(format!(
                "patch ends must satisfy 0 < x1 < x2 < L, got x1 = {}, x2 = {}",
                self.x1, self.x2
            )));
        }
        Ok(())
    }

    /// The viscous or Kelvin-Voigt damped beam is open-loop stable.
    pub fn nyquist_admissible(&self) -> bool {
        self.c_v > 0.0 || self.c_kv > 0.0
    }
}

/// Exact transfer function y(s)/u(s) at complex s.
pub fn eb_tf(spec: &EulerSpec, s: Complex64) -> Result<PlantEval> {
    if s.norm() == 0.0 {
        return Err(Error::Domain { what: "s = 0 excluded", s });
    }
    let stiff = Complex64::new(spec.bend_ei, 0.0) + spec.c_kv * s;
    let stiff_scale = spec.bend_ei + spec.c_kv * s.norm();
    if stiff.norm() <= 1e-14 * stiff_scale {
        return Err(Error::Domain { what: "stiffness pole s = -EI/c_kv", s });
    }
    let mass = spec.rho_a * s * s + spec.c_v * s;
    let mass_scale = spec.rho_a * s.norm_sqr() + spec.c_v * s.norm();
    if mass.norm() <= 1e-14 * mass_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateBasis { s });
    }
    // lambda^4 = -mass/stiff; the four roots are the principal quartic root
    // times the fourth roots of unity.
    let r0 = (-mass / stiff).powf(0.25);
    let lam = [r0, r0 * Complex64::i(), -r0, -r0 * Complex64::i()];

    let bounds = [(0.0, spec.x1), (spec.x1, spec.x2), (spec.x2, spec.length)];
    // Per-segment scaled basis: e^{lambda (x - ref)}, ref at the growing end.
    let refp = |seg: usize, i: usize| -> f64 {
        let (lo, hi) = bounds[seg];
        if lam[i].re > 0.0 {
            hi
        } else {
            lo
        }
    };
    // d-th derivative of basis function (seg, i) at x.
    let basis = |seg: usize, i: usize, x: f64, d: u32| -> Complex64 {
        lam[i].powu(d) * (lam[i] * (x - refp(seg, i))).exp()
    };

    let col = |seg: usize, i: usize| 4 * seg + i;
    let mut m = DMatrix::<Complex64>::zeros(12, 12);
    let mut rhs = DVector::<Complex64>::zeros(12);
    let jump = spec.k_a / stiff;

    // Clamped root: w(0) = w'(0) = 0.
    for i in 0..4 {
        m[(0, col(0, i))] = basis(0, i, 0.0, 0);
        m[(1, col(0, i))] = basis(0, i, 0.0, 1);
    }
    // Interface conditions at x1 and x2: w, w', w''' continuous, w'' jumps.
    for (block, (xi, sign)) in [(spec.x1, -1.0), (spec.x2, 1.0)].iter().enumerate() {
        let (left, right) = (block, block + 1);
        for (row_off, d) in [(0usize, 0u32), (1, 1), (2, 2), (3, 3)] {
            let row = 2 + 4 * block + row_off;
            for i in 0..4 {
                m[(row, col(right, i))] = basis(right, i, *xi, d);
                m[(row, col(left, i))] = -basis(left, i, *xi, d);
            }
            if d == 2 {
                rhs[row] = *sign * jump;
            }
        }
    }
    // Free tip: w''(L) = w'''(L) = 0.
    for i in 0..4 {
        m[(10, col(2, i))] = basis(2, i, spec.length, 2);
        m[(11, col(2, i))] = basis(2, i, spec.length, 3);
    }

    let scales = linalg::equilibrate_rows(&mut m);
    for (r, sc) in scales.iter().enumerate() {
        rhs[r] *= *sc;
    }
    let condition = linalg::condition_1norm(&m);
    let a = m.lu().solve(&rhs).ok_or(Error::Singular {
        what: "Euler-Bernoulli interface system",
        omega: s.im,
    })?;

    // Output from the middle segment, whose basis covers both patch ends.
    let wp = |x: f64| -> Complex64 { (0..4).map(|i| a[col(1, i)] * basis(1, i, x, 1)).sum() };
    let y = spec.k_s * (wp(spec.x2) - wp(spec.x1));
    Ok(PlantEval {
        g: DMatrix::from_element(1, 1, y),
        condition,
    })
}

/// First n positive roots of `1 + cos(x) cosh(x) = 0`.
///
/// Bisection on the bounded equivalent `cos(x) + sech(x) = 0`; each root is
/// returned to about 1e-10 absolute accuracy.
pub fn eb_cantilever_roots(n: usize) -> Vec<f64> {
    let g = |x: f64| x.cos() + 1.0 / x.cosh();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let center = (k as f64 - 0.5) * std::f64::consts::PI;
        let (mut lo, mut hi) = (center - 0.6, center + 0.6);
        let (glo, ghi) = (g(lo), g(hi));
        debug_assert!(glo * ghi < 0.0, "bracket failed for root {k}");
        let rising = glo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let gm = g(mid);
            if (gm < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Open-loop poles from the mode relation.
///
/// For each cantilever root r_k the oscillatory branch solves
/// `rho A s^2 + (c_v + c_kv r^4) s + EI r^4 = 0`; complex pairs return the
/// upper-half-plane member, real (overdamped) pairs the more negative root,
/// which is the branch that bends away as k grows.
pub fn eb_poles(spec: &EulerSpec, n: usize) -> Vec<Complex64> {
    eb_cantilever_roots(n)
        .iter()
        .map(|rl| {
            let r = rl / spec.length;
            let r4 = r.powi(4);
            let b = spec.c_v + spec.c_kv * r4;
            let c = spec.bend_ei * r4;
            let a = spec.rho_a;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                Complex64::new(-b / (2.0 * a), (-disc).sqrt() / (2.0 * a))
            } else {
                Complex64::new((-b - disc.sqrt()) / (2.0 * a), 0.0)
            }
        })
        .collect()
}

/// [`FrequencyResponse`] wrapper with the degenerate-sample retry.
#[derive(Debug, Clone)]
pub struct EulerPlant(pub EulerSpec);

impl FrequencyResponse for EulerPlant {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        match eb_tf(&self.0, s) {
            Ok(ev) => Ok(ev.g),
            Err(Error::DegenerateBasis { .. }) => Ok(eb_tf(&self.0, s * (1.0 + 1e-9))?.g),
            Err(e) => Err(e),
        }
    }
}

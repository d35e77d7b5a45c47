//! Exact 2x2 transfer matrix of the boundary-controlled cantilever
//! Timoshenko beam.
//!
//! Eliminating the rotation angle from the Laplace-transformed pair of
//! coupled second-order equations leaves a single quartic ODE
//! `w'''' = p(s) w'' + q(s) w` whose exponential basis is known in closed
//! form. The four boundary conditions (clamped root, shear and moment
//! actuation at the tip, optional proportional pre-stabilizer folded into
//! the tip rows) then determine the response through a 4x4 solve per
//! frequency. Damping only changes the coefficient functions p, q.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::FrequencyResponse;

/// Physical and control constants of the Timoshenko beam.
///
/// `d_*` are viscous (external) damping coefficients, `kv_*` the
/// Kelvin-Voigt (internal) ones; `alpha`, `beta` are the proportional
/// tip-feedback gains of the pre-stabilizer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimoshenkoSpec {
    pub length: f64,
    /// Mass per unit length.
    pub rho: f64,
    /// Shear stiffness K = k G A.
    pub shear_k: f64,
    /// Rotary inertia of the cross-section.
    pub rot_inertia: f64,
    /// Young's modulus.
    pub young: f64,
    /// Second moment of area.
    pub area_moment: f64,
    #[serde(default)]
    pub d_w: f64,
    #[serde(default)]
    pub d_phi: f64,
    #[serde(default)]
    pub kv_w: f64,
    #[serde(default)]
    pub kv_phi: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
}

impl TimoshenkoSpec {
    /// The study constants: L = 1, rho = 1, K = 1.5, I_rho = 2, E = 2.5,
    /// I = 3, undamped, no pre-stabilizer.
    pub fn paper() -> Self {
        TimoshenkoSpec {
            length: 1.0,
            rho: 1.0,
            shear_k: 1.5,
            rot_inertia: 2.0,
            young: 2.5,
            area_moment: 3.0,
            d_w: 0.0,
            d_phi: 0.0,
            kv_w: 0.0,
            kv_phi: 0.0,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn with_prestab(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_viscous(mut self, d_w: f64, d_phi: f64) -> Self {
        self.d_w = d_w;
        self.d_phi = d_phi;
        self
    }

    pub fn with_kelvin_voigt(mut self, kv_w: f64, kv_phi: f64) -> Self {
        self.kv_w = kv_w;
        self.kv_phi = kv_phi;
        self
    }

    /// Bending stiffness E I.
    pub fn ei(&self) -> f64 {
        self.young * self.area_moment
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("length", self.length),
            ("rho", self.rho),
            ("shear_k", self.shear_k),
            ("rot_inertia", self.rot_inertia),
            ("young", self.young),
            ("area_moment", self.area_moment),
        ];
        for (name, v) in pos {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("d_w", self.d_w),
            ("d_phi", self.d_phi),
            ("kv_w", self.kv_w),
            ("kv_phi", self.kv_phi),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Whether the open loop (controller off) has its pole strings in the
    /// left half plane, so the Nyquist test applies with winding zero.
    /// Either internal/external damping or the proportional tip feedback
    /// provides this.
    pub fn nyquist_admissible(&self) -> bool {
        (self.d_w > 0.0 && self.d_phi > 0.0)
            || (self.kv_w > 0.0 && self.kv_phi > 0.0)
            || (self.alpha > 0.0 && self.beta > 0.0)
    }
}

/// Coefficient data of the eliminated quartic at one frequency.
#[derive(Debug, Clone, Copy)]
pub struct TimoCoefficients {
    /// w'''' = p w'' + q w.
    pub p: Complex64,
    pub q: Complex64,
    /// phi = cw1 * w' + cw3 * w'''.
    pub cw1: Complex64,
    pub cw3: Complex64,
    /// Internal couplings, kept for the elimination-residual oracle:
    /// w'' = p11 w + phi', phi'' = q11 phi + q12 w'.
    pub p11: Complex64,
    pub q11: Complex64,
    pub q12: Complex64,
}

/// Coefficients of the eliminated quartic and the rotation-recovery map,
/// adapted to the damping scenario encoded in `spec`.
pub fn timo_coefficients(spec: &TimoshenkoSpec, s: Complex64) -> Result<TimoCoefficients> {
    if s.norm() == 0.0 {
        return Err(Error::Domain { what: "s = 0 excluded", s });
    }
    let den_w = Complex64::new(spec.shear_k, 0.0) + spec.kv_w * s;
    let den_phi = Complex64::new(spec.ei(), 0.0) + spec.kv_phi * s;
    if den_w.norm() == 0.0 || den_phi.norm() == 0.0 {
        return Err(Error::Domain { what: "damped stiffness vanishes", s });
    }
    let p11 = (spec.rho * s * s + spec.d_w * s) / den_w;
    let q11 = (spec.rot_inertia * s * s + spec.d_phi * s + den_w) / den_phi;
    let q12 = -den_w / den_phi;
    let q11_scale = (spec.rot_inertia * s.norm_sqr() + spec.d_phi * s.norm() + den_w.norm())
        / den_phi.norm();
    if q11.norm() <= 1e-14 * q11_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain { what: "phi-map pole (s^2 + c = 0)", s });
    }
    Ok(TimoCoefficients {
        p: p11 + q11 + q12,
        q: -p11 * q11,
        cw1: -(p11 + q12) / q11,
        cw3: Complex64::new(1.0, 0.0) / q11,
        p11,
        q11,
        q12,
    })
}

/// The four characteristic roots of `w'''' = p w'' + q w`.
///
/// Fails when the two root pairs collide (|p^2 + 4q| ~ 0) or a pair sits
/// at the origin; the caller retries at a slightly perturbed s.
pub fn quartic_roots(p: Complex64, q: Complex64, s: Complex64) -> Result<[Complex64; 4]> {
    let disc = p * p + 4.0 * q;
    let scale = (p.norm_sqr() + 4.0 * q.norm()).max(f64::MIN_POSITIVE);
    if disc.norm() <= 1e-14 * scale {
        return Err(Error::DegenerateBasis { s });
    }
    let root = disc.sqrt();
    let mu1 = 0.5 * (p + root);
    let mu2 = 0.5 * (p - root);
    let mu_scale = mu1.norm().max(mu2.norm()).max(f64::MIN_POSITIVE);
    if mu1.norm().min(mu2.norm()) <= 1e-14 * mu_scale {
        return Err(Error::DegenerateBasis { s });
    }
    let l1 = mu1.sqrt();
    let l2 = mu2.sqrt();
    let mut roots = [l1, -l1, l2, -l2];
    // Deterministic enumeration; any consistent order works since all four
    // exponentials enter the basis.
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(roots)
}

/// Exact plant value together with a conditioning report.
#[derive(Debug, Clone)]
pub struct PlantEval {
    pub g: DMatrix<Complex64>,
    /// 1-norm condition estimate of the (equilibrated) boundary system.
    pub condition: f64,
}

impl PlantEval {
    /// Condition beyond this threshold flags proximity to a plant pole;
    /// the value is still returned.
    pub const NEAR_POLE_CONDITION: f64 = 1e12;

    pub fn near_pole(&self) -> bool {
        self.condition > Self::NEAR_POLE_CONDITION
    }
}

/// Exact transfer matrix u -> (s w(L), s phi(L)) at complex s.
pub fn timo_tf(spec: &TimoshenkoSpec, s: Complex64) -> Result<PlantEval> {
    let co = timo_coefficients(spec, s)?;
    let lam = quartic_roots(co.p, co.q, s)?;
    let el = spec.length;
    let k = spec.shear_k;
    let ei = spec.ei();

    // Scaled exponential basis: e^{lambda (x - ref)} with ref at the end
    // where the exponential would blow up, keeping every entry <= 1.
    let refs: Vec<f64> = lam.iter().map(|l| if l.re > 0.0 { el } else { 0.0 }).collect();
    let at0: Vec<Complex64> = lam.iter().zip(&refs).map(|(l, r)| (-l * *r).exp()).collect();
    let at_l: Vec<Complex64> = lam
        .iter()
        .zip(&refs)
        .map(|(l, r)| (l * (el - *r)).exp())
        .collect();
    let phic: Vec<Complex64> = lam.iter().map(|l| co.cw1 * l + co.cw3 * l * l * l).collect();

    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for i in 0..4 {
        m[(0, i)] = at0[i];
        m[(1, i)] = phic[i] * at0[i];
        m[(2, i)] = (k * (lam[i] - phic[i]) + spec.alpha * s) * at_l[i];
        m[(3, i)] = (ei * phic[i] * lam[i] + spec.beta * s * phic[i]) * at_l[i];
    }
    let scales = linalg::equilibrate_rows(&mut m);
    let condition = linalg::condition_1norm(&m);
    let lu = m.lu();

    let mut g = DMatrix::<Complex64>::zeros(2, 2);
    for (col, rhs_row) in [(0usize, 2usize), (1usize, 3usize)] {
        let mut rhs = DVector::<Complex64>::zeros(4);
        rhs[rhs_row] = Complex64::new(scales[rhs_row], 0.0);
        let a = lu.solve(&rhs).ok_or(Error::Singular {
            what: "Timoshenko boundary system",
            omega: s.im,
        })?;
        let w_l: Complex64 = (0..4).map(|i| a[i] * at_l[i]).sum();
        let phi_l: Complex64 = (0..4).map(|i| a[i] * phic[i] * at_l[i]).sum();
        g[(0, col)] = s * w_l;
        g[(1, col)] = s * phi_l;
    }
    Ok(PlantEval { g, condition })
}

/// [`FrequencyResponse`] wrapper; retries once at s (1 + 1e-9) when the
/// exponential basis degenerates at an unlucky sample.
#[derive(Debug, Clone)]
pub struct TimoshenkoPlant(pub TimoshenkoSpec);

impl FrequencyResponse for TimoshenkoPlant {
    fn dims(&self) -> (usize, usize) {
        (2, 2)
    }

    fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        match timo_tf(&self.0, s) {
            Ok(ev) => Ok(ev.g),
            Err(Error::DegenerateBasis { .. }) => Ok(timo_tf(&self.0, s * (1.0 + 1e-9))?.g),
            Err(e) => Err(e),
        }
    }
}

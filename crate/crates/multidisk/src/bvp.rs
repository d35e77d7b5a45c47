//! Independent finite-difference solver for the Laplace-domain two-point
//! boundary value problems, used as ground truth for the formal transfer
//! functions.
//!
//! Plain central differences are fine here: the known failure of naive FD
//! schemes on these beams concerns time-domain/eigenvalue approximation
//! (spurious unstable modes), not a fixed-s elliptic solve.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::EulerSpec;
use crate::linalg::band::BandMatrix;
use crate::timoshenko::TimoshenkoSpec;

/// Uniform mesh with `n` interior nodes; spacing h = L/(n+1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FDMesh {
    pub n: usize,
}

impl FDMesh {
    pub fn new(n: usize) -> Result<Self> {
        if n < 64 {
            return Err(Error::Config(format!("mesh needs n >= 64 interior nodes, got {n}")));
        }
        Ok(FDMesh { n })
    }

    pub fn h(&self, length: f64) -> f64 {
        length / (self.n + 1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TimoBvpSolution {
    pub y1: Complex64,
    pub y2: Complex64,
    /// Pivot-growth condition proxy of the banded factorization.
    pub condition: f64,
}

/// Second-order central-difference solve of the coupled Timoshenko pair at
/// a fixed complex s, with one-sided second-order boundary rows carrying
/// the tip actuation and the pre-stabilizer terms.
pub fn solve_timoshenko_bvp(
    spec: &TimoshenkoSpec,
    s: Complex64,
    u: (Complex64, Complex64),
    mesh: &FDMesh,
) -> Result<TimoBvpSolution> {
    if s.norm() == 0.0 {
        return Err(Error::Domain { what: "s = 0 excluded", s });
    }
    let nn = mesh.n + 1; // unknown nodes 1..=nn, x = nn*h = L
    let h = mesh.h(spec.length);
    let den_w = Complex64::new(spec.shear_k, 0.0) + spec.kv_w * s;
    let den_phi = Complex64::new(spec.ei(), 0.0) + spec.kv_phi * s;
    let mass_w = spec.rho * s * s + spec.d_w * s;
    let mass_phi = spec.rot_inertia * s * s + spec.d_phi * s;

    let wcol = |i: usize| 2 * (i - 1);
    let pcol = |i: usize| 2 * (i - 1) + 1;
    let size = 2 * nn;
    let mut band = BandMatrix::zeros(size, 4, 3);
    let mut rhs = vec![Complex64::default(); size];

    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 1.0 / (2.0 * h);
    for i in 1..nn {
        // den_w (w'' - phi') = mass_w * w
        let rw = wcol(i);
        band.add(rw, wcol(i), -2.0 * den_w * inv_h2 - mass_w);
        band.add(rw, wcol(i + 1), den_w * inv_h2);
        band.add(rw, pcol(i + 1), -den_w * inv_2h);
        if i > 1 {
            band.add(rw, wcol(i - 1), den_w * inv_h2);
            band.add(rw, pcol(i - 1), den_w * inv_2h);
        }
        // den_phi phi'' = mass_phi phi + den_w (phi - w')
        let rp = pcol(i);
        band.add(rp, pcol(i), -2.0 * den_phi * inv_h2 - mass_phi - den_w);
        band.add(rp, pcol(i + 1), den_phi * inv_h2);
        band.add(rp, wcol(i + 1), den_w * inv_2h);
        if i > 1 {
            band.add(rp, pcol(i - 1), den_phi * inv_h2);
            band.add(rp, wcol(i - 1), -den_w * inv_2h);
        }
    }
    // Tip rows: K w'(L) - K phi(L) + alpha s w(L) = u1,
    //           EI phi'(L) + beta s phi(L) = u2,
    // with one-sided second-order derivatives.
    let k = Complex64::new(spec.shear_k, 0.0);
    let ei = Complex64::new(spec.ei(), 0.0);
    let rw = wcol(nn);
    band.add(rw, wcol(nn), k * (3.0 * inv_2h) + spec.alpha * s);
    band.add(rw, wcol(nn - 1), k * (-4.0 * inv_2h));
    band.add(rw, wcol(nn - 2), k * inv_2h);
    band.add(rw, pcol(nn), -k);
    rhs[rw] = u.0;
    let rp = pcol(nn);
    band.add(rp, pcol(nn), ei * (3.0 * inv_2h) + spec.beta * s);
    band.add(rp, pcol(nn - 1), ei * (-4.0 * inv_2h));
    band.add(rp, pcol(nn - 2), ei * inv_2h);
    rhs[rp] = u.1;

    let lu = band.factor().map_err(|_| Error::Singular {
        what: "Timoshenko FD system (near an open-loop pole?)",
        omega: s.im,
    })?;
    lu.solve(&mut rhs);
    Ok(TimoBvpSolution {
        y1: s * rhs[wcol(nn)],
        y2: s * rhs[pcol(nn)],
        condition: lu.diagonal_ratio(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EbBvpSolution {
    pub y: Complex64,
    pub condition: f64,
}

fn gaussian_derivative(xi: f64, sigma: f64) -> f64 {
    let g = (-xi * xi / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    -xi / (sigma * sigma) * g
}

/// Central-difference solve of the Euler-Bernoulli equation at fixed s with
/// the dipole forcing mollified by a unit-mass Gaussian of width `sigma`.
///
/// Ghost nodes keep every stencil central, so the scheme is second order
/// throughout. Output slopes are interpolated to second order.
pub fn solve_eb_bvp(
    spec: &EulerSpec,
    s: Complex64,
    u: Complex64,
    mesh: &FDMesh,
    sigma: f64,
) -> Result<EbBvpSolution> {
    if s.norm() == 0.0 {
        return Err(Error::Domain { what: "s = 0 excluded", s });
    }
    let h = mesh.h(spec.length);
    if sigma < 2.0 * h {
        return Err(Error::Config(format!(
            "mollifier width {sigma} below resolvable 2h = {}",
            2.0 * h
        )));
    }
    let nn = mesh.n + 1; // real nodes 1..=nn (x = nn h = L); ghosts -1, nn+1, nn+2
    let stiff = Complex64::new(spec.bend_ei, 0.0) + spec.c_kv * s;
    let mass = spec.rho_a * s * s + spec.c_v * s;

    // z-layout: z[0] = w_{-1}, z[j] = w_j (1 <= j <= nn+2; nn+1, nn+2 ghosts).
    let size = nn + 3;
    let mut band = BandMatrix::zeros(size, 4, 2);
    let mut rhs = vec![Complex64::default(); size];

    // w'(0) = 0 via the central difference through the root ghost.
    let inv_2h = 1.0 / (2.0 * h);
    band.add(0, 1, Complex64::new(inv_2h, 0.0));
    band.add(0, 0, Complex64::new(-inv_2h, 0.0));

    let inv_h4 = 1.0 / (h * h * h * h);
    let stencil = [1.0, -4.0, 6.0, -4.0, 1.0];
    for i in 1..=nn {
        let row = i;
        for (off, coef) in (-2i64..=2).zip(stencil) {
            let node = i as i64 + off;
            if node == 0 {
                continue; // clamped root value
            }
            let colz = if node == -1 { 0usize } else { node as usize };
            band.add(row, colz, stiff * (coef * inv_h4));
        }
        band.add(row, i, mass);
        let x = i as f64 * h;
        let force = spec.k_a
            * (gaussian_derivative(x - spec.x2, sigma) - gaussian_derivative(x - spec.x1, sigma));
        rhs[row] = u * force;
    }
    // w''(L) = 0 and w'''(L) = 0 through the tip ghosts.
    let inv_h2 = 1.0 / (h * h);
    band.add(nn + 1, nn + 1, Complex64::new(inv_h2, 0.0));
    band.add(nn + 1, nn, Complex64::new(-2.0 * inv_h2, 0.0));
    band.add(nn + 1, nn - 1, Complex64::new(inv_h2, 0.0));
    let inv_2h3 = 1.0 / (2.0 * h * h * h);
    band.add(nn + 2, nn + 2, Complex64::new(inv_2h3, 0.0));
    band.add(nn + 2, nn + 1, Complex64::new(-2.0 * inv_2h3, 0.0));
    band.add(nn + 2, nn - 1, Complex64::new(2.0 * inv_2h3, 0.0));
    band.add(nn + 2, nn - 2, Complex64::new(-inv_2h3, 0.0));

    let lu = band.factor().map_err(|_| Error::Singular {
        what: "Euler-Bernoulli FD system (near an open-loop pole?)",
        omega: s.im,
    })?;
    lu.solve(&mut rhs);

    let value = |node: i64| -> Complex64 {
        if node == 0 {
            Complex64::default()
        } else if node == -1 {
            rhs[0]
        } else {
            rhs[node as usize]
        }
    };
    let slope_at_node = |j: i64| (value(j + 1) - value(j - 1)) * inv_2h;
    let slope = |x: f64| -> Complex64 {
        let j = (x / h).floor() as i64;
        let theta = x / h - j as f64;
        slope_at_node(j) * (1.0 - theta) + slope_at_node(j + 1) * theta
    };
    Ok(EbBvpSolution {
        y: spec.k_s * (slope(spec.x2) - slope(spec.x1)),
        condition: lu.diagonal_ratio(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn paper_prestab() -> TimoshenkoSpec {
        TimoshenkoSpec::paper().with_prestab(0.1, 0.1)
    }

    #[test]
    fn mesh_rejects_too_few_nodes() {
        assert!(FDMesh::new(32).is_err());
        assert!(FDMesh::new(64).is_ok());
    }

    #[test]
    fn homogeneous_timoshenko_problem_is_trivial() {
        let mesh = FDMesh::new(128).unwrap();
        let sol = solve_timoshenko_bvp(&paper_prestab(), c(0.0, 1.0), (c(0.0, 0.0), c(0.0, 0.0)), &mesh).unwrap();
        assert_eq!(sol.y1, c(0.0, 0.0));
        assert_eq!(sol.y2, c(0.0, 0.0));
    }

    #[test]
    fn homogeneous_eb_problem_is_trivial() {
        let mesh = FDMesh::new(128).unwrap();
        let spec = EulerSpec::normalized().with_damping(0.5, 0.0);
        let sol = solve_eb_bvp(&spec, c(0.0, 1.0), c(0.0, 0.0), &mesh, 4.0 * mesh.h(1.0)).unwrap();
        assert_eq!(sol.y, c(0.0, 0.0));
    }

    #[test]
    fn solutions_are_linear_in_u() {
        let mesh = FDMesh::new(128).unwrap();
        let s = c(0.0, 2.0);
        let u = (c(0.7, -0.3), c(0.1, 0.2));
        let a = solve_timoshenko_bvp(&paper_prestab(), s, u, &mesh).unwrap();
        let b = solve_timoshenko_bvp(&paper_prestab(), s, (2.0 * u.0, 2.0 * u.1), &mesh).unwrap();
        assert!((b.y1 - 2.0 * a.y1).norm() <= 1e-12 * a.y1.norm().max(1.0));
        assert!((b.y2 - 2.0 * a.y2).norm() <= 1e-12 * a.y2.norm().max(1.0));

        let spec = EulerSpec::normalized().with_damping(0.5079, 0.0);
        let sig = 4.0 * mesh.h(1.0);
        let ea = solve_eb_bvp(&spec, s, c(1.0, 0.5), &mesh, sig).unwrap();
        let eb = solve_eb_bvp(&spec, s, c(2.0, 1.0), &mesh, sig).unwrap();
        assert!((eb.y - 2.0 * ea.y).norm() <= 1e-12 * ea.y.norm().max(1.0));
    }

    #[test]
    fn conjugate_symmetry_of_solves() {
        let mesh = FDMesh::new(128).unwrap();
        let s = c(0.3, 1.7);
        let u = (c(1.0, 0.0), c(0.0, 1.0));
        let a = solve_timoshenko_bvp(&paper_prestab(), s, u, &mesh).unwrap();
        let b = solve_timoshenko_bvp(&paper_prestab(), s.conj(), (u.0.conj(), u.1.conj()), &mesh).unwrap();
        assert!((a.y1.conj() - b.y1).norm() <= 1e-12 * a.y1.norm().max(1.0));
        assert!((a.y2.conj() - b.y2).norm() <= 1e-12 * a.y2.norm().max(1.0));

        let spec = EulerSpec::normalized().with_damping(0.156, 1e-3);
        let sig = 4.0 * mesh.h(1.0);
        let ea = solve_eb_bvp(&spec, s, c(1.0, 0.0), &mesh, sig).unwrap();
        let eb = solve_eb_bvp(&spec, s.conj(), c(1.0, 0.0), &mesh, sig).unwrap();
        assert!((ea.y.conj() - eb.y).norm() <= 1e-12 * ea.y.norm().max(1.0));
    }

    #[test]
    fn timoshenko_richardson_order_two() {
        // |y(h) - y(h/2)| / |y(h/2) - y(h/4)| ~ 4 for a second-order scheme.
        let s = c(0.0, 1.0);
        let u = (c(1.0, 0.0), c(0.0, 0.0));
        let spec = paper_prestab();
        let y: Vec<Complex64> = [255usize, 511, 1023]
            .iter()
            .map(|&n| solve_timoshenko_bvp(&spec, s, u, &FDMesh::new(n).unwrap()).unwrap().y1)
            .collect();
        let ratio = (y[0] - y[1]).norm() / (y[1] - y[2]).norm();
        assert!((2.8..5.2).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn eb_richardson_order_two_at_fixed_sigma() {
        let s = c(0.0, 2.0);
        let spec = EulerSpec::normalized().with_damping(0.5079, 0.0);
        let sigma = 0.02; // fixed, resolvable on all three meshes
        let y: Vec<Complex64> = [255usize, 511, 1023]
            .iter()
            .map(|&n| {
                solve_eb_bvp(&spec, s, c(1.0, 0.0), &FDMesh::new(n).unwrap(), sigma)
                    .unwrap()
                    .y
            })
            .collect();
        let ratio = (y[0] - y[1]).norm() / (y[1] - y[2]).norm();
        assert!((2.8..5.2).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn unresolvable_mollifier_is_config_error() {
        let mesh = FDMesh::new(128).unwrap();
        let spec = EulerSpec::normalized().with_damping(0.5, 0.0);
        let err = solve_eb_bvp(&spec, c(0.0, 1.0), c(1.0, 0.0), &mesh, 0.5 * mesh.h(1.0));
        assert!(matches!(err, Err(Error::Config(_))));
    }
}

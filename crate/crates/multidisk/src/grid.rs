//! Multi-band frequency grids and the first-order sampling certificate.
//!
//! Synthesis works on sampled data, so the only way to trust a Nyquist
//! winding number is to prove that the locus cannot wander around the
//! origin between samples. The certificate used here bounds the phase-plane
//! travel on each interval by `L * (w2 - w1) <= |f(w1)| + |f(w2)|`, where
//! `L` bounds `|f'|` on the interval.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// One construction band: `count` nodes on [lo, hi], endpoints included.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Band {
    pub fn new(lo: f64, hi: f64, count: usize, spacing: Spacing) -> Self {
        Band { lo, hi, count, spacing }
    }

    fn nodes(&self) -> Vec<f64> {
        let c = self.count;
        let mut out = Vec::with_capacity(c);
        for k in 0..c {
            let t = k as f64 / (c - 1) as f64;
            let w = match self.spacing {
                Spacing::Linear => self.lo + (self.hi - self.lo) * t,
                Spacing::Log => (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * t).exp(),
            };
            out.push(w);
        }
        // Pin the endpoints exactly so shared band edges deduplicate.
        out[0] = self.lo;
        out[c - 1] = self.hi;
        out
    }
}

/// Which closed-loop map the grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRole {
    /// Weighted-sensitivity objective samples.
    Tracking,
    /// Roll-off objective samples.
    Rolloff,
    /// Disk-margin constraint; the Nyquist grid is always this one.
    DiskNyquist,
}

/// Sorted, deduplicated union of the band nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub bands: Vec<Band>,
    pub nodes: Vec<f64>,
    pub role: GridRole,
}

/// Build a grid from non-overlapping bands. Shared endpoints merge.
pub fn build_grid(bands: &[Band], role: GridRole) -> Result<FrequencyGrid> {
    if bands.is_empty() {
        return Err(Error::Config("grid needs at least one band".into()));
    }
    let mut sorted = bands.to_vec();
    sorted.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    for b in &sorted {
        if !(b.lo > 0.0) {
            return Err(Error::Config(format!("band lower edge {} must be > 0", b.lo)));
        }
        if !(b.hi > b.lo) {
            return Err(Error::Config(format!("band [{}, {}] is empty", b.lo, b.hi)));
        }
        if b.count < 2 {
            return Err(Error::Config("band needs count >= 2".into()));
        }
    }
    for w in sorted.windows(2) {
        if w[1].lo < w[0].hi {
            return Err(Error::Config(format!(
                "bands [{} ,{}] and [{}, {}] overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    let mut nodes: Vec<f64> = sorted.iter().flat_map(|b| b.nodes()).collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    Ok(FrequencyGrid {
        bands: sorted,
        nodes,
        role,
    })
}

impl FrequencyGrid {
    /// Indices of nodes inside [lo, hi].
    pub fn band_indices(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, &w)| w >= lo && w <= hi)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundProvenance {
    NumericEstimate,
    UserSupplied,
}

/// Bound `L[w-, w+] >= sup |f'(w)|` on one grid interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FirstOrderBound {
    pub value: f64,
    pub provenance: BoundProvenance,
}

/// Outcome of a sampling certificate check.
#[derive(Debug, Clone)]
pub struct Certification {
    pub ok: bool,
    /// Indices nu of failing intervals [w_nu, w_nu+1].
    pub violations: Vec<usize>,
}

/// Check `L * dw <= |f(w_nu)| + |f(w_nu+1)|` on every consecutive pair.
pub fn certify_sampling(
    nodes: &[f64],
    f: &[Complex64],
    bounds: &[FirstOrderBound],
) -> Certification {
    assert_eq!(nodes.len(), f.len(), "f must be sampled on every node");
    assert_eq!(bounds.len(), nodes.len().saturating_sub(1), "one bound per interval");
    let mut violations = Vec::new();
    for nu in 0..bounds.len() {
        let dw = nodes[nu + 1] - nodes[nu];
        if bounds[nu].value * dw > f[nu].norm() + f[nu + 1].norm() {
            violations.push(nu);
        }
    }
    Certification {
        ok: violations.is_empty(),
        violations,
    }
}

/// Safety factor applied to numeric derivative estimates.
pub const BOUND_SAFETY: f64 = 1.5;

/// Numeric first-order bounds from the samples alone: divided differences
/// of the neighbouring intervals, times the safety factor.
pub fn estimate_bounds_from_samples(nodes: &[f64], f: &[Complex64]) -> Vec<FirstOrderBound> {
    let n = nodes.len();
    let dd: Vec<f64> = (0..n - 1)
        .map(|k| (f[k + 1] - f[k]).norm() / (nodes[k + 1] - nodes[k]))
        .collect();
    (0..n - 1)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 2);
            let m = (lo..=hi).map(|i| dd[i]).fold(0.0, f64::max);
            FirstOrderBound {
                value: BOUND_SAFETY * m.max(f64::MIN_POSITIVE),
                provenance: BoundProvenance::NumericEstimate,
            }
        })
        .collect()
}

/// Numeric first-order bound for one interval from a x3 oversampled probe.
pub fn probe_bound(
    f: &mut dyn FnMut(f64) -> Result<Complex64>,
    lo: f64,
    hi: f64,
) -> Result<FirstOrderBound> {
    let mut pts = [Complex64::default(); 4];
    for (k, p) in pts.iter_mut().enumerate() {
        let w = lo + (hi - lo) * k as f64 / 3.0;
        *p = f(w)?;
    }
    let h = (hi - lo) / 3.0;
    let m = (0..3)
        .map(|k| (pts[k + 1] - pts[k]).norm() / h)
        .fold(0.0, f64::max);
    Ok(FirstOrderBound {
        value: BOUND_SAFETY * m.max(f64::MIN_POSITIVE),
        provenance: BoundProvenance::NumericEstimate,
    })
}

/// Intervals worth certifying: those whose endpoints come within 10x of the
/// locus' globally closest approach to the origin. Away from the origin the
/// winding number cannot change between samples that the phase guard accepts.
pub fn certification_scope(f: &[Complex64]) -> Vec<bool> {
    let global_min = f.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    (0..f.len().saturating_sub(1))
        .map(|k| f[k].norm().min(f[k + 1].norm()) < 10.0 * global_min)
        .collect()
}

/// Result of certificate-driven refinement.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub grid: FrequencyGrid,
    /// f sampled on the refined nodes.
    pub samples: Vec<Complex64>,
    pub certified: bool,
    pub bisections: usize,
}

/// Bisect violating intervals until the certificate passes or the node
/// budget is exhausted (`certified = false` in that case; not fatal).
pub fn refine_until_certified(
    f: &mut dyn FnMut(f64) -> Result<Complex64>,
    grid: &FrequencyGrid,
    max_nodes: usize,
) -> Result<RefineOutcome> {
    if max_nodes < grid.nodes.len() {
        return Err(Error::Config(format!(
            "max_nodes {} below current node count {}",
            max_nodes,
            grid.nodes.len()
        )));
    }
    let mut nodes = grid.nodes.clone();
    let mut samples: Vec<Complex64> = Vec::with_capacity(nodes.len());
    for &w in &nodes {
        samples.push(f(w)?);
    }
    let mut bisections = 0usize;
    loop {
        let scope = certification_scope(&samples);
        let mut bounds = Vec::with_capacity(nodes.len() - 1);
        for k in 0..nodes.len() - 1 {
            if scope[k] {
                bounds.push(probe_bound(f, nodes[k], nodes[k + 1])?);
            } else {
                // Out of scope: a zero-cost pass (coarse grid stands there).
                bounds.push(FirstOrderBound {
                    value: f64::MIN_POSITIVE,
                    provenance: BoundProvenance::NumericEstimate,
                });
            }
        }
        let cert = certify_sampling(&nodes, &samples, &bounds);
        if cert.ok {
            return Ok(RefineOutcome {
                grid: FrequencyGrid {
                    bands: grid.bands.clone(),
                    nodes,
                    role: grid.role,
                },
                samples,
                certified: true,
                bisections,
            });
        }
        if nodes.len() + cert.violations.len() > max_nodes {
            return Ok(RefineOutcome {
                grid: FrequencyGrid {
                    bands: grid.bands.clone(),
                    nodes,
                    role: grid.role,
                },
                samples,
                certified: false,
                bisections,
            });
        }
        // Insert midpoints of all violating intervals, back to front so the
        // stored indices stay valid.
        for &nu in cert.violations.iter().rev() {
            let mid = 0.5 * (nodes[nu] + nodes[nu + 1]);
            nodes.insert(nu + 1, mid);
            samples.insert(nu + 1, f(mid)?);
            bisections += 1;
        }
    }
}

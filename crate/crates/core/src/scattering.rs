//! Cluster-based angular power spectra (von Mises-Fisher mixtures) and their
//! projection onto a wavenumber lattice.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::WavenumberGrid;
use crate::{Error, Result};

/// Default midpoint sub-grid per lattice cell (M x M nodes).
pub const DEFAULT_CELL_NODES: usize = 8;

/// Energy fraction defining the significant entries (two-sigma rule).
pub const SIGNIFICANT_ENERGY: f64 = 0.9544;

/// Nodes with `k_z < KZ_FLOOR * k` are dropped from the cell quadrature.
const KZ_FLOOR: f64 = 1e-3;

/// Above this concentration the density is evaluated in the log domain.
const LOG_DOMAIN_ALPHA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Transmit,
    Receive,
}

/// One von Mises-Fisher lobe. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub weight: f64,
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
}

impl Cluster {
    pub fn new(weight: f64, theta: f64, phi: f64, alpha: f64) -> Result<Self> {
        if !(weight > 0.0 && weight <= 1.0 + 1e-12) {
            return Err(Error::invalid(format!("cluster weight {weight} not in (0, 1]")));
        }
        if !(0.0..=PI / 2.0 + 1e-12).contains(&theta) {
            return Err(Error::invalid(format!("zenith {theta} rad not in [0, pi/2]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::invalid(format!("azimuth {phi} rad not in [0, 2pi)")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("concentration must be positive, got {alpha}")));
        }
        Ok(Self {
            weight,
            theta,
            phi,
            alpha,
        })
    }

    /// Unit vector of the mean direction.
    pub fn mean_direction(&self) -> [f64; 3] {
        [
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        ]
    }

    /// Density at the unit vector `u`.
    pub fn density_at(&self, u: [f64; 3]) -> f64 {
        let mu = self.mean_direction();
        let cos_angle = u[0] * mu[0] + u[1] * mu[1] + u[2] * mu[2];
        vmf_density(self.alpha, cos_angle)
    }
}

fn vmf_density(alpha: f64, cos_angle: f64) -> f64 {
    if alpha > LOG_DOMAIN_ALPHA {
        // sinh(a) = e^a / 2 up to a relative e^{-2a}
        (alpha.ln() - (4.0 * PI).ln() - alpha + 2f64.ln() + alpha * cos_angle).exp()
    } else {
        let ratio = if alpha < 1e-8 { 1.0 } else { alpha / alpha.sinh() };
        ratio / (4.0 * PI) * (alpha * cos_angle).exp()
    }
}

/// 3-D von Mises-Fisher density at zenith `theta`, azimuth `phi` (sr⁻¹).
pub fn vmf_pdf(theta: f64, phi: f64, cluster: &Cluster) -> f64 {
    let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    cluster.density_at(u)
}

/// `212.9² / AS²`, valid for spreads below 21 degrees.
pub fn concentration_from_as(angular_spread_deg: f64) -> Result<f64> {
    if !(angular_spread_deg > 0.0 && angular_spread_deg < 21.0) {
        return Err(Error::OutOfValidity(angular_spread_deg));
    }
    Ok(212.9 * 212.9 / (angular_spread_deg * angular_spread_deg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringProfile {
    clusters: Vec<Cluster>,
    side: Side,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterRecord {
    w: f64,
    theta_deg: f64,
    phi_deg: f64,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRecord {
    clusters: Vec<ClusterRecord>,
}

impl ScatteringProfile {
    pub fn new(clusters: Vec<Cluster>, side: Side) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::invalid("scattering profile needs at least one cluster"));
        }
        let total: f64 = clusters.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("cluster weights sum to {total}, expected 1")));
        }
        Ok(Self { clusters, side })
    }

    /// `n_c` equally weighted clusters with zenith uniform in `theta_range`
    /// and azimuth uniform in `phi_range` (radians).
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        n_c: usize,
        alpha: f64,
        theta_range: (f64, f64),
        phi_range: (f64, f64),
        side: Side,
    ) -> Result<Self> {
        if n_c == 0 {
            return Err(Error::invalid("cluster count must be at least 1"));
        }
        let w = 1.0 / n_c as f64;
        let clusters = (0..n_c)
            .map(|_| {
                let theta = theta_range.0 + (theta_range.1 - theta_range.0) * rng.random::<f64>();
                let phi = phi_range.0 + (phi_range.1 - phi_range.0) * rng.random::<f64>();
                Cluster::new(w, theta, phi.rem_euclid(2.0 * PI), alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(clusters, side)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn density_at(&self, u: [f64; 3]) -> f64 {
        self.clusters.iter().map(|c| c.weight * c.density_at(u)).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = ProfileRecord {
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterRecord {
                    w: c.weight,
                    theta_deg: c.theta.to_degrees(),
                    phi_deg: c.phi.to_degrees(),
                    alpha: c.alpha,
                })
                .collect(),
        };
        serde_json::to_value(rec).expect("profile record serializes")
    }

    pub fn from_json(value: &serde_json::Value, side: Side) -> Result<Self> {
        let rec: ProfileRecord = serde_json::from_value(value.clone())?;
        let clusters = rec
            .clusters
            .iter()
            .map(|c| Cluster::new(c.w, c.theta_deg.to_radians(), c.phi_deg.to_radians(), c.alpha))
            .collect::<Result<Vec<_>>>()?;
        Self::new(clusters, side)
    }
}

/// Mixture density `Σ w_i p_i(θ, φ)`.
pub fn spectral_factor(theta: f64, phi: f64, profile: &ScatteringProfile) -> f64 {
    profile.clusters.iter().map(|c| c.weight * vmf_pdf(theta, phi, c)).sum()
}

/// Normalized per-cell variances on a wavenumber lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceVector {
    values: Vec<f64>,
    grid: WavenumberGrid,
}

impl VarianceVector {
    /// Wraps externally computed variances; they are normalized to unit sum.
    pub fn from_values(values: Vec<f64>, grid: WavenumberGrid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dims(format!(
                "{} variances for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("variances must be finite and nonnegative"));
        }
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateProfile);
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / total).collect(),
            grid,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &WavenumberGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn std_devs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

fn cell_power(profile: &ScatteringProfile, center: (f64, f64), size: (f64, f64), k: f64, m: usize) -> f64 {
    let k_sq = k * k;
    let weight = size.0 * size.1 / (m * m) as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let kx = center.0 + size.0 * ((i as f64 + 0.5) / m as f64 - 0.5);
        for j in 0..m {
            let ky = center.1 + size.1 * ((j as f64 + 0.5) / m as f64 - 0.5);
            let t = kx * kx + ky * ky;
            if t > k_sq {
                continue;
            }
            let kz = (k_sq - t).sqrt();
            if kz < KZ_FLOOR * k {
                continue;
            }
            let u = [kx / k, ky / k, kz / k];
            acc += profile.density_at(u) / (k * kz);
        }
    }
    acc * weight
}

/// Integrates the spectral factor over each lattice cell with the
/// hemisphere measure `dΩ = dk_x dk_y / (k k_z)` on an `nodes x nodes`
/// midpoint sub-grid, then normalizes to unit sum.
pub fn variance_vector_with_nodes(
    profile: &ScatteringProfile,
    grid: &WavenumberGrid,
    k: f64,
    nodes: usize,
) -> Result<VarianceVector> {
    if grid.is_empty() {
        return Err(Error::invalid("empty wavenumber grid"));
    }
    if nodes == 0 || !(k > 0.0) {
        return Err(Error::invalid("quadrature nodes and k must be positive"));
    }
    let size = grid.cell_size();
    let raw: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|c| cell_power(profile, grid.transverse_wavenumber(c), size, k, nodes))
        .collect();
    VarianceVector::from_values(raw, grid.clone())
}

pub fn variance_vector(profile: &ScatteringProfile, grid: &WavenumberGrid, k: f64) -> Result<VarianceVector> {
    variance_vector_with_nodes(profile, grid, k, DEFAULT_CELL_NODES)
}

/// Minimum number of largest entries holding `energy_fraction` of the total.
pub fn significant_count(values: &[f64], energy_fraction: f64) -> Result<usize> {
    if !(energy_fraction > 0.0 && energy_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "energy fraction {energy_fraction} not in (0, 1]"
        )));
    }
    if values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("values must be nonnegative"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("all-zero input has no significant entries"));
    }
    let target = energy_fraction * total;
    let mut acc = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        if acc >= target {
            return Ok(i + 1);
        }
    }
    Ok(sorted.len())
}

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{enumerate_wavenumber_set, SystemConfig, WavenumberGrid};
use crate::rng::{stream_rng, Stream};
use crate::scattering::{variance_vector_with_nodes, Cluster, ScatteringProfile, Side, VarianceVector};
use crate::{Error, Result};

/// Configuration of a single wavenumber-domain variance map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    /// Always `"variance-map"`; distinguishes map configs from experiments.
    pub kind: String,
    pub name: String,
    pub carrier_frequency_hz: f64,
    pub aperture_wl: [f64; 2],
    pub clusters: usize,
    pub alpha: f64,
    /// Cluster weights; equal weights when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub phi_min_deg: f64,
    pub phi_max_deg: f64,
    pub side: Side,
    pub master_seed: u64,
    pub quadrature_nodes: usize,
}

pub const MAP_KIND: &str = "variance-map";

impl MapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kind != MAP_KIND {
            return Err(Error::config("kind", format!("expected \"{MAP_KIND}\"")));
        }
        if !(self.carrier_frequency_hz > 0.0) {
            return Err(Error::config("carrier_frequency_hz", "must be positive"));
        }
        if !(self.aperture_wl[0] > 0.0 && self.aperture_wl[1] > 0.0) {
            return Err(Error::config("aperture_wl", "must be positive"));
        }
        if self.clusters == 0 {
            return Err(Error::config("clusters", "must be at least 1"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::config("alpha", "must be positive"));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.clusters {
                return Err(Error::config("weights", "one weight per cluster is required"));
            }
            if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 || w.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::config("weights", "weights must be positive and sum to 1"));
            }
        }
        if !(0.0 <= self.theta_min_deg && self.theta_min_deg <= self.theta_max_deg && self.theta_max_deg <= 90.0) {
            return Err(Error::config("theta_max_deg", "zenith range must lie within [0, 90]"));
        }
        if !(0.0 <= self.phi_min_deg && self.phi_min_deg <= self.phi_max_deg && self.phi_max_deg <= 360.0) {
            return Err(Error::config("phi_max_deg", "azimuth range must lie within [0, 360]"));
        }
        if self.quadrature_nodes == 0 {
            return Err(Error::config("quadrature_nodes", "must be at least 1"));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: MapConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_owned)
                .unwrap_or_else(|| "<document>".into());
            Error::config(key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("map config serializes") + "\n"
    }

    /// Draws the cluster directions and returns profile, grid and wavenumber.
    pub fn realize(&self) -> Result<(ScatteringProfile, WavenumberGrid, f64)> {
        self.validate()?;
        let system = SystemConfig::new(self.carrier_frequency_hz)?;
        let lambda = system.wavelength();
        let grid = enumerate_wavenumber_set(self.aperture_wl[0] * lambda, self.aperture_wl[1] * lambda, lambda)?;
        let mut rng = stream_rng(self.master_seed, 0, Stream::Clusters);
        let weights = self
            .weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.clusters as f64; self.clusters]);
        let (t0, t1) = (self.theta_min_deg.to_radians(), self.theta_max_deg.to_radians());
        let (p0, p1) = (self.phi_min_deg.to_radians(), self.phi_max_deg.to_radians());
        let clusters = weights
            .iter()
            .map(|&w| {
                let theta = t0 + (t1 - t0) * rand::Rng::random::<f64>(&mut rng);
                let phi = (p0 + (p1 - p0) * rand::Rng::random::<f64>(&mut rng)).rem_euclid(2.0 * PI);
                Cluster::new(w, theta, phi, self.alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        let profile = ScatteringProfile::new(clusters, self.side)?;
        Ok((profile, grid, system.wavenumber()))
    }

    pub fn run(&self) -> Result<String> {
        let (profile, grid, k) = self.realize()?;
        let v = variance_vector_with_nodes(&profile, &grid, k, self.quadrature_nodes)?;
        Ok(variance_map_csv(&v))
    }
}

/// `l_x,l_y,sigma2` rows for a variance vector, in grid order.
pub fn variance_map_csv(v: &VarianceVector) -> String {
    let mut out = String::from("l_x,l_y,sigma2\n");
    for (&(lx, ly), s) in v.grid().indices().iter().zip(v.values()) {
        writeln!(out, "{lx},{ly},{s:e}").expect("write to string");
    }
    out
}

pub fn variance_map_export(profile: &ScatteringProfile, grid: &WavenumberGrid, k: f64) -> Result<String> {
    let v = crate::scattering::variance_vector(profile, grid, k)?;
    Ok(variance_map_csv(&v))
}

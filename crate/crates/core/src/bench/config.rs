use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "LS")]
    Ls,
    #[serde(rename = "WD-OMP")]
    WdOmp,
    #[serde(rename = "AD-OMP")]
    AdOmp,
    #[serde(rename = "WD-CoSaMP")]
    WdCosamp,
    #[serde(rename = "AD-CoSaMP")]
    AdCosamp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Ls,
        EstimatorKind::WdOmp,
        EstimatorKind::AdOmp,
        EstimatorKind::WdCosamp,
        EstimatorKind::AdCosamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Ls => "LS",
            EstimatorKind::WdOmp => "WD-OMP",
            EstimatorKind::AdOmp => "AD-OMP",
            EstimatorKind::WdCosamp => "WD-CoSaMP",
            EstimatorKind::AdCosamp => "AD-CoSaMP",
        }
    }

    pub fn uses_angular_basis(self) -> bool {
        matches!(self, EstimatorKind::AdOmp | EstimatorKind::AdCosamp)
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SnrDb,
    PilotLength,
    SpacingWl,
}

fn default_frequency() -> f64 {
    30e9
}
fn default_theta_max() -> f64 {
    90.0
}
fn default_phi_max() -> f64 {
    360.0
}
fn default_cosamp_iter() -> usize {
    20
}
fn default_energy() -> f64 {
    crate::scattering::SIGNIFICANT_ENERGY
}
fn default_nodes() -> usize {
    crate::scattering::DEFAULT_CELL_NODES
}

/// One NMSE experiment. Lengths are in wavelengths and angles in degrees.
///
/// For `snr_db` and `pilot_length` sweeps the element counts are given
/// directly and the aperture is `N * spacing`. For a `spacing_wl` sweep the
/// apertures are given instead and each count is the odd integer nearest
/// `aperture / spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_frequency")]
    pub carrier_frequency_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_ny: Option<usize>,
    pub spacing_wl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_aperture_wl: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_aperture_wl: Option<[f64; 2]>,
    pub n_rf: usize,
    pub pilot_length: usize,
    pub snr_db: f64,
    pub clusters: usize,
    pub alpha_rx: f64,
    pub alpha_tx: f64,
    #[serde(default)]
    pub theta_min_deg: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max_deg: f64,
    #[serde(default)]
    pub phi_min_deg: f64,
    #[serde(default = "default_phi_max")]
    pub phi_max_deg: f64,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    pub trials: usize,
    pub master_seed: u64,
    /// OMP iterations; defaults to the product of per-side significant counts.
    #[serde(default)]
    pub u_iter: Option<usize>,
    /// CoSaMP sparsity; defaults to the OMP iteration count.
    #[serde(default)]
    pub cosamp_k: Option<usize>,
    #[serde(default = "default_cosamp_iter")]
    pub cosamp_max_iter: usize,
    #[serde(default = "default_energy")]
    pub energy_fraction: f64,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    /// Full-size runs refuse to start without `--long`.
    #[serde(default)]
    pub long_run: bool,
}

/// Odd integer nearest `x`, ties rounded up, at least 1.
pub fn nearest_odd(x: f64) -> usize {
    let k = ((x - 1.0) / 2.0).round().max(0.0);
    2 * k as usize + 1
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {v}")))
    }
}

fn odd(key: &str, v: Option<usize>) -> Result<usize> {
    match v {
        Some(n) if n % 2 == 1 => Ok(n),
        Some(n) => Err(Error::config(key, format!("element count must be odd, got {n}"))),
        None => Err(Error::config(key, "required unless sweeping spacing_wl")),
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
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
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("spacing_wl", self.spacing_wl)?;
        if self.n_rf == 0 {
            return Err(Error::config("n_rf", "must be at least 1"));
        }
        if self.pilot_length == 0 {
            return Err(Error::config("pilot_length", "must be at least 1"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_db", "must be finite"));
        }
        if self.clusters == 0 {
            return Err(Error::config("clusters", "must be at least 1"));
        }
        positive("alpha_rx", self.alpha_rx)?;
        positive("alpha_tx", self.alpha_tx)?;
        if !(0.0 <= self.theta_min_deg && self.theta_min_deg <= self.theta_max_deg && self.theta_max_deg <= 90.0) {
            return Err(Error::config("theta_max_deg", "zenith range must lie within [0, 90]"));
        }
        if !(0.0 <= self.phi_min_deg && self.phi_min_deg <= self.phi_max_deg && self.phi_max_deg <= 360.0) {
            return Err(Error::config("phi_max_deg", "azimuth range must lie within [0, 360]"));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::config("sweep_values", "must not be empty"));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("estimators", "at least one estimator is required"));
        }
        for (i, a) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(a) {
                return Err(Error::config("estimators", format!("{a} listed twice")));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.u_iter == Some(0) {
            return Err(Error::config("u_iter", "must be at least 1"));
        }
        if self.cosamp_k == Some(0) {
            return Err(Error::config("cosamp_k", "must be at least 1"));
        }
        if self.cosamp_max_iter == 0 {
            return Err(Error::config("cosamp_max_iter", "must be at least 1"));
        }
        if !(self.energy_fraction > 0.0 && self.energy_fraction <= 1.0) {
            return Err(Error::config("energy_fraction", "must be in (0, 1]"));
        }
        if self.quadrature_nodes == 0 {
            return Err(Error::config("quadrature_nodes", "must be at least 1"));
        }
        match self.sweep_variable {
            SweepVariable::SpacingWl => {
                for (key, ap) in [
                    ("rx_aperture_wl", self.rx_aperture_wl),
                    ("tx_aperture_wl", self.tx_aperture_wl),
                ] {
                    let ap = ap.ok_or_else(|| Error::config(key, "required when sweeping spacing_wl"))?;
                    positive(key, ap[0])?;
                    positive(key, ap[1])?;
                }
                for v in &self.sweep_values {
                    positive("sweep_values", *v)?;
                }
            }
            SweepVariable::SnrDb | SweepVariable::PilotLength => {
                odd("rx_nx", self.rx_nx)?;
                odd("rx_ny", self.rx_ny)?;
                odd("tx_nx", self.tx_nx)?;
                odd("tx_ny", self.tx_ny)?;
                if self.sweep_variable == SweepVariable::PilotLength {
                    for v in &self.sweep_values {
                        if !(*v >= 1.0 && v.fract() == 0.0) {
                            return Err(Error::config(
                                "sweep_values",
                                format!("pilot length {v} is not a positive integer"),
                            ));
                        }
                    }
                } else if self.sweep_values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("sweep_values", "SNR values must be finite"));
                }
            }
        }
        Ok(())
    }
}

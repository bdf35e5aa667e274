use super::config::{EstimatorKind, ExperimentConfig, SweepVariable};
use super::map::{MapConfig, MAP_KIND};
use crate::scattering::{Side, DEFAULT_CELL_NODES, SIGNIFICANT_ENERGY};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_617;

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Experiment(ExperimentConfig),
    Map(MapConfig),
}

impl Preset {
    pub fn to_json_pretty(&self) -> String {
        match self {
            Preset::Experiment(c) => c.to_json_pretty(),
            Preset::Map(m) => m.to_json_pretty(),
        }
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "fig2a-desk",
        "fig2b-desk",
        "fig2c-desk",
        "fig2a-paper",
        "fig2b-paper",
        "fig2c-paper",
        "fig1-map",
    ]
}

fn base(name: &str, rx: usize, n_rf: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_owned(),
        carrier_frequency_hz: 30e9,
        rx_nx: Some(rx),
        rx_ny: Some(rx),
        tx_nx: Some(5),
        tx_ny: Some(5),
        spacing_wl: 0.25,
        rx_aperture_wl: None,
        tx_aperture_wl: None,
        n_rf,
        pilot_length: 32,
        snr_db: 10.0,
        clusters: 2,
        alpha_rx: 140.0,
        alpha_tx: 140.0,
        theta_min_deg: 0.0,
        theta_max_deg: 90.0,
        phi_min_deg: 0.0,
        phi_max_deg: 360.0,
        sweep_variable: SweepVariable::SnrDb,
        sweep_values: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        estimators: EstimatorKind::ALL.to_vec(),
        trials: 200,
        master_seed: DEFAULT_SEED,
        u_iter: None,
        cosamp_k: None,
        cosamp_max_iter: 20,
        energy_fraction: SIGNIFICANT_ENERGY,
        quadrature_nodes: DEFAULT_CELL_NODES,
        long_run: false,
    }
}

fn spacing_sweep(mut c: ExperimentConfig, rx_aperture: f64, spacings: Vec<f64>) -> ExperimentConfig {
    c.sweep_variable = SweepVariable::SpacingWl;
    c.sweep_values = spacings;
    c.rx_nx = None;
    c.rx_ny = None;
    c.tx_nx = None;
    c.tx_ny = None;
    c.rx_aperture_wl = Some([rx_aperture, rx_aperture]);
    c.tx_aperture_wl = Some([1.0, 1.0]);
    c
}

pub fn preset(name: &str) -> Result<Preset> {
    let exp = match name {
        "fig2a-desk" => base(name, 17, 16),
        "fig2b-desk" => {
            let mut c = base(name, 17, 16);
            c.sweep_variable = SweepVariable::PilotLength;
            c.sweep_values = vec![8.0, 16.0, 32.0, 48.0, 64.0];
            c
        }
        "fig2c-desk" => spacing_sweep(base(name, 17, 16), 4.0, vec![0.5, 0.25, 0.125]),
        "fig2a-paper" => {
            let mut c = base(name, 65, 64);
            c.long_run = true;
            c
        }
        "fig2b-paper" => {
            let mut c = base(name, 65, 64);
            c.sweep_variable = SweepVariable::PilotLength;
            c.sweep_values = (1..=12).map(|i| 5.0 * i as f64).collect();
            c.long_run = true;
            c
        }
        "fig2c-paper" => {
            let mut c = spacing_sweep(base(name, 65, 64), 16.0, vec![0.5, 1.0 / 3.0, 0.25]);
            c.long_run = true;
            c
        }
        "fig1-map" => {
            return Ok(Preset::Map(MapConfig {
                kind: MAP_KIND.to_owned(),
                name: name.to_owned(),
                carrier_frequency_hz: 30e9,
                aperture_wl: [32.25, 32.25],
                clusters: 4,
                alpha: 140.0,
                weights: None,
                theta_min_deg: 0.0,
                theta_max_deg: 90.0,
                phi_min_deg: 0.0,
                phi_max_deg: 360.0,
                side: Side::Receive,
                master_seed: DEFAULT_SEED,
                quadrature_nodes: DEFAULT_CELL_NODES,
            }))
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown preset `{other}`; available: {}",
                preset_names().join(", ")
            )))
        }
    };
    Ok(Preset::Experiment(exp))
}

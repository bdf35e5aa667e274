use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{nearest_odd, EstimatorKind, ExperimentConfig, SweepVariable};
use crate::channel::{sample_wavenumber_channel, synthesize_spatial, ChannelInstance};
use crate::estimators::{basis_cosamp, basis_omp, ls_estimate, to_db, NmseAccumulator};
use crate::geometry::{
    build_ad_basis, build_wd_basis, grid_for, SparsifyingBasis, SystemConfig, UpaGeometry, WavenumberGrid,
};
use crate::linalg::{frobenius_sq, CMat};
use crate::measurement::{gen_combiner, gen_pilots, noise_variance_for_snr, observe};
use crate::rng::{stream_rng, Stream};
use crate::scattering::{significant_count, variance_vector_with_nodes, ScatteringProfile, Side, VarianceVector};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "sweep,estimator,nmse,nmse_db,trials,seconds";

/// Everything fixed at one sweep value, shared by all its trials.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub snr_db: f64,
    pub pilot_length: usize,
    pub rx: UpaGeometry,
    pub tx: UpaGeometry,
    pub rx_grid: WavenumberGrid,
    pub tx_grid: WavenumberGrid,
    pub psi_r: Arc<SparsifyingBasis>,
    pub psi_s: Arc<SparsifyingBasis>,
    pub ad_r: Option<Arc<SparsifyingBasis>>,
    pub ad_s: Option<Arc<SparsifyingBasis>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutcome {
    pub estimator: EstimatorKind,
    pub num: f64,
    pub den: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub sweep_index: usize,
    pub trial_index: usize,
    pub u_iter: usize,
    pub estimates: Vec<EstimatorOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep: f64,
    pub estimator: EstimatorKind,
    pub nmse: f64,
    pub nmse_db: f64,
    pub trials: usize,
    pub num: f64,
    pub den: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub trials: Vec<TrialOutcome>,
    /// `(sweep index, trial index, reason)` of every excluded trial.
    pub failures: Vec<(usize, usize, String)>,
}

pub struct Experiment {
    config: ExperimentConfig,
    system: SystemConfig,
    points: Vec<SweepPoint>,
}

/// Sweep-dependent settings of one point: (snr_db, pilot length, rx, tx).
type PointSetup = (f64, usize, UpaGeometry, UpaGeometry);

fn point_setup(config: &ExperimentConfig, value: f64, lambda: f64) -> Result<PointSetup> {
    let mut spacing = config.spacing_wl;
    let mut snr_db = config.snr_db;
    let mut pilot_length = config.pilot_length;
    let counts = |nx: Option<usize>, ny: Option<usize>| (nx.unwrap_or(1), ny.unwrap_or(1));
    let mut rx_n = counts(config.rx_nx, config.rx_ny);
    let mut tx_n = counts(config.tx_nx, config.tx_ny);
    match config.sweep_variable {
        SweepVariable::SnrDb => snr_db = value,
        SweepVariable::PilotLength => pilot_length = value as usize,
        SweepVariable::SpacingWl => {
            spacing = value;
            let ra = config.rx_aperture_wl.expect("validated");
            let ta = config.tx_aperture_wl.expect("validated");
            rx_n = (nearest_odd(ra[0] / value), nearest_odd(ra[1] / value));
            tx_n = (nearest_odd(ta[0] / value), nearest_odd(ta[1] / value));
            log::info!(
                "spacing {value} wl: rx {}x{} (L = {:.4}x{:.4} wl), tx {}x{} (L = {:.4}x{:.4} wl)",
                rx_n.0,
                rx_n.1,
                rx_n.0 as f64 * value,
                rx_n.1 as f64 * value,
                tx_n.0,
                tx_n.1,
                tx_n.0 as f64 * value,
                tx_n.1 as f64 * value
            );
        }
    }
    let rx = UpaGeometry::new(rx_n.0, rx_n.1, spacing * lambda, [0.0; 3])?;
    let tx = UpaGeometry::new(tx_n.0, tx_n.1, spacing * lambda, [0.0; 3])?;
    Ok((snr_db, pilot_length, rx, tx))
}

/// Receive and transmit geometries of every sweep point, without building
/// any basis.
pub fn sweep_geometries(config: &ExperimentConfig) -> Result<Vec<(UpaGeometry, UpaGeometry)>> {
    config.validate()?;
    let lambda = SystemConfig::new(config.carrier_frequency_hz)?.wavelength();
    config
        .sweep_values
        .iter()
        .map(|&v| point_setup(config, v, lambda).map(|(_, _, rx, tx)| (rx, tx)))
        .collect()
}

/// Bases are shared between sweep points with the same geometry.
#[derive(Default)]
struct BasisCache {
    wd: Vec<((usize, usize, u64), Arc<SparsifyingBasis>)>,
    ad: Vec<((usize, usize, u64), Arc<SparsifyingBasis>)>,
}

fn geometry_key(g: &UpaGeometry) -> (usize, usize, u64) {
    (g.nx(), g.ny(), g.spacing().to_bits())
}

impl BasisCache {
    fn wd(&mut self, g: &UpaGeometry, grid: &WavenumberGrid) -> Result<Arc<SparsifyingBasis>> {
        let key = geometry_key(g);
        if let Some((_, b)) = self.wd.iter().find(|(k, _)| *k == key) {
            return Ok(Arc::clone(b));
        }
        let b = Arc::new(build_wd_basis(g, grid)?);
        self.wd.push((key, Arc::clone(&b)));
        Ok(b)
    }

    fn ad(&mut self, g: &UpaGeometry) -> Arc<SparsifyingBasis> {
        let key = geometry_key(g);
        if let Some((_, b)) = self.ad.iter().find(|(k, _)| *k == key) {
            return Arc::clone(b);
        }
        let b = Arc::new(build_ad_basis(g));
        self.ad.push((key, Arc::clone(&b)));
        b
    }
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let system = SystemConfig::new(config.carrier_frequency_hz)?;
        let lambda = system.wavelength();
        let needs_ad = config.estimators.iter().any(|e| e.uses_angular_basis());
        let mut cache = BasisCache::default();
        let mut points = Vec::with_capacity(config.sweep_values.len());
        for &value in &config.sweep_values {
            let (snr_db, pilot_length, rx, tx) = point_setup(&config, value, lambda)?;
            if config.n_rf > rx.num_elements() {
                return Err(Error::config(
                    "n_rf",
                    format!(
                        "{} RF chains exceed {} receive elements",
                        config.n_rf,
                        rx.num_elements()
                    ),
                ));
            }
            let rx_grid = grid_for(&rx, lambda)?;
            let tx_grid = grid_for(&tx, lambda)?;
            let psi_r = cache.wd(&rx, &rx_grid)?;
            let psi_s = cache.wd(&tx, &tx_grid)?;
            let (ad_r, ad_s) = if needs_ad {
                (Some(cache.ad(&rx)), Some(cache.ad(&tx)))
            } else {
                (None, None)
            };
            points.push(SweepPoint {
                value,
                snr_db,
                pilot_length,
                rx,
                tx,
                rx_grid,
                tx_grid,
                psi_r,
                psi_s,
                ad_r,
                ad_s,
            });
        }
        Ok(Self { config, system, points })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    fn profiles(&self, trial: usize) -> Result<(ScatteringProfile, ScatteringProfile)> {
        let cfg = &self.config;
        let mut rng = stream_rng(cfg.master_seed, trial as u64, Stream::Clusters);
        let theta = (cfg.theta_min_deg.to_radians(), cfg.theta_max_deg.to_radians());
        let phi = (cfg.phi_min_deg.to_radians(), cfg.phi_max_deg.to_radians());
        let rx = ScatteringProfile::random(&mut rng, cfg.clusters, cfg.alpha_rx, theta, phi, Side::Receive)?;
        let tx = ScatteringProfile::random(&mut rng, cfg.clusters, cfg.alpha_tx, theta, phi, Side::Transmit)?;
        Ok((rx, tx))
    }

    fn variances(
        &self,
        point: &SweepPoint,
        rx: &ScatteringProfile,
        tx: &ScatteringProfile,
    ) -> Result<(VarianceVector, VarianceVector)> {
        let k = self.system.wavenumber();
        let nodes = self.config.quadrature_nodes;
        Ok((
            variance_vector_with_nodes(rx, &point.rx_grid, k, nodes)?,
            variance_vector_with_nodes(tx, &point.tx_grid, k, nodes)?,
        ))
    }

    /// The channel realization of one trial at one sweep point.
    pub fn channel(&self, sweep_index: usize, trial: usize) -> Result<ChannelInstance> {
        let point = self
            .points
            .get(sweep_index)
            .ok_or_else(|| Error::invalid(format!("sweep index {sweep_index} out of range")))?;
        let (rx_profile, tx_profile) = self.profiles(trial)?;
        let (sigma_r, sigma_s) = self.variances(point, &rx_profile, &tx_profile)?;
        let mut rng = stream_rng(self.config.master_seed, trial as u64, Stream::Channel);
        let h_a = sample_wavenumber_channel(&sigma_r, &sigma_s, &mut rng);
        let h = synthesize_spatial(&point.psi_r, &h_a, &point.psi_s)?;
        Ok(ChannelInstance {
            h_a,
            h,
            seed: self.config.master_seed,
            rx_profile,
            tx_profile,
            rx_geometry: point.rx.clone(),
            tx_geometry: point.tx.clone(),
            rx_grid: point.rx_grid.clone(),
            tx_grid: point.tx_grid.clone(),
        })
    }

    /// Default OMP iteration count: product of the per-side significant
    /// counts, capped at `P N_RF / 4`.
    fn default_u_iter(&self, point: &SweepPoint, sigma_r: &VarianceVector, sigma_s: &VarianceVector) -> Result<usize> {
        let f = self.config.energy_fraction;
        let product = significant_count(sigma_r.values(), f)? * significant_count(sigma_s.values(), f)?;
        let cap = (point.pilot_length * self.config.n_rf / 4).max(1);
        Ok(product.min(cap).max(1))
    }

    pub fn run_trial(&self, sweep_index: usize, trial: usize) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let point = &self.points[sweep_index];
        let (rx_profile, tx_profile) = self.profiles(trial)?;
        let (sigma_r, sigma_s) = self.variances(point, &rx_profile, &tx_profile)?;
        let seed = cfg.master_seed;
        let t = trial as u64;
        let h_a = sample_wavenumber_channel(&sigma_r, &sigma_s, &mut stream_rng(seed, t, Stream::Channel));
        let h = synthesize_spatial(&point.psi_r, &h_a, &point.psi_s)?;
        let c = gen_combiner(
            cfg.n_rf,
            point.rx.num_elements(),
            &mut stream_rng(seed, t, Stream::Combiner),
        )?;
        let x = gen_pilots(
            point.tx.num_elements(),
            point.pilot_length,
            &mut stream_rng(seed, t, Stream::Pilots),
        )?;
        let noise_var = noise_variance_for_snr(&c, &h, &x, point.snr_db)?;
        let y = observe(
            &h,
            &x,
            &c,
            noise_var,
            &mut stream_rng(seed, t, Stream::Noise(sweep_index as u32)),
        )?;

        let u_iter = match cfg.u_iter {
            Some(u) => u,
            None => self.default_u_iter(point, &sigma_r, &sigma_s)?,
        };
        let den = frobenius_sq(&h);
        let mut estimates = Vec::with_capacity(cfg.estimators.len());
        for &kind in &cfg.estimators {
            let start = Instant::now();
            let h_hat = self.estimate(kind, point, &y, &x, &c, u_iter)?;
            let seconds = start.elapsed().as_secs_f64();
            estimates.push(EstimatorOutcome {
                estimator: kind,
                num: frobenius_sq(&(h_hat - &h)),
                den,
                seconds,
            });
        }
        Ok(TrialOutcome {
            sweep_index,
            trial_index: trial,
            u_iter,
            estimates,
        })
    }

    fn estimate(
        &self,
        kind: EstimatorKind,
        point: &SweepPoint,
        y: &CMat,
        x: &CMat,
        c: &CMat,
        u_iter: usize,
    ) -> Result<CMat> {
        let bases = |angular: bool| -> (&SparsifyingBasis, &SparsifyingBasis) {
            if angular {
                (
                    point.ad_r.as_deref().expect("built"),
                    point.ad_s.as_deref().expect("built"),
                )
            } else {
                (&point.psi_r, &point.psi_s)
            }
        };
        match kind {
            EstimatorKind::Ls => ls_estimate(y, x, c),
            EstimatorKind::WdOmp | EstimatorKind::AdOmp => {
                let (r, s) = bases(kind.uses_angular_basis());
                let u = u_iter.min(r.num_atoms() * s.num_atoms());
                Ok(basis_omp(y, x, c, r, s, u)?.h_hat)
            }
            EstimatorKind::WdCosamp | EstimatorKind::AdCosamp => {
                let (r, s) = bases(kind.uses_angular_basis());
                let atoms = r.num_atoms() * s.num_atoms();
                let k = self.config.cosamp_k.unwrap_or(u_iter).min(atoms / 3).max(1);
                Ok(basis_cosamp(y, x, c, r, s, k, self.config.cosamp_max_iter)?.h_hat)
            }
        }
    }

    pub fn run(&self) -> ExperimentOutput {
        let jobs: Vec<(usize, usize)> = (0..self.points.len())
            .flat_map(|s| (0..self.config.trials).map(move |t| (s, t)))
            .collect();
        let results: Vec<Result<TrialOutcome>> = jobs.par_iter().map(|&(s, t)| self.run_trial(s, t)).collect();

        let mut trials = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for ((s, t), r) in jobs.into_iter().zip(results) {
            match r {
                Ok(o) => trials.push(o),
                Err(e) => {
                    log::warn!("trial {t} at sweep point {s} failed and is excluded: {e}");
                    failures.push((s, t, e.to_string()));
                }
            }
        }

        let mut rows = Vec::new();
        for (s, point) in self.points.iter().enumerate() {
            for (e, &kind) in self.config.estimators.iter().enumerate() {
                let mut acc = NmseAccumulator::default();
                let mut seconds = 0.0;
                for o in trials.iter().filter(|o| o.sweep_index == s) {
                    let est = &o.estimates[e];
                    seconds += est.seconds;
                    if est.den == 0.0 {
                        log::warn!("trial {} has a zero channel and is excluded", o.trial_index);
                        acc.excluded += 1;
                        continue;
                    }
                    acc.add_parts(est.num, est.den);
                }
                let nmse = acc.nmse().unwrap_or(f64::NAN);
                rows.push(ResultRow {
                    sweep: point.value,
                    estimator: kind,
                    nmse,
                    nmse_db: to_db(nmse),
                    trials: acc.trials,
                    num: acc.num,
                    den: acc.den,
                    seconds,
                });
            }
        }
        ExperimentOutput { rows, trials, failures }
    }
}

/// Runs one trial of `config` from scratch.
pub fn run_trial(config: &ExperimentConfig, sweep_index: usize, trial: usize) -> Result<TrialOutcome> {
    let exp = Experiment::new(config.clone())?;
    if sweep_index >= exp.points.len() {
        return Err(Error::invalid(format!("sweep index {sweep_index} out of range")));
    }
    exp.run_trial(sweep_index, trial)
}

/// Runs every sweep point and trial; `threads` pins the worker count.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    let exp = Experiment::new(config.clone())?;
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(|| exp.run()))
        }
        None => Ok(exp.run()),
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{:.9e},{:.6},{},{:.3}",
            r.sweep, r.estimator, r.nmse, r.nmse_db, r.trials, r.seconds
        )
        .expect("write to string");
    }
    out
}

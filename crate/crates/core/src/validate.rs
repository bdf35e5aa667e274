//! Quick self-check of the library invariants, used by the `validate`
//! subcommand.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::bench::{preset, Experiment, Preset};
use crate::channel::{spatial_entry_oracle, synthesize_spatial};
use crate::estimators::{basis_omp, solve_weights};
use crate::geometry::{build_wd_basis, grid_for, SystemConfig, UpaGeometry};
use crate::linalg::{frobenius_sq, gram_identity_defect, pinv, CMat};
use crate::measurement::{gen_combiner, gen_pilots};
use crate::rng::{complex_normal, complex_normal_matrix, stream_rng, Stream};
use crate::scattering::{variance_vector, Cluster, ScatteringProfile, Side};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn preset_bases() -> Result<String, String> {
    let mut worst_wd = 0.0f64;
    let mut worst_ad = 0.0f64;
    for name in ["fig2a-desk", "fig2c-desk"] {
        let Preset::Experiment(cfg) = preset(name).map_err(|e| e.to_string())? else {
            continue;
        };
        let exp = Experiment::new(cfg).map_err(|e| e.to_string())?;
        for p in exp.points() {
            worst_wd = worst_wd.max(gram_identity_defect(p.psi_r.matrix()));
            worst_wd = worst_wd.max(gram_identity_defect(p.psi_s.matrix()));
            if let (Some(r), Some(s)) = (&p.ad_r, &p.ad_s) {
                worst_ad = worst_ad.max(gram_identity_defect(r.matrix()));
                worst_ad = worst_ad.max(gram_identity_defect(s.matrix()));
            }
        }
    }
    ensure(worst_wd < 1e-10 && worst_ad < 1e-12, || {
        format!("defects WD {worst_wd:e}, AD {worst_ad:e}")
    })?;
    Ok(format!("WD defect {worst_wd:.2e}, AD defect {worst_ad:.2e}"))
}

fn synthesis_oracle() -> Result<String, String> {
    let g = UpaGeometry::new(3, 3, 0.25, [0.0; 3]).map_err(|e| e.to_string())?;
    let grid = grid_for(&g, 1.0).map_err(|e| e.to_string())?;
    let psi = build_wd_basis(&g, &grid).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(1, 0, Stream::Aux(10));
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h_a = complex_normal_matrix(&mut rng, grid.len(), grid.len(), 1.0);
        let h = synthesize_spatial(&psi, &h_a, &psi).map_err(|e| e.to_string())?;
        for r in 0..9 {
            for s in 0..9 {
                let o = spatial_entry_oracle(&g, &grid, &g, &grid, &h_a, r, s).map_err(|e| e.to_string())?;
                worst = worst.max((h[(r, s)] * 9.0 - o).norm());
            }
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn energy_preservation() -> Result<String, String> {
    let rx = UpaGeometry::new(9, 9, 0.25, [0.0; 3]).map_err(|e| e.to_string())?;
    let tx = UpaGeometry::new(5, 5, 0.25, [0.0; 3]).map_err(|e| e.to_string())?;
    let pr = build_wd_basis(&rx, &grid_for(&rx, 1.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let ps = build_wd_basis(&tx, &grid_for(&tx, 1.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(2, 0, Stream::Aux(11));
    let h_a = complex_normal_matrix(&mut rng, pr.num_atoms(), ps.num_atoms(), 1.0);
    let h = synthesize_spatial(&pr, &h_a, &ps).map_err(|e| e.to_string())?;
    let d = (frobenius_sq(&h).sqrt() - frobenius_sq(&h_a).sqrt()).abs();
    ensure(d < 1e-9, || format!("norm gap {d:e}"))?;
    Ok(format!("norm gap {d:.2e}"))
}

fn weights_vs_dense() -> Result<String, String> {
    let mut rng = stream_rng(3, 0, Stream::Aux(12));
    let mut worst = 0.0f64;
    for u in 1..=8 {
        let atoms: Vec<_> = (0..u)
            .map(|_| {
                (
                    DVector::from_fn(6, |_, _| complex_normal(&mut rng, 1.0)),
                    DVector::from_fn(9, |_, _| complex_normal(&mut rng, 1.0)),
                )
            })
            .collect();
        let y = complex_normal_matrix(&mut rng, 6, 9, 1.0);
        let w = solve_weights(&atoms, &y).map_err(|e| e.to_string())?.weights;
        let d = CMat::from_fn(54, u, |k, n| atoms[n].0[k % 6] * atoms[n].1[k / 6]);
        let yv = CMat::from_fn(54, 1, |k, _| y[(k % 6, k / 6)]);
        let dense = pinv(&d).map_err(|e| e.to_string())? * yv;
        for n in 0..u {
            worst = worst.max((w[n] - dense[(n, 0)]).norm());
        }
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn vmf_normalization() -> Result<String, String> {
    let n = 1500;
    let mut worst = 0.0f64;
    for alpha in [1.0, 140.0, 500.0] {
        let c = Cluster::new(1.0, 0.7, 2.0, alpha).map_err(|e| e.to_string())?;
        let p = ScatteringProfile::new(vec![c], Side::Receive).map_err(|e| e.to_string())?;
        let (dt, dp) = (PI / n as f64, 2.0 * PI / n as f64);
        let mut total = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * dt;
            for j in 0..n {
                let ph = (j as f64 + 0.5) * dp;
                total += crate::scattering::spectral_factor(t, ph, &p) * t.sin() * dt * dp;
            }
        }
        worst = worst.max((total - 1.0).abs());
    }
    ensure(worst < 1e-3, || format!("max |integral - 1| = {worst:e}"))?;
    Ok(format!("max |integral - 1| = {worst:.2e}"))
}

fn variance_normalization() -> Result<String, String> {
    let sys = SystemConfig::new(30e9).map_err(|e| e.to_string())?;
    let lambda = sys.wavelength();
    let g = UpaGeometry::new(17, 17, lambda / 4.0, [0.0; 3]).map_err(|e| e.to_string())?;
    let grid = grid_for(&g, lambda).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(4, 0, Stream::Clusters);
    let p = ScatteringProfile::random(&mut rng, 3, 140.0, (0.0, PI / 2.0), (0.0, 2.0 * PI), Side::Receive)
        .map_err(|e| e.to_string())?;
    let v = variance_vector(&p, &grid, sys.wavenumber()).map_err(|e| e.to_string())?;
    let s: f64 = v.values().iter().sum();
    ensure((s - 1.0).abs() < 1e-6 && v.values().iter().all(|x| *x >= 0.0), || {
        format!("sum {s}")
    })?;
    Ok(format!("sum - 1 = {:.2e}", s - 1.0))
}

fn omp_invariants() -> Result<String, String> {
    let rx = UpaGeometry::new(9, 9, 0.25, [0.0; 3]).map_err(|e| e.to_string())?;
    let tx = UpaGeometry::new(5, 5, 0.25, [0.0; 3]).map_err(|e| e.to_string())?;
    let pr = build_wd_basis(&rx, &grid_for(&rx, 1.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let ps = build_wd_basis(&tx, &grid_for(&tx, 1.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let c = gen_combiner(8, 81, &mut stream_rng(5, 0, Stream::Combiner)).map_err(|e| e.to_string())?;
    let x = gen_pilots(25, 12, &mut stream_rng(5, 0, Stream::Pilots)).map_err(|e| e.to_string())?;
    let y = complex_normal_matrix(&mut stream_rng(5, 0, Stream::Noise(0)), 8, 12, 1.0);
    let est = basis_omp(&y, &x, &c, &pr, &ps, 12).map_err(|e| e.to_string())?;
    let again = basis_omp(&y, &x, &c, &pr, &ps, 12).map_err(|e| e.to_string())?;
    let hist = &est.residual_history;
    ensure(hist.windows(2).all(|w| w[1] <= w[0] + 1e-12), || {
        "residual increased".into()
    })?;
    let mut pairs: Vec<_> = est.support.iter().map(|e| (e.i, e.j)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    ensure(pairs.len() == est.support.len(), || "repeated atom".into())?;
    ensure(est.support == again.support, || "non-deterministic support".into())?;
    Ok(format!(
        "{} iterations, final residual {:.3}",
        hist.len(),
        est.residual_norm
    ))
}

fn trial_determinism() -> Result<String, String> {
    let Preset::Experiment(mut cfg) = preset("fig2a-desk").map_err(|e| e.to_string())? else {
        return Err("preset is not an experiment".into());
    };
    cfg.trials = 2;
    cfg.sweep_values = vec![10.0];
    let exp = Experiment::new(cfg).map_err(|e| e.to_string())?;
    let a = exp.run_trial(0, 1).map_err(|e| e.to_string())?;
    let b = exp.run_trial(0, 1).map_err(|e| e.to_string())?;
    let same = a
        .estimates
        .iter()
        .zip(&b.estimates)
        .all(|(x, y)| x.num == y.num && x.den == y.den);
    ensure(same, || "repeated trial differs".into())?;
    Ok("identical (num, den) on repeat".into())
}

const CHECKS: &[(&str, Check)] = &[
    ("basis orthonormality on presets", preset_bases),
    ("synthesis matches scalar oracle", synthesis_oracle),
    ("energy preservation", energy_preservation),
    ("weight solve matches dense LS", weights_vs_dense),
    ("VMF density integrates to one", vmf_normalization),
    ("variance vector normalization", variance_normalization),
    ("OMP residual monotone, unique support", omp_invariants),
    ("trial determinism", trial_determinism),
];

pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| match f() {
            Ok(detail) => CheckResult {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckResult {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}

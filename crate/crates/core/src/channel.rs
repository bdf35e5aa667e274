//! Random wavenumber-domain channels `H_a` and their spatial image
//! `H = Ψ_R H_a Ψ_Sᴴ`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use crate::geometry::{SparsifyingBasis, UpaGeometry, WavenumberGrid};
use crate::linalg::{check_mul, CMat};
use crate::rng::{complex_normal, stream_rng, Stream};
use crate::scattering::{ScatteringProfile, VarianceVector};
use crate::{Error, Result};

/// `H_a[l, m] = σ_R(l) σ_S(m) W[l, m]` with `W` i.i.d. CN(0, 1), so the entry
/// variance is `σ_R²(l) σ_S²(m)`. `W` is drawn row-major.
pub fn sample_wavenumber_channel<R: Rng + ?Sized>(
    sigma_r: &VarianceVector,
    sigma_s: &VarianceVector,
    rng: &mut R,
) -> CMat {
    let sr = sigma_r.std_devs();
    let ss = sigma_s.std_devs();
    let mut h_a = CMat::zeros(sr.len(), ss.len());
    for (l, a) in sr.iter().enumerate() {
        for (m, b) in ss.iter().enumerate() {
            h_a[(l, m)] = complex_normal(rng, 1.0) * (a * b);
        }
    }
    h_a
}

pub fn sample_wavenumber_channel_seeded(sigma_r: &VarianceVector, sigma_s: &VarianceVector, seed: u64) -> CMat {
    let mut rng = stream_rng(seed, 0, Stream::Channel);
    sample_wavenumber_channel(sigma_r, sigma_s, &mut rng)
}

/// `Ψ_R H_a Ψ_Sᴴ`.
pub fn synthesize_spatial(psi_r: &SparsifyingBasis, h_a: &CMat, psi_s: &SparsifyingBasis) -> Result<CMat> {
    check_mul(psi_r.matrix().shape(), h_a.shape(), "Psi_R * H_a")?;
    if h_a.ncols() != psi_s.num_atoms() {
        return Err(Error::dims(format!(
            "H_a has {} columns but the transmit basis has {} atoms",
            h_a.ncols(),
            psi_s.num_atoms()
        )));
    }
    Ok(psi_r.matrix() * h_a * psi_s.matrix().adjoint())
}

/// Direct double sum over both lattices for a single entry, with
/// unnormalized Fourier harmonics. Equals `sqrt(N_R N_S)` times the
/// corresponding entry of [`synthesize_spatial`].
#[allow(clippy::too_many_arguments)]
pub fn spatial_entry_oracle(
    rx: &UpaGeometry,
    rx_grid: &WavenumberGrid,
    tx: &UpaGeometry,
    tx_grid: &WavenumberGrid,
    h_a: &CMat,
    row_r: usize,
    row_s: usize,
) -> Result<Complex64> {
    if h_a.shape() != (rx_grid.len(), tx_grid.len()) {
        return Err(Error::dims(format!(
            "H_a is {:?}, grids are {}x{}",
            h_a.shape(),
            rx_grid.len(),
            tx_grid.len()
        )));
    }
    let (nrx, nry) = rx.element_indices(row_r)?;
    let (nsx, nsy) = tx.element_indices(row_s)?;
    let (lrx, lry) = rx.aperture();
    let (lsx, lsy) = tx.aperture();
    let dr = rx.spacing();
    let ds = tx.spacing();
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, &(lx, ly)) in rx_grid.indices().iter().enumerate() {
        for (m, &(mx, my)) in tx_grid.indices().iter().enumerate() {
            let phase = 2.0 * PI * lx as f64 * nrx as f64 * dr / lrx + 2.0 * PI * ly as f64 * nry as f64 * dr / lry
                - 2.0 * PI * mx as f64 * nsx as f64 * ds / lsx
                - 2.0 * PI * my as f64 * nsy as f64 * ds / lsy;
            acc += h_a[(l, m)] * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(acc)
}

/// `M_R H M_S`.
pub fn apply_coupling(h: &CMat, m_r: &CMat, m_s: &CMat) -> Result<CMat> {
    if m_r.nrows() != m_r.ncols() || m_s.nrows() != m_s.ncols() {
        return Err(Error::dims("coupling matrices must be square"));
    }
    check_mul(m_r.shape(), h.shape(), "M_R * H")?;
    check_mul(h.shape(), m_s.shape(), "H * M_S")?;
    Ok(m_r * h * m_s)
}

/// One channel realization with everything needed to reproduce it.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    pub h_a: CMat,
    pub h: CMat,
    pub seed: u64,
    pub rx_profile: ScatteringProfile,
    pub tx_profile: ScatteringProfile,
    pub rx_geometry: UpaGeometry,
    pub tx_geometry: UpaGeometry,
    pub rx_grid: WavenumberGrid,
    pub tx_grid: WavenumberGrid,
}

fn geometry_json(g: &UpaGeometry) -> serde_json::Value {
    json!({
        "nx": g.nx(),
        "ny": g.ny(),
        "spacing_m": g.spacing(),
        "aperture_m": [g.aperture().0, g.aperture().1],
        "origin_m": g.origin(),
    })
}

/// Rows of `m`, one CSV line per row, entries interleaved as `re,im`.
pub fn matrix_to_csv(m: &CMat) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            let z = m[(r, c)];
            write!(out, "{},{}", z.re, z.im).expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<CMat> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (ln, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let nums = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("line {}: {e}", ln + 1)))?;
        if nums.len() % 2 != 0 {
            return Err(Error::invalid(format!("line {}: odd number of fields", ln + 1)));
        }
        rows.push(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("ragged matrix rows"));
    }
    Ok(CMat::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

impl ChannelInstance {
    pub fn header_json(&self) -> serde_json::Value {
        json!({
            "format": "holosparse-channel-v1",
            "seed": self.seed,
            "h_a_dims": [self.h_a.nrows(), self.h_a.ncols()],
            "h_dims": [self.h.nrows(), self.h.ncols()],
            "rx_geometry": geometry_json(&self.rx_geometry),
            "tx_geometry": geometry_json(&self.tx_geometry),
            "rx_grid": self.rx_grid.indices(),
            "tx_grid": self.tx_grid.indices(),
            "rx_profile": self.rx_profile.to_json(),
            "tx_profile": self.tx_profile.to_json(),
            "files": {"h_a": "h_a.csv", "h": "h.csv"},
            "layout": "row-major; each CSV line is one matrix row of interleaved re,im pairs",
        })
    }

    /// Writes `header.json`, `h_a.csv` and `h.csv` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("header.json"),
            serde_json::to_string_pretty(&self.header_json())? + "\n",
        )?;
        fs::write(dir.join("h_a.csv"), matrix_to_csv(&self.h_a))?;
        fs::write(dir.join("h.csv"), matrix_to_csv(&self.h))?;
        Ok(())
    }
}

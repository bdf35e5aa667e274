//! Planar-array geometry, the propagating wavenumber lattice, and the two
//! sparsifying bases (wavenumber-domain and angular-domain).
//!
//! Element rows are 0-based: row `r` of a basis or channel matrix is the
//! element with signed indices `(n_x, n_y)` where
//! `r = (n_x + (N_x - 1)/2) * N_y + n_y + (N_y - 1)/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Tolerance on the lattice ellipse test, absorbing round-off in `L = N * δ`.
const ELLIPSE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub carrier_frequency: f64,
}

impl SystemConfig {
    pub fn new(carrier_frequency: f64) -> Result<Self> {
        if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {carrier_frequency}"
            )));
        }
        Ok(Self { carrier_frequency })
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.carrier_frequency / SPEED_OF_LIGHT
    }
}

/// Uniform planar array in the xOy plane with odd element counts per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct UpaGeometry {
    nx: usize,
    ny: usize,
    spacing: f64,
    aperture: (f64, f64),
    origin: [f64; 3],
}

impl UpaGeometry {
    /// Array with aperture `L_i = N_i * δ` on each axis, centred at `origin`.
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: [f64; 3]) -> Result<Self> {
        Self::with_aperture(nx, ny, spacing, (nx as f64 * spacing, ny as f64 * spacing), origin)
    }

    /// Array whose nominal aperture differs from `N * δ`. The wavenumber
    /// basis built from it is then no longer orthonormal.
    pub fn with_aperture(nx: usize, ny: usize, spacing: f64, aperture: (f64, f64), origin: [f64; 3]) -> Result<Self> {
        if nx == 0 || ny == 0 || nx.is_multiple_of(2) || ny.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "element counts must be odd and positive, got {nx}x{ny}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
        }
        if !(aperture.0 > 0.0 && aperture.1 > 0.0) {
            return Err(Error::invalid(format!("aperture must be positive, got {:?}", aperture)));
        }
        Ok(Self {
            nx,
            ny,
            spacing,
            aperture,
            origin,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn aperture(&self) -> (f64, f64) {
        self.aperture
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    /// Signed element indices of matrix row `row`.
    pub fn element_indices(&self, row: usize) -> Result<(i64, i64)> {
        if row >= self.num_elements() {
            return Err(Error::invalid(format!(
                "element row {row} out of range for {} elements",
                self.num_elements()
            )));
        }
        let hx = (self.nx as i64 - 1) / 2;
        let hy = (self.ny as i64 - 1) / 2;
        let ix = (row / self.ny) as i64;
        let iy = (row % self.ny) as i64;
        Ok((ix - hx, iy - hy))
    }

    /// Matrix row of the element with signed indices `(n_x, n_y)`.
    pub fn element_row(&self, n_x: i64, n_y: i64) -> Result<usize> {
        let hx = (self.nx as i64 - 1) / 2;
        let hy = (self.ny as i64 - 1) / 2;
        if n_x.abs() > hx || n_y.abs() > hy {
            return Err(Error::invalid(format!(
                "element ({n_x}, {n_y}) outside a {}x{} array",
                self.nx, self.ny
            )));
        }
        Ok(((n_x + hx) * self.ny as i64 + n_y + hy) as usize)
    }

    /// Cartesian position of the element at matrix row `row`.
    pub fn antenna_position(&self, row: usize) -> Result<[f64; 3]> {
        let (n_x, n_y) = self.element_indices(row)?;
        Ok([
            self.origin[0] + self.spacing * n_x as f64,
            self.origin[1] + self.spacing * n_y as f64,
            self.origin[2],
        ])
    }
}

/// The propagating wavenumber lattice of one aperture, ordered ascending by
/// `l_x` then `l_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberGrid {
    indices: Vec<(i32, i32)>,
    aperture: (f64, f64),
    wavelength: f64,
}

impl WavenumberGrid {
    pub fn indices(&self) -> &[(i32, i32)] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn aperture(&self) -> (f64, f64) {
        self.aperture
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Column position of lattice point `(l_x, l_y)`, if it propagates.
    pub fn position(&self, l_x: i32, l_y: i32) -> Option<usize> {
        self.indices.binary_search(&(l_x, l_y)).ok()
    }

    /// Transverse wavenumber `(2π l_x / L_x, 2π l_y / L_y)` of column `idx`.
    pub fn transverse_wavenumber(&self, idx: usize) -> (f64, f64) {
        let (l_x, l_y) = self.indices[idx];
        (
            2.0 * PI * l_x as f64 / self.aperture.0,
            2.0 * PI * l_y as f64 / self.aperture.1,
        )
    }

    /// Cell widths `(2π / L_x, 2π / L_y)` in rad/m.
    pub fn cell_size(&self) -> (f64, f64) {
        (2.0 * PI / self.aperture.0, 2.0 * PI / self.aperture.1)
    }
}

/// All integer pairs with `(l_x λ / L_x)² + (l_y λ / L_y)² ≤ 1`.
pub fn enumerate_wavenumber_set(l_x: f64, l_y: f64, wavelength: f64) -> Result<WavenumberGrid> {
    for (name, v) in [("L_x", l_x), ("L_y", l_y), ("wavelength", wavelength)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let rx = l_x / wavelength;
    let ry = l_y / wavelength;
    let max_x = (rx + ELLIPSE_SLACK).floor() as i32;
    let max_y = (ry + ELLIPSE_SLACK).floor() as i32;
    let mut indices = Vec::new();
    for a in -max_x..=max_x {
        let ux = a as f64 / rx;
        for b in -max_y..=max_y {
            let uy = b as f64 / ry;
            if ux * ux + uy * uy <= 1.0 + ELLIPSE_SLACK {
                indices.push((a, b));
            }
        }
    }
    Ok(WavenumberGrid {
        indices,
        aperture: (l_x, l_y),
        wavelength,
    })
}

/// Lattice of the aperture of `geom` at `wavelength`.
pub fn grid_for(geom: &UpaGeometry, wavelength: f64) -> Result<WavenumberGrid> {
    let (lx, ly) = geom.aperture();
    enumerate_wavenumber_set(lx, ly, wavelength)
}

/// Longitudinal wavenumber `sqrt(k² - k_x² - k_y²)` of a propagating wave.
pub fn kz(k_x: f64, k_y: f64, k: f64) -> Result<f64> {
    let transverse_sq = k_x * k_x + k_y * k_y;
    let k_sq = k * k;
    if transverse_sq > k_sq * (1.0 + ELLIPSE_SLACK) {
        return Err(Error::Evanescent { transverse_sq, k_sq });
    }
    Ok((k_sq - transverse_sq).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    Wavenumber(WavenumberGrid),
    Angular,
}

/// A sparsifying dictionary `N × atoms`; columns are unit-norm plane waves.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyingBasis {
    matrix: CMat,
    indices: Vec<(i32, i32)>,
    kind: BasisKind,
}

impl SparsifyingBasis {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    /// Frequency index pair of each column.
    pub fn indices(&self) -> &[(i32, i32)] {
        &self.indices
    }

    pub fn num_elements(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_atoms(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_wavenumber(&self) -> bool {
        matches!(self.kind, BasisKind::Wavenumber(_))
    }
}

fn signed_range(n: usize) -> impl Iterator<Item = i64> {
    let h = (n as i64 - 1) / 2;
    -h..=h
}

/// Wavenumber-domain basis: column `(l_x, l_y)`, row `(n_x, n_y)` holds
/// `exp{j(2π l_x n_x δ / L_x + 2π l_y n_y δ / L_y)} / sqrt(N)`.
pub fn build_wd_basis(geom: &UpaGeometry, grid: &WavenumberGrid) -> Result<SparsifyingBasis> {
    let (glx, gly) = grid.aperture();
    let (lx, ly) = geom.aperture();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(glx, lx) || !close(gly, ly) {
        return Err(Error::invalid(format!(
            "grid aperture ({glx}, {gly}) does not match array aperture ({lx}, {ly})"
        )));
    }
    let n = geom.num_elements();
    let scale = 1.0 / (n as f64).sqrt();
    let delta = geom.spacing();
    let rows: Vec<(i64, i64)> = signed_range(geom.nx())
        .flat_map(|a| signed_range(geom.ny()).map(move |b| (a, b)))
        .collect();
    let matrix = CMat::from_fn(n, grid.len(), |r, c| {
        let (n_x, n_y) = rows[r];
        let (l_x, l_y) = grid.indices()[c];
        let phase = 2.0 * PI * (l_x as f64 * n_x as f64 * delta / lx + l_y as f64 * n_y as f64 * delta / ly);
        Complex64::from_polar(scale, phase)
    });
    Ok(SparsifyingBasis {
        matrix,
        indices: grid.indices().to_vec(),
        kind: BasisKind::Wavenumber(grid.clone()),
    })
}

fn unitary_dft(n: usize) -> CMat {
    let idx: Vec<i64> = signed_range(n).collect();
    let scale = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |r, c| {
        // Reduce the phase numerator mod n so large arrays keep full precision.
        let num = (idx[r] * idx[c]).rem_euclid(n as i64);
        Complex64::from_polar(scale, 2.0 * PI * num as f64 / n as f64)
    })
}

/// Angular-domain basis: the unitary 2-D spatial DFT `F_x ⊗ F_y` with
/// frequencies over the same symmetric range as the element indices.
pub fn build_ad_basis(geom: &UpaGeometry) -> SparsifyingBasis {
    let fx = unitary_dft(geom.nx());
    let fy = unitary_dft(geom.ny());
    let matrix = fx.kronecker(&fy);
    let indices = signed_range(geom.nx())
        .flat_map(|p| signed_range(geom.ny()).map(move |q| (p as i32, q as i32)))
        .collect();
    SparsifyingBasis {
        matrix,
        indices,
        kind: BasisKind::Angular,
    }
}

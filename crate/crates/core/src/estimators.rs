//! Sparse channel estimators over rank-one atoms `a_i b_jᵀ`, where `a_i` is
//! column `i` of `A = C Φ_R` and `b_jᵀ` is row `j` of `B = Φ_Sᴴ X`.
//!
//! With `Φ = Ψ` (wavenumber bases) [`basis_omp`] is WD-OMP; with the angular
//! DFT bases it is AD-OMP. [`basis_cosamp`] is the CoSaMP counterpart and
//! [`ls_estimate`] the unstructured least-squares baseline.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::geometry::SparsifyingBasis;
use crate::linalg::{frobenius_sq, pinv, CMat};
use crate::{Error, Result};

/// Condition number above which the weight system is regularized.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative diagonal loading `ε = REGULARIZATION * tr(F) / u`.
pub const REGULARIZATION: f64 = 1e-10;

/// CoSaMP stops once an iteration improves the residual by less than this.
pub const COSAMP_STALL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportEntry {
    pub i: usize,
    pub j: usize,
    pub weight: Complex64,
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub h_a_hat: CMat,
    pub h_hat: CMat,
    pub support: Vec<SupportEntry>,
    pub iterations_used: usize,
    pub residual_norm: f64,
    /// `‖Y_res‖_F` after each iteration.
    pub residual_history: Vec<f64>,
    /// Whether any weight solve fell back to diagonal loading.
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub weights: Vec<Complex64>,
    pub regularized: bool,
}

/// Solves `F v = f` for Hermitian PSD `F` and returns `conj(v)`.
fn solve_normal_equations(mut f_mat: CMat, f_vec: DVector<Complex64>) -> Result<WeightSolution> {
    let u = f_vec.len();
    let eig = SymmetricEigen::new(f_mat.clone());
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    let regularized = !(lo > 0.0 && hi / lo <= MAX_CONDITION);
    if regularized {
        let trace: f64 = (0..u).map(|k| f_mat[(k, k)].re).sum();
        let mut eps = REGULARIZATION * trace / u as f64;
        if !(eps > 0.0) {
            eps = f64::MIN_POSITIVE;
        }
        for k in 0..u {
            f_mat[(k, k)] += Complex64::new(eps, 0.0);
        }
    }
    let v = match f_mat.clone().cholesky() {
        Some(ch) => ch.solve(&f_vec),
        None => f_mat
            .lu()
            .solve(&f_vec)
            .ok_or_else(|| Error::invalid("weight system is singular after regularization"))?,
    };
    Ok(WeightSolution {
        weights: v.iter().map(|z| z.conj()).collect(),
        regularized,
    })
}

/// Joint least-squares weights for the atoms `a_n b_nᵀ`:
/// `f[n] = tr(a_n b_nᵀ Yᴴ)`, `F[m,n] = (a_nᴴ a_m)(b_mᵀ b_n*)` and
/// `w = (F⁻¹ f)*`, which minimizes `‖Y - Σ w_n a_n b_nᵀ‖_F`.
pub fn solve_weights(atoms: &[(DVector<Complex64>, DVector<Complex64>)], y: &CMat) -> Result<WeightSolution> {
    if atoms.is_empty() {
        return Err(Error::invalid("at least one atom is required"));
    }
    for (a, b) in atoms {
        if a.len() != y.nrows() || b.len() != y.ncols() {
            return Err(Error::dims(format!(
                "atom {}x{} against Y {}x{}",
                a.len(),
                b.len(),
                y.nrows(),
                y.ncols()
            )));
        }
    }
    let u = atoms.len();
    let f_vec = DVector::from_iterator(u, atoms.iter().map(|(a, b)| (b.transpose() * y.adjoint() * a)[(0, 0)]));
    let f_mat = CMat::from_fn(u, u, |m, n| {
        let (am, bm) = &atoms[m];
        let (an, bn) = &atoms[n];
        an.dotc(am) * bm.dot(&bn.map(|z| z.conj()))
    });
    solve_normal_equations(f_mat, f_vec)
}

/// Measurement-side dictionary factors for one estimation problem.
struct RankOneDictionary<'a> {
    a: CMat,
    b: CMat,
    a_norms: Vec<f64>,
    b_norms: Vec<f64>,
    y: &'a CMat,
}

impl<'a> RankOneDictionary<'a> {
    fn new(y: &'a CMat, x: &CMat, c: &CMat, phi_r: &SparsifyingBasis, phi_s: &SparsifyingBasis) -> Result<Self> {
        let (n_rf, n_r) = c.shape();
        let (n_s, p) = x.shape();
        if phi_r.num_elements() != n_r {
            return Err(Error::dims(format!(
                "combiner has {n_r} columns, receive basis has {} rows",
                phi_r.num_elements()
            )));
        }
        if phi_s.num_elements() != n_s {
            return Err(Error::dims(format!(
                "pilot has {n_s} rows, transmit basis has {} rows",
                phi_s.num_elements()
            )));
        }
        if y.shape() != (n_rf, p) {
            return Err(Error::dims(format!("Y is {:?}, expected {:?}", y.shape(), (n_rf, p))));
        }
        let a = c * phi_r.matrix();
        let b = phi_s.matrix().adjoint() * x;
        let a_norms = (0..a.ncols()).map(|i| a.column(i).norm()).collect();
        let b_norms = (0..b.nrows()).map(|j| b.row(j).norm()).collect();
        Ok(Self {
            a,
            b,
            a_norms,
            b_norms,
            y,
        })
    }

    fn rows(&self) -> usize {
        self.a.ncols()
    }

    fn cols(&self) -> usize {
        self.b.nrows()
    }

    fn atom_count(&self) -> usize {
        self.rows() * self.cols()
    }

    /// `|a_iᴴ Y_res b_j*| / (‖a_i‖ ‖b_j‖)` for every pair, row-major.
    fn correlations(&self, residual: &CMat) -> Vec<f64> {
        let g = self.a.adjoint() * residual * self.b.adjoint();
        let nj = self.cols();
        let mut out = vec![0.0; self.atom_count()];
        for i in 0..self.rows() {
            for j in 0..nj {
                let den = self.a_norms[i] * self.b_norms[j];
                out[i * nj + j] = if den > 0.0 { g[(i, j)].norm() / den } else { 0.0 };
            }
        }
        out
    }

    fn solve(&self, support: &[(usize, usize)]) -> Result<WeightSolution> {
        let u = support.len();
        // b_j* for each selected row, as a P x u matrix
        let b_conj = CMat::from_fn(self.b.ncols(), u, |p, n| self.b[(support[n].1, p)].conj());
        let y_b = self.y * &b_conj;
        let f_vec = DVector::from_iterator(
            u,
            (0..u).map(|n| self.a.column(support[n].0).dotc(&y_b.column(n)).conj()),
        );
        let f_mat = CMat::from_fn(u, u, |m, n| {
            let (im, jm) = support[m];
            let (in_, jn) = support[n];
            let ga = self.a.column(in_).dotc(&self.a.column(im));
            let gb: Complex64 = (0..self.b.ncols())
                .map(|p| self.b[(jm, p)] * self.b[(jn, p)].conj())
                .sum();
            ga * gb
        });
        solve_normal_equations(f_mat, f_vec)
    }

    /// `Y - Σ w_n a_{i(n)} b_{j(n)}ᵀ`.
    fn residual(&self, support: &[(usize, usize)], weights: &[Complex64]) -> CMat {
        let u = support.len();
        let a_s = CMat::from_fn(self.a.nrows(), u, |r, n| self.a[(r, support[n].0)] * weights[n]);
        let b_s = CMat::from_fn(u, self.b.ncols(), |n, p| self.b[(support[n].1, p)]);
        self.y - a_s * b_s
    }
}

fn assemble(
    phi_r: &SparsifyingBasis,
    phi_s: &SparsifyingBasis,
    support: &[(usize, usize)],
    weights: &[Complex64],
) -> (CMat, CMat, Vec<SupportEntry>) {
    let mut h_a_hat = CMat::zeros(phi_r.num_atoms(), phi_s.num_atoms());
    let entries: Vec<SupportEntry> = support
        .iter()
        .zip(weights)
        .map(|(&(i, j), &w)| {
            h_a_hat[(i, j)] = w;
            SupportEntry { i, j, weight: w }
        })
        .collect();
    let u = support.len();
    let left = CMat::from_fn(phi_r.num_elements(), u, |r, n| {
        phi_r.matrix()[(r, support[n].0)] * weights[n]
    });
    let right = CMat::from_fn(u, phi_s.num_elements(), |n, s| phi_s.matrix()[(s, support[n].1)].conj());
    (h_a_hat, left * right, entries)
}

/// Rank-one-atom OMP with joint least-squares refits, over arbitrary
/// sparsifying bases. Ties in the correlation go to the lowest row-major
/// pair index.
pub fn basis_omp(
    y: &CMat,
    x: &CMat,
    c: &CMat,
    phi_r: &SparsifyingBasis,
    phi_s: &SparsifyingBasis,
    u_iter: usize,
) -> Result<EstimateResult> {
    let dict = RankOneDictionary::new(y, x, c, phi_r, phi_s)?;
    let total = dict.atom_count();
    if u_iter == 0 || u_iter > total {
        return Err(Error::invalid(format!(
            "iteration count {u_iter} must be in 1..={total}"
        )));
    }
    let nj = dict.cols();
    let mut in_support = vec![false; total];
    let mut support: Vec<(usize, usize)> = Vec::with_capacity(u_iter);
    let mut weights: Vec<Complex64> = Vec::new();
    let mut residual = y.clone();
    let mut history = Vec::with_capacity(u_iter);
    let mut regularized = false;

    for _ in 0..u_iter {
        let corr = dict.correlations(&residual);
        let mut best: Option<usize> = None;
        for (k, &v) in corr.iter().enumerate() {
            if in_support[k] {
                continue;
            }
            match best {
                Some(b) if v <= corr[b] => {}
                _ => best = Some(k),
            }
        }
        let k = best.expect("u_iter <= atom count leaves a free atom");
        in_support[k] = true;
        support.push((k / nj, k % nj));

        let sol = dict.solve(&support)?;
        regularized |= sol.regularized;
        weights = sol.weights;
        residual = dict.residual(&support, &weights);
        history.push(frobenius_sq(&residual).sqrt());
    }

    let (h_a_hat, h_hat, entries) = assemble(phi_r, phi_s, &support, &weights);
    Ok(EstimateResult {
        h_a_hat,
        h_hat,
        support: entries,
        iterations_used: u_iter,
        residual_norm: *history.last().expect("at least one iteration"),
        residual_history: history,
        regularized,
    })
}

/// WD-OMP: [`basis_omp`] with the wavenumber-domain bases `Ψ_R`, `Ψ_S`.
pub fn wd_omp(
    y: &CMat,
    x: &CMat,
    c: &CMat,
    psi_r: &SparsifyingBasis,
    psi_s: &SparsifyingBasis,
    u_iter: usize,
) -> Result<EstimateResult> {
    basis_omp(y, x, c, psi_r, psi_s, u_iter)
}

/// Indices of the `count` largest scores, ties to the lower index.
fn top_indices(scores: &[(usize, f64)], count: usize) -> Vec<usize> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sorted.into_iter().take(count).map(|(k, _)| k).collect()
}

/// CoSaMP over rank-one atoms: identify the `2K` best new pairs, merge,
/// refit, prune to the `K` largest weights, refit, and repeat until
/// `max_iter` or until the residual stops improving.
pub fn basis_cosamp(
    y: &CMat,
    x: &CMat,
    c: &CMat,
    phi_r: &SparsifyingBasis,
    phi_s: &SparsifyingBasis,
    k: usize,
    max_iter: usize,
) -> Result<EstimateResult> {
    let dict = RankOneDictionary::new(y, x, c, phi_r, phi_s)?;
    let total = dict.atom_count();
    if k == 0 || 3 * k > total {
        return Err(Error::invalid(format!("sparsity {k} must satisfy 1 <= 3K <= {total}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let nj = dict.cols();
    let mut support: Vec<usize> = Vec::new();
    let mut weights: Vec<Complex64> = Vec::new();
    let mut residual = y.clone();
    let mut res_norm = frobenius_sq(y).sqrt();
    let mut history = Vec::new();
    let mut regularized = false;
    let mut iterations = 0;
    let pairs = |s: &[usize]| s.iter().map(|&q| (q / nj, q % nj)).collect::<Vec<_>>();

    for _ in 0..max_iter {
        iterations += 1;
        let corr = dict.correlations(&residual);
        let mut in_support = vec![false; total];
        for &q in &support {
            in_support[q] = true;
        }
        let fresh: Vec<(usize, f64)> = corr
            .iter()
            .enumerate()
            .filter(|(q, _)| !in_support[*q])
            .map(|(q, &v)| (q, v))
            .collect();
        let mut merged = support.clone();
        merged.extend(top_indices(&fresh, 2 * k));
        merged.sort_unstable();

        let wide = dict.solve(&pairs(&merged))?;
        regularized |= wide.regularized;
        let scored: Vec<(usize, f64)> = merged.iter().zip(&wide.weights).map(|(&q, w)| (q, w.norm())).collect();
        let mut pruned = top_indices(&scored, k);
        pruned.sort_unstable();

        let narrow = dict.solve(&pairs(&pruned))?;
        regularized |= narrow.regularized;
        let new_residual = dict.residual(&pairs(&pruned), &narrow.weights);
        let new_norm = frobenius_sq(&new_residual).sqrt();

        let improved = new_norm < res_norm * (1.0 - COSAMP_STALL);
        if new_norm <= res_norm || support.is_empty() {
            support = pruned;
            weights = narrow.weights;
            residual = new_residual;
            res_norm = new_norm;
        }
        history.push(res_norm);
        if !improved {
            break;
        }
    }

    let (h_a_hat, h_hat, entries) = assemble(phi_r, phi_s, &pairs(&support), &weights);
    Ok(EstimateResult {
        h_a_hat,
        h_hat,
        support: entries,
        iterations_used: iterations,
        residual_norm: res_norm,
        residual_history: history,
        regularized,
    })
}

/// Minimum-norm least-squares channel `C⁺ Y X⁺`.
pub fn ls_estimate(y: &CMat, x: &CMat, c: &CMat) -> Result<CMat> {
    if y.nrows() != c.nrows() || y.ncols() != x.ncols() {
        return Err(Error::dims(format!(
            "Y is {:?}, C is {:?}, X is {:?}",
            y.shape(),
            c.shape(),
            x.shape()
        )));
    }
    Ok(pinv(c)? * y * pinv(x)?)
}

/// Per-trial `‖Ĥ - H‖_F² / ‖H‖_F²`.
pub fn nmse(h_hat: &CMat, h: &CMat) -> Result<f64> {
    let mut acc = NmseAccumulator::default();
    acc.add(h_hat, h)?;
    acc.nmse()
        .ok_or_else(|| Error::invalid("NMSE is undefined for a zero channel"))
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Ratio-of-expectations NMSE over trials.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NmseAccumulator {
    pub num: f64,
    pub den: f64,
    pub trials: usize,
    pub excluded: usize,
}

impl NmseAccumulator {
    /// Adds one trial. Zero-energy channels are counted as excluded and
    /// return `Ok(false)`.
    pub fn add(&mut self, h_hat: &CMat, h: &CMat) -> Result<bool> {
        if h_hat.shape() != h.shape() {
            return Err(Error::dims(format!("{:?} vs {:?}", h_hat.shape(), h.shape())));
        }
        let den = frobenius_sq(h);
        if den == 0.0 {
            log::warn!("zero-energy channel excluded from NMSE");
            self.excluded += 1;
            return Ok(false);
        }
        self.add_parts(frobenius_sq(&(h_hat - h)), den);
        Ok(true)
    }

    pub fn add_parts(&mut self, num: f64, den: f64) {
        self.num += num;
        self.den += den;
        self.trials += 1;
    }

    pub fn merge(&mut self, other: &NmseAccumulator) {
        self.num += other.num;
        self.den += other.den;
        self.trials += other.trials;
        self.excluded += other.excluded;
    }

    pub fn nmse(&self) -> Option<f64> {
        (self.den > 0.0).then(|| self.num / self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_ad_basis, build_wd_basis, grid_for, UpaGeometry};
    use crate::linalg::max_abs_diff;
    use crate::measurement::{gen_combiner, gen_pilots};
    use crate::rng::{complex_normal, complex_normal_matrix, stream_rng, Stream};

    struct Setup {
        psi_r: SparsifyingBasis,
        psi_s: SparsifyingBasis,
        c: CMat,
        x: CMat,
    }

    fn setup(seed: u64, n_rf: usize, p: usize) -> Setup {
        let rx = UpaGeometry::new(9, 9, 0.25, [0.0; 3]).unwrap();
        let tx = UpaGeometry::new(5, 5, 0.25, [0.0; 3]).unwrap();
        let psi_r = build_wd_basis(&rx, &grid_for(&rx, 1.0).unwrap()).unwrap();
        let psi_s = build_wd_basis(&tx, &grid_for(&tx, 1.0).unwrap()).unwrap();
        let c = gen_combiner(n_rf, 81, &mut stream_rng(seed, 0, Stream::Combiner)).unwrap();
        let x = gen_pilots(25, p, &mut stream_rng(seed, 0, Stream::Pilots)).unwrap();
        Setup { psi_r, psi_s, c, x }
    }

    fn observe_sparse(s: &Setup, entries: &[(usize, usize, Complex64)]) -> (CMat, CMat) {
        let mut h_a = CMat::zeros(s.psi_r.num_atoms(), s.psi_s.num_atoms());
        for &(i, j, w) in entries {
            h_a[(i, j)] = w;
        }
        let h = s.psi_r.matrix() * &h_a * s.psi_s.matrix().adjoint();
        (&s.c * &h * &s.x, h)
    }

    #[test]
    fn single_atom_recovered_in_one_iteration() {
        let s = setup(1, 8, 16);
        let w = Complex64::new(0.7, -1.3);
        let (y, h) = observe_sparse(&s, &[(6, 2, w)]);
        let est = wd_omp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 1).unwrap();
        assert_eq!((est.support[0].i, est.support[0].j), (6, 2));
        assert!((est.support[0].weight - w).norm() < 1e-8);
        assert!(est.residual_norm < 1e-8);
        assert!(nmse(&est.h_hat, &h).unwrap() < 1e-16);
    }

    #[test]
    fn zero_observation_picks_first_atom_with_zero_weight() {
        let s = setup(2, 8, 16);
        let y = CMat::zeros(8, 16);
        let est = wd_omp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 2).unwrap();
        assert_eq!((est.support[0].i, est.support[0].j), (0, 0));
        assert_eq!((est.support[1].i, est.support[1].j), (0, 1));
        assert!(est.support.iter().all(|e| e.weight.norm() == 0.0));
    }

    #[test]
    fn iteration_bounds_checked() {
        let s = setup(3, 8, 16);
        let y = CMat::zeros(8, 16);
        let atoms = s.psi_r.num_atoms() * s.psi_s.num_atoms();
        assert!(wd_omp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 0).is_err());
        assert!(wd_omp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, atoms + 1).is_err());
        assert!(wd_omp(&y.transpose(), &s.x, &s.c, &s.psi_r, &s.psi_s, 1).is_err());
    }

    #[test]
    fn scalar_weight_formula() {
        let mut rng = stream_rng(4, 0, Stream::Aux(0));
        let a = DVector::from_fn(6, |_, _| complex_normal(&mut rng, 1.0));
        let b = DVector::from_fn(5, |_, _| complex_normal(&mut rng, 1.0));
        let y = complex_normal_matrix(&mut rng, 6, 5, 1.0);
        let w = solve_weights(&[(a.clone(), b.clone())], &y).unwrap().weights[0];
        let tr = (&a * b.transpose() * y.adjoint()).trace();
        let expect = tr.conj() / (a.norm_squared() * b.norm_squared());
        assert!((w - expect).norm() < 1e-12);
    }

    #[test]
    fn orthogonal_atoms_give_exact_weights() {
        let e = |n: usize, k: usize| DVector::from_fn(n, |r, _| Complex64::new(if r == k { 1.0 } else { 0.0 }, 0.0));
        let (a1, b1, a2, b2) = (e(3, 0), e(4, 1), e(3, 2), e(4, 3));
        let y = &a1 * b1.transpose() * Complex64::new(2.0, 0.0) + &a2 * b2.transpose() * Complex64::new(0.0, 3.0);
        let sol = solve_weights(&[(a1, b1), (a2, b2)], &y).unwrap();
        assert!((sol.weights[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((sol.weights[1] - Complex64::new(0.0, 3.0)).norm() < 1e-12);
        assert!(!sol.regularized);
    }

    #[test]
    fn duplicated_atom_triggers_regularization() {
        let mut rng = stream_rng(5, 0, Stream::Aux(0));
        let a = DVector::from_fn(4, |_, _| complex_normal(&mut rng, 1.0));
        let b = DVector::from_fn(3, |_, _| complex_normal(&mut rng, 1.0));
        let y = &a * b.transpose();
        let sol = solve_weights(&[(a.clone(), b.clone()), (a, b)], &y).unwrap();
        assert!(sol.regularized);
        let sum = sol.weights[0] + sol.weights[1];
        assert!((sum - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(solve_weights(&[], &y).is_err());
    }

    #[test]
    fn ad_omp_recovers_single_angular_atom() {
        let rx = UpaGeometry::new(5, 5, 0.25, [0.0; 3]).unwrap();
        let tx = UpaGeometry::new(3, 3, 0.25, [0.0; 3]).unwrap();
        let f_r = build_ad_basis(&rx);
        let f_s = build_ad_basis(&tx);
        assert_eq!(f_r.num_atoms() * f_s.num_atoms(), 25 * 9);
        let c = gen_combiner(10, 25, &mut stream_rng(6, 0, Stream::Combiner)).unwrap();
        let x = gen_pilots(9, 12, &mut stream_rng(6, 0, Stream::Pilots)).unwrap();
        let h = f_r.matrix().column(17) * f_s.matrix().column(4).adjoint() * Complex64::new(-1.5, 0.5);
        let y = &c * &h * &x;
        let est = basis_omp(&y, &x, &c, &f_r, &f_s, 1).unwrap();
        assert_eq!((est.support[0].i, est.support[0].j), (17, 4));
        assert!(nmse(&est.h_hat, &h).unwrap() < 1e-16);
    }

    #[test]
    fn cosamp_recovers_planted_support() {
        let s = setup(7, 16, 24);
        let mut rng = stream_rng(7, 0, Stream::Aux(1));
        let planted = [(3, 0), (10, 4), (15, 2), (20, 1)];
        let entries: Vec<_> = planted
            .iter()
            .map(|&(i, j)| (i, j, complex_normal(&mut rng, 1.0)))
            .collect();
        let (y, h) = observe_sparse(&s, &entries);
        let est = basis_cosamp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 4, 20).unwrap();
        assert!(nmse(&est.h_hat, &h).unwrap() < 1e-6);
        let atoms = s.psi_r.num_atoms() * s.psi_s.num_atoms();
        assert!(basis_cosamp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, atoms / 3 + 1, 5).is_err());
        assert!(basis_cosamp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 0, 5).is_err());
    }

    #[test]
    fn cosamp_and_omp_agree_on_first_pick() {
        let s = setup(8, 12, 20);
        let (y, _) = observe_sparse(&s, &[(11, 3, Complex64::new(0.3, 2.0))]);
        let omp = wd_omp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 1).unwrap();
        let cosamp = basis_cosamp(&y, &s.x, &s.c, &s.psi_r, &s.psi_s, 1, 1).unwrap();
        assert_eq!(cosamp.iterations_used, 1);
        assert_eq!(
            (omp.support[0].i, omp.support[0].j),
            (cosamp.support[0].i, cosamp.support[0].j)
        );
    }

    #[test]
    fn ls_square_invertible_is_exact() {
        let mut rng = stream_rng(9, 0, Stream::Aux(0));
        let c = complex_normal_matrix(&mut rng, 6, 6, 1.0);
        let x = complex_normal_matrix(&mut rng, 4, 4, 1.0);
        let h = complex_normal_matrix(&mut rng, 6, 4, 1.0);
        let y = &c * &h * &x;
        assert!(max_abs_diff(&ls_estimate(&y, &x, &c).unwrap(), &h) < 1e-10);
        let zero = ls_estimate(&CMat::zeros(6, 4), &x, &c).unwrap();
        assert!(zero.iter().all(|z| z.norm() < 1e-300));
    }

    #[test]
    fn nmse_examples() {
        let h = CMat::from_fn(3, 2, |r, c| Complex64::new(r as f64 + 1.0, c as f64));
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&CMat::zeros(3, 2), &h).unwrap() - 1.0).abs() < 1e-15);
        assert!((nmse(&(&h * Complex64::new(2.0, 0.0)), &h).unwrap() - 1.0).abs() < 1e-15);
        assert!(nmse(&h, &CMat::zeros(3, 2)).is_err());
        let mut acc = NmseAccumulator::default();
        assert!(!acc.add(&h, &CMat::zeros(3, 2)).unwrap());
        assert_eq!(acc.excluded, 1);
        assert_eq!(acc.nmse(), None);
    }
}

//! The pilot observation model `Y = C H X + N`.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{check_mul, frobenius_sq, CMat};
use crate::rng::{complex_normal, complex_normal_matrix};
use crate::{Error, Result};

/// Pilots, combiner and the noisy received block for one trial.
#[derive(Debug, Clone)]
pub struct PilotObservation {
    pub x: CMat,
    pub c: CMat,
    pub y: CMat,
    pub noise_variance: f64,
    pub snr_db: f64,
}

impl PilotObservation {
    pub fn pilot_length(&self) -> usize {
        self.x.ncols()
    }

    pub fn rf_chains(&self) -> usize {
        self.c.nrows()
    }

    /// `P N_RF / (N_S N_R)`.
    pub fn compression_ratio(&self) -> f64 {
        (self.x.ncols() * self.c.nrows()) as f64 / (self.x.nrows() * self.c.ncols()) as f64
    }
}

/// `N_S x P` pilots with i.i.d. equiprobable entries `±1/sqrt(N_S)`, drawn
/// one pilot slot (column) at a time.
pub fn gen_pilots<R: Rng + ?Sized>(n_s: usize, p: usize, rng: &mut R) -> Result<CMat> {
    if n_s == 0 || p == 0 {
        return Err(Error::invalid("pilot dimensions must be positive"));
    }
    let amp = 1.0 / (n_s as f64).sqrt();
    let mut x = CMat::zeros(n_s, p);
    for c in 0..p {
        for r in 0..n_s {
            x[(r, c)] = Complex64::new(if rng.random::<bool>() { amp } else { -amp }, 0.0);
        }
    }
    Ok(x)
}

/// `N_RF x N_R` combiner with i.i.d. CN(0, 1/N_R) entries.
pub fn gen_combiner<R: Rng + ?Sized>(n_rf: usize, n_r: usize, rng: &mut R) -> Result<CMat> {
    if n_rf == 0 || n_r == 0 {
        return Err(Error::invalid("combiner dimensions must be positive"));
    }
    if n_rf > n_r {
        return Err(Error::invalid(format!(
            "{n_rf} RF chains exceed {n_r} receive antennas"
        )));
    }
    Ok(complex_normal_matrix(rng, n_rf, n_r, 1.0 / n_r as f64))
}

/// Noise variance giving `‖CHX‖_F² / (P N_RF σ_n²) = 10^(snr_db/10)`.
pub fn noise_variance_for_snr(c: &CMat, h: &CMat, x: &CMat, snr_db: f64) -> Result<f64> {
    check_mul(c.shape(), h.shape(), "C * H")?;
    check_mul(h.shape(), x.shape(), "H * X")?;
    let signal = frobenius_sq(&(c * h * x));
    if signal == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let p = x.ncols() as f64;
    let n_rf = c.nrows() as f64;
    Ok(signal / (p * n_rf * 10f64.powf(snr_db / 10.0)))
}

/// `C H X + N` with `N` i.i.d. CN(0, noise_variance), drawn row-major.
pub fn observe<R: Rng + ?Sized>(h: &CMat, x: &CMat, c: &CMat, noise_variance: f64, rng: &mut R) -> Result<CMat> {
    check_mul(c.shape(), h.shape(), "C * H")?;
    check_mul(h.shape(), x.shape(), "H * X")?;
    if !(noise_variance >= 0.0) {
        return Err(Error::invalid(format!("noise variance {noise_variance} is negative")));
    }
    let mut y = c * h * x;
    if noise_variance > 0.0 {
        for r in 0..y.nrows() {
            for col in 0..y.ncols() {
                y[(r, col)] += complex_normal(rng, noise_variance);
            }
        }
    }
    Ok(y)
}

/// Folds coupling into the front end: `C' = C M_R`, `X' = M_S X`.
pub fn fold_coupling(c: &CMat, x: &CMat, m_r: &CMat, m_s: &CMat) -> Result<(CMat, CMat)> {
    check_mul(c.shape(), m_r.shape(), "C * M_R")?;
    check_mul(m_s.shape(), x.shape(), "M_S * X")?;
    Ok((c * m_r, m_s * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn pilot_columns_have_unit_norm() {
        let mut rng = stream_rng(1, 0, Stream::Pilots);
        let x = gen_pilots(25, 40, &mut rng).unwrap();
        for c in 0..40 {
            let n: f64 = x.column(c).iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
        assert!(x.iter().all(|z| z.im == 0.0 && (z.re.abs() - 0.2).abs() < 1e-15));
    }

    #[test]
    fn pilots_are_balanced_and_reproducible() {
        let x = gen_pilots(100, 100, &mut stream_rng(2, 0, Stream::Pilots)).unwrap();
        let mean: f64 = x.iter().map(|z| z.re).sum::<f64>() / 1e4;
        // entries are ±0.1, so the CLT scale of the mean is 0.1/100
        assert!(mean.abs() < 3.0 * 0.1 / 100.0);
        assert_eq!(x, gen_pilots(100, 100, &mut stream_rng(2, 0, Stream::Pilots)).unwrap());
    }

    #[test]
    fn pilot_prefix_is_shared_across_lengths() {
        let short = gen_pilots(9, 8, &mut stream_rng(3, 1, Stream::Pilots)).unwrap();
        let long = gen_pilots(9, 16, &mut stream_rng(3, 1, Stream::Pilots)).unwrap();
        assert_eq!(short, long.columns(0, 8).into_owned());
    }

    #[test]
    fn combiner_statistics() {
        let n_r = 100;
        let c = gen_combiner(1000, n_r, &mut stream_rng(4, 0, Stream::Combiner)).unwrap_err();
        assert!(matches!(c, Error::InvalidParameter(_)));
        let mut rng = stream_rng(4, 0, Stream::Combiner);
        let mut row_norms = 0.0;
        let mut var = 0.0;
        let rows = 1000;
        for _ in 0..(rows / 100) {
            let c = gen_combiner(100, n_r, &mut rng).unwrap();
            for r in 0..100 {
                let n: f64 = c.row(r).iter().map(|z| z.norm_sqr()).sum();
                row_norms += n;
                var += n;
            }
        }
        let mean_row = row_norms / rows as f64;
        assert!((mean_row - 1.0).abs() < 0.05);
        let entry_var = var / (rows * n_r) as f64;
        assert!((entry_var * n_r as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn noise_variance_scaling() {
        let mut rng = stream_rng(5, 0, Stream::Aux(0));
        let c = gen_combiner(4, 9, &mut rng).unwrap();
        let h = complex_normal_matrix(&mut rng, 9, 4, 1.0);
        let x = gen_pilots(4, 6, &mut rng).unwrap();
        let s = frobenius_sq(&(&c * &h * &x));
        let v0 = noise_variance_for_snr(&c, &h, &x, 0.0).unwrap();
        assert!((v0 - s / 24.0).abs() < 1e-12 * s);
        let h2 = &h * Complex64::new(2.0, 0.0);
        let v2 = noise_variance_for_snr(&c, &h2, &x, 7.0).unwrap();
        let v1 = noise_variance_for_snr(&c, &h, &x, 7.0).unwrap();
        assert!((v2 / v1 - 4.0).abs() < 1e-12);
        assert!(noise_variance_for_snr(&c, &h, &x, 300.0).unwrap() < 1e-25);
        let zero = CMat::zeros(9, 4);
        assert!(matches!(
            noise_variance_for_snr(&c, &zero, &x, 0.0),
            Err(Error::DegenerateSignal)
        ));
    }

    #[test]
    fn noiseless_observation_is_exact_and_linear() {
        let mut rng = stream_rng(6, 0, Stream::Aux(0));
        let c = gen_combiner(3, 9, &mut rng).unwrap();
        let x = gen_pilots(4, 5, &mut rng).unwrap();
        let h1 = complex_normal_matrix(&mut rng, 9, 4, 1.0);
        let h2 = complex_normal_matrix(&mut rng, 9, 4, 1.0);
        let y1 = observe(&h1, &x, &c, 0.0, &mut rng).unwrap();
        assert_eq!(y1, &c * &h1 * &x);
        let y2 = observe(&h2, &x, &c, 0.0, &mut rng).unwrap();
        let y12 = observe(&(&h1 + &h2), &x, &c, 0.0, &mut rng).unwrap();
        assert!(crate::linalg::max_abs_diff(&y12, &(y1 + y2)) < 1e-14);
        assert!(observe(&h1, &x, &c, -1.0, &mut rng).is_err());
        assert!(observe(&h1.transpose(), &x, &c, 0.0, &mut rng).is_err());
    }

    #[test]
    fn pure_noise_variance() {
        let c = CMat::identity(100, 100);
        let x = CMat::identity(1, 100);
        let h = CMat::zeros(100, 1);
        let y = observe(&h, &x, &c, 0.7, &mut stream_rng(7, 0, Stream::Noise(0))).unwrap();
        let v = frobenius_sq(&y) / 1e4;
        assert!((v / 0.7 - 1.0).abs() < 0.05);
    }

    #[test]
    fn coupling_folds_into_front_end() {
        let mut rng = stream_rng(8, 0, Stream::Aux(0));
        let c = gen_combiner(2, 5, &mut rng).unwrap();
        let x = gen_pilots(3, 4, &mut rng).unwrap();
        let h = complex_normal_matrix(&mut rng, 5, 3, 1.0);
        let m_r = complex_normal_matrix(&mut rng, 5, 5, 1.0);
        let m_s = complex_normal_matrix(&mut rng, 3, 3, 1.0);
        let coupled = crate::channel::apply_coupling(&h, &m_r, &m_s).unwrap();
        let (c2, x2) = fold_coupling(&c, &x, &m_r, &m_s).unwrap();
        let a = &c * coupled * &x;
        let b = c2 * &h * x2;
        assert!(crate::linalg::max_abs_diff(&a, &b) < 1e-12);
    }
}

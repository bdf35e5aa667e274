use std::f64::consts::PI;

use holosparse::estimators::{basis_omp, solve_weights, NmseAccumulator};
use holosparse::geometry::{build_wd_basis, enumerate_wavenumber_set, grid_for, UpaGeometry};
use holosparse::measurement::{gen_combiner, gen_pilots};
use holosparse::rng::{complex_normal, complex_normal_matrix, stream_rng, Stream};
use holosparse::scattering::significant_count;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn lattice_matches_brute_force(lx in 0.3f64..9.0, ly in 0.3f64..9.0) {
        let grid = enumerate_wavenumber_set(lx, ly, 1.0).unwrap();
        let mut expected = Vec::new();
        for a in -10i32..=10 {
            for b in -10i32..=10 {
                let v = (a as f64 / lx).powi(2) + (b as f64 / ly).powi(2);
                if v <= 1.0 {
                    expected.push((a, b));
                }
            }
        }
        // Boundary points within rounding of the ellipse may go either way.
        let diff: Vec<_> = grid.indices().iter().filter(|p| !expected.contains(p)).collect();
        for &&(a, b) in &diff {
            let v = (a as f64 / lx).powi(2) + (b as f64 / ly).powi(2);
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
        prop_assert!(expected.iter().all(|p| grid.indices().contains(p)));
        prop_assert!(grid.indices().iter().all(|&(a, b)| grid.indices().contains(&(-a, -b))));
        prop_assert!(grid.indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lattice_depends_only_on_aperture_over_wavelength(ratio in 0.5f64..8.0, scale in 0.001f64..10.0) {
        let a = enumerate_wavenumber_set(ratio, ratio, 1.0).unwrap();
        let b = enumerate_wavenumber_set(ratio * scale, ratio * scale, scale).unwrap();
        prop_assert_eq!(a.indices(), b.indices());
    }

    #[test]
    fn wd_columns_have_unit_norm(half in 1usize..8, spacing in 0.1f64..0.5) {
        let n = 2 * half + 1;
        let g = UpaGeometry::new(n, n, spacing, [0.0; 3]).unwrap();
        let psi = build_wd_basis(&g, &grid_for(&g, 1.0).unwrap()).unwrap();
        for c in 0..psi.num_atoms() {
            prop_assert!((psi.matrix().column(c).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refit_residual_is_orthogonal_to_atoms(seed in any::<u64>(), u in 1usize..6) {
        let mut rng = stream_rng(seed, 0, Stream::Aux(0));
        let atoms: Vec<_> = (0..u)
            .map(|_| {
                (
                    DVector::from_fn(7, |_, _| complex_normal(&mut rng, 1.0)),
                    DVector::from_fn(9, |_, _| complex_normal(&mut rng, 1.0)),
                )
            })
            .collect();
        let y = complex_normal_matrix(&mut rng, 7, 9, 1.0);
        let w = solve_weights(&atoms, &y).unwrap().weights;
        let mut r = y.clone();
        for (n, (a, b)) in atoms.iter().enumerate() {
            r -= a * b.transpose() * w[n];
        }
        for (a, b) in &atoms {
            // <a bᵀ, R> in the Frobenius inner product.
            let ip: Complex64 = (a.adjoint() * &r * b.map(|z| z.conj()))[(0, 0)];
            prop_assert!(ip.norm() < 1e-9 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn omp_residual_is_monotone_and_support_unique(seed in any::<u64>(), u in 1usize..10) {
        let rx = UpaGeometry::new(7, 7, 0.25, [0.0; 3]).unwrap();
        let tx = UpaGeometry::new(3, 3, 0.25, [0.0; 3]).unwrap();
        let pr = build_wd_basis(&rx, &grid_for(&rx, 1.0).unwrap()).unwrap();
        let ps = build_wd_basis(&tx, &grid_for(&tx, 1.0).unwrap()).unwrap();
        let c = gen_combiner(6, 49, &mut stream_rng(seed, 0, Stream::Combiner)).unwrap();
        let x = gen_pilots(9, 8, &mut stream_rng(seed, 0, Stream::Pilots)).unwrap();
        let y = complex_normal_matrix(&mut stream_rng(seed, 0, Stream::Noise(0)), 6, 8, 1.0);
        let est = basis_omp(&y, &x, &c, &pr, &ps, u).unwrap();
        let h = &est.residual_history;
        prop_assert!(h.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-12));
        let mut pairs: Vec<_> = est.support.iter().map(|e| (e.i, e.j)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        prop_assert_eq!(pairs.len(), est.support.len());
        prop_assert!(est.support.len() <= u);
    }

    #[test]
    fn significant_count_is_monotone(values in prop::collection::vec(0.0f64..1.0, 1..60), f in 0.05f64..0.95) {
        prop_assume!(values.iter().sum::<f64>() > 0.0);
        let lo = significant_count(&values, f).unwrap();
        let hi = significant_count(&values, (f + 0.04).min(1.0)).unwrap();
        prop_assert!(1 <= lo && lo <= hi && hi <= values.len());
    }

    #[test]
    fn accumulator_merge_matches_sequential(parts in prop::collection::vec((0.0f64..5.0, 0.1f64..5.0), 1..40), split in 0usize..40) {
        let split = split.min(parts.len());
        let mut all = NmseAccumulator::default();
        let (mut a, mut b) = (NmseAccumulator::default(), NmseAccumulator::default());
        for (k, &(n, d)) in parts.iter().enumerate() {
            all.add_parts(n, d);
            if k < split { a.add_parts(n, d) } else { b.add_parts(n, d) }
        }
        a.merge(&b);
        let expected = parts.iter().map(|p| p.0).sum::<f64>() / parts.iter().map(|p| p.1).sum::<f64>();
        prop_assert_eq!(a.trials, parts.len());
        prop_assert!((a.nmse().unwrap() - expected).abs() < 1e-12 * (1.0 + expected));
        prop_assert!((all.nmse().unwrap() - expected).abs() < 1e-12 * (1.0 + expected));
    }
}

#[test]
fn streams_are_independent() {
    // Same trial, different tags: correlation of the uniform draws stays small.
    let draw = |s: Stream| -> Vec<f64> {
        let mut rng = stream_rng(7, 3, s);
        (0..20_000).map(|_| rand::Rng::random::<f64>(&mut rng) - 0.5).collect()
    };
    let a = draw(Stream::Pilots);
    let b = draw(Stream::Combiner);
    let c = draw(Stream::Noise(0));
    let corr = |x: &[f64], y: &[f64]| {
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        dot / (x.iter().map(|p| p * p).sum::<f64>() * y.iter().map(|q| q * q).sum::<f64>()).sqrt()
    };
    // 5 sigma for 2e4 samples.
    assert!(corr(&a, &b).abs() < 5.0 / (20_000f64).sqrt());
    assert!(corr(&a, &c).abs() < 5.0 / (20_000f64).sqrt());
    assert_eq!(a, draw(Stream::Pilots));
}

#[test]
fn angles_cover_the_upper_hemisphere() {
    // Sanity of the sampled cluster ranges used by the bench.
    let mut rng = stream_rng(11, 0, Stream::Clusters);
    let p = holosparse::scattering::ScatteringProfile::random(
        &mut rng,
        500,
        140.0,
        (0.0, PI / 2.0),
        (0.0, 2.0 * PI),
        holosparse::scattering::Side::Receive,
    )
    .unwrap();
    let mean_theta = p.clusters().iter().map(|c| c.mean_direction()[2].acos()).sum::<f64>() / 500.0;
    assert!((mean_theta - PI / 4.0).abs() < 0.1);
    assert!(p.clusters().iter().all(|c| c.mean_direction()[2] >= -1e-12));
}

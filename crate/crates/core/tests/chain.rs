use mep_qlab::chain::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn mode_matrix_orthogonal() {
    for n in (2..=64).chain([100, 255, 256, 512]) {
        let y = mode_matrix(n).unwrap();
        let d = &y * y.transpose() - DMatrix::identity(n, n);
        assert!(d.amax() < 1e-12, "N = {n}: {}", d.amax());
    }
}

#[test]
fn modes_diagonalize_the_hamiltonian() {
    for n in [2, 3, 4, 9, 64, 257, 512] {
        let (mu, kappa) = (1.7, 0.8);
        let y = mode_matrix(n).unwrap();
        let k = &y * coupling_matrix(n, kappa) * y.transpose();
        let w = mode_frequencies(n, kappa, mu);
        let scale = k.amax();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { mu * w[i] * w[i] } else { 0.0 };
                assert!((k[(i, j)] - want).abs() < 1e-10 * scale.max(1.0), "N = {n} ({i},{j})");
            }
        }
    }
}

#[test]
fn frequencies_match_numerical_spectrum() {
    for n in [2, 5, 16, 128] {
        let (mu, kappa) = (0.6, 1.9);
        let mut num: Vec<f64> = (coupling_matrix(n, kappa) / mu)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        num.sort_by(f64::total_cmp);
        // squared, so the zero mode is not amplified by the square root
        for (a, b) in num.iter().zip(mode_frequencies(n, kappa, mu)) {
            assert!((a - b * b).abs() < 1e-10, "N = {n}: {a} {}", b * b);
        }
    }
}

#[test]
fn only_odd_modes_change_the_length() {
    for n in [2, 3, 10, 11, 300] {
        let c = length_coefficients(n).unwrap();
        let y = mode_matrix(n).unwrap();
        for (m, cm) in c.iter().enumerate() {
            if m % 2 == 0 {
                assert!(cm.abs() < 1e-12);
            } else {
                assert!((cm + 2.0 * y[(m, 0)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn mode_sum_matches_gibbs_trace() {
    for (lambda, kappa, mu, hbar) in [(1.0, 1.0, 1.0, 1.0), (0.8, 1.4, 0.7, 1.0), (2.5, 0.9, 1.2, 0.8)] {
        let p = ChainParams::new(4, mu, kappa, 1.0, lambda, hbar).unwrap();
        let r = length_statistics(&p);
        let brute = gibbs_length_variance(&p, 40).unwrap();
        assert!((r.dl * r.dl - brute).abs() < 1e-8, "{} vs {brute}", r.dl * r.dl);
    }
}

#[test]
fn relative_width_scales_as_inverse_root_n() {
    let ns: Vec<usize> = (6..=12).map(|k| 1 << k).collect();
    let rows = scaling_study(&ChainParams::<f64>::unit(2).unwrap(), &ns).unwrap();
    let slope = scaling_slope(&rows).unwrap();
    assert!((slope + 0.5).abs() < 0.02, "{slope}");
    for r in &rows {
        assert_eq!(r.l_avg, (r.n - 1) as f64);
    }
}

#[test]
fn energy_fluctuations_shrink_with_n() {
    let base = ChainParams::new(2, 1.0_f64, 1.0, 1.0, 0.5, 1.0).unwrap();
    let rel: Vec<f64> = [4, 16, 64, 256, 1024]
        .iter()
        .map(|&n| {
            let p = base.with_n(n).unwrap();
            energy_variance(&p).sqrt() / internal_energy(&p)
        })
        .collect();
    assert!(rel.windows(2).all(|w| w[1] < w[0]), "{rel:?}");
}

#[test]
fn colder_chains_need_larger_lambda() {
    let p = ChainParams::<f64>::unit(32).unwrap();
    let mut last = 0.0;
    for e in [100.0, 10.0, 1.0, 0.1, 1e-3] {
        let l = solve_lambda(&p, e).unwrap();
        assert!(l > last);
        last = l;
    }
}

#[test]
fn scaling_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.csv");
    let rows = scaling_study(&ChainParams::<f64>::unit(2).unwrap(), &[64, 128]).unwrap();
    write_scaling_csv(&path, &rows).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["N", "L_avg", "dL", "ratio", "asymptote", "rel_err"]);
    assert_eq!(rd.records().count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn solved_lambda_round_trips(n in 2usize..200, e in 1e-3f64..1e3, mu in 0.3f64..3.0, kappa in 0.3f64..3.0) {
        let p = ChainParams::new(n, mu, kappa, 1.0, 1.0, 1.0).unwrap();
        let lambda = solve_lambda(&p, e).unwrap();
        let back = internal_energy(&p.with_lambda(lambda).unwrap());
        prop_assert!((back / e - 1.0).abs() < 1e-10);
    }

    #[test]
    fn average_length_exact(n in 2usize..5000, xi in 0.1f64..10.0) {
        let p = ChainParams::new(n, 1.0, 1.0, xi, 1.0, 1.0).unwrap();
        let r = length_statistics(&p);
        prop_assert!((r.l_avg - (n - 1) as f64 * xi).abs() <= 1e-12 * r.l_avg);
    }
}

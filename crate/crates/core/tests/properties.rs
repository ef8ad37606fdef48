use lincfa::io::{load_partition, save_partition, PartitionDocument};
use lincfa::threshold::{
    delta_bias_3d, delta_bias_asymptotic, delta_bias_finite_equal, delta_bias_general, delta_var_asymptotic,
    delta_var_general, threshold_3d_interval,
};
use lincfa::{
    fit_transform, pca_fit, pca_transform, sample_correlation, sample_covariance, standardize, Dataset, ReducerConfig,
    Threshold, ThresholdInputs, ThresholdKind,
};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = (Dataset<f64>, Vec<f64>)> {
    (10usize..40, 2usize..6).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), d),
            prop::collection::vec(-5.0f64..5.0, d),
            prop::collection::vec(-1.0f64..1.0, n),
        )
            .prop_map(move |(mut cols, w, noise)| {
                // give some pairs a shared component so merges happen
                for j in 1..d {
                    if j % 2 == 1 {
                        let prev = cols[j - 1].clone();
                        for (v, p) in cols[j].iter_mut().zip(prev) {
                            *v = 0.9 * p + 0.1 * *v;
                        }
                    }
                }
                let y = (0..n).map(|r| (0..d).map(|j| w[j] * cols[j][r]).sum::<f64>() + noise[r]).collect();
                let names = (0..d).map(|j| format!("x{j}")).collect();
                (Dataset::from_columns(names, cols).unwrap(), y)
            })
    })
}

fn pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-10.0f64..10.0, n),
        prop::collection::vec(-10.0f64..10.0, n),
        prop::collection::vec(-10.0f64..10.0, n),
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn bits(d: &Dataset<f64>) -> Vec<u64> {
    d.columns().iter().flatten().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn covariance_is_symmetric_and_bilinear((x, z, y) in pair(20), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let cxy = sample_covariance(&x, &y).unwrap();
        prop_assert_eq!(cxy, sample_covariance(&y, &x).unwrap());
        let mix: Vec<f64> = x.iter().zip(&z).map(|(p, q)| a * p + b * q).collect();
        let lhs = sample_covariance(&mix, &y).unwrap();
        let rhs = a * cxy + b * sample_covariance(&z, &y).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn correlation_ignores_affine_rescaling((x, y, _) in pair(15), a in 0.1f64..50.0, c in -100.0f64..100.0) {
        let r = sample_correlation(&x, &y).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| a * v + c).collect();
        prop_assert!(close(sample_correlation(&scaled, &y).unwrap(), r, 1e-10));
        let flipped: Vec<f64> = x.iter().map(|v| -a * v + c).collect();
        prop_assert!(close(sample_correlation(&flipped, &y).unwrap(), -r, 1e-10));
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn closed_form_gaps_are_nonnegative(
        w1 in -5.0f64..5.0, w2 in -5.0f64..5.0, rho in -0.99f64..0.99,
        v1 in 0.01f64..10.0, v2 in 0.01f64..10.0, sigma2 in 0.0f64..100.0, n in 3usize..5000,
        sv1 in 0.01f64..10.0, sv2 in 0.01f64..10.0, sr in -0.99f64..0.99,
    ) {
        let scov = sr * (sv1 * sv2).sqrt();
        prop_assert!(delta_var_asymptotic(sigma2, n).unwrap() >= 0.0);
        prop_assert!(delta_bias_asymptotic(w1, w2, v1, v2, rho).unwrap() >= 0.0);
        prop_assert!(delta_bias_finite_equal(w1, w2, v1, rho).unwrap() >= 0.0);
        prop_assert!(delta_var_general(sigma2, n, rho, sv1, sv2, scov).unwrap() >= 0.0);
        prop_assert!(delta_bias_general(w1, w2, rho, sv1, sv2, scov).unwrap() >= 0.0);
    }

    #[test]
    fn interval_matches_direct_comparison(
        w1 in -1.0f64..1.0, w2 in -1.0f64..1.0, w3 in -1.0f64..1.0,
        r13 in -1.0f64..1.0, r23 in -1.0f64..1.0, sx3 in 0.5f64..2.0,
        sigma2 in 0.001f64..10.0, rho in -0.999f64..0.999,
    ) {
        let n = 300;
        let d = threshold_3d_interval(&ThresholdInputs::new(sigma2, n, w1, w2, rho).with_third_feature(w3, r13, r23, sx3)).unwrap();
        if let Threshold::Interval { lower, upper } = d.threshold {
            prop_assume!((rho - lower).abs() > 1e-9 && (rho - upper).abs() > 1e-9);
        }
        let gap = sigma2 / (n - 1) as f64 - delta_bias_3d(w1, w2, w3, rho, r13, r23, sx3).unwrap();
        prop_assume!(gap.abs() > 1e-12);
        prop_assert_eq!(d.aggregate, gap >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reducer_partition_is_valid_and_transform_is_stable((x, y) in dataset()) {
        let cfg = ReducerConfig::empirical(ThresholdKind::Asymptotic);
        let (fitted, out) = fit_transform(&x, &y, &cfg).unwrap();
        prop_assert!(fitted.partition.validate().is_ok());
        prop_assert_eq!(fitted.d(), out.dim());
        prop_assert!(fitted.d() >= 1 && fitted.d() <= x.dim());
        let again = fitted.transform(&x).unwrap();
        prop_assert_eq!(bits(&out), bits(&again));
        prop_assert_eq!(out.names(), again.names());
    }

    #[test]
    fn partition_document_reloads_bit_exactly((x, y) in dataset()) {
        let cfg = ReducerConfig::empirical(ThresholdKind::FiniteEqual);
        let (fitted, out) = fit_transform(&x, &y, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        save_partition(&path, &PartitionDocument::from_fitted(&fitted, &cfg)).unwrap();
        let reloaded = load_partition::<f64>(&path).unwrap().to_fitted().unwrap();
        prop_assert_eq!(&reloaded.partition, &fitted.partition);
        prop_assert_eq!(bits(&reloaded.transform(&x).unwrap()), bits(&out));
    }

    #[test]
    fn pca_spectrum_and_projection((x, _) in dataset(), frac in 0.5f64..1.0) {
        let (z, _) = standardize(&x).unwrap();
        let m = pca_fit(&z, frac).unwrap();
        let dim = x.dim();
        for k in 1..dim {
            prop_assert!(m.eigenvalues[k] <= m.eigenvalues[k - 1]);
            prop_assert!(m.explained(k + 1) >= m.explained(k));
        }
        prop_assert!(m.eigenvalues.iter().all(|&e| e >= 0.0));
        prop_assert!(m.explained(m.retained) >= frac - 1e-12);
        prop_assert!(m.retained == 1 || m.explained(m.retained - 1) < frac);
        for i in 0..m.retained {
            for j in 0..m.retained {
                let dot: f64 = m.components.row(i).iter().zip(m.components.row(j)).map(|(a, b)| a * b).sum();
                prop_assert!((dot - f64::from(u8::from(i == j))).abs() < 1e-8);
            }
        }
        let t = pca_transform(&m, &z).unwrap();
        for i in 0..m.retained {
            for j in 0..m.retained {
                let c = sample_covariance(t.column(i), t.column(j)).unwrap();
                let want = if i == j { m.eigenvalues[i] } else { 0.0 };
                prop_assert!((c - want).abs() < 1e-8, "cov[{}][{}] = {} vs {}", i, j, c, want);
            }
        }
    }
}

#[test]
fn pca_retains_two_of_three_constructed_eigenvalues() {
    // orthonormalized columns scaled so the sample covariance has
    // eigenvalues exactly 3, 1 and 0.1 along rotated axes
    let n = 400;
    let raw: Vec<Vec<f64>> = (0..3)
        .map(|j| (0..n).map(|r| ((r * (j + 2) * 7919 % 1009) as f64 / 1009.0 - 0.5) * (1.0 + r as f64 * 1e-3)).collect())
        .collect();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for col in raw {
        let mu = col.iter().sum::<f64>() / n as f64;
        let mut v: Vec<f64> = col.iter().map(|c| c - mu).collect();
        for q in &ortho {
            let p: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        ortho.push(v.into_iter().map(|a| a / norm).collect());
    }
    let scale = [3.0f64, 1.0, 0.1].map(|l| (l * (n - 1) as f64).sqrt());
    let (c, s) = (0.6f64, 0.8f64);
    let rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..n).map(|r| (0..3).map(|k| rot[i][k] * scale[k] * ortho[k][r]).sum()).collect())
        .collect();
    let d = Dataset::from_columns(vec!["a".into(), "b".into(), "c".into()], cols).unwrap();
    let m = pca_fit(&d, 0.95).unwrap();
    for (got, want) in m.eigenvalues.iter().zip([3.0, 1.0, 0.1]) {
        assert!((got - want).abs() < 1e-9, "{:?}", m.eigenvalues);
    }
    assert_eq!(m.retained, 2);
    assert!((m.explained(2) - 4.0 / 4.1).abs() < 1e-12);
}

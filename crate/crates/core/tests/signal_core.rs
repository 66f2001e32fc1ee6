mod common;

use std::f64::consts::{PI, SQRT_2};

use common::*;
use rand_distr::{Distribution, StandardNormal};
use sica_core::*;

#[test]
fn time_grid_rejects_bad_parameters() {
    assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
    assert!(TimeGrid::new(0.0, -1.0, 10).is_err());
    assert!(TimeGrid::new(0.0, 0.1, 1).is_err());
    let g = TimeGrid::new(1.0, 0.5, 4).unwrap();
    assert_eq!(g.times(), vec![1.0, 1.5, 2.0, 2.5]);
}

#[test]
fn ensemble_rejects_non_finite_and_ragged() {
    let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
    let err = Ensemble::new(g, vec![vec![1.0, f64::NAN, 0.0]]).unwrap_err();
    assert!(matches!(err, Error::NonFinite { channel: 0, sample: 1 }), "{err}");
    assert!(matches!(Ensemble::new(g, vec![vec![1.0, 2.0]]), Err(Error::DimensionMismatch { .. })));
    assert!(Ensemble::new(g, vec![]).is_err());
}

#[test]
fn collinear_channels_are_rank_deficient() {
    let g = grid_400();
    let c = cosine(&g, 1.0, 0.0, 1.0);
    let raw = Ensemble::new(g, vec![c.clone(), c.iter().map(|v| 2.0 * v).collect()]).unwrap();
    assert!(matches!(whiten(&raw, g.full()), Err(Error::RankDeficient { .. })));
}

#[test]
fn short_window_is_rejected() {
    let g = grid_400();
    let raw = Ensemble::new(g, vec![cosine(&g, 1.0, 0.0, 1.0), cosine(&g, 2.0, 0.3, 1.0)]).unwrap();
    assert!(matches!(whiten(&raw, 0..2), Err(Error::WindowTooShort { .. })));
    assert!(matches!(whiten(&raw, 10..500), Err(Error::InvalidWindow { .. })));
}

#[test]
fn white_noise_whitening_is_near_identity() {
    let g = TimeGrid::new(0.0, 1.0, 20000).unwrap();
    let mut r = rng(3);
    let x: Vec<f64> = (0..20000).map(|_| StandardNormal.sample(&mut r)).collect();
    let wh = whiten(&Ensemble::new(g, vec![x]).unwrap(), g.full()).unwrap();
    assert!(wh.means()[0].abs() < 0.03);
    assert!((wh.whitening_matrix()[(0, 0)] - 1.0).abs() < 0.03);
}

#[test]
fn three_cosines_whiten_to_identity() {
    let g = grid_400();
    let raw =
        Ensemble::new(g, vec![cosine(&g, 1.0, 0.0, 1.0), cosine(&g, SQRT_2, 0.0, 1.0), cosine(&g, 2.0, 0.0, 1.0)])
            .unwrap();
    let wh = whiten(&raw, g.full()).unwrap();
    let cov = covariance(wh.channels(), g.full());
    let mut frob = 0.0;
    for (i, row) in cov.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            frob += (v - if i == j { 1.0 } else { 0.0 }).powi(2);
        }
    }
    assert!(frob.sqrt() < 1e-8, "covariance deviation {}", frob.sqrt());
    for ch in wh.channels() {
        assert!((ch.iter().sum::<f64>() / 400.0).abs() < 1e-10);
    }
    // the stored map reproduces the channels
    for k in [0, 17, 399] {
        for i in 0..3 {
            let v: f64 = (0..3).map(|j| wh.whitening_matrix()[(i, j)] * (raw.channels()[j][k] - wh.means()[j])).sum();
            assert!((v - wh.channels()[i][k]).abs() < 1e-10);
        }
    }
}

#[test]
fn whitening_is_idempotent() {
    let mut r = rng(11);
    let g = grid_400();
    let a = random_matrix(&mut r, 3);
    let raw = Ensemble::new(
        g,
        mix(&a, &[cosine(&g, 1.0, 0.0, 1.0), cosine(&g, SQRT_2, 0.4, 1.0), cosine(&g, 2.0, 1.0, 1.0)]),
    )
    .unwrap();
    let once = whiten(&raw, 0..300).unwrap();
    let twice = whiten(&once.to_ensemble(), 0..300).unwrap();
    let w = twice.whitening_matrix();
    for i in 0..3 {
        for j in 0..3 {
            assert!((w[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-6);
        }
        for k in 0..400 {
            assert!((once.channels()[i][k] - twice.channels()[i][k]).abs() < 1e-6);
        }
    }
}

#[test]
fn cgf_of_constant_and_zero() {
    let s = vec![0.7; 50];
    let est = empirical_cgf(&s, 0..50, &[0.0, 0.5, -1.0, 2.0]).unwrap();
    assert_eq!(est.k_values[0], 0.0);
    for (z, k) in est.z_values.iter().zip(&est.k_values) {
        assert!((k - 0.7 * z).abs() < 1e-14);
    }
    assert!(matches!(empirical_cgf(&s, 3..3, &[1.0]), Err(Error::EmptyWindow)));
}

#[test]
fn cgf_of_sampled_cosine_matches_bessel_series() {
    let g = TimeGrid::new(0.0, 2.0 * PI / 400.0, 400).unwrap();
    let s = cosine(&g, 1.0, 0.0, SQRT_2);
    let k = empirical_cgf(&s, g.full(), &[1.0]).unwrap().k_values[0];
    let oracle = ln_i0_series(SQRT_2);
    assert!((k - oracle).abs() < 1e-6, "{k} vs {oracle}");
}

#[test]
fn cgf_shift_rule_and_convexity() {
    let mut r = rng(5);
    let s: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut r)).collect();
    let zs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
    let base = empirical_cgf(&s, 0..300, &zs).unwrap();
    for c in [-3.0, 0.25, 10.0] {
        let shifted: Vec<f64> = s.iter().map(|v| v + c).collect();
        let k = empirical_cgf(&shifted, 0..300, &zs).unwrap();
        for i in 0..zs.len() {
            let expect = base.k_values[i] + zs[i] * c;
            assert!((k.k_values[i] - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }
    for w in base.k_values.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
    }
}

#[test]
fn cgf_is_even_for_symmetric_samples() {
    let half: Vec<f64> = (1..=40).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
    let s: Vec<f64> = half.iter().chain(half.iter().map(|v| -v).collect::<Vec<_>>().iter()).copied().collect();
    for z in [0.3, 1.1, 2.0] {
        let k = empirical_cgf(&s, 0..s.len(), &[z, -z]).unwrap().k_values;
        assert!((k[0] - k[1]).abs() < 1e-13);
    }
}

#[test]
fn cgf_survives_extreme_values() {
    let s = vec![800.0, -800.0, 0.0];
    let k = empirical_cgf(&s, 0..3, &[2.0]).unwrap().k_values[0];
    assert!((k - (1600.0 - 3f64.ln())).abs() < 1e-9);
}

#[test]
fn projection_examples() {
    let g = grid_400();
    let raw = Ensemble::new(g, vec![cosine(&g, 1.0, 0.0, 3.0), cosine(&g, 2.0, 0.5, 0.2)]).unwrap();
    let wh = whiten(&raw, g.full()).unwrap();
    assert_eq!(project(&wh, &[1.0, 0.0]).unwrap(), wh.channels()[0]);
    assert!(project(&wh, &[0.0, 0.0]).unwrap().iter().all(|v| *v == 0.0));
    assert!(matches!(project(&wh, &[1.0]), Err(Error::DimensionMismatch { .. })));
    let th: f64 = 0.83;
    let s = project(&wh, &[th.cos(), th.sin()]).unwrap();
    let mean = s.iter().sum::<f64>() / 400.0;
    let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 400.0;
    assert!((var - 1.0).abs() < 1e-8);
}

#[test]
fn csv_round_trip_preserves_bits() {
    let g = TimeGrid::new(0.5, 0.1, 37).unwrap();
    let raw = Ensemble::new(g, vec![cosine(&g, 1.3, 0.2, 1.0), cosine(&g, 0.4, 0.0, 1e-7)]).unwrap();
    let mut buf = Vec::new();
    raw.to_csv(&mut buf).unwrap();
    let back = Ensemble::from_csv(buf.as_slice()).unwrap();
    assert_eq!(back.channels(), raw.channels());
    assert!((back.grid().dt() - 0.1).abs() < 1e-12);
}

#[test]
fn csv_errors_name_the_line() {
    let bad = "t,x1\n0.0,1.0\n0.1,oops\n0.2,3.0\n";
    match Ensemble::from_csv(bad.as_bytes()) {
        Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let ragged = "t,x1\n0.0,1.0\n0.1,2.0\n0.35,3.0\n";
    assert!(matches!(Ensemble::from_csv(ragged.as_bytes()), Err(Error::UngriddedData { .. })));
}

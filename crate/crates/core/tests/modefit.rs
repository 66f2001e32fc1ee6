mod common;

use std::f64::consts::SQRT_2;

use common::*;
use nalgebra::DVector;
use rand::Rng;
use sica_core::becsim::tf_profile;
use sica_core::modefit::{fit_amplitudes_with, ideal_pattern, FitOptions, HarmonicBasis};
use sica_core::*;

const FREQS: [f64; 3] = [1.0, SQRT_2, 2.0];

fn clean_movie(amplitudes: [f64; 3]) -> DensityMovie {
    let t = TrapParams::default();
    generate_movie(
        &t,
        &ModeSpec::with_amplitudes(amplitudes),
        &NoiseSpec::off(),
        &SpatialGrid::for_trap(&t),
        &grid_400(),
    )
    .unwrap()
}

#[test]
fn noise_free_maps_are_the_mode_shapes() {
    let movie = clean_movie([0.2; 3]);
    let map = fit_amplitudes(&movie, FREQS).unwrap();
    let t = movie.trap;
    let (nc, r) = (t.central_density(), t.tf_radius());
    // away from the edge every point follows the linear model exactly; the
    // chemical potential adds the same amount to every point of a map
    let inner: Vec<(usize, (f64, f64))> =
        movie.spatial_grid.nodes().enumerate().filter(|(_, (x, y))| x * x + y * y < (0.6 * r).powi(2)).collect();
    for (m, shape) in
        [|x: f64, _y: f64| x, |x: f64, y: f64| x * x - y * y, |x: f64, y: f64| x * x + y * y].iter().enumerate()
    {
        let scale = if m == 0 { 0.2 * nc / r } else { 0.2 * nc / (r * r) };
        let offsets: Vec<f64> = inner.iter().map(|&(i, (x, y))| map.c[m][i] - scale * shape(x, y)).collect();
        for o in &offsets {
            assert!((o - offsets[0]).abs() < 1e-6, "C{} offset spread", m + 1);
        }
    }
    assert!(map.residual_rms.iter().zip(&map.clipped).filter(|(_, c)| !**c).all(|(r, _)| r.is_finite()));
}

#[test]
fn dipole_map_is_proportional_to_x() {
    let movie = clean_movie([0.2, 0.0, 0.0]);
    let map = fit_amplitudes(&movie, FREQS).unwrap();
    let t = movie.trap;
    let r = t.tf_radius();
    for (i, (x, y)) in movie.spatial_grid.nodes().enumerate() {
        if x * x + y * y < (0.6 * r).powi(2) {
            let mirror = map.c[0][movie.spatial_grid.len() - 1 - i];
            // C₁(x) − C₁(−x) removes the common chemical-potential term
            assert!((map.c[0][i] - mirror - 0.4 * t.central_density() * x / r).abs() < 1e-6);
        }
    }
}

#[test]
fn static_movie_has_zero_maps() {
    let movie = clean_movie([0.0; 3]);
    let map = fit_amplitudes(&movie, FREQS).unwrap();
    let tf = tf_profile(&movie.trap, &movie.spatial_grid, movie.mus[0]);
    for i in 0..movie.spatial_grid.len() {
        assert!((map.c0[i] - tf[i]).abs() < 1e-9);
        for c in &map.c {
            assert!(c[i].abs() < 1e-9);
        }
    }
}

#[test]
fn default_pipeline_maps_have_mode_symmetry() {
    let t = TrapParams::default();
    let movie =
        generate_movie(&t, &ModeSpec::default(), &NoiseSpec::default(), &SpatialGrid::for_trap(&t), &grid_400())
            .unwrap();
    let scores = fit_amplitudes(&movie, FREQS).unwrap().symmetry_scores();
    for s in scores {
        assert!(s > 0.9, "{scores:?}");
    }
}

#[test]
fn ideal_patterns_score_one() {
    let grid = SpatialGrid::new(5.0, 31).unwrap();
    let mask: Vec<bool> = grid.nodes().map(|(x, y)| x * x + y * y < 16.0).collect();
    for mode in ModeKind::ALL {
        let p = ideal_pattern(mode, &grid, Some(&mask));
        assert!((mode_symmetry_score(&p, mode, &grid, Some(&mask)) - 1.0).abs() < 1e-12);
        let flipped: Vec<f64> = p.iter().map(|v| -2.0 * v).collect();
        assert!((mode_symmetry_score(&flipped, mode, &grid, Some(&mask)) + 1.0).abs() < 1e-12);
    }
    let dipole = ideal_pattern(ModeKind::Dipole, &grid, None);
    assert!(mode_symmetry_score(&dipole, ModeKind::Quadrupole, &grid, None).abs() < 1e-12);
    assert_eq!(mode_symmetry_score(&vec![0.0; grid.len()], ModeKind::Dipole, &grid, None), 0.0);
}

fn basis(options: FitOptions) -> HarmonicBasis {
    HarmonicBasis::new(&grid_400().times(), &FREQS, options).unwrap()
}

#[test]
fn fit_residual_is_orthogonal_to_the_basis() {
    let mut r = rng(4);
    for options in [FitOptions::default(), FitOptions { with_sine: true }] {
        let b = basis(options);
        let y: Vec<f64> = (0..400).map(|_| r.random_range(-1.0..1.0)).collect();
        let (coef, _) = b.fit(&y);
        let resid = DVector::from_column_slice(&y) - b.design() * &coef;
        let g = b.design().transpose() * resid;
        assert!(g.amax() < 1e-9, "{}", g.amax());
    }
}

#[test]
fn exact_traces_are_recovered() {
    let b = basis(FitOptions { with_sine: true });
    let want = DVector::from_vec(vec![5.6, 0.3, -0.2, 0.7, 0.05, -0.4, 0.1]);
    let y = b.design() * &want;
    let (coef, rms) = b.fit(y.as_slice());
    assert!((coef - want).amax() < 1e-10);
    assert!(rms < 1e-10);
}

#[test]
fn fit_is_linear() {
    let b = basis(FitOptions::default());
    let mut r = rng(6);
    let u: Vec<f64> = (0..400).map(|_| r.random_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..400).map(|_| r.random_range(-1.0..1.0)).collect();
    let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
    let (cu, _) = b.fit(&u);
    let (cv, _) = b.fit(&v);
    let (cw, _) = b.fit(&w);
    assert!((cw - (cu * 2.0 - cv * 3.0)).amax() < 1e-10);
}

#[test]
fn degenerate_frequencies_are_rejected() {
    let times = grid_400().times();
    assert!(matches!(
        HarmonicBasis::new(&times, &[1.0, 1.0, 2.0], FitOptions::default()),
        Err(Error::IllConditionedBasis { .. })
    ));
    assert!(HarmonicBasis::new(&times, &[1.0, -1.0, 2.0], FitOptions::default()).is_err());
    let b = basis(FitOptions::default());
    assert!(b.condition.is_finite() && b.condition >= 1.0);
}

#[test]
fn sine_maps_are_optional() {
    let t = TrapParams::default();
    let grid = SpatialGrid::new(14.0, 21).unwrap();
    let movie = generate_movie(&t, &ModeSpec::default(), &NoiseSpec::off(), &grid, &grid_400()).unwrap();
    assert!(fit_amplitudes(&movie, FREQS).unwrap().s.is_none());
    let with = fit_amplitudes_with(&movie, FREQS, FitOptions { with_sine: true }).unwrap();
    assert_eq!(with.s.as_ref().unwrap()[0].len(), grid.len());
    let short =
        generate_movie(&t, &ModeSpec::default(), &NoiseSpec::off(), &grid, &TimeGrid::new(0.0, 0.1, 5).unwrap())
            .unwrap();
    assert!(fit_amplitudes(&short, FREQS).is_err());
}

#[test]
fn mode_map_round_trip_on_disk() {
    let t = TrapParams::default();
    let grid = SpatialGrid::new(14.0, 21).unwrap();
    let movie = generate_movie(&t, &ModeSpec::default(), &NoiseSpec::default(), &grid, &grid_400()).unwrap();
    let map = fit_amplitudes(&movie, FREQS).unwrap();
    let dir = tempfile::tempdir().unwrap();
    map.save(dir.path(), true).unwrap();
    assert_eq!(ModeMap::load(dir.path()).unwrap(), map);
    let csv = std::fs::read_to_string(dir.path().join("modemap.csv")).unwrap();
    assert_eq!(csv.lines().count(), grid.len() + 1);
    assert!(csv.starts_with("x,y,C0,C1,C2,C3\n"));
}

//! The verdict must match the generating family across dimensions,
//! concentrations, and necksizes, and the atlas example grid must carry
//! negative energy throughout.

use fowler::classify::{classify, Verdict};
use fowler::model::{derive_params, spherical_radial};
use fowler::shooting::{atlas, DelaunayOrbit};
use fowler::transform::RadialGrid;

fn log_radii(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (m - 1) as f64;
    (0..m).map(|k| lo * (k as f64 * step).exp()).collect()
}

#[test]
fn verdicts_match_generating_family() {
    for n in [5u32, 6, 8] {
        let params = derive_params(n, 1).unwrap();
        for mu in [0.5, 1.0, 2.0] {
            let radii = log_radii(1e-4, 1e2, 1600);
            let values = radii
                .iter()
                .map(|&r| vec![spherical_radial(&params, mu, r)])
                .collect();
            let grid = RadialGrid::new(radii, values).unwrap();
            let rep = classify(&grid, &params).unwrap();
            assert_eq!(
                rep.verdict,
                Verdict::NonSingularSpherical,
                "n = {n}, mu = {mu}: {rep:?}"
            );
        }
        for frac in [0.3, 0.6, 0.9] {
            let a = frac * params.a0;
            let orbit = DelaunayOrbit::solve(&params, a)
                .unwrap_or_else(|e| panic!("n = {n}, a = {frac} a0: {e}"));
            let radii = log_radii(1e-4, 10.0, 2000);
            let grid = orbit.sample_radial(&params, &radii, &[1.0], 0.0).unwrap();
            let rep = classify(&grid, &params).unwrap();
            assert_eq!(
                rep.verdict,
                Verdict::SingularDelaunay,
                "n = {n}, a = {frac} a0: {rep:?}"
            );
            assert!(rep.pohozaev < 0.0);
        }
    }
}

#[test]
fn atlas_grid_has_negative_energy_throughout() {
    let params = derive_params(6, 1).unwrap();
    let grid: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64 * params.a0).collect();
    let rows = atlas(&params, &grid);
    assert_eq!(rows.len(), 9);
    for row in &rows {
        assert!(row.error.is_none(), "a = {}: {:?}", row.a, row.error);
        assert!(row.hamiltonian < 0.0, "a = {}: H = {}", row.a, row.hamiltonian);
        assert!(row.b > 0.0 && row.period > 0.0);
        // near the homoclinic end the closure residual degrades with the
        // longer period; the acceptance necksizes stay below 1e-6
        if row.a >= 0.3 * params.a0 {
            assert!(row.residual <= 1e-6, "a = {}: residual {}", row.a, row.residual);
        }
    }
}

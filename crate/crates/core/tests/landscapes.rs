use topoeeg::embedding::PointCloud;
use topoeeg::homology::{rips_persistence, DEFAULT_SIMPLEX_CAP};
use topoeeg::landscapes::{band_features, landscape, tent, DEFAULT_GRID};

fn unit_square() -> PointCloud<f64> {
    PointCloud::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
}

#[test]
fn unit_square_h1_contribution_at_midpoint() {
    let diag = rips_persistence(&unit_square(), &[0, 1, 2], None, DEFAULT_SIMPLEX_CAP).unwrap();
    let s2 = 2f64.sqrt();
    let mid = (1.0 + s2) / 2.0;
    // Three-point grid puts the H1 midpoint exactly at index 1.
    let f = band_features(&diag, 3, 2.0 * mid).unwrap();
    let h0 = landscape(&diag, 0, 1, 3, 2.0 * mid).unwrap().values[1];
    let h1 = landscape(&diag, 1, 1, 3, 2.0 * mid).unwrap().values[1];
    assert!((h1 - (s2 - 1.0) / 2.0).abs() < 1e-12);
    assert!((f[1] - ((s2 - 1.0) / 6.0 + h0 / 3.0)).abs() < 1e-12);
}

#[test]
fn unit_square_default_grid_nearest_point() {
    let diag = rips_persistence(&unit_square(), &[0, 1, 2], None, DEFAULT_SIMPLEX_CAP).unwrap();
    let s2 = 2f64.sqrt();
    let t_max = diag.threshold();
    assert!((t_max - s2).abs() < 1e-12);
    let f = band_features(&diag, DEFAULT_GRID, t_max).unwrap();
    let mid = (1.0 + s2) / 2.0;
    let step = t_max / (DEFAULT_GRID - 1) as f64;
    let g = (mid / step).round() as usize;
    let t = g as f64 * step;
    let h0: f64 = diag.dim(0).iter().map(|p| tent(p.birth, p.death, t)).fold(0.0, f64::max);
    let expected = (tent(1.0, s2, t) + h0) / 3.0;
    assert!((f[g] - expected).abs() < 1e-12);
    assert!(tent(1.0, s2, t) > 0.9 * (s2 - 1.0) / 2.0);
}

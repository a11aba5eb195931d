//! Builds Gauss–Legendre spherical grids and demonstrates their exactness:
//! weights summing to the sphere area, exact integration of harmonic
//! products up to the design bandwidth, and well-separated subsampling.
//!
//! Run with: `cargo run --example spherical_cubature`

use needlets::cubature::{build_grid, grid_for_level, min_separation, subsample_separated};
use needlets::harmonics::real_spherical_harmonic;
use needlets::scale::{build_scales, ShiftModel};

fn main() {
    let bandlimit = 16u32;
    let grid = build_grid(bandlimit);
    println!(
        "grid for bandlimit {bandlimit}: {} rings x {} azimuths = {} points",
        grid.n_theta(),
        grid.n_phi(),
        grid.len()
    );
    let total: f64 = grid.weights().iter().sum();
    println!(
        "weight sum = {total:.12}  (4*pi = {:.12}, |error| = {:.3e})",
        4.0 * std::f64::consts::PI,
        (total - 4.0 * std::f64::consts::PI).abs()
    );

    println!("\northonormality of sampled harmonics (degree <= 8):");
    let mut worst = 0.0f64;
    for (l, m, l2, m2) in [(3, 1, 3, 1), (5, -2, 5, -2), (8, 0, 8, 0), (4, 2, 6, 2), (7, -3, 5, 1)]
    {
        let integral = grid.integrate(|p| {
            real_spherical_harmonic(l, m, p).unwrap() * real_spherical_harmonic(l2, m2, p).unwrap()
        });
        let expected = if (l, m) == (l2, m2) { 1.0 } else { 0.0 };
        worst = worst.max((integral - expected).abs());
        println!("  <Y_({l},{m}), Y_({l2},{m2})> = {integral:+.2e}  (expected {expected})");
    }
    println!("  worst deviation: {worst:.3e}");

    let d = min_separation(&grid).unwrap();
    println!("\nminimum node separation: {d:.5} rad");

    let picked = subsample_separated(&grid, 0.5, 1).unwrap();
    println!(
        "greedy 0.5-rad separated subsample: {} of {} nodes kept",
        picked.len(),
        grid.len()
    );

    println!("\nlevel grids over a slowly growing scale family:");
    let seq = build_scales(&ShiftModel::logarithmic(0.75).unwrap(), 8).unwrap();
    for j in 2..=6usize {
        let g = grid_for_level(&seq, j).unwrap();
        let d = min_separation(&g).unwrap();
        println!(
            "  level {j}: bandlimit {:>3}, {:>4} points, min separation {d:.4} rad",
            g.bandlimit(),
            g.len()
        );
    }
}

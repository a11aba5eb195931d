//! Constructs the smooth frequency windows over a scale sequence and
//! verifies their defining properties numerically: compact supports, the
//! partition of unity over the covered band, and bounded derivatives.
//!
//! Run with: `cargo run --example window_partition`

use needlets::scale::{build_scales, ShiftModel};
use needlets::window::{mollifier_normalization, WindowSystem};

fn main() {
    println!(
        "mollifier normalization constant: {:.12}\n",
        mollifier_normalization()
    );

    let model = ShiftModel::standard_geometric(2.0).unwrap();
    let seq = build_scales(&model, 9).unwrap();
    let windows = WindowSystem::new(&seq, false).unwrap();
    let levels = windows.levels();
    println!(
        "geometric(2) windows over scales {:?}",
        seq.scales().iter().map(|s| *s as i64).collect::<Vec<_>>()
    );

    println!("\nper-level supports and peak weights:");
    for j in 0..levels {
        let support = windows.window_support_multipoles(j).unwrap();
        let peak = support
            .iter()
            .map(|&l| windows.weight_fn(j, f64::from(l)).unwrap())
            .fold(0.0f64, f64::max);
        println!(
            "  level {j}: {:>3} multipoles in [{}, {}], max b_j = {peak:.6}",
            support.len(),
            support.first().copied().unwrap_or(0),
            support.last().copied().unwrap_or(0),
        );
    }

    let l_top = seq.scale(levels - 1).unwrap().floor() as u64;
    let mut worst = 0.0f64;
    for l in 1..=l_top {
        worst = worst.max((windows.partition_sum(l as f64).unwrap() - 1.0).abs());
    }
    println!("\npartition of unity over l in [1, {l_top}]: max residual = {worst:.3e}");

    println!("\nscaled derivative bounds sup |b_j^(n)| (S_j - S_(j-1))^n:");
    for n in [1u32, 2] {
        print!("  n={n}:");
        for j in 1..levels {
            let bound = windows.derivative_bound_probe(j, n, 512).unwrap();
            print!(" {bound:8.4}");
        }
        println!();
    }
    println!("\n(the scaled bounds stay level-independent: the windows are self-similar)");
}

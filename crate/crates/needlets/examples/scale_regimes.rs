//! Builds scale sequences for every shift family, tabulates the growth
//! diagnostics, and classifies each family's bandwidth regime.
//!
//! Run with: `cargo run --example scale_regimes`

use needlets::scale::{build_scales, ShiftModel};

fn main() {
    let families = vec![
        ShiftModel::logarithmic(1.0).unwrap(),
        ShiftModel::polynomial(2.0).unwrap(),
        ShiftModel::log_power_exponential(1.0, 0.5).unwrap(),
        ShiftModel::mild_exponential(1.0, 0.5).unwrap(),
        ShiftModel::standard_geometric(2.0).unwrap(),
        ShiftModel::stretched_super_exponential(0.5).unwrap(),
        ShiftModel::double_exponential(0.05, 2.0).unwrap(),
        ShiftModel::explicit_table(vec![1.0, 2.0, 4.5, 7.0, 13.0, 22.0, 40.0, 75.0, 140.0])
            .unwrap(),
    ];

    println!("Scale diagnostics at selected levels (32-level build)");
    println!("  S_j    : scale value");
    println!("  delta_j: bandwidth ratio (S_(j+1) - S_(j-1)) / S_j");
    println!("  L_j    : log-growth index log(S_(j+1)) / log(S_j)\n");

    for model in &families {
        let levels = model.table_len().unwrap_or(32).min(32);
        let seq = build_scales(model, levels).unwrap();
        println!(
            "family {:<28} regime {:<12} convergence {}",
            model.family_name(),
            seq.regime().to_string(),
            seq.convergence()
        );
        if let Some(gamma) = model.regularity_index() {
            println!("  regularity index gamma = {gamma}");
        }
        println!("  growth: {}", model.gamma_description());
        for j in [1usize, 4, 8, 16] {
            if j + 1 >= seq.len() {
                continue;
            }
            let s = seq.scale(j).unwrap();
            let delta = seq.bandwidth_ratio(j).unwrap();
            let l = seq.log_growth_index(j).unwrap();
            // The closed form tracks growth up to a family constant, so the
            // ratio column stabilizes while the values themselves differ.
            let closed = model
                .closed_form_scale(j as f64)
                .map(|c| format!("S/asymptotic {:8.4}", s / c))
                .unwrap_or_default();
            println!("  j={j:>2}  S={s:12.4}  delta={delta:9.5}  L={l:8.5}  {closed}");
        }
        if seq.truncated() {
            println!("  (sequence truncated before overflow at {} levels)", seq.len());
        }
        println!();
    }
}

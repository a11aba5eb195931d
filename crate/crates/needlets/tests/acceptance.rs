//! Acceptance suite: one test per shipped guarantee, each printing the
//! measured quantities it gates on (visible with `--nocapture`).
//!
//! Every tolerance here is part of the library contract; do not loosen.

use needlets::cubature::{build_grid, grid_for_level, min_separation, subsample_separated};
use needlets::field::{coeff_covariance, regularity_probe, simulate_field_replicate, SpectrumModel};
use needlets::gof::{run_gof, GofConfig, GofReport};
use needlets::harmonics::{legendre_sequence, SpherePoint};
use needlets::needlet::{BandlimitedFunction, NeedletSystem};
use needlets::scale::{
    build_scales, separation_threshold_check, Regime, ScaleSequence, ShiftModel,
};
use needlets::window::{mollifier_normalization, WindowSystem};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scales(model: &ShiftModel, levels: usize) -> ScaleSequence {
    build_scales(model, levels).expect("scale sequence must build")
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Criterion 1: the bump-function normalization constant lies in
/// [0.4435, 0.4445].
#[test]
fn criterion_01_mollifier_normalization() {
    let z = mollifier_normalization();
    println!("criterion 01: mollifier normalization = {z:.12} (band [0.4435, 0.4445])");
    assert!(
        (0.4435..=0.4445).contains(&z),
        "normalization {z} outside [0.4435, 0.4445]"
    );
}

/// Criterion 2: the squared window weights partition unity over the covered
/// band, for every shift family, with max residual < 1e-10 at J = 8.
#[test]
fn criterion_02_partition_of_unity_all_families() {
    let families: Vec<(&str, ShiftModel)> = vec![
        ("logarithmic", ShiftModel::logarithmic(1.0).unwrap()),
        ("polynomial", ShiftModel::polynomial(2.0).unwrap()),
        (
            "log_power_exponential",
            ShiftModel::log_power_exponential(1.0, 0.5).unwrap(),
        ),
        (
            "mild_exponential",
            ShiftModel::mild_exponential(1.0, 0.5).unwrap(),
        ),
        (
            "standard_geometric",
            ShiftModel::standard_geometric(2.0).unwrap(),
        ),
        (
            "stretched_super_exponential",
            ShiftModel::stretched_super_exponential(0.5).unwrap(),
        ),
        (
            "double_exponential",
            ShiftModel::double_exponential(0.05, 2.0).unwrap(),
        ),
        (
            "explicit_table",
            ShiftModel::explicit_table(vec![1.0, 1.8, 3.2, 5.5, 9.0, 14.0, 21.0, 30.0, 41.0])
                .unwrap(),
        ),
    ];
    let levels = 8;
    for (name, model) in families {
        let seq = scales(&model, levels + 1);
        let windows = WindowSystem::new(&seq, false).unwrap();
        let l_top = (seq.scale(levels - 1).unwrap() * (1.0 + 1e-12)).floor() as u64;
        let mut worst = 0.0f64;
        for l in 1..=l_top {
            let r = (windows.partition_sum(l as f64).unwrap() - 1.0).abs();
            worst = worst.max(r);
        }
        println!(
            "criterion 02: {name:>27} J=8, l in [1, {l_top}], max |partition - 1| = {worst:.3e}"
        );
        assert!(
            worst < 1e-10,
            "{name}: partition residual {worst:.3e} >= 1e-10"
        );
    }
}

/// Criterion 3: the frame is numerically tight — for 20 random band-limited
/// functions (lmax <= 30) the energy gap |Σβ² − ‖f‖²|/‖f‖² stays below 1e-8
/// under both a geometric-ratio-2 system and a polynomial(2) system.
#[test]
fn criterion_03_tight_frame_energy() {
    let geo = scales(&ShiftModel::standard_geometric(2.0).unwrap(), 8);
    let poly = scales(&ShiftModel::polynomial(2.0).unwrap(), 8);
    let systems = [
        ("geometric ratio 2", NeedletSystem::new(&geo, 6).unwrap()),
        ("polynomial eta 2", NeedletSystem::new(&poly, 4).unwrap()),
    ];
    for (name, sys) in &systems {
        assert!(
            sys.covered_lmax() >= 30,
            "{name}: covered band {} < 30",
            sys.covered_lmax()
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = [0.0f64; 2];
    for _ in 0..20 {
        let lmax = rng.gen_range(5..=30u32);
        let f = BandlimitedFunction::random(lmax, &mut rng);
        for (i, (name, sys)) in systems.iter().enumerate() {
            let gap = sys.frame_energy_gap(&f).unwrap();
            worst[i] = worst[i].max(gap);
            assert!(gap < 1e-8, "{name}: energy gap {gap:.3e} >= 1e-8");
        }
    }
    for (i, (name, _)) in systems.iter().enumerate() {
        println!(
            "criterion 03: {name:>18} worst energy gap over 20 functions = {:.3e}",
            worst[i]
        );
    }
}

/// Criterion 4: regime classification at J = 64 matches the analytic regime
/// for all six closed-form families, and the bandwidth ratio follows its
/// asymptotic law (polynomial: j·Δ_j → 2η; mild exponential:
/// Δ_j = ε_{j-1} + ε_j + O(ε²) so j^p·Δ_j → 2η; geometric ratio B:
/// Δ_j = B − 1/B exactly).
#[test]
fn criterion_04_regime_classification_and_asymptotics() {
    let cases = [
        ("logarithmic(1)", ShiftModel::logarithmic(1.0).unwrap(), Regime::Shrinking),
        ("polynomial(2)", ShiftModel::polynomial(2.0).unwrap(), Regime::Shrinking),
        (
            "log_power_exponential(1, 0.5)",
            ShiftModel::log_power_exponential(1.0, 0.5).unwrap(),
            Regime::Shrinking,
        ),
        (
            "mild_exponential(1, 0.5)",
            ShiftModel::mild_exponential(1.0, 0.5).unwrap(),
            Regime::Shrinking,
        ),
        (
            "standard_geometric(2)",
            ShiftModel::standard_geometric(2.0).unwrap(),
            Regime::Stable,
        ),
        (
            "stretched_super_exponential(0.5)",
            ShiftModel::stretched_super_exponential(0.5).unwrap(),
            Regime::Spreading,
        ),
    ];
    for (name, model, expected) in &cases {
        let got = scales(model, 64).regime();
        println!("criterion 04: {name:>33} classified {got} (expected {expected})");
        assert_eq!(got, *expected, "{name}: regime {got} != {expected}");
    }

    let j = 10_000usize;
    let poly = scales(&ShiftModel::polynomial(2.0).unwrap(), j + 2);
    let d_poly = poly.bandwidth_ratio(j).unwrap();
    let poly_ratio = j as f64 * d_poly / (2.0 * 2.0);
    println!("criterion 04: polynomial(2) j·Δ_j/(2η) at j=10^4 = {poly_ratio:.6}");
    assert!(
        (poly_ratio - 1.0).abs() < 0.05,
        "polynomial bandwidth asymptotic off by {:.3}",
        (poly_ratio - 1.0).abs()
    );

    let mild = scales(&ShiftModel::mild_exponential(1.0, 0.5).unwrap(), j + 2);
    let d_mild = mild.bandwidth_ratio(j).unwrap();
    let mild_ratio = (j as f64).powf(0.5) * d_mild / (2.0 * 1.0);
    println!("criterion 04: mild_exponential(1, 0.5) j^p·Δ_j/(2η) at j=10^4 = {mild_ratio:.6}");
    assert!(
        (mild_ratio - 1.0).abs() < 0.05,
        "mild-exponential bandwidth asymptotic off by {:.3}",
        (mild_ratio - 1.0).abs()
    );
    // Normalizing by 2η(1-p) instead lands at 1/(1-p): the increments obey
    // Δ_j ≈ ε_{j-1} + ε_j = 2η j^{-p}, with no (1-p) factor (that factor
    // belongs to the closed form of S_j, not of its increments).
    let literal = mild_ratio / (1.0 - 0.5);
    println!("criterion 04: mild_exponential(1, 0.5) j^p·Δ_j/(2η(1-p)) at j=10^4 = {literal:.6}");
    assert!(
        (literal - 2.0).abs() < 0.1,
        "(1-p)-normalized ratio {literal:.4} should sit at 1/(1-p) = 2"
    );

    let geo = scales(&ShiftModel::standard_geometric(2.0).unwrap(), 64);
    let d_geo = geo.bandwidth_ratio(32).unwrap();
    println!("criterion 04: geometric(2) |Δ_j - (B - 1/B)| = {:.3e}", (d_geo - 1.5).abs());
    assert!(
        (d_geo - 1.5).abs() < 1e-12,
        "geometric bandwidth ratio {} not B - 1/B to 1e-12",
        d_geo
    );
}

/// Criterion 5: the separation threshold scan accepts exactly the family /
/// smoothness combinations whose scale growth dominates S_{j-1}^{1-β}.
#[test]
fn criterion_05_separation_threshold() {
    let horizon = 1_000_000usize;
    let betas = [0.1, 0.5, 0.9];

    for eta in [0.5, 1.0, 2.0, 5.0] {
        let model = ShiftModel::mild_exponential(eta, 0.5).unwrap();
        for beta in betas {
            let check = separation_threshold_check(&model, beta, horizon).unwrap();
            println!(
                "criterion 05: mild_exponential({eta}, 0.5) beta={beta} satisfied_from={:?}",
                check.satisfied_from
            );
            assert!(
                check.satisfied_from.is_some(),
                "mild_exponential({eta}, 0.5) must satisfy separation at beta = {beta}"
            );
        }
    }

    let poly4 = ShiftModel::polynomial(4.0).unwrap();
    let ok = separation_threshold_check(&poly4, 0.5, horizon).unwrap();
    println!(
        "criterion 05: polynomial(4) beta=0.5 satisfied_from={:?}",
        ok.satisfied_from
    );
    assert!(
        ok.satisfied_from.is_some(),
        "polynomial(4) must satisfy separation at beta = 0.5"
    );

    let poly1 = ShiftModel::polynomial(1.0).unwrap();
    let bad = separation_threshold_check(&poly1, 0.5, horizon).unwrap();
    println!(
        "criterion 05: polynomial(1) beta=0.5 satisfied_from={:?}",
        bad.satisfied_from
    );
    assert!(
        bad.satisfied_from.is_none(),
        "polynomial(1) must fail separation at beta = 0.5"
    );

    let log1 = ShiftModel::logarithmic(1.0).unwrap();
    for beta in betas {
        let check = separation_threshold_check(&log1, beta, horizon).unwrap();
        println!(
            "criterion 05: logarithmic(1) beta={beta} satisfied_from={:?}",
            check.satisfied_from
        );
        assert!(
            check.satisfied_from.is_none(),
            "logarithmic(1) must fail separation at beta = {beta}"
        );
    }
}

/// Criterion 6: cubature quality — the grid reproduces the projector kernels
/// exactly (residual < 1e-9 for degrees up to 10), weights sum to the sphere
/// area within 1e-10, and node separation scales with the running bandwidth
/// (d_j · S_{j-1} within [0.2, 5] for a slowly growing family).
#[test]
fn criterion_06_cubature_exactness() {
    // Reproducing identity: sum_k λ_k Z_l(<x, ξ_k>) Z_l'(<ξ_k, y>) equals
    // δ_{ll'} Z_l(<x, y>) whenever the grid is exact to degree l + l'.
    let lmax = 10u32;
    let grid = build_grid(2 * lmax);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let x = SpherePoint::new(
            rng.gen_range(0.05..std::f64::consts::PI - 0.05),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
        .unwrap();
        let y = SpherePoint::new(
            rng.gen_range(0.05..std::f64::consts::PI - 0.05),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
        .unwrap();
        let mut lhs = vec![vec![0.0f64; lmax as usize + 1]; lmax as usize + 1];
        for (k, p) in grid.points().iter().enumerate() {
            let px = legendre_sequence(lmax, x.cos_angle(p)).unwrap();
            let py = legendre_sequence(lmax, p.cos_angle(&y)).unwrap();
            let w = grid.weight(k);
            for l in 0..=lmax as usize {
                let zl = (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI) * px[l];
                for l2 in 0..=lmax as usize {
                    let zl2 = (2.0 * l2 as f64 + 1.0) / (4.0 * std::f64::consts::PI) * py[l2];
                    lhs[l][l2] += w * zl * zl2;
                }
            }
        }
        let pxy = legendre_sequence(lmax, x.cos_angle(&y)).unwrap();
        for l in 0..=lmax as usize {
            for l2 in 0..=lmax as usize {
                let expected = if l == l2 {
                    (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI) * pxy[l]
                } else {
                    0.0
                };
                worst = worst.max((lhs[l][l2] - expected).abs());
            }
        }
    }
    println!("criterion 06: reproducing-kernel worst residual (l, l' <= 10) = {worst:.3e}");
    assert!(worst < 1e-9, "kernel residual {worst:.3e} >= 1e-9");

    // Weight normalization on assorted grids.
    let seq = scales(&ShiftModel::logarithmic(0.75).unwrap(), 8);
    let mut grids: Vec<(String, _)> = vec![
        ("degree 20".into(), build_grid(20)),
        ("degree 128".into(), build_grid(128)),
    ];
    for j in 3..=6usize {
        grids.push((format!("level {j}"), grid_for_level(&seq, j).unwrap()));
    }
    let sphere = 4.0 * std::f64::consts::PI;
    for (name, g) in &grids {
        let total: f64 = g.weights().iter().sum();
        let err = (total - sphere).abs();
        println!("criterion 06: {name:>10} |Σλ - 4π| = {err:.3e}");
        assert!(err < 1e-10, "{name}: weight sum off by {err:.3e}");
    }

    // Node separation tracks the running scale for slowly growing bandwidths.
    for j in 3..=6usize {
        let g = grid_for_level(&seq, j).unwrap();
        let d = min_separation(&g).unwrap();
        let s_prev = seq.scale(j - 1).unwrap();
        let ratio = d * s_prev;
        println!("criterion 06: level {j} min separation {d:.4} -> d_j·S_(j-1) = {ratio:.3}");
        assert!(
            (0.2..=5.0).contains(&ratio),
            "level {j}: d_j·S_(j-1) = {ratio:.3} outside [0.2, 5]"
        );
    }
}

/// Criterion 7: the analytic coefficient covariance matches a 2000-replicate
/// Monte-Carlo estimate within 3 standard errors, for a flat and a modulated
/// spectrum, over 10 random coefficient pairs.
#[test]
fn criterion_07_coefficient_covariance_analytic_vs_mc() {
    let seq = scales(&ShiftModel::standard_geometric(2.0).unwrap(), 32);
    let sys = NeedletSystem::new(&seq, 6).unwrap();
    let lmax = sys.covered_lmax();
    assert!(lmax <= 60, "simulation band {lmax} exceeds 60");

    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut pairs = Vec::new();
    for i in 0..10usize {
        let j = 3 + (i % 2);
        let n = sys.grid(j).unwrap().len();
        pairs.push((j, rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .iter()
        .map(|&(j, k, k2)| {
            (
                sys.coefficient_weights(j, k, lmax).unwrap(),
                sys.coefficient_weights(j, k2, lmax).unwrap(),
            )
        })
        .collect();

    let spectra = [
        ("flat", SpectrumModel::power_law(2.0).unwrap()),
        (
            "modulated",
            SpectrumModel::modulated_sine(2.0, vec![(1.0, 2.0, 1.0, 0.5)]).unwrap(),
        ),
    ];
    let replicates = 2000u64;
    for (name, model) in &spectra {
        let mut products = vec![Vec::with_capacity(replicates as usize); pairs.len()];
        for r in 0..replicates {
            let sample = simulate_field_replicate(model, lmax, 7070, r).unwrap();
            let a = sample.coeffs().coeffs();
            for (i, (wa, wb)) in rows.iter().enumerate() {
                let ba: f64 = wa.iter().zip(a).map(|(w, v)| w * v).sum();
                let bb: f64 = wb.iter().zip(a).map(|(w, v)| w * v).sum();
                products[i].push(ba * bb);
            }
        }
        for (i, &(j, k, k2)) in pairs.iter().enumerate() {
            let analytic = coeff_covariance(&sys, model, j, k, k2).unwrap();
            let mc = mean(&products[i]);
            let var = products[i]
                .iter()
                .map(|p| (p - mc) * (p - mc))
                .sum::<f64>()
                / (replicates as f64 - 1.0);
            let se = (var / replicates as f64).sqrt();
            let dev = (analytic - mc).abs();
            println!(
                "criterion 07: {name:>9} pair {i} (j={j}, k={k}, k'={k2}): analytic {analytic:+.5e}, mc {mc:+.5e}, |dev|/se = {:.2}",
                dev / se
            );
            assert!(se > 0.0, "degenerate Monte-Carlo spread");
            assert!(
                dev <= 3.0 * se,
                "{name} pair {i}: |{analytic:.4e} - {mc:.4e}| > 3 se ({se:.4e})"
            );
        }
    }
}

/// Criterion 8: spatial localization — the fitted decay exponent along a
/// decade of angles is at least 2 for a geometric system, and across regime
/// exemplars the normalized envelope decays slowest for the shrinking
/// family, then stable, then spreading.
#[test]
fn criterion_08_localization_dichotomy() {
    // Decay exponent on the decade Θ ∈ [5/S_j, 50/S_j] at j = 4, ratio 2.
    let geo = scales(&ShiftModel::standard_geometric(2.0).unwrap(), 32);
    let sys = NeedletSystem::new(&geo, 6).unwrap();
    let s4 = geo.scale(4).unwrap();
    let lo = 5.0 / s4;
    let hi = (50.0 / s4).min(std::f64::consts::PI);
    let grid: Vec<f64> = (0..300)
        .map(|i| lo * (hi / lo).powf(i as f64 / 299.0))
        .collect();
    let profile = sys.localization_profile(4, 0, &grid).unwrap();
    println!(
        "criterion 08: geometric(2) j=4 decade fit m̂ = {:.3} (width scale {})",
        profile.m_hat_selected, profile.scale_width
    );
    assert!(
        profile.m_hat_selected >= 2.0,
        "decay exponent {:.3} < 2",
        profile.m_hat_selected
    );

    // Regime exemplars at j = 2 on a common angle grid.
    let exemplars = [
        ("shrinking", ShiftModel::logarithmic(0.75).unwrap()),
        ("stable", ShiftModel::standard_geometric(2.0).unwrap()),
        ("spreading", ShiftModel::stretched_super_exponential(0.5).unwrap()),
    ];
    let angles: Vec<f64> = (0..400)
        .map(|i| 0.02 + (std::f64::consts::PI - 0.02) * i as f64 / 399.0)
        .collect();
    let mut masses = Vec::new();
    for (name, model) in &exemplars {
        let seq = scales(model, 32);
        let sys = NeedletSystem::new(&seq, 3).unwrap();
        let p = sys.localization_profile(2, 0, &angles).unwrap();
        for w in p.envelope.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{name}: envelope not monotone");
        }
        let peak = p.envelope[0];
        assert!(peak > 0.0, "{name}: degenerate envelope");
        let mass = mean(&p.envelope.iter().map(|e| e / peak).collect::<Vec<_>>());
        println!("criterion 08: {name:>9} exemplar normalized envelope mass = {mass:.4}");
        masses.push(mass);
    }
    assert!(
        masses[0] > masses[1] && masses[1] > masses[2],
        "envelope mass ordering violated: shrinking {:.4}, stable {:.4}, spreading {:.4}",
        masses[0],
        masses[1],
        masses[2]
    );
}

/// Criterion 9: L^q norms follow the concentration-scale law — the ratios
/// ‖ψ‖_q / Σ_j^{2(1/2 - 1/q)} with Σ_j = 2j² vary by less than 4x across
/// levels 3..=7 for q ∈ {1, 2, ∞} under a polynomial(2) system.
#[test]
fn criterion_09_lq_norm_scaling() {
    let seq = scales(&ShiftModel::polynomial(2.0).unwrap(), 16);
    let sys = NeedletSystem::new(&seq, 8).unwrap();
    for q in [1.0, 2.0, f64::INFINITY] {
        let mut ratios = Vec::new();
        for j in 3..=7usize {
            let grid = sys.grid(j).unwrap();
            // Central-ring node: ring weights vary little near the equator,
            // so the k-dependence of λ stays comparable across levels.
            let ring = grid.n_theta() / 2;
            let k = ring * grid.n_phi();
            let norm = sys.lq_norm(j, k, q).unwrap();
            let sigma = 2.0 * (j as f64) * (j as f64);
            let expo = 2.0 * (0.5 - if q.is_infinite() { 0.0 } else { 1.0 / q });
            ratios.push(norm / sigma.powf(expo));
        }
        let top = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let bot = ratios.iter().cloned().fold(f64::MAX, f64::min);
        let spread = top / bot;
        println!(
            "criterion 09: q={q:>3} ratios {:?} spread = {spread:.3}",
            ratios.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
        assert!(
            spread.is_finite() && spread < 4.0,
            "q = {q}: ratio spread {spread:.3} >= 4"
        );
    }
}

/// Criterion 10: the goodness-of-fit statistic obeys its CLT — across 5 seed
/// batches of 2000 replicates the sample mean stays within 3 SE of zero, the
/// sample variance within 3 SE of the exact variance, and the Kolmogorov
/// distance to the normal limit decreases when the subsample cardinality
/// grows by at least 4x (level pairs (2, 5) and (3, 7)).
#[test]
fn criterion_10_gof_statistic_clt() {
    let model = ShiftModel::mild_exponential(1.0, 0.5).unwrap();
    let spectrum = SpectrumModel::modulated_sine(2.0, vec![(1.0, 2.0, 1.0, 0.5)]).unwrap();
    let batches: Vec<u64> = (0..5).map(|b| 1_000 + b).collect();
    let levels = [2usize, 3, 5, 7];
    let mut reports: Vec<Vec<GofReport>> = Vec::new();
    for &level in &levels {
        let mut per_level = Vec::new();
        for &seed in &batches {
            let config = GofConfig::new(model.clone(), spectrum.clone(), level, 2000, seed);
            let report = run_gof(&config).unwrap();
            println!(
                "criterion 10: level {level} seed {seed}: card {:3}, mean {:+.4e} (se {:.2e}), var {:.4e} vs exact {:.4e} (se {:.2e}), ks {:.4}",
                report.card,
                report.mean,
                report.mean_se,
                report.variance,
                report.exact_variance,
                report.variance_se,
                report.kolmogorov_distance
            );
            assert!(
                report.mean.abs() <= 3.0 * report.mean_se,
                "level {level} seed {seed}: |mean| {:.3e} > 3 se {:.3e}",
                report.mean.abs(),
                report.mean_se
            );
            assert!(
                (report.variance - report.exact_variance).abs() <= 3.0 * report.variance_se,
                "level {level} seed {seed}: variance {:.3e} off exact {:.3e} by > 3 se {:.3e}",
                report.variance,
                report.exact_variance,
                report.variance_se
            );
            per_level.push(report);
        }
        reports.push(per_level);
    }
    for (lo, hi) in [(0usize, 2usize), (1, 3)] {
        for b in 0..batches.len() {
            let (c_lo, c_hi) = (reports[lo][b].card, reports[hi][b].card);
            assert!(
                c_hi >= 4 * c_lo,
                "cardinality {c_hi} at level {} not 4x {c_lo} at level {}",
                levels[hi],
                levels[lo]
            );
        }
        let ks_lo = mean(&reports[lo].iter().map(|r| r.kolmogorov_distance).collect::<Vec<_>>());
        let ks_hi = mean(&reports[hi].iter().map(|r| r.kolmogorov_distance).collect::<Vec<_>>());
        println!(
            "criterion 10: mean ks level {} = {ks_lo:.4} -> level {} = {ks_hi:.4}",
            levels[lo], levels[hi]
        );
        assert!(
            ks_hi < ks_lo,
            "ks did not decrease: level {} = {ks_lo:.4}, level {} = {ks_hi:.4}",
            levels[lo],
            levels[hi]
        );
    }
}

/// Criterion 11: the finite-difference regularity probe recovers the
/// derivative decay exponent -(1-β)·r within 0.15 for r ∈ {1, 2}.
#[test]
fn criterion_11_spectrum_regularity_probe() {
    for beta in [0.3, 0.5] {
        let model = SpectrumModel::modulated_sine(2.0, vec![(1.0, 2.0, 1.0, beta)]).unwrap();
        for r in [1u32, 2] {
            let probe = regularity_probe(&model, r).unwrap();
            let dev = (probe.fitted_slope - probe.expected_slope).abs();
            println!(
                "criterion 11: beta={beta} r={r}: fitted slope {:.4}, expected {:.4}, |dev| = {dev:.4}",
                probe.fitted_slope, probe.expected_slope
            );
            assert!(
                dev < 0.15,
                "beta = {beta}, r = {r}: slope {:.4} vs expected {:.4}",
                probe.fitted_slope,
                probe.expected_slope
            );
        }
    }
}

/// The separated subsample used by the goodness-of-fit harness respects its
/// declared minimum distance (supporting check for criterion 10).
#[test]
fn gof_subsample_respects_minimum_distance() {
    let seq = scales(&ShiftModel::mild_exponential(1.0, 0.5).unwrap(), 8);
    let grid = grid_for_level(&seq, 3).unwrap();
    let min_dist = 0.3;
    let picked = subsample_separated(&grid, min_dist, 11).unwrap();
    assert!(picked.len() >= 2);
    for (a, &i) in picked.iter().enumerate() {
        for &i2 in &picked[a + 1..] {
            let angle = grid.point(i).great_circle_angle(grid.point(i2));
            assert!(
                angle >= min_dist - 1e-12,
                "points {i}, {i2} separated by {angle} < {min_dist}"
            );
        }
    }
}

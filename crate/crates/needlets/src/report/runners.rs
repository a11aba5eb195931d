//! The six command runners behind the command-line interface.
//!
//! Each runner validates its configuration, computes everything in memory,
//! and returns a [`RunOutput`] whose manifest echoes the fully resolved
//! configuration together with the headline numbers of the run, so every
//! value in the emitted tables is reproducible from the manifest alone.

use crate::field::{
    coeff_correlation, correlation_decay_profile, simulate_field_replicate, FieldError,
};
use crate::gof::{run_gof, GofConfig, GofError};
use crate::needlet::NeedletSystem;
use crate::report::config::{
    CorrelationConfig, GofFileConfig, LocalizationConfig, RegimesConfig, ScalesConfig,
    ShiftModelSpec, WindowsConfig,
};
use crate::report::csv_out::{fmt_f64, Csv};
use crate::report::svg::{render, Panel};
use crate::report::{OutputFile, RunError, RunOutput};
use crate::scale::{build_scales, separation_threshold_check, ScaleSequence, ShiftModel};
use crate::window::WindowSystem;
use rayon::prelude::*;
use serde_json::json;

/// Largest scale a command may build per-level cubature grids for; beyond
/// this the grids alone outgrow desk-scale memory.
pub const GRID_SCALE_CAP: f64 = 1024.0;

/// Largest scale allowed when Monte-Carlo field replicates are involved
/// (matches the goodness-of-fit bandlimit cap).
pub const SIMULATION_SCALE_CAP: f64 = crate::gof::DESK_SCALE_CAP;

/// Largest partition-residual table length.
const MAX_PARTITION_ROWS: f64 = 1.0e6;

fn manifest_base<T: serde::Serialize>(
    command: &str,
    config: &T,
    seed: u64,
) -> serde_json::Value {
    json!({
        "command": command,
        "config": serde_json::to_value(config).expect("config serializes"),
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn manifest_insert(manifest: &mut serde_json::Value, key: &str, value: serde_json::Value) {
    if let serde_json::Value::Object(map) = manifest {
        map.insert(key.to_string(), value);
    }
}

fn check_families(families: &[ShiftModelSpec]) -> Result<(), RunError> {
    if families.is_empty() {
        return Err(RunError::Config("families list must not be empty".into()));
    }
    let mut labels: Vec<String> = families.iter().map(ShiftModelSpec::label).collect();
    labels.sort();
    let before = labels.len();
    labels.dedup();
    if labels.len() != before {
        return Err(RunError::Config(
            "families list contains duplicate entries".into(),
        ));
    }
    Ok(())
}

/// Builds scales and insists the full requested horizon is reachable
/// (overflow truncation is a feasibility failure here, not a silent cut).
fn full_scales(model: &ShiftModel, levels: usize) -> Result<ScaleSequence, RunError> {
    let seq = build_scales(model, levels)?;
    if seq.len() < levels {
        return Err(RunError::Feasibility(format!(
            "scales overflow the floating-point range after {} of {} levels",
            seq.len(),
            levels
        )));
    }
    Ok(seq)
}

/// Scales for a needlet system needing `needed` values, extended toward a
/// longer horizon when the family allows so the regime label is classified
/// from enough levels; only the first `needed` values are mandatory.
fn system_scales(model: &ShiftModel, needed: usize) -> Result<ScaleSequence, RunError> {
    let mut probe = needed.max(32);
    if let Some(n) = model.table_len() {
        if n < needed {
            return Err(RunError::Config(format!(
                "explicit table has {n} scales; this run needs {needed}"
            )));
        }
        probe = probe.min(n);
    }
    let seq = build_scales(model, probe)?;
    if seq.len() < needed {
        return Err(RunError::Feasibility(format!(
            "scales overflow the floating-point range after {} of {needed} required levels",
            seq.len()
        )));
    }
    Ok(seq)
}

fn check_scale_cap(label: &str, s: f64, cap: f64) -> Result<(), RunError> {
    if !(s <= cap) {
        return Err(RunError::Feasibility(format!(
            "{label}: grid scale {s:.1} exceeds the bandlimit cap {cap}"
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tabulates scale diagnostics for several families and classifies their
/// growth regimes; mirrors the three-panel sequence figure.
pub fn cmd_regimes(config: &RegimesConfig, seed: u64) -> Result<RunOutput, RunError> {
    check_families(&config.families)?;
    if !(4..=100_000).contains(&config.levels) {
        return Err(RunError::Config(format!(
            "levels = {} outside [4, 100000]",
            config.levels
        )));
    }
    let mut files = Vec::new();
    let mut family_summaries = Vec::new();
    let mut panel_s = Panel::new("scale sequence", "j", "S_j").with_log(false, true);
    let mut panel_d =
        Panel::new("relative bandwidth ratio", "j", "Delta_j").with_log(false, true);
    let mut panel_l = Panel::new("log growth index", "j", "L_j");
    for spec in &config.families {
        let model = spec.build()?;
        // Explicit tables tabulate at most their own length.
        let levels = match model.table_len() {
            Some(n) => config.levels.min(n),
            None => config.levels,
        };
        let seq = build_scales(&model, levels)?;
        let regime = seq.regime().to_string();
        let mut csv = Csv::new(&["j", "S", "delta", "L", "regime"]);
        let mut s_pts = Vec::new();
        let mut d_pts = Vec::new();
        let mut l_pts = Vec::new();
        for j in 0..seq.len() {
            let s = seq.scale(j)?;
            let delta = seq.bandwidth_ratio(j).ok();
            let lgi = seq.log_growth_index(j).ok();
            csv.row(&[
                j.to_string(),
                fmt_f64(s),
                fmt_f64(delta.unwrap_or(f64::NAN)),
                fmt_f64(lgi.unwrap_or(f64::NAN)),
                regime.clone(),
            ]);
            let x = j as f64;
            s_pts.push((x, s));
            if let Some(d) = delta {
                d_pts.push((x, d));
            }
            if let Some(l) = lgi {
                l_pts.push((x, l));
            }
        }
        if !matches!(spec, ShiftModelSpec::ExplicitTable { .. }) {
            let label = spec.label();
            panel_s.add_series(&label, s_pts);
            panel_d.add_series(&label, d_pts);
            panel_l.add_series(&label, l_pts);
        }
        family_summaries.push(json!({
            "family": spec.label(),
            "regime": regime,
            "convergence": seq.convergence().to_string(),
            "truncated": seq.truncated(),
            "levels": seq.len(),
        }));
        files.push(OutputFile {
            name: format!("regimes_{}.csv", spec.label()),
            contents: csv.finish(),
        });
    }
    files.push(OutputFile {
        name: "regimes.svg".to_string(),
        contents: render("scale growth diagnostics", &[panel_s, panel_d, panel_l]),
    });
    let mut manifest = manifest_base("regimes", config, seed);
    manifest_insert(&mut manifest, "families", json!(family_summaries));
    Ok(RunOutput { files, manifest })
}

/// Tabulates the scaling and weight functions on a frequency grid and
/// verifies the partition-of-unity residual over the covered multipoles.
pub fn cmd_windows(config: &WindowsConfig, seed: u64) -> Result<RunOutput, RunError> {
    if !(1..=256).contains(&config.levels) {
        return Err(RunError::Config(format!(
            "levels = {} outside [1, 256]",
            config.levels
        )));
    }
    if !(2..=100_000).contains(&config.samples) {
        return Err(RunError::Config(format!(
            "samples = {} outside [2, 100000]",
            config.samples
        )));
    }
    let model = config.family.build()?;
    let seq = full_scales(&model, config.levels + 1)?;
    let scales = seq.scales().to_vec();
    let s_top = scales[config.levels];
    let s_prev = scales[config.levels - 1];
    if s_prev > MAX_PARTITION_ROWS {
        return Err(RunError::Feasibility(format!(
            "partition table up to floor(S_(J-1)) = {s_prev:.3e} exceeds {MAX_PARTITION_ROWS:.0} rows"
        )));
    }
    let windows = WindowSystem::from_values(scales, false)?;

    // Window profiles on a linear frequency grid reaching past the top scale.
    let u_max = s_top * 1.02;
    let mut csv = Csv::new(&["j", "u", "a", "b"]);
    let mut profile_series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for j in 0..=config.levels {
        let mut pts = Vec::new();
        for i in 0..config.samples {
            let u = u_max * i as f64 / (config.samples - 1) as f64;
            // a_0 ≡ 0, so b_j² = a_(j+1) − a_j holds uniformly down to j = 0.
            let a = if j == 0 { 0.0 } else { windows.scaling_fn(j, u)? };
            let b = if j < config.levels {
                windows.weight_fn(j, u)?
            } else {
                f64::NAN
            };
            csv.row(&[j.to_string(), fmt_f64(u), fmt_f64(a), fmt_f64(b)]);
            if j < config.levels {
                pts.push((u, b));
            }
        }
        if j < config.levels {
            profile_series.push((format!("b_{j}"), pts));
        }
    }

    // Partition-of-unity residual over every covered integer multipole.
    let l_hi = (s_prev * (1.0 + 1e-12)).floor() as u64;
    let mut pcsv = Csv::new(&["l", "sum", "residual"]);
    let mut residual_pts = Vec::new();
    let mut max_residual = 0.0_f64;
    for l in 1..=l_hi {
        let sum = windows.partition_sum(l as f64)?;
        let residual = sum - 1.0;
        max_residual = max_residual.max(residual.abs());
        pcsv.row(&[l.to_string(), fmt_f64(sum), fmt_f64(residual)]);
        residual_pts.push((l as f64, residual.abs().max(1e-18)));
    }
    if max_residual >= 1e-10 {
        return Err(RunError::Internal(format!(
            "partition-of-unity residual {max_residual:.3e} exceeds 1e-10"
        )));
    }

    let mut panel_b = Panel::new("weight functions", "u", "b_j(u)");
    let step = profile_series.len().div_ceil(12).max(1);
    for (label, pts) in profile_series.into_iter().step_by(step) {
        panel_b.add_series(&label, pts);
    }
    let mut panel_r =
        Panel::new("partition residual", "l", "|sum - 1|").with_log(false, true);
    panel_r.add_series("residual", residual_pts);

    let mut manifest = manifest_base("windows", config, seed);
    manifest_insert(&mut manifest, "family", json!(config.family.label()));
    manifest_insert(&mut manifest, "u_max", json!(u_max));
    manifest_insert(&mut manifest, "partition_lmax", json!(l_hi));
    manifest_insert(&mut manifest, "max_partition_residual", json!(max_residual));
    Ok(RunOutput {
        files: vec![
            OutputFile {
                name: "windows.csv".to_string(),
                contents: csv.finish(),
            },
            OutputFile {
                name: "partition.csv".to_string(),
                contents: pcsv.finish(),
            },
            OutputFile {
                name: "windows.svg".to_string(),
                contents: render("window system", &[panel_b, panel_r]),
            },
        ],
        manifest,
    })
}

/// Profiles the spatial decay of one needlet per family at a fixed level
/// and fits the decay exponents.
pub fn cmd_localization(
    config: &LocalizationConfig,
    seed: u64,
) -> Result<RunOutput, RunError> {
    check_families(&config.families)?;
    if !(1..=64).contains(&config.level) {
        return Err(RunError::Config(format!(
            "level = {} outside [1, 64]",
            config.level
        )));
    }
    if !(8..=100_000).contains(&config.angles) {
        return Err(RunError::Config(format!(
            "angles = {} outside [8, 100000]",
            config.angles
        )));
    }
    let angle_grid: Vec<f64> = (0..config.angles)
        .map(|i| std::f64::consts::PI * (i + 1) as f64 / config.angles as f64)
        .collect();
    let mut files = Vec::new();
    let mut panel =
        Panel::new("needlet decay", "theta", "|psi|").with_log(false, true);
    let mut summaries = Vec::new();
    for spec in &config.families {
        let label = spec.label();
        let model = spec.build()?;
        let seq = system_scales(&model, config.level + 2)?;
        check_scale_cap(&label, seq.scale(config.level + 1)?, GRID_SCALE_CAP)?;
        let sys = NeedletSystem::new(&seq, config.level + 1)?;
        let profile = sys.localization_profile(config.level, 0, &angle_grid)?;
        let mut csv = Csv::new(&["theta", "abs_psi"]);
        let mut pts = Vec::new();
        for (&theta, &a) in profile.theta.iter().zip(&profile.abs_psi) {
            csv.row_f64(&[theta, a]);
            pts.push((theta, a));
        }
        panel.add_series(&label, pts);
        files.push(OutputFile {
            name: format!("localization_{label}.csv"),
            contents: csv.finish(),
        });
        summaries.push(json!({
            "family": label,
            "regime": sys.regime().to_string(),
            "m_hat_width": profile.m_hat_width,
            "m_hat_center": profile.m_hat_center,
            "m_hat_selected": profile.m_hat_selected,
            "scale_width": profile.scale_width,
            "scale_center": profile.scale_center,
        }));
    }
    files.push(OutputFile {
        name: "localization.svg".to_string(),
        contents: render("spatial localization", &[panel]),
    });
    let mut manifest = manifest_base("localization", config, seed);
    manifest_insert(&mut manifest, "families", json!(summaries));
    Ok(RunOutput { files, manifest })
}

/// Compares analytic and Monte-Carlo coefficient correlations along
/// equator pairs and reports separation verdicts per family.
pub fn cmd_correlation(
    config: &CorrelationConfig,
    seed: u64,
) -> Result<RunOutput, RunError> {
    check_families(&config.families)?;
    if !(1..=64).contains(&config.level) {
        return Err(RunError::Config(format!(
            "level = {} outside [1, 64]",
            config.level
        )));
    }
    if !(8..=100_000).contains(&config.replicates) {
        return Err(RunError::Config(format!(
            "replicates = {} outside [8, 100000]",
            config.replicates
        )));
    }
    if !(2..=10_000).contains(&config.pairs) {
        return Err(RunError::Config(format!(
            "pairs = {} outside [2, 10000]",
            config.pairs
        )));
    }
    let spectrum = config.spectrum.build()?;
    let beta = spectrum.beta_smoothness();
    let mut files = Vec::new();
    let mut verdicts = Csv::new(&["family", "beta", "verdict", "satisfied_from"]);
    let mut panel =
        Panel::new("coefficient correlation", "theta", "|corr|").with_log(false, true);
    let mut summaries = Vec::new();
    let mut spectrum_lmax = 8_u32;
    for spec in &config.families {
        let label = spec.label();
        let model = spec.build()?;

        // Separation verdict against the spectrum's flatness exponent.
        let (verdict, satisfied) = if model.is_shrinking_family() {
            let horizon = config.level.max(62) + 2;
            let check = separation_threshold_check(&model, beta, horizon)?;
            match check.satisfied_from {
                Some(m) if m <= config.level => ("pass", Some(m)),
                other => ("fail", other),
            }
        } else {
            ("not-applicable", None)
        };
        verdicts.row(&[
            label.clone(),
            fmt_f64(beta),
            verdict.to_string(),
            satisfied.map_or_else(|| "nan".to_string(), |m| m.to_string()),
        ]);

        let seq = system_scales(&model, config.level + 2)?;
        check_scale_cap(&label, seq.scale(config.level + 1)?, SIMULATION_SCALE_CAP)?;
        let sys = NeedletSystem::new(&seq, config.level + 1)?;
        let grid = sys.grid(config.level)?;

        // Pairs along the ring nearest the equator, azimuth gaps spread
        // over the half circle.
        let target = std::f64::consts::FRAC_PI_2;
        let mut ring = 0;
        let mut best = f64::INFINITY;
        for (i, &t) in grid.ring_thetas().iter().enumerate() {
            let d = (t - target).abs();
            if d < best {
                best = d;
                ring = i;
            }
        }
        let n_phi = grid.n_phi();
        let base = ring * n_phi;
        let max_gap = n_phi / 2;
        if max_gap == 0 {
            return Err(RunError::Feasibility(format!(
                "{label}: level-{} grid has a single azimuth per ring",
                config.level
            )));
        }
        let mut gaps: Vec<usize> = (1..=config.pairs)
            .map(|i| {
                ((i as f64 / config.pairs as f64) * max_gap as f64).round() as usize
            })
            .map(|g| g.clamp(1, max_gap))
            .collect();
        gaps.dedup();
        let pair_list: Vec<(usize, usize)> =
            gaps.iter().map(|&g| (base, base + g)).collect();
        let thetas: Vec<f64> = pair_list
            .iter()
            .map(|&(a, b)| grid.point(a).great_circle_angle(grid.point(b)))
            .collect();
        let analytic: Vec<f64> = pair_list
            .iter()
            .map(|&(a, b)| coeff_correlation(&sys, &spectrum, config.level, a, b))
            .collect::<Result<_, _>>()?;

        // Empirical correlation: one weight row per distinct point, then
        // plain dot products against seeded spectral replicates.
        let support = sys.support(config.level)?;
        let lmax = support.last().copied().ok_or_else(|| {
            RunError::Feasibility(format!(
                "{label}: level {} covers no integer multipole",
                config.level
            ))
        })?;
        let mut point_ids = Vec::with_capacity(gaps.len() + 1);
        point_ids.push(base);
        point_ids.extend(gaps.iter().map(|&g| base + g));
        let rows: Vec<Vec<f64>> = point_ids
            .iter()
            .map(|&k| sys.coefficient_weights(config.level, k, lmax))
            .collect::<Result<_, _>>()?;
        let coeff_samples: Vec<Vec<f64>> = (0..config.replicates as u64)
            .into_par_iter()
            .map(|r| -> Result<Vec<f64>, FieldError> {
                let sample = simulate_field_replicate(&spectrum, lmax, seed, r)?;
                let coeffs = sample.coeffs().coeffs();
                Ok(rows.iter().map(|row| dot(row, coeffs)).collect())
            })
            .collect::<Result<_, _>>()?;

        let mut csv = Csv::new(&["theta", "corr_analytic", "corr_empirical", "se"]);
        let mut ana_pts = Vec::new();
        let mut emp_pts = Vec::new();
        let s_base: f64 = coeff_samples.iter().map(|b| b[0] * b[0]).sum();
        for (i, (&theta, &ana)) in thetas.iter().zip(&analytic).enumerate() {
            let mut s_ab = 0.0;
            let mut s_bb = 0.0;
            for b in &coeff_samples {
                s_ab += b[0] * b[i + 1];
                s_bb += b[i + 1] * b[i + 1];
            }
            let denom = (s_base * s_bb).sqrt();
            let rho = if denom > 0.0 { s_ab / denom } else { f64::NAN };
            let se = (1.0 - rho * rho) / ((config.replicates as f64) - 1.0).sqrt();
            csv.row_f64(&[theta, ana, rho, se]);
            ana_pts.push((theta, ana.abs()));
            emp_pts.push((theta, rho.abs()));
        }
        panel.add_series(&format!("{label} analytic"), ana_pts);
        panel.add_series(&format!("{label} empirical"), emp_pts);
        files.push(OutputFile {
            name: format!("correlation_{label}.csv"),
            contents: csv.finish(),
        });

        let profile =
            correlation_decay_profile(&sys, &spectrum, config.level, &pair_list, None).ok();
        summaries.push(json!({
            "family": label,
            "verdict": verdict,
            "satisfied_from": satisfied,
            "support_lmax": lmax,
            "pairs": pair_list.len(),
            "decay_exponent": profile.as_ref().map(|p| p.n_hat),
            "decay_scale": profile.as_ref().map(|p| p.decay_scale),
        }));
        spectrum_lmax = spectrum_lmax.max(lmax);
    }

    let mut scsv = Csv::new(&["l", "C_l", "G_l"]);
    for l in 1..=spectrum_lmax {
        scsv.row(&[
            l.to_string(),
            fmt_f64(spectrum.spectrum_eval(l)?),
            fmt_f64(spectrum.modulation_eval(f64::from(l))),
        ]);
    }
    files.push(OutputFile {
        name: "spectrum.csv".to_string(),
        contents: scsv.finish(),
    });
    files.push(OutputFile {
        name: "verdicts.csv".to_string(),
        contents: verdicts.finish(),
    });
    files.push(OutputFile {
        name: "correlation.svg".to_string(),
        contents: render("coefficient correlation decay", &[panel]),
    });
    let mut manifest = manifest_base("correlation", config, seed);
    manifest_insert(&mut manifest, "beta_smoothness", json!(beta));
    manifest_insert(&mut manifest, "families", json!(summaries));
    Ok(RunOutput { files, manifest })
}

/// Runs the subsampled goodness-of-fit statistic for each family and level,
/// emitting moment tables, verdicts, and a structured report.
pub fn cmd_gof(config: &GofFileConfig, seed: u64) -> Result<RunOutput, RunError> {
    check_families(&config.families)?;
    if config.levels.is_empty() {
        return Err(RunError::Config("levels list must not be empty".into()));
    }
    if let Some(&bad) = config.levels.iter().find(|&&l| !(1..=32).contains(&l)) {
        return Err(RunError::Config(format!("level = {bad} outside [1, 32]")));
    }
    if !(4..=100_000).contains(&config.replicates) {
        return Err(RunError::Config(format!(
            "replicates = {} outside [4, 100000]",
            config.replicates
        )));
    }
    if !(config.epsilon_sep > 0.0 && config.epsilon_sep < 1.0) {
        return Err(RunError::Config(format!(
            "epsilon_sep = {} outside (0, 1)",
            config.epsilon_sep
        )));
    }
    let spectrum = config.spectrum.build()?;
    let mut files = Vec::new();
    let mut verdicts = Csv::new(&["family", "level", "verdict", "detail"]);
    let mut results_json = Vec::new();
    let mut panel_mean = Panel::new("statistic mean", "level", "mean");
    let mut panel_var = Panel::new("variance check", "level", "var / exact_var");
    let mut panel_ks = Panel::new("normal fit", "level", "KS distance");
    for spec in &config.families {
        let label = spec.label();
        let model = spec.build()?;
        let mut csv = Csv::new(&[
            "j", "card", "mean", "var", "exact_var", "skew", "exkurt", "ks",
        ]);
        let mut mean_pts = Vec::new();
        let mut var_pts = Vec::new();
        let mut ks_pts = Vec::new();
        for &level in &config.levels {
            let gof_config = GofConfig {
                shift_model: model.clone(),
                spectrum: spectrum.clone(),
                level,
                epsilon_sep: config.epsilon_sep,
                replicates: config.replicates,
                seed,
            };
            match run_gof(&gof_config) {
                Ok(report) => {
                    csv.row(&[
                        report.level.to_string(),
                        report.card.to_string(),
                        fmt_f64(report.mean),
                        fmt_f64(report.variance),
                        fmt_f64(report.exact_variance),
                        fmt_f64(report.skewness),
                        fmt_f64(report.excess_kurtosis),
                        fmt_f64(report.kolmogorov_distance),
                    ]);
                    verdicts.row(&[
                        label.clone(),
                        level.to_string(),
                        "pass".to_string(),
                        format!("card {}", report.card),
                    ]);
                    let x = level as f64;
                    mean_pts.push((x, report.mean));
                    var_pts.push((x, report.variance / report.exact_variance));
                    ks_pts.push((x, report.kolmogorov_distance));
                    results_json.push(json!({
                        "family": label,
                        "level": report.level,
                        "verdict": "pass",
                        "card": report.card,
                        "min_separation": report.min_separation,
                        "replicates": report.replicates,
                        "mean": report.mean,
                        "mean_se": report.mean_se,
                        "variance": report.variance,
                        "variance_se": report.variance_se,
                        "exact_variance": report.exact_variance,
                        "skewness": report.skewness,
                        "excess_kurtosis": report.excess_kurtosis,
                        "kolmogorov_distance": report.kolmogorov_distance,
                    }));
                }
                Err(GofError::SeparationNotSatisfied {
                    level: lvl,
                    beta,
                    satisfied_from,
                }) => {
                    let detail = match satisfied_from {
                        Some(m) => format!("separation first holds from level {m}"),
                        None => "separation threshold never satisfied".to_string(),
                    };
                    verdicts.row(&[
                        label.clone(),
                        lvl.to_string(),
                        "fail".to_string(),
                        detail.clone(),
                    ]);
                    results_json.push(json!({
                        "family": label,
                        "level": lvl,
                        "verdict": "fail",
                        "beta": beta,
                        "satisfied_from": satisfied_from,
                        "detail": detail,
                    }));
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !mean_pts.is_empty() {
            panel_mean.add_series(&label, mean_pts);
            panel_var.add_series(&label, var_pts);
            panel_ks.add_series(&label, ks_pts);
        }
        files.push(OutputFile {
            name: format!("gof_summary_{label}.csv"),
            contents: csv.finish(),
        });
    }
    files.push(OutputFile {
        name: "verdicts.csv".to_string(),
        contents: verdicts.finish(),
    });
    let report = json!({
        "spectrum": serde_json::to_value(&config.spectrum).expect("spectrum serializes"),
        "epsilon_sep": config.epsilon_sep,
        "replicates": config.replicates,
        "seed": seed,
        "results": results_json,
    });
    let mut report_text =
        serde_json::to_string_pretty(&report).expect("report serializes");
    report_text.push('\n');
    files.push(OutputFile {
        name: "gof_report.json".to_string(),
        contents: report_text,
    });
    files.push(OutputFile {
        name: "gof.svg".to_string(),
        contents: render(
            "goodness-of-fit diagnostics",
            &[panel_mean, panel_var, panel_ks],
        ),
    });
    let mut manifest = manifest_base("gof", config, seed);
    manifest_insert(&mut manifest, "results", report["results"].clone());
    Ok(RunOutput { files, manifest })
}

/// Tabulates one family's raw scale sequence with its per-level
/// diagnostics, plus separation ratios for shrinking families.
pub fn cmd_scales(config: &ScalesConfig, seed: u64) -> Result<RunOutput, RunError> {
    if !(4..=100_000).contains(&config.levels) {
        return Err(RunError::Config(format!(
            "levels = {} outside [4, 100000]",
            config.levels
        )));
    }
    if let Some(&bad) = config
        .betas
        .iter()
        .find(|&&b| !(0.0..1.0).contains(&b) || !b.is_finite())
    {
        return Err(RunError::Config(format!("beta = {bad} outside [0, 1)")));
    }
    let model = config.family.build()?;
    let levels = match model.table_len() {
        Some(n) => config.levels.min(n),
        None => config.levels,
    };
    let seq = build_scales(&model, levels)?;
    let n = seq.len();
    let mut csv = Csv::new(&["j", "S", "h", "delta", "L"]);
    let mut s_pts = Vec::new();
    for j in 0..n {
        let s = seq.scale(j)?;
        csv.row(&[
            j.to_string(),
            fmt_f64(s),
            fmt_f64(seq.dilation_factor(j).unwrap_or(f64::NAN)),
            fmt_f64(seq.bandwidth_ratio(j).unwrap_or(f64::NAN)),
            fmt_f64(seq.log_growth_index(j).unwrap_or(f64::NAN)),
        ]);
        s_pts.push((j as f64, s));
    }
    let mut files = vec![OutputFile {
        name: "scales.csv".to_string(),
        contents: csv.finish(),
    }];
    let mut panel_s = Panel::new("scale sequence", "j", "S_j").with_log(false, true);
    panel_s.add_series(&config.family.label(), s_pts);
    let mut panels = vec![panel_s];

    let mut separation_info = Vec::new();
    if model.is_shrinking_family() && !config.betas.is_empty() {
        let mut sep = Csv::new(&["j", "beta", "ratio"]);
        let mut sep_panel =
            Panel::new("separation ratios", "j", "R_j(beta)").with_log(false, true);
        for &b in &config.betas {
            let mut pts = Vec::new();
            for j in 1..n {
                let r = seq.separation_ratio(j, b)?;
                sep.row(&[j.to_string(), fmt_f64(b), fmt_f64(r)]);
                pts.push((j as f64, r));
            }
            sep_panel.add_series(&format!("beta={b}"), pts);
            let check = separation_threshold_check(&model, b, (n - 1).max(1))?;
            separation_info.push(json!({
                "beta": b,
                "satisfied_from": check.satisfied_from,
            }));
        }
        files.push(OutputFile {
            name: "separation.csv".to_string(),
            contents: sep.finish(),
        });
        panels.push(sep_panel);
    }
    files.push(OutputFile {
        name: "scales.svg".to_string(),
        contents: render("scale sequence diagnostics", &panels),
    });

    let mut manifest = manifest_base("scales", config, seed);
    manifest_insert(&mut manifest, "regime", json!(seq.regime().to_string()));
    manifest_insert(
        &mut manifest,
        "convergence",
        json!(seq.convergence().to_string()),
    );
    manifest_insert(&mut manifest, "truncated", json!(seq.truncated()));
    manifest_insert(&mut manifest, "levels_built", json!(n));
    manifest_insert(
        &mut manifest,
        "growth_description",
        json!(model.gamma_description()),
    );
    manifest_insert(
        &mut manifest,
        "regularity_index",
        json!(model.regularity_index()),
    );
    manifest_insert(&mut manifest, "separation", json!(separation_info));
    Ok(RunOutput { files, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::config::{SineTermSpec, SpectrumSpec};

    fn file<'a>(out: &'a RunOutput, name: &str) -> &'a str {
        &out.files
            .iter()
            .find(|f| f.name == name)
            .unwrap_or_else(|| panic!("missing output file {name}"))
            .contents
    }

    #[test]
    fn regimes_classifies_default_trio() {
        let out = cmd_regimes(&RegimesConfig::default(), 0).unwrap();
        let fams = &out.manifest["families"];
        assert_eq!(fams[0]["regime"], "shrinking");
        assert_eq!(fams[1]["regime"], "stable");
        assert_eq!(fams[2]["regime"], "spreading");
        let csv = file(&out, "regimes_polynomial_eta2.csv");
        assert!(csv.starts_with("j,S,delta,L,regime\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with("shrinking"));
        assert!(out.files.iter().any(|f| f.name == "regimes.svg"));
    }

    #[test]
    fn regimes_rejects_empty_and_duplicates() {
        let cfg = RegimesConfig {
            families: vec![],
            levels: 32,
        };
        let err = cmd_regimes(&cfg, 0).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let cfg = RegimesConfig {
            families: vec![
                ShiftModelSpec::Polynomial { eta: 2.0 },
                ShiftModelSpec::Polynomial { eta: 2.0 },
            ],
            levels: 32,
        };
        assert_eq!(cmd_regimes(&cfg, 0).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn regimes_explicit_table_kept_out_of_figure() {
        let cfg = RegimesConfig {
            families: vec![ShiftModelSpec::ExplicitTable {
                values: (0..24).map(|j| f64::from(j) * 0.7 + 1.0).collect(),
            }],
            levels: 128,
        };
        let out = cmd_regimes(&cfg, 0).unwrap();
        assert!(file(&out, "regimes_explicit_table_n24.csv").lines().count() > 20);
        assert!(!file(&out, "regimes.svg").contains("polyline"));
    }

    #[test]
    fn regimes_overflow_is_feasibility_error() {
        let cfg = RegimesConfig {
            families: vec![ShiftModelSpec::DoubleExponential {
                a: 300.0,
                ratio: 10.0,
            }],
            levels: 32,
        };
        assert_eq!(cmd_regimes(&cfg, 0).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn windows_residual_below_tolerance() {
        let out = cmd_windows(&WindowsConfig::default(), 0).unwrap();
        let max = out.manifest["max_partition_residual"].as_f64().unwrap();
        assert!(max < 1e-10, "residual {max}");
        let csv = file(&out, "windows.csv");
        assert!(csv.starts_with("j,u,a,b\n"));
        // First row: j = 0, u = 0, a = 0 (convention), b = b_0(0).
        assert!(csv.lines().nth(1).unwrap().starts_with("0,0,0,"));
        assert!(file(&out, "partition.csv").starts_with("l,sum,residual\n"));
    }

    #[test]
    fn localization_orders_decay_scales() {
        let cfg = LocalizationConfig {
            angles: 160,
            ..LocalizationConfig::default()
        };
        let out = cmd_localization(&cfg, 0).unwrap();
        let fams = out.manifest["families"].as_array().unwrap();
        assert_eq!(fams.len(), 3);
        for fam in fams {
            let m = fam["m_hat_selected"].as_f64().unwrap();
            assert!(m.is_finite());
        }
        assert_eq!(fams[0]["regime"], "shrinking");
        assert_eq!(fams[1]["regime"], "stable");
        assert_eq!(fams[2]["regime"], "spreading");
        let csv = file(&out, "localization_standard_geometric_b2.csv");
        assert!(csv.starts_with("theta,abs_psi\n"));
        assert_eq!(csv.lines().count(), 161);
    }

    #[test]
    fn correlation_verdicts_split_slow_and_valid_families() {
        let cfg = CorrelationConfig {
            replicates: 64,
            pairs: 12,
            ..CorrelationConfig::default()
        };
        let out = cmd_correlation(&cfg, 7).unwrap();
        let verdicts = file(&out, "verdicts.csv");
        let lines: Vec<&str> = verdicts.lines().collect();
        assert_eq!(lines[0], "family,beta,verdict,satisfied_from");
        assert!(lines[1].starts_with("logarithmic_eta1,0.5,fail"));
        assert!(lines[2].starts_with("mild_exponential_eta1_p0p5,0.5,pass"));
        let corr = file(&out, "correlation_mild_exponential_eta1_p0p5.csv");
        assert!(corr.starts_with("theta,corr_analytic,corr_empirical,se\n"));
        // Analytic and empirical columns agree loosely at 64 replicates.
        for line in corr.lines().skip(1) {
            let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!((cells[1] - cells[2]).abs() < 0.5);
        }
        assert!(file(&out, "spectrum.csv").starts_with("l,C_l,G_l\n"));
    }

    #[test]
    fn gof_emits_fail_rows_without_aborting() {
        let cfg = GofFileConfig {
            replicates: 48,
            levels: vec![2],
            ..GofFileConfig::default()
        };
        let out = cmd_gof(&cfg, 11).unwrap();
        let verdicts = file(&out, "verdicts.csv");
        assert!(verdicts.contains("logarithmic_eta1,2,fail"));
        assert!(verdicts.contains("mild_exponential_eta1_p0p5,2,pass"));
        let summary = file(&out, "gof_summary_mild_exponential_eta1_p0p5.csv");
        assert!(summary.starts_with("j,card,mean,var,exact_var,skew,exkurt,ks\n"));
        assert_eq!(summary.lines().count(), 2);
        // The slow family's summary holds only the header.
        assert_eq!(
            file(&out, "gof_summary_logarithmic_eta1.csv").lines().count(),
            1
        );
        let report: serde_json::Value =
            serde_json::from_str(file(&out, "gof_report.json")).unwrap();
        assert_eq!(report["results"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn gof_propagates_infeasible_levels() {
        let cfg = GofFileConfig {
            families: vec![ShiftModelSpec::MildExponential { eta: 1.0, p: 0.5 }],
            levels: vec![9],
            replicates: 16,
            ..GofFileConfig::default()
        };
        assert_eq!(cmd_gof(&cfg, 0).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn scales_emits_undefined_cells_as_nan() {
        let out = cmd_scales(&ScalesConfig::default(), 0).unwrap();
        let csv = file(&out, "scales.csv");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "j,S,h,delta,L");
        assert!(lines[1].starts_with("0,1,"));
        assert!(lines[1].ends_with(",nan")); // L_0 undefined
        assert!(lines[1].contains(",nan,")); // delta_0 undefined
        let last = lines.last().unwrap();
        assert!(last.contains(",nan,")); // h undefined at the last level
        let sep = file(&out, "separation.csv");
        assert!(sep.starts_with("j,beta,ratio\n"));
        assert_eq!(out.manifest["regime"], "shrinking");
        assert_eq!(
            out.manifest["separation"].as_array().unwrap().len(),
            3
        );
    }

    #[test]
    fn scales_skips_separation_for_non_shrinking() {
        let cfg = ScalesConfig {
            family: ShiftModelSpec::StandardGeometric { ratio: 2.0 },
            ..ScalesConfig::default()
        };
        let out = cmd_scales(&cfg, 0).unwrap();
        assert!(!out.files.iter().any(|f| f.name == "separation.csv"));
        assert_eq!(out.manifest["regime"], "stable");
    }

    #[test]
    fn byte_identical_reruns() {
        let cfg = CorrelationConfig {
            families: vec![ShiftModelSpec::MildExponential { eta: 1.0, p: 0.5 }],
            spectrum: SpectrumSpec::ModulatedSine {
                alpha: 2.0,
                terms: vec![SineTermSpec {
                    c: 1.0,
                    d: 2.0,
                    m: 1.0,
                    beta: 0.5,
                }],
            },
            level: 3,
            replicates: 32,
            pairs: 8,
        };
        let a = cmd_correlation(&cfg, 42).unwrap();
        let b = cmd_correlation(&cfg, 42).unwrap();
        for (fa, fb) in a.files.iter().zip(&b.files) {
            assert_eq!(fa.name, fb.name);
            assert_eq!(fa.contents, fb.contents, "file {} differs", fa.name);
        }
        assert_eq!(a.manifest, b.manifest);
        // A different seed must change the Monte-Carlo column.
        let c = cmd_correlation(&cfg, 43).unwrap();
        let name = "correlation_mild_exponential_eta1_p0p5.csv";
        assert_ne!(file(&a, name), file(&c, name));
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::fs;
use std::time::{Duration, Instant};

use atomlight::fringe::full_period_grid;
use atomlight::interferometer::{fringe_after_loops, fringe_scan, LoopConfig, RamanDrive};
use atomlight::phase_comb::{compare_fringes, sawtooth_config, sawtooth_metrics, synthesize_fringe, unrolled_comb};
use atomlight::sensitivity::{
    destruction_sweep, enhancement_decomposition, paper_like_config, sensitivity, sql_benchmark,
    sql_benchmark_curve, SensitivityReport,
};
use atomlight::{GaussianChannel, GaussianState};
use atomlight_cli::spec::Preset;
use atomlight_cli::{parse_spec, run_experiment, simulate};
use atomlight_oracles::{cosine_fit, displaced_squeezed_vacuum, fock_photon_stats, FOCK_CUTOFF};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sql_identity() -> Check {
    let sql = sql_benchmark(4e13).map_err(|e| e.to_string())?;
    let quoted = format!("{sql:.2e}");
    let mut worst: f64 = 0.0;
    for n in [1e6, 1e10, 4e13] {
        let curve = sql_benchmark_curve(n, &full_period_grid(1024)).map_err(|e| e.to_string())?;
        let r = sensitivity(&curve, n).map_err(|e| e.to_string())?;
        worst = worst.max((r.delta_phi * n.sqrt() - 1.0).abs());
    }
    ensure(quoted == "1.58e-7" && worst < 1e-3, format!("SQL(4e13) = {quoted}, worst benchmark deviation {worst:.2e}"))
}

fn squeezing_law() -> Check {
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.5, 1.0, 2.0] {
        let s = GaussianChannel::two_mode_squeezer(2, r, 0.0, (0, 1))
            .and_then(|ch| ch.apply(&GaussianState::vacuum(2)?))
            .map_err(|e| e.to_string())?;
        let v = s.cov();
        let var = (v[(0, 0)] + v[(2, 2)] - 2.0 * v[(0, 2)]) / 2.0;
        worst = worst.max((var - (-2.0 * r).exp()).abs());
    }
    ensure(worst < 1e-9, format!("max |Var - e^(-2r)| = {worst:.2e}"))
}

fn fock_equivalence() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r = rng.gen_range(0.0..=0.5);
        let theta = rng.gen_range(-3.2..3.2);
        let alpha = Complex64::from_polar(rng.gen_range(0.0..=1.0), rng.gen_range(-3.2..3.2));
        let state = GaussianChannel::single_mode_squeezer(1, r, theta, 0)
            .and_then(|ch| ch.apply(&GaussianState::vacuum(1)?))
            .and_then(|s| GaussianChannel::displacement_channel(1, alpha, 0)?.apply(&s))
            .and_then(|s| s.photon_stats(0))
            .map_err(|e| e.to_string())?;
        let (mean, var) = fock_photon_stats(&displaced_squeezed_vacuum(alpha, Complex64::from_polar(r, theta), FOCK_CUTOFF));
        worst = worst.max((state.mean - mean).abs()).max((state.variance - var).abs());
    }
    ensure(worst < 1e-6, format!("20 states, max deviation {worst:.2e}"))
}

fn engine_equivalence() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    let grid = full_period_grid(128);
    let (mut worst, mut tested, mut max_j) = (0.0f64, 0, 0);
    while tested < 20 {
        let rf = rng.gen_range(0.0..=0.5);
        let config = LoopConfig {
            forward: RamanDrive::with_squeeze(rf).with_stark_phase(rng.gen_range(-1.0..1.0)),
            backward: RamanDrive::with_squeeze(rng.gen_range(0.0..=0.5)),
            atomic_decay: rng.gen_range(0.05..=1.0),
            seed_photons: 1e10,
            ..LoopConfig::default()
        };
        if !config.is_below_threshold() {
            continue;
        }
        let loops = rng.gen_range(1..=50);
        let engine = fringe_after_loops(&config, &grid, loops).map_err(|e| e.to_string())?;
        let comb = unrolled_comb(&config, loops).map_err(|e| e.to_string())?;
        let dev = compare_fringes(&engine, &synthesize_fringe(&comb, 0.0, &grid)).map_err(|e| e.to_string())?;
        worst = worst.max(dev);
        max_j = max_j.max(loops);
        tested += 1;
    }
    ensure(worst < 1e-6, format!("20 configs, J up to {max_j}, max deviation {worst:.2e}"))
}

fn cosine_degeneration() -> Check {
    let config = LoopConfig { atomic_decay: 1.0, seed_photons: 1e10, ..sawtooth_config() };
    let curve = fringe_scan(&config, &full_period_grid(1024)).map_err(|e| e.to_string())?;
    let (_, amplitude, residual) = cosine_fit(&curve.phi, &curve.signal);
    let rel = residual / amplitude;
    ensure(rel < 1e-9, format!("fit residual / amplitude = {rel:.2e}"))
}

fn sawtooth_growth() -> Check {
    let config = sawtooth_config();
    let grid = full_period_grid(1024);
    let mut metrics = Vec::new();
    for j in [1, 2, 4, 8] {
        let curve = fringe_after_loops(&config, &grid, j).map_err(|e| e.to_string())?;
        metrics.push(sawtooth_metrics(&curve).map_err(|e| e.to_string())?);
    }
    let ok = metrics
        .windows(2)
        .all(|w| w[1].slope_asymmetry >= w[0].slope_asymmetry && w[1].max_slope > w[0].max_slope);
    let asym: Vec<String> = metrics.iter().map(|m| format!("{:.3}", m.slope_asymmetry)).collect();
    let slope: Vec<String> = metrics.iter().map(|m| format!("{:.3e}", m.max_slope)).collect();
    ensure(ok, format!("asymmetry [{}], max slope [{}]", asym.join(", "), slope.join(", ")))
}

fn correlation_destruction() -> Check {
    let gains: Vec<f64> = (0..=18).map(|k| 1.0 + 0.5 * k as f64).chain([8.5]).collect();
    let mut sorted = gains.clone();
    sorted.sort_by(f64::total_cmp);
    let sweep = destruction_sweep(&paper_like_config(), &sorted).map_err(|e| e.to_string())?;
    let at = sweep.rows.iter().find(|r| r.g_am2 == 8.5).ok_or("missing 8.5 row")?;
    let loss = format!("{:.3}", at.loss);
    let flat = sweep.rows.iter().map(|r| r.signal_db.abs()).fold(0.0, f64::max);
    let monotone = sweep.rows.windows(2).all(|w| w[1].noise_db >= w[0].noise_db);
    let top = sweep.rows.last().map_or(0.0, |r| r.noise_db);
    ensure(
        loss == "0.882" && flat < 1e-6 && monotone,
        format!("l(8.5) = {loss}, max |signal| = {flat:.1e} dB, noise monotone = {monotone}, noise at G²=10: +{top:.3} dB"),
    )
}

fn sql_beating() -> Check {
    let mut best = (f64::NEG_INFINITY, String::new());
    for preset in [Preset::Sensitivity, Preset::Sweep] {
        let spec = parse_spec(&format!("preset = {preset}\n")).map_err(|e| e.to_string())?;
        let outcome = simulate(&spec).map_err(|e| e.to_string())?;
        let col = outcome.table.header.iter().position(|h| h == "db_beyond_sql").ok_or("no dB column")?;
        for row in &outcome.table.rows {
            if let atomlight_cli::run::Cell::Num(db) = row[col] {
                if db > best.0 {
                    best = (db, preset.to_string());
                }
            }
        }
    }
    ensure(best.0 >= 6.0, format!("best {:.2} dB beyond SQL ({} preset)", best.0, best.1))
}

fn decomposition() -> Check {
    let report = |slope: f64, db: f64| SensitivityReport {
        phi_opt: 0.0,
        signal: 1.0,
        slope,
        noise_std: 1.0,
        delta_phi: 1.0,
        n_flux: 4e13,
        sql: 1.0,
        db_beyond_sql: db,
        sensing_particles: 1.0,
    };
    let hybrid = report(10f64.powf(13.3 / 20.0), 8.3);
    let d = enhancement_decomposition(&hybrid, &report(1.0, 0.0), 2.3).map_err(|e| e.to_string())?;
    ensure(
        (d.comb_db - 6.0).abs() < 0.1 && (d.correlation_db - 2.3).abs() < 0.1,
        format!("amplification {:.2} dB, comb {:.2} dB, correlation {:.2} dB", d.amplification_db, d.comb_db, d.correlation_db),
    )
}

fn determinism() -> Check {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut files = 0;
    for preset in Preset::ALL {
        let spec = parse_spec(&format!("preset = {preset}\ngrid_points = 64\nbase = sawtooth\ngains = [1, 4, 8.5]\n"))
            .map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        for dir in &dirs {
            let written = run_experiment(&spec, dir.path()).map_err(|e| e.to_string())?;
            bytes.push(fs::read(written.data).map_err(|e| e.to_string())?);
        }
        if bytes[0] != bytes[1] {
            return Err(format!("{preset} output differs between runs"));
        }
        files += 1;
    }
    Ok(format!("{files} presets rerun, data files byte-identical"))
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 SQL identity", Duration::from_secs(1), sql_identity),
        ("2 two-mode squeezing law", Duration::from_secs(1), squeezing_law),
        ("3 Fock-oracle equivalence", Duration::from_secs(10), fock_equivalence),
        ("4 engine/closed-form equivalence", Duration::from_secs(60), engine_equivalence),
        ("5 cosine degeneration", Duration::from_secs(5), cosine_degeneration),
        ("6 sawtooth growth", Duration::from_secs(30), sawtooth_growth),
        ("7 correlation destruction", Duration::from_secs(60), correlation_destruction),
        ("8 SQL-beating existence", Duration::from_secs(120), sql_beating),
        ("9 decomposition bookkeeping", Duration::from_secs(1), decomposition),
        ("10 determinism", Duration::from_secs(10), determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let (status, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {budget:?} budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} criterion {name}: {detail} [{:.2}s]", elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

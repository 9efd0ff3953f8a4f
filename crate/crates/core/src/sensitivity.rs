//! Phase sensitivity, the standard quantum limit and the
//! correlation-destruction experiment.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::fringe::{check_same_grid, full_period_grid, FringeCurve, FringeSource};
use crate::gaussian::{GaussianChannel, GaussianState};
use crate::interferometer::{fringe_scan, steady_output, Insertion, LoopConfig, RamanDrive};

/// Best operating point of a fringe.
///
/// `delta_phi` and `sql` are in rad/√Hz at the flux `n_flux`;
/// `db_beyond_sql = 20·log10(sql/delta_phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub phi_opt: f64,
    pub signal: f64,
    /// |d signal / dφ| at `phi_opt`.
    pub slope: f64,
    pub noise_std: f64,
    pub delta_phi: f64,
    pub n_flux: f64,
    pub sql: f64,
    pub db_beyond_sql: f64,
    /// Phase-sensing particles per shot at `phi_opt`.
    pub sensing_particles: f64,
}

/// `1/√N`.
pub fn sql_benchmark(n_flux: f64) -> Result<f64> {
    check_range("n_flux", n_flux, "(0, inf)", n_flux > 0.0)?;
    Ok(1.0 / n_flux.sqrt())
}

/// Optimal sensitivity of a curve with a noise channel.
///
/// Per shot `δφ = √noise/|slope|`; it is scaled by `√N_sens/√N_flux`, where
/// `N_sens` is the number of sensing particles per shot (1 if the curve
/// does not carry it). Points at the rounding floor of the signal are
/// skipped since an exact dark fringe gives 0/0.
pub fn sensitivity(curve: &FringeCurve, n_flux: f64) -> Result<SensitivityReport> {
    let sql = sql_benchmark(n_flux)?;
    let noise = curve.noise.as_ref().ok_or(Error::MissingNoise)?;
    if curve.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let slope = curve.slope();
    let floor = f64::EPSILON * curve.signal.iter().copied().fold(0.0, f64::max);
    let sensing = |k: usize| curve.sensing.as_ref().map_or(1.0, |s| s[k]);
    let best = (0..curve.len())
        .filter(|&k| curve.signal[k] > floor && slope[k] != 0.0 && noise[k] > 0.0)
        .map(|k| (k, noise[k].sqrt() / slope[k].abs() * sensing(k).sqrt()))
        .filter(|(_, d)| d.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let (k, scaled) = best.ok_or(Error::ZeroSlope)?;
    let delta_phi = scaled / n_flux.sqrt();
    Ok(SensitivityReport {
        phi_opt: curve.phi[k],
        signal: curve.signal[k],
        slope: slope[k].abs(),
        noise_std: noise[k].sqrt(),
        delta_phi,
        n_flux,
        sql,
        db_beyond_sql: 20.0 * (sql / delta_phi).log10(),
        sensing_particles: sensing(k),
    })
}

/// Coherent Mach-Zehnder interferometer fed with `N_flux` photons in one
/// port, simulated in the Gaussian engine; signal is one output port.
pub fn sql_benchmark_curve(n_flux: f64, phi_grid: &[f64]) -> Result<FringeCurve> {
    check_range("n_flux", n_flux, "(0, inf)", n_flux > 0.0)?;
    if phi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let input = GaussianState::coherent(Complex64::new(n_flux.sqrt(), 0.0))
        .tensor(&GaussianState::vacuum(1)?);
    let splitter = GaussianChannel::beam_splitter(2, 0.5, (0, 1))?;
    let split = splitter.apply(&input)?;
    let stats = phi_grid
        .iter()
        .map(|&phi| {
            let arm = GaussianChannel::phase_shift(2, phi, 0)?.then(&splitter)?;
            arm.apply(&split)?.photon_stats(0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeCurve {
        phi: phi_grid.to_vec(),
        signal: stats.iter().map(|s| s.mean).collect(),
        noise: Some(stats.iter().map(|s| s.variance).collect()),
        sensing: Some(vec![n_flux; phi_grid.len()]),
        source: FringeSource::Benchmark,
    })
}

/// Illustrative parameter set in the SQL-beating regime: strong equal
/// Raman gains, 0.5% optical loss and a round-trip gain of about 0.9.
pub fn paper_like_config() -> LoopConfig {
    let r = 2.0;
    LoopConfig {
        forward: RamanDrive::with_squeeze(r),
        backward: RamanDrive::with_squeeze(r),
        transmissivity: 0.995,
        atomic_decay: 1.0 - 0.8 / (2.0 * r).cosh().powi(2),
        seed_photons: 1e12,
        ..LoopConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DestructionRow {
    pub g_am2: f64,
    pub loss: f64,
    /// Signal relative to the no-insertion run, 10·log10.
    pub signal_db: f64,
    /// Photon-number variance relative to the no-insertion run, 10·log10.
    pub noise_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DestructionSweep {
    pub phi: f64,
    pub rows: Vec<DestructionRow>,
}

pub const SWEEP_GRID_POINTS: usize = 1024;

/// Phase of the steepest point of the steady-state fringe.
pub fn steepest_phase(config: &LoopConfig) -> Result<f64> {
    Ok(steepest_phase_of(&fringe_scan(config, &full_period_grid(SWEEP_GRID_POINTS))?))
}

/// Grid phase of largest |slope| on a sampled fringe.
pub fn steepest_phase_of(curve: &FringeCurve) -> f64 {
    let slope = curve.slope();
    let k = (0..slope.len()).max_by(|&a, &b| slope[a].abs().total_cmp(&slope[b].abs())).unwrap_or(0);
    curve.phi.get(k).copied().unwrap_or(0.0)
}

/// Amplifier plus balancing attenuator in the optical arm, evaluated at the
/// steepest point of the hybrid fringe.
pub fn destruction_sweep(config: &LoopConfig, gains: &[f64]) -> Result<DestructionSweep> {
    let base = LoopConfig { insertion: None, ..config.clone() };
    let phi = steepest_phase(&base)?;
    destruction_sweep_at(&base, gains, phi)
}

/// Same as [`destruction_sweep`] at a caller-chosen phase.
pub fn destruction_sweep_at(config: &LoopConfig, gains: &[f64], phi: f64) -> Result<DestructionSweep> {
    let base = LoopConfig { insertion: None, phi, ..config.clone() };
    let reference = steady_output(&base)?.output;
    let rows = gains
        .par_iter()
        .map(|&g| {
            let insertion = Insertion::balanced(g)?;
            let out = steady_output(&LoopConfig { insertion: Some(insertion), ..base.clone() })?.output;
            Ok(DestructionRow {
                g_am2: g,
                loss: insertion.loss,
                signal_db: 10.0 * (out.mean / reference.mean).log10(),
                noise_db: 10.0 * (out.variance / reference.variance).log10(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DestructionSweep { phi, rows })
}

/// Budget of the sensitivity gain over a benchmark.
///
/// Amplitude-like ratios use 20·log10: `signal_enh_db` (slope ratio),
/// `amplification_db`, `noise_excess_db` (ratio of noise standard
/// deviations). `correlation_db` is what remains of the sensitivity
/// advantage once the comb's slope gain is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancementDecomposition {
    pub signal_enh_db: f64,
    pub amplification_db: f64,
    pub comb_db: f64,
    pub noise_excess_db: f64,
    pub correlation_db: f64,
}

pub fn enhancement_decomposition(
    hybrid: &SensitivityReport,
    benchmark: &SensitivityReport,
    recombine_gain_ratio: f64,
) -> Result<EnhancementDecomposition> {
    if (hybrid.n_flux - benchmark.n_flux).abs() > 1e-12 * benchmark.n_flux.abs() {
        return Err(Error::FluxMismatch(hybrid.n_flux, benchmark.n_flux));
    }
    check_range(
        "recombine_gain_ratio",
        recombine_gain_ratio,
        "(0, inf)",
        recombine_gain_ratio > 0.0,
    )?;
    let db = |ratio: f64| 20.0 * ratio.log10();
    let signal_enh_db = db(hybrid.slope / benchmark.slope);
    let amplification_db = db(recombine_gain_ratio);
    let comb_db = signal_enh_db - amplification_db;
    Ok(EnhancementDecomposition {
        signal_enh_db,
        amplification_db,
        comb_db,
        noise_excess_db: db(hybrid.noise_std / benchmark.noise_std),
        correlation_db: (hybrid.db_beyond_sql - benchmark.db_beyond_sql) - comb_db,
    })
}

/// Pairs two curves sampled on the same grid, e.g. hybrid and benchmark.
pub fn matched_reports(
    hybrid: &FringeCurve,
    benchmark: &FringeCurve,
    n_flux: f64,
) -> Result<(SensitivityReport, SensitivityReport)> {
    check_same_grid(&hybrid.phi, &benchmark.phi)?;
    Ok((sensitivity(hybrid, n_flux)?, sensitivity(benchmark, n_flux)?))
}

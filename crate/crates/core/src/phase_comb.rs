//! Closed-form steady state of the loop as a phase comb.
//!
//! The mean fields are unrolled loop by loop as polynomials in `z = e^{iφ}`:
//! every round trip multiplies part of the field by one more factor of
//! `z`, so the coefficient of `zⁿ` is the comb tooth that has memorized the
//! phase `n` times. The detected intensity `|S_f|²` is then collected into
//! harmonics `offset + Σ F_h cos(hφ + Λ_h)`.
//!
//! This path never touches covariance matrices and is used to cross-check
//! the Gaussian loop engine.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fringe::{central_differences, check_same_grid, FringeCurve, FringeSource};
use crate::interferometer::{LoopConfig, RamanDrive};

/// One comb term `amplitude·e^{i(nφ + offset)}` that has passed through the
/// atomic memory `passes` times. An extra atomic phase `θ` per pass adds
/// `−passes·θ` to its phase; `offset` already contains the ac-Stark and
/// configured atomic phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tooth {
    pub n: usize,
    pub passes: usize,
    pub amplitude: f64,
    pub offset: f64,
}

impl Tooth {
    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.offset)
    }
}

/// Both interference arms at the recombining (backward) Raman pass.
///
/// Amplitudes are in units of √photons. The atomic arm is stored in its
/// conjugate form, which is how it enters the optical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseComb {
    pub atomic: Vec<Tooth>,
    pub optical: Vec<Tooth>,
    /// Backward Raman gain `G = cosh r_b` applied to the optical arm.
    pub recombine_gain: f64,
    /// Backward cross gain `g = sinh r_b` applied to the atomic arm.
    pub recombine_cross: f64,
    /// Number of loops unrolled (the tooth count `J`).
    pub loops: usize,
}

/// Harmonic content `offset + Σ magnitude·cos(order·φ + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeHarmonics {
    pub offset: f64,
    pub terms: Vec<Harmonic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: usize,
    pub magnitude: f64,
    pub phase: f64,
}

impl FringeHarmonics {
    pub fn evaluate(&self, phi: f64) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|t| t.magnitude * (t.order as f64 * phi + t.phase).cos())
                .sum::<f64>()
    }
}

/// Coefficients indexed by `[n][passes]`.
type Poly = Vec<Vec<Complex64>>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Adds `factor·src` shifted by `(dn, dm)` into `dst`, growing it as needed.
fn add_shifted(dst: &mut Poly, src: &Poly, factor: Complex64, dn: usize, dm: usize) {
    for (n, row) in src.iter().enumerate() {
        for (m, c) in row.iter().enumerate() {
            add_term(dst, n + dn, m + dm, c * factor);
        }
    }
}

fn add_term(dst: &mut Poly, n: usize, m: usize, c: Complex64) {
    if dst.len() <= n {
        dst.resize(n + 1, Vec::new());
    }
    if dst[n].len() <= m {
        dst[n].resize(m + 1, zero());
    }
    dst[n][m] += c;
}

fn to_teeth(poly: &Poly) -> Vec<Tooth> {
    poly.iter()
        .enumerate()
        .flat_map(|(n, row)| {
            row.iter().enumerate().map(move |(passes, c)| Tooth {
                n,
                passes,
                amplitude: c.norm(),
                offset: c.arg(),
            })
        })
        .collect()
}

fn l1(poly: &Poly) -> f64 {
    poly.iter().flatten().map(|c| c.norm()).sum()
}

fn l1_diff(a: &Poly, b: &Poly) -> f64 {
    let get = |p: &Poly, n: usize, m: usize| p.get(n).and_then(|r| r.get(m)).copied().unwrap_or_default();
    let rows = a.len().max(b.len());
    (0..rows)
        .map(|n| {
            let cols = a.get(n).map_or(0, Vec::len).max(b.get(n).map_or(0, Vec::len));
            (0..cols).map(|m| (get(a, n, m) - get(b, n, m)).norm()).sum::<f64>()
        })
        .sum()
}

/// Per-loop coefficients of the mean-field recursion.
struct CombRecursion {
    seed: f64,
    survival: f64,
    optical: f64,
    atomic_phase: Complex64,
    cf: f64,
    sf: f64,
    cb: f64,
    sb: f64,
}

impl CombRecursion {
    fn new(config: &LoopConfig) -> Self {
        let (rf, rb) = (config.forward.squeeze(), config.backward.squeeze());
        Self {
            seed: config.seed_photons.sqrt(),
            survival: (1.0 - config.atomic_decay).sqrt(),
            optical: config.optical_amplitude(),
            atomic_phase: Complex64::from_polar(1.0, -config.atomic_phase_per_loop()),
            cf: rf.cosh(),
            sf: rf.sinh(),
            cb: rb.cosh(),
            sb: rb.sinh(),
        }
    }

    /// Arms at recombination given the conjugate atomic amplitude `held`
    /// entering the loop: (optical, conjugate atomic).
    fn arms(&self, held: &Poly) -> (Poly, Poly) {
        let real = |x: f64| Complex64::new(x, 0.0);
        // optical: t·z·(G_f α + g_f P)
        let mut optical = Poly::new();
        add_term(&mut optical, 1, 0, real(self.optical * self.cf * self.seed));
        add_shifted(&mut optical, held, real(self.optical * self.sf), 1, 0);
        // atomic (conjugated), one more pass: e^{-iδ}(G_f P + g_f α)
        let mut atomic = Poly::new();
        add_term(&mut atomic, 0, 1, self.atomic_phase * self.sf * self.seed);
        add_shifted(&mut atomic, held, self.atomic_phase * self.cf, 0, 1);
        (optical, atomic)
    }

    /// Conjugate atomic amplitude kept after the loop: `√(1−γ)(G_b A + g_b O)`.
    fn next_held(&self, optical: &Poly, atomic: &Poly) -> Poly {
        let mut next = Poly::new();
        add_shifted(&mut next, atomic, Complex64::new(self.cb * self.survival, 0.0), 0, 0);
        add_shifted(&mut next, optical, Complex64::new(self.sb * self.survival, 0.0), 0, 0);
        next
    }

    fn comb(&self, held: &Poly, loops: usize) -> PhaseComb {
        let (optical, atomic) = self.arms(held);
        PhaseComb {
            atomic: to_teeth(&atomic),
            optical: to_teeth(&optical),
            recombine_gain: self.cb,
            recombine_cross: self.sb,
            loops,
        }
    }
}

/// Steady-state comb, unrolled until the held atomic comb stops changing
/// (relative L1 change below `steady_tol`).
pub fn steady_comb(config: &LoopConfig) -> Result<PhaseComb> {
    config.validate()?;
    if !config.is_below_threshold() {
        return Err(Error::AboveThreshold { round_trip: config.round_trip_gain() });
    }
    let rec = CombRecursion::new(config);
    let mut held = Poly::new();
    let mut change = 0.0;
    for loop_index in 1..=config.max_loops {
        let (optical, atomic) = rec.arms(&held);
        let next = rec.next_held(&optical, &atomic);
        let diff = l1_diff(&next, &held);
        change = if diff == 0.0 { 0.0 } else { diff / l1(&next) };
        if change < config.steady_tol {
            return Ok(rec.comb(&held, loop_index));
        }
        held = next;
    }
    Err(Error::NotConverged { loops: config.max_loops, residual: change })
}

/// Comb describing the output of loop number `loops`, starting from the
/// atomic vacuum. Threshold is not checked.
pub fn unrolled_comb(config: &LoopConfig, loops: usize) -> Result<PhaseComb> {
    config.validate()?;
    let rec = CombRecursion::new(config);
    let mut held = Poly::new();
    for _ in 1..loops.max(1) {
        let (optical, atomic) = rec.arms(&held);
        held = rec.next_held(&optical, &atomic);
    }
    Ok(rec.comb(&held, loops.max(1)))
}

/// Sums teeth of equal `n` with an extra phase `theta_a` per atomic pass.
pub fn collapse(teeth: &[Tooth], theta_a: f64) -> Vec<Complex64> {
    let len = teeth.iter().map(|t| t.n + 1).max().unwrap_or(0);
    let mut out = vec![zero(); len];
    for t in teeth {
        out[t.n] += Complex64::from_polar(t.amplitude, t.offset - t.passes as f64 * theta_a);
    }
    out
}

impl PhaseComb {
    /// Coefficients of `zⁿ` in the optical output `G·optical + g·atomic`.
    pub fn output_field(&self, theta_a: f64) -> Vec<Complex64> {
        let optical = collapse(&self.optical, theta_a);
        let atomic = collapse(&self.atomic, theta_a);
        let len = optical.len().max(atomic.len());
        (0..len)
            .map(|n| {
                optical.get(n).copied().unwrap_or_default() * self.recombine_gain
                    + atomic.get(n).copied().unwrap_or_default() * self.recombine_cross
            })
            .collect()
    }

    /// Collects `|Σ cₙ zⁿ|²` into harmonics.
    pub fn harmonics(&self, theta_a: f64) -> FringeHarmonics {
        let field = self.output_field(theta_a);
        let autocorr = |h: usize| -> Complex64 {
            field.iter().zip(field.iter().skip(h)).map(|(lo, hi)| hi * lo.conj()).sum()
        };
        let offset = autocorr(0).re;
        let terms = (1..field.len())
            .map(|h| {
                let r = autocorr(h);
                Harmonic { order: h, magnitude: 2.0 * r.norm(), phase: r.arg() }
            })
            .collect();
        FringeHarmonics { offset, terms }
    }
}

/// Illustrative below-threshold loop whose ac-Stark phase skews the fringe
/// into a sawtooth as loops accumulate.
pub fn sawtooth_config() -> LoopConfig {
    LoopConfig {
        forward: RamanDrive::with_squeeze(0.45).with_stark_phase(0.5),
        backward: RamanDrive::with_squeeze(0.45),
        atomic_decay: 0.8,
        seed_photons: 1e10,
        ..LoopConfig::default()
    }
}

/// Mean-field fringe of a comb; `theta_a` is an extra atomic phase added
/// at every atomic pass of every tooth.
pub fn synthesize_fringe(comb: &PhaseComb, theta_a: f64, phi_grid: &[f64]) -> FringeCurve {
    let harmonics = comb.harmonics(theta_a);
    FringeCurve {
        phi: phi_grid.to_vec(),
        signal: phi_grid.iter().map(|&phi| harmonics.evaluate(phi).max(0.0)).collect(),
        noise: None,
        sensing: None,
        source: FringeSource::ClosedForm,
    }
}

/// Largest deviation `|a − b|` over the grid, relative to `max(b)`.
pub fn compare_fringes(a: &FringeCurve, b: &FringeCurve) -> Result<f64> {
    check_same_grid(&a.phi, &b.phi)?;
    let max_dev = a
        .signal
        .iter()
        .zip(&b.signal)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if max_dev == 0.0 {
        return Ok(0.0);
    }
    let scale = b.signal.iter().copied().fold(0.0, f64::max);
    Ok(max_dev / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SawtoothMetrics {
    pub max_slope: f64,
    /// Steeper edge over shallower edge, always ≥ 1.
    pub slope_asymmetry: f64,
    pub argmax_phi: f64,
}

pub const MIN_METRIC_POINTS: usize = 256;

pub fn sawtooth_metrics(curve: &FringeCurve) -> Result<SawtoothMetrics> {
    if curve.len() < MIN_METRIC_POINTS {
        return Err(Error::GridTooCoarse { points: curve.len(), required: MIN_METRIC_POINTS });
    }
    let slope = central_differences(&curve.phi, &curve.signal);
    let rising = slope.iter().copied().fold(0.0, f64::max);
    let falling = slope.iter().map(|s| -s).fold(0.0, f64::max);
    let (steep, shallow) = if rising >= falling { (rising, falling) } else { (falling, rising) };
    let slope_asymmetry = if steep == 0.0 {
        1.0
    } else if shallow == 0.0 {
        f64::INFINITY
    } else {
        steep / shallow
    };
    let (k, max_slope) = slope
        .iter()
        .map(|s| s.abs())
        .enumerate()
        .fold((0, 0.0), |best, (k, s)| if s > best.1 { (k, s) } else { best });
    Ok(SawtoothMetrics { max_slope, slope_asymmetry, argmax_phi: curve.phi[k] })
}

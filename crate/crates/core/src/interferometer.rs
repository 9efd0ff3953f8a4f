//! Discrete-time model of the atom-light feedback loop.
//!
//! Each round trip joins a fresh optical mode to the atomic spin wave kept
//! in the vapor, splits them with forward Raman gain, applies the optical
//! phase and loss, recombines them with backward Raman gain, reads the
//! optical output and lets the atomic mode decay before the next loop.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::fringe::{FringeCurve, FringeSource};
use crate::gaussian::{GaussianChannel, GaussianState, PhotonStats};

pub const ATOM: usize = 0;
pub const LIGHT: usize = 1;
pub const MODE_LABELS: [&str; 2] = ["S_a", "S_L"];

/// Raman pump setting. The squeeze parameter is `r = |c_eta·A/Δ|·t` and
/// the per-pass ac-Stark phase is `δ = c_zeta·A²/Δ·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanDrive {
    pub pump_amplitude: f64,
    pub detuning: f64,
    pub c_eta: f64,
    pub c_zeta: f64,
    pub interaction_time: f64,
}

impl RamanDrive {
    /// Drive with squeeze parameter `r` and no ac-Stark shift.
    pub fn with_squeeze(r: f64) -> Self {
        Self { pump_amplitude: 1.0, detuning: 1.0, c_eta: r, c_zeta: 0.0, interaction_time: 1.0 }
    }

    pub fn with_stark_phase(mut self, delta: f64) -> Self {
        // δ = c_zeta·A²/Δ·t
        let a = self.pump_amplitude;
        self.c_zeta = delta * self.detuning / (a * a * self.interaction_time);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_range("pump_amplitude", self.pump_amplitude, "(0, inf)", self.pump_amplitude > 0.0)?;
        check_range("detuning", self.detuning, "nonzero", self.detuning != 0.0)?;
        check_range(
            "interaction_time",
            self.interaction_time,
            "(0, inf)",
            self.interaction_time > 0.0,
        )?;
        check_range("c_eta", self.c_eta, "finite", true)?;
        check_range("c_zeta", self.c_zeta, "finite", true)?;
        check_range("squeeze parameter", self.squeeze(), "finite", true)?;
        check_range("stark phase", self.stark_phase(), "finite", true)
    }

    pub fn squeeze(&self) -> f64 {
        (self.c_eta * self.pump_amplitude / self.detuning).abs() * self.interaction_time
    }

    /// Amplitude gain `G = cosh r`.
    pub fn gain(&self) -> f64 {
        self.squeeze().cosh()
    }

    pub fn stark_phase(&self) -> f64 {
        self.c_zeta * self.pump_amplitude * self.pump_amplitude / self.detuning * self.interaction_time
    }
}

/// Amplifier followed by an attenuator on the optical arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    /// Amplitude gain `G_AM ≥ 1`.
    pub amplifier_gain: f64,
    /// Attenuator loss `l ∈ [0, 1)`.
    pub loss: f64,
}

impl Insertion {
    /// Insertion with power gain `g_am2` and the loss `l = 1 − 1/G_AM²`
    /// that keeps the optical mean intensity unchanged.
    pub fn balanced(g_am2: f64) -> Result<Self> {
        check_range("amplifier power gain", g_am2, "[1, inf)", g_am2 >= 1.0)?;
        Ok(Self { amplifier_gain: g_am2.sqrt(), loss: 1.0 - 1.0 / g_am2 })
    }

    pub fn validate(&self) -> Result<()> {
        check_range("amplifier_gain", self.amplifier_gain, "[1, inf)", self.amplifier_gain >= 1.0)?;
        check_range("insertion loss", self.loss, "[0, 1)", (0.0..1.0).contains(&self.loss))
    }

    /// Net amplitude factor on the optical mean.
    pub fn amplitude_factor(&self) -> f64 {
        self.amplifier_gain * (1.0 - self.loss).sqrt()
    }
}

/// All knobs of one round trip plus the iteration controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub forward: RamanDrive,
    pub backward: RamanDrive,
    /// Optical phase shift per round trip (rad).
    pub phi: f64,
    /// Optical power transmissivity per round trip, in (0, 1].
    pub transmissivity: f64,
    /// Fraction of the atomic excitation lost per loop, in [0, 1].
    pub atomic_decay: f64,
    /// Extra atomic phase applied once per loop (rad).
    pub atomic_phase: f64,
    pub insertion: Option<Insertion>,
    /// Mean photon number of the coherent field entering the optical
    /// mode each round trip; zero means vacuum.
    pub seed_photons: f64,
    pub max_loops: usize,
    pub steady_tol: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            forward: RamanDrive::with_squeeze(0.3),
            backward: RamanDrive::with_squeeze(0.3),
            phi: 0.0,
            transmissivity: 1.0,
            atomic_decay: 0.5,
            atomic_phase: 0.0,
            insertion: None,
            seed_photons: 0.0,
            max_loops: 10_000,
            steady_tol: 1e-12,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        self.forward.validate()?;
        self.backward.validate()?;
        check_range("phi", self.phi, "finite", true)?;
        check_range(
            "transmissivity",
            self.transmissivity,
            "(0, 1]",
            self.transmissivity > 0.0 && self.transmissivity <= 1.0,
        )?;
        check_range(
            "atomic_decay",
            self.atomic_decay,
            "[0, 1]",
            (0.0..=1.0).contains(&self.atomic_decay),
        )?;
        check_range("atomic_phase", self.atomic_phase, "finite", true)?;
        check_range("seed_photons", self.seed_photons, "[0, inf)", self.seed_photons >= 0.0)?;
        check_range("steady_tol", self.steady_tol, "[0, inf)", self.steady_tol >= 0.0)?;
        if self.max_loops == 0 {
            return Err(Error::OutOfRange { name: "max_loops", value: 0.0, range: ">= 1" });
        }
        if let Some(ins) = &self.insertion {
            ins.validate()?;
        }
        Ok(())
    }

    /// Total atomic phase picked up per loop: both ac-Stark offsets plus
    /// the injected atomic phase.
    pub fn atomic_phase_per_loop(&self) -> f64 {
        self.forward.stark_phase() + self.backward.stark_phase() + self.atomic_phase
    }

    /// Optical amplitude transmission per round trip, including insertion.
    pub fn optical_amplitude(&self) -> f64 {
        self.transmissivity.sqrt() * self.insertion.map_or(1.0, |i| i.amplitude_factor())
    }

    /// Largest per-loop amplitude gain of the atomic memory over all `φ`,
    /// `√(1−γ)·(G_f G_b + g_f g_b·t)`. The loop has a steady state only
    /// when this is below one.
    pub fn round_trip_gain(&self) -> f64 {
        let (rf, rb) = (self.forward.squeeze(), self.backward.squeeze());
        (1.0 - self.atomic_decay).sqrt()
            * (rf.cosh() * rb.cosh() + rf.sinh() * rb.sinh() * self.optical_amplitude())
    }

    pub fn is_below_threshold(&self) -> bool {
        self.round_trip_gain() < 1.0
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self { phi, ..self.clone() }
    }
}

/// Probe-induced atomic phase `θ_A = c·I_p·τ/Δ′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomicPhaseProbe {
    pub power: f64,
    pub detuning: f64,
    pub delay: f64,
    pub coupling: f64,
}

pub fn atomic_phase(probe: &AtomicPhaseProbe) -> Result<f64> {
    check_range("probe power", probe.power, "[0, inf)", probe.power >= 0.0)?;
    check_range("probe detuning", probe.detuning, "nonzero", probe.detuning != 0.0)?;
    let theta = probe.coupling * probe.power * probe.delay / probe.detuning;
    check_range("atomic phase", theta, "finite", true)?;
    Ok(theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopRecord {
    pub loop_index: usize,
    /// Mean amplitude of the retained atomic mode after the loop.
    pub atomic_amplitude: Complex64,
    /// Statistics of the optical output `S_f`.
    pub output: PhotonStats,
    /// Photons plus atomic excitations inside the interferometer arms.
    pub sensing_particles: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoopOutcome {
    Converged { loops: usize },
    NotConverged { loops: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopTrace {
    pub records: Vec<LoopRecord>,
    pub outcome: LoopOutcome,
    /// Atomic state retained after the last executed loop.
    pub atom: GaussianState,
}

impl LoopTrace {
    pub fn last(&self) -> &LoopRecord {
        self.records.last().expect("a trace has at least one loop")
    }
}

/// Channels of one round trip, built once per configuration.
struct RoundTrip {
    forward: GaussianChannel,
    middle: GaussianChannel,
    decay: GaussianChannel,
    seed: GaussianState,
}

impl RoundTrip {
    fn new(config: &LoopConfig) -> Result<Self> {
        let modes = 2;
        let forward =
            GaussianChannel::two_mode_squeezer(modes, config.forward.squeeze(), 0.0, (ATOM, LIGHT))?;
        let mut middle = GaussianChannel::phase_shift(modes, config.phi, LIGHT)?
            .then(&GaussianChannel::loss(modes, config.transmissivity, LIGHT)?)?;
        if let Some(ins) = &config.insertion {
            middle = middle
                .then(&GaussianChannel::amplifier(modes, ins.amplifier_gain, LIGHT)?)?
                .then(&GaussianChannel::loss(modes, 1.0 - ins.loss, LIGHT)?)?;
        }
        middle = middle
            .then(&GaussianChannel::phase_shift(modes, config.atomic_phase_per_loop(), ATOM)?)?
            .then(&GaussianChannel::two_mode_squeezer(
                modes,
                config.backward.squeeze(),
                0.0,
                (ATOM, LIGHT),
            )?)?;
        let decay = GaussianChannel::loss(1, 1.0 - config.atomic_decay, 0)?;
        let seed = GaussianState::coherent(Complex64::new(config.seed_photons.sqrt(), 0.0))
            .with_label(0, MODE_LABELS[LIGHT])?;
        Ok(Self { forward, middle, decay, seed })
    }

    /// Runs one loop; returns the retained atom, output stats and the
    /// number of phase-sensing particles.
    fn step(&self, atom: &GaussianState) -> Result<(GaussianState, PhotonStats, f64)> {
        let joint = atom.tensor(&self.seed);
        let split = self.forward.apply(&joint)?;
        let sensing = split.photon_stats(ATOM)?.mean + split.photon_stats(LIGHT)?.mean;
        let out = self.middle.apply(&split)?;
        let stats = out.photon_stats(LIGHT)?;
        let kept = self.decay.apply(&out.reduce(&[ATOM])?)?;
        Ok((kept, stats, sensing))
    }
}

fn residual(old: &GaussianState, new: &GaussianState) -> f64 {
    let finite = new.mean().iter().chain(new.cov().iter()).all(|v| v.is_finite());
    if !finite {
        return f64::INFINITY;
    }
    // ratios of norms, with both operands scaled by the same factor so
    // large photon numbers cannot overflow the squares
    let rel = |diff: f64, scale: f64| if diff == 0.0 { 0.0 } else { diff / scale };
    let mscale = new.mean().amax().max(old.mean().amax()).max(f64::MIN_POSITIVE);
    let dm = ((new.mean() - old.mean()) / mscale).norm();
    let mean_part = rel(dm, (new.mean() / mscale).norm().max((old.mean() / mscale).norm()));
    let cscale = new.cov().amax().max(f64::MIN_POSITIVE);
    let dc = ((new.cov() - old.cov()) / cscale).norm();
    let cov_part = rel(dc, (new.cov() / cscale).norm());
    let res = mean_part.max(cov_part);
    if res.is_nan() {
        f64::INFINITY
    } else {
        res
    }
}

fn iterate(config: &LoopConfig, loops: usize, stop_early: bool) -> Result<LoopTrace> {
    config.validate()?;
    let trip = RoundTrip::new(config)?;
    let mut atom = GaussianState::vacuum_labeled(&MODE_LABELS[..1])?;
    let mut records = Vec::new();
    for n in 1..=loops {
        let (next, output, sensing) = trip.step(&atom)?;
        let res = residual(&atom, &next);
        records.push(LoopRecord {
            loop_index: n,
            atomic_amplitude: next.amplitude(0)?,
            output,
            sensing_particles: sensing,
            residual: res,
        });
        atom = next;
        if res.is_infinite() {
            // runaway gain: the state has overflowed
            let outcome = LoopOutcome::NotConverged { loops: n, residual: res };
            return Ok(LoopTrace { records, outcome, atom });
        }
        if stop_early && res < config.steady_tol {
            return Ok(LoopTrace { records, outcome: LoopOutcome::Converged { loops: n }, atom });
        }
    }
    let outcome = LoopOutcome::NotConverged { loops, residual: records.last().map_or(0.0, |r| r.residual) };
    Ok(LoopTrace { records, outcome, atom })
}

/// Iterates the loop until the residual drops below `steady_tol` or
/// `max_loops` is reached. Non-convergence is reported in the outcome.
pub fn run_loop(config: &LoopConfig) -> Result<LoopTrace> {
    iterate(config, config.max_loops, true)
}

/// Runs exactly `loops` round trips from the vacuum, ignoring the
/// convergence test.
pub fn run_loops(config: &LoopConfig, loops: usize) -> Result<LoopTrace> {
    iterate(config, loops.max(1), false)
}

/// Converged atomic state and the number of loops it took.
pub fn steady_state(config: &LoopConfig) -> Result<(GaussianState, usize)> {
    let trace = run_loop(config)?;
    match trace.outcome {
        LoopOutcome::Converged { loops } => Ok((trace.atom, loops)),
        LoopOutcome::NotConverged { loops, residual } => Err(Error::NotConverged { loops, residual }),
    }
}

/// Steady-state output at one phase setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOutput {
    pub output: PhotonStats,
    pub sensing_particles: f64,
    pub loops: usize,
}

pub fn steady_output(config: &LoopConfig) -> Result<SteadyOutput> {
    let trace = run_loop(config)?;
    match trace.outcome {
        LoopOutcome::Converged { loops } => {
            let last = trace.last();
            Ok(SteadyOutput { output: last.output, sensing_particles: last.sensing_particles, loops })
        }
        LoopOutcome::NotConverged { loops, residual } => Err(Error::NotConverged { loops, residual }),
    }
}

/// Steady-state fringe over `phi_grid`; `config.phi` is overridden per
/// point. Points run in parallel and are merged in grid order.
pub fn fringe_scan(config: &LoopConfig, phi_grid: &[f64]) -> Result<FringeCurve> {
    if phi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    config.validate()?;
    let points: Vec<Result<SteadyOutput>> =
        phi_grid.par_iter().map(|&phi| steady_output(&config.with_phi(phi))).collect();
    let failed: Vec<f64> = phi_grid
        .iter()
        .zip(&points)
        .filter(|(_, p)| matches!(p, Err(Error::NotConverged { .. })))
        .map(|(phi, _)| *phi)
        .collect();
    if !failed.is_empty() {
        return Err(Error::NotConvergedAt(failed));
    }
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FringeCurve {
        phi: phi_grid.to_vec(),
        signal: points.iter().map(|p| p.output.mean).collect(),
        noise: Some(points.iter().map(|p| p.output.variance).collect()),
        sensing: Some(points.iter().map(|p| p.sensing_particles).collect()),
        source: FringeSource::LoopEngine,
    })
}

/// Fringe after exactly `loops` round trips at every grid point.
pub fn fringe_after_loops(config: &LoopConfig, phi_grid: &[f64], loops: usize) -> Result<FringeCurve> {
    if phi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let records = phi_grid
        .par_iter()
        .map(|&phi| run_loops(&config.with_phi(phi), loops).map(|t| t.last().clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeCurve {
        phi: phi_grid.to_vec(),
        signal: records.iter().map(|r| r.output.mean).collect(),
        noise: Some(records.iter().map(|r| r.output.variance).collect()),
        sensing: Some(records.iter().map(|r| r.sensing_particles).collect()),
        source: FringeSource::LoopEngine,
    })
}

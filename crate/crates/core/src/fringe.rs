//! Sampled interference fringes and slope estimation.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FringeSource {
    LoopEngine,
    ClosedForm,
    Benchmark,
}

impl fmt::Display for FringeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FringeSource::LoopEngine => "loop-engine",
            FringeSource::ClosedForm => "closed-form",
            FringeSource::Benchmark => "benchmark",
        })
    }
}

/// Output photon statistics sampled on a phase grid.
///
/// `signal` is the mean photon number of the detected port, `noise` its
/// photon-number variance and `sensing` the number of phase-sensing
/// particles inside the interferometer per shot. The closed-form path is
/// mean-field only and leaves `noise` and `sensing` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeCurve {
    pub phi: Vec<f64>,
    pub signal: Vec<f64>,
    pub noise: Option<Vec<f64>>,
    pub sensing: Option<Vec<f64>>,
    pub source: FringeSource,
}

impl FringeCurve {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Derivative of the signal with respect to phase.
    pub fn slope(&self) -> Vec<f64> {
        central_differences(&self.phi, &self.signal)
    }
}

/// `points` equally spaced phases on `[start, stop)`.
pub fn phase_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let step = (stop - start) / points as f64;
    (0..points).map(|k| start + step * k as f64).collect()
}

/// Default scan grid: 1024 points over one period.
pub fn full_period_grid(points: usize) -> Vec<f64> {
    phase_grid(0.0, TAU, points)
}

/// True when `phi` is a uniform grid covering exactly one period with the
/// endpoint excluded, so differences can wrap around.
pub(crate) fn is_periodic_grid(phi: &[f64]) -> bool {
    if phi.len() < 3 {
        return false;
    }
    let h = phi[1] - phi[0];
    if h <= 0.0 {
        return false;
    }
    let uniform = phi.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
    uniform && ((phi[phi.len() - 1] + h - phi[0]) - TAU).abs() <= 1e-9
}

/// Second-order central differences; wraps around on full-period grids
/// and falls back to one-sided differences at open ends.
pub fn central_differences(phi: &[f64], values: &[f64]) -> Vec<f64> {
    let n = phi.len();
    if n < 2 {
        return vec![0.0; n];
    }
    if is_periodic_grid(phi) {
        let h = phi[1] - phi[0];
        return (0..n)
            .map(|k| (values[(k + 1) % n] - values[(k + n - 1) % n]) / (2.0 * h))
            .collect();
    }
    (0..n)
        .map(|k| {
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (values[hi] - values[lo]) / (phi[hi] - phi[lo])
        })
        .collect()
}

pub(crate) fn check_same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} points", a.len(), b.len())));
    }
    if let Some(k) = a.iter().zip(b).position(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::GridMismatch(format!("phase {} differs at index {k}", a[k])));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_detection() {
        assert!(is_periodic_grid(&full_period_grid(64)));
        assert!(!is_periodic_grid(&phase_grid(0.0, 1.0, 64)));
    }

    #[test]
    fn derivative_of_sine() {
        let phi = full_period_grid(1024);
        let v: Vec<f64> = phi.iter().map(|p| p.sin()).collect();
        let d = central_differences(&phi, &v);
        let err = phi.iter().zip(&d).map(|(p, s)| (p.cos() - s).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4);
        let open = phase_grid(0.0, 1.0, 200);
        let v: Vec<f64> = open.iter().map(|p| 3.0 * p).collect();
        assert!(central_differences(&open, &v).iter().all(|s| (s - 3.0).abs() < 1e-12));
    }
}

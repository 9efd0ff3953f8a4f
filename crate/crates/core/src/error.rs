use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },
    #[error("two-mode operation needs distinct modes, got {0} twice")]
    CoincidentModes(usize),
    #[error("{name} = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension mismatch: channel acts on {channel} quadratures, state has {state}")]
    DimensionMismatch { channel: usize, state: usize },
    #[error("loop did not reach steady state after {loops} loops (last residual {residual:e})")]
    NotConverged { loops: usize, residual: f64 },
    #[error("no steady state at phases {0:?}")]
    NotConvergedAt(Vec<f64>),
    #[error("round-trip gain {round_trip} is at or above threshold; no steady state exists")]
    AboveThreshold { round_trip: f64 },
    #[error("phase grids differ ({0})")]
    GridMismatch(String),
    #[error("grid too coarse: {points} points, need at least {required}")]
    GridTooCoarse { points: usize, required: usize },
    #[error("curve has no noise channel; sensitivity needs a loop-engine curve")]
    MissingNoise,
    #[error("fringe slope vanishes at every usable grid point")]
    ZeroSlope,
    #[error("reports were computed at different particle fluxes ({0:e} vs {1:e})")]
    FluxMismatch(f64, f64),
    #[error("empty phase grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    range: &'static str,
    ok: bool,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}

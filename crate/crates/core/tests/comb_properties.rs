use atomlight::fringe::full_period_grid;
use atomlight::interferometer::{fringe_after_loops, LoopConfig, RamanDrive};
use atomlight::phase_comb::{sawtooth_config, sawtooth_metrics, synthesize_fringe, unrolled_comb};
use proptest::prelude::*;

/// Power in each DFT harmonic of a real periodic sample, as `|ĉ_h|²` with
/// `signal = Σ ĉ_h e^{ihφ}`.
fn harmonic_power(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    (0..n / 2)
        .map(|h| {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, v) in signal.iter().enumerate() {
                let a = std::f64::consts::TAU * (h * k) as f64 / n as f64;
                re += v * a.cos();
                im -= v * a.sin();
            }
            (re * re + im * im) / (n * n) as f64
        })
        .collect()
}

fn config(rf: f64, rb: f64, gamma: f64, stark: f64) -> LoopConfig {
    LoopConfig {
        forward: RamanDrive::with_squeeze(rf).with_stark_phase(stark),
        backward: RamanDrive::with_squeeze(rb),
        atomic_decay: gamma,
        seed_photons: 1.0,
        ..LoopConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_consistency(
        rf in 0.0..0.8f64,
        rb in 0.0..0.8f64,
        gamma in 0.0..=1.0f64,
        stark in -2.0..2.0f64,
        theta in -3.2..3.2f64,
        loops in 1..20usize,
    ) {
        let comb = unrolled_comb(&config(rf, rb, gamma, stark), loops).unwrap();
        let grid = full_period_grid(256);
        let curve = synthesize_fringe(&comb, theta, &grid);
        let h = comb.harmonics(theta);
        let n = grid.len() as f64;
        let mean = curve.signal.iter().sum::<f64>() / n;
        let var = curve.signal.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        let f2: f64 = h.terms.iter().map(|t| t.magnitude * t.magnitude / 2.0).sum();
        prop_assert!((mean - h.offset).abs() <= 1e-9 * h.offset.abs().max(1e-300));
        prop_assert!((var - f2).abs() <= 1e-9 * f2.max(1e-300) + 1e-12 * h.offset * h.offset);
    }

    #[test]
    fn no_power_above_tooth_count(
        rf in 0.05..0.8f64,
        rb in 0.05..0.8f64,
        gamma in 0.0..1.0f64,
        stark in -2.0..2.0f64,
        loops in 1..30usize,
    ) {
        let comb = unrolled_comb(&config(rf, rb, gamma, stark), loops).unwrap();
        let curve = synthesize_fringe(&comb, 0.0, &full_period_grid(128));
        let power = harmonic_power(&curve.signal);
        let total: f64 = power.iter().sum();
        let above: f64 = power.iter().skip(loops + 1).sum();
        prop_assert!(above <= 1e-10 * total, "{above} of {total}");
    }
}

#[test]
fn sawtooth_grows_with_loops() {
    let config = sawtooth_config();
    assert!(config.is_below_threshold());
    let grid = full_period_grid(1024);
    let metrics: Vec<_> = [1, 2, 4, 8]
        .iter()
        .map(|&j| sawtooth_metrics(&fringe_after_loops(&config, &grid, j).unwrap()).unwrap())
        .collect();
    for w in metrics.windows(2) {
        assert!(w[1].slope_asymmetry >= w[0].slope_asymmetry, "{metrics:?}");
        assert!(w[1].max_slope > w[0].max_slope, "{metrics:?}");
    }
    assert!(metrics[3].slope_asymmetry > 1.2);
}

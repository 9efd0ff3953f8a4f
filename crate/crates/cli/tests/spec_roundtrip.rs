use std::collections::BTreeMap;

use atomlight::interferometer::AtomicPhaseProbe;
use atomlight_cli::spec::{BaseConfig, GridSpec, OutputFormat, SweepSpec};
use atomlight_cli::{parse_spec, render, ExperimentSpec, Preset};
use proptest::prelude::*;

fn overrides() -> impl Strategy<Value = BTreeMap<String, f64>> {
    (
        proptest::option::of(0.0..3.0f64),
        proptest::option::of(-10.0..10.0f64),
        proptest::option::of(1e-3..=1.0f64),
        proptest::option::of(0.0..=1.0f64),
        proptest::option::of(1.0..20.0f64),
        proptest::option::of(1..100_000u32),
        proptest::option::of(0.0..1e15f64),
    )
        .prop_map(|(r_f, phi, t_s, gamma_a, g_am2, max_loops, seed)| {
            let mut m = BTreeMap::new();
            let mut put = |k: &str, v: Option<f64>| {
                if let Some(v) = v {
                    m.insert(k.to_string(), v);
                }
            };
            put("r_f", r_f);
            put("phi", phi);
            put("t_s", t_s);
            put("gamma_a", gamma_a);
            put("g_am2", g_am2);
            put("max_loops", max_loops.map(f64::from));
            put("seed_photons", seed);
            m
        })
}

fn spec() -> impl Strategy<Value = ExperimentSpec> {
    (
        (
            prop::sample::select(Preset::ALL.to_vec()),
            prop::sample::select(BaseConfig::ALL.to_vec()),
            prop::sample::select(OutputFormat::ALL.to_vec()),
            proptest::option::of("[a-zA-Z0-9_./#\" \\\\-]{1,24}"),
        ),
        (-10.0..10.0f64, 0.1..10.0f64, 2..5000usize),
        (1.0..1e15f64, prop::collection::vec(1.0..10.0f64, 1..6)),
        (
            prop::sample::select(vec!["phi", "theta_a", "delta_f", "delta_b"]),
            prop::collection::vec(-5.0..5.0f64, 1..5),
        ),
        (0.0..10.0f64, prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], -3.0..3.0f64, -3.0..3.0f64),
        overrides(),
    )
        .prop_map(|((preset, base, format, output), grid, (n_flux, gains), sweep, probe, overrides)| {
            ExperimentSpec {
                preset,
                base,
                overrides,
                grid: GridSpec { start: grid.0, stop: grid.0 + grid.1, points: grid.2 },
                output,
                format,
                n_flux,
                gains,
                sweep: SweepSpec { key: sweep.0.to_string(), values: sweep.1 },
                probe: AtomicPhaseProbe { power: probe.0, detuning: probe.1, delay: probe.2, coupling: probe.3 },
            }
        })
}

proptest! {
    #[test]
    fn parse_inverts_render(s in spec()) {
        let text = render(&s);
        let parsed = parse_spec(&text);
        prop_assert_eq!(parsed.as_ref(), Ok(&s), "{}", text);
    }

}

//! Experiment specification documents.
//!
//! A spec is a line-oriented `key = value` document. `#` starts a comment,
//! values are numbers, `[a, b, ...]` number lists, or strings (bare or
//! double-quoted). Every key is optional except `preset`; unknown or
//! repeated keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use atomlight::interferometer::{AtomicPhaseProbe, Insertion, LoopConfig, RamanDrive};
use atomlight::phase_comb::sawtooth_config;
use atomlight::sensitivity::paper_like_config;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`{}", suggestion_text(.suggestion))]
    UnknownKey { line: usize, key: String, suggestion: Option<String> },
    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("missing required key `preset`")]
    MissingPreset,
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref().map(|k| format!(" (did you mean `{k}`?)")).unwrap_or_default()
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                Self::ALL.iter().copied().find(|v| v.name() == s).ok_or_else(|| {
                    let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
                    format!("expected one of {}", names.join(", "))
                })
            }
        }
    };
}

named_enum!(
    /// Experiment to run.
    Preset {
        Fringe => "fringe",
        CosineBenchmark => "cosine-benchmark",
        AtomicPhase => "atomic-phase",
        Sensitivity => "sensitivity",
        Destruction => "destruction",
        Sweep => "sweep",
    }
);

named_enum!(
    /// Loop parameters the overrides start from.
    BaseConfig {
        PaperLike => "paper-like",
        Sawtooth => "sawtooth",
    }
);

named_enum!(
    OutputFormat {
        Csv => "csv",
        JsonLines => "json-lines",
    }
);

impl Preset {
    pub fn description(self) -> &'static str {
        match self {
            Preset::Fringe => "steady-state hybrid fringe from the loop engine",
            Preset::CosineBenchmark => "coherent Mach-Zehnder fringe at the same particle flux",
            Preset::AtomicPhase => "hybrid fringe shifted by a probe-induced atomic phase",
            Preset::Sensitivity => "optimal phase sensitivity against the standard quantum limit",
            Preset::Destruction => "amplifier-attenuator correlation destruction sweep",
            Preset::Sweep => "sensitivity across values of one loop parameter",
        }
    }
}

impl BaseConfig {
    pub fn config(self) -> LoopConfig {
        match self {
            BaseConfig::PaperLike => paper_like_config(),
            BaseConfig::Sawtooth => sawtooth_config(),
        }
    }
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
        }
    }
}

/// Loop parameters that can be overridden.
pub const LOOP_KEYS: &[&str] = &[
    "r_f",
    "r_b",
    "delta_f",
    "delta_b",
    "phi",
    "t_s",
    "gamma_a",
    "theta_a",
    "g_am2",
    "seed_photons",
    "max_loops",
    "steady_tol",
];

const SPEC_KEYS: &[&str] = &[
    "preset",
    "base",
    "output",
    "format",
    "grid_start",
    "grid_stop",
    "grid_points",
    "n_flux",
    "gains",
    "sweep_key",
    "sweep_values",
    "probe_power",
    "probe_detuning",
    "probe_delay",
    "probe_coupling",
];

fn all_keys() -> impl Iterator<Item = &'static str> {
    SPEC_KEYS.iter().chain(LOOP_KEYS).copied()
}

/// Closest known key, if any is plausibly a misspelling.
pub fn suggest_key(key: &str) -> Option<String> {
    all_keys()
        .map(|k| (strsim::levenshtein(key, k), k))
        .filter(|&(d, k)| d <= 2.max(k.len() / 3))
        .min()
        .map(|(_, k)| k.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { start: 0.0, stop: TAU, points: 1024 }
    }
}

impl GridSpec {
    pub fn phases(&self) -> Vec<f64> {
        atomlight::fringe::phase_grid(self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub base: BaseConfig,
    pub overrides: BTreeMap<String, f64>,
    pub grid: GridSpec,
    pub output: Option<String>,
    pub format: OutputFormat,
    /// Phase-sensing particles per second.
    pub n_flux: f64,
    /// Amplifier power gains for the destruction sweep.
    pub gains: Vec<f64>,
    pub sweep: SweepSpec,
    pub probe: AtomicPhaseProbe,
}

impl ExperimentSpec {
    pub fn new(preset: Preset) -> Self {
        Self {
            preset,
            base: BaseConfig::PaperLike,
            overrides: BTreeMap::new(),
            grid: GridSpec::default(),
            output: None,
            format: OutputFormat::Csv,
            n_flux: 4e13,
            gains: vec![1.0, 2.0, 4.0, 8.5],
            sweep: SweepSpec { key: "t_s".into(), values: vec![0.95, 0.98, 0.99, 0.995, 1.0] },
            probe: AtomicPhaseProbe { power: 1.0, detuning: 4.0, delay: 1.0, coupling: 1.0 },
        }
    }

    /// Base configuration with all overrides applied.
    pub fn loop_config(&self) -> Result<LoopConfig, SpecError> {
        let mut config = self.base.config();
        for (key, &value) in &self.overrides {
            apply_override(&mut config, key, value)?;
        }
        config.validate().map_err(|e| SpecError::Invalid { key: "loop".into(), message: e.to_string() })?;
        Ok(config)
    }

    /// Checks everything that does not need a simulation run.
    pub fn validate(&self) -> Result<(), SpecError> {
        let invalid = |key: &str, message: String| SpecError::Invalid { key: key.into(), message };
        if self.grid.points < 2 {
            return Err(invalid("grid_points", format!("{} < 2", self.grid.points)));
        }
        if self.grid.stop <= self.grid.start || self.grid.stop.is_nan() || self.grid.start.is_nan() {
            return Err(invalid("grid_stop", "must exceed grid_start".into()));
        }
        if !(self.n_flux > 0.0 && self.n_flux.is_finite()) {
            return Err(invalid("n_flux", "must be positive".into()));
        }
        if self.gains.is_empty() || self.gains.iter().any(|g| !(*g >= 1.0 && g.is_finite())) {
            return Err(invalid("gains", "need at least one gain, each >= 1".into()));
        }
        if !LOOP_KEYS.contains(&self.sweep.key.as_str()) {
            return Err(invalid("sweep_key", format!("`{}` is not a loop parameter", self.sweep.key)));
        }
        if self.sweep.values.is_empty() {
            return Err(invalid("sweep_values", "need at least one value".into()));
        }
        atomlight::interferometer::atomic_phase(&self.probe)
            .map_err(|e| invalid("probe_detuning", e.to_string()))?;
        self.loop_config()?;
        if self.preset == Preset::Sweep {
            for &v in &self.sweep.values {
                self.with_override(&self.sweep.key, v).loop_config()?;
            }
        }
        Ok(())
    }

    pub fn with_override(&self, key: &str, value: f64) -> Self {
        let mut spec = self.clone();
        spec.overrides.insert(key.to_string(), value);
        spec
    }

    /// Default data file name inside the output directory.
    pub fn default_file_name(&self) -> String {
        format!("{}.{}", self.preset, self.format.extension())
    }
}

fn apply_override(config: &mut LoopConfig, key: &str, value: f64) -> Result<(), SpecError> {
    let invalid = |message: String| SpecError::Invalid { key: key.into(), message };
    let drive = |d: &RamanDrive, r: Option<f64>, delta: Option<f64>| {
        RamanDrive::with_squeeze(r.unwrap_or(d.squeeze())).with_stark_phase(delta.unwrap_or(d.stark_phase()))
    };
    match key {
        "r_f" => config.forward = drive(&config.forward, Some(value), None),
        "r_b" => config.backward = drive(&config.backward, Some(value), None),
        "delta_f" => config.forward = drive(&config.forward, None, Some(value)),
        "delta_b" => config.backward = drive(&config.backward, None, Some(value)),
        "phi" => config.phi = value,
        "t_s" => config.transmissivity = value,
        "gamma_a" => config.atomic_decay = value,
        "theta_a" => config.atomic_phase = value,
        "g_am2" => {
            config.insertion = Some(Insertion::balanced(value).map_err(|e| invalid(e.to_string()))?)
        }
        "seed_photons" => config.seed_photons = value,
        "max_loops" => {
            if value.fract() != 0.0 || !(1.0..=1e9).contains(&value) {
                return Err(invalid(format!("{value} is not a loop count")));
            }
            config.max_loops = value as usize;
        }
        "steady_tol" => config.steady_tol = value,
        _ => return Err(invalid("not a loop parameter".into())),
    }
    Ok(())
}

enum Value {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

fn parse_number(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("`{}` is not a number", text.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", text.trim()))
    }
}

fn parse_value(raw: &str) -> Result<Value, String> {
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return inner.split(',').map(parse_number).collect::<Result<_, _>>().map(Value::List);
    }
    if raw.starts_with('"') {
        return serde_json::from_str::<String>(raw).map(Value::Text).map_err(|e| format!("bad string: {e}"));
    }
    match parse_number(raw) {
        Ok(v) => Ok(Value::Number(v)),
        Err(_) => Ok(Value::Text(raw.to_string())),
    }
}

/// Removes a trailing comment that is not inside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Field<'a> {
    line: usize,
    key: &'a str,
    value: Value,
}

impl Field<'_> {
    fn err(&self, message: impl Into<String>) -> SpecError {
        SpecError::InvalidValue { line: self.line, key: self.key.into(), message: message.into() }
    }

    fn number(&self) -> Result<f64, SpecError> {
        match &self.value {
            Value::Number(v) => Ok(*v),
            _ => Err(self.err("expected a number")),
        }
    }

    fn count(&self) -> Result<usize, SpecError> {
        let v = self.number()?;
        if v.fract() != 0.0 || !(0.0..=1e9).contains(&v) {
            return Err(self.err(format!("{v} is not a whole count")));
        }
        Ok(v as usize)
    }

    fn list(&self) -> Result<Vec<f64>, SpecError> {
        match &self.value {
            Value::List(v) => Ok(v.clone()),
            Value::Number(v) => Ok(vec![*v]),
            Value::Text(_) => Err(self.err("expected a list of numbers")),
        }
    }

    fn text(&self) -> Result<String, SpecError> {
        match &self.value {
            Value::Text(s) => Ok(s.clone()),
            _ => Err(self.err("expected a string")),
        }
    }

    fn named<T: FromStr<Err = String>>(&self) -> Result<T, SpecError> {
        self.text()?.parse().map_err(|e: String| self.err(e))
    }
}

/// Parses and fully validates a spec document.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, SpecError> {
    let mut fields: Vec<Field> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw_line).trim();
        if content.is_empty() {
            continue;
        }
        let (key, raw) = content
            .split_once('=')
            .ok_or_else(|| SpecError::Syntax { line, message: format!("expected `key = value`, got `{content}`") })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(SpecError::Syntax { line, message: "missing key before `=`".into() });
        }
        if !all_keys().any(|k| k == key) {
            return Err(SpecError::UnknownKey { line, key: key.into(), suggestion: suggest_key(key) });
        }
        if fields.iter().any(|f| f.key == key) {
            return Err(SpecError::DuplicateKey { line, key: key.into() });
        }
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(SpecError::InvalidValue { line, key: key.into(), message: "missing value".into() });
        }
        let value =
            parse_value(raw).map_err(|message| SpecError::InvalidValue { line, key: key.into(), message })?;
        fields.push(Field { line, key, value });
    }

    let preset = fields.iter().find(|f| f.key == "preset").ok_or(SpecError::MissingPreset)?;
    let mut spec = ExperimentSpec::new(preset.named()?);
    for f in &fields {
        match f.key {
            "preset" => {}
            "base" => spec.base = f.named()?,
            "output" => spec.output = Some(f.text()?),
            "format" => spec.format = f.named()?,
            "grid_start" => spec.grid.start = f.number()?,
            "grid_stop" => spec.grid.stop = f.number()?,
            "grid_points" => spec.grid.points = f.count()?,
            "n_flux" => spec.n_flux = f.number()?,
            "gains" => spec.gains = f.list()?,
            "sweep_key" => spec.sweep.key = f.text()?,
            "sweep_values" => spec.sweep.values = f.list()?,
            "probe_power" => spec.probe.power = f.number()?,
            "probe_detuning" => spec.probe.detuning = f.number()?,
            "probe_delay" => spec.probe.delay = f.number()?,
            "probe_coupling" => spec.probe.coupling = f.number()?,
            key => {
                let v = f.number()?;
                let mut scratch = LoopConfig::default();
                apply_override(&mut scratch, key, v).map_err(|e| f.err(e.to_string()))?;
                spec.overrides.insert(key.to_string(), v);
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical document for a spec; `parse_spec(&render(s)) == s`.
pub fn render(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("preset", spec.preset.to_string());
    line("base", spec.base.to_string());
    if let Some(path) = &spec.output {
        line("output", serde_json::to_string(path).expect("strings always serialize"));
    }
    line("format", spec.format.to_string());
    line("grid_start", format!("{:?}", spec.grid.start));
    line("grid_stop", format!("{:?}", spec.grid.stop));
    line("grid_points", spec.grid.points.to_string());
    line("n_flux", format!("{:?}", spec.n_flux));
    line("gains", list(&spec.gains));
    line("sweep_key", serde_json::to_string(&spec.sweep.key).expect("strings always serialize"));
    line("sweep_values", list(&spec.sweep.values));
    line("probe_power", format!("{:?}", spec.probe.power));
    line("probe_detuning", format!("{:?}", spec.probe.detuning));
    line("probe_delay", format!("{:?}", spec.probe.delay));
    line("probe_coupling", format!("{:?}", spec.probe.coupling));
    for (k, v) in &spec.overrides {
        line(k, format!("{v:?}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_only_gives_defaults() {
        let spec = parse_spec("preset = fringe\n").unwrap();
        assert_eq!(spec, ExperimentSpec::new(Preset::Fringe));
        assert_eq!(spec.grid.points, 1024);
        assert_eq!((spec.grid.start, spec.grid.stop), (0.0, TAU));
    }

    #[test]
    fn misspelled_key_names_nearest() {
        let err = parse_spec("preset = fringe\ngama_a = 0.5\n").unwrap_err();
        assert_eq!(
            err,
            SpecError::UnknownKey { line: 2, key: "gama_a".into(), suggestion: Some("gamma_a".into()) }
        );
        let text = err.to_string();
        assert!(text.contains("gama_a") && text.contains("gamma_a") && text.contains("line 2"));
    }

    #[test]
    fn destruction_gains_parse() {
        let spec = parse_spec("preset = destruction # sweep range\ngains = [1, 2, 4, 8.5]").unwrap();
        assert_eq!(spec.preset, Preset::Destruction);
        assert_eq!(spec.gains, vec![1.0, 2.0, 4.0, 8.5]);
    }

    #[test]
    fn errors_point_at_lines() {
        let cases = [
            ("preset = fringe\n\ngrid_points = 1\n", "grid_points"),
            ("preset = fringe\nr_f = abc\n", "line 2"),
            ("preset = fringe\npreset = sweep\n", "line 2"),
            ("preset = nope\n", "expected one of"),
            ("r_f = 1\n", "preset"),
            ("preset = fringe\njust words\n", "line 2"),
            ("preset = fringe\ngamma_a = 1.5\n", "atomic_decay"),
            ("preset = fringe\nmax_loops = 2.5\n", "max_loops"),
        ];
        for (doc, needle) in cases {
            let err = parse_spec(doc).unwrap_err().to_string();
            assert!(err.contains(needle), "{doc:?}: {err}");
        }
    }

    #[test]
    fn overrides_reach_the_config() {
        let spec = parse_spec("preset = fringe\nbase = sawtooth\nr_f = 0.3\ndelta_f = 0.2\ng_am2 = 4\n").unwrap();
        let c = spec.loop_config().unwrap();
        assert!((c.forward.squeeze() - 0.3).abs() < 1e-15);
        assert!((c.forward.stark_phase() - 0.2).abs() < 1e-15);
        assert_eq!(c.insertion.unwrap().loss, 0.75);
    }

    #[test]
    fn quoted_output_with_hash() {
        let spec = parse_spec("preset = fringe\noutput = \"a#b.csv\" # note\n").unwrap();
        assert_eq!(spec.output.as_deref(), Some("a#b.csv"));
        assert_eq!(parse_spec(&render(&spec)).unwrap(), spec);
    }
}

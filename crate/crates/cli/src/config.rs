//! Scenario files: `[section]` headers, `key = value` lines, `#` comments.
//!
//! ```text
//! [model]
//! kind = spin_sweep
//! theta = linear          # schedule kind for a binding
//! theta_end = 3.14159     # binding_param overrides
//!
//! [propagation]
//! epsilon = 0.2
//! steps = 20000
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use adiabat::experiments::{Dataset, DriveSelector, FrameSelector, Scenario, DEFAULT_PAUSE_WINDOW};
use adiabat::frames::MAX_FRAME_ORDER;
use adiabat::models::{ModelKind, ModelSpec};
use adiabat::propagator::Method;
use adiabat::schedule::{Schedule, MAX_SMOOTHSTEP_ORDER};

pub const SECTIONS: [&str; 6] = ["model", "propagation", "frames", "drive", "sweep", "output"];
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in one file, in line order.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Explicit ladder; each subcommand has its own default when absent.
    pub epsilons: Option<Vec<f64>>,
    pub orders: Vec<u8>,
    pub pause_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfiguration {
    pub scenario: Scenario,
    pub sweep: SweepSettings,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
}

struct Entry {
    value: String,
    line: usize,
}

struct Reader {
    sections: BTreeMap<&'static str, BTreeMap<String, Entry>>,
    used: BTreeSet<(&'static str, String)>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn error(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.errors.push(ConfigError { line, message: message.into() });
    }

    fn get(&mut self, section: &'static str, key: &str) -> Option<(String, usize)> {
        let e = self.sections.get(section)?.get(key)?;
        let found = (e.value.clone(), e.line);
        self.used.insert((section, key.to_owned()));
        Some(found)
    }

    fn has(&self, section: &'static str, key: &str) -> bool {
        self.sections.get(section).is_some_and(|s| s.contains_key(key))
    }

    fn parse<T: FromStr>(&mut self, section: &'static str, key: &str, what: &str) -> Option<(T, usize)> {
        let (v, line) = self.get(section, key)?;
        match v.parse() {
            Ok(x) => Some((x, line)),
            Err(_) => {
                self.error(Some(line), format!("`{key}`: expected {what}, got `{v}`"));
                None
            }
        }
    }

    fn number(&mut self, section: &'static str, key: &str) -> Option<(f64, usize)> {
        self.parse(section, key, "a number")
    }

    fn list<T: FromStr>(&mut self, section: &'static str, key: &str, what: &str) -> Option<(Vec<T>, usize)> {
        let (v, line) = self.get(section, key)?;
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim) {
            match item.parse() {
                Ok(x) => out.push(x),
                Err(_) => {
                    self.error(Some(line), format!("`{key}`: expected a comma-separated list of {what}, got `{item}`"));
                    return None;
                }
            }
        }
        Some((out, line))
    }

    fn flag(&mut self, section: &'static str, key: &str) -> Option<(bool, usize)> {
        self.parse(section, key, "true or false")
    }

    fn consume_section(&mut self, section: &'static str) {
        let keys: Vec<String> = self.sections.get(section).map(|s| s.keys().cloned().collect()).unwrap_or_default();
        self.used.extend(keys.into_iter().map(|k| (section, k)));
    }
}

fn lex(text: &str) -> Reader {
    let mut r = Reader { sections: BTreeMap::new(), used: BTreeSet::new(), errors: Vec::new() };
    // None before the first header and inside unknown sections.
    let mut current: Option<&'static str> = None;
    let mut in_unknown = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            current = SECTIONS.iter().copied().find(|s| *s == name);
            in_unknown = current.is_none();
            if in_unknown {
                r.error(Some(line), format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", ")));
            } else {
                r.sections.entry(current.unwrap()).or_default();
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            r.error(Some(line), format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = current else {
            if !in_unknown {
                r.error(Some(line), format!("key `{key}` appears before any [section] header"));
            }
            continue;
        };
        if key.is_empty() || value.is_empty() {
            r.error(Some(line), format!("expected `key = value`, got `{content}`"));
            continue;
        }
        let entries = r.sections.entry(section).or_default();
        if let Some(prev) = entries.get(key) {
            let first = prev.line;
            r.error(Some(line), format!("duplicate key `{key}` in [{section}] (first set on line {first})"));
            continue;
        }
        entries.insert(key.to_owned(), Entry { value: value.to_owned(), line });
    }
    r
}

fn schedule_params(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "smooth_ramp" | "linear" => &["start", "end"],
        "gaussian_pulse" => &["amplitude", "center", "width"],
        "sine_squared" => &["amplitude", "window_start", "window_end"],
        "smoothstep" => &["order", "start", "end"],
        "constant" => &["value"],
        "piecewise_with_pause" => &["start", "end", "pause_start", "pause_end"],
        _ => return None,
    })
}

fn params_of(s: &Schedule) -> BTreeMap<&'static str, f64> {
    let pairs: Vec<(&'static str, f64)> = match *s {
        Schedule::SmoothRamp { start, end } | Schedule::Linear { start, end } => vec![("start", start), ("end", end)],
        Schedule::GaussianPulse { amplitude, center, width } => {
            vec![("amplitude", amplitude), ("center", center), ("width", width)]
        }
        Schedule::SineSquared { amplitude, window_start, window_end } => {
            vec![("amplitude", amplitude), ("window_start", window_start), ("window_end", window_end)]
        }
        Schedule::Smoothstep { order, start, end } => vec![("order", f64::from(order)), ("start", start), ("end", end)],
        Schedule::Constant { value } => vec![("value", value)],
        Schedule::PiecewiseWithPause { start, end, pause_start, pause_end } => {
            vec![("start", start), ("end", end), ("pause_start", pause_start), ("pause_end", pause_end)]
        }
    };
    pairs.into_iter().collect()
}

fn build_schedule(kind: &str, p: &BTreeMap<&'static str, f64>) -> Result<Schedule, String> {
    Ok(match kind {
        "smooth_ramp" => Schedule::SmoothRamp { start: p["start"], end: p["end"] },
        "linear" => Schedule::Linear { start: p["start"], end: p["end"] },
        "gaussian_pulse" => Schedule::GaussianPulse { amplitude: p["amplitude"], center: p["center"], width: p["width"] },
        "sine_squared" => Schedule::SineSquared {
            amplitude: p["amplitude"],
            window_start: p["window_start"],
            window_end: p["window_end"],
        },
        "smoothstep" => {
            let o = p["order"];
            if o.fract() != 0.0 || !(0.0..=f64::from(MAX_SMOOTHSTEP_ORDER)).contains(&o) {
                return Err(format!("smoothstep order must be an integer in 0..={MAX_SMOOTHSTEP_ORDER}, got {o}"));
            }
            Schedule::Smoothstep { order: o as u8, start: p["start"], end: p["end"] }
        }
        "constant" => Schedule::Constant { value: p["value"] },
        "piecewise_with_pause" => Schedule::PiecewiseWithPause {
            start: p["start"],
            end: p["end"],
            pause_start: p["pause_start"],
            pause_end: p["pause_end"],
        },
        _ => unreachable!("kind checked by caller"),
    })
}

fn read_model(r: &mut Reader) -> Option<ModelSpec> {
    let Some((name, kind_line)) = r.get("model", "kind") else {
        r.error(None, "missing required key `kind` in [model]");
        r.consume_section("model");
        return None;
    };
    let Some(kind) = ModelKind::parse(&name) else {
        r.error(Some(kind_line), format!("unknown model `{name}`; expected spin_sweep, landau_zener, stirap or sap_three_mode"));
        r.consume_section("model");
        return None;
    };
    let preset = ModelSpec::preset(kind);
    let field = match r.number("model", "field") {
        Some((h, line)) if !(h.is_finite() && h > 0.0) => {
            r.error(Some(line), format!("field must be > 0, got {h}"));
            None
        }
        Some((h, _)) => Some(h),
        None => Some(preset.field()),
    };
    let mut bindings = Vec::new();
    let mut ok = field.is_some();
    for &b in kind.bindings() {
        let base = *preset.schedule(b).expect("presets bind every schedule");
        let (sched_kind, line) = match r.get("model", b) {
            Some((k, line)) => (k, Some(line)),
            None => (base.kind_name().to_owned(), None),
        };
        let Some(names) = schedule_params(&sched_kind) else {
            r.error(line, format!("unknown schedule kind `{sched_kind}` for `{b}`"));
            ok = false;
            continue;
        };
        let mut params = if sched_kind == base.kind_name() { params_of(&base) } else { BTreeMap::new() };
        for &p in names {
            if let Some((v, _)) = r.number("model", &format!("{b}_{p}")) {
                params.insert(p, v);
            }
        }
        let missing: Vec<String> = names.iter().filter(|p| !params.contains_key(*p)).map(|p| format!("`{b}_{p}`")).collect();
        if !missing.is_empty() {
            r.error(line, format!("{sched_kind} schedule for `{b}` needs {}", missing.join(", ")));
            ok = false;
            continue;
        }
        match build_schedule(&sched_kind, &params).and_then(|s| s.validate().map(|_| s).map_err(|e| e.to_string())) {
            Ok(s) => bindings.push((b, s)),
            Err(msg) => {
                r.error(line, format!("`{b}`: {msg}"));
                ok = false;
            }
        }
    }
    if !ok {
        return None;
    }
    match ModelSpec::new(kind, field?, &bindings) {
        Ok(m) => Some(m),
        Err(e) => {
            r.error(Some(kind_line), e.to_string());
            None
        }
    }
}

fn positive_count(r: &mut Reader, section: &'static str, key: &str, min: usize, default: usize) -> usize {
    match r.parse::<usize>(section, key, "a non-negative integer") {
        Some((n, line)) if n < min => {
            r.error(Some(line), format!("{key} must be >= {min}, got {n}"));
            default
        }
        Some((n, _)) => n,
        None => default,
    }
}

fn read_frames(r: &mut Reader, spin: bool) -> Vec<FrameSelector> {
    let Some((v, line)) = r.get("frames", "track") else {
        return vec![FrameSelector::Numeric(0)];
    };
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim) {
        let sel = match item {
            "1a" | "analytic" => FrameSelector::AnalyticFirstOrder,
            _ => match item.parse::<usize>() {
                Ok(k) if k <= MAX_FRAME_ORDER => FrameSelector::Numeric(k),
                Ok(k) => {
                    r.error(Some(line), format!("frame order {k} exceeds the supported maximum {MAX_FRAME_ORDER}"));
                    continue;
                }
                Err(_) => {
                    r.error(Some(line), format!("`track`: expected frame orders or `1a`, got `{item}`"));
                    continue;
                }
            },
        };
        if sel == FrameSelector::AnalyticFirstOrder && !spin {
            r.error(Some(line), "the closed-form frame `1a` exists only for spin_sweep");
            continue;
        }
        if !out.contains(&sel) {
            out.push(sel);
        }
    }
    out
}

fn read_drive(r: &mut Reader, spin: bool) -> DriveSelector {
    let include_berry = r.flag("drive", "include_berry").is_none_or(|(b, _)| b);
    let Some((kind, line)) = r.get("drive", "kind") else {
        return DriveSelector::None;
    };
    match kind.as_str() {
        "none" => DriveSelector::None,
        "counterdiabatic" => DriveSelector::Counterdiabatic { include_berry },
        "superadiabatic_correction" if spin => DriveSelector::SuperadiabaticCorrection,
        "superadiabatic_correction" => {
            r.error(Some(line), "superadiabatic_correction is defined only for spin_sweep");
            DriveSelector::None
        }
        other => {
            r.error(Some(line), format!("unknown drive `{other}`; expected none, counterdiabatic or superadiabatic_correction"));
            DriveSelector::None
        }
    }
}

fn read_sweep(r: &mut Reader) -> SweepSettings {
    let mut epsilons = None;
    if let Some((list, line)) = r.list::<f64>("sweep", "epsilons", "numbers") {
        if let Some(bad) = list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            r.error(Some(line), format!("epsilon must be > 0, got {bad}"));
        } else {
            epsilons = Some(list);
        }
    }
    let range = (r.number("sweep", "min"), r.number("sweep", "max"), r.parse::<usize>("sweep", "count", "an integer"));
    match range {
        (None, None, None) => {}
        (Some((lo, line)), Some((hi, _)), Some((n, _))) => {
            if epsilons.is_some() || r.has("sweep", "epsilons") {
                r.error(Some(line), "give either `epsilons` or `min`/`max`/`count`, not both");
            } else if !(lo > 0.0 && hi > lo && n >= 2) {
                r.error(Some(line), format!("need 0 < min < max and count >= 2, got min {lo}, max {hi}, count {n}"));
            } else {
                epsilons = Some(adiabat::experiments::log_ladder(lo, hi, n));
            }
        }
        (a, b, c) => {
            let line = a.map(|x| x.1).or(b.map(|x| x.1)).or(c.map(|x| x.1));
            r.error(line, "`min`, `max` and `count` must be given together");
        }
    }
    let orders = match r.list::<u8>("sweep", "orders", "integers") {
        Some((o, line)) if o.iter().any(|&k| k > MAX_SMOOTHSTEP_ORDER) => {
            r.error(Some(line), format!("smoothstep orders must be in 0..={MAX_SMOOTHSTEP_ORDER}"));
            vec![0, 1, 2, 3]
        }
        Some((o, _)) => o,
        None => vec![0, 1, 2, 3],
    };
    let a = r.number("sweep", "pause_start");
    let b = r.number("sweep", "pause_end");
    let start = a.map_or(DEFAULT_PAUSE_WINDOW.0, |x| x.0);
    let end = b.map_or(DEFAULT_PAUSE_WINDOW.1, |x| x.0);
    if !(start > 0.0 && start <= end && end < 1.0) {
        let line = a.or(b).map(|x| x.1);
        r.error(line, format!("pause window must satisfy 0 < pause_start <= pause_end < 1, got [{start}, {end}]"));
    }
    SweepSettings { epsilons, orders, pause_window: (start, end) }
}

fn read_outputs(r: &mut Reader) -> (PathBuf, bool, Vec<Dataset>) {
    let dir = r.get("output", "directory").map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR), |(d, _)| d.into());
    let plots = r.flag("output", "emit_plots").is_none_or(|(b, _)| b);
    let mut datasets = vec![Dataset::Trajectory, Dataset::Drive, Dataset::Summary];
    if let Some((v, line)) = r.get("output", "datasets") {
        datasets.clear();
        for item in v.split(',').map(str::trim) {
            match item {
                "trajectory" => datasets.push(Dataset::Trajectory),
                "drive" => datasets.push(Dataset::Drive),
                "summary" => datasets.push(Dataset::Summary),
                other => r.error(Some(line), format!("unknown dataset `{other}`; expected trajectory, drive or summary")),
            }
        }
    }
    (dir, plots, datasets)
}

/// Parses and validates a scenario file, reporting every error found.
pub fn parse_config(text: &str) -> Result<RunConfiguration, ConfigErrors> {
    let mut r = lex(text);
    let model = read_model(&mut r);
    let spin = model.as_ref().is_some_and(|m| m.kind() == ModelKind::SpinSweep);

    let epsilon = match r.number("propagation", "epsilon") {
        Some((e, line)) if !(e.is_finite() && e > 0.0) => {
            r.error(Some(line), format!("epsilon must be > 0, got {e}"));
            None
        }
        Some((e, _)) => Some(e),
        None => {
            if !r.has("propagation", "epsilon") {
                r.error(None, "missing required key `epsilon` in [propagation]");
            }
            None
        }
    };
    let steps = positive_count(&mut r, "propagation", "steps", 1, adiabat::propagator::DEFAULT_STEPS);
    let stride = positive_count(&mut r, "propagation", "record_stride", 1, adiabat::propagator::DEFAULT_RECORD_STRIDE);
    let method = match r.get("propagation", "method") {
        Some((m, line)) => Method::parse(&m).unwrap_or_else(|| {
            r.error(Some(line), format!("unknown method `{m}`; expected midpoint_exponential or rk4"));
            Method::default()
        }),
        None => Method::default(),
    };

    let frames = read_frames(&mut r, spin);
    let points = positive_count(&mut r, "frames", "points", 3, adiabat::frames::DEFAULT_FRAME_POINTS);
    let drive = read_drive(&mut r, spin);
    let sweep = read_sweep(&mut r);
    let (output_dir, emit_plots, outputs) = read_outputs(&mut r);

    let initial_state = match (r.parse::<usize>("model", "initial_state", "a non-negative integer"), &model) {
        (Some((n, line)), Some(m)) if n >= m.dim() => {
            r.error(Some(line), format!("initial_state {n} out of range for a {}-level model", m.dim()));
            0
        }
        (Some((n, _)), _) => n,
        (None, _) => 0,
    };

    let mut unknown = Vec::new();
    for (&section, entries) in &r.sections {
        for (key, e) in entries {
            if !r.used.contains(&(section, key.clone())) {
                unknown.push(ConfigError { line: Some(e.line), message: format!("unknown key `{key}` in [{section}]") });
            }
        }
    }
    r.errors.extend(unknown);

    let (Some(model), Some(epsilon)) = (model, epsilon) else {
        return Err(sorted(r.errors));
    };
    if !r.errors.is_empty() {
        return Err(sorted(r.errors));
    }
    let mut scenario = Scenario::new(model, epsilon);
    scenario.propagation = scenario.propagation.with_steps(steps).with_record_stride(stride).with_method(method);
    scenario.frames_to_track = frames;
    scenario.frame_points = points;
    scenario.drive = drive;
    scenario.initial_state = initial_state;
    scenario.outputs = outputs;
    if let Err(e) = scenario.validate() {
        return Err(ConfigErrors(vec![ConfigError { line: None, message: e.to_string() }]));
    }
    Ok(RunConfiguration { scenario, sweep, output_dir, emit_plots })
}

fn sorted(mut errors: Vec<ConfigError>) -> ConfigErrors {
    errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
    ConfigErrors(errors)
}

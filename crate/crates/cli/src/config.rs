//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! [scene]
//! type = eq6_qudit
//! [sweep]
//! illuminations = 1.7, 3.0, 11.3
//! ```
//!
//! Every key has a default; [`RunConfig::to_text`] writes the fully
//! resolved configuration back in the same format.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use psi_core::experiments::{ContinuousSpec, NoiseAxis, QuditProtocol, SweepGrid};
use psi_core::field::{grid_center, GridSpec, QuditState, SlitLayout};
use psi_core::reconstruct::MuSign;
use psi_core::sensor::{sigma_from_nsamp_with, SIGMA_SINGLE_SAMPLE};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("config error at line {line}, key `{key}`: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the offending value came from a default.
    pub line: usize,
    pub key: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// Six slits with phases stepping by 2π/5.
    Eq6Qudit,
    /// Slits with user-given phases.
    Qudit,
    Lens,
    /// External PHMAP (and optional AMMAP) file.
    PhaseMap,
}

impl SceneKind {
    fn name(self) -> &'static str {
        match self {
            SceneKind::Eq6Qudit => "eq6_qudit",
            SceneKind::Qudit => "qudit",
            SceneKind::Lens => "lens",
            SceneKind::PhaseMap => "phmap",
        }
    }

    pub fn is_qudit(self) -> bool {
        matches!(self, SceneKind::Eq6Qudit | SceneKind::Qudit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub kind: SceneKind,
    pub grid: GridSpec,
    pub layout: SlitLayout,
    pub phases: Vec<f64>,
    pub background_amplitude: f64,
    pub background_phase: f64,
    pub curvature: f64,
    pub center: (f64, f64),
    pub amplitude: f64,
    pub phase_file: Option<PathBuf>,
    pub amplitude_file: Option<PathBuf>,
}

impl SceneConfig {
    pub fn state(&self) -> psi_core::Result<QuditState> {
        QuditState::from_phases(&self.phases)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiSection {
    pub n_steps: usize,
    pub reference: Option<(f64, f64)>,
    pub mu_sign: MuSign,
    pub illumination: f64,
    pub dark_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSection {
    pub enabled: bool,
    pub readout_sigma: f64,
    pub nsamp: Option<u32>,
    pub sigma_one: f64,
    pub quantize: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub grid: SweepGrid,
    pub protocol: QuditProtocol,
    pub continuous: ContinuousSpec,
    pub raw: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub psi: PsiSection,
    pub noise: NoiseSection,
    pub sweep: SweepSection,
    pub output_dir: PathBuf,
}

const SECTIONS: [&str; 5] = ["scene", "psi", "noise", "sweep", "output"];

const KEYS: &[(&str, &[&str])] = &[
    (
        "scene",
        &[
            "type",
            "width",
            "height",
            "slits",
            "slit_width",
            "slit_gap",
            "slit_length",
            "origin_x",
            "origin_y",
            "phases",
            "background_amplitude",
            "background_phase",
            "curvature",
            "center_x",
            "center_y",
            "amplitude",
            "phase_file",
            "amplitude_file",
        ],
    ),
    (
        "psi",
        &[
            "n_steps",
            "reference_re",
            "reference_im",
            "mu_sign",
            "illumination",
            "dark_threshold",
        ],
    ),
    (
        "noise",
        &[
            "enabled",
            "readout_sigma",
            "nsamp",
            "sigma_one",
            "quantize",
            "seed",
        ],
    ),
    (
        "sweep",
        &[
            "illuminations",
            "sigmas",
            "nsamps",
            "n_bin",
            "repetitions",
            "n_states",
            "bootstrap_runs",
            "reference_illumination",
            "reference_sigma",
            "sigma_high",
            "sigma_low",
            "histogram_bins",
            "raw",
        ],
    ),
    ("output", &["dir"]),
];

/// Raw `section.key → (value, line)` table.
struct Entries {
    map: HashMap<(String, String), (String, usize)>,
}

impl Entries {
    fn get(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.map.get(&(section.to_string(), key.to_string()))
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.get(section, key).is_some()
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map_or(0, |(_, l)| *l)
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line(section, key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
        what: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(section, key, format!("expected {what}, got {v:?}"))),
        }
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self
            .parse::<f64>(section, key, "a number")?
            .unwrap_or(default);
        if !v.is_finite() {
            return Err(self.err(section, key, "value must be finite"));
        }
        Ok(v)
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self
            .parse::<usize>(section, key, "a non-negative integer")?
            .unwrap_or(default))
    }

    fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        Ok(self
            .parse::<bool>(section, key, "true or false")?
            .unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
        what: &str,
    ) -> Result<Option<Vec<T>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, _)) => v
                .split(',')
                .map(|s| s.trim().parse::<T>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| {
                    self.err(
                        section,
                        key,
                        format!("expected a comma-separated list of {what}, got {v:?}"),
                    )
                }),
        }
    }
}

fn lex(text: &str) -> Result<Entries, ConfigError> {
    let mut map = HashMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError {
                    line: line_no,
                    key: name.to_string(),
                    message: format!("unknown section; expected one of {}", SECTIONS.join(", ")),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
            line: line_no,
            key: line.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.clone().ok_or_else(|| ConfigError {
            line: line_no,
            key: key.to_string(),
            message: "key appears before any [section] header".into(),
        })?;
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == sec)
            .is_some_and(|(_, keys)| keys.contains(&key));
        if !known {
            return Err(ConfigError {
                line: line_no,
                key: key.to_string(),
                message: format!("unknown key in [{sec}]"),
            });
        }
        if map
            .insert((sec.clone(), key.to_string()), (value.to_string(), line_no))
            .is_some()
        {
            return Err(ConfigError {
                line: line_no,
                key: key.to_string(),
                message: "duplicate key".into(),
            });
        }
    }
    Ok(Entries { map })
}

/// Parse and validate a configuration. Relative file paths in the scene are
/// resolved against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let e = lex(text)?;

    // [scene]
    let kind = match e.get("scene", "type").map(|(v, _)| v.as_str()) {
        None => return Err(e.err("scene", "type", "missing scene type")),
        Some("eq6_qudit") => SceneKind::Eq6Qudit,
        Some("qudit") => SceneKind::Qudit,
        Some("lens") => SceneKind::Lens,
        Some("phmap") => SceneKind::PhaseMap,
        Some(other) => {
            return Err(e.err(
                "scene",
                "type",
                format!("unknown scene type {other:?}; expected eq6_qudit, qudit, lens or phmap"),
            ))
        }
    };
    let width = e.usize_or("scene", "width", 128)?;
    let height = e.usize_or("scene", "height", 128)?;
    let grid =
        GridSpec::new(width, height).map_err(|err| e.err("scene", "width", err.to_string()))?;

    let phases = match kind {
        SceneKind::Eq6Qudit => {
            if e.has("scene", "phases") {
                return Err(e.err(
                    "scene",
                    "phases",
                    "eq6_qudit fixes the phases; use type = qudit",
                ));
            }
            QuditState::equal_step().phases()
        }
        SceneKind::Qudit => e
            .list::<f64>("scene", "phases", "numbers")?
            .ok_or_else(|| e.err("scene", "phases", "qudit scene needs phases"))?,
        _ => Vec::new(),
    };
    let d = e.usize_or(
        "scene",
        "slits",
        if kind.is_qudit() { phases.len() } else { 6 },
    )?;
    if kind.is_qudit() && d != phases.len() {
        return Err(e.err(
            "scene",
            "slits",
            format!("{d} slits but {} phases", phases.len()),
        ));
    }
    let slit_width = e.usize_or("scene", "slit_width", 10)?;
    let slit_gap = e.usize_or("scene", "slit_gap", 4)?;
    let slit_length = e.usize_or("scene", "slit_length", 10)?;
    let mut layout = SlitLayout::new(d, slit_width, slit_gap, slit_length, (0, 0))
        .map_err(|err| e.err("scene", "slit_length", err.to_string()))?;
    let (ew, eh) = layout.extent();
    let origin_x = e.usize_or("scene", "origin_x", grid.width.saturating_sub(ew) / 2)?;
    let origin_y = e.usize_or("scene", "origin_y", grid.height.saturating_sub(eh) / 2)?;
    layout.origin = (origin_x, origin_y);
    if kind.is_qudit() {
        layout.check_fits(grid).map_err(|err| {
            e.err(
                "scene",
                if e.has("scene", "origin_x") {
                    "origin_x"
                } else {
                    "slits"
                },
                err.to_string(),
            )
        })?;
    }
    let background_amplitude = e.f64_or("scene", "background_amplitude", 1.0)?;
    if background_amplitude < 0.0 {
        return Err(e.err("scene", "background_amplitude", "must be >= 0"));
    }
    let background_phase = e.f64_or("scene", "background_phase", 0.0)?;
    let curvature = e.f64_or("scene", "curvature", PI / 8192.0)?;
    let (cx, cy) = grid_center(grid);
    let center = (
        e.f64_or("scene", "center_x", cx)?,
        e.f64_or("scene", "center_y", cy)?,
    );
    let amplitude = e.f64_or("scene", "amplitude", 1.0)?;
    if amplitude < 0.0 {
        return Err(e.err("scene", "amplitude", "must be >= 0"));
    }
    let path_key = |key: &str| -> Result<Option<PathBuf>, ConfigError> {
        match e.get("scene", key) {
            None => Ok(None),
            Some((v, _)) => {
                let p = base_dir.join(v);
                if !p.is_file() {
                    return Err(e.err(
                        "scene",
                        key,
                        format!("file {} does not exist", p.display()),
                    ));
                }
                Ok(Some(PathBuf::from(v)))
            }
        }
    };
    let phase_file = path_key("phase_file")?;
    let amplitude_file = path_key("amplitude_file")?;
    if kind == SceneKind::PhaseMap && phase_file.is_none() {
        return Err(e.err("scene", "phase_file", "phmap scene needs phase_file"));
    }

    // [psi]
    let n_steps = e.usize_or("psi", "n_steps", 4)?;
    if n_steps < 3 {
        return Err(e.err("psi", "n_steps", "need at least 3 phase steps"));
    }
    let reference = match (e.has("psi", "reference_re"), e.has("psi", "reference_im")) {
        (false, false) => None,
        (true, true) => Some((
            e.f64_or("psi", "reference_re", 0.0)?,
            e.f64_or("psi", "reference_im", 0.0)?,
        )),
        (true, false) => {
            return Err(e.err(
                "psi",
                "reference_im",
                "reference_re given without reference_im",
            ))
        }
        (false, true) => {
            return Err(e.err(
                "psi",
                "reference_re",
                "reference_im given without reference_re",
            ))
        }
    };
    let mu_sign = match e.get("psi", "mu_sign").map(|(v, _)| v.as_str()) {
        None | Some("1") | Some("+1") => MuSign::Plus,
        Some("-1") => MuSign::Minus,
        Some(other) => {
            return Err(e.err(
                "psi",
                "mu_sign",
                format!("expected +1 or -1, got {other:?}"),
            ))
        }
    };
    let illumination = e.f64_or("psi", "illumination", 3.0)?;
    if illumination < 0.0 {
        return Err(e.err("psi", "illumination", "must be >= 0"));
    }
    let dark_threshold = e.f64_or("psi", "dark_threshold", 0.5)?;

    // [noise]
    let sigma_one = e.f64_or("noise", "sigma_one", SIGMA_SINGLE_SAMPLE)?;
    if sigma_one < 0.0 {
        return Err(e.err("noise", "sigma_one", "must be >= 0"));
    }
    let nsamp = e.parse::<u32>("noise", "nsamp", "a positive integer")?;
    let readout_sigma = match nsamp {
        Some(n) => {
            let s = sigma_from_nsamp_with(n, sigma_one)
                .map_err(|err| e.err("noise", "nsamp", err.to_string()))?;
            if let Some(given) = e.parse::<f64>("noise", "readout_sigma", "a number")? {
                if given != s {
                    return Err(e.err(
                        "noise",
                        "readout_sigma",
                        format!("readout_sigma {given} contradicts nsamp {n} (which gives {s})"),
                    ));
                }
            }
            s
        }
        None => e.f64_or("noise", "readout_sigma", 0.2)?,
    };
    if readout_sigma < 0.0 {
        return Err(e.err("noise", "readout_sigma", "must be >= 0"));
    }
    let noise = NoiseSection {
        enabled: e.bool_or("noise", "enabled", true)?,
        readout_sigma,
        nsamp,
        sigma_one,
        quantize: e.bool_or("noise", "quantize", false)?,
        seed: e
            .parse::<u64>("noise", "seed", "an unsigned 64-bit integer")?
            .unwrap_or(0),
    };

    // [sweep]
    let default_illum = if kind.is_qudit() {
        vec![1.7, 3.0, 11.3]
    } else {
        vec![1.9, 4.0, 12.7]
    };
    let illuminations = e
        .list::<f64>("sweep", "illuminations", "numbers")?
        .unwrap_or(default_illum);
    if illuminations.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(e.err(
            "sweep",
            "illuminations",
            "illuminations must be finite and >= 0",
        ));
    }
    let noise_axis = match (
        e.list::<f64>("sweep", "sigmas", "numbers")?,
        e.list::<u32>("sweep", "nsamps", "positive integers")?,
    ) {
        (Some(_), Some(_)) => {
            return Err(e.err("sweep", "nsamps", "give either sigmas or nsamps, not both"))
        }
        (Some(s), None) => {
            if s.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(e.err("sweep", "sigmas", "sigmas must be finite and >= 0"));
            }
            NoiseAxis::Sigma(s)
        }
        (None, Some(n)) => {
            if n.contains(&0) {
                return Err(e.err("sweep", "nsamps", "NSAMP must be >= 1"));
            }
            NoiseAxis::Nsamp {
                nsamp: n,
                sigma_one,
            }
        }
        (None, None) => NoiseAxis::Sigma(vec![3.0, 2.0, 1.0, 0.5, 0.2]),
    };
    let n_bins = e
        .list::<usize>("sweep", "n_bin", "positive integers")?
        .unwrap_or(vec![1, 2, 4, 8]);
    if n_bins.contains(&0) {
        return Err(e.err("sweep", "n_bin", "n_bin must be >= 1"));
    }
    if kind.is_qudit() {
        if let Some(&too_big) = n_bins.iter().find(|&&n| n > layout.pixels_per_slit()) {
            return Err(e.err(
                "sweep",
                "n_bin",
                format!(
                    "n_bin {too_big} exceeds the {} pixels of each slit",
                    layout.pixels_per_slit()
                ),
            ));
        }
    }
    let repetitions = e.usize_or("sweep", "repetitions", 2000)?;
    if repetitions == 0 {
        return Err(e.err("sweep", "repetitions", "must be >= 1"));
    }
    let n_states = e.usize_or("sweep", "n_states", 81)?;
    if n_states == 0 {
        return Err(e.err("sweep", "n_states", "must be >= 1"));
    }
    let bootstrap_runs = e.usize_or("sweep", "bootstrap_runs", 1)?;
    if bootstrap_runs == 0 {
        return Err(e.err("sweep", "bootstrap_runs", "must be >= 1"));
    }
    let grid_sweep = SweepGrid {
        illuminations: illuminations.clone(),
        noise: noise_axis,
        n_bins,
        repetitions,
    };
    grid_sweep
        .validate()
        .map_err(|err| e.err("sweep", "illuminations", err.to_string()))?;

    let continuous = ContinuousSpec {
        illuminations,
        sigma_pair: (
            e.f64_or("sweep", "sigma_high", 3.0)?,
            e.f64_or("sweep", "sigma_low", 0.2)?,
        ),
        reference_illumination: e.f64_or("sweep", "reference_illumination", 500.0)?,
        reference_sigma: e.f64_or("sweep", "reference_sigma", 0.2)?,
        quantize: noise.quantize,
        histogram_bins: e.usize_or("sweep", "histogram_bins", 64)?,
    };
    if continuous.sigma_pair.0 < 0.0 || continuous.sigma_pair.1 < 0.0 {
        return Err(e.err("sweep", "sigma_high", "sigmas must be >= 0"));
    }
    if continuous.reference_sigma < 0.0 {
        return Err(e.err("sweep", "reference_sigma", "must be >= 0"));
    }
    if continuous.histogram_bins == 0 {
        return Err(e.err("sweep", "histogram_bins", "must be >= 1"));
    }
    if !kind.is_qudit() {
        let max_il = continuous.illuminations.iter().cloned().fold(0.0, f64::max);
        if continuous.reference_illumination < max_il {
            return Err(e.err(
                "sweep",
                "reference_illumination",
                format!(
                "reference illumination must be at least the largest test illumination {max_il}"
            ),
            ));
        }
    }

    let output_dir = e
        .get("output", "dir")
        .map_or_else(|| PathBuf::from("out"), |(v, _)| PathBuf::from(v));

    let quantize = noise.quantize;
    Ok(RunConfig {
        scene: SceneConfig {
            kind,
            grid,
            layout,
            phases,
            background_amplitude,
            background_phase,
            curvature,
            center,
            amplitude,
            phase_file,
            amplitude_file,
        },
        psi: PsiSection {
            n_steps,
            reference,
            mu_sign,
            illumination,
            dark_threshold,
        },
        noise,
        sweep: SweepSection {
            grid: grid_sweep,
            protocol: QuditProtocol {
                n_states,
                bootstrap_runs,
                quantize,
            },
            continuous,
            raw: e.bool_or("sweep", "raw", false)?,
        },
        output_dir,
    })
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl RunConfig {
    /// Fully resolved configuration in the input format.
    pub fn to_text(&self) -> String {
        let s = &self.scene;
        let mut t = String::new();
        writeln!(t, "[scene]").unwrap();
        writeln!(t, "type = {}", s.kind.name()).unwrap();
        writeln!(t, "width = {}", s.grid.width).unwrap();
        writeln!(t, "height = {}", s.grid.height).unwrap();
        writeln!(t, "slits = {}", s.layout.d).unwrap();
        writeln!(t, "slit_width = {}", s.layout.slit_width).unwrap();
        writeln!(t, "slit_gap = {}", s.layout.slit_gap).unwrap();
        writeln!(t, "slit_length = {}", s.layout.slit_length).unwrap();
        writeln!(t, "origin_x = {}", s.layout.origin.0).unwrap();
        writeln!(t, "origin_y = {}", s.layout.origin.1).unwrap();
        if s.kind == SceneKind::Qudit {
            writeln!(t, "phases = {}", join(&s.phases)).unwrap();
        }
        writeln!(t, "background_amplitude = {}", s.background_amplitude).unwrap();
        writeln!(t, "background_phase = {}", s.background_phase).unwrap();
        writeln!(t, "curvature = {}", s.curvature).unwrap();
        writeln!(t, "center_x = {}", s.center.0).unwrap();
        writeln!(t, "center_y = {}", s.center.1).unwrap();
        writeln!(t, "amplitude = {}", s.amplitude).unwrap();
        if let Some(p) = &s.phase_file {
            writeln!(t, "phase_file = {}", p.display()).unwrap();
        }
        if let Some(p) = &s.amplitude_file {
            writeln!(t, "amplitude_file = {}", p.display()).unwrap();
        }

        let p = &self.psi;
        writeln!(t, "\n[psi]").unwrap();
        writeln!(t, "n_steps = {}", p.n_steps).unwrap();
        if let Some((re, im)) = p.reference {
            writeln!(t, "reference_re = {re}").unwrap();
            writeln!(t, "reference_im = {im}").unwrap();
        }
        let sign = match p.mu_sign {
            MuSign::Plus => "+1",
            MuSign::Minus => "-1",
        };
        writeln!(t, "mu_sign = {sign}").unwrap();
        writeln!(t, "illumination = {}", p.illumination).unwrap();
        writeln!(t, "dark_threshold = {}", p.dark_threshold).unwrap();

        let n = &self.noise;
        writeln!(t, "\n[noise]").unwrap();
        writeln!(t, "enabled = {}", n.enabled).unwrap();
        match n.nsamp {
            Some(ns) => writeln!(t, "nsamp = {ns}").unwrap(),
            None => writeln!(t, "readout_sigma = {}", n.readout_sigma).unwrap(),
        }
        writeln!(t, "sigma_one = {}", n.sigma_one).unwrap();
        writeln!(t, "quantize = {}", n.quantize).unwrap();
        writeln!(t, "seed = {}", n.seed).unwrap();

        let w = &self.sweep;
        writeln!(t, "\n[sweep]").unwrap();
        writeln!(t, "illuminations = {}", join(&w.grid.illuminations)).unwrap();
        match &w.grid.noise {
            NoiseAxis::Sigma(s) => writeln!(t, "sigmas = {}", join(s)).unwrap(),
            NoiseAxis::Nsamp { nsamp, .. } => writeln!(t, "nsamps = {}", join(nsamp)).unwrap(),
        }
        writeln!(t, "n_bin = {}", join(&w.grid.n_bins)).unwrap();
        writeln!(t, "repetitions = {}", w.grid.repetitions).unwrap();
        writeln!(t, "n_states = {}", w.protocol.n_states).unwrap();
        writeln!(t, "bootstrap_runs = {}", w.protocol.bootstrap_runs).unwrap();
        writeln!(
            t,
            "reference_illumination = {}",
            w.continuous.reference_illumination
        )
        .unwrap();
        writeln!(t, "reference_sigma = {}", w.continuous.reference_sigma).unwrap();
        writeln!(t, "sigma_high = {}", w.continuous.sigma_pair.0).unwrap();
        writeln!(t, "sigma_low = {}", w.continuous.sigma_pair.1).unwrap();
        writeln!(t, "histogram_bins = {}", w.continuous.histogram_bins).unwrap();
        writeln!(t, "raw = {}", w.raw).unwrap();

        writeln!(t, "\n[output]").unwrap();
        writeln!(t, "dir = {}", self.output_dir.display()).unwrap();
        t
    }
}

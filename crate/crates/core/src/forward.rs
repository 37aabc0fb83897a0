//! Phase-shifting forward model.
//!
//! For phase step `αₙ = 2πn/N` the recorded field is
//! `Eₙ = U + K·(e^{iαₙ} − 1)`, where `K` is the plane-wave reference
//! (by default the spatial mean of `U`). Frames are `|Eₙ|²`, scaled to
//! photons per pixel.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{mean_field, ComplexField, GridSpec};
use crate::mapio::{load_map_of, save_map, MapKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiConfig {
    n_steps: usize,
    /// Reference `K·e^{iμ}` in field-amplitude units; `None` uses the field mean.
    pub reference_override: Option<Complex64>,
}

impl PsiConfig {
    pub fn new(n_steps: usize) -> Result<Self> {
        if n_steps < 3 {
            return Err(Error::Domain(format!(
                "phase shifting needs at least 3 steps, got {n_steps}"
            )));
        }
        Ok(Self {
            n_steps,
            reference_override: None,
        })
    }

    pub fn with_reference(mut self, reference: Complex64) -> Self {
        self.reference_override = Some(reference);
        self
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// `αₙ = 2πn/N` for `n = 0..N`.
    pub fn phase_steps(&self) -> Vec<f64> {
        (0..self.n_steps)
            .map(|n| 2.0 * PI * n as f64 / self.n_steps as f64)
            .collect()
    }

    /// `(cos αₙ, sin αₙ)`, exact at multiples of a quarter turn.
    pub fn step_trig(&self) -> Vec<(f64, f64)> {
        (0..self.n_steps)
            .map(|n| step_trig(n, self.n_steps))
            .collect()
    }
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self::new(4).expect("4 steps is valid")
    }
}

fn step_trig(n: usize, steps: usize) -> (f64, f64) {
    if (4 * n).is_multiple_of(steps) {
        match (4 * n / steps) % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let a = 2.0 * PI * n as f64 / steps as f64;
        (a.cos(), a.sin())
    }
}

/// N intensity frames, one per phase step, in photons (or electrons) per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferogramSet {
    pub grid: GridSpec,
    pub frames: Vec<Array2<f64>>,
    pub config: PsiConfig,
    /// Reference actually used, in field-amplitude units.
    pub reference: Option<Complex64>,
    /// Multiplier taking `|E|²` in field units to photons per pixel.
    pub intensity_scale: f64,
    pub illumination: f64,
}

impl InterferogramSet {
    /// Wrap externally supplied frames. `reference` is in photon units
    /// (`|K|²` is photons per pixel), or `None` when unknown.
    pub fn from_frames(
        frames: Vec<Array2<f64>>,
        config: PsiConfig,
        reference: Option<Complex64>,
    ) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Shape("no frames".into()))?;
        let (rows, cols) = first.dim();
        let grid = GridSpec::new(cols, rows)?;
        if frames.len() != config.n_steps() {
            return Err(Error::Shape(format!(
                "{} frames for {} phase steps",
                frames.len(),
                config.n_steps()
            )));
        }
        for (i, f) in frames.iter().enumerate() {
            grid.check_shape(f, &format!("frame {i}"))?;
        }
        Ok(Self {
            grid,
            frames,
            config,
            reference,
            intensity_scale: 1.0,
            illumination: f64::NAN,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.frames.len()
    }

    /// Reference in photon units: `K·sqrt(scale)`.
    pub fn scaled_reference(&self) -> Option<Complex64> {
        self.reference.map(|k| k * self.intensity_scale.sqrt())
    }

    /// Same frames with a different pixel payload, e.g. after adding noise.
    pub fn with_frames(&self, frames: Vec<Array2<f64>>) -> Result<Self> {
        if frames.len() != self.frames.len() {
            return Err(Error::Shape("frame count changed".into()));
        }
        for (i, f) in frames.iter().enumerate() {
            self.grid.check_shape(f, &format!("frame {i}"))?;
        }
        Ok(Self {
            frames,
            ..self.clone()
        })
    }

    /// Write one AMMAP file per frame plus `<stem>.manifest` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let mut text = String::new();
        writeln!(text, "PSI-MANIFEST 1").unwrap();
        writeln!(text, "width {}", self.grid.width).unwrap();
        writeln!(text, "height {}", self.grid.height).unwrap();
        writeln!(text, "n_steps {}", self.n_steps()).unwrap();
        let steps: Vec<String> = self
            .config
            .phase_steps()
            .iter()
            .map(|a| a.to_string())
            .collect();
        writeln!(text, "phase_steps {}", steps.join(" ")).unwrap();
        match self.reference {
            Some(k) => writeln!(text, "reference {} {}", k.re, k.im).unwrap(),
            None => writeln!(text, "reference none").unwrap(),
        }
        writeln!(text, "intensity_scale {}", self.intensity_scale).unwrap();
        writeln!(text, "illumination {}", self.illumination).unwrap();
        for (n, frame) in self.frames.iter().enumerate() {
            let name = format!("{stem}_frame{n}.ammap");
            save_map(&dir.join(&name), MapKind::Amplitude, frame)?;
            writeln!(text, "frame {name}").unwrap();
        }
        let path = dir.join(format!("{stem}.manifest"));
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Read a manifest written by [`InterferogramSet::save`]. Frame paths are
    /// resolved relative to the manifest's directory.
    pub fn load(manifest: &Path) -> Result<Self> {
        let text = fs::read_to_string(manifest)?;
        let base = manifest.parent().unwrap_or_else(|| Path::new("."));
        let bad = |line: &str| Error::Format(format!("bad manifest line {line:?}"));
        let mut lines = text.lines();
        if lines.next() != Some("PSI-MANIFEST 1") {
            return Err(Error::Format("missing PSI-MANIFEST header".into()));
        }
        let mut n_steps = None;
        let mut reference = None;
        let mut scale = 1.0;
        let mut illumination = f64::NAN;
        let mut frames = Vec::new();
        for line in lines {
            let (key, rest) = line.split_once(' ').ok_or_else(|| bad(line))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            match key {
                "width" | "height" | "phase_steps" => {}
                "n_steps" => n_steps = Some(rest.parse::<usize>().map_err(|_| bad(line))?),
                "reference" => {
                    reference = match rest.split_once(' ') {
                        Some((re, im)) => Some(Complex64::new(num(re)?, num(im)?)),
                        None if rest == "none" => None,
                        None => return Err(bad(line)),
                    }
                }
                "intensity_scale" => scale = num(rest)?,
                "illumination" => illumination = num(rest)?,
                "frame" => frames.push(load_map_of(&base.join(rest), MapKind::Amplitude)?),
                _ => return Err(bad(line)),
            }
        }
        let config =
            PsiConfig::new(n_steps.ok_or_else(|| Error::Format("manifest lacks n_steps".into()))?)?;
        let mut set = Self::from_frames(frames, config, None)?;
        set.reference = reference;
        set.intensity_scale = scale;
        set.illumination = illumination;
        if let Some(k) = reference {
            set.config = set.config.with_reference(k);
        }
        Ok(set)
    }
}

/// Noiseless frames `|Eₙ|²`, scaled so frame 0 averages `illumination`
/// photons per pixel over `region` (the whole grid when `None`).
pub fn simulate_interferograms(
    field: &ComplexField,
    config: &PsiConfig,
    illumination: f64,
    region: Option<&Array2<bool>>,
) -> Result<InterferogramSet> {
    if !(illumination >= 0.0 && illumination.is_finite()) {
        return Err(Error::Domain(format!(
            "illumination must be finite and >= 0, got {illumination}"
        )));
    }
    let grid = field.grid();
    let reference = match config.reference_override {
        Some(k) => k,
        None => mean_field(field)?,
    };
    if reference.norm_sqr() == 0.0 {
        return Err(Error::DegenerateReference(
            "reference amplitude is zero; every phase step would record the same frame".into(),
        ));
    }

    let u = field.values();
    let mut frames: Vec<Array2<f64>> = config
        .step_trig()
        .into_iter()
        .map(|(c, s)| {
            let shift = reference * Complex64::new(c - 1.0, s);
            u.mapv(|v| (v + shift).norm_sqr())
        })
        .collect();

    let anchor = match region {
        Some(mask) => {
            grid.check_shape(mask, "analysis region")?;
            let (sum, n) = Zip::from(&frames[0])
                .and(mask)
                .fold(
                    (0.0, 0usize),
                    |(s, n), &v, &m| if m { (s + v, n + 1) } else { (s, n) },
                );
            if n == 0 {
                return Err(Error::Shape("analysis region is empty".into()));
            }
            sum / n as f64
        }
        None => frames[0].mean().unwrap_or(0.0),
    };
    let scale = if illumination == 0.0 {
        0.0
    } else if anchor > 0.0 {
        illumination / anchor
    } else {
        return Err(Error::DegenerateReference(
            "field is dark over the analysis region; illumination cannot be normalized".into(),
        ));
    };
    for f in &mut frames {
        f.mapv_inplace(|v| v * scale);
    }

    Ok(InterferogramSet {
        grid,
        frames,
        config: *config,
        reference: Some(reference),
        intensity_scale: scale,
        illumination,
    })
}

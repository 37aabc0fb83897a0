//! Subcommand execution.
//!
//! Every command computes its full result set in memory first; files are
//! written only afterwards, and only inside the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use ndarray::Array2;
use num_complex::Complex64;
use psi_core::experiments::{
    continuous_experiment_on, fidelity_map, fidelity_sweep, FidelityCell, LensScene, QuditScene,
};
use psi_core::field::ComplexField;
use psi_core::forward::simulate_interferograms;
use psi_core::mapio::{load_map_of, MapKind};
use psi_core::reconstruct::reconstruct;
use psi_core::sensor::{apply_noise, NoiseParams};
use psi_core::{InterferogramSet, PsiConfig};
use thiserror::Error;

use crate::config::{RunConfig, SceneKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Reconstruct,
    QuditExperiment,
    SweepMap,
    ContinuousExperiment,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Reconstruct => "reconstruct",
            Command::QuditExperiment => "qudit-experiment",
            Command::SweepMap => "sweep-map",
            Command::ContinuousExperiment => "continuous-experiment",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    /// Invalid or inconsistent configuration; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Failure while computing or writing; exit code 1.
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }
}

/// One file to be written under the output directory.
pub enum Output {
    Text(String, String),
    Map(String, MapKind, Array2<f64>),
    Frames(String, InterferogramSet),
}

pub struct Job<'a> {
    pub command: Command,
    pub config: &'a RunConfig,
    /// Directory that relative scene paths are resolved against.
    pub base_dir: &'a Path,
    /// Interferogram manifest for `reconstruct`.
    pub manifest: Option<&'a Path>,
}

fn psi_config(cfg: &RunConfig) -> anyhow::Result<PsiConfig> {
    let mut psi = PsiConfig::new(cfg.psi.n_steps)?;
    if let Some((re, im)) = cfg.psi.reference {
        psi = psi.with_reference(Complex64::new(re, im));
    }
    Ok(psi)
}

fn qudit_scene(cfg: &RunConfig) -> anyhow::Result<QuditScene> {
    let s = &cfg.scene;
    Ok(QuditScene {
        grid: s.grid,
        layout: s.layout,
        state: s.state()?,
        background_amplitude: s.background_amplitude,
        background_phase: s.background_phase,
        psi: psi_config(cfg)?,
        mu_sign: cfg.psi.mu_sign,
    })
}

fn scene_field(cfg: &RunConfig, base_dir: &Path) -> anyhow::Result<ComplexField> {
    let s = &cfg.scene;
    match s.kind {
        SceneKind::Eq6Qudit | SceneKind::Qudit => Ok(qudit_scene(cfg)?.field()?),
        SceneKind::Lens => Ok(lens_scene(cfg)?.field()?),
        SceneKind::PhaseMap => {
            let phase_path = base_dir.join(s.phase_file.as_ref().expect("validated"));
            let phase = load_map_of(&phase_path, MapKind::Phase)
                .with_context(|| format!("reading {}", phase_path.display()))?;
            let amplitude = match &s.amplitude_file {
                Some(p) => {
                    let p = base_dir.join(p);
                    load_map_of(&p, MapKind::Amplitude)
                        .with_context(|| format!("reading {}", p.display()))?
                }
                None => Array2::from_elem(phase.dim(), s.amplitude),
            };
            Ok(ComplexField::from_polar(&amplitude, &phase)?)
        }
    }
}

fn lens_scene(cfg: &RunConfig) -> anyhow::Result<LensScene> {
    let s = &cfg.scene;
    Ok(LensScene {
        grid: s.grid,
        curvature: s.curvature,
        center: s.center,
        amplitude: s.amplitude,
        psi: psi_config(cfg)?,
        mu_sign: cfg.psi.mu_sign,
    })
}

/// Resolved configuration in config syntax, headed by the command name.
pub fn run_manifest(command: Command, cfg: &RunConfig) -> String {
    format!("# psi-sim {}\n{}", command.name(), cfg.to_text())
}

/// Compute every output of `job` without touching the filesystem beyond
/// reading inputs.
pub fn execute(job: &Job) -> Result<Vec<Output>, RunError> {
    let cfg = job.config;
    let mut outputs = vec![Output::Text(
        "manifest.txt".into(),
        run_manifest(job.command, cfg),
    )];
    match job.command {
        Command::Simulate => simulate(cfg, job.base_dir, &mut outputs)?,
        Command::Reconstruct => {
            let manifest = job
                .manifest
                .ok_or_else(|| RunError::Config("reconstruct needs --manifest".into()))?;
            reconstruct_cmd(cfg, manifest, &mut outputs)?
        }
        Command::QuditExperiment | Command::SweepMap => {
            if !cfg.scene.kind.is_qudit() {
                return Err(RunError::Config(format!(
                    "{} needs a qudit scene (type = eq6_qudit or qudit)",
                    job.command.name()
                )));
            }
            fidelity_cmd(job.command, cfg, &mut outputs)?
        }
        Command::ContinuousExperiment => {
            if cfg.scene.kind.is_qudit() {
                return Err(RunError::Config(
                    "continuous-experiment needs a lens or phmap scene".into(),
                ));
            }
            continuous_cmd(cfg, job.base_dir, &mut outputs)?
        }
    }
    Ok(outputs)
}

fn simulate(cfg: &RunConfig, base_dir: &Path, out: &mut Vec<Output>) -> anyhow::Result<()> {
    let field = scene_field(cfg, base_dir)?;
    let region = if cfg.scene.kind.is_qudit() {
        Some(cfg.scene.layout.region_mask(cfg.scene.grid)?)
    } else {
        None
    };
    info!("simulating frames at illumination {}", cfg.psi.illumination);
    let mut set = simulate_interferograms(
        &field,
        &psi_config(cfg)?,
        cfg.psi.illumination,
        region.as_ref(),
    )?;
    if cfg.noise.enabled {
        let params = NoiseParams {
            readout_sigma: cfg.noise.readout_sigma,
            nsamp: cfg.noise.nsamp,
            quantize: cfg.noise.quantize,
            seed: cfg.noise.seed,
        };
        set = apply_noise(&set, &params)?;
    }
    out.push(Output::Map(
        "true_phase.phmap".into(),
        MapKind::Phase,
        field.phase(),
    ));
    out.push(Output::Map(
        "true_amplitude.ammap".into(),
        MapKind::Amplitude,
        field.amplitude(),
    ));
    out.push(Output::Frames("interferograms".into(), set));
    Ok(())
}

fn reconstruct_cmd(cfg: &RunConfig, manifest: &Path, out: &mut Vec<Output>) -> anyhow::Result<()> {
    let set = InterferogramSet::load(manifest)
        .with_context(|| format!("loading {}", manifest.display()))?;
    let rec = reconstruct(&set, cfg.psi.mu_sign, cfg.psi.dark_threshold)?;
    let mut summary = String::new();
    writeln!(summary, "n_steps = {}", set.n_steps()).unwrap();
    writeln!(summary, "c0_used = {}", rec.c0_used).unwrap();
    writeln!(summary, "mu_used = {}", rec.mu_used).unwrap();
    out.push(Output::Text("reconstruction.txt".into(), summary));
    out.push(Output::Map("phase.phmap".into(), MapKind::Phase, rec.phase));
    out.push(Output::Map(
        "amplitude.ammap".into(),
        MapKind::Amplitude,
        rec.amplitude,
    ));
    Ok(())
}

const FIDELITY_HEADER: &str =
    "illumination,readout_sigma_or_nsamp,n_bin,mean_fidelity,std,stderr\n";

/// Fidelity table; failed cells leave the three statistics empty.
pub fn fidelity_csv(cells: &[FidelityCell]) -> String {
    let mut t = String::from(FIDELITY_HEADER);
    for c in cells {
        match c.stats {
            Some(s) => writeln!(
                t,
                "{},{},{},{},{},{}",
                c.illumination, c.noise_label, c.n_bin, s.mean, s.std, s.stderr
            ),
            None => writeln!(t, "{},{},{},,,", c.illumination, c.noise_label, c.n_bin),
        }
        .unwrap();
    }
    t
}

fn raw_csv(cells: &[FidelityCell]) -> String {
    let mut t = String::from("illumination,readout_sigma_or_nsamp,n_bin,repetition,fidelity\n");
    for c in cells {
        for (r, v) in c.values.iter().enumerate() {
            writeln!(
                t,
                "{},{},{},{},{}",
                c.illumination, c.noise_label, c.n_bin, r, v
            )
            .unwrap();
        }
    }
    t
}

fn fidelity_cmd(command: Command, cfg: &RunConfig, out: &mut Vec<Output>) -> anyhow::Result<()> {
    let scene = qudit_scene(cfg)?;
    let sweep = &cfg.sweep;
    let (name, cells) = if command == Command::SweepMap {
        info!(
            "fidelity map: {} illuminations x {} noise levels x {} repetitions",
            sweep.grid.illuminations.len(),
            sweep.grid.noise.len(),
            sweep.grid.repetitions
        );
        let map = fidelity_map(
            &scene,
            &sweep.grid.illuminations,
            &sweep.grid.noise,
            sweep.grid.repetitions,
            &sweep.protocol,
            cfg.noise.seed,
        )?;
        ("fidelity_map", map.cells)
    } else {
        info!(
            "fidelity sweep: {} cells x {} repetitions",
            sweep.grid.illuminations.len() * sweep.grid.noise.len() * sweep.grid.n_bins.len(),
            sweep.grid.repetitions
        );
        (
            "fidelity",
            fidelity_sweep(&scene, &sweep.grid, &sweep.protocol, cfg.noise.seed)?,
        )
    };
    out.push(Output::Text(format!("{name}.csv"), fidelity_csv(&cells)));
    if sweep.raw {
        out.push(Output::Text(format!("{name}_raw.csv"), raw_csv(&cells)));
    }
    Ok(())
}

fn continuous_cmd(cfg: &RunConfig, base_dir: &Path, out: &mut Vec<Output>) -> anyhow::Result<()> {
    let field = scene_field(cfg, base_dir)?;
    let spec = &cfg.sweep.continuous;
    info!(
        "continuous experiment at illuminations {:?}",
        spec.illuminations
    );
    let res = continuous_experiment_on(
        &field,
        &psi_config(cfg)?,
        cfg.psi.mu_sign,
        spec,
        cfg.noise.seed,
    )?;

    let mut errors = String::from("illumination,readout_sigma,circ_std,n_pixels\n");
    let mut hist = String::from("illumination,readout_sigma,bin_lo,bin_hi,count\n");
    for (k, case) in res.cases.iter().enumerate() {
        let st = &case.stats;
        writeln!(
            errors,
            "{},{},{},{}",
            case.illumination, case.readout_sigma, st.circ_std, st.n_pixels
        )
        .unwrap();
        for (b, count) in st.counts.iter().enumerate() {
            writeln!(
                hist,
                "{},{},{},{},{}",
                case.illumination,
                case.readout_sigma,
                st.edges[b],
                st.edges[b + 1],
                count
            )
            .unwrap();
        }
        let level = if k % 2 == 0 { "high" } else { "low" };
        out.push(Output::Map(
            format!("phase_{}_{level}.phmap", k / 2),
            MapKind::Phase,
            case.phase.clone(),
        ));
    }
    let mut ratios = String::from("illumination,circ_std_ratio_low_over_high\n");
    for (il, r) in res.std_ratios() {
        writeln!(ratios, "{il},{r}").unwrap();
    }
    out.push(Output::Map(
        "reference_phase.phmap".into(),
        MapKind::Phase,
        res.reference_phase,
    ));
    out.push(Output::Text("phase_error.csv".into(), errors));
    out.push(Output::Text("phase_error_hist.csv".into(), hist));
    out.push(Output::Text("std_ratio.csv".into(), ratios));
    Ok(())
}

/// Write `outputs` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, outputs: &[Output]) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for o in outputs {
        let path = match o {
            Output::Text(name, text) => {
                let p = dir.join(name);
                fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                p
            }
            Output::Map(name, kind, map) => {
                let p = dir.join(name);
                psi_core::mapio::save_map(&p, *kind, map)
                    .with_context(|| format!("writing {}", p.display()))?;
                p
            }
            Output::Frames(stem, set) => set
                .save(dir, stem)
                .with_context(|| format!("writing frames to {}", dir.display()))?,
        };
        written.push(path);
    }
    Ok(written)
}

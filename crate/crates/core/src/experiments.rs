//! Monte-Carlo sweeps over illumination, readout noise and binning.
//!
//! Every task draws from its own [`rng_stream`], keyed by the task's grid
//! coordinates, so results do not depend on worker count or scheduling
//! order. Shot-noise and readout-noise streams are keyed by illumination
//! and repetition only: cells that differ in readout noise reuse the same
//! Poisson draws and the same standard-normal readout draws (common random
//! numbers), which keeps trends across the noise axis free of
//! between-cell sampling jitter.

use std::f64::consts::PI;

use log::warn;
use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::circular::{circular_std, wrap_phase};
use crate::error::{Error, Result};
use crate::field::{
    grid_center, make_lens_phase, make_slit_mask, ComplexField, GridSpec, QuditState, SlitLayout,
};
use crate::forward::{simulate_interferograms, InterferogramSet, PsiConfig};
use crate::qudit::{check_bootstrap, run_average_fidelity, BinningPolicy, FidelityStats};
use crate::reconstruct::{reconstruct, MuSign, ReconstructionResult};
use crate::sensor::{apply_noise_with, rng_stream, sigma_from_nsamp_with, SIGMA_SINGLE_SAMPLE};

const STREAM_SHOT: u64 = 1;
const STREAM_READ: u64 = 2;
const STREAM_SAMPLING: u64 = 3;

/// `kind:8 | a:16 | b:8 | rep:32`.
fn stream_id(kind: u64, a: usize, b: usize, rep: usize) -> u64 {
    debug_assert!(a < 1 << 16 && b < 1 << 8 && rep < 1 << 32);
    (kind << 56) | ((a as u64) << 40) | ((b as u64) << 32) | rep as u64
}

/// Slit-encoded qudit in a uniform background.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditScene {
    pub grid: GridSpec,
    pub layout: SlitLayout,
    pub state: QuditState,
    pub background_amplitude: f64,
    pub background_phase: f64,
    pub psi: PsiConfig,
    pub mu_sign: MuSign,
}

impl QuditScene {
    /// Equal-step six-slit state on the default 128x128 geometry, background
    /// as bright as the slits.
    pub fn standard() -> Self {
        Self {
            grid: GridSpec::default(),
            layout: SlitLayout::standard(),
            state: QuditState::equal_step(),
            background_amplitude: 1.0,
            background_phase: 0.0,
            psi: PsiConfig::default(),
            mu_sign: MuSign::Plus,
        }
    }

    pub fn field(&self) -> Result<ComplexField> {
        make_slit_mask(
            self.grid,
            &self.layout,
            &self.state,
            self.background_amplitude,
            self.background_phase,
        )
    }

    pub fn region(&self) -> Result<Array2<bool>> {
        self.layout.region_mask(self.grid)
    }

    /// Noiseless frames at `illumination` photons per slit pixel.
    pub fn interferograms(&self, illumination: f64) -> Result<InterferogramSet> {
        simulate_interferograms(
            &self.field()?,
            &self.psi,
            illumination,
            Some(&self.region()?),
        )
    }
}

/// Quadratic-phase wavefront over the full aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct LensScene {
    pub grid: GridSpec,
    /// rad / px².
    pub curvature: f64,
    pub center: (f64, f64),
    pub amplitude: f64,
    pub psi: PsiConfig,
    pub mu_sign: MuSign,
}

impl LensScene {
    /// Curvature π/8192 rad/px² centered on a 128x128 grid: just under half
    /// a wave of sag at the corners, so the reference `|K|` stays near 0.8.
    pub fn standard() -> Self {
        let grid = GridSpec::default();
        Self {
            grid,
            curvature: PI / 8192.0,
            center: grid_center(grid),
            amplitude: 1.0,
            psi: PsiConfig::default(),
            mu_sign: MuSign::Plus,
        }
    }

    pub fn field(&self) -> Result<ComplexField> {
        make_lens_phase(self.grid, self.curvature, self.center, self.amplitude)
    }
}

/// Readout-noise axis, either directly in e⁻ or as Skipper sample counts.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseAxis {
    Sigma(Vec<f64>),
    Nsamp { nsamp: Vec<u32>, sigma_one: f64 },
}

impl NoiseAxis {
    pub fn len(&self) -> usize {
        match self {
            NoiseAxis::Sigma(s) => s.len(),
            NoiseAxis::Nsamp { nsamp, .. } => nsamp.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sigmas(&self) -> Result<Vec<f64>> {
        match self {
            NoiseAxis::Sigma(s) => {
                if let Some(bad) = s.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(Error::Domain(format!("invalid readout sigma {bad}")));
                }
                Ok(s.clone())
            }
            NoiseAxis::Nsamp { nsamp, sigma_one } => nsamp
                .iter()
                .map(|&n| sigma_from_nsamp_with(n, *sigma_one))
                .collect(),
        }
    }

    /// Value reported in output tables: sigma in e⁻, or NSAMP.
    pub fn labels(&self) -> Vec<f64> {
        match self {
            NoiseAxis::Sigma(s) => s.clone(),
            NoiseAxis::Nsamp { nsamp, .. } => nsamp.iter().map(|&n| n as f64).collect(),
        }
    }

    pub fn is_nsamp(&self) -> bool {
        matches!(self, NoiseAxis::Nsamp { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub illuminations: Vec<f64>,
    pub noise: NoiseAxis,
    pub n_bins: Vec<usize>,
    pub repetitions: usize,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.illuminations.is_empty() || self.noise.is_empty() || self.n_bins.is_empty() {
            return Err(Error::Domain("sweep grid axes must be non-empty".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Domain("repetitions must be >= 1".into()));
        }
        if let Some(bad) = self
            .illuminations
            .iter()
            .find(|v| !(**v >= 0.0 && v.is_finite()))
        {
            return Err(Error::Domain(format!("invalid illumination {bad}")));
        }
        if self.n_bins.contains(&0) {
            return Err(Error::Domain("n_bin must be >= 1".into()));
        }
        if self.illuminations.len() >= 1 << 16
            || self.noise.len() >= 1 << 8
            || self.n_bins.len() >= 1 << 8
            || self.repetitions >= 1 << 32
        {
            return Err(Error::Domain(
                "sweep grid too large for stream keying".into(),
            ));
        }
        self.noise.sigmas()?;
        Ok(())
    }

    /// Illuminations {1.7, 3.0, 11.3} phot/px, σ from 3.0 down to 0.2 e⁻,
    /// bins {1, 2, 4, 8}.
    pub fn fidelity_default() -> Self {
        Self {
            illuminations: vec![1.7, 3.0, 11.3],
            noise: NoiseAxis::Sigma(vec![3.0, 2.0, 1.0, 0.5, 0.2]),
            n_bins: vec![1, 2, 4, 8],
            repetitions: 2000,
        }
    }

    /// Illumination x readout-noise map grid, one bin.
    pub fn map_default() -> Self {
        Self {
            illuminations: vec![1.0, 1.7, 3.0, 5.0, 8.0, 11.3, 15.0],
            noise: NoiseAxis::Sigma(vec![3.0, 2.0, 1.0, 0.5, 0.2]),
            n_bins: vec![1],
            repetitions: 2000,
        }
    }
}

/// Sampling protocol for one pipeline repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuditProtocol {
    /// States per bootstrap run; capped per cell at `pixels_per_slit / n_bin`.
    pub n_states: usize,
    /// Bootstrap runs averaged into each repetition's value.
    pub bootstrap_runs: usize,
    pub quantize: bool,
}

impl Default for QuditProtocol {
    fn default() -> Self {
        Self {
            n_states: 81,
            bootstrap_runs: 1,
            quantize: false,
        }
    }
}

impl QuditProtocol {
    pub fn states_for(&self, layout: &SlitLayout, n_bin: usize) -> usize {
        self.n_states.min(layout.pixels_per_slit() / n_bin.max(1))
    }
}

/// One `(illumination, readout noise, n_bin)` cell of a fidelity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCell {
    pub illumination: f64,
    /// σ in e⁻ or NSAMP, matching the sweep's [`NoiseAxis`].
    pub noise_label: f64,
    pub readout_sigma: f64,
    pub n_bin: usize,
    /// Per-repetition fidelity values, in repetition order.
    pub values: Vec<f64>,
    /// `None` when the cell failed.
    pub stats: Option<FidelityStats>,
    pub error: Option<String>,
}

/// Noise, reconstruction and bootstrap for every σ and n_bin of one
/// `(illumination, repetition)` pair.
#[allow(clippy::too_many_arguments)]
fn qudit_repetition(
    scene: &QuditScene,
    noiseless: &InterferogramSet,
    sigmas: &[f64],
    n_bins: &[usize],
    protocol: &QuditProtocol,
    seed: u64,
    illum_idx: usize,
    rep: usize,
) -> Vec<Result<f64>> {
    let mut out = Vec::with_capacity(sigmas.len() * n_bins.len());
    for &sigma in sigmas {
        let result = noisy_reconstruction(
            noiseless,
            sigma,
            protocol.quantize,
            scene.mu_sign,
            seed,
            illum_idx,
            rep,
        );
        for (b, &n_bin) in n_bins.iter().enumerate() {
            out.push(result.as_ref().map_err(clone_err).and_then(|r| {
                let policy = BinningPolicy::new(n_bin)?;
                policy.check(&scene.layout)?;
                let n_states = protocol.states_for(&scene.layout, n_bin);
                check_bootstrap(
                    r,
                    &scene.state,
                    &scene.layout,
                    &policy,
                    n_states,
                    protocol.bootstrap_runs,
                )?;
                let mut rng = rng_stream(seed, stream_id(STREAM_SAMPLING, illum_idx, b, rep));
                let mut total = 0.0;
                for _ in 0..protocol.bootstrap_runs {
                    total += run_average_fidelity(
                        r,
                        &scene.state,
                        &scene.layout,
                        &policy,
                        n_states,
                        &mut rng,
                    )?;
                }
                Ok(total / protocol.bootstrap_runs as f64)
            }));
        }
    }
    out
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Dimension(s) => Error::Dimension(s.clone()),
        Error::Shape(s) => Error::Shape(s.clone()),
        Error::Domain(s) => Error::Domain(s.clone()),
        Error::DegenerateReference(s) => Error::DegenerateReference(s.clone()),
        Error::Estimation(s) => Error::Estimation(s.clone()),
        Error::Sampling(s) => Error::Sampling(s.clone()),
        Error::Format(s) => Error::Format(s.clone()),
        Error::Io(e) => Error::Format(e.to_string()),
    }
}

fn noisy_reconstruction(
    noiseless: &InterferogramSet,
    sigma: f64,
    quantize: bool,
    mu_sign: MuSign,
    seed: u64,
    illum_idx: usize,
    rep: usize,
) -> Result<ReconstructionResult> {
    let mut shot = rng_stream(seed, stream_id(STREAM_SHOT, illum_idx, 0, rep));
    let mut read = rng_stream(seed, stream_id(STREAM_READ, illum_idx, 0, rep));
    let noisy = apply_noise_with(noiseless, sigma, quantize, &mut shot, &mut read)?;
    reconstruct(&noisy, mu_sign, 0.0)
}

/// Fidelity statistics for every `(illumination, σ, n_bin)` cell, ordered
/// illumination-major, then noise, then bin.
///
/// Each repetition is one full simulate → noise → reconstruct → sample
/// pipeline; a cell's statistics are taken over its repetitions. Cells
/// whose pipeline fails are reported with `stats = None`.
pub fn fidelity_sweep(
    scene: &QuditScene,
    grid: &SweepGrid,
    protocol: &QuditProtocol,
    seed: u64,
) -> Result<Vec<FidelityCell>> {
    grid.validate()?;
    if protocol.bootstrap_runs == 0 || protocol.n_states == 0 {
        return Err(Error::Domain(
            "n_states and bootstrap_runs must be >= 1".into(),
        ));
    }
    let sigmas = grid.noise.sigmas()?;
    let labels = grid.noise.labels();
    let noiseless: Vec<Result<InterferogramSet>> = grid
        .illuminations
        .iter()
        .map(|&il| scene.interferograms(il))
        .collect();

    let reps = grid.repetitions;
    let per_task: Vec<Vec<Result<f64>>> = (0..grid.illuminations.len() * reps)
        .into_par_iter()
        .map(|task| {
            let (i, rep) = (task / reps, task % reps);
            match &noiseless[i] {
                Ok(frames) => {
                    qudit_repetition(scene, frames, &sigmas, &grid.n_bins, protocol, seed, i, rep)
                }
                Err(e) => (0..sigmas.len() * grid.n_bins.len())
                    .map(|_| Err(clone_err(e)))
                    .collect(),
            }
        })
        .collect();

    let n_cells_per_illum = sigmas.len() * grid.n_bins.len();
    let mut cells = Vec::with_capacity(grid.illuminations.len() * n_cells_per_illum);
    for (i, &illumination) in grid.illuminations.iter().enumerate() {
        for (j, &sigma) in sigmas.iter().enumerate() {
            for (b, &n_bin) in grid.n_bins.iter().enumerate() {
                let idx = j * grid.n_bins.len() + b;
                let mut values = Vec::with_capacity(reps);
                let mut error = None;
                for rep in 0..reps {
                    match &per_task[i * reps + rep][idx] {
                        Ok(v) => values.push(*v),
                        Err(e) => {
                            error = Some(e.to_string());
                            break;
                        }
                    }
                }
                let stats = match &error {
                    None => Some(FidelityStats::from_runs(
                        &values,
                        protocol.states_for(&scene.layout, n_bin),
                    )),
                    Some(e) => {
                        warn!("cell illumination={illumination} sigma={sigma} n_bin={n_bin} failed: {e}");
                        values.clear();
                        None
                    }
                };
                cells.push(FidelityCell {
                    illumination,
                    noise_label: labels[j],
                    readout_sigma: sigma,
                    n_bin,
                    values,
                    stats,
                    error,
                });
            }
        }
    }
    Ok(cells)
}

/// Mean-fidelity map over illumination x readout noise with one-pixel bins.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMap {
    pub illuminations: Vec<f64>,
    pub noise: NoiseAxis,
    /// Row-major: `cells[i * noise.len() + j]`.
    pub cells: Vec<FidelityCell>,
}

impl FidelityMap {
    pub fn cell(&self, illum_idx: usize, noise_idx: usize) -> &FidelityCell {
        &self.cells[illum_idx * self.noise.len() + noise_idx]
    }

    pub fn mean(&self, illum_idx: usize, noise_idx: usize) -> Option<f64> {
        self.cell(illum_idx, noise_idx).stats.map(|s| s.mean)
    }
}

pub fn fidelity_map(
    scene: &QuditScene,
    illuminations: &[f64],
    noise: &NoiseAxis,
    repetitions: usize,
    protocol: &QuditProtocol,
    seed: u64,
) -> Result<FidelityMap> {
    let grid = SweepGrid {
        illuminations: illuminations.to_vec(),
        noise: noise.clone(),
        n_bins: vec![1],
        repetitions,
    };
    let cells = fidelity_sweep(scene, &grid, protocol, seed)?;
    Ok(FidelityMap {
        illuminations: illuminations.to_vec(),
        noise: noise.clone(),
        cells,
    })
}

/// Histogram and circular spread of per-pixel phase differences.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseErrorStats {
    /// `counts.len() + 1` edges spanning (−π, π].
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub circ_std: f64,
    pub n_pixels: usize,
}

impl PhaseErrorStats {
    /// Statistics of already-wrapped differences.
    pub fn from_differences(diffs: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Domain("histogram needs at least one bin".into()));
        }
        let width = 2.0 * PI / bins as f64;
        let edges = (0..=bins).map(|k| -PI + k as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &d in diffs {
            let k = (((d + PI) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self {
            edges,
            counts,
            circ_std: circular_std(diffs.iter().copied()),
            n_pixels: diffs.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSpec {
    pub illuminations: Vec<f64>,
    /// `(σ_high, σ_low)` in e⁻.
    pub sigma_pair: (f64, f64),
    pub reference_illumination: f64,
    pub reference_sigma: f64,
    pub quantize: bool,
    pub histogram_bins: usize,
}

impl Default for ContinuousSpec {
    fn default() -> Self {
        Self {
            illuminations: vec![1.9, 4.0, 12.7],
            sigma_pair: (3.0, 0.2),
            reference_illumination: 500.0,
            reference_sigma: 0.2,
            quantize: false,
            histogram_bins: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousCase {
    pub illumination: f64,
    pub readout_sigma: f64,
    pub stats: PhaseErrorStats,
    pub phase: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousResult {
    pub reference_phase: Array2<f64>,
    pub support: Array2<bool>,
    /// Illumination-major; for each illumination σ_high then σ_low.
    pub cases: Vec<ContinuousCase>,
}

impl ContinuousResult {
    /// `circ_std(σ_low) / circ_std(σ_high)` per illumination.
    pub fn std_ratios(&self) -> Vec<(f64, f64)> {
        self.cases
            .chunks(2)
            .map(|p| (p[0].illumination, p[1].stats.circ_std / p[0].stats.circ_std))
            .collect()
    }
}

/// Phase error of low-light reconstructions against a high-flux reference.
pub fn continuous_experiment(
    scene: &LensScene,
    spec: &ContinuousSpec,
    seed: u64,
) -> Result<ContinuousResult> {
    continuous_experiment_on(&scene.field()?, &scene.psi, scene.mu_sign, spec, seed)
}

/// [`continuous_experiment`] for an arbitrary field, such as one loaded from
/// phase and amplitude maps.
pub fn continuous_experiment_on(
    field: &ComplexField,
    psi: &PsiConfig,
    mu_sign: MuSign,
    spec: &ContinuousSpec,
    seed: u64,
) -> Result<ContinuousResult> {
    if spec.illuminations.is_empty() {
        return Err(Error::Domain("no illuminations given".into()));
    }
    if spec.illuminations.len() >= 1 << 16 {
        return Err(Error::Domain("too many illuminations".into()));
    }
    let max_il = spec.illuminations.iter().cloned().fold(f64::MIN, f64::max);
    if spec.reference_illumination.is_nan() || spec.reference_illumination < max_il {
        return Err(Error::Domain(format!(
            "reference illumination {} is below a test illumination (max {max_il})",
            spec.reference_illumination
        )));
    }
    let support = field.support();
    let frames_at = |il: f64| simulate_interferograms(field, psi, il, None);

    // stream a = 0 is the reference; test illumination i uses a = i + 1
    let reference = {
        let noiseless = frames_at(spec.reference_illumination)?;
        reconstruct_with(
            &noiseless,
            spec.reference_sigma,
            spec.quantize,
            mu_sign,
            seed,
            0,
        )?
    };

    let sigmas = [spec.sigma_pair.0, spec.sigma_pair.1];
    let jobs: Vec<(usize, f64, f64)> = spec
        .illuminations
        .iter()
        .enumerate()
        .flat_map(|(i, &il)| sigmas.iter().map(move |&s| (i, il, s)))
        .collect();
    let cases = jobs
        .into_par_iter()
        .map(|(i, il, sigma)| {
            let noiseless = frames_at(il)?;
            let rec = reconstruct_with(&noiseless, sigma, spec.quantize, mu_sign, seed, i + 1)?;
            let diffs: Vec<f64> = Zip::from(&rec.phase)
                .and(&reference.phase)
                .and(&support)
                .fold(Vec::new(), |mut v, &p, &r, &m| {
                    if m {
                        v.push(wrap_phase(p - r));
                    }
                    v
                });
            Ok(ContinuousCase {
                illumination: il,
                readout_sigma: sigma,
                stats: PhaseErrorStats::from_differences(&diffs, spec.histogram_bins)?,
                phase: rec.phase,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ContinuousResult {
        reference_phase: reference.phase,
        support,
        cases,
    })
}

fn reconstruct_with(
    noiseless: &InterferogramSet,
    sigma: f64,
    quantize: bool,
    mu_sign: MuSign,
    seed: u64,
    stream: usize,
) -> Result<ReconstructionResult> {
    let mut shot = rng_stream(seed, stream_id(STREAM_SHOT, stream, 1, 0));
    let mut read = rng_stream(seed, stream_id(STREAM_READ, stream, 1, 0));
    let noisy = apply_noise_with(noiseless, sigma, quantize, &mut shot, &mut read)?;
    reconstruct(&noisy, mu_sign, 0.0)
}

/// Default single-sample readout noise used when a sweep is given in NSAMP.
pub fn default_sigma_one() -> f64 {
    SIGMA_SINGLE_SAMPLE
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_grid(reps: usize) -> SweepGrid {
        SweepGrid {
            illuminations: vec![3.0],
            noise: NoiseAxis::Sigma(vec![0.2]),
            n_bins: vec![1],
            repetitions: reps,
        }
    }

    #[test]
    fn stream_ids_are_distinct() {
        let a = stream_id(STREAM_SHOT, 1, 0, 5);
        let b = stream_id(STREAM_READ, 1, 0, 5);
        let c = stream_id(STREAM_SHOT, 2, 0, 5);
        let d = stream_id(STREAM_SHOT, 1, 0, 6);
        assert!(a != b && a != c && a != d && b != c);
    }

    #[test]
    fn grid_validation() {
        let mut g = small_grid(1);
        g.repetitions = 0;
        assert!(g.validate().is_err());
        let mut g = small_grid(1);
        g.illuminations.clear();
        assert!(g.validate().is_err());
        let mut g = small_grid(1);
        g.noise = NoiseAxis::Nsamp {
            nsamp: vec![0],
            sigma_one: 3.0,
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn nsamp_axis() {
        let axis = NoiseAxis::Nsamp {
            nsamp: vec![1, 4, 144],
            sigma_one: 3.0,
        };
        let s = axis.sigmas().unwrap();
        assert_eq!(s[0], 3.0);
        assert_eq!(s[1], 1.5);
        assert_abs_diff_eq!(s[2], 0.25, epsilon = 1e-15);
        assert_eq!(axis.labels(), vec![1.0, 4.0, 144.0]);
    }

    #[test]
    fn sweep_is_deterministic_and_well_formed() {
        let scene = QuditScene::standard();
        let grid = SweepGrid {
            illuminations: vec![1.7, 3.0],
            noise: NoiseAxis::Sigma(vec![3.0, 0.2]),
            n_bins: vec![1, 2],
            repetitions: 4,
        };
        let a = fidelity_sweep(&scene, &grid, &QuditProtocol::default(), 7).unwrap();
        let b = fidelity_sweep(&scene, &grid, &QuditProtocol::default(), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        for cell in &a {
            let s = cell.stats.unwrap();
            assert_eq!(s.n_runs, 4);
            assert!((0.0..=1.0).contains(&s.mean));
            let recomputed = FidelityStats::from_runs(&cell.values, s.n_states_per_run);
            assert_eq!(recomputed, s);
        }
        // n_bin = 2 caps the states per run at 50 for 100-pixel slits
        assert_eq!(a[1].stats.unwrap().n_states_per_run, 50);
        assert_eq!(a[0].stats.unwrap().n_states_per_run, 81);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let scene = QuditScene::standard();
        let grid = SweepGrid {
            illuminations: vec![3.0, 11.3],
            noise: NoiseAxis::Sigma(vec![1.0]),
            n_bins: vec![1],
            repetitions: 6,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| fidelity_sweep(&scene, &grid, &QuditProtocol::default(), 3).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn noiseless_limit_is_perfect() {
        // very high illumination, no readout noise: fidelity ≈ 1
        let scene = QuditScene::standard();
        let mut g = small_grid(2);
        g.illuminations = vec![1e6];
        g.noise = NoiseAxis::Sigma(vec![0.0]);
        let cells = fidelity_sweep(&scene, &g, &QuditProtocol::default(), 1).unwrap();
        assert!(cells[0].stats.unwrap().mean > 0.9999);
    }

    #[test]
    fn failed_cell_is_missing_not_fatal() {
        let scene = QuditScene::standard();
        let mut g = small_grid(2);
        g.n_bins = vec![1, 101];
        let cells = fidelity_sweep(&scene, &g, &QuditProtocol::default(), 1).unwrap();
        assert!(cells[0].stats.is_some());
        assert!(cells[1].stats.is_none());
        assert!(cells[1].error.as_deref().unwrap().contains("sampling"));
    }

    #[test]
    fn degenerate_scene_reports_missing_cells() {
        let mut scene = QuditScene::standard();
        scene.psi = scene
            .psi
            .with_reference(num_complex::Complex64::new(0.0, 0.0));
        let cells = fidelity_sweep(&scene, &small_grid(1), &QuditProtocol::default(), 1).unwrap();
        assert!(cells[0].stats.is_none());
    }

    #[test]
    fn histogram_counts() {
        let diffs = [-3.0, -0.1, 0.0, 0.1, PI];
        let s = PhaseErrorStats::from_differences(&diffs, 4).unwrap();
        assert_eq!(s.counts, vec![1, 1, 2, 1]);
        assert_eq!(s.counts.iter().sum::<u64>() as usize, s.n_pixels);
        assert_eq!(s.edges.len(), 5);
        assert_abs_diff_eq!(s.edges[0], -PI);
        assert_abs_diff_eq!(s.edges[4], PI, epsilon = 1e-15);
    }

    #[test]
    fn continuous_self_comparison() {
        let scene = LensScene::standard();
        let spec = ContinuousSpec {
            illuminations: vec![500.0],
            sigma_pair: (0.2, 0.2),
            ..ContinuousSpec::default()
        };
        let r = continuous_experiment(&scene, &spec, 5).unwrap();
        assert_eq!(r.cases.len(), 2);
        assert!(
            r.cases[1].stats.circ_std < 0.05,
            "{}",
            r.cases[1].stats.circ_std
        );
        assert_eq!(r.cases[0].stats.n_pixels, 128 * 128);
        assert_eq!(r.cases[0].stats.counts.len(), 64);
    }

    #[test]
    fn continuous_rejects_weak_reference() {
        let spec = ContinuousSpec {
            reference_illumination: 4.0,
            ..ContinuousSpec::default()
        };
        assert!(continuous_experiment(&LensScene::standard(), &spec, 0).is_err());
    }
}

//! Slit-state extraction from phase maps and fidelity statistics.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::circular::circular_mean;
use crate::error::{Error, Result};
use crate::field::{QuditState, SlitLayout};
use crate::reconstruct::ReconstructionResult;

/// How slit amplitudes are assigned to an extracted state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeMode {
    /// Every slit gets `1/√d`.
    #[default]
    Uniform,
    /// Mean reconstructed amplitude of the sampled pixels.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinningPolicy {
    /// Pixels per slit whose phases are averaged into one coefficient.
    pub n_bin: usize,
    pub amplitude: AmplitudeMode,
}

impl BinningPolicy {
    pub fn new(n_bin: usize) -> Result<Self> {
        if n_bin == 0 {
            return Err(Error::Domain("n_bin must be >= 1".into()));
        }
        Ok(Self {
            n_bin,
            amplitude: AmplitudeMode::Uniform,
        })
    }

    pub fn check(&self, layout: &SlitLayout) -> Result<()> {
        if self.n_bin > layout.pixels_per_slit() {
            return Err(Error::Sampling(format!(
                "n_bin {} exceeds {} pixels per slit",
                self.n_bin,
                layout.pixels_per_slit()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityStats {
    pub mean: f64,
    /// Sample standard deviation of the per-run values.
    pub std: f64,
    pub stderr: f64,
    pub n_states_per_run: usize,
    pub n_runs: usize,
}

impl FidelityStats {
    /// Summary of per-run averaged fidelities.
    pub fn from_runs(values: &[f64], n_states_per_run: usize) -> Self {
        let n = values.len();
        let mean = if n == 0 {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / n as f64
        };
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            stderr: if n == 0 {
                f64::NAN
            } else {
                std / (n as f64).sqrt()
            },
            n_states_per_run,
            n_runs: n,
        }
    }
}

/// `|⟨target|reconstructed⟩|`.
pub fn fidelity(target: &QuditState, reconstructed: &QuditState) -> Result<f64> {
    if target.dim() != reconstructed.dim() {
        return Err(Error::Shape(format!(
            "fidelity between dimensions {} and {}",
            target.dim(),
            reconstructed.dim()
        )));
    }
    let overlap: Complex64 = target
        .coeffs()
        .iter()
        .zip(reconstructed.coeffs())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(overlap.norm().min(1.0))
}

/// Pixel lists of every slit.
fn slit_pixel_sets(layout: &SlitLayout) -> Vec<Vec<(usize, usize)>> {
    (0..layout.d).map(|k| layout.slit_pixels(k)).collect()
}

fn check_geometry(result: &ReconstructionResult, layout: &SlitLayout) -> Result<()> {
    let (rows, cols) = result.phase.dim();
    let (w, h) = layout.extent();
    if layout.origin.0 + w > cols || layout.origin.1 + h > rows {
        return Err(Error::Dimension(format!(
            "slit layout exceeds the {cols}x{rows} phase map"
        )));
    }
    Ok(())
}

/// State from one group of pixels per slit.
fn state_from_groups(
    result: &ReconstructionResult,
    groups: &[&[(usize, usize)]],
    mode: AmplitudeMode,
) -> Result<QuditState> {
    let coeffs = groups
        .iter()
        .map(|pixels| {
            let phase = circular_mean(pixels.iter().map(|&p| result.phase[p]));
            let amp = match mode {
                AmplitudeMode::Uniform => 1.0,
                AmplitudeMode::Measured => {
                    pixels.iter().map(|&p| result.amplitude[p]).sum::<f64>() / pixels.len() as f64
                }
            };
            Complex64::from_polar(amp, phase)
        })
        .collect();
    QuditState::new(coeffs)
}

/// Draw `n_bin` pixels per slit without replacement and average their phases.
pub fn extract_state<R: Rng + ?Sized>(
    result: &ReconstructionResult,
    layout: &SlitLayout,
    policy: &BinningPolicy,
    rng: &mut R,
) -> Result<QuditState> {
    check_geometry(result, layout)?;
    policy.check(layout)?;
    let mut sets = slit_pixel_sets(layout);
    let groups: Vec<&[(usize, usize)]> = sets
        .iter_mut()
        .map(|s| &*s.partial_shuffle(rng, policy.n_bin).0)
        .collect();
    state_from_groups(result, &groups, policy.amplitude)
}

/// Average fidelity of `n_states` states built from disjoint pixel groups.
///
/// Each slit's pixels are shuffled once and cut into `n_states` groups of
/// `n_bin`, so no pixel is used twice within the run.
pub fn run_average_fidelity<R: Rng + ?Sized>(
    result: &ReconstructionResult,
    target: &QuditState,
    layout: &SlitLayout,
    policy: &BinningPolicy,
    n_states: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut sets = slit_pixel_sets(layout);
    let needed = n_states * policy.n_bin;
    let drawn: Vec<&[(usize, usize)]> = sets
        .iter_mut()
        .map(|s| &*s.partial_shuffle(rng, needed).0)
        .collect();
    let mut total = 0.0;
    for t in 0..n_states {
        let groups: Vec<&[(usize, usize)]> = drawn
            .iter()
            .map(|d| &d[t * policy.n_bin..(t + 1) * policy.n_bin])
            .collect();
        total += fidelity(
            target,
            &state_from_groups(result, &groups, policy.amplitude)?,
        )?;
    }
    Ok(total / n_states as f64)
}

pub(crate) fn check_bootstrap(
    result: &ReconstructionResult,
    target: &QuditState,
    layout: &SlitLayout,
    policy: &BinningPolicy,
    n_states: usize,
    n_runs: usize,
) -> Result<()> {
    check_geometry(result, layout)?;
    if target.dim() != layout.d {
        return Err(Error::Shape(format!(
            "target dimension {} vs {} slits",
            target.dim(),
            layout.d
        )));
    }
    if n_states == 0 || n_runs == 0 {
        return Err(Error::Domain("n_states and n_runs must be >= 1".into()));
    }
    if n_states * policy.n_bin > layout.pixels_per_slit() {
        return Err(Error::Sampling(format!(
            "{n_states} states x {} pixels exceed {} pixels per slit",
            policy.n_bin,
            layout.pixels_per_slit()
        )));
    }
    Ok(())
}

/// Mean, spread and standard error of per-run average fidelities over `n_runs` runs.
pub fn bootstrap_fidelity<R: Rng + ?Sized>(
    result: &ReconstructionResult,
    target: &QuditState,
    layout: &SlitLayout,
    policy: &BinningPolicy,
    n_states: usize,
    n_runs: usize,
    rng: &mut R,
) -> Result<FidelityStats> {
    check_bootstrap(result, target, layout, policy, n_states, n_runs)?;
    let runs = (0..n_runs)
        .map(|_| run_average_fidelity(result, target, layout, policy, n_states, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityStats::from_runs(&runs, n_states))
}

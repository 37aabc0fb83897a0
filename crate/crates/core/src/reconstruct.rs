//! Phase extraction from a phase-shifted interferogram set.
//!
//! With `C = Σ Iₙ cos αₙ` and `S = Σ Iₙ sin αₙ`, the forward model expands to
//! `C − C₀ = N|K|u·cos(φ − μ)` and `S = N|K|u·sin(φ − μ)`, where
//! `C₀ = −N|K|²`. Hence `arctan2(S, C − C₀) = φ − μ`.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::circular::{arctan2, wrap_phase};
use crate::error::{Error, Result};
use crate::forward::InterferogramSet;

/// Sign applied to `μ` when converting `arctan2(S, C − C₀)` back to `φ`.
///
/// `Plus` is the algebraically consistent choice for the forward model in
/// [`crate::forward`]; `Minus` reproduces the `φ = arctan2(...) − μ` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuSign {
    #[default]
    Plus,
    Minus,
}

impl MuSign {
    pub fn factor(self) -> f64 {
        match self {
            MuSign::Plus => 1.0,
            MuSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Wrapped phase, radians.
    pub phase: Array2<f64>,
    /// `sqrt(max(frame 0, 0))`.
    pub amplitude: Array2<f64>,
    pub c0_used: f64,
    pub mu_used: f64,
}

/// `(C, S)` maps.
pub fn combine(frames: &InterferogramSet) -> Result<(Array2<f64>, Array2<f64>)> {
    let trig = frames.config.step_trig();
    if frames.frames.len() != trig.len() {
        return Err(Error::Shape(format!(
            "{} frames for {} phase steps",
            frames.frames.len(),
            trig.len()
        )));
    }
    if trig.len() < 3 {
        return Err(Error::Domain("need at least 3 phase steps".into()));
    }
    let shape = frames.grid.shape();
    let mut c = Array2::zeros(shape);
    let mut s = Array2::zeros(shape);
    for (i, (frame, &(co, si))) in frames.frames.iter().zip(&trig).enumerate() {
        frames.grid.check_shape(frame, &format!("frame {i}"))?;
        Zip::from(&mut c)
            .and(&mut s)
            .and(frame)
            .for_each(|c, s, &v| {
                *c += v * co;
                *s += v * si;
            });
    }
    Ok((c, s))
}

/// How `C₀` is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum C0Estimate {
    /// `−N|K|²` from a known reference in photon units.
    Analytic {
        reference: Complex64,
        n_steps: usize,
    },
    /// Mean of `C` over pixels where the input field is dark.
    Empirical { dark_region: Array2<bool> },
}

pub fn c0_analytic(reference: Complex64, n_steps: usize) -> f64 {
    -(n_steps as f64) * reference.norm_sqr()
}

pub fn c0_empirical(c: &Array2<f64>, dark_region: &Array2<bool>) -> Result<f64> {
    if c.dim() != dark_region.dim() {
        return Err(Error::Shape(format!(
            "C map {:?} vs dark region {:?}",
            c.dim(),
            dark_region.dim()
        )));
    }
    let (sum, n) =
        Zip::from(c).and(dark_region).fold(
            (0.0, 0usize),
            |(s, n), &v, &m| if m { (s + v, n + 1) } else { (s, n) },
        );
    if n == 0 {
        return Err(Error::Estimation("dark region is empty".into()));
    }
    Ok(sum / n as f64)
}

pub fn estimate_c0(c: &Array2<f64>, how: &C0Estimate) -> Result<f64> {
    match how {
        C0Estimate::Analytic { reference, n_steps } => Ok(c0_analytic(*reference, *n_steps)),
        C0Estimate::Empirical { dark_region } => c0_empirical(c, dark_region),
    }
}

/// Pixels whose frame-0 value is at most `threshold`; candidates for the dark region.
pub fn dark_pixels(frames: &InterferogramSet, threshold: f64) -> Array2<bool> {
    frames.frames[0].mapv(|v| v <= threshold)
}

/// `φ = wrap(arctan2(S, C − c0) ± μ)` and `u = sqrt(max(I₀, 0))`.
pub fn extract_phase(
    frames: &InterferogramSet,
    c0: f64,
    mu: f64,
    mu_sign: MuSign,
) -> Result<ReconstructionResult> {
    let (c, s) = combine(frames)?;
    Ok(phase_from_cs(&c, &s, &frames.frames[0], c0, mu, mu_sign))
}

pub(crate) fn phase_from_cs(
    c: &Array2<f64>,
    s: &Array2<f64>,
    frame0: &Array2<f64>,
    c0: f64,
    mu: f64,
    mu_sign: MuSign,
) -> ReconstructionResult {
    let offset = mu_sign.factor() * mu;
    let phase = Zip::from(c)
        .and(s)
        .map_collect(|&c, &s| wrap_phase(arctan2(s, c - c0) + offset));
    ReconstructionResult {
        phase,
        amplitude: frame0.mapv(|v| v.max(0.0).sqrt()),
        c0_used: c0,
        mu_used: mu,
    }
}

/// Reconstruct with the set's own reference: analytic `C₀` and `μ = arg K`
/// when the reference is known, otherwise empirical `C₀` over pixels with
/// frame 0 at or below `dark_threshold` and `μ = 0`.
pub fn reconstruct(
    frames: &InterferogramSet,
    mu_sign: MuSign,
    dark_threshold: f64,
) -> Result<ReconstructionResult> {
    let (c, s) = combine(frames)?;
    let (c0, mu) = match frames.scaled_reference() {
        Some(k) => (c0_analytic(k, frames.n_steps()), k.arg()),
        None => (c0_empirical(&c, &dark_pixels(frames, dark_threshold))?, 0.0),
    };
    Ok(phase_from_cs(&c, &s, &frames.frames[0], c0, mu, mu_sign))
}

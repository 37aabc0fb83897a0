//! Detector model: Poisson shot noise plus Gaussian readout noise.
//!
//! One photon produces one photo-electron; frames are in electrons after
//! noise is applied.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::forward::InterferogramSet;

/// Readout noise of a single charge sample, e⁻.
pub const SIGMA_SINGLE_SAMPLE: f64 = 3.0;

/// Below this mean the Poisson sampler uses sequential inversion.
const INVERSION_LIMIT: f64 = 10.0;

pub type RngStream = ChaCha8Rng;

/// Deterministic random stream `stream_id` of the family keyed by `seed`.
///
/// ChaCha8 with an explicit stream word: independent of platform, worker
/// count and the order in which streams are created.
pub fn rng_stream(seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Readout noise after averaging `nsamp` independent charge samples.
pub fn sigma_from_nsamp(nsamp: u32) -> Result<f64> {
    sigma_from_nsamp_with(nsamp, SIGMA_SINGLE_SAMPLE)
}

pub fn sigma_from_nsamp_with(nsamp: u32, sigma_one: f64) -> Result<f64> {
    if nsamp < 1 {
        return Err(Error::Domain("NSAMP must be >= 1".into()));
    }
    if !(sigma_one >= 0.0 && sigma_one.is_finite()) {
        return Err(Error::Domain(format!(
            "invalid single-sample noise {sigma_one}"
        )));
    }
    Ok(sigma_one / (nsamp as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Gaussian readout noise, e⁻.
    pub readout_sigma: f64,
    /// Skipper sample count the sigma was derived from, if any.
    pub nsamp: Option<u32>,
    /// Round to whole electrons after adding readout noise.
    pub quantize: bool,
    pub seed: u64,
}

impl NoiseParams {
    pub fn with_sigma(readout_sigma: f64, seed: u64) -> Result<Self> {
        if !(readout_sigma >= 0.0 && readout_sigma.is_finite()) {
            return Err(Error::Domain(format!(
                "readout sigma must be finite and >= 0, got {readout_sigma}"
            )));
        }
        Ok(Self {
            readout_sigma,
            nsamp: None,
            quantize: false,
            seed,
        })
    }

    pub fn with_nsamp(nsamp: u32, sigma_one: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            readout_sigma: sigma_from_nsamp_with(nsamp, sigma_one)?,
            nsamp: Some(nsamp),
            quantize: false,
            seed,
        })
    }

    pub fn quantized(mut self, quantize: bool) -> Self {
        self.quantize = quantize;
        self
    }
}

/// Exact Poisson draw.
///
/// Sequential inversion for small means (one uniform per draw, monotone in
/// `lambda` for a fixed uniform); transformed rejection above
/// [`INVERSION_LIMIT`].
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "Poisson mean must be finite and >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if lambda < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u32;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        // tail beyond k = 200 is far below f64 resolution for lambda < 10
        while u > cdf && k < 200 {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
        }
        Ok(k as f64)
    } else {
        let dist = Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(dist.sample(rng))
    }
}

/// Add shot and readout noise to one map.
///
/// Shot noise draws from `shot_rng` and readout noise from `read_rng`, so
/// the Poisson draws do not depend on `sigma`.
pub fn noisy_map<R: Rng + ?Sized>(
    mean: &Array2<f64>,
    sigma: f64,
    quantize: bool,
    shot_rng: &mut R,
    read_rng: &mut R,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros(mean.dim());
    for (o, &lambda) in out.iter_mut().zip(mean.iter()) {
        let shot = sample_poisson(lambda, shot_rng)?;
        let z: f64 = read_rng.sample(StandardNormal);
        let v = shot + sigma * z;
        *o = if quantize { v.round() } else { v };
    }
    Ok(out)
}

/// Noisy copy of `frames` using explicit streams.
pub fn apply_noise_with<R: Rng + ?Sized>(
    frames: &InterferogramSet,
    sigma: f64,
    quantize: bool,
    shot_rng: &mut R,
    read_rng: &mut R,
) -> Result<InterferogramSet> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("invalid readout sigma {sigma}")));
    }
    let noisy = frames
        .frames
        .iter()
        .map(|f| noisy_map(f, sigma, quantize, shot_rng, read_rng))
        .collect::<Result<Vec<_>>>()?;
    frames.with_frames(noisy)
}

/// Noisy copy of `frames` with streams 0 (shot) and 1 (readout) of `params.seed`.
pub fn apply_noise(frames: &InterferogramSet, params: &NoiseParams) -> Result<InterferogramSet> {
    let mut shot = rng_stream(params.seed, 0);
    let mut read = rng_stream(params.seed, 1);
    apply_noise_with(
        frames,
        params.readout_sigma,
        params.quantize,
        &mut shot,
        &mut read,
    )
}

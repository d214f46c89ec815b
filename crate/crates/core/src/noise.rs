//! Collapse noise: white Wiener increments, stationary colored noise with a
//! Gaussian spectral cutoff, and the noise correlation functions in the rest
//! frame of the noise and in boosted frames.
//!
//! # Conventions
//!
//! The spectrum is `λ(ω) = λ0·exp(-ω²t_c²)` (white when `t_c = 0`). The
//! temporal correlation of the noise rate `ξ = dW/dt` is
//!
//! ```text
//! C(τ) = (1/2π) ∫ dω λ(ω) e^{-iωτ} = λ0/(2√π t_c) · exp(-τ²/(4t_c²))
//! ```
//!
//! so `∫ C(τ) dτ = λ(0) = λ0`. Space-time correlations are normalized so that
//! the spatial factor is the normalized Gaussian
//! `exp(-|Δx|²/(4r_c²))/(8π^{3/2} r_c³)`; as `t_c → 0` this reproduces the
//! white, delta-correlated form with unit spatial weight.
//!
//! Trajectories store *increments* `ΔB = ξ·dt` per channel and step. For white
//! noise these are independent `N(0, dt)` deviates.
//!
//! # Seeding
//!
//! Channel `c` of a trajectory with seed `s` draws from the stream
//! `rng::derive_seed(s, c)`, so channels can be generated independently and in
//! any order.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fft;
use crate::physconst::SPEED_OF_LIGHT as C;
use crate::relativity::Boost;
use crate::rng::{derive_seed, GaussianStream};
use crate::{Complex, Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    White,
    GaussianCutoff,
}

/// Noise power spectrum and spatial correlation length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectrum {
    lambda0: f64,
    t_c: f64,
    r_c: f64,
    kind: NoiseKind,
}

impl NoiseSpectrum {
    pub fn white(lambda0: f64, r_c: f64) -> Result<Self> {
        Self::new(lambda0, 0.0, r_c)
    }

    pub fn gaussian_cutoff(lambda0: f64, t_c: f64, r_c: f64) -> Result<Self> {
        if !(t_c > 0.0) {
            return Err(Error::invalid("Gaussian-cutoff spectrum needs t_c > 0"));
        }
        Self::new(lambda0, t_c, r_c)
    }

    /// The kind follows from `t_c`: zero means white.
    pub fn new(lambda0: f64, t_c: f64, r_c: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::invalid("lambda0 must be positive and finite"));
        }
        if !(r_c > 0.0 && r_c.is_finite()) {
            return Err(Error::invalid("r_c must be positive and finite"));
        }
        if !(t_c >= 0.0 && t_c.is_finite()) {
            return Err(Error::invalid("t_c must be non-negative and finite"));
        }
        let kind = if t_c == 0.0 { NoiseKind::White } else { NoiseKind::GaussianCutoff };
        Ok(Self { lambda0, t_c, r_c, kind })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    pub fn r_c(&self) -> f64 {
        self.r_c
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// `λ(ω)`.
    pub fn power(&self, omega: f64) -> f64 {
        match self.kind {
            NoiseKind::White => self.lambda0,
            NoiseKind::GaussianCutoff => {
                let x = omega * self.t_c;
                self.lambda0 * (-x * x).exp()
            }
        }
    }

    /// The same spectrum with its correlation time stretched by `factor`,
    /// i.e. `λ(ω) → λ(factor·ω)`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::invalid("dilation factor must be positive"));
        }
        Self::new(self.lambda0, self.t_c * factor, self.r_c)
    }
}

/// Discretized noise increments, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    n_channels: usize,
    n_steps: usize,
    dt: f64,
    increments: Vec<f64>,
    seed: u64,
    kind: NoiseKind,
}

impl NoiseTrajectory {
    /// Wraps channel-major increments `ΔB`.
    pub fn from_increments(
        n_channels: usize,
        dt: f64,
        increments: Vec<f64>,
        seed: u64,
        kind: NoiseKind,
    ) -> Result<Self> {
        if n_channels == 0 || increments.is_empty() || !increments.len().is_multiple_of(n_channels) {
            return Err(Error::invalid("increments must split evenly into non-empty channels"));
        }
        let n_steps = increments.len() / n_channels;
        check_sizes(n_channels, n_steps, dt)?;
        Ok(Self { n_channels, n_steps, dt, increments, seed, kind })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// Increments `ΔB` of one channel, one per step.
    pub fn channel(&self, channel: usize) -> &[f64] {
        &self.increments[channel * self.n_steps..(channel + 1) * self.n_steps]
    }

    /// Noise rate samples `ξ = ΔB/dt` of one channel.
    pub fn rates(&self, channel: usize) -> Vec<f64> {
        self.channel(channel).iter().map(|x| x / self.dt).collect()
    }

    /// Increment of `channel` at `step`.
    pub fn increment(&self, channel: usize, step: usize) -> f64 {
        self.increments[channel * self.n_steps + step]
    }

    /// All increments, channel-major.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

fn check_sizes(n_channels: usize, n_steps: usize, dt: f64) -> Result<()> {
    if n_channels == 0 || n_steps == 0 {
        return Err(Error::invalid("need at least one channel and one step"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt must be positive and finite"));
    }
    Ok(())
}

/// Independent `N(0, dt)` Wiener increments per channel and step.
pub fn sample_white(n_channels: usize, n_steps: usize, dt: f64, seed: u64) -> Result<NoiseTrajectory> {
    check_sizes(n_channels, n_steps, dt)?;
    let sd = dt.sqrt();
    let mut increments = Vec::with_capacity(n_channels * n_steps);
    for ch in 0..n_channels {
        let mut g = GaussianStream::new(derive_seed(seed, ch as u64));
        increments.extend((0..n_steps).map(|_| sd * g.normal()));
    }
    Ok(NoiseTrajectory { n_channels, n_steps, dt, increments, seed, kind: NoiseKind::White })
}

/// Rest-frame temporal correlation `C(τ)` of a Gaussian-cutoff spectrum.
pub fn correlation_time(spectrum: &NoiseSpectrum, tau: f64) -> Result<f64> {
    if spectrum.kind == NoiseKind::White {
        return Err(Error::Unsupported(
            "white noise is delta-correlated, E[ξ(t)ξ(t')] = λ0·δ(t - t'); there is no pointwise C(τ)".into(),
        ));
    }
    let t_c = spectrum.t_c;
    Ok(spectrum.lambda0 / (2.0 * SQRT_PI * t_c) * (-tau * tau / (4.0 * t_c * t_c)).exp())
}

/// Frequency-domain Gaussian draws for spectral synthesis of one channel.
///
/// Keeping the draws separate from the spectral weights lets several spectra
/// be synthesized from the same randomness (see the frame comparison in
/// [`crate::scenarios`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDraw {
    n_steps: usize,
    z: Vec<Complex>,
}

impl SpectralDraw {
    /// Draws for a trajectory of `n_steps`, embedded in a circulant of the next
    /// power of two at least `2·n_steps`.
    pub fn new(n_steps: usize, seed: u64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("need at least one step"));
        }
        let len = (2 * n_steps).next_power_of_two();
        let mut g = GaussianStream::new(seed);
        let z = (0..len).map(|_| Complex::new(g.normal(), g.normal())).collect();
        Ok(Self { n_steps, z })
    }

    pub fn embedding_len(&self) -> usize {
        self.z.len()
    }

    /// Noise rate samples `ξ_n`, n < n_steps, with covariance
    /// `(1/(L dt)) Σ_k λ(ω_k) cos(ω_k n dt)`, the periodic Riemann sum of `C`.
    pub fn synthesize(&self, spectrum: &NoiseSpectrum, dt: f64) -> Result<Vec<f64>> {
        let len = self.z.len();
        let d_omega = core::f64::consts::TAU / (len as f64 * dt);
        let mut buf: Vec<Complex> = self
            .z
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let signed = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
                let s = spectrum.power(signed * d_omega) / dt;
                z * (s / len as f64).sqrt()
            })
            .collect();
        fft::fft(&mut buf)?;
        Ok(buf[..self.n_steps].iter().map(|y| y.re).collect())
    }
}

/// Stationary Gaussian colored noise by spectral synthesis.
///
/// Requires `dt < t_c/4` so the correlation time is resolved.
pub fn sample_colored(
    spectrum: &NoiseSpectrum,
    n_channels: usize,
    n_steps: usize,
    dt: f64,
    seed: u64,
) -> Result<NoiseTrajectory> {
    if spectrum.kind == NoiseKind::White {
        return Err(Error::Unsupported("colored sampling needs a Gaussian-cutoff spectrum".into()));
    }
    check_sizes(n_channels, n_steps, dt)?;
    if !(dt < spectrum.t_c / 4.0) {
        return Err(Error::Resolution { dt, t_c: spectrum.t_c });
    }
    synthesize_channels(spectrum, n_channels, n_steps, dt, seed)
}

/// [`sample_colored`] without the resolution requirement. With `t_c ≪ dt` the
/// sampled spectrum is flat across the Nyquist band and the increments become
/// white with variance `λ0·dt`.
pub fn sample_colored_unresolved(
    spectrum: &NoiseSpectrum,
    n_channels: usize,
    n_steps: usize,
    dt: f64,
    seed: u64,
) -> Result<NoiseTrajectory> {
    check_sizes(n_channels, n_steps, dt)?;
    synthesize_channels(spectrum, n_channels, n_steps, dt, seed)
}

fn synthesize_channels(
    spectrum: &NoiseSpectrum,
    n_channels: usize,
    n_steps: usize,
    dt: f64,
    seed: u64,
) -> Result<NoiseTrajectory> {
    let mut increments = Vec::with_capacity(n_channels * n_steps);
    for ch in 0..n_channels {
        let draw = SpectralDraw::new(n_steps, derive_seed(seed, ch as u64))?;
        increments.extend(draw.synthesize(spectrum, dt)?.into_iter().map(|xi| xi * dt));
    }
    Ok(NoiseTrajectory { n_channels, n_steps, dt, increments, seed, kind: spectrum.kind })
}

/// Separation between two noise points, as seen in a frame moving with
/// velocity `v` along the parallel axis relative to the noise rest frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostedCorrelationQuery {
    pub v: f64,
    pub delta_x_parallel: f64,
    pub delta_x_perp: [f64; 2],
    pub delta_t: f64,
}

/// The Fourier exponent
/// `i q⊥·Δx⊥ + iγ[(q + ωv/c²)Δx - (ω + qv)Δt]` for one `(q, ω)` mode.
pub fn boosted_phase(
    query: &BoostedCorrelationQuery,
    q_parallel: f64,
    q_perp: [f64; 2],
    omega: f64,
) -> Result<Complex> {
    let boost = Boost::new(query.v)?;
    let v = query.v;
    let perp = q_perp[0] * query.delta_x_perp[0] + q_perp[1] * query.delta_x_perp[1];
    let bracket =
        (q_parallel + omega * v / (C * C)) * query.delta_x_parallel - (omega + q_parallel * v) * query.delta_t;
    Ok(Complex::new(0.0, perp + boost.gamma() * bracket))
}

/// Space-time correlation of the noise rate in the boosted frame.
///
/// All four integrals are Gaussian. Collecting the exponent as
/// `q·X' - ω·T'` with `X' = γ(Δx - vΔt)` and `T' = γ(Δt - vΔx/c²)` shows the
/// result is the rest-frame correlation evaluated at the transformed
/// separation.
pub fn boosted_correlation(spectrum: &NoiseSpectrum, query: &BoostedCorrelationQuery) -> Result<f64> {
    let boost = Boost::new(query.v)?;
    let (g, v) = (boost.gamma(), query.v);
    let x_par = g * (query.delta_x_parallel - v * query.delta_t);
    let t = g * (query.delta_t - v * query.delta_x_parallel / (C * C));
    let temporal = correlation_time(spectrum, t)?;
    let r_c = spectrum.r_c;
    let dist2 = x_par * x_par + query.delta_x_perp[0].powi(2) + query.delta_x_perp[1].powi(2);
    let spatial = (-dist2 / (4.0 * r_c * r_c)).exp() / (8.0 * SQRT_PI.powi(3) * r_c.powi(3));
    Ok(temporal * spatial)
}

/// Sample autocovariance `(1/(N-lag)) Σ x_n x_{n+lag}` of a zero-mean series.
pub fn autocovariance(samples: &[f64], lag: usize) -> f64 {
    if lag >= samples.len() {
        return 0.0;
    }
    let n = samples.len() - lag;
    samples[..n].iter().zip(&samples[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Zero increments, for runs without noise.
pub fn silent(n_channels: usize, n_steps: usize, dt: f64) -> Result<NoiseTrajectory> {
    check_sizes(n_channels, n_steps, dt)?;
    Ok(NoiseTrajectory {
        n_channels,
        n_steps,
        dt,
        increments: vec![0.0; n_channels * n_steps],
        seed: 0,
        kind: NoiseKind::White,
    })
}

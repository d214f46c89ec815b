//! Conditional excitation amplitude of an atom at `a` by an outgoing spherical
//! wave from the origin, and its angular collimation around `â`.
//!
//! Up to overall constants the amplitude for detecting momentum `k k̂` is
//!
//! ```text
//! f(k̂) = ∫ d³R  R⁻¹ e^{ikR(1 - k̂·R̂)} V(R)
//! ```
//!
//! with the envelope `V(R) = exp(-|R - a|²/(2σ²))`. The approximate form
//! replaces `R̂` by `â` inside the phase.
//!
//! # Quadrature
//!
//! Spherical coordinates about `â`: Gauss-Legendre in `R` over
//! `[|a| - wσ, |a| + wσ]` and in `cos θ_R` over the cone that contains the
//! envelope to `w` widths, and the periodic trapezoidal rule in the azimuth
//! (spectrally accurate for periodic integrands). Point counts are raised to
//! resolve the phase variation over each coordinate, then every count is
//! doubled until the result changes by less than `10⁻³` relative. Values far
//! below the forward peak are compared on the absolute scale
//! `10⁻⁴ ∫ R⁻¹ V d³R`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::gauss_legendre_on;
use crate::{Complex, Error, Result};

const CONVERGENCE_REL: f64 = 1e-3;
const FLOOR_REL: f64 = 1e-4;
const MAX_REFINEMENTS: usize = 2;

/// Base point counts; each must be at least 32.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MottQuadrature {
    pub radial_points: usize,
    pub angular_points: usize,
    pub azimuth_points: usize,
    /// Half-width of the integration region in units of σ.
    pub support_widths: f64,
}

impl Default for MottQuadrature {
    fn default() -> Self {
        Self { radial_points: 48, angular_points: 48, azimuth_points: 48, support_widths: 6.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeForm {
    /// `R̂` kept inside the phase.
    Exact,
    /// `R̂ ≈ â` in the phase.
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MottConfig {
    k: f64,
    a: [f64; 3],
    sigma: f64,
    quadrature: MottQuadrature,
    a_norm: f64,
    frame: [[f64; 3]; 3],
}

impl MottConfig {
    pub fn new(k: f64, a: [f64; 3], sigma: f64, quadrature: MottQuadrature) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid("k must be positive and finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma must be positive and finite"));
        }
        let a_norm = norm(a);
        if !(a_norm > 3.0 * sigma) || !a_norm.is_finite() {
            return Err(Error::invalid("atom must sit more than 3 sigma from the origin"));
        }
        let q = quadrature;
        if q.radial_points < 32 || q.angular_points < 32 || q.azimuth_points < 32 {
            return Err(Error::invalid("quadrature needs at least 32 points per coordinate"));
        }
        if !(q.support_widths >= 3.0) {
            return Err(Error::invalid("support must cover at least 3 sigma"));
        }
        let e3 = [a[0] / a_norm, a[1] / a_norm, a[2] / a_norm];
        // Any unit vector orthogonal to â completes the frame.
        let helper = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = normalized(cross(helper, e3));
        let e2 = cross(e3, e1);
        Ok(Self { k, a, sigma, quadrature, a_norm, frame: [e1, e2, e3] })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn a(&self) -> [f64; 3] {
        self.a
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn quadrature(&self) -> MottQuadrature {
        self.quadrature
    }

    /// Unit vector along `a`.
    pub fn a_hat(&self) -> [f64; 3] {
        self.frame[2]
    }

    /// Unit vector at polar angle `acos(cos_theta)` from `â` and azimuth `phi`
    /// about it.
    pub fn direction(&self, cos_theta: f64, phi: f64) -> [f64; 3] {
        let s = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let [e1, e2, e3] = self.frame;
        let (sp, cp) = phi.sin_cos();
        core::array::from_fn(|i| s * cp * e1[i] + s * sp * e2[i] + cos_theta * e3[i])
    }

    /// The same geometry with a different wavenumber.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(k, self.a, self.sigma, self.quadrature)
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Model envelope `exp(-|R - a|²/(2σ²))`.
pub fn v0s_model(config: &MottConfig, r: [f64; 3]) -> f64 {
    let d = [r[0] - config.a[0], r[1] - config.a[1], r[2] - config.a[2]];
    (-dot3(d, d) / (2.0 * config.sigma * config.sigma)).exp()
}

/// `∫ R⁻¹ V d³R = (2πσ²)^{3/2} erf(|a|/(√2 σ)) / |a|`, the forward value of
/// the approximate amplitude and the scale for absolute comparisons.
pub fn forward_reference(config: &MottConfig) -> f64 {
    let s = config.sigma;
    let a = config.a_norm;
    (2.0 * core::f64::consts::PI * s * s).powf(1.5) * libm::erf(a / (core::f64::consts::SQRT_2 * s)) / a
}

struct Region {
    r_lo: f64,
    r_hi: f64,
    c_lo: f64,
}

fn region(config: &MottConfig) -> Region {
    let w = config.quadrature.support_widths * config.sigma;
    let a = config.a_norm;
    let c_lo = if w < a { (1.0 - (w / a).powi(2)).sqrt() } else { -1.0 };
    Region { r_lo: (a - w).max(0.0), r_hi: a + w, c_lo }
}

/// Point counts needed to resolve the phase over each coordinate.
fn resolved_counts(config: &MottConfig, cos_alpha: f64, form: AmplitudeForm) -> [usize; 3] {
    let q = config.quadrature;
    let reg = region(config);
    let alpha = cos_alpha.clamp(-1.0, 1.0).acos();
    let theta_max = reg.c_lo.clamp(-1.0, 1.0).acos();
    let k = config.k;
    let pi = core::f64::consts::PI;
    let (d_r, d_c, d_phi) = match form {
        AmplitudeForm::Exact => {
            let far = (alpha + theta_max).min(pi).cos();
            let near = (alpha - theta_max).max(0.0).cos();
            (
                k * (reg.r_hi - reg.r_lo) * (1.0 - far),
                k * reg.r_hi * (near - far),
                k * reg.r_hi * alpha.sin() * theta_max.sin(),
            )
        }
        AmplitudeForm::Approx => (k * (reg.r_hi - reg.r_lo) * (1.0 - cos_alpha), 0.0, 0.0),
    };
    [
        q.radial_points.max(d_r.ceil() as usize + 32),
        q.angular_points.max(d_c.ceil() as usize + 32),
        q.azimuth_points.max(d_phi.ceil() as usize + 32),
    ]
}

fn evaluate(config: &MottConfig, cos_alpha: f64, phi_k: f64, form: AmplitudeForm, n: [usize; 3]) -> Result<Complex> {
    let reg = region(config);
    let (rs, wr) = gauss_legendre_on(n[0], reg.r_lo, reg.r_hi)?;
    let (cs, wc) = gauss_legendre_on(n[1], reg.c_lo, 1.0)?;
    let n_phi = n[2];
    let tau = core::f64::consts::TAU;
    let cos_dphi: Vec<f64> = (0..n_phi).map(|j| (tau * j as f64 / n_phi as f64 - phi_k).cos()).collect();
    let sin_alpha = (1.0 - cos_alpha * cos_alpha).max(0.0).sqrt();
    let two_s2 = 2.0 * config.sigma * config.sigma;
    let a = config.a_norm;
    let k = config.k;
    let w_phi = tau / n_phi as f64;

    let mut total = Complex::new(0.0, 0.0);
    for (&r, &w1) in rs.iter().zip(&wr) {
        let mut shell = Complex::new(0.0, 0.0);
        for (&c, &w2) in cs.iter().zip(&wc) {
            let env = (-(r * r + a * a - 2.0 * r * a * c) / two_s2).exp();
            if env == 0.0 {
                continue;
            }
            let ring = match form {
                AmplitudeForm::Approx => Complex::from_polar(tau, k * r * (1.0 - cos_alpha)),
                AmplitudeForm::Exact => {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    let base = cos_alpha * c;
                    let mut acc = Complex::new(0.0, 0.0);
                    for &cd in &cos_dphi {
                        let d = sin_alpha * s * cd + base;
                        acc += Complex::from_polar(1.0, k * r * (1.0 - d));
                    }
                    acc * w_phi
                }
            };
            shell += ring * (w2 * env);
        }
        // R² from the volume element times R⁻¹.
        total += shell * (w1 * r);
    }
    Ok(total)
}

/// Amplitude with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeResult {
    pub value: Complex,
    /// Relative change over the last doubling, on the floored scale.
    pub refinement_change: f64,
    /// Point counts of the reported evaluation.
    pub points: [usize; 3],
}

/// `f(k̂)` in the requested form, converged by successive doubling.
pub fn amplitude(config: &MottConfig, k_hat: [f64; 3], form: AmplitudeForm) -> Result<AmplitudeResult> {
    let n = norm(k_hat);
    if !((n - 1.0).abs() < 1e-9) {
        return Err(Error::invalid("k_hat must be a unit vector"));
    }
    let [e1, e2, e3] = config.frame;
    let cos_alpha = dot3(k_hat, e3).clamp(-1.0, 1.0);
    let phi_k = dot3(k_hat, e2).atan2(dot3(k_hat, e1));
    let floor = FLOOR_REL * forward_reference(config);

    let mut counts = resolved_counts(config, cos_alpha, form);
    let mut prev = evaluate(config, cos_alpha, phi_k, form, counts)?;
    let mut change = f64::INFINITY;
    for _ in 0..=MAX_REFINEMENTS {
        counts = counts.map(|c| 2 * c);
        let next = evaluate(config, cos_alpha, phi_k, form, counts)?;
        change = (next - prev).norm() / next.norm().max(floor);
        if change < CONVERGENCE_REL {
            return Ok(AmplitudeResult { value: next, refinement_change: change, points: counts });
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "amplitude at cos(theta) = {cos_alpha} still changed by {change:e} at points {counts:?}"
    )))
}

/// Quadrature of the pre-approximation integrand.
pub fn amplitude_exact(config: &MottConfig, k_hat: [f64; 3]) -> Result<Complex> {
    Ok(amplitude(config, k_hat, AmplitudeForm::Exact)?.value)
}

/// Quadrature with `R̂` replaced by `â` in the phase.
pub fn amplitude_approx(config: &MottConfig, k_hat: [f64; 3]) -> Result<Complex> {
    Ok(amplitude(config, k_hat, AmplitudeForm::Approx)?.value)
}

/// Peak-normalized `|f|²` on a grid uniform in `cos θ = k̂·â`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularProfile {
    pub cos_theta: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Angle (rad) where the profile first drops to 1/2 going out from
    /// `cos θ = 1`, by linear interpolation in `cos θ`.
    pub half_width: Option<f64>,
    pub form: AmplitudeForm,
}

impl AngularProfile {
    /// Builds a profile from raw `|f|²` values on `cos_theta`.
    pub fn from_raw(cos_theta: Vec<f64>, raw: Vec<f64>, form: AmplitudeForm) -> Result<Self> {
        if cos_theta.len() != raw.len() || raw.is_empty() {
            return Err(Error::invalid("grid and intensities must be non-empty and equal length"));
        }
        let peak = raw.iter().copied().fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::invalid("profile has no positive intensity"));
        }
        let intensity: Vec<f64> = raw.iter().map(|x| x / peak).collect();
        let mut half_width = None;
        for i in (1..intensity.len()).rev() {
            let (hi, lo) = (intensity[i], intensity[i - 1]);
            if hi >= 0.5 && lo < 0.5 {
                let t = (hi - 0.5) / (hi - lo);
                let c = cos_theta[i] + t * (cos_theta[i - 1] - cos_theta[i]);
                half_width = Some(c.clamp(-1.0, 1.0).acos());
                break;
            }
        }
        Ok(Self { cos_theta, intensity, half_width, form })
    }

    pub fn peak_index(&self) -> usize {
        self.intensity.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)
    }
}

/// `n_angles` values uniform on `[cos_min, 1]`, ending exactly at 1.
pub fn profile_grid(n_angles: usize, cos_min: f64) -> Result<Vec<f64>> {
    if n_angles < 16 {
        return Err(Error::invalid("profile needs at least 16 angles"));
    }
    if !(-1.0..1.0).contains(&cos_min) {
        return Err(Error::invalid("cos_min must lie in [-1, 1)"));
    }
    let last = (n_angles - 1) as f64;
    Ok((0..n_angles)
        .map(|i| if i + 1 == n_angles { 1.0 } else { cos_min + (1.0 - cos_min) * i as f64 / last })
        .collect())
}

/// `|f|²` along the grid in the plane of `e1`, sequentially.
pub fn angular_profile(
    config: &MottConfig,
    n_angles: usize,
    cos_min: f64,
    form: AmplitudeForm,
) -> Result<AngularProfile> {
    let grid = profile_grid(n_angles, cos_min)?;
    let raw = grid
        .iter()
        .map(|&c| amplitude(config, config.direction(c, 0.0), form).map(|r| r.value.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    AngularProfile::from_raw(grid, raw, form)
}

//! Bulk heating through phonon emission.
//!
//! With a linear dispersion `ω = v_s|q|` and isotropy, the effective coupling
//! reduces to the radial integral
//!
//! ```text
//! λ_eff = (8/(3√π)) ∫₀^∞ w⁴ e^{-w²} λ(v_s w / r_c) dw
//! ```
//!
//! which equals `λ0` for white noise and `λ0 (1 + β²)^{-5/2}` for the
//! Gaussian cutoff, `β = v_s t_c / r_c`.

#[allow(unused_imports)]
use num_traits::Float;

use crate::noise::NoiseSpectrum;
use crate::physconst::PaperConstants;
use crate::quad::{integrate, Tolerance};
use crate::{Error, Result};

const PREFACTOR: f64 = 8.0 / (3.0 * 1.772_453_850_905_516);
const UPPER: f64 = 12.0;

/// Linear acoustic branch `ω = v_s |q|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononDispersion {
    v_s: f64,
}

impl PhononDispersion {
    pub fn linear(v_s: f64) -> Result<Self> {
        if !(v_s > 0.0 && v_s.is_finite()) {
            return Err(Error::invalid("speed of sound must be positive and finite"));
        }
        Ok(Self { v_s })
    }

    pub fn v_s(&self) -> f64 {
        self.v_s
    }

    pub fn omega(&self, q: f64) -> f64 {
        self.v_s * q.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingResult {
    /// Effective coupling from quadrature, s⁻¹.
    pub lambda_eff: f64,
    /// Closed form for the same spectrum, s⁻¹.
    pub closed_form: f64,
    /// `v_s t_c / r_c`.
    pub beta: f64,
    /// `lambda_eff` below the bulk-heating bound.
    pub passes_bulk_bound: bool,
    /// Relative error estimate of the quadrature.
    pub quadrature_error_estimate: f64,
    pub v_s: f64,
    pub r_c: f64,
}

/// `λ0 (1 + β²)^{-5/2}` (β = 0 for white noise).
pub fn lambda_eff_closed_form(spectrum: &NoiseSpectrum, dispersion: &PhononDispersion) -> f64 {
    let beta = beta(spectrum, dispersion);
    spectrum.lambda0() * (1.0 + beta * beta).powf(-2.5)
}

pub fn beta(spectrum: &NoiseSpectrum, dispersion: &PhononDispersion) -> f64 {
    dispersion.v_s * spectrum.t_c() / spectrum.r_c()
}

/// Effective heating coupling by adaptive quadrature, checked against the bulk
/// bound of `constants`.
pub fn lambda_eff(
    spectrum: &NoiseSpectrum,
    dispersion: &PhononDispersion,
    constants: &PaperConstants,
) -> Result<HeatingResult> {
    let beta = beta(spectrum, dispersion);
    let r_c = spectrum.r_c();
    // Peak of the integrand sits near √2/√(1+β²).
    let s = if beta > 1.0 { 1.0 / beta } else { 1.0 };
    let breaks = [0.5 * s, s, 2.0 * s, 4.0 * s, 8.0 * s, 16.0 * s];
    let q = integrate(
        |w| w.powi(4) * (-w * w).exp() * spectrum.power(dispersion.omega(w / r_c)),
        0.0,
        UPPER,
        &breaks,
        Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 500 },
    )?;
    let lambda_eff = PREFACTOR * q.value;
    let rel = q.rel_error();
    if !(rel < 1e-6) {
        return Err(Error::Quadrature(alloc::format!("relative error estimate {rel:e} above 1e-6")));
    }
    Ok(HeatingResult {
        lambda_eff,
        closed_form: lambda_eff_closed_form(spectrum, dispersion),
        beta,
        passes_bulk_bound: lambda_eff < constants.bulk_heating_bound,
        quadrature_error_estimate: rel,
        v_s: dispersion.v_s,
        r_c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub bulk_ok: bool,
    /// `v_s / r_c`, s⁻¹.
    pub cutoff_frequency: f64,
}

/// The bound is applied as a sharp threshold.
pub fn bound_check(result: &HeatingResult, constants: &PaperConstants) -> BoundCheck {
    BoundCheck { bulk_ok: result.lambda_eff < constants.bulk_heating_bound, cutoff_frequency: result.v_s / result.r_c }
}

/// Smallest `β` for which a Gaussian-cutoff spectrum of strength `lambda0`
/// meets `bound`: `β = √((λ0/bound)^{2/5} - 1)`, or 0 if white noise already
/// passes.
pub fn threshold_beta(lambda0: f64, bound: f64) -> Result<f64> {
    if !(lambda0 > 0.0 && bound > 0.0) {
        return Err(Error::invalid("lambda0 and bound must be positive"));
    }
    let r = (lambda0 / bound).powf(0.4);
    Ok(if r <= 1.0 { 0.0 } else { (r - 1.0).sqrt() })
}

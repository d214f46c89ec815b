//! Quoted physical constants and experimental bounds, stored once in SI units.
//!
//! Values are central estimates. Where the source quotes an order-of-magnitude
//! band the log-10 half-width is kept as metadata and never propagated.

/// Speed of light in vacuum, m/s (exact by definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// The full constant set. Construct with [`constants`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperConstants {
    /// CSL noise coupling strength needed for latent-image reduction, s⁻¹.
    pub lambda_csl_central: f64,
    /// Half-width of the log-10 band around `lambda_csl_central`.
    pub lambda_csl_log10_uncertainty: f64,
    /// Standard noise correlation length, m (10⁻⁵ cm).
    pub r_c_standard: f64,
    /// Residual noise strength reported by the cantilever experiment, s⁻¹.
    pub lambda_cantilever: f64,
    /// Upper edge of the allowed noise spectrum from germanium gamma searches, s⁻¹.
    pub gamma_ray_cutoff: f64,
    /// Bulk-heating bound on the effective coupling, s⁻¹.
    pub bulk_heating_bound: f64,
    /// Noise cutoff implied by the bulk-heating bound, s⁻¹.
    pub phonon_cutoff_estimate: f64,
    /// Speed of sound used in the cutoff estimate, m/s.
    pub v_sound_default: f64,
    /// Solar-system speed relative to the CMB rest frame, m/s.
    pub v_solar_cmb: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Angular frequency at which the cantilever noise was observed, s⁻¹.
    pub cantilever_frequency: f64,
}

const CONSTANTS: PaperConstants = PaperConstants {
    lambda_csl_central: 2.0e-9,
    lambda_csl_log10_uncertainty: 1.0,
    r_c_standard: 1.0e-7,
    // 10^-7.7, written out so the table stays const.
    lambda_cantilever: 1.995_262_314_968_878_6e-8,
    gamma_ray_cutoff: 2.0e19,
    bulk_heating_bound: 1.0e-11,
    phonon_cutoff_estimate: 0.4e11,
    v_sound_default: 4000.0,
    v_solar_cmb: 4.0e5,
    c: SPEED_OF_LIGHT,
    cantilever_frequency: 8174.0,
};

/// The immutable constant set.
pub fn constants() -> PaperConstants {
    CONSTANTS
}

impl PaperConstants {
    /// `v_sound_default / r_c_standard`, the phonon frequency at |q| = 1/r_c.
    pub fn derived_phonon_cutoff(&self) -> f64 {
        self.v_sound_default / self.r_c_standard
    }
}

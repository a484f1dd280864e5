//! Lossless Drude slab as a frequency-dependent beam splitter.
//!
//! The slab has permittivity `eps = 1 - 1/w^2` (with `w = omega/omega_p`),
//! `mu = 1`, and sits in vacuum. Lengths enter only through the dimensionless
//! scale `s = omega_p L / c`. With `a = w cos(theta)` the normalized normal
//! wavenumbers are `a` outside and `D = sqrt(a^2 - 1)` inside, so the
//! single-pass phase is `s D`.
//!
//! [`drude_slab_coeffs`] evaluates the closed form
//!
//! ```text
//! beta = cos(sD) - (i/2)(kappa + 1/kappa) sin(sD)
//! t    = exp(-i s a) / beta
//! r    = -(i/2)(1/kappa - kappa) sin(sD) / beta
//! ```
//!
//! with `kappa = D/a` (TE) or `D/(eps a)` (TM). [`oracle_slab_coeffs`]
//! reaches the same coefficients by multiplying interface and propagation
//! transfer matrices built from `eps` directly.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Half-width of the exclusion window around removable singularities.
pub const SINGULAR_WINDOW: f64 = 1e-6;
/// Offset used for the symmetric limit inside the window.
pub const SINGULAR_OFFSET: f64 = 1e-5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[default]
    Te,
    Tm,
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "te" => Ok(Polarization::Te),
            "tm" => Ok(Polarization::Tm),
            _ => Err(Error::param(format!("unknown polarization {s:?} (expected te or tm)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabParams {
    /// Plasma angular frequency (rad/s).
    pub omega_p: f64,
    /// Slab thickness (m).
    pub thickness: f64,
    /// Incidence angle (rad).
    pub theta: f64,
    #[serde(default)]
    pub polarization: Polarization,
}

impl Default for SlabParams {
    /// `omega_p = 1e14 rad/s`, `theta = pi/4`, TE, thickness chosen so the
    /// scale is exactly one (about 3 um).
    fn default() -> Self {
        Self::with_scale(1.0, FRAC_PI_4, Polarization::Te).expect("default slab is valid")
    }
}

impl SlabParams {
    pub fn new(omega_p: f64, thickness: f64, theta: f64, polarization: Polarization) -> Result<Self> {
        let params = Self {
            omega_p,
            thickness,
            theta,
            polarization,
        };
        params.validate()?;
        Ok(params)
    }

    /// Slab with `omega_p = 1e14 rad/s` and the thickness that yields `scale`.
    pub fn with_scale(scale: f64, theta: f64, polarization: Polarization) -> Result<Self> {
        let omega_p = 1e14;
        Self::new(omega_p, scale * SPEED_OF_LIGHT / omega_p, theta, polarization)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_p.is_finite() && self.omega_p > 0.0) {
            return Err(Error::param(format!("omega_p = {} must be > 0", self.omega_p)));
        }
        if !(self.thickness.is_finite() && self.thickness > 0.0) {
            return Err(Error::param(format!("thickness = {} must be > 0", self.thickness)));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0 && self.theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param(format!("theta = {} must lie in [0, pi/2)", self.theta)));
        }
        Ok(())
    }

    /// `omega_p L / c`.
    pub fn scale(&self) -> f64 {
        self.omega_p * self.thickness / SPEED_OF_LIGHT
    }

    /// Normalized frequency at which `D = 0` (grazing cutoff of the slab).
    pub fn cutoff(&self) -> f64 {
        1.0 / self.theta.cos()
    }

    /// True inside the window around a removable singularity of the closed
    /// form, where it is replaced by a symmetric limit.
    pub fn near_singularity(&self, omega_bar: f64) -> bool {
        let d_zero = (omega_bar * self.theta.cos() - 1.0).abs() < SINGULAR_WINDOW;
        let eps_zero = self.polarization == Polarization::Tm && (omega_bar - 1.0).abs() < SINGULAR_WINDOW;
        d_zero || eps_zero
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterCoeffs {
    pub t: Complex64,
    pub r: Complex64,
    pub omega_bar: f64,
    /// Set when the point fell inside a singular window and was evaluated as
    /// a symmetric limit.
    pub singular_limit: bool,
}

impl ScatterCoeffs {
    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn energy_defect(&self) -> f64 {
        (self.transmittance() + self.reflectance() - 1.0).abs()
    }
}

fn check_omega(omega_bar: f64) -> Result<()> {
    if omega_bar.is_finite() && omega_bar > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("normalized frequency {omega_bar} must be > 0")))
    }
}

fn symmetric_limit<F>(params: &SlabParams, omega_bar: f64, eval: F) -> ScatterCoeffs
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    let (t_lo, r_lo) = eval(omega_bar - SINGULAR_OFFSET);
    let (t_hi, r_hi) = eval(omega_bar + SINGULAR_OFFSET);
    debug_assert!(!params.near_singularity(omega_bar + SINGULAR_OFFSET));
    ScatterCoeffs {
        t: 0.5 * (t_lo + t_hi),
        r: 0.5 * (r_lo + r_hi),
        omega_bar,
        singular_limit: true,
    }
}

/// Closed form in terms of an explicit internal wavenumber `d`. Both
/// `d` and `-d` give the same result.
pub(crate) fn closed_form(params: &SlabParams, omega_bar: f64, d: Complex64) -> (Complex64, Complex64) {
    let a = omega_bar * params.theta.cos();
    let eps = 1.0 - 1.0 / (omega_bar * omega_bar);
    let kappa = match params.polarization {
        Polarization::Te => d / a,
        Polarization::Tm => d / (eps * a),
    };
    let phase = params.scale() * d;
    let half_i = Complex64::new(0.0, 0.5);
    let beta = phase.cos() - half_i * (kappa + kappa.inv()) * phase.sin();
    let t = Complex64::from_polar(1.0, -params.scale() * a) / beta;
    let r = -half_i * (kappa.inv() - kappa) * phase.sin() / beta;
    (t, r)
}

fn principal_d(params: &SlabParams, omega_bar: f64) -> Complex64 {
    let a = omega_bar * params.theta.cos();
    Complex64::new(a * a - 1.0, 0.0).sqrt()
}

/// Transmission and reflection amplitudes of the Drude slab at `omega_bar`.
pub fn drude_slab_coeffs(params: &SlabParams, omega_bar: f64) -> Result<ScatterCoeffs> {
    params.validate()?;
    check_omega(omega_bar)?;
    let eval = |w: f64| closed_form(params, w, principal_d(params, w));
    if params.near_singularity(omega_bar) {
        return Ok(symmetric_limit(params, omega_bar, eval));
    }
    let (t, r) = eval(omega_bar);
    Ok(ScatterCoeffs {
        t,
        r,
        omega_bar,
        singular_limit: false,
    })
}

type Mat2 = [[Complex64; 2]; 2];

fn matmul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[Complex64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Maps (forward, backward) amplitudes just right of an interface to those
/// just left of it; `ratio` is the admittance of the right medium over that
/// of the left one.
fn interface(ratio: Complex64) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    [
        [0.5 * (one + ratio), 0.5 * (one - ratio)],
        [0.5 * (one - ratio), 0.5 * (one + ratio)],
    ]
}

fn propagation(phase: Complex64) -> Mat2 {
    let i = Complex64::i();
    [
        [(-i * phase).exp(), Complex64::default()],
        [Complex64::default(), (i * phase).exp()],
    ]
}

fn oracle_eval(params: &SlabParams, omega_bar: f64) -> (Complex64, Complex64) {
    let s = params.scale();
    let (sin_t, cos_t) = params.theta.sin_cos();
    let eps = Complex64::new(1.0 - 1.0 / (omega_bar * omega_bar), 0.0);
    // normal wavenumbers in units of omega_p / c
    let kz_out = Complex64::new(omega_bar * cos_t, 0.0);
    let mut kz_in = (omega_bar * omega_bar * (eps - sin_t * sin_t)).sqrt();
    if kz_in.im < 0.0 {
        kz_in = -kz_in;
    }
    let (adm_out, adm_in) = match params.polarization {
        Polarization::Te => (kz_out, kz_in),
        Polarization::Tm => (kz_out, kz_in / eps),
    };
    let m = matmul(
        &matmul(&interface(adm_in / adm_out), &propagation(kz_in * s)),
        &interface(adm_out / adm_in),
    );
    let t = Complex64::from_polar(1.0, -s * kz_out.re) / m[0][0];
    let r = m[1][0] / m[0][0];
    (t, r)
}

/// Independent three-layer transfer-matrix evaluation of the same slab.
pub fn oracle_slab_coeffs(params: &SlabParams, omega_bar: f64) -> Result<ScatterCoeffs> {
    params.validate()?;
    check_omega(omega_bar)?;
    if params.near_singularity(omega_bar) {
        return Ok(symmetric_limit(params, omega_bar, |w| oracle_eval(params, w)));
    }
    let (t, r) = oracle_eval(params, omega_bar);
    Ok(ScatterCoeffs {
        t,
        r,
        omega_bar,
        singular_limit: false,
    })
}

/// The beam-splitter matrix `[[t, r], [-r*, t*]]`.
pub fn scattering_matrix(c: &ScatterCoeffs) -> [[Complex64; 2]; 2] {
    [[c.t, c.r], [-c.r.conj(), c.t.conj()]]
}

/// Largest entry of `|M† M - I|`.
pub fn unitarity_defect(m: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

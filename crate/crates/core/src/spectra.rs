//! Frequency distributions `|Gamma(omega)|^2` of the incident single photon.
//!
//! Frequencies are in whatever unit the caller uses consistently; the
//! filter module works in `omega / omega_p`. Every distribution is
//! renormalized so that `integral |Gamma|^2 = 1`.

use std::f64::consts::PI;
use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::{self, QuadConfig};
use crate::{Error, Result};

/// Gaussian support is `omega0 (1 +- 8 sigma)`, clipped at zero.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    pub omega0: f64,
    /// Width relative to `omega0`.
    pub sigma: f64,
    /// Timescale of the linear spectral phase. Never affects `|Gamma|^2`.
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_tau() -> f64 {
    1.0
}

/// Unnormalized Gaussian amplitude
/// `1/sqrt(sigma pi) exp(-i (w - w0)/(w0 tau)) exp(-(w - w0)^2 / (2 sigma^2 w0^2))`.
pub fn gaussian_gamma(omega: f64, params: &GaussianParams) -> Complex64 {
    let x = (omega - params.omega0) / params.omega0;
    let modulus = (params.sigma * PI).sqrt().recip() * (-0.5 * x * x / (params.sigma * params.sigma)).exp();
    Complex64::from_polar(modulus, -x / params.tau)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectralDistribution {
    Delta {
        omega0: f64,
    },
    Gaussian {
        params: GaussianParams,
        norm: f64,
    },
    /// Piecewise-linear density through `(omega, weight)` points.
    Tabulated {
        grid: Vec<(f64, f64)>,
        norm: f64,
    },
}

impl SpectralDistribution {
    pub fn delta(omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::param(format!("omega0 = {omega0} must be > 0")));
        }
        Ok(SpectralDistribution::Delta { omega0 })
    }

    pub fn gaussian(omega0: f64, sigma: f64, tau: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::param(format!("omega0 = {omega0} must be > 0")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(format!("sigma = {sigma} must be > 0")));
        }
        if !(tau.is_finite() && tau != 0.0) {
            return Err(Error::param(format!("tau = {tau} must be finite and nonzero")));
        }
        let params = GaussianParams { omega0, sigma, tau };
        let (lo, hi) = gaussian_support(&params);
        let norm = quad::integrate(
            |w| gaussian_gamma(w, &params).norm_sqr(),
            lo,
            hi,
            &QuadConfig {
                abs_tol: 1e-14,
                rel_tol: 1e-14,
                ..Default::default()
            },
        )?
        .value;
        Ok(SpectralDistribution::Gaussian { params, norm })
    }

    pub fn tabulated(mut grid: Vec<(f64, f64)>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::param("a tabulated spectrum needs at least two points"));
        }
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in grid.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::param(format!("duplicate frequency {} in spectrum", w[0].0)));
            }
        }
        for &(omega, weight) in &grid {
            if !(omega.is_finite() && omega > 0.0) {
                return Err(Error::param(format!("spectrum frequency {omega} must be > 0")));
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::param(format!("spectral weight {weight} must be >= 0")));
            }
        }
        let norm: f64 = grid
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        if norm <= 0.0 {
            return Err(Error::param("tabulated spectrum has zero total weight"));
        }
        Ok(SpectralDistribution::Tabulated { grid, norm })
    }

    /// Reads two-column CSV `(omega, |Gamma|^2)`. Lines starting with `#` and
    /// a non-numeric header row are skipped.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut grid = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Parse(format!(
                    "spectrum row {} has fewer than 2 columns",
                    line + 1
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(omega), Ok(weight)) => grid.push((omega, weight)),
                _ if line == 0 && grid.is_empty() => continue,
                _ => return Err(Error::Parse(format!("spectrum row {} is not numeric", line + 1))),
            }
        }
        Self::tabulated(grid)
    }

    /// Interval outside which the density vanishes (or is below 1e-14).
    pub fn support(&self) -> (f64, f64) {
        match self {
            SpectralDistribution::Delta { omega0 } => (*omega0, *omega0),
            SpectralDistribution::Gaussian { params, .. } => gaussian_support(params),
            SpectralDistribution::Tabulated { grid, .. } => (grid[0].0, grid[grid.len() - 1].0),
        }
    }

    /// Normalized density `|Gamma(omega)|^2`; zero for the delta variant
    /// away from its atom.
    pub fn density(&self, omega: f64) -> f64 {
        match self {
            SpectralDistribution::Delta { .. } => 0.0,
            SpectralDistribution::Gaussian { params, norm } => {
                let (lo, hi) = gaussian_support(params);
                if omega < lo || omega > hi {
                    0.0
                } else {
                    gaussian_gamma(omega, params).norm_sqr() / norm
                }
            }
            SpectralDistribution::Tabulated { grid, norm } => interpolate(grid, omega) / norm,
        }
    }

    /// Center frequency (the atom, the Gaussian mean, or the tabulated
    /// weighted mean).
    pub fn center(&self) -> Result<f64> {
        match self {
            SpectralDistribution::Delta { omega0 } => Ok(*omega0),
            SpectralDistribution::Gaussian { params, .. } => Ok(params.omega0),
            SpectralDistribution::Tabulated { .. } => weight_integral(self, |w| w),
        }
    }
}

fn gaussian_support(params: &GaussianParams) -> (f64, f64) {
    let half = GAUSSIAN_SUPPORT_SIGMAS * params.sigma;
    ((params.omega0 * (1.0 - half)).max(0.0), params.omega0 * (1.0 + half))
}

fn interpolate(grid: &[(f64, f64)], omega: f64) -> f64 {
    let idx = grid.partition_point(|p| p.0 <= omega);
    if idx == 0 || idx == grid.len() && omega > grid[grid.len() - 1].0 {
        return 0.0;
    }
    if idx == grid.len() {
        return grid[grid.len() - 1].1;
    }
    let (x0, y0) = grid[idx - 1];
    let (x1, y1) = grid[idx];
    y0 + (y1 - y0) * (omega - x0) / (x1 - x0)
}

/// `integral |Gamma(omega)|^2 f(omega) d omega` to an absolute tolerance of
/// 1e-10. The delta variant returns `f(omega0)` exactly.
pub fn weight_integral<F: Fn(f64) -> f64>(dist: &SpectralDistribution, f: F) -> Result<f64> {
    let cfg = QuadConfig::default();
    match dist {
        SpectralDistribution::Delta { omega0 } => {
            let v = f(*omega0);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numeric(format!("integrand is not finite at omega0 = {omega0}")))
            }
        }
        SpectralDistribution::Gaussian { params, norm } => {
            let (lo, hi) = gaussian_support(params);
            let r = quad::integrate(|w| gaussian_gamma(w, params).norm_sqr() * f(w), lo, hi, &cfg)?;
            Ok(r.value / norm)
        }
        SpectralDistribution::Tabulated { grid, norm } => {
            // integrate segment by segment so the kinks of the interpolant sit
            // on interval boundaries
            let mut total = 0.0;
            for w in grid.windows(2) {
                let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                let seg_cfg = QuadConfig {
                    abs_tol: cfg.abs_tol / grid.len() as f64,
                    ..cfg
                };
                let r = quad::integrate(|x| (y0 + (y1 - y0) * (x - x0) / (x1 - x0)) * f(x), x0, x1, &seg_cfg)?;
                total += r.value;
            }
            Ok(total / norm)
        }
    }
}

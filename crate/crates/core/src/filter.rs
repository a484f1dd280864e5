//! Closed-form enhancement of transmitted and reflected single photons by
//! the partially postselected filter `F = |0><0| + p|1><1|` on the
//! complementary channel.
//!
//! All expressions are evaluated from intensities `|t|^2` and `|r|^2`, so
//! phase conventions never enter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::check_range;
use crate::scatter::{drude_slab_coeffs, SlabParams};
use crate::spectra::{weight_integral, SpectralDistribution};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSetting {
    p: f64,
}

impl FilterSetting {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p.abs() <= 1.0) {
            return Err(Error::param(format!("postselection parameter |p| = {p} must be <= 1")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_sqr(&self) -> f64 {
        self.p * self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnhancementResult {
    /// Mean photon number of the signal channel after postselection.
    pub mean_photons: f64,
    /// Probability that the filter lets the state pass.
    pub passing_probability: f64,
    /// Ratio of the filtered to the unfiltered mean photon number.
    pub amplification: f64,
}

/// Intensity response of a two-channel scatterer, as a function of the
/// normalized frequency. Implementations return NaN outside their domain,
/// which spectral integration reports as a numeric error.
pub trait ReflectivityModel: Sync {
    fn reflectance(&self, omega_bar: f64) -> f64;

    fn transmittance(&self, omega_bar: f64) -> f64 {
        1.0 - self.reflectance(omega_bar)
    }
}

impl ReflectivityModel for SlabParams {
    fn reflectance(&self, omega_bar: f64) -> f64 {
        drude_slab_coeffs(self, omega_bar).map_or(f64::NAN, |c| c.reflectance())
    }

    fn transmittance(&self, omega_bar: f64) -> f64 {
        drude_slab_coeffs(self, omega_bar).map_or(f64::NAN, |c| c.transmittance())
    }
}

/// Frequency-independent reflectance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantReflectivity(f64);

impl ConstantReflectivity {
    pub fn new(reflectance: f64) -> Result<Self> {
        check_range("reflectance", reflectance, 0.0, 1.0).map(Self)
    }
}

impl ReflectivityModel for ConstantReflectivity {
    fn reflectance(&self, _omega_bar: f64) -> f64 {
        self.0
    }
}

/// Linearly interpolated reflectance table; constant beyond its ends.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedReflectivity {
    grid: Vec<(f64, f64)>,
}

impl TabulatedReflectivity {
    pub fn new(mut grid: Vec<(f64, f64)>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::param("reflectivity table is empty"));
        }
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(w, r) in &grid {
            if !w.is_finite() {
                return Err(Error::param(format!("reflectivity table frequency {w} is not finite")));
            }
            check_range("tabulated reflectance", r, 0.0, 1.0)?;
        }
        Ok(Self { grid })
    }

    /// Two-column CSV `(omega_bar, R)`; `#` comments and a header row allowed.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut grid = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed = (
                record.get(0).and_then(|s| s.parse::<f64>().ok()),
                record.get(1).and_then(|s| s.parse::<f64>().ok()),
            );
            match parsed {
                (Some(w), Some(r)) => grid.push((w, r)),
                _ if line == 0 => continue,
                _ => return Err(Error::Parse(format!("reflectivity row {} is not numeric", line + 1))),
            }
        }
        Self::new(grid)
    }
}

impl ReflectivityModel for TabulatedReflectivity {
    fn reflectance(&self, omega_bar: f64) -> f64 {
        let g = &self.grid;
        let idx = g.partition_point(|p| p.0 <= omega_bar);
        if idx == 0 {
            return g[0].1;
        }
        if idx == g.len() {
            return g[g.len() - 1].1;
        }
        let (x0, y0) = g[idx - 1];
        let (x1, y1) = g[idx];
        y0 + (y1 - y0) * (omega_bar - x0) / (x1 - x0)
    }
}

/// Spectrally averaged transmitted photon number with the filter on the
/// reflected channel. The spectrum is normalized and the scatterer lossless,
/// so `R_bar = 1 - T_bar` and the result is written in the same form as the
/// monochromatic one; `p = 1` returns `T_bar` exactly.
pub fn transmitted_mean_photons<M: ReflectivityModel + ?Sized>(
    dist: &SpectralDistribution,
    model: &M,
    p: f64,
) -> Result<EnhancementResult> {
    let p2 = FilterSetting::new(p)?.p_sqr();
    let t_bar = weight_integral(dist, |w| model.transmittance(w))?;
    let passing = p2 + (1.0 - p2) * t_bar;
    if passing <= 0.0 {
        return Err(Error::Degenerate(format!(
            "filter never passes: transmission {t_bar}, p = {p}"
        )));
    }
    Ok(EnhancementResult {
        mean_photons: t_bar / passing,
        passing_probability: passing,
        amplification: 1.0 / passing,
    })
}

/// `T / (T + p^2 (1 - T))` for monochromatic input, written so that the
/// `p = 0` and `p = 1` limits are exact.
pub fn transmitted_mean_delta(transmittance: f64, p: f64) -> Result<f64> {
    check_range("T", transmittance, 0.0, 1.0)?;
    let p2 = FilterSetting::new(p)?.p_sqr();
    let den = p2 + (1.0 - p2) * transmittance;
    if den <= 0.0 {
        return Err(Error::Degenerate("T = 0 with p = 0 leaves nothing to detect".into()));
    }
    Ok(transmittance / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoteReport {
    /// Exact amplification `1 / (T + p^2 (1 - T))`.
    pub amplification: f64,
    /// Small-transmission limit `1 / p^2`.
    pub asymptote: f64,
    /// `|amplification - asymptote| / asymptote`.
    pub relative_gap: f64,
}

pub fn amplification_asymptote(transmittance: f64, p: f64) -> Result<AsymptoteReport> {
    check_range("T", transmittance, 0.0, 1.0)?;
    let p2 = FilterSetting::new(p)?.p_sqr();
    let amplification = 1.0 / (p2 + (1.0 - p2) * transmittance);
    let asymptote = 1.0 / p2;
    let relative_gap = if asymptote.is_finite() {
        (amplification - asymptote).abs() / asymptote
    } else {
        f64::INFINITY
    };
    Ok(AsymptoteReport {
        amplification,
        asymptote,
        relative_gap,
    })
}

/// Reflected photon number with the filter on the absorbed channel:
/// `W / (p^2 + (1 - p^2) W)` with `W = integral |Gamma r|^2`.
pub fn reflected_mean_photons<M: ReflectivityModel + ?Sized>(
    dist: &SpectralDistribution,
    model: &M,
    p: f64,
) -> Result<EnhancementResult> {
    let p2 = FilterSetting::new(p)?.p_sqr();
    let w = weight_integral(dist, |x| model.reflectance(x))?;
    let passing = p2 + (1.0 - p2) * w;
    if passing <= 0.0 {
        return Err(Error::Degenerate(format!("no reflection (W = {w}) with p = 0")));
    }
    Ok(EnhancementResult {
        mean_photons: w / passing,
        passing_probability: passing,
        amplification: 1.0 / passing,
    })
}

/// Success probability of the realistic single-herald catalysis,
/// `eta [p^2 T + (1 - T)(4 p^4 eta - 4 p^2 eta + 1)]`.
pub fn catalysis_success_probability(transmittance: f64, p: f64, eta: f64) -> f64 {
    let p2 = p * p;
    eta * (p2 * transmittance + (1.0 - transmittance) * (4.0 * p2 * p2 * eta - 4.0 * p2 * eta + 1.0))
}

/// Channel-3 photon number of the zero-herald catalysis.
pub fn catalysis_zero_herald_mean(transmittance: f64, p: f64) -> f64 {
    transmittance / (transmittance + p * p * (1.0 - transmittance))
}

/// Channel-3 photon number of the ideal single-herald catalysis.
pub fn catalysis_single_herald_mean(transmittance: f64, p: f64) -> f64 {
    let p2 = p * p;
    let interference = 2.0 * p2 - 1.0;
    transmittance * p2 / (p2 * transmittance + (1.0 - transmittance) * interference * interference)
}

/// Channel-3 photon number with a detector of efficiency `eta`.
pub fn catalysis_realistic_mean(transmittance: f64, p: f64, eta: f64) -> f64 {
    let p2 = p * p;
    transmittance * p2 / (p2 * transmittance + (1.0 - transmittance) * (4.0 * p2 * p2 * eta - 4.0 * p2 * eta + 1.0))
}

/// Amplification of the realistic catalysis relative to the bare
/// transmittance.
pub fn catalysis_realistic_amplification(transmittance: f64, p: f64, eta: f64) -> f64 {
    let p2 = p * p;
    p2 / (p2 * transmittance + (1.0 - transmittance) * (4.0 * p2 * p2 * eta - 4.0 * p2 * eta + 1.0))
}

/// One row of a frequency/parameter sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega_bar: f64,
    pub p: f64,
    pub mean_photons: f64,
    #[serde(rename = "K")]
    pub amplification: f64,
    pub passing_probability: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Transmitted,
    Reflected,
}

/// Spectrum centered at a given frequency, used to build sweeps.
pub trait SpectrumFamily: Sync {
    fn at(&self, omega0: f64) -> Result<SpectralDistribution>;
}

#[derive(Clone, Copy, Debug)]
pub struct DeltaFamily;

impl SpectrumFamily for DeltaFamily {
    fn at(&self, omega0: f64) -> Result<SpectralDistribution> {
        SpectralDistribution::delta(omega0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GaussianFamily {
    pub sigma: f64,
    pub tau: f64,
}

impl SpectrumFamily for GaussianFamily {
    fn at(&self, omega0: f64) -> Result<SpectralDistribution> {
        SpectralDistribution::gaussian(omega0, self.sigma, self.tau)
    }
}

/// Evaluates the enhancement on every `(omega0, p)` pair. Rows are ordered
/// by frequency, then by `p` as given.
pub fn sweep<F, M>(channel: Channel, family: &F, model: &M, omegas: &[f64], ps: &[f64]) -> Result<Vec<SweepRow>>
where
    F: SpectrumFamily + ?Sized,
    M: ReflectivityModel + ?Sized,
{
    let rows: Vec<Vec<SweepRow>> = omegas
        .par_iter()
        .map(|&w| {
            let dist = family.at(w)?;
            ps.iter()
                .map(|&p| {
                    let res = match channel {
                        Channel::Transmitted => transmitted_mean_photons(&dist, model, p)?,
                        Channel::Reflected => reflected_mean_photons(&dist, model, p)?,
                    };
                    Ok(SweepRow {
                        omega_bar: w,
                        p,
                        mean_photons: res.mean_photons,
                        amplification: res.amplification,
                        passing_probability: res.passing_probability,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_limits_are_exact() {
        for t in [0.1, 0.25, 0.5, 0.9, 1.0] {
            assert_eq!(transmitted_mean_delta(t, 1.0).unwrap(), t);
            assert_eq!(transmitted_mean_delta(t, 0.0).unwrap(), 1.0);
        }
        assert_eq!(transmitted_mean_delta(0.5, 0.5).unwrap(), 0.8);
        assert!(matches!(transmitted_mean_delta(0.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn asymptote_examples() {
        let r = amplification_asymptote(1e-4, 0.1).unwrap();
        assert!((r.amplification - 1.0 / (0.01 + 0.99e-4)).abs() < 1e-10);
        assert!(r.relative_gap < 0.02);
        assert_eq!(amplification_asymptote(0.5, 1.0).unwrap().amplification, 1.0);
        let mut last = 0.0;
        for t in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
            let k = amplification_asymptote(t, 0.3).unwrap().amplification;
            assert!(k > last && k < 1.0 / 0.09);
            last = k;
        }
    }

    #[test]
    fn delta_spectrum_reduces_to_closed_form() {
        let slab = SlabParams::default();
        let w0 = 1.1;
        let t = drude_slab_coeffs(&slab, w0).unwrap().transmittance();
        let dist = SpectralDistribution::delta(w0).unwrap();
        for p in [0.0, 0.3, 0.7, 1.0] {
            let res = transmitted_mean_photons(&dist, &slab, p).unwrap();
            let expected = transmitted_mean_delta(t, p).unwrap();
            assert!((res.mean_photons - expected).abs() < 1e-12);
        }
        let unfiltered = transmitted_mean_photons(&dist, &slab, 1.0).unwrap();
        assert!((unfiltered.mean_photons - t).abs() < 1e-12);
        assert!((unfiltered.amplification - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_examples() {
        let dist = SpectralDistribution::delta(1.0).unwrap();
        let mirror = ConstantReflectivity::new(1.0).unwrap();
        for p in [0.0, 0.4, 1.0] {
            let res = reflected_mean_photons(&dist, &mirror, p).unwrap();
            assert_eq!((res.mean_photons, res.amplification), (1.0, 1.0));
        }
        let absorber = ConstantReflectivity::new(0.04).unwrap();
        let res = reflected_mean_photons(&dist, &absorber, 0.5).unwrap();
        assert!((res.mean_photons - 0.04 / 0.28).abs() < 1e-15);
        let black = ConstantReflectivity::new(0.0).unwrap();
        assert!(matches!(
            reflected_mean_photons(&dist, &black, 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn channel_mapping_swaps_roles() {
        // reflection with W plays the role of transmission with T = W
        let dist = SpectralDistribution::delta(1.0).unwrap();
        for x in [0.01, 0.2, 0.6] {
            for p in [0.1, 0.5, 0.9] {
                let refl = reflected_mean_photons(&dist, &ConstantReflectivity::new(x).unwrap(), p)
                    .unwrap()
                    .mean_photons;
                let trans = transmitted_mean_delta(x, p).unwrap();
                assert!((refl - trans).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tabulated_reflectivity_interpolates() {
        let m = TabulatedReflectivity::from_csv("w,R\n1,0.2\n2,0.4\n".as_bytes()).unwrap();
        assert!((m.reflectance(1.5) - 0.3).abs() < 1e-15);
        assert_eq!(m.reflectance(0.5), 0.2);
        assert_eq!(m.reflectance(9.0), 0.4);
        assert!(TabulatedReflectivity::new(vec![(1.0, 1.5)]).is_err());
    }

    #[test]
    fn catalysis_closed_forms_agree_at_unit_efficiency() {
        for &(t, p) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.8)] {
            assert!((catalysis_single_herald_mean(t, p) - catalysis_realistic_mean(t, p, 1.0)).abs() < 1e-15);
        }
        let k = catalysis_realistic_amplification(0.01, 0.9, 1.0);
        assert!((k - 0.81 / (0.0081 + 0.99 * 0.3844)).abs() < 1e-12);
        assert!((k - 2.084).abs() < 1e-3);
    }

    #[test]
    fn gaussian_ordering_in_p() {
        let slab = SlabParams::default();
        let family = GaussianFamily {
            sigma: 1.0 / 40.0,
            tau: 1.0,
        };
        let omegas = [0.3, 0.8, 1.2, 1.6, 2.5];
        let rows = sweep(Channel::Transmitted, &family, &slab, &omegas, &[0.1, 0.5, 1.0]).unwrap();
        for chunk in rows.chunks(3) {
            assert!(chunk[0].mean_photons >= chunk[1].mean_photons);
            assert!(chunk[1].mean_photons >= chunk[2].mean_photons);
            assert!((chunk[2].amplification - 1.0).abs() < 1e-9);
        }
    }
}

//! Heralding-on-zero-photons coincidence counting.
//!
//! Each trial records two detector outcomes: `D2` clicks with probability
//! `p^2` (the filter) and `D3` with probability `R` (the target). The
//! estimator `M = (n11 + n01) / (N - n00) + delta` recovers the enhanced
//! mean photon number `R / (p^2 + (1 - p^2) R)`.
//!
//! Random numbers come from per-sample substreams, with counts and noise on
//! separate purposes. Runs that differ only in `p` or `sigma` therefore share
//! their noise draws, which makes comparisons between them much less noisy.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::check_range;
use crate::filter::ReflectivityModel;
use crate::rng::{Purpose, SeedSequence};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl CountTable {
    /// Number of trials `N`.
    pub fn total(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    fn record(&mut self, d2: bool, d3: bool) {
        match (d2, d3) {
            (true, true) => self.n11 += 1,
            (true, false) => self.n10 += 1,
            (false, true) => self.n01 += 1,
            (false, false) => self.n00 += 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::param(format!("noise sigma = {sigma} must be finite and >= 0")));
        }
        Ok(Self { sigma })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// One draw of `delta ~ Normal(0, sigma^2)`. A standard normal is always
    /// consumed so streams stay aligned across different `sigma`.
    pub fn draw<G: Rng + ?Sized>(&self, rng: &mut G) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.sigma * z
    }
}

fn default_trials() -> u64 {
    1000
}

fn default_samples() -> u64 {
    2000
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Intensity reflectivity `R = |r|^2`.
    pub reflectance: f64,
    pub p: f64,
    /// Trials per measurement (`N`).
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Number of noisy measurements to average.
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Draw one count table and reuse it for every sample, so only the noise
    /// varies between samples.
    #[serde(default)]
    pub freeze_counts: bool,
}

impl RunConfig {
    pub fn new(reflectance: f64, p: f64, trials: u64, samples: u64, seed: u64) -> Self {
        Self {
            reflectance,
            p,
            trials,
            samples,
            seed,
            freeze_counts: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("R", self.reflectance, 0.0, 1.0)?;
        check_range("p", self.p, 0.0, 1.0)?;
        if self.trials == 0 {
            return Err(Error::param("trials N must be >= 1"));
        }
        if self.samples == 0 {
            return Err(Error::param("samples must be >= 1"));
        }
        Ok(())
    }
}

/// Runs `trials` independent trials and tallies the coincidence table.
pub fn simulate_counts<G: Rng + ?Sized>(reflectance: f64, p: f64, trials: u64, rng: &mut G) -> Result<CountTable> {
    check_range("R", reflectance, 0.0, 1.0)?;
    let p2 = check_range("p", p, 0.0, 1.0)?.powi(2);
    if trials == 0 {
        return Err(Error::param("trials N must be >= 1"));
    }
    let mut counts = CountTable::default();
    for _ in 0..trials {
        let d2 = rng.random_bool(p2);
        let d3 = rng.random_bool(reflectance);
        counts.record(d2, d3);
    }
    Ok(counts)
}

/// Expected value of the estimator, `R / (p^2 + (1 - p^2) R)`.
pub fn closed_form_m(reflectance: f64, p: f64) -> Result<f64> {
    check_range("R", reflectance, 0.0, 1.0)?;
    let p2 = check_range("p", p, 0.0, 1.0)?.powi(2);
    let den = p2 + (1.0 - p2) * reflectance;
    if den <= 0.0 {
        return Err(Error::param("M is undefined for R = 0 and p = 0"));
    }
    Ok(reflectance / den)
}

pub fn estimator_m(counts: &CountTable, delta: f64) -> Result<f64> {
    let den = counts.total() - counts.n00;
    if den == 0 {
        return Err(Error::Estimation(format!("all {} trials gave (0, 0)", counts.total())));
    }
    Ok((counts.n11 + counts.n01) as f64 / den as f64 + delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McSummary {
    pub mean: f64,
    /// Sample standard deviation (Bessel-corrected) of the valid estimates.
    pub stddev: f64,
    /// Samples with an empty estimator denominator, excluded from the stats.
    pub failures: u64,
    /// Mean squared deviation of the valid estimates from the closed form.
    pub mse: f64,
}

/// Noisy estimates for samples `0..n`; `None` marks a failed sample.
fn estimates(seq: &SeedSequence, cfg: &RunConfig, noise: &NoiseModel, n: u64) -> Vec<Option<f64>> {
    let frozen = cfg.freeze_counts.then(|| {
        let mut rng = seq.stream(Purpose::Counts, 0);
        simulate_counts(cfg.reflectance, cfg.p, cfg.trials, &mut rng).expect("validated config")
    });
    (0..n)
        .into_par_iter()
        .map(|i| {
            let counts = match frozen {
                Some(c) => c,
                None => {
                    let mut rng = seq.stream(Purpose::Counts, i);
                    simulate_counts(cfg.reflectance, cfg.p, cfg.trials, &mut rng).expect("validated config")
                }
            };
            let delta = noise.draw(&mut seq.stream(Purpose::Noise, i));
            estimator_m(&counts, delta).ok()
        })
        .collect()
}

fn summarize(values: &[Option<f64>], target: f64) -> Result<McSummary> {
    let valid: Vec<f64> = values.iter().flatten().copied().collect();
    let failures = (values.len() - valid.len()) as u64;
    if valid.is_empty() {
        return Err(Error::Estimation(format!("all {} samples failed", values.len())));
    }
    let n = valid.len() as f64;
    let mean = valid.iter().sum::<f64>() / n;
    let stddev = if valid.len() > 1 {
        (valid.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mse = valid.iter().map(|m| (m - target).powi(2)).sum::<f64>() / n;
    Ok(McSummary {
        mean,
        stddev,
        failures,
        mse,
    })
}

fn target_or_nan(cfg: &RunConfig) -> f64 {
    closed_form_m(cfg.reflectance, cfg.p).unwrap_or(f64::NAN)
}

pub(crate) fn mc_average_with(seq: &SeedSequence, cfg: &RunConfig, noise: &NoiseModel) -> Result<McSummary> {
    cfg.validate()?;
    summarize(&estimates(seq, cfg, noise, cfg.samples), target_or_nan(cfg))
}

/// Averages `cfg.samples` noisy estimates of `M`.
pub fn mc_average(cfg: &RunConfig, noise: &NoiseModel) -> Result<McSummary> {
    mc_average_with(&SeedSequence::new(cfg.seed), cfg, noise)
}

/// Mean squared error of `n_step` independent measurements against the
/// closed form. `cfg.samples` is ignored.
pub fn mse(cfg: &RunConfig, noise: &NoiseModel, n_step: u64) -> Result<f64> {
    let cfg = RunConfig {
        samples: n_step.max(1),
        ..*cfg
    };
    cfg.validate()?;
    if n_step == 0 {
        return Err(Error::param("n_step must be >= 1"));
    }
    let target = closed_form_m(cfg.reflectance, cfg.p)?;
    let values = estimates(&SeedSequence::new(cfg.seed), &cfg, noise, n_step);
    Ok(summarize(&values, target)?.mse)
}

/// One frequency/parameter point of a Monte Carlo sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McRow {
    pub omega_bar: f64,
    pub reflectance: f64,
    pub p: f64,
    pub closed_form: f64,
    pub mean: f64,
    pub stddev: f64,
    pub failures: u64,
    pub mse: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub trials: u64,
    pub samples: u64,
    pub seed: u64,
    pub freeze_counts: bool,
}

/// Monte Carlo estimate of `M` across frequencies for a reflectivity model.
/// All `p` values at one frequency share the same seed child, so noise draws
/// are common across `p`.
pub fn frequency_sweep<M: ReflectivityModel + ?Sized>(
    model: &M,
    omegas: &[f64],
    ps: &[f64],
    settings: &SweepSettings,
    noise: &NoiseModel,
) -> Result<Vec<McRow>> {
    let root = SeedSequence::new(settings.seed);
    let rows: Vec<Vec<McRow>> = omegas
        .par_iter()
        .enumerate()
        .map(|(k, &w)| {
            let reflectance = model.reflectance(w);
            if !(0.0..=1.0).contains(&reflectance) {
                return Err(Error::Numeric(format!("reflectance {reflectance} at omega_bar = {w}")));
            }
            let seq = root.child(k as u64);
            ps.iter()
                .map(|&p| {
                    let cfg = RunConfig {
                        reflectance,
                        p,
                        trials: settings.trials,
                        samples: settings.samples,
                        seed: settings.seed,
                        freeze_counts: settings.freeze_counts,
                    };
                    let s = mc_average_with(&seq, &cfg, noise)?;
                    Ok(McRow {
                        omega_bar: w,
                        reflectance,
                        p,
                        closed_form: closed_form_m(reflectance, p)?,
                        mean: s.mean,
                        stddev: s.stddev,
                        failures: s.failures,
                        mse: s.mse,
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

    fn rng(task: u64) -> crate::rng::StreamRng {
        SeedSequence::new(2024).stream(Purpose::Counts, task)
    }

    #[test]
    fn count_examples() {
        let c = simulate_counts(0.0, 0.7, 500, &mut rng(0)).unwrap();
        assert_eq!((c.n11, c.n01, c.total()), (0, 0, 500));
        let c = simulate_counts(1.0, 1.0, 500, &mut rng(1)).unwrap();
        assert_eq!(c.n11, 500);
        let c = simulate_counts(0.04, 0.5, 1000, &mut rng(2)).unwrap();
        assert_eq!(c.total(), 1000);
        let m = estimator_m(&c, 0.0).unwrap();
        // binomial standard error of the conditional fraction
        let den = (c.total() - c.n00) as f64;
        let se = (1.0 / 7.0 * 6.0 / 7.0 / den).sqrt();
        assert!((m - 1.0 / 7.0).abs() < 4.0 * se, "m = {m}");
        assert!(simulate_counts(1.2, 0.5, 10, &mut rng(3)).is_err());
        assert!(simulate_counts(0.5, 0.5, 0, &mut rng(3)).is_err());
    }

    #[test]
    fn closed_form_examples() {
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(closed_form_m(1.0, p).unwrap(), 1.0);
        }
        assert_eq!(closed_form_m(0.37, 1.0).unwrap(), 0.37);
        assert!((closed_form_m(0.04, 0.5).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!(closed_form_m(0.0, 0.0).is_err());
    }

    #[test]
    fn estimator_examples() {
        let c = CountTable {
            n11: 10,
            n10: 240,
            n01: 30,
            n00: 720,
        };
        assert_eq!(estimator_m(&c, 0.0).unwrap(), 40.0 / 280.0);
        assert!((estimator_m(&c, 0.02).unwrap() - 40.0 / 280.0 - 0.02).abs() < 1e-15);
        let empty = CountTable {
            n00: 1000,
            ..Default::default()
        };
        assert!(matches!(estimator_m(&empty, 0.0), Err(Error::Estimation(_))));
    }

    #[test]
    fn average_is_deterministic() {
        let cfg = RunConfig::new(0.04, 0.5, 200, 64, 9);
        let noise = NoiseModel::new(0.02).unwrap();
        let a = mc_average(&cfg, &noise).unwrap();
        let b = mc_average(&cfg, &noise).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stddev.to_bits(), b.stddev.to_bits());
        let c = mc_average(&RunConfig { seed: 10, ..cfg }, &noise).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn all_failures_is_an_error() {
        // R = 0 and p = 0 never produce a conditioning event
        let cfg = RunConfig::new(0.0, 0.0, 10, 5, 1);
        assert!(matches!(
            mc_average(&cfg, &NoiseModel::noiseless()),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn perfect_mirror_has_zero_mse() {
        let cfg = RunConfig::new(1.0, 1.0, 100, 1, 3);
        assert_eq!(mse(&cfg, &NoiseModel::noiseless(), 50).unwrap(), 0.0);
    }

    #[test]
    fn frozen_counts_vary_only_in_noise() {
        let cfg = RunConfig {
            freeze_counts: true,
            ..RunConfig::new(0.3, 0.6, 500, 100, 4)
        };
        let s = mc_average(&cfg, &NoiseModel::noiseless()).unwrap();
        assert!(s.stddev < 1e-12);
        let s = mc_average(&cfg, &NoiseModel::new(0.05).unwrap()).unwrap();
        assert!(s.stddev > 0.03 && s.stddev < 0.07);
    }

    #[test]
    fn invalid_configs() {
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(mc_average(&RunConfig::new(0.5, 1.5, 10, 10, 0), &NoiseModel::noiseless()).is_err());
        assert!(mse(&RunConfig::new(0.5, 0.5, 10, 10, 0), &NoiseModel::noiseless(), 0).is_err());
    }
}

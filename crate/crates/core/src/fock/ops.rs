use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{ConditionalOutcome, FockStateVector, Occupation, OutcomeState};
use crate::{Error, Result};

const UNITARITY_TOLERANCE: f64 = 1e-10;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Applies the two-mode unitary `[[t, r], [-r*, t*]]` to modes `(i, j)`.
///
/// A component `(a_i†)^{n_i} (a_j†)^{n_j} / sqrt(n_i! n_j!) |0>` is expanded as
/// `(t x - r* y)^{n_i} (r x + t* y)^{n_j}` with `x = a_i†`, `y = a_j†`.
pub fn beam_splitter(
    state: &FockStateVector,
    modes: (usize, usize),
    t: Complex64,
    r: Complex64,
) -> Result<FockStateVector> {
    let (i, j) = modes;
    state.check_mode(i)?;
    state.check_mode(j)?;
    if i == j {
        return Err(Error::param(format!(
            "beam splitter needs two distinct modes, got ({i}, {j})"
        )));
    }
    let defect = t.norm_sqr() + r.norm_sqr() - 1.0;
    if defect.is_nan() || defect.abs() > UNITARITY_TOLERANCE {
        return Err(Error::param(format!(
            "|t|^2 + |r|^2 = {} is not 1 (t = {t}, r = {r})",
            defect + 1.0
        )));
    }

    // x/y coefficients of a_i† and a_j† after the transformation.
    let (xi, yi) = (t, -r.conj());
    let (xj, yj) = (r, t.conj());

    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, &amp) in state.iter() {
        let (ni, nj) = (occ[i] as usize, occ[j] as usize);
        let prefactor = amp / (factorial(ni) * factorial(nj)).sqrt();
        for k in 0..=ni {
            let ci = binomial(ni, k) * xi.powu(k as u32) * yi.powu((ni - k) as u32);
            for l in 0..=nj {
                let cj = binomial(nj, l) * xj.powu(l as u32) * yj.powu((nj - l) as u32);
                let a = k + l;
                let b = ni + nj - a;
                let coeff = prefactor * ci * cj * (factorial(a) * factorial(b)).sqrt();
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let mut target = occ.clone();
                target[i] = a as u8;
                target[j] = b as u8;
                *out.entry(target).or_default() += coeff;
            }
        }
    }
    out.retain(|_, a| a.norm_sqr() > 0.0);
    Ok(FockStateVector::from_parts(state.mode_count(), state.truncation(), out))
}

/// Measurement operator diagonal in the number basis of one mode,
/// `K = sum_n c_n |n><n|`.
///
/// Coefficients with `max |c_n| > 1` are rescaled by `1 / max |c_n|` so that
/// `K†K <= 1`; the factor is kept in [`DiagonalKraus::scale`]. The rescaling
/// leaves the conditional state unchanged and multiplies the success
/// probability by `scale^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalKraus {
    target_mode: usize,
    coefficients: BTreeMap<usize, Complex64>,
    scale: f64,
}

impl DiagonalKraus {
    /// Photon numbers absent from `coefficients` are annihilated.
    pub fn new<I>(target_mode: usize, coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Complex64)>,
    {
        let coefficients: BTreeMap<usize, Complex64> = coefficients.into_iter().collect();
        let max = coefficients.values().map(|c| c.norm()).fold(0.0, f64::max);
        if !max.is_finite() {
            return Err(Error::param("Kraus coefficients must be finite"));
        }
        let scale = if max > 1.0 { 1.0 / max } else { 1.0 };
        Ok(Self {
            target_mode,
            coefficients,
            scale,
        })
    }

    /// Partially postselected filter `F = |0><0| + p|1><1|`.
    pub fn partial_filter(target_mode: usize, p: f64) -> Result<Self> {
        if !(p.is_finite() && p.abs() <= 1.0) {
            return Err(Error::param(format!("postselection parameter |p| = {p} must be <= 1")));
        }
        Self::new(
            target_mode,
            [(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(p, 0.0))],
        )
    }

    /// Noiseless amplifier `(1/g)(|0><0| + g|1><1|)`, postselection-equivalent
    /// to [`DiagonalKraus::partial_filter`] with `p = 1/g`.
    pub fn noiseless_amplifier(target_mode: usize, gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain >= 1.0) {
            return Err(Error::param(format!("amplifier gain {gain} must be >= 1")));
        }
        Self::new(
            target_mode,
            [(0, Complex64::new(1.0 / gain, 0.0)), (1, Complex64::new(1.0, 0.0))],
        )
    }

    pub fn target_mode(&self) -> usize {
        self.target_mode
    }

    /// Global factor applied to the raw coefficients.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Effective coefficient for photon number `n` (after rescaling).
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients.get(&n).copied().unwrap_or_default() * self.scale
    }
}

/// Applies `kraus` and renormalizes. The outcome probability is
/// `||K psi||^2 / ||psi||^2`.
pub fn apply_kraus(state: &FockStateVector, kraus: &DiagonalKraus) -> Result<ConditionalOutcome> {
    let mode = kraus.target_mode();
    state.check_mode(mode)?;
    let input = state.norm_sqr();
    if input <= 0.0 {
        return Err(Error::Degenerate("Kraus operator applied to a zero vector".into()));
    }
    let filtered = state.map_amplitudes(|occ, a| a * kraus.coefficient(occ[mode] as usize));
    let probability = filtered.norm_sqr() / input;
    if probability <= 0.0 {
        return Err(Error::Degenerate(format!(
            "filter on mode {mode} annihilates the state"
        )));
    }
    ConditionalOutcome::new(OutcomeState::Pure(filtered.normalized()?), probability)
}

/// Projects `mode` onto the number state `|n>`. The projected mode is kept
/// at its fixed occupation; use [`FockStateVector::remove_mode`] on the
/// result for the reduced state of the remaining modes.
pub fn project_number(state: &FockStateVector, mode: usize, n: usize) -> Result<ConditionalOutcome> {
    state.check_mode(mode)?;
    if n > state.truncation() {
        return Err(Error::param(format!(
            "photon number {n} exceeds the truncation {}",
            state.truncation()
        )));
    }
    let input = state.norm_sqr();
    if input <= 0.0 {
        return Err(Error::Degenerate("projection of a zero vector".into()));
    }
    let projected = state.map_amplitudes(|occ, a| {
        if occ[mode] as usize == n {
            a
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let probability = projected.norm_sqr() / input;
    if probability <= 0.0 {
        return Err(Error::Degenerate(format!(
            "mode {mode} never holds {n} photons in this state"
        )));
    }
    ConditionalOutcome::new(OutcomeState::Pure(projected.normalized()?), probability)
}

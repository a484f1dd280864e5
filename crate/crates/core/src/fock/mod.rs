//! Exact truncated multimode Fock-space engine.
//!
//! States are sparse maps from occupation tuples `(n_1, ..., n_m)` to complex
//! amplitudes, with the total photon number bounded by a truncation. Every
//! operation here conserves or reduces the photon number, so a truncation of
//! 2 is exact for all single-photon and catalysis schemes in this crate.
//!
//! Beam splitters follow the input/output convention
//! `O = [[t, r], [-r*, t*]] · P`, so an input creation operator maps as
//! `a_i† -> t a_i† - r* a_j†` and `a_j† -> r a_i† + t* a_j†`.

mod catalysis;
mod ops;

pub use catalysis::{catalysis_realistic, catalysis_single_herald, catalysis_zero_herald, CHANNEL_3, CHANNEL_6};
pub use ops::{apply_kraus, beam_splitter, project_number, DiagonalKraus};

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::{Error, Result};

pub const DEFAULT_TRUNCATION: usize = 2;

/// Tolerance used when checking that weights and norms sum to one.
pub const NORM_TOLERANCE: f64 = 1e-12;

pub type Occupation = Vec<u8>;

#[derive(Clone, Debug, PartialEq)]
pub struct FockStateVector {
    modes: usize,
    truncation: usize,
    amplitudes: BTreeMap<Occupation, Complex64>,
}

impl FockStateVector {
    /// Vacuum on `modes` modes.
    pub fn vacuum(modes: usize, truncation: usize) -> Result<Self> {
        Self::basis(&vec![0; modes], truncation)
    }

    /// Number state `|n_1, ..., n_m>`.
    pub fn basis(occupation: &[u8], truncation: usize) -> Result<Self> {
        Self::from_amplitudes(
            occupation.len(),
            truncation,
            [(occupation.to_vec(), Complex64::new(1.0, 0.0))],
        )
    }

    /// Builds a (possibly un-normalized) state. Repeated tuples are summed.
    pub fn from_amplitudes<I>(modes: usize, truncation: usize, amplitudes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        if modes == 0 {
            return Err(Error::param("a state needs at least one mode"));
        }
        if truncation > u8::MAX as usize {
            return Err(Error::param(format!("truncation {truncation} exceeds {}", u8::MAX)));
        }
        let mut map = BTreeMap::new();
        for (occ, amp) in amplitudes {
            if occ.len() != modes {
                return Err(Error::param(format!(
                    "occupation {occ:?} has {} entries, expected {modes}",
                    occ.len()
                )));
            }
            let total: usize = occ.iter().map(|&n| n as usize).sum();
            if total > truncation {
                return Err(Error::param(format!(
                    "occupation {occ:?} carries {total} photons, truncation is {truncation}"
                )));
            }
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::param(format!("non-finite amplitude for {occ:?}")));
            }
            *map.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self {
            modes,
            truncation,
            amplitudes: map,
        })
    }

    pub(crate) fn from_parts(modes: usize, truncation: usize, amplitudes: BTreeMap<Occupation, Complex64>) -> Self {
        Self {
            modes,
            truncation,
            amplitudes,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.amplitudes.get(occupation).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Squared norm; equals 1 for normalized states and carries the branch
    /// probability for un-normalized ones.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        let scale = 1.0 / n2.sqrt();
        Ok(self.map_amplitudes(|_, a| a * scale))
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(Error::ModeIndex {
                index: mode,
                modes: self.modes,
            })
        }
    }

    pub(crate) fn map_amplitudes<F>(&self, f: F) -> Self
    where
        F: Fn(&Occupation, Complex64) -> Complex64,
    {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(occ, &a)| (occ.clone(), f(occ, a)))
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .collect();
        Self {
            modes: self.modes,
            truncation: self.truncation,
            amplitudes,
        }
    }

    /// `<n_mode>` for a normalized state (un-normalized states are divided by
    /// their norm).
    pub fn mean_photons(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return Err(Error::Degenerate("mean photon number of a zero vector".into()));
        }
        let s: f64 = self
            .amplitudes
            .iter()
            .map(|(occ, a)| occ[mode] as f64 * a.norm_sqr())
            .sum();
        Ok(s / n2)
    }

    /// Mean photon numbers of every mode.
    pub fn mean_photons_all(&self) -> Result<Vec<f64>> {
        (0..self.modes).map(|m| self.mean_photons(m)).collect()
    }

    /// Drops `mode`, which must hold a definite photon number (e.g. after
    /// [`project_number`]).
    pub fn remove_mode(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        if self.modes == 1 {
            return Err(Error::param("cannot remove the only mode"));
        }
        let mut occupancy = self.amplitudes.keys().map(|occ| occ[mode]);
        if let Some(first) = occupancy.next() {
            if occupancy.any(|n| n != first) {
                return Err(Error::param(format!(
                    "mode {mode} is not in a definite number state; trace it out instead"
                )));
            }
        }
        Ok(self.branches(mode).into_values().next().unwrap_or_else(|| Self {
            modes: self.modes - 1,
            truncation: self.truncation,
            amplitudes: BTreeMap::new(),
        }))
    }

    /// Splits the state by the occupation of `mode`; each branch has the mode
    /// removed and keeps its un-normalized amplitudes.
    fn branches(&self, mode: usize) -> BTreeMap<u8, Self> {
        let mut out: BTreeMap<u8, BTreeMap<Occupation, Complex64>> = BTreeMap::new();
        for (occ, &a) in &self.amplitudes {
            let mut rest = occ.clone();
            let n = rest.remove(mode);
            out.entry(n).or_default().insert(rest, a);
        }
        out.into_iter()
            .map(|(n, amps)| (n, Self::from_parts(self.modes - 1, self.truncation, amps)))
            .collect()
    }

    /// Partial trace over `mode`, by enumerating its occupations. Each
    /// occupation becomes one ensemble member weighted by its probability.
    pub fn trace_out(&self, mode: usize) -> Result<Ensemble> {
        self.check_mode(mode)?;
        if self.modes == 1 {
            return Err(Error::param("cannot trace out the only mode"));
        }
        let branches: Vec<Self> = self
            .branches(mode)
            .into_values()
            .filter(|b| b.norm_sqr() > 0.0)
            .collect();
        Ensemble::from_branches(branches)
    }
}

/// Probabilistic mixture of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, FockStateVector)>,
}

impl Ensemble {
    /// Normalized members with weights summing to one.
    pub fn new(members: Vec<(f64, FockStateVector)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::param("an ensemble needs at least one member"));
        };
        let modes = first.mode_count();
        let mut total = 0.0;
        for (w, s) in &members {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::param(format!("ensemble weight {w} is not a probability")));
            }
            if s.mode_count() != modes {
                return Err(Error::param("ensemble members have different mode counts"));
            }
            if !s.is_normalized() {
                return Err(Error::param("ensemble members must be normalized"));
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::param(format!("ensemble weights sum to {total}, expected 1")));
        }
        Ok(Self { members })
    }

    /// Builds a mixture from un-normalized branches; weights are the branch
    /// norms renormalized to sum to one.
    pub fn from_branches(branches: Vec<FockStateVector>) -> Result<Self> {
        let total: f64 = branches.iter().map(FockStateVector::norm_sqr).sum();
        if total <= 0.0 {
            return Err(Error::Degenerate("all ensemble branches vanish".into()));
        }
        let members = branches
            .into_iter()
            .filter(|b| b.norm_sqr() > 0.0)
            .map(|b| Ok((b.norm_sqr() / total, b.normalized()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[(f64, FockStateVector)] {
        &self.members
    }

    pub fn mode_count(&self) -> usize {
        self.members[0].1.mode_count()
    }

    pub fn mean_photons(&self, mode: usize) -> Result<f64> {
        self.members.iter().map(|(w, s)| Ok(w * s.mean_photons(mode)?)).sum()
    }

    /// Total weight of members that are the vacuum.
    pub fn vacuum_weight(&self) -> f64 {
        let vac = vec![0u8; self.mode_count()];
        self.members.iter().map(|(w, s)| w * s.amplitude(&vac).norm_sqr()).sum()
    }
}

/// State part of a [`ConditionalOutcome`].
#[derive(Clone, Debug, PartialEq)]
pub enum OutcomeState {
    Pure(FockStateVector),
    Mixed(Ensemble),
}

impl OutcomeState {
    pub fn mode_count(&self) -> usize {
        match self {
            OutcomeState::Pure(s) => s.mode_count(),
            OutcomeState::Mixed(e) => e.mode_count(),
        }
    }

    pub fn as_pure(&self) -> Option<&FockStateVector> {
        match self {
            OutcomeState::Pure(s) => Some(s),
            OutcomeState::Mixed(_) => None,
        }
    }

    pub fn as_mixed(&self) -> Option<&Ensemble> {
        match self {
            OutcomeState::Pure(_) => None,
            OutcomeState::Mixed(e) => Some(e),
        }
    }
}

/// Result of a conditional (postselected) operation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalOutcome {
    pub state: OutcomeState,
    /// Probability that the conditioning event occurs.
    pub probability: f64,
    /// `<n>` of every mode of the renormalized conditional state.
    pub mean_photons: Vec<f64>,
}

impl ConditionalOutcome {
    pub(crate) fn new(state: OutcomeState, probability: f64) -> Result<Self> {
        let mean_photons = (0..state.mode_count())
            .map(|m| mean_photons(&state, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            state,
            probability: probability.clamp(0.0, 1.0),
            mean_photons,
        })
    }
}

/// Anything with a well-defined mean photon number per mode.
pub trait PhotonStatistics {
    fn mean_photons(&self, mode: usize) -> Result<f64>;
}

impl PhotonStatistics for FockStateVector {
    fn mean_photons(&self, mode: usize) -> Result<f64> {
        FockStateVector::mean_photons(self, mode)
    }
}

impl PhotonStatistics for Ensemble {
    fn mean_photons(&self, mode: usize) -> Result<f64> {
        Ensemble::mean_photons(self, mode)
    }
}

impl PhotonStatistics for OutcomeState {
    fn mean_photons(&self, mode: usize) -> Result<f64> {
        match self {
            OutcomeState::Pure(s) => s.mean_photons(mode),
            OutcomeState::Mixed(e) => e.mean_photons(mode),
        }
    }
}

/// `<n_mode>` of a pure state or an ensemble.
pub fn mean_photons<S: PhotonStatistics + ?Sized>(state: &S, mode: usize) -> Result<f64> {
    state.mean_photons(mode)
}

//! Photon-catalysis receivers that realize the partially postselected filter
//! on the reflected arm of a beam splitter.
//!
//! Mode layout (indices into the state vector):
//!
//! | index | zero herald          | single herald           | realistic detector        |
//! |-------|----------------------|-------------------------|---------------------------|
//! | 0     | channel 3            | channel 3               | channel 3                 |
//! | 1     | channel 4 -> 6       | channel 4 -> 6          | channel 4 -> 6            |
//! | 2     | channel 5 -> D1      | auxiliary photon -> D2  | auxiliary photon -> D2 -> D3 |
//! | 3     |                      |                         | channel 8 -> 8' (traced out) |
//!
//! BS1 has transmittance `T` and acts on modes (0, 1) with a single photon
//! in mode 0. BS2 has transmittance `p^2` (`t = p`, `r = sqrt(1 - p^2)`) and
//! acts on modes (1, 2): channel 4 enters the first port and leaves towards
//! channel 6, the second port feeds the detector.
//!
//! In the single-herald wiring the auxiliary photon enters the detector side
//! of BS2. Heralding exactly one photon leaves
//! `p sqrt(T) |1,0> - (2p^2 - 1) sqrt(1 - T) |0,1>` on channels (3, 6): the
//! `2p^2 - 1 = |t|^2 - |r|^2` factor is the two-photon interference term.
//!
//! The realistic detector is BS3 with transmittance `eta` between the D2 port
//! and a vacuum ancilla, followed by an ideal number-resolving detector D3 on
//! the transmitted port. The other output is traced out by enumeration, which
//! leaves a mixture with an explicit vacuum member.

use num_complex::Complex64;

use super::{beam_splitter, project_number, ConditionalOutcome, FockStateVector, OutcomeState, DEFAULT_TRUNCATION};
use crate::error::check_range;
use crate::{Error, Result};

/// Index of channel 3 (the transmitted signal) in every catalysis outcome.
pub const CHANNEL_3: usize = 0;
/// Index of channel 6 in every catalysis outcome.
pub const CHANNEL_6: usize = 1;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn splitter(transmittance: f64) -> (Complex64, Complex64) {
    (real(transmittance.sqrt()), real((1.0 - transmittance).sqrt()))
}

/// BS1 on a single photon, then BS2 on the reflected arm.
fn front_end(t_bs1: f64, p: f64, input: &[u8]) -> Result<FockStateVector> {
    let state = FockStateVector::basis(input, DEFAULT_TRUNCATION)?;
    let (t1, r1) = splitter(t_bs1);
    let state = beam_splitter(&state, (0, 1), t1, r1)?;
    let (t2, r2) = splitter(p * p);
    beam_splitter(&state, (1, 2), t2, r2)
}

fn check_inputs(transmittance: f64, p: f64) -> Result<()> {
    check_range("T", transmittance, 0.0, 1.0)?;
    check_range("p", p, 0.0, 1.0)?;
    Ok(())
}

/// Zero-photon heralding at D1 with vacuum in channels 2 and 5.
pub fn catalysis_zero_herald(transmittance: f64, p: f64) -> Result<ConditionalOutcome> {
    check_inputs(transmittance, p)?;
    let state = front_end(transmittance, p, &[1, 0, 0])?;
    herald(&state, 2, 0)
}

/// Single-photon heralding at an ideal number-resolving D2 with an auxiliary
/// photon on the second input of BS2.
pub fn catalysis_single_herald(transmittance: f64, p: f64) -> Result<ConditionalOutcome> {
    check_inputs(transmittance, p)?;
    let state = front_end(transmittance, p, &[1, 0, 1])?;
    herald(&state, 2, 1)
}

/// Single-photon heralding through a detector of efficiency `eta`.
pub fn catalysis_realistic(transmittance: f64, p: f64, eta: f64) -> Result<ConditionalOutcome> {
    check_inputs(transmittance, p)?;
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        return Err(Error::param(format!(
            "detector efficiency eta = {eta} must lie in (0, 1]"
        )));
    }
    let state = front_end(transmittance, p, &[1, 0, 1])?;
    let state = append_vacuum_mode(&state)?;
    let (t3, r3) = splitter(eta);
    let state = beam_splitter(&state, (2, 3), t3, r3)?;

    let projected = project_number(&state, 2, 1).map_err(|e| degenerate_herald(e, transmittance, p))?;
    let probability = projected.probability;
    let conditional = match projected.state {
        OutcomeState::Pure(s) => s.remove_mode(2)?,
        OutcomeState::Mixed(_) => unreachable!("projection yields a pure state"),
    };
    let mixed = conditional.trace_out(2)?;
    ConditionalOutcome::new(OutcomeState::Mixed(mixed), probability)
}

fn herald(state: &FockStateVector, detector: usize, clicks: usize) -> Result<ConditionalOutcome> {
    let projected = project_number(state, detector, clicks).map_err(|e| degenerate_herald(e, f64::NAN, f64::NAN))?;
    let reduced = match &projected.state {
        OutcomeState::Pure(s) => s.remove_mode(detector)?,
        OutcomeState::Mixed(_) => unreachable!("projection yields a pure state"),
    };
    ConditionalOutcome::new(OutcomeState::Pure(reduced), projected.probability)
}

fn degenerate_herald(err: Error, transmittance: f64, p: f64) -> Error {
    match err {
        Error::Degenerate(msg) if transmittance.is_nan() => Error::Degenerate(format!("herald never fires: {msg}")),
        Error::Degenerate(msg) => {
            Error::Degenerate(format!("herald never fires at T = {transmittance}, p = {p}: {msg}"))
        }
        other => other,
    }
}

fn append_vacuum_mode(state: &FockStateVector) -> Result<FockStateVector> {
    FockStateVector::from_amplitudes(
        state.mode_count() + 1,
        state.truncation(),
        state.iter().map(|(occ, &a)| {
            let mut occ = occ.clone();
            occ.push(0);
            (occ, a)
        }),
    )
}

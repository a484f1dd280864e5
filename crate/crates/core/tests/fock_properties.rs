use num_complex::Complex64;
use ppfilter_core::fock::{apply_kraus, beam_splitter, project_number, DiagonalKraus, Ensemble, FockStateVector};
use proptest::prelude::*;

const MODES: usize = 3;
const TRUNC: usize = 2;

fn basis_occupations() -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for a in 0..=2u8 {
        for b in 0..=2u8 {
            for c in 0..=2u8 {
                if (a + b + c) as usize <= TRUNC {
                    out.push(vec![a, b, c]);
                }
            }
        }
    }
    out
}

fn arb_state() -> impl Strategy<Value = FockStateVector> {
    let n = basis_occupations().len();
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|amps| {
            let pairs = basis_occupations()
                .into_iter()
                .zip(amps)
                .map(|(occ, (re, im))| (occ, Complex64::new(re, im)));
            FockStateVector::from_amplitudes(MODES, TRUNC, pairs)
                .unwrap()
                .normalized()
                .unwrap()
        })
}

fn arb_splitter() -> impl Strategy<Value = (Complex64, Complex64)> {
    (0.0..std::f64::consts::FRAC_PI_2, -3.2..3.2f64, -3.2..3.2f64).prop_map(|(theta, phi_t, phi_r)| {
        (
            Complex64::from_polar(theta.cos(), phi_t),
            Complex64::from_polar(theta.sin(), phi_r),
        )
    })
}

fn arb_modes() -> impl Strategy<Value = (usize, usize)> {
    (0..MODES, 0..MODES).prop_filter("distinct", |(i, j)| i != j)
}

proptest! {
    #[test]
    fn splitter_preserves_norm(state in arb_state(), (t, r) in arb_splitter(), modes in arb_modes()) {
        let out = beam_splitter(&state, modes, t, r).unwrap();
        prop_assert!((out.norm_sqr() - state.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn splitter_preserves_total_photons(state in arb_state(), (t, r) in arb_splitter(), modes in arb_modes()) {
        let out = beam_splitter(&state, modes, t, r).unwrap();
        let total = |s: &FockStateVector| s.mean_photons_all().unwrap().iter().sum::<f64>();
        prop_assert!((total(&out) - total(&state)).abs() < 1e-12);
    }

    #[test]
    fn splitter_inverse_restores_state(state in arb_state(), (t, r) in arb_splitter(), modes in arb_modes()) {
        // the inverse of [[t, r], [-r*, t*]] is [[t*, -r], [r*, t]]
        let there = beam_splitter(&state, modes, t, r).unwrap();
        let back = beam_splitter(&there, modes, t.conj(), -r).unwrap();
        for occ in basis_occupations() {
            prop_assert!((back.amplitude(&occ) - state.amplitude(&occ)).norm() < 1e-12);
        }
    }

    #[test]
    fn projections_are_complete(state in arb_state(), mode in 0..MODES) {
        let total: f64 = (0..=TRUNC)
            .map(|n| project_number(&state, mode, n).map_or(0.0, |o| o.probability))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kraus_rescaling_is_invisible(
        state in arb_state(),
        mode in 0..MODES,
        c0 in 0.05..1.0f64,
        c1 in 0.05..1.0f64,
        lambda in 0.05..1.0f64,
    ) {
        let base = DiagonalKraus::new(mode, [(0, Complex64::new(c0, 0.0)), (1, Complex64::new(c1, 0.0)), (2, Complex64::new(1.0, 0.0))]).unwrap();
        let scaled = DiagonalKraus::new(mode, [(0, Complex64::new(lambda * c0, 0.0)), (1, Complex64::new(lambda * c1, 0.0)), (2, Complex64::new(lambda, 0.0))]).unwrap();
        let a = apply_kraus(&state, &base);
        let b = apply_kraus(&state, &scaled);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert!((b.probability - lambda * lambda * a.probability).abs() < 1e-12);
                let (sa, sb) = (a.state.as_pure().unwrap(), b.state.as_pure().unwrap());
                for occ in basis_occupations() {
                    prop_assert!((sa.amplitude(&occ) - sb.amplitude(&occ)).norm() < 1e-12);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "only one of the scaled filters failed"),
        }
    }

    #[test]
    fn amplifier_on_one_arm_matches_filter_on_the_other(
        theta in 0.0..std::f64::consts::FRAC_PI_2,
        phase in -3.2..3.2f64,
        gain in 1.0..20.0f64,
    ) {
        // single photon shared by two modes: G_sc(g) on mode 1 weights the
        // same components as F(1/g) on mode 0
        let s = FockStateVector::from_amplitudes(2, TRUNC, [
            (vec![1, 0], Complex64::new(theta.cos(), 0.0)),
            (vec![0, 1], Complex64::from_polar(theta.sin(), phase)),
        ]).unwrap();
        let amp = apply_kraus(&s, &DiagonalKraus::noiseless_amplifier(1, gain).unwrap());
        let filt = apply_kraus(&s, &DiagonalKraus::partial_filter(0, 1.0 / gain).unwrap());
        if let (Ok(a), Ok(f)) = (amp, filt) {
            let (sa, sf) = (a.state.as_pure().unwrap(), f.state.as_pure().unwrap());
            for occ in [[1u8, 0], [0, 1]] {
                prop_assert!((sa.amplitude(&occ) - sf.amplitude(&occ)).norm() < 1e-12);
            }
            prop_assert!((a.probability - f.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_means_are_affine(a in arb_state(), b in arb_state(), w in 0.0..1.0f64, mode in 0..MODES) {
        let ens = Ensemble::new(vec![(w, a.clone()), (1.0 - w, b.clone())]).unwrap();
        let expected = w * a.mean_photons(mode).unwrap() + (1.0 - w) * b.mean_photons(mode).unwrap();
        prop_assert!((ens.mean_photons(mode).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn vacuum_member_adds_nothing() {
    let one = FockStateVector::basis(&[1, 0], TRUNC).unwrap();
    let vac = FockStateVector::vacuum(2, TRUNC).unwrap();
    let ens = Ensemble::new(vec![(0.3, vac), (0.7, one)]).unwrap();
    assert!((ens.mean_photons(0).unwrap() - 0.7).abs() < 1e-15);
    assert!((ens.vacuum_weight() - 0.3).abs() < 1e-15);
}

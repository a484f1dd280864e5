//! The Fock-space catalysis pipelines against their closed forms.

use std::time::Instant;

use ppfilter_core::filter::{
    catalysis_realistic_amplification, catalysis_realistic_mean, catalysis_single_herald_mean,
    catalysis_success_probability, catalysis_zero_herald_mean,
};
use ppfilter_core::fock::{catalysis_realistic, catalysis_single_herald, catalysis_zero_herald, CHANNEL_3};

fn grid() -> impl Iterator<Item = f64> {
    (1..=9).map(|k| k as f64 / 10.0)
}

#[test]
fn pipelines_match_closed_forms_on_grid() {
    let start = Instant::now();
    for t in grid() {
        for p in grid() {
            let zero = catalysis_zero_herald(t, p).unwrap();
            assert!((zero.mean_photons[CHANNEL_3] - catalysis_zero_herald_mean(t, p)).abs() < 1e-12);
            let single = catalysis_single_herald(t, p).unwrap();
            assert!((single.mean_photons[CHANNEL_3] - catalysis_single_herald_mean(t, p)).abs() < 1e-12);
            for eta in [0.8, 0.9, 1.0] {
                let real = catalysis_realistic(t, p, eta).unwrap();
                let mean = real.mean_photons[CHANNEL_3];
                assert!(
                    (mean - catalysis_realistic_mean(t, p, eta)).abs() < 1e-12,
                    "T={t} p={p} eta={eta}"
                );
                assert!((real.probability - catalysis_success_probability(t, p, eta)).abs() < 1e-12);
                assert!((mean / t - catalysis_realistic_amplification(t, p, eta)).abs() < 1e-10);
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn realistic_vacuum_weight() {
    for t in grid() {
        for p in grid() {
            let eta = 0.85;
            let out = catalysis_realistic(t, p, eta).unwrap();
            let ens = out.state.as_mixed().unwrap();
            let p2 = p * p;
            let expected = 4.0 * p2 * (1.0 - p2) * (1.0 - t) * eta * (1.0 - eta) / out.probability;
            assert!((ens.vacuum_weight() - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn fig4_gain_rises_for_large_p() {
    // at small T the gain climbs steeply past p = 0.5 and orders with eta
    let t = 0.01;
    let etas = [0.8, 0.85, 0.9, 0.95];
    for eta in etas {
        let k = |p: f64| catalysis_realistic_amplification(t, p, eta);
        assert!(k(0.7) > 3.0 * k(0.5));
        let mut last = k(0.5);
        for p in [0.55, 0.6, 0.65, 0.7] {
            assert!(k(p) > last);
            last = k(p);
        }
    }
    for p in [0.3, 0.6, 0.7, 0.9] {
        let ks: Vec<f64> = etas
            .iter()
            .map(|&e| catalysis_realistic_amplification(t, p, e))
            .collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
    }
}

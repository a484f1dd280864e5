use ppfilter_core::filter::{
    reflected_mean_photons, sweep, transmitted_mean_delta, transmitted_mean_photons, Channel, ConstantReflectivity,
    GaussianFamily, ReflectivityModel,
};
use ppfilter_core::montecarlo::closed_form_m;
use ppfilter_core::scatter::{drude_slab_coeffs, SlabParams};
use ppfilter_core::spectra::{weight_integral, SpectralDistribution};
use proptest::prelude::*;

/// Composite Simpson rule on a fixed grid.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn gaussian_weight_matches_simpson_reference() {
    let slab = SlabParams::default();
    let (w0, sigma) = (1.2, 1.0 / 40.0);
    let dist = SpectralDistribution::gaussian(w0, sigma, 1.0).unwrap();
    let t2 = |w: f64| drude_slab_coeffs(&slab, w).unwrap().transmittance();
    let value = weight_integral(&dist, t2).unwrap();
    // plain exp(-(w - w0)^2 / (sigma w0)^2) weight, normalized independently
    let (a, b) = (w0 * (1.0 - 8.0 * sigma), w0 * (1.0 + 8.0 * sigma));
    let g = |w: f64| (-((w - w0) / (sigma * w0)).powi(2)).exp();
    let norm = simpson(g, a, b, 200_000);
    let reference = simpson(|w| g(w) * t2(w), a, b, 200_000) / norm;
    assert!((value - reference).abs() < 1e-8, "{value} vs {reference}");
}

#[test]
fn transmission_order_in_p() {
    let slab = SlabParams::default();
    let family = GaussianFamily {
        sigma: 1.0 / 40.0,
        tau: 1.0,
    };
    let omegas: Vec<f64> = (0..57).map(|k| 0.2 + 0.05 * k as f64).collect();
    let rows = sweep(Channel::Transmitted, &family, &slab, &omegas, &[0.1, 0.5, 1.0]).unwrap();
    for c in rows.chunks(3) {
        assert!(c[0].mean_photons >= c[1].mean_photons && c[1].mean_photons >= c[2].mean_photons);
        assert!(c[0].amplification >= c[1].amplification && c[2].amplification >= 1.0 - 1e-12);
        assert!(c[0].amplification <= 100.0 + 1e-9);
    }
}

#[test]
fn reflection_rises_as_p_falls() {
    let slab = SlabParams::default();
    let family = GaussianFamily {
        sigma: 1.0 / 40.0,
        tau: 1.0,
    };
    let omegas: Vec<f64> = (0..29).map(|k| 0.2 + 0.1 * k as f64).collect();
    let ps = [1.0, 0.8, 0.6, 0.4, 0.2, 0.1];
    let rows = sweep(Channel::Reflected, &family, &slab, &omegas, &ps).unwrap();
    for c in rows.chunks(ps.len()) {
        assert!(c.windows(2).all(|w| w[1].mean_photons >= w[0].mean_photons));
    }
}

#[test]
fn reflected_delta_equals_counting_estimand() {
    let slab = SlabParams::default();
    for w in [0.4, 1.1, 1.9, 2.7] {
        let dist = SpectralDistribution::delta(w).unwrap();
        let r = slab.reflectance(w);
        for p in [0.1, 0.5, 0.9, 1.0] {
            let res = reflected_mean_photons(&dist, &slab, p).unwrap();
            assert_eq!(res.mean_photons, closed_form_m(r, p).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn transmitted_delta_bounds(t in 0.0..=1.0f64, p in 0.0..=1.0f64) {
        prop_assume!(t > 0.0 || p > 0.0);
        let n = transmitted_mean_delta(t, p).unwrap();
        prop_assert!(n >= t - 1e-15 && n <= 1.0 + 1e-15);
    }

    #[test]
    fn reflection_monotone_and_bounded(w in 1e-3..0.999f64, p1 in 0.01..1.0f64, p2 in 0.01..1.0f64) {
        let dist = SpectralDistribution::delta(1.0).unwrap();
        let model = ConstantReflectivity::new(w).unwrap();
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        prop_assume!(hi - lo > 1e-6);
        let a = reflected_mean_photons(&dist, &model, lo).unwrap();
        let b = reflected_mean_photons(&dist, &model, hi).unwrap();
        prop_assert!(a.mean_photons > b.mean_photons);
        for (res, p) in [(a, lo), (b, hi)] {
            prop_assert!(res.mean_photons >= w - 1e-15 && res.mean_photons <= 1.0);
            prop_assert!(res.amplification >= 1.0 - 1e-15 && res.amplification <= 1.0 / (p * p) + 1e-9);
        }
    }

    #[test]
    fn gaussian_transmission_bounds(w0 in 0.3..2.8f64, p in 0.05..1.0f64) {
        let slab = SlabParams::default();
        let dist = SpectralDistribution::gaussian(w0, 1.0 / 30.0, 1.0).unwrap();
        let res = transmitted_mean_photons(&dist, &slab, p).unwrap();
        let unfiltered = transmitted_mean_photons(&dist, &slab, 1.0).unwrap();
        prop_assert!(res.mean_photons >= unfiltered.mean_photons - 1e-12 && res.mean_photons <= 1.0 + 1e-12);
        prop_assert!((res.amplification - res.mean_photons / unfiltered.mean_photons).abs() < 1e-9);
    }
}

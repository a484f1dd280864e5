use std::fs::File;
use std::io::{BufReader, Write};

use ppfilter_core::filter::{
    catalysis_realistic_amplification, sweep, Channel, ConstantReflectivity, DeltaFamily, GaussianFamily,
    ReflectivityModel, SpectrumFamily, TabulatedReflectivity,
};
use ppfilter_core::imaging::{contrast_to_noise, pattern_207, render_image, write_csv, write_pgm, ReflectivityMap};
use ppfilter_core::montecarlo::{closed_form_m, frequency_sweep, mse, NoiseModel, RunConfig, SweepSettings};
use ppfilter_core::rng::splitmix64;
use ppfilter_core::scatter::{drude_slab_coeffs, oracle_slab_coeffs};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;
use crate::error::CliError;
use crate::grid::GridSpec;
use crate::output::{num, OutputDir};

fn values(name: &str, g: &GridSpec) -> Result<Vec<f64>, CliError> {
    g.values().map_err(|e| CliError::Usage(format!("{name}: {e}")))
}

fn open(path: &std::path::Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn slab(cfg: &SlabCmdConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let params = cfg.slab.params()?;
    let omegas = values("omega", &cfg.omega)?;
    let rows = omegas
        .iter()
        .map(|&w| {
            let c = drude_slab_coeffs(&params, w)?;
            let dev = oracle_slab_coeffs(&params, w)
                .map(|o| (c.t - o.t).norm().max((c.r - o.r).norm()))
                .unwrap_or(f64::NAN);
            Ok(vec![
                num(w),
                num(c.t.re),
                num(c.t.im),
                num(c.r.re),
                num(c.r.im),
                num(c.transmittance()),
                num(c.reflectance()),
                num(c.energy_defect()),
                num(dev),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    out.csv(
        "slab.csv",
        &[
            ("command", "slab".into()),
            ("scale", num(cfg.slab.scale)),
            ("theta", num(cfg.slab.theta)),
        ],
        &[
            "omega_bar",
            "t_re",
            "t_im",
            "r_re",
            "r_im",
            "transmittance",
            "reflectance",
            "energy_defect",
            "oracle_deviation",
        ],
        rows,
    )?;
    Ok(json!({ "points": omegas.len() }))
}

fn family(cfg: &SpectralConfig) -> Box<dyn SpectrumFamily> {
    match cfg.dist {
        DistKind::Delta => Box::new(DeltaFamily),
        DistKind::Gaussian => Box::new(GaussianFamily {
            sigma: cfg.sigma,
            tau: cfg.tau,
        }),
    }
}

fn spectral(
    name: &str,
    channel: Channel,
    cfg: &SpectralConfig,
    model: &dyn ReflectivityModel,
    out: &mut OutputDir,
) -> Result<Value, CliError> {
    let omegas = values("omega", &cfg.omega)?;
    let ps = values("p", &cfg.p)?;
    let rows = sweep(channel, family(cfg).as_ref(), model, &omegas, &ps)?;
    let dist = match cfg.dist {
        DistKind::Delta => "delta".to_owned(),
        DistKind::Gaussian => format!("gaussian sigma={} tau={}", cfg.sigma, cfg.tau),
    };
    out.csv(
        &format!("{name}.csv"),
        &[("command", name.into()), ("dist", dist)],
        &["omega_bar", "p", "mean_photons", "K", "passing_probability"],
        rows.iter().map(|r| {
            vec![
                num(r.omega_bar),
                num(r.p),
                num(r.mean_photons),
                num(r.amplification),
                num(r.passing_probability),
            ]
        }),
    )?;
    Ok(json!({ "rows": rows.len() }))
}

pub fn transmit(cfg: &SpectralConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    if cfg.reflectance.is_some() || cfg.reflectivity_table.is_some() {
        return Err(CliError::Usage(
            "transmit always uses the slab; drop reflectance/reflectivity_table".into(),
        ));
    }
    let params = cfg.slab.params()?;
    spectral("transmit", Channel::Transmitted, cfg, &params, out)
}

pub fn reflect(cfg: &SpectralConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let model: Box<dyn ReflectivityModel> = match (&cfg.reflectance, &cfg.reflectivity_table) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either reflectance or reflectivity_table, not both".into(),
            ))
        }
        (Some(r), None) => Box::new(ConstantReflectivity::new(*r)?),
        (None, Some(path)) => Box::new(TabulatedReflectivity::from_csv(open(path)?)?),
        (None, None) => Box::new(cfg.slab.params()?),
    };
    spectral("reflect", Channel::Reflected, cfg, model.as_ref(), out)
}

pub fn catalysis(cfg: &CatalysisConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let ps = values("p", &cfg.p)?;
    let etas = values("eta", &cfg.eta)?;
    let t = cfg.transmittance;
    if !(0.0..=1.0).contains(&t) {
        return Err(CliError::Usage(format!("transmittance {t} outside [0, 1]")));
    }
    for &p in &ps {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Usage(format!("p = {p} outside [0, 1]")));
        }
    }
    for &eta in &etas {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CliError::Usage(format!("eta = {eta} outside (0, 1]")));
        }
    }
    let mut header = vec!["p".to_owned()];
    header.extend(etas.iter().map(|e| format!("K_eta={e}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = ps.iter().map(|&p| {
        let mut row = vec![num(p)];
        row.extend(etas.iter().map(|&e| num(catalysis_realistic_amplification(t, p, e))));
        row
    });
    out.csv(
        "catalysis.csv",
        &[("command", "catalysis".into()), ("transmittance", num(t))],
        &header,
        rows,
    )?;
    Ok(json!({ "rows": ps.len() }))
}

pub fn mc(cfg: &McConfig, seed: u64, out: &mut OutputDir) -> Result<Value, CliError> {
    let params = cfg.slab.params()?;
    let omegas = values("omega", &cfg.omega)?;
    let ps = values("p", &cfg.p)?;
    let noise = NoiseModel::new(cfg.sigma)?;
    let settings = SweepSettings {
        trials: cfg.trials,
        samples: cfg.samples,
        seed,
        freeze_counts: cfg.freeze_counts,
    };
    let rows = frequency_sweep(&params, &omegas, &ps, &settings, &noise)?;
    out.csv(
        "mc.csv",
        &[
            ("command", "mc".into()),
            ("seed", seed.to_string()),
            ("sigma", num(cfg.sigma)),
        ],
        &[
            "omega_bar",
            "R",
            "p",
            "closed_form",
            "mean",
            "stddev",
            "failures",
            "mse",
        ],
        rows.iter().map(|r| {
            vec![
                num(r.omega_bar),
                num(r.reflectance),
                num(r.p),
                num(r.closed_form),
                num(r.mean),
                num(r.stddev),
                r.failures.to_string(),
                num(r.mse),
            ]
        }),
    )?;
    Ok(json!({ "rows": rows.len() }))
}

/// Seed of repetition `k`; shared across `p` and `n_step`.
pub fn repetition_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed ^ splitmix64(k))
}

pub fn mse_cmd(cfg: &MseConfig, seed: u64, out: &mut OutputDir) -> Result<Value, CliError> {
    let reflectance = if cfg.r_is_intensity { cfg.r } else { cfg.r * cfg.r };
    let ps = values("p", &cfg.p)?;
    let steps = values("n_step", &cfg.n_step)?;
    let noise = NoiseModel::new(cfg.sigma)?;
    if cfg.seeds == 0 {
        return Err(CliError::Usage("seeds must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for &p in &ps {
        for &n_step in &steps {
            if n_step < 1.0 || n_step.fract() != 0.0 {
                return Err(CliError::Usage(format!("n_step {n_step} is not a positive integer")));
            }
            let runs = (0..cfg.seeds)
                .into_par_iter()
                .map(|k| {
                    let run = RunConfig::new(reflectance, p, cfg.trials, 1, repetition_seed(seed, k));
                    mse(&run, &noise, n_step as u64)
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let n = runs.len() as f64;
            let mean = runs.iter().sum::<f64>() / n;
            let stderr = if runs.len() > 1 {
                (runs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                f64::NAN
            };
            rows.push(vec![
                num(reflectance),
                num(p),
                (n_step as u64).to_string(),
                num(closed_form_m(reflectance, p)?),
                num(mean),
                num(stderr),
                cfg.seeds.to_string(),
            ]);
        }
    }
    out.csv(
        "mse.csv",
        &[
            ("command", "mse".into()),
            ("seed", seed.to_string()),
            ("sigma", num(cfg.sigma)),
            ("trials", cfg.trials.to_string()),
        ],
        &["R", "p", "n_step", "closed_form", "mse", "mse_stderr", "seeds"],
        rows.iter().cloned(),
    )?;
    Ok(json!({ "rows": rows.len() }))
}

pub fn image(cfg: &ImageConfig, seed: u64, out: &mut OutputDir) -> Result<Value, CliError> {
    let map = match (&cfg.map_pgm, &cfg.map_csv) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either map_pgm or map_csv, not both".into())),
        (Some(path), None) => ReflectivityMap::from_pgm(open(path)?, cfg.r_fg, cfg.r_bg)?,
        (None, Some(path)) => ReflectivityMap::from_csv(open(path)?)?,
        (None, None) => pattern_207(cfg.width, cfg.height, cfg.r_fg, cfg.r_bg)?,
    };
    let ps = values("p", &cfg.p)?;
    let noise = NoiseModel::new(cfg.sigma)?;
    let mut summary = Vec::new();
    for &p in &ps {
        let img = render_image(&map, p, cfg.trials, &noise, seed)?;
        let cnr = contrast_to_noise(&img, map.mask()).ok();
        let stem = format!("image_p{p}");
        let mut f = out.open(&format!("{stem}.pgm"))?;
        write_pgm(&img, &mut f)?;
        f.flush()?;
        let mut f = out.open(&format!("{stem}.csv"))?;
        write_csv(&img, &mut f)?;
        f.flush()?;
        out.json(
            &format!("{stem}.json"),
            &json!({
                "p": p,
                "N": cfg.trials,
                "sigma": cfg.sigma,
                "seed": seed,
                "cnr": cnr,
                "failures": img.failures,
                "width": img.width,
                "height": img.height,
            }),
        )?;
        summary.push((p, cnr, img.failures));
    }
    out.csv(
        "cnr.csv",
        &[
            ("command", "image".into()),
            ("seed", seed.to_string()),
            ("sigma", num(cfg.sigma)),
        ],
        &["p", "cnr", "failures"],
        summary
            .iter()
            .map(|(p, c, f)| vec![num(*p), c.map_or("nan".into(), num), f.to_string()]),
    )?;
    Ok(json!({ "cnr": summary.iter().map(|(p, c, _)| json!({"p": p, "cnr": c})).collect::<Vec<_>>() }))
}

pub fn oracle_check(cfg: &OracleConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let params = cfg.slab.params()?;
    let omegas = values("omega", &cfg.omega)?;
    let mut rows = Vec::new();
    let mut worst = (0.0_f64, f64::NAN);
    let mut skipped = 0;
    for &w in &omegas {
        if params.near_singularity(w) {
            skipped += 1;
            continue;
        }
        let c = drude_slab_coeffs(&params, w)?;
        let o = oracle_slab_coeffs(&params, w)?;
        let (dt, dr) = ((c.t - o.t).norm(), (c.r - o.r).norm());
        let dev = dt.max(dr);
        if dev > worst.0 || !dev.is_finite() {
            worst = (dev, w);
        }
        rows.push(vec![num(w), num(dt), num(dr), num(c.energy_defect())]);
    }
    out.csv(
        "oracle.csv",
        &[("command", "oracle-check".into()), ("tolerance", num(cfg.tolerance))],
        &["omega_bar", "t_deviation", "r_deviation", "energy_defect"],
        rows,
    )?;
    let summary = json!({
        "max_deviation": worst.0,
        "omega_at_max": worst.1,
        "points": omegas.len() - skipped,
        "skipped_singular": skipped,
        "tolerance": cfg.tolerance,
    });
    if worst.0.is_nan() || worst.0 >= cfg.tolerance {
        return Err(CliError::Runtime(format!(
            "closed form deviates from the transfer-matrix oracle by {} at omega_bar = {} (tolerance {})",
            worst.0, worst.1, cfg.tolerance
        )));
    }
    Ok(summary)
}

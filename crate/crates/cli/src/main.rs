//! `ppfilter`: sweeps, Monte Carlo runs and images for partially
//! postselected photon filtering.
//!
//! Every run writes its outputs plus `manifest.json` (resolved config and
//! seed) to `--out`. Passing that manifest back through `--config`
//! regenerates the same files byte for byte.

mod commands;
mod config;
mod error;
mod grid;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use config::*;
use error::CliError;
use output::OutputDir;

const THREADS_ENV: &str = "PPFILTER_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "ppfilter",
    version,
    about = "Partially postselected photon filtering simulations"
)]
struct Cli {
    /// Master seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "ppfilter-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Slab transmission and reflection coefficients.
    Slab(SlabCmdArgs),
    /// Transmitted photon number under the filter.
    Transmit(SpectralArgs),
    /// Photon catalysis gain K versus p for several detector efficiencies.
    Catalysis(CatalysisArgs),
    /// Reflected photon number under the filter.
    Reflect(ReflectArgs),
    /// Monte Carlo estimate of M across frequencies.
    Mc(McArgs),
    /// Radar image of a reflectivity target.
    Image(ImageArgs),
    /// Mean squared error of M versus the number of measurements.
    Mse(MseArgs),
    /// Closed-form slab coefficients against the transfer-matrix oracle.
    OracleCheck(OracleArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Slab(_) => "slab",
            Command::Transmit(_) => "transmit",
            Command::Catalysis(_) => "catalysis",
            Command::Reflect(_) => "reflect",
            Command::Mc(_) => "mc",
            Command::Image(_) => "image",
            Command::Mse(_) => "mse",
            Command::OracleCheck(_) => "oracle-check",
        }
    }
}

/// Config document plus the seed carried by a manifest, if any.
struct Loaded {
    config: Option<Value>,
    seed: Option<u64>,
}

fn load_config(path: Option<&Path>, subcommand: &str) -> Result<Loaded, CliError> {
    let Some(path) = path else {
        return Ok(Loaded {
            config: None,
            seed: None,
        });
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Some(obj) = value.as_object() else {
        return Err(CliError::Usage("config must be a JSON object".into()));
    };
    if !obj.contains_key("config") {
        return Ok(Loaded {
            config: Some(value),
            seed: None,
        });
    }
    for key in obj.keys() {
        if !matches!(key.as_str(), "subcommand" | "seed" | "config" | "outputs" | "version") {
            return Err(CliError::Usage(format!("unknown manifest key '{key}'")));
        }
    }
    if let Some(sub) = obj.get("subcommand") {
        if sub.as_str() != Some(subcommand) {
            return Err(CliError::Usage(format!("manifest is for {sub}, not '{subcommand}'")));
        }
    }
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| CliError::Usage(format!("manifest seed {v} is not a u64")))?,
        ),
    };
    Ok(Loaded {
        config: obj.get("config").cloned(),
        seed,
    })
}

fn resolve<C: DeserializeOwned + Default>(doc: Option<Value>, base: C) -> Result<C, CliError> {
    match doc {
        None => Ok(base),
        Some(v) => serde_json::from_value(v).map_err(|e| CliError::Usage(format!("config: {e}"))),
    }
}

fn finish<C: Serialize>(
    name: &str,
    seed: u64,
    cfg: &C,
    out: &mut OutputDir,
    summary: Value,
) -> Result<Value, CliError> {
    let mut outputs = out.files().to_vec();
    outputs.push("manifest.json".into());
    let manifest = json!({
        "subcommand": name,
        "seed": seed,
        "config": cfg,
        "outputs": outputs,
        "version": env!("CARGO_PKG_VERSION"),
    });
    out.json("manifest.json", &manifest)?;
    Ok(json!({ "subcommand": name, "outputs": outputs, "summary": summary }))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<Value, CliError> {
    configure_threads()?;
    let name = cli.command.name();
    let loaded = load_config(cli.config.as_deref(), name)?;
    let seed = cli.seed.or(loaded.seed).unwrap_or(0);
    let doc = loaded.config;
    let mut out = OutputDir::create(&cli.out)?;
    macro_rules! dispatch {
        ($args:expr, $base:expr, |$cfg:ident| $body:expr) => {{
            let mut $cfg = resolve(doc, $base)?;
            $args.apply(&mut $cfg);
            let summary = $body;
            finish(name, seed, &$cfg, &mut out, summary)
        }};
    }
    match &cli.command {
        Command::Slab(a) => dispatch!(a, SlabCmdConfig::default(), |c| commands::slab(&c, &mut out)?),
        Command::Transmit(a) => {
            dispatch!(a, SpectralConfig::transmit_default(), |c| commands::transmit(
                &c, &mut out
            )?)
        }
        Command::Reflect(a) => {
            let base = SpectralConfig::reflect_default();
            // reflect defaults differ from transmit only in p, so a config
            // without `p` keeps the reflect default
            let doc = doc.map(|mut d| {
                if let Some(obj) = d.as_object_mut() {
                    obj.entry("p").or_insert_with(|| serde_json::to_value(&base.p).unwrap());
                }
                d
            });
            let mut c = resolve(doc, base)?;
            a.apply(&mut c);
            let summary = commands::reflect(&c, &mut out)?;
            finish(name, seed, &c, &mut out, summary)
        }
        Command::Catalysis(a) => dispatch!(a, CatalysisConfig::default(), |c| commands::catalysis(&c, &mut out)?),
        Command::Mc(a) => dispatch!(a, McConfig::default(), |c| commands::mc(&c, seed, &mut out)?),
        Command::Image(a) => dispatch!(a, ImageConfig::default(), |c| commands::image(&c, seed, &mut out)?),
        Command::Mse(a) => dispatch!(a, MseConfig::default(), |c| commands::mse_cmd(&c, seed, &mut out)?),
        Command::OracleCheck(a) => {
            dispatch!(a, OracleConfig::default(), |c| commands::oracle_check(&c, &mut out)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.kind().to_string() + ": " + e.to_string().trim());
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

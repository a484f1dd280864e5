//! Parameter grids: `start:stop:step` (inclusive) or comma lists on the
//! command line, either of those or a JSON array in config files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Text(String),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridSpec::Values(v) if v.is_empty() => Err("grid is empty".into()),
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Text(s) => parse_grid(s),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_grid(s)?;
        Ok(GridSpec::Text(s.trim().to_owned()))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Text(s) => f.write_str(s),
            GridSpec::Values(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if !x.is_finite() {
        return Err(format!("'{}' is not finite", s.trim()));
    }
    Ok(x)
}

// Range points are rounded to 12 decimals so that 0.1 + 2 * 0.1 prints as 0.3.
fn tidy(x: f64) -> f64 {
    let y = (x * 1e12).round() / 1e12;
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("grid is empty".into());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(number).collect(),
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 {
                return Err(format!("grid step {step} must be positive"));
            }
            if stop < start {
                return Err(format!("grid stop {stop} is below start {start}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000_000 {
                return Err(format!("grid has {count} points"));
            }
            Ok((0..count).map(|k| tidy(start + k as f64 * step)).collect())
        }
        _ => Err(format!("'{s}' is neither start:stop:step nor a comma list")),
    }
}

//! Pixel-grid radar imaging with per-pixel coincidence counting.
//!
//! Every pixel is an independent measurement of `M` against its own
//! reflectivity, with one noise draw per pixel. Pixel `k` (row-major) uses
//! substream `k` of the master seed, so a rendering does not depend on
//! thread scheduling, and renderings at different `p` share their noise.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::check_range;
use crate::montecarlo::{estimator_m, simulate_counts, NoiseModel};
use crate::rng::{Purpose, SeedSequence};
use crate::{Error, Result};

pub const DEFAULT_WIDTH: usize = 128;
pub const DEFAULT_HEIGHT: usize = 64;
pub const DEFAULT_R_FG: f64 = 0.01;
pub const DEFAULT_R_BG: f64 = 0.001;

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectivityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ReflectivityMap {
    /// Row-major reflectivities with a foreground mask of the same shape.
    pub fn new(width: usize, height: usize, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!("image size {width}x{height} is empty")));
        }
        let n = width * height;
        if values.len() != n || mask.len() != n {
            return Err(Error::param(format!(
                "{width}x{height} map needs {n} values and mask entries, got {} and {}",
                values.len(),
                mask.len()
            )));
        }
        for &r in &values {
            check_range("pixel reflectance", r, 0.0, 1.0)?;
        }
        Ok(Self {
            width,
            height,
            values,
            mask,
        })
    }

    pub fn uniform(width: usize, height: usize, reflectance: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![reflectance; width * height],
            vec![false; width * height],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn foreground_fraction(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 / self.mask.len() as f64
    }

    /// Reads an ASCII (P2) graymap: white maps to `r_fg`, black to `r_bg`,
    /// linearly in between. Pixels at or above half scale form the mask.
    pub fn from_pgm<R: BufRead>(reader: R, r_fg: f64, r_bg: f64) -> Result<Self> {
        check_range("R_fg", r_fg, 0.0, 1.0)?;
        check_range("R_bg", r_bg, 0.0, 1.0)?;
        let mut tokens = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let data = line.split('#').next().unwrap_or("");
            tokens.extend(data.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        if it.next().as_deref() != Some("P2") {
            return Err(Error::Parse("expected an ASCII PGM (P2) header".into()));
        }
        let mut number = |what: &str| -> Result<u64> {
            let tok = it
                .next()
                .ok_or_else(|| Error::Parse(format!("PGM ended before {what}")))?;
            tok.parse()
                .map_err(|_| Error::Parse(format!("PGM {what} '{tok}' is not an integer")))
        };
        let width = number("width")? as usize;
        let height = number("height")? as usize;
        let maxval = number("maxval")?;
        if maxval == 0 {
            return Err(Error::Parse("PGM maxval is 0".into()));
        }
        let mut values = Vec::with_capacity(width * height);
        let mut mask = Vec::with_capacity(width * height);
        for _ in 0..width * height {
            let v = number("pixel")?;
            if v > maxval {
                return Err(Error::Parse(format!("PGM pixel {v} exceeds maxval {maxval}")));
            }
            let frac = v as f64 / maxval as f64;
            values.push(r_bg + (r_fg - r_bg) * frac);
            mask.push(2 * v >= maxval);
        }
        Self::new(width, height, values, mask)
    }

    /// Reads a numeric CSV grid of reflectivities (one image row per line).
    /// The mask marks pixels above the midpoint of the value range.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut width = None;
        let mut height = 0;
        for record in rdr.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("'{s}' is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse(format!(
                        "row {} has {} columns, expected {w}",
                        height + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            values.extend(row);
            height += 1;
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let mid = 0.5 * (lo + hi);
        let mask = values.iter().map(|&v| v > mid).collect();
        Self::new(width.unwrap_or(0), height, values, mask)
    }
}

// 5x7 glyphs, '#' is foreground.
const GLYPH_2: [&str; 7] = [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"];
const GLYPH_0: [&str; 7] = [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."];
const GLYPH_7: [&str; 7] = ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."];

/// The "207" test target: three glyphs one cell apart, scaled by an integer
/// factor with at least one cell of margin and centered.
pub fn pattern_207(width: usize, height: usize, r_fg: f64, r_bg: f64) -> Result<ReflectivityMap> {
    check_range("R_fg", r_fg, 0.0, 1.0)?;
    check_range("R_bg", r_bg, 0.0, 1.0)?;
    const COLS: usize = 17;
    const ROWS: usize = 7;
    let scale = (width / (COLS + 2)).min(height / (ROWS + 2));
    if scale == 0 {
        return Err(Error::param(format!(
            "{width}x{height} is too small for the 207 pattern (need at least {}x{})",
            COLS + 2,
            ROWS + 2
        )));
    }
    let x0 = (width - COLS * scale) / 2;
    let y0 = (height - ROWS * scale) / 2;
    let cell = |cx: usize, cy: usize| -> bool {
        let glyph = match cx / 6 {
            0 => &GLYPH_2,
            1 => &GLYPH_0,
            _ => &GLYPH_7,
        };
        let gx = cx % 6;
        gx < 5 && glyph[cy].as_bytes()[gx] == b'#'
    };
    let mut mask = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            if x < x0 || y < y0 {
                continue;
            }
            let (cx, cy) = ((x - x0) / scale, (y - y0) / scale);
            if cx < COLS && cy < ROWS {
                mask[y * width + x] = cell(cx, cy);
            }
        }
    }
    let values = mask.iter().map(|&m| if m { r_fg } else { r_bg }).collect();
    ReflectivityMap::new(width, height, values, mask)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageResult {
    pub width: usize,
    pub height: usize,
    /// Estimated `M` per pixel; `None` where the estimator had no events.
    pub values: Vec<Option<f64>>,
    pub p: f64,
    /// Contrast-to-noise ratio against the map's mask, `None` if either
    /// class has no valid pixel.
    pub cnr: Option<f64>,
    pub failures: u64,
}

/// Simulates one noisy measurement of `M` per pixel.
pub fn render_image(map: &ReflectivityMap, p: f64, trials: u64, noise: &NoiseModel, seed: u64) -> Result<ImageResult> {
    check_range("p", p, 0.0, 1.0)?;
    if trials == 0 {
        return Err(Error::param("trials N must be >= 1"));
    }
    let seq = SeedSequence::new(seed);
    let values: Vec<Option<f64>> = map
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &r)| {
            let counts =
                simulate_counts(r, p, trials, &mut seq.stream(Purpose::Counts, k as u64)).expect("validated map");
            let delta = noise.draw(&mut seq.stream(Purpose::Noise, k as u64));
            estimator_m(&counts, delta).ok()
        })
        .collect();
    let failures = values.iter().filter(|v| v.is_none()).count() as u64;
    let mut img = ImageResult {
        width: map.width,
        height: map.height,
        values,
        p,
        cnr: None,
        failures,
    };
    img.cnr = contrast_to_noise(&img, &map.mask).ok();
    Ok(img)
}

fn class_stats(values: impl Iterator<Item = f64>) -> (usize, f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let ss = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (n, mean, ss)
}

/// `(mean_fg - mean_bg) / s_pooled` over the valid pixels, where `s_pooled`
/// is the pooled within-class standard deviation. A constant image gives 0;
/// a noiseless image with nonzero contrast gives an infinite ratio.
pub fn contrast_to_noise(img: &ImageResult, mask: &[bool]) -> Result<f64> {
    if mask.len() != img.values.len() {
        return Err(Error::param(format!(
            "mask has {} entries for {} pixels",
            mask.len(),
            img.values.len()
        )));
    }
    let class = |fg: bool| {
        img.values
            .iter()
            .zip(mask)
            .filter(move |(v, &m)| m == fg && v.is_some())
            .map(|(v, _)| v.unwrap())
    };
    let (nf, mf, ssf) = class_stats(class(true));
    let (nb, mb, ssb) = class_stats(class(false));
    if nf == 0 || nb == 0 {
        return Err(Error::param(
            "contrast needs valid pixels in both foreground and background",
        ));
    }
    let contrast = mf - mb;
    let dof = (nf + nb).saturating_sub(2).max(1);
    let pooled = ((ssf + ssb) / dof as f64).sqrt();
    if contrast == 0.0 {
        return Ok(0.0);
    }
    Ok(contrast / pooled)
}

/// 16-bit ASCII PGM, linear over `[0, max M]`; negative and failed pixels
/// are written as 0.
pub fn write_pgm<W: Write>(img: &ImageResult, mut out: W) -> Result<()> {
    const MAXVAL: f64 = 65535.0;
    let top = img.values.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
    writeln!(out, "P2")?;
    writeln!(out, "# p = {}", img.p)?;
    writeln!(out, "{} {}", img.width, img.height)?;
    writeln!(out, "65535")?;
    for row in img.values.chunks(img.width) {
        let line: Vec<String> = row
            .iter()
            .map(|v| {
                let level = match v {
                    Some(m) if top > 0.0 => (m.max(0.0) / top * MAXVAL).round(),
                    _ => 0.0,
                };
                (level as u32).to_string()
            })
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Raw per-pixel estimates, one image row per line; failed pixels are `nan`.
pub fn write_csv<W: Write>(img: &ImageResult, out: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in img.values.chunks(img.width) {
        wtr.write_record(row.iter().map(|v| match v {
            Some(m) => format!("{m:e}"),
            None => "nan".to_owned(),
        }))?;
    }
    wtr.flush()?;
    Ok(())
}

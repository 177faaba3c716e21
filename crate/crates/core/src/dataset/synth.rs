//! Seeded procedural textures for experiments without a real corpus.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixel_map::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Two-level squares of side `period`.
    Checker,
    /// Sinusoidal bands with wavelength `period`.
    Stripes,
    /// Smoothly interpolated random lattice values (value noise).
    BlobNoise,
    /// Lattice gradient noise (Perlin).
    GradientNoise,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Checker => "checker",
            Family::Stripes => "stripes",
            Family::BlobNoise => "blob-noise",
            Family::GradientNoise => "gradient-noise",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "checker" => Ok(Family::Checker),
            "stripes" => Ok(Family::Stripes),
            "blob-noise" => Ok(Family::BlobNoise),
            "gradient-noise" => Ok(Family::GradientNoise),
            _ => Err(Error::invalid(format!("unknown texture family {s:?}"))),
        }
    }
}

/// Parameters of one synthetic texture.
///
/// `orientation` is in degrees. Checker and stripes accept 0, 45, 90 and
/// 135; the noise families accept 0 and 90. Orientation 90 is always the
/// transpose of orientation 0 generated at the transposed size.
/// `amplitude` bounds uniform per-pixel noise added on top of the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SynthSpec {
    pub family: Family,
    pub period: u32,
    pub orientation: u32,
    pub amplitude: u32,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
}

impl SynthSpec {
    pub fn new(family: Family, period: u32, seed: u64) -> Self {
        SynthSpec {
            family,
            period,
            orientation: 0,
            amplitude: 0,
            seed,
            width: 64,
            height: 64,
        }
    }

    pub fn orientation(mut self, degrees: u32) -> Self {
        self.orientation = degrees;
        self
    }

    pub fn amplitude(mut self, amplitude: u32) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::invalid(format!(
                "synthetic textures are at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        if self.amplitude > 128 {
            return Err(Error::invalid(format!(
                "noise amplitude {} exceeds 128",
                self.amplitude
            )));
        }
        if self.period < 2 {
            return Err(Error::invalid(format!(
                "period must be at least 2, got {}",
                self.period
            )));
        }
        let allowed: &[u32] = match self.family {
            Family::Checker | Family::Stripes => &[0, 45, 90, 135],
            Family::BlobNoise | Family::GradientNoise => &[0, 90],
        };
        if !allowed.contains(&self.orientation) {
            return Err(Error::invalid(format!(
                "orientation {} not supported for {} (allowed {allowed:?})",
                self.orientation, self.family
            )));
        }
        Ok(())
    }
}

pub fn synth_texture(spec: &SynthSpec) -> Result<Raster> {
    spec.validate()?;
    if spec.orientation == 90 {
        let upright = SynthSpec {
            orientation: 0,
            width: spec.height,
            height: spec.width,
            ..*spec
        };
        return Ok(render(&upright).transpose());
    }
    Ok(render(spec))
}

fn render(spec: &SynthSpec) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width, spec.height);
    let p = spec.period as f64;
    let base: Vec<f64> = match spec.family {
        Family::Checker => {
            let ox = rng.random_range(0..2 * spec.period) as i64;
            let oy = rng.random_range(0..2 * spec.period) as i64;
            let period = spec.period as i64;
            grid(w, h, |x, y| {
                let (x, y) = (x as i64, y as i64);
                let (u, v) = match spec.orientation {
                    0 => (x + ox, y + oy),
                    // diamonds: axes along the two diagonals
                    _ => (x + y + ox, x - y + h as i64 + oy),
                };
                if (u.div_euclid(period) + v.div_euclid(period)) % 2 == 0 {
                    64.0
                } else {
                    192.0
                }
            })
        }
        Family::Stripes => {
            let phase = rng.random::<f64>() * p;
            grid(w, h, |x, y| {
                let u = match spec.orientation {
                    0 => x as f64,
                    45 => (x + y) as f64,
                    _ => (x + h - 1 - y) as f64,
                };
                128.0 + 80.0 * (std::f64::consts::TAU * (u + phase) / p).sin()
            })
        }
        Family::BlobNoise => {
            let lattice = Lattice::new(&mut rng, w, h, p, |r| r.random::<f64>());
            grid(w, h, |x, y| {
                let v = lattice.sample(x, y, |c, _, _| *c);
                40.0 + 176.0 * v
            })
        }
        Family::GradientNoise => {
            let lattice = Lattice::new(&mut rng, w, h, p, |r| {
                let a = r.random::<f64>() * std::f64::consts::TAU;
                (a.cos(), a.sin())
            });
            grid(w, h, |x, y| {
                let v = lattice.sample(x, y, |g, dx, dy| g.0 * dx + g.1 * dy);
                128.0 + 180.0 * v
            })
        }
    };
    let amp = spec.amplitude as i32;
    let data = base
        .into_iter()
        .map(|v| {
            let noise = if amp > 0 {
                rng.random_range(-amp..=amp)
            } else {
                0
            };
            (v.round() as i32 + noise).clamp(0, 255) as u8
        })
        .collect();
    Raster::new(w, h, data).expect("size validated")
}

fn grid(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            out.push(f(x, y));
        }
    }
    out
}

/// Random values on a square lattice of spacing `cell`, shifted by a random
/// sub-cell offset and blended with a quintic fade.
struct Lattice<T> {
    cols: usize,
    cell: f64,
    offset: (f64, f64),
    nodes: Vec<T>,
}

impl<T> Lattice<T> {
    fn new(
        rng: &mut ChaCha8Rng,
        w: usize,
        h: usize,
        cell: f64,
        mut node: impl FnMut(&mut ChaCha8Rng) -> T,
    ) -> Self {
        let offset = (rng.random::<f64>() * cell, rng.random::<f64>() * cell);
        let cols = (w as f64 / cell).ceil() as usize + 2;
        let rows = (h as f64 / cell).ceil() as usize + 2;
        let nodes = (0..cols * rows).map(|_| node(rng)).collect();
        Lattice {
            cols,
            cell,
            offset,
            nodes,
        }
    }

    /// Blends `corner(node, dx, dy)` over the four surrounding nodes, where
    /// `(dx, dy)` is the offset from the node in cell units.
    fn sample(&self, x: usize, y: usize, corner: impl Fn(&T, f64, f64) -> f64) -> f64 {
        let fx = (x as f64 + self.offset.0) / self.cell;
        let fy = (y as f64 + self.offset.1) / self.cell;
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let at = |i: usize, j: usize| &self.nodes[j * self.cols + i];
        let fade = |t: f64| t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let (sx, sy) = (fade(tx), fade(ty));
        let top = lerp(
            corner(at(ix, iy), tx, ty),
            corner(at(ix + 1, iy), tx - 1.0, ty),
            sx,
        );
        let bottom = lerp(
            corner(at(ix, iy + 1), tx, ty - 1.0),
            corner(at(ix + 1, iy + 1), tx - 1.0, ty - 1.0),
            sx,
        );
        lerp(top, bottom, sy)
    }
}

/// One class of the shipped synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthClass {
    pub name: &'static str,
    pub family: Family,
    pub period: u32,
    pub orientation: u32,
    pub amplitude: u32,
}

/// The eight classes of the desk-scale corpus. Pairs of classes share a
/// family and differ only in scale or orientation, so they are not
/// trivially separable.
pub const CORPUS_CLASSES: [SynthClass; 8] = [
    SynthClass {
        name: "checker-p6",
        family: Family::Checker,
        period: 6,
        orientation: 0,
        amplitude: 8,
    },
    SynthClass {
        name: "checker-p8-d45",
        family: Family::Checker,
        period: 8,
        orientation: 45,
        amplitude: 8,
    },
    SynthClass {
        name: "stripes-p7",
        family: Family::Stripes,
        period: 7,
        orientation: 0,
        amplitude: 8,
    },
    SynthClass {
        name: "stripes-p7-r45",
        family: Family::Stripes,
        period: 7,
        orientation: 45,
        amplitude: 8,
    },
    SynthClass {
        name: "blob-p6",
        family: Family::BlobNoise,
        period: 6,
        orientation: 0,
        amplitude: 8,
    },
    SynthClass {
        name: "blob-p10",
        family: Family::BlobNoise,
        period: 10,
        orientation: 0,
        amplitude: 8,
    },
    SynthClass {
        name: "gradient-p8",
        family: Family::GradientNoise,
        period: 8,
        orientation: 0,
        amplitude: 8,
    },
    SynthClass {
        name: "gradient-p12",
        family: Family::GradientNoise,
        period: 12,
        orientation: 0,
        amplitude: 8,
    },
];

pub const CORPUS_SAMPLES_PER_CLASS: usize = 10;
pub const CORPUS_SIDE: usize = 64;

/// Seeds of the three shipped corpora.
pub const CORPUS_SEEDS: [u64; 3] = [1, 2, 3];

/// `(class name, sample spec)` for every image of the corpus built from
/// `seed`, class-major.
pub fn corpus_specs(seed: u64) -> Vec<(&'static str, SynthSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CORPUS_CLASSES
        .iter()
        .flat_map(|c| (0..CORPUS_SAMPLES_PER_CLASS).map(move |_| c))
        .map(|c| {
            let spec = SynthSpec::new(c.family, c.period, rng.random())
                .orientation(c.orientation)
                .amplitude(c.amplitude)
                .size(CORPUS_SIDE, CORPUS_SIDE);
            (c.name, spec)
        })
        .collect()
}

/// Rendered corpus for `seed`: `(class name, raster)` pairs, class-major.
pub fn synthetic_corpus(seed: u64) -> Vec<(String, Raster)> {
    corpus_specs(seed)
        .into_iter()
        .map(|(name, spec)| {
            (
                name.to_string(),
                synth_texture(&spec).expect("corpus specs are valid"),
            )
        })
        .collect()
}

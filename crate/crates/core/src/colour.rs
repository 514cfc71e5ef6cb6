//! Shirt segmentation, colour classification and hanger insertion planning.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB.
    pub pixels: Vec<[u8; 3]>,
}

impl ColourImage {
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.pixels[y * self.width + x] = rgb;
    }

    /// 3×3 mean filter with clamped borders.
    pub fn box_blur(&self) -> ColourImage {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                let mut sum = [0u32; 3];
                let mut n = 0;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let xx = (x as i64 + dx).clamp(0, self.width as i64 - 1) as usize;
                        let yy = (y as i64 + dy).clamp(0, self.height as i64 - 1) as usize;
                        let p = self.get(xx, yy);
                        for c in 0..3 {
                            sum[c] += u32::from(p[c]);
                        }
                        n += 1;
                    }
                }
                out.set(x, y, sum.map(|s| ((s as f64 / n as f64).round()) as u8));
            }
        }
        out
    }
}

/// Hue in degrees [0, 360), saturation and lightness in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

pub fn rgb_to_hsl(rgb: [f64; 3]) -> Hsl {
    let [r, g, b] = rgb.map(|c| c / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    let d = max - min;
    if d == 0.0 {
        return Hsl { h: 0.0, s: 0.0, l };
    }
    let s = d / (1.0 - (2.0 * l - 1.0).abs());
    let h = if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    Hsl {
        h: h.rem_euclid(360.0),
        s,
        l,
    }
}

pub fn hsl_to_rgb(hsl: Hsl) -> [u8; 3] {
    let c = (1.0 - (2.0 * hsl.l - 1.0).abs()) * hsl.s;
    let hp = hsl.h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = hsl.l - c / 2.0;
    [r, g, b].map(|v| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

fn rgb_f(p: [u8; 3]) -> [f64; 3] {
    p.map(f64::from)
}

/// Circular distance between hues in degrees.
pub fn hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentParams {
    pub hue_bins: usize,
    pub light_bins: usize,
    pub sat_bins: usize,
    /// Pixels below this saturation carry no hue.
    pub min_saturation: f64,
    pub min_pixels: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            hue_bins: 12,
            light_bins: 5,
            sat_bins: 4,
            min_saturation: 0.1,
            min_pixels: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColourError {
    #[error("segmented region has {0} pixels")]
    EmptyMask(usize),
    #[error("hue is equally close to both base colours")]
    Ambiguous,
    #[error("palette must hold two base colours with three levels each")]
    BadPalette,
    #[error("shirt already on the rack")]
    DuplicateShirt,
    #[error("shirt not in the total order")]
    UnknownShirt,
}

/// Hue bins are centred on multiples of the bin width so pure red does not
/// straddle the wrap.
fn hue_bin(h: f64, bins: usize) -> usize {
    let w = 360.0 / bins as f64;
    (((h + w / 2.0).rem_euclid(360.0) / w) as usize).min(bins - 1)
}

fn unit_bin(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

fn most_populated(bins: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in bins.iter().enumerate() {
        if c > bins[best] {
            best = i;
        }
    }
    best
}

/// Mask of the dominant single-colour region. Histograms are taken over
/// the blurred image; bin membership is decided on the original pixels.
pub fn segment_dominant_region(img: &ColourImage, params: &SegmentParams) -> Result<Vec<bool>, ColourError> {
    let blurred = img.box_blur();
    let blur_hsl: Vec<Hsl> = blurred.pixels.iter().map(|&p| rgb_to_hsl(rgb_f(p))).collect();
    let orig_hsl: Vec<Hsl> = img.pixels.iter().map(|&p| rgb_to_hsl(rgb_f(p))).collect();
    let chromatic = |h: &Hsl| h.s >= params.min_saturation;

    let mut hist = vec![0usize; params.hue_bins];
    for h in blur_hsl.iter().filter(|h| chromatic(h)) {
        hist[hue_bin(h.h, params.hue_bins)] += 1;
    }
    let hb = most_populated(&hist);
    let mut mask: Vec<bool> = orig_hsl
        .iter()
        .map(|h| chromatic(h) && hue_bin(h.h, params.hue_bins) == hb)
        .collect();

    type Channel = fn(&Hsl) -> f64;
    let channels: [(Channel, usize); 2] = [(|h| h.l, params.light_bins), (|h| h.s, params.sat_bins)];
    for (value, bins) in channels {
        let mut hist = vec![0usize; bins];
        for (i, h) in blur_hsl.iter().enumerate() {
            if mask[i] {
                hist[unit_bin(value(h), bins)] += 1;
            }
        }
        let best = most_populated(&hist);
        for (i, h) in orig_hsl.iter().enumerate() {
            mask[i] = mask[i] && unit_bin(value(h), bins) == best;
        }
    }

    let largest = largest_component(&mask, img.width, img.height);
    let count = largest.iter().filter(|&&m| m).count();
    if count < params.min_pixels.max(1) {
        return Err(ColourError::EmptyMask(count));
    }
    Ok(largest)
}

/// Largest 4-connected component; ties go to the component met first in
/// row-major order.
fn largest_component(mask: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut label = vec![usize::MAX; mask.len()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        label[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask[j] && label[j] == usize::MAX {
                    label[j] = id;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        sizes.push(size);
    }
    if sizes.is_empty() {
        return vec![false; mask.len()];
    }
    let best = most_populated(&sizes);
    label.iter().map(|&l| l == best).collect()
}

pub fn mean_rgb(img: &ColourImage, mask: &[bool]) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut n = 0.0;
    for (p, _) in img.pixels.iter().zip(mask).filter(|(_, &m)| m) {
        for c in 0..3 {
            sum[c] += f64::from(p[c]);
        }
        n += 1.0;
    }
    sum.map(|s| s / n)
}

/// Base colour index and brightness level (1 darkest .. 3 lightest).
/// Ordering is the rack order: base first, then brightness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShirtClass {
    pub base: u8,
    pub brightness: u8,
}

impl ShirtClass {
    pub fn new(base: u8, brightness: u8) -> Self {
        Self { base, brightness }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub class: ShirtClass,
    pub rgb: [u8; 3],
}

/// Lightness of brightness levels 1..=3.
pub const LEVEL_LIGHTNESS: [f64; 3] = [0.3, 0.5, 0.7];
/// Centre of a saturation bin of the default segmentation histogram.
pub const PALETTE_SATURATION: f64 = 0.625;

/// Reference colours for two base hues at three brightness levels.
pub fn palette_from_hues(base_hues: [f64; 2]) -> Vec<PaletteEntry> {
    let mut out = Vec::with_capacity(6);
    for (b, &h) in base_hues.iter().enumerate() {
        for (i, &l) in LEVEL_LIGHTNESS.iter().enumerate() {
            out.push(PaletteEntry {
                class: ShirtClass::new(b as u8, i as u8 + 1),
                rgb: hsl_to_rgb(Hsl {
                    h,
                    s: PALETTE_SATURATION,
                    l,
                }),
            });
        }
    }
    out
}

/// Sorted rack order of all palette classes.
pub fn total_order(palette: &[PaletteEntry]) -> Vec<ShirtClass> {
    let mut v: Vec<ShirtClass> = palette.iter().map(|e| e.class).collect();
    v.sort();
    v.dedup();
    v
}

fn circular_mean(hues: &[f64]) -> f64 {
    let (s, c) = hues.iter().fold((0.0, 0.0), |(s, c), h| {
        let r = h.to_radians();
        (s + r.sin(), c + r.cos())
    });
    s.atan2(c).to_degrees().rem_euclid(360.0)
}

pub fn classify_shirt(mean: [f64; 3], palette: &[PaletteEntry], hue_margin: f64) -> Result<ShirtClass, ColourError> {
    let mut bases: Vec<u8> = palette.iter().map(|e| e.class.base).collect();
    bases.sort();
    bases.dedup();
    if bases.len() != 2 || palette.len() != 6 {
        return Err(ColourError::BadPalette);
    }
    let hsl = rgb_to_hsl(mean);
    let mut dists: Vec<(f64, u8)> = bases
        .iter()
        .map(|&b| {
            let hues: Vec<f64> = palette
                .iter()
                .filter(|e| e.class.base == b)
                .map(|e| rgb_to_hsl(rgb_f(e.rgb)).h)
                .collect();
            (hue_distance(hsl.h, circular_mean(&hues)), b)
        })
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    if dists[1].0 - dists[0].0 < hue_margin {
        return Err(ColourError::Ambiguous);
    }
    let base = dists[0].1;
    let level = palette
        .iter()
        .filter(|e| e.class.base == base)
        .map(|e| ((rgb_to_hsl(rgb_f(e.rgb)).l - hsl.l).abs(), e.class.brightness))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("palette has levels")
        .1;
    Ok(ShirtClass::new(base, level))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RackSide {
    Left,
    Right,
}

impl fmt::Display for RackSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RackSide::Left => "left",
            RackSide::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub side: RackSide,
    /// 1-based slot counted from `side`.
    pub position: usize,
    pub rack: Vec<ShirtClass>,
    pub moves: usize,
}

impl Insertion {
    pub fn instruction(&self) -> String {
        format!("{} | {}", self.side, self.position)
    }
}

/// Where to hang `new` so the rack stays sorted, counted from whichever end
/// needs fewer hangers shifted (left on ties).
pub fn insertion_plan(rack: &[ShirtClass], new: ShirtClass, order: &[ShirtClass]) -> Result<Insertion, ColourError> {
    if rack.contains(&new) {
        return Err(ColourError::DuplicateShirt);
    }
    let rank = |c: &ShirtClass| order.iter().position(|o| o == c).ok_or(ColourError::UnknownShirt);
    let r = rank(&new)?;
    let mut slot = 0;
    for c in rack {
        if rank(c)? < r {
            slot += 1;
        }
    }
    let n = rack.len();
    let (left, right) = (slot, n - slot);
    let (side, position, moves) = if left <= right {
        (RackSide::Left, slot + 1, left)
    } else {
        (RackSide::Right, n - slot + 1, right)
    };
    let mut next = rack.to_vec();
    next.insert(slot, new);
    Ok(Insertion {
        side,
        position,
        rack: next,
        moves,
    })
}

/// Synthetic photo of a shirt held up against a grey background.
pub fn shirt_image(rgb: [u8; 3], width: usize, height: usize, noise: u8, seed: u64) -> ColourImage {
    let mut rng = seeding::rng(seed, 0xC010);
    let mut img = ColourImage::filled(width, height, [120, 120, 118]);
    let (x0, x1) = (width / 5, width - width / 5);
    let (y0, y1) = (height / 6, height - height / 10);
    for y in 0..height {
        for x in 0..width {
            // Torso plus sleeves near the top.
            let torso = (x0..x1).contains(&x) && (y0..y1).contains(&y);
            let sleeves = y >= y0 && y < y0 + height / 5;
            let base = if torso || sleeves { rgb } else { img.get(x, y) };
            let jitter = |c: u8, rng: &mut rand_chacha::ChaCha8Rng| {
                let n = i16::from(noise);
                (i16::from(c) + rng.random_range(-n..=n)).clamp(0, 255) as u8
            };
            let px = [
                jitter(base[0], &mut rng),
                jitter(base[1], &mut rng),
                jitter(base[2], &mut rng),
            ];
            img.set(x, y, px);
        }
    }
    img
}

use std::collections::HashMap;

use image::RgbImage;

use super::{hsl_within, rgb_to_hsl, rgb_to_hsl_f64, ColorError, ColorTolerance, Hsl};
use crate::model::{ColorEntry, Palette, MAX_PALETTE_LEN};

/// Grouping and merging parameters for [`extract_palette_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct PaletteConfig {
    pub hue_buckets: u32,
    pub light_buckets: u32,
    pub sat_buckets: u32,
    pub merge_tolerance: ColorTolerance,
    pub k: usize,
}

impl Default for PaletteConfig {
    fn default() -> Self {
        Self {
            hue_buckets: 24,
            light_buckets: 8,
            sat_buckets: 4,
            merge_tolerance: ColorTolerance::PALETTE_MERGE,
            k: MAX_PALETTE_LEN,
        }
    }
}

#[derive(Debug, Clone)]
struct Group {
    key: (u32, u32, u32),
    count: u64,
    sum: [u64; 3],
}

impl Group {
    fn mean(&self) -> [f64; 3] {
        let n = self.count as f64;
        [
            self.sum[0] as f64 / n,
            self.sum[1] as f64 / n,
            self.sum[2] as f64 / n,
        ]
    }

    fn mean_hsl(&self) -> Hsl {
        let m = self.mean();
        rgb_to_hsl_f64(m[0] / 255.0, m[1] / 255.0, m[2] / 255.0)
    }

    fn absorb(&mut self, other: &Group) {
        self.count += other.count;
        for c in 0..3 {
            self.sum[c] += other.sum[c];
        }
    }
}

fn bucket(value: f64, span: f64, buckets: u32) -> u32 {
    ((value / span * buckets as f64) as u32).min(buckets - 1)
}

pub fn extract_palette(image: &RgbImage, k: usize) -> Result<Palette, ColorError> {
    extract_palette_with(
        image,
        &PaletteConfig {
            k,
            ..PaletteConfig::default()
        },
    )
}

/// Groups pixels by quantized (hue, lightness, saturation), averages each
/// group, folds near-duplicate groups into larger ones and keeps the `k`
/// largest. Proportions are relative to the pixels covered by kept entries.
///
/// Depends only on the pixel multiset, never on pixel positions.
pub fn extract_palette_with(
    image: &RgbImage,
    config: &PaletteConfig,
) -> Result<Palette, ColorError> {
    if image.width() == 0 || image.height() == 0 {
        return Err(ColorError::EmptyImage);
    }
    let k = config.k.clamp(1, MAX_PALETTE_LEN);

    let mut histogram: HashMap<[u8; 3], u64> = HashMap::new();
    for px in image.pixels() {
        *histogram.entry(px.0).or_default() += 1;
    }

    let mut groups: HashMap<(u32, u32, u32), Group> = HashMap::new();
    for (rgb, count) in histogram {
        let hsl = rgb_to_hsl(rgb);
        let key = (
            bucket(hsl.h, 360.0, config.hue_buckets),
            bucket(hsl.l, 1.0, config.light_buckets),
            bucket(hsl.s, 1.0, config.sat_buckets),
        );
        let g = groups.entry(key).or_insert(Group {
            key,
            count: 0,
            sum: [0; 3],
        });
        g.count += count;
        for (sum, channel) in g.sum.iter_mut().zip(rgb) {
            *sum += channel as u64 * count;
        }
    }

    let mut ranked: Vec<Group> = groups.into_values().collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then(a.key.cmp(&b.key)));

    let mut kept: Vec<Group> = Vec::new();
    for group in ranked {
        let hsl = group.mean_hsl();
        match kept
            .iter_mut()
            .find(|k| hsl_within(hsl, k.mean_hsl(), &config.merge_tolerance))
        {
            Some(target) => target.absorb(&group),
            None => kept.push(group),
        }
    }
    // Stable: merged groups keep their rank order on equal counts.
    kept.sort_by_key(|g| std::cmp::Reverse(g.count));
    kept.truncate(k);

    let total: u64 = kept.iter().map(|g| g.count).sum();
    let entries = kept
        .iter()
        .map(|g| {
            let m = g.mean();
            let rgb = [m[0].round() as u8, m[1].round() as u8, m[2].round() as u8];
            ColorEntry {
                rgb,
                hsl: rgb_to_hsl(rgb),
                proportion: g.count as f64 / total as f64,
            }
        })
        .collect();
    Ok(Palette::new(entries).expect("extracted palette satisfies palette invariants"))
}

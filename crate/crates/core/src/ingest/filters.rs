use std::collections::{BTreeSet, HashMap};

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::hierarchy::real_nodes;
use super::IngestError;
use crate::model::{GuiNode, ScreenCapture};

const LAUNCHER_PACKAGE: &str = "com.android.launcher";

/// Home-screen captures: some node belongs to the stock launcher package.
pub fn is_launcher_screen(capture: &ScreenCapture) -> bool {
    hierarchy_has_launcher(&capture.hierarchy)
}

pub fn hierarchy_has_launcher(root: &GuiNode) -> bool {
    root.iter().any(|n| n.package.contains(LAUNCHER_PACKAGE))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayParams {
    /// Share of width/height taken from each side as the border frame.
    pub border_fraction: f64,
    pub bins_per_channel: u32,
    /// Minimum share of border pixels in the dominant bin.
    pub dominance_threshold: f64,
    /// Dominant bin center must be at most this light.
    pub max_lightness: f64,
}

impl Default for OverlayParams {
    fn default() -> Self {
        Self {
            border_fraction: 0.1,
            bins_per_channel: 16,
            dominance_threshold: 0.85,
            max_lightness: 0.35,
        }
    }
}

/// Flags screens whose border frame is dominated by one dark color, the
/// signature of a tutorial scrim laid over the app.
pub fn detect_overlay(image: &RgbImage, params: &OverlayParams) -> Result<bool, IngestError> {
    let (w, h) = image.dimensions();
    let bw = (w as f64 * params.border_fraction).floor() as u32;
    let bh = (h as f64 * params.border_fraction).floor() as u32;
    if w == 0 || h == 0 || (bw == 0 && bh == 0) {
        return Err(IngestError::ImageTooSmall {
            width: w,
            height: h,
        });
    }
    let bins = params.bins_per_channel.clamp(1, 256);
    let quantize = |c: u8| c as u32 * bins / 256;

    let mut histogram: HashMap<[u32; 3], u64> = HashMap::new();
    let mut total = 0u64;
    for (x, y, px) in image.enumerate_pixels() {
        let in_frame = x < bw || x >= w - bw || y < bh || y >= h - bh;
        if in_frame {
            *histogram
                .entry([quantize(px[0]), quantize(px[1]), quantize(px[2])])
                .or_default() += 1;
            total += 1;
        }
    }
    let (bin, count) = histogram
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .expect("frame is non-empty");
    let share = count as f64 / total as f64;

    let width = 256.0 / bins as f64;
    let center: Vec<f64> = bin
        .iter()
        .map(|&b| (b as f64 + 0.5) * width / 255.0)
        .collect();
    let max = center.iter().cloned().fold(f64::MIN, f64::max);
    let min = center.iter().cloned().fold(f64::MAX, f64::min);
    let lightness = (max + min) / 2.0;

    Ok(share >= params.dominance_threshold && lightness <= params.max_lightness)
}

/// Layout-only class names; screens made solely of these are dropped.
pub fn default_container_classes() -> BTreeSet<String> {
    [
        "View",
        "ViewGroup",
        "FrameLayout",
        "LinearLayout",
        "RelativeLayout",
        "GridLayout",
        "TableLayout",
        "TableRow",
        "ScrollView",
        "HorizontalScrollView",
        "ListView",
        "RecyclerView",
        "ViewPager",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

/// True iff every node's final class segment is one of `container_classes`
/// (compared case-insensitively). An empty set matches nothing.
pub fn is_container_only(root: &GuiNode, container_classes: &BTreeSet<String>) -> bool {
    if container_classes.is_empty() {
        return false;
    }
    let lowered: BTreeSet<String> = container_classes.iter().map(|c| c.to_lowercase()).collect();
    real_nodes(root).all(|n| lowered.contains(&n.short_class()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AppMeta;
    use image::Rgb;

    fn capture(root: GuiNode) -> ScreenCapture {
        ScreenCapture {
            app: AppMeta {
                package_id: "p".into(),
                app_name: "P".into(),
                store_url: String::new(),
                description: None,
            },
            capture_id: "c".into(),
            image: RgbImage::new(1, 1),
            hierarchy: root,
            activity_name: None,
            visit_count: 1,
        }
    }

    #[test]
    fn launcher_detection() {
        let home = GuiNode::new("android.widget.FrameLayout").with_package("com.android.launcher3");
        assert!(is_launcher_screen(&capture(home)));
        let app = GuiNode::new("android.widget.FrameLayout").with_package("com.example.pizza");
        assert!(!is_launcher_screen(&capture(app.clone())));
        let nested = app.with_child(
            GuiNode::new("android.widget.TextView").with_package("com.android.launcher"),
        );
        assert!(is_launcher_screen(&capture(nested)));
    }

    /// Independent count of the dominant border bin share.
    fn brute_dominant_share(img: &RgbImage, fraction: f64, bins: u32) -> f64 {
        let (w, h) = img.dimensions();
        let bw = (w as f64 * fraction) as u32;
        let bh = (h as f64 * fraction) as u32;
        let mut counts = vec![0u64; (bins * bins * bins) as usize];
        let mut total = 0;
        for y in 0..h {
            for x in 0..w {
                if x >= bw && x < w - bw && y >= bh && y < h - bh {
                    continue;
                }
                let p = img.get_pixel(x, y);
                let q = |c: u8| (c as u32 * bins / 256) as usize;
                counts[q(p[0]) * (bins * bins) as usize + q(p[1]) * bins as usize + q(p[2])] += 1;
                total += 1;
            }
        }
        *counts.iter().max().unwrap() as f64 / total as f64
    }

    #[test]
    fn dark_frame_is_overlay() {
        let (w, h) = (100u32, 160u32);
        let img = RgbImage::from_fn(w, h, |x, y| {
            let fx = (w as f64 * 0.15) as u32;
            let fy = (h as f64 * 0.15) as u32;
            if x < fx || x >= w - fx || y < fy || y >= h - fy {
                Rgb([10, 10, 10])
            } else {
                Rgb([(x * 2) as u8, (y) as u8, 200])
            }
        });
        assert_eq!(brute_dominant_share(&img, 0.1, 16), 1.0);
        assert!(detect_overlay(&img, &OverlayParams::default()).unwrap());
    }

    #[test]
    fn white_is_not_overlay() {
        let img = RgbImage::from_pixel(50, 80, Rgb([255, 255, 255]));
        assert!(!detect_overlay(&img, &OverlayParams::default()).unwrap());
    }

    #[test]
    fn noisy_border_is_not_overlay() {
        use rand::{rngs::StdRng, Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        let img = RgbImage::from_fn(120, 200, |_, _| {
            Rgb([rng.random(), rng.random(), rng.random()])
        });
        let share = brute_dominant_share(&img, 0.1, 16);
        assert!(share < 0.85, "share {share}");
        assert!(!detect_overlay(&img, &OverlayParams::default()).unwrap());
    }

    #[test]
    fn too_small() {
        let img = RgbImage::from_pixel(5, 5, Rgb([0, 0, 0]));
        assert!(matches!(
            detect_overlay(&img, &OverlayParams::default()),
            Err(IngestError::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn container_only() {
        let set = default_container_classes();
        let layouts = GuiNode::new("android.view.View")
            .with_child(GuiNode::new("android.widget.GridLayout"))
            .with_child(GuiNode::new("android.widget.LinearLayout"));
        assert!(is_container_only(&layouts, &set));
        let with_button = layouts
            .clone()
            .with_child(GuiNode::new("android.widget.Button"));
        assert!(!is_container_only(&with_button, &set));
        assert!(!is_container_only(&layouts, &BTreeSet::new()));
    }
}

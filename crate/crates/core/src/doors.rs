//! Door symbols: isolate what is left after walls and windows are removed,
//! keep blobs that look like a door glyph, and snap them onto wall gaps.

use std::path::Path;

use crate::error::{Error, Result};
use crate::lines::Segment;
use crate::raster::{erase_region_mut, find_contours, load_gray, redraw, BBox, EdgeImage, GrayImage};
use crate::walls::{Orientation, Wall};

/// Minimum area of a residual blob worth classifying.
pub const MIN_OBJECT_AREA: i64 = 25;

/// 256-bin luminance histogram normalized to unit sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bins: [f64; 256],
}

impl Histogram {
    pub fn of(img: &GrayImage) -> Histogram {
        let mut counts = [0u64; 256];
        for &v in img.data() {
            counts[v as usize] += 1;
        }
        let n = img.data().len() as f64;
        let mut bins = [0.0; 256];
        for (b, c) in bins.iter_mut().zip(counts) {
            *b = c as f64 / n;
        }
        Histogram { bins }
    }

    /// Normalizes arbitrary non-negative weights; an all-zero input gives
    /// the uniform histogram.
    pub fn from_weights(w: &[f64]) -> Histogram {
        let mut bins = [0.0; 256];
        for (b, &v) in bins.iter_mut().zip(w) {
            *b = v.max(0.0);
        }
        let sum: f64 = bins.iter().sum();
        if sum > 0.0 {
            bins.iter_mut().for_each(|b| *b /= sum);
        } else {
            bins = [1.0 / 256.0; 256];
        }
        Histogram { bins }
    }
}

/// Sum over bins where `h1` is non-zero of `(h1 - h2)^2 / h1`.
/// `h1` is the reference; the measure is asymmetric.
pub fn chi_square(h1: &[f64], h2: &[f64]) -> f64 {
    h1.iter()
        .zip(h2)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| (a - b) * (a - b) / a)
        .sum()
}

/// `sqrt(1 - sum(sqrt(h1 * h2)))`. For unit-sum inputs `1 - BC` equals
/// `0.5 * sum((sqrt(h1) - sqrt(h2))^2)`, which is evaluated instead: it is
/// exactly zero for equal inputs and never negative.
pub fn bhattacharyya(h1: &[f64], h2: &[f64]) -> f64 {
    let d: f64 = h1
        .iter()
        .zip(h2)
        .map(|(a, b)| {
            let t = a.sqrt() - b.sqrt();
            t * t
        })
        .sum();
    (0.5 * d).sqrt().min(1.0)
}

/// Nearest-neighbor resample to `width` x `height`.
pub fn resize_nearest(img: &GrayImage, width: usize, height: usize) -> GrayImage {
    let (sw, sh) = (img.width(), img.height());
    GrayImage::from_fn(width, height, |x, y| {
        let sx = (x * sw / width).min(sw - 1);
        let sy = (y * sh / height).min(sh - 1);
        img.get(sx, sy)
    })
}

/// Mean-centered normalized cross-correlation. The template is resized to
/// the patch first.
pub fn template_match_ncc(patch: &GrayImage, template: &GrayImage) -> Result<f64> {
    let t = if template.width() == patch.width() && template.height() == patch.height() {
        template.clone()
    } else {
        resize_nearest(template, patch.width(), patch.height())
    };
    let p: Vec<f64> = patch.data().iter().map(|&v| v as f64).collect();
    let t: Vec<f64> = t.data().iter().map(|&v| v as f64).collect();
    ncc(&p, &t)
}

/// Mean-centered normalized cross-correlation of equal-length samples.
pub fn ncc(p: &[f64], t: &[f64]) -> Result<f64> {
    let n = p.len() as f64;
    let mp = p.iter().sum::<f64>() / n;
    let mt = t.iter().sum::<f64>() / n;
    let (mut num, mut sp, mut st) = (0.0, 0.0, 0.0);
    for (&a, &b) in p.iter().zip(t) {
        let (da, db) = (a - mp, b - mt);
        num += da * db;
        sp += da * da;
        st += db * db;
    }
    if sp == 0.0 || st == 0.0 {
        return Err(Error::DegenerateMatch);
    }
    Ok((num / (sp * st).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoorMatcherConfig {
    pub hist_threshold: f64,
    pub template_threshold: f64,
    pub sample_histograms: Vec<Histogram>,
    pub sample_templates: Vec<GrayImage>,
}

impl DoorMatcherConfig {
    /// Uses every image both as a histogram sample and as a template.
    pub fn from_images(images: &[GrayImage]) -> DoorMatcherConfig {
        DoorMatcherConfig {
            hist_threshold: 0.2,
            template_threshold: 0.9,
            sample_histograms: images.iter().map(Histogram::of).collect(),
            sample_templates: images.to_vec(),
        }
    }

    /// Glyphs rendered in memory by the synthetic generator; identical to
    /// the shipped asset files.
    pub fn builtin() -> DoorMatcherConfig {
        let images: Vec<GrayImage> = crate::synth::door_asset_set()
            .into_iter()
            .map(|(_, img)| img)
            .collect();
        DoorMatcherConfig::from_images(&images)
    }

    /// Loads every `.pgm`/`.png` in `dir`, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<DoorMatcherConfig> {
        let rd = std::fs::read_dir(dir)
            .map_err(|e| Error::UnreadableFile(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("pgm") | Some("png")
                )
            })
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no door assets in {}",
                dir.display()
            )));
        }
        let images = paths
            .iter()
            .map(load_gray)
            .collect::<Result<Vec<_>>>()?;
        Ok(DoorMatcherConfig::from_images(&images))
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |t: f64| t > 0.0 && t <= 1.0;
        if !in_range(self.hist_threshold) || !in_range(self.template_threshold) {
            return Err(Error::InvalidParameter(
                "door thresholds must lie in (0, 1]".into(),
            ));
        }
        if self.sample_histograms.is_empty() || self.sample_templates.is_empty() {
            return Err(Error::InvalidParameter("door matcher needs samples".into()));
        }
        Ok(())
    }
}

pub fn is_door_histogram(patch: &GrayImage, cfg: &DoorMatcherConfig) -> bool {
    let h = Histogram::of(patch);
    cfg.sample_histograms.iter().any(|s| {
        chi_square(&s.bins, &h.bins) < cfg.hist_threshold
            && bhattacharyya(&s.bins, &h.bins) < cfg.hist_threshold
    })
}

pub fn is_door_template(patch: &GrayImage, cfg: &DoorMatcherConfig) -> bool {
    cfg.sample_templates.iter().any(|t| {
        template_match_ncc(patch, t).is_ok_and(|score| score > cfg.template_threshold)
    })
}

pub fn classify_door(patch: &GrayImage, cfg: &DoorMatcherConfig) -> bool {
    is_door_histogram(patch, cfg) || is_door_template(patch, cfg)
}

pub fn isolate_residual(img: &EdgeImage, wall_boxes: &[BBox], window_boxes: &[BBox]) -> EdgeImage {
    let mut out = img.clone();
    for b in wall_boxes.iter().chain(window_boxes) {
        erase_region_mut(&mut out, b);
    }
    out
}

/// Contours, redraw, contours again; tiny blobs are dropped as noise.
pub fn segment_objects(img: &EdgeImage) -> Vec<BBox> {
    let first = find_contours(img);
    let merged = redraw(img, &first);
    find_contours(&merged)
        .into_iter()
        .map(|c| c.bbox)
        .filter(|b| b.area() >= MIN_OBJECT_AREA)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Door {
    pub bbox: BBox,
    pub segment: Segment,
    pub aligned: bool,
    pub wall_ids: Vec<u32>,
}

impl Door {
    /// Midline of the box along its longer side.
    pub fn midline(b: &BBox) -> Segment {
        let (cx, cy) = (
            (b.x_min + b.x_max).div_euclid(2),
            (b.y_min + b.y_max).div_euclid(2),
        );
        if b.width() >= b.height() {
            Segment::new(b.x_min, cy, b.x_max, cy)
        } else {
            Segment::new(cx, b.y_min, cx, b.y_max)
        }
    }

    pub fn orientation(&self) -> Orientation {
        let s = self.segment;
        if (s.x2 - s.x1).abs() >= (s.y2 - s.y1).abs() {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        }
    }
}

struct End {
    wall: usize,
    point: (i32, i32),
    /// +1 if the wall extends from this end towards increasing coordinate.
    outward: i32,
}

/// Grows the door box by the average wall thickness and looks for two
/// co-axial wall ends facing each other across the door center. If found the
/// door spans exactly between them; otherwise it keeps its box midline and
/// records whichever walls end nearby.
pub fn align_door(door_box: &BBox, walls: &[Wall], avg_thickness: u32) -> Door {
    let grown = door_box.expand(avg_thickness as i32);
    let (cx2, cy2) = (
        door_box.x_min + door_box.x_max,
        door_box.y_min + door_box.y_max,
    );
    let mut ends: Vec<End> = Vec::new();
    for (i, w) in walls.iter().enumerate() {
        let [a, b] = w.endpoints();
        let (lo, hi) = if (a.0, a.1) <= (b.0, b.1) { (a, b) } else { (b, a) };
        for (p, outward) in [(lo, 1), (hi, -1)] {
            if grown.contains_point(p.0, p.1) {
                ends.push(End {
                    wall: i,
                    point: p,
                    outward,
                });
            }
        }
    }

    let tol = (avg_thickness as i32 / 2).max(1);
    let mut best: Option<(i64, usize, usize)> = None;
    for (i, e) in ends.iter().enumerate() {
        for (j, f) in ends.iter().enumerate() {
            let (we, wf) = (&walls[e.wall], &walls[f.wall]);
            if e.wall == f.wall || we.orientation != wf.orientation {
                continue;
            }
            // e is the low-side end (its wall runs off towards lower
            // coordinates), f the high-side end.
            let (along_e, along_f, cross_e, cross_f, center) = match we.orientation {
                Orientation::Horizontal => (e.point.0, f.point.0, e.point.1, f.point.1, cx2),
                Orientation::Vertical => (e.point.1, f.point.1, e.point.0, f.point.0, cy2),
            };
            let facing = e.outward == -1 && f.outward == 1;
            let straddle = 2 * along_e <= center && 2 * along_f >= center;
            if !facing || !straddle || (cross_e - cross_f).abs() > tol {
                continue;
            }
            let cost = (center - 2 * along_e) as i64 + (2 * along_f - center) as i64;
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, i, j));
            }
        }
    }

    if let Some((_, i, j)) = best {
        let (e, f) = (&ends[i], &ends[j]);
        let mut ids = vec![walls[e.wall].id, walls[f.wall].id];
        ids.sort_unstable();
        return Door {
            bbox: *door_box,
            segment: Segment::new(e.point.0, e.point.1, f.point.0, f.point.1),
            aligned: true,
            wall_ids: ids,
        };
    }

    // Unaligned: keep up to two nearest distinct walls.
    let dist = |p: (i32, i32)| ((2 * p.0 - cx2) as i64).abs() + ((2 * p.1 - cy2) as i64).abs();
    ends.sort_by_key(|e| (dist(e.point), e.wall));
    let mut ids: Vec<u32> = Vec::new();
    for e in &ends {
        let id = walls[e.wall].id;
        if !ids.contains(&id) && ids.len() < 2 {
            ids.push(id);
        }
    }
    ids.sort_unstable();
    Door {
        bbox: *door_box,
        segment: Door::midline(door_box),
        aligned: false,
        wall_ids: ids,
    }
}

/// Residual blobs classified as doors, aligned to the walls.
pub fn detect_doors(
    gray: &GrayImage,
    residual: &EdgeImage,
    walls: &[Wall],
    cfg: &DoorMatcherConfig,
) -> Vec<Door> {
    let Ok(avg) = crate::walls::average_wall_thickness(walls) else {
        return Vec::new();
    };
    segment_objects(residual)
        .into_iter()
        .filter(|b| gray.crop(b).is_some_and(|patch| classify_door(&patch, cfg)))
        .map(|b| align_door(&b, walls, avg))
        .collect()
}

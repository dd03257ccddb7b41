//! Window symbols: two bars across a wall with a glass line between them.
//!
//! Each wall box is searched on its own. The search runs in a frame where
//! the wall is vertical, so "across" lines are horizontal and lines along the
//! wall are vertical; horizontal walls are transposed in and out.

use crate::error::{Error, Result};
use crate::lines::{
    filter_horizontal, filter_vertical, probabilistic_hough_near, sort_left_right, sort_top_down,
    HoughParams, Segment,
};
use crate::raster::{BBox, EdgeImage};
use crate::walls::{Orientation, Wall};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub wall_id: u32,
    pub segment: Segment,
    pub bbox: BBox,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig {
    pub min_line_fraction: f64,
    pub min_height_factor: f64,
    pub max_height_fraction: f64,
    /// `None` means one ROI width.
    pub corner_margin: Option<u32>,
    pub axis_tolerance_deg: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            min_line_fraction: 0.75,
            min_height_factor: 2.0,
            max_height_fraction: 0.5,
            corner_margin: None,
            axis_tolerance_deg: 5.0,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.min_line_fraction > 0.0
            && self.min_line_fraction <= 1.0
            && self.min_height_factor > 0.0
            && self.max_height_fraction > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "window config out of range: {self:?}"
            )))
        }
    }

    /// Whether a candidate of along-wall extent `height` in an ROI of the
    /// given size passes the size bounds.
    pub fn height_ok(&self, height: i32, roi_width: i32, roi_height: i32) -> bool {
        let h = height as f64;
        h >= self.min_height_factor * roi_width as f64
            && h <= self.max_height_fraction * roi_height as f64
    }

    pub fn corner(&self, roi_width: i32) -> i32 {
        self.corner_margin.map_or(roi_width, |m| m as i32)
    }
}

/// Hough settings scaled down for a thin ROI.
pub fn roi_hough_params(hp: &HoughParams, roi_width: i32, salt: u32) -> HoughParams {
    let min_len = hp.min_line_length.min((roi_width / 3).max(3) as u32);
    HoughParams {
        min_line_length: min_len,
        vote_threshold: hp.vote_threshold.min(min_len),
        seed: hp.seed ^ (salt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ..*hp
    }
}

/// Edge pixels continuing horizontally (`dx = 1`) or vertically (`dy = 1`).
/// Crossings land in both, so a short bar keeps its pixels even where a long
/// line along the wall runs through it.
pub fn directional(roi: &EdgeImage, dx: i32, dy: i32) -> EdgeImage {
    EdgeImage::from_fn(roi.width(), roi.height(), |x, y| {
        let (x, y) = (x as i32, y as i32);
        roi.get_signed(x, y) && (roi.get_signed(x - dx, y - dy) || roi.get_signed(x + dx, y + dy))
    })
}

/// Along-wall spans `(x, y0, y1)` after joining fragments that share a
/// column (within 1 px) and are separated by at most `gap`. Low vote
/// thresholds let a slightly tilted bin win, which chops one edge line into
/// several pieces.
pub fn along_spans(along: &[Segment], gap: i32) -> Vec<(i32, i32, i32)> {
    let mut pieces: Vec<(i32, i32, i32)> = along
        .iter()
        .map(|s| ((s.x1 + s.x2).div_euclid(2), s.y1.min(s.y2), s.y1.max(s.y2)))
        .collect();
    pieces.sort();
    let mut spans: Vec<(i32, i32, i32)> = Vec::new();
    for (x, y0, y1) in pieces {
        match spans
            .iter_mut()
            .find(|(sx, _, sy1)| (x - *sx).abs() <= 1 && y0 <= *sy1 + gap)
        {
            Some(s) if y0 >= s.1 - gap => s.2 = s.2.max(y1),
            _ => spans.push((x, y0, y1)),
        }
    }
    spans
}

/// Windows found in one ROI, as boxes in ROI frame coordinates (wall vertical).
pub fn windows_in_roi(roi: &EdgeImage, hp: &HoughParams, wc: &WindowConfig) -> Vec<BBox> {
    let (rw, rh) = (roi.width() as i32, roi.height() as i32);
    let tol = wc.axis_tolerance_deg;
    let across_lines = probabilistic_hough_near(&directional(roi, 1, 0), hp, 0.0, tol);
    let along_lines = probabilistic_hough_near(&directional(roi, 0, 1), hp, 90.0, tol);
    let across = sort_top_down(&filter_horizontal(&across_lines, wc.axis_tolerance_deg));
    let along = sort_left_right(&filter_vertical(&along_lines, wc.axis_tolerance_deg));
    let slack = hp.max_line_gap as i32 + 2;
    let spans = along_spans(&along, hp.max_line_gap as i32);
    let corner = wc.corner(rw);

    let mut found: Vec<BBox> = Vec::new();
    for pair in across.windows(2) {
        let y0 = (pair[0].y1 + pair[0].y2).div_euclid(2);
        let y1 = (pair[1].y1 + pair[1].y2).div_euclid(2);
        let height = y1 - y0;
        if height <= 0 || !wc.height_ok(height, rw, rh) {
            continue;
        }
        let need = wc.min_line_fraction * height as f64;
        let support = spans
            .iter()
            .any(|&(_, a, b)| (b - a) as f64 >= need && a >= y0 - slack && b <= y1 + slack);
        if !support {
            continue;
        }
        let b = BBox::new(0, y0, rw - 1, y1);
        if b.y_min < corner || b.y_max > rh - 1 - corner {
            continue;
        }
        if found.iter().any(|f| f.intersects(&b)) {
            continue;
        }
        found.push(b);
    }
    found
}

pub fn detect_windows(
    img: &EdgeImage,
    walls: &[Wall],
    hp: &HoughParams,
    wc: &WindowConfig,
) -> Vec<Window> {
    let mut out = Vec::new();
    for wall in walls {
        let Some(roi_box) = wall.bbox.clamp_to(img.width(), img.height()) else {
            continue;
        };
        let Some(crop) = img.crop(&roi_box) else {
            continue;
        };
        let horizontal = wall.orientation == Orientation::Horizontal;
        let frame = if horizontal { crop.transposed() } else { crop };
        let p = roi_hough_params(hp, frame.width() as i32, wall.id);
        for b in windows_in_roi(&frame, &p, wc) {
            let local = if horizontal { b.transposed() } else { b };
            let bbox = local.translate(roi_box.x_min, roi_box.y_min);
            let c = wall.centerline;
            let segment = if horizontal {
                Segment::new(bbox.x_min, c.y1, bbox.x_max, c.y1)
            } else {
                Segment::new(c.x1, bbox.y_min, c.x1, bbox.y_max)
            };
            out.push(Window {
                wall_id: wall.id,
                segment,
                bbox,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Mask;

    /// A vertical-wall ROI: two along lines at the sides, optional bars and
    /// a glass line between them.
    fn roi(width: usize, height: usize, bars: Option<(usize, usize)>) -> Mask {
        Mask::from_fn(width, height, |x, y| {
            if x == 0 || x == width - 1 {
                return true;
            }
            match bars {
                Some((a, b)) => y == a || y == b || (x == width / 2 && y > a && y < b),
                None => false,
            }
        })
    }

    fn params(w: usize) -> HoughParams {
        roi_hough_params(&HoughParams::default(), w as i32, 0)
    }

    #[test]
    fn directional_split_keeps_crossings() {
        let m = Mask::from_fn(9, 9, |x, y| x == 4 || y == 4);
        let across = directional(&m, 1, 0);
        let along = directional(&m, 0, 1);
        assert_eq!(across.count(), 9);
        assert_eq!(along.count(), 9);
        assert!(across.get(4, 4) && along.get(4, 4));
        assert!(!across.get(4, 0) && !along.get(0, 4));
    }

    #[test]
    fn along_fragments_join() {
        let frags = [
            Segment::new(6, 85, 6, 120),
            Segment::new(7, 123, 7, 160),
            Segment::new(6, 200, 6, 230),
            Segment::new(10, 85, 10, 100),
        ];
        assert_eq!(
            along_spans(&frags, 5),
            vec![(6, 85, 160), (6, 200, 230), (10, 85, 100)]
        );
    }

    #[test]
    fn accepts_thirty_pixel_window() {
        let m = roi(12, 300, Some((135, 165)));
        let found = windows_in_roi(&m, &params(12), &WindowConfig::default());
        assert_eq!(found.len(), 1, "{found:?}");
        assert_eq!(found[0].y_max - found[0].y_min, 30);
    }

    #[test]
    fn rejects_twenty_pixel_window() {
        let m = roi(12, 300, Some((140, 160)));
        assert!(windows_in_roi(&m, &params(12), &WindowConfig::default()).is_empty());
    }

    #[test]
    fn empty_roi_has_no_windows() {
        let m = roi(12, 300, None);
        assert!(windows_in_roi(&m, &params(12), &WindowConfig::default()).is_empty());
    }

    #[test]
    fn window_at_corner_rejected() {
        let m = roi(12, 300, Some((4, 40)));
        assert!(windows_in_roi(&m, &params(12), &WindowConfig::default()).is_empty());
    }

    #[test]
    fn bars_without_glass_rejected() {
        let m = Mask::from_fn(12, 300, |x, y| x == 0 || x == 11 || y == 135 || y == 165);
        assert!(windows_in_roi(&m, &params(12), &WindowConfig::default()).is_empty());
    }

    #[test]
    fn horizontal_wall_maps_back_to_image() {
        let mut img = Mask::blank(400, 60);
        for x in 0..400 {
            img.set(x, 20, true);
            img.set(x, 31, true);
        }
        for y in 20..=31 {
            img.set(185, y, true);
            img.set(215, y, true);
        }
        for x in 186..215 {
            img.set(x, 26, true);
        }
        let wall = Wall::from_box(3, Orientation::Horizontal, BBox::new(0, 20, 399, 31));
        let found = detect_windows(
            &img,
            std::slice::from_ref(&wall),
            &HoughParams::default(),
            &WindowConfig::default(),
        );
        assert_eq!(found.len(), 1, "{found:?}");
        let w = &found[0];
        assert_eq!(w.wall_id, 3);
        assert!(wall.bbox.contains(&w.bbox));
        assert_eq!(w.segment.y1, wall.centerline.y1);
        assert!(
            (w.bbox.x_min - 185).abs() <= 1 && (w.bbox.x_max - 215).abs() <= 1,
            "{w:?}"
        );
    }
}

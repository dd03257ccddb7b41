//! Line-segment extraction with the progressive probabilistic Hough
//! transform, plus the axis filters and sort orders used downstream.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::{BBox, EdgeImage};

/// Integer endpoints of a detected line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub x1: i32,
    pub y1: i32,
    pub x2: i32,
    pub y2: i32,
}

impl Segment {
    pub fn new(x1: i32, y1: i32, x2: i32, y2: i32) -> Self {
        Segment { x1, y1, x2, y2 }
    }

    pub fn length(&self) -> f64 {
        ((self.x2 - self.x1) as f64).hypot((self.y2 - self.y1) as f64)
    }

    /// Twice the midpoint, kept integral for exact ordering.
    fn mid2(&self) -> (i32, i32) {
        (self.x1 + self.x2, self.y1 + self.y2)
    }

    pub fn midpoint(&self) -> (f64, f64) {
        let (x, y) = self.mid2();
        (x as f64 / 2.0, y as f64 / 2.0)
    }

    /// Angle to the x-axis in degrees, folded into [0, 90].
    pub fn axis_angle_deg(&self) -> f64 {
        let dx = (self.x2 - self.x1).abs() as f64;
        let dy = (self.y2 - self.y1).abs() as f64;
        dy.atan2(dx).to_degrees()
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.x2, self.y2, self.x1, self.y1)
    }

    /// Same endpoints regardless of direction.
    pub fn same_as(&self, other: &Segment) -> bool {
        self == other || *self == other.reversed()
    }

    pub fn bbox(&self) -> BBox {
        BBox::new(self.x1, self.y1, self.x2, self.y2)
    }

    pub fn translate(&self, dx: i32, dy: i32) -> Segment {
        Segment::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    pub fn transposed(&self) -> Segment {
        Segment::new(self.y1, self.x1, self.y2, self.x2)
    }
}

/// Probabilistic Hough parameters. `seed` drives the sampling order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoughParams {
    pub rho_step: f64,
    pub theta_step: f64,
    pub vote_threshold: u32,
    pub min_line_length: u32,
    pub max_line_gap: u32,
    pub seed: u64,
}

impl Default for HoughParams {
    fn default() -> Self {
        HoughParams {
            rho_step: 1.0,
            theta_step: std::f64::consts::PI / 180.0,
            vote_threshold: 30,
            min_line_length: 20,
            max_line_gap: 5,
            seed: 0,
        }
    }
}

impl HoughParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rho_step > 0.0
            && self.rho_step.is_finite()
            && self.theta_step > 0.0
            && self.theta_step <= std::f64::consts::PI
            && self.vote_threshold > 0
            && self.min_line_length > 0
            && self.max_line_gap > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "hough parameters must be strictly positive: {self:?}"
            )))
        }
    }
}

const SHIFT: i32 = 16;

struct Accumulator {
    num_angle: usize,
    num_rho: usize,
    trig: Vec<(f64, f64)>,
    /// Angle bins that take votes.
    angles: Vec<usize>,
    votes: Vec<i32>,
}

impl Accumulator {
    fn new(width: usize, height: usize, p: &HoughParams, window: Option<(f64, f64)>) -> Self {
        let num_angle = ((std::f64::consts::PI / p.theta_step).round() as usize).max(1);
        let num_rho = (((width + height) * 2 + 1) as f64 / p.rho_step).round() as usize;
        let trig = (0..num_angle)
            .map(|n| {
                let t = n as f64 * p.theta_step;
                (t.cos() / p.rho_step, t.sin() / p.rho_step)
            })
            .collect();
        let pi = std::f64::consts::PI;
        let angles = (0..num_angle)
            .filter(|&n| {
                window.is_none_or(|(normal, tol)| {
                    let d = (n as f64 * p.theta_step - normal).rem_euclid(pi);
                    d.min(pi - d) <= tol + 1e-12
                })
            })
            .collect();
        Accumulator {
            num_angle,
            num_rho,
            trig,
            angles,
            votes: vec![0; num_angle * num_rho],
        }
    }

    fn bin(&self, n: usize, x: i32, y: i32) -> usize {
        let (c, s) = self.trig[n];
        let r = (x as f64 * c + y as f64 * s).round() as i64 + (self.num_rho as i64 - 1) / 2;
        n * self.num_rho + r as usize
    }

    /// Distance of angle bin `n` from the nearest axis, in bins.
    fn off_axis(&self, n: usize) -> usize {
        let quarter = self.num_angle / 2;
        if quarter == 0 {
            return 0;
        }
        let m = n % quarter;
        m.min(quarter - m)
    }

    /// Adds one vote per angle and returns the best `(votes, angle)`.
    /// Ties go to the angle closest to an axis, since a clean axis-aligned
    /// run fills several near-axis bins equally while it is still short.
    fn vote(&mut self, x: i32, y: i32) -> (i32, usize) {
        let mut best = (i32::MIN, 0);
        for i in 0..self.angles.len() {
            let n = self.angles[i];
            let b = self.bin(n, x, y);
            self.votes[b] += 1;
            let v = self.votes[b];
            if v > best.0 || (v == best.0 && self.off_axis(n) < self.off_axis(best.1)) {
                best = (v, n);
            }
        }
        best
    }

    fn unvote(&mut self, x: i32, y: i32) {
        for i in 0..self.angles.len() {
            let n = self.angles[i];
            let b = self.bin(n, x, y);
            self.votes[b] -= 1;
        }
    }
}

/// Fixed-point walker along the line through a seed pixel.
struct Walk {
    x_major: bool,
    x: i64,
    y: i64,
    dx: i64,
    dy: i64,
}

impl Walk {
    fn new(x0: i32, y0: i32, dir_x: f64, dir_y: f64, backwards: bool) -> Self {
        let one = 1i64 << SHIFT;
        let half = 1i64 << (SHIFT - 1);
        let (x_major, x, y, mut dx, mut dy) = if dir_x.abs() > dir_y.abs() {
            let dx = if dir_x > 0.0 { 1 } else { -1 };
            let dy = (dir_y * one as f64 / dir_x.abs()).round() as i64;
            (true, x0 as i64, ((y0 as i64) << SHIFT) + half, dx, dy)
        } else {
            let dy = if dir_y > 0.0 { 1 } else { -1 };
            let dx = (dir_x * one as f64 / dir_y.abs()).round() as i64;
            (false, ((x0 as i64) << SHIFT) + half, y0 as i64, dx, dy)
        };
        if backwards {
            dx = -dx;
            dy = -dy;
        }
        Walk {
            x_major,
            x,
            y,
            dx,
            dy,
        }
    }

    fn pixel(&self) -> (i32, i32) {
        if self.x_major {
            (self.x as i32, (self.y >> SHIFT) as i32)
        } else {
            ((self.x >> SHIFT) as i32, self.y as i32)
        }
    }

    fn step(&mut self) {
        self.x += self.dx;
        self.y += self.dy;
    }
}

/// Progressive probabilistic Hough transform.
///
/// Edge pixels are visited in a seeded random order. Each one votes into the
/// `(rho, theta)` accumulator; once some bin reaches `vote_threshold`, the
/// line through the pixel is walked in both directions, bridging gaps of at
/// most `max_line_gap`. Every pixel on the walked span is removed (and its
/// votes withdrawn when the span is long enough to be reported).
pub fn probabilistic_hough(img: &EdgeImage, p: &HoughParams) -> Vec<Segment> {
    hough_impl(img, p, None)
}

/// As [`probabilistic_hough`], but only angles within `tol_deg` of lines at
/// `line_deg` (0 = horizontal, 90 = vertical) take votes, so off-axis
/// clutter cannot claim pixels of the wanted lines.
pub fn probabilistic_hough_near(img: &EdgeImage, p: &HoughParams, line_deg: f64, tol_deg: f64) -> Vec<Segment> {
    let normal = (line_deg + 90.0).to_radians();
    hough_impl(img, p, Some((normal, tol_deg.to_radians())))
}

fn hough_impl(img: &EdgeImage, p: &HoughParams, window: Option<(f64, f64)>) -> Vec<Segment> {
    let (w, h) = (img.width(), img.height());
    let mut points: Vec<(i32, i32)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y))
        .map(|(x, y)| (x as i32, y as i32))
        .collect();
    if points.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    points.shuffle(&mut rng);

    let mut acc = Accumulator::new(w, h, p, window);
    let mut pending: Vec<bool> = img.data().to_vec();
    let mut voted = vec![false; w * h];
    let idx = |x: i32, y: i32| y as usize * w + x as usize;
    let inside = |x: i32, y: i32| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h;
    let threshold = p.vote_threshold as i32;
    let gap_limit = p.max_line_gap as i32;
    let min_len = p.min_line_length as i32;
    let mut lines = Vec::new();

    for &(x0, y0) in &points {
        if !pending[idx(x0, y0)] {
            continue;
        }
        let (best, angle) = acc.vote(x0, y0);
        voted[idx(x0, y0)] = true;
        if best < threshold {
            continue;
        }

        let (c, s) = acc.trig[angle];
        let (dir_x, dir_y) = (-s, c);
        let mut ends = [(x0, y0); 2];
        for (k, end) in ends.iter_mut().enumerate() {
            let mut walk = Walk::new(x0, y0, dir_x, dir_y, k == 1);
            let mut gap = 0;
            loop {
                let (x, y) = walk.pixel();
                if !inside(x, y) {
                    break;
                }
                if pending[idx(x, y)] {
                    gap = 0;
                    *end = (x, y);
                } else {
                    gap += 1;
                    if gap > gap_limit {
                        break;
                    }
                }
                walk.step();
            }
        }

        let good =
            (ends[1].0 - ends[0].0).abs() >= min_len || (ends[1].1 - ends[0].1).abs() >= min_len;

        for (k, &end) in ends.iter().enumerate() {
            let mut walk = Walk::new(x0, y0, dir_x, dir_y, k == 1);
            loop {
                let (x, y) = walk.pixel();
                if !inside(x, y) {
                    break;
                }
                let i = idx(x, y);
                if pending[i] {
                    if good && voted[i] {
                        acc.unvote(x, y);
                        voted[i] = false;
                    }
                    pending[i] = false;
                }
                if (x, y) == end {
                    break;
                }
                walk.step();
            }
        }

        if good {
            lines.push(Segment::new(ends[0].0, ends[0].1, ends[1].0, ends[1].1));
        }
    }
    lines
}

/// Segments within `tol_deg` of horizontal, endpoints ordered left to right.
pub fn filter_horizontal(segs: &[Segment], tol_deg: f64) -> Vec<Segment> {
    segs.iter()
        .filter(|s| s.axis_angle_deg() <= tol_deg)
        .map(|s| if s.x1 <= s.x2 { *s } else { s.reversed() })
        .collect()
}

/// Segments within `tol_deg` of vertical, endpoints ordered top to bottom.
pub fn filter_vertical(segs: &[Segment], tol_deg: f64) -> Vec<Segment> {
    segs.iter()
        .filter(|s| 90.0 - s.axis_angle_deg() <= tol_deg)
        .map(|s| if s.y1 <= s.y2 { *s } else { s.reversed() })
        .collect()
}

fn length2(s: &Segment) -> i64 {
    let dx = (s.x2 - s.x1) as i64;
    let dy = (s.y2 - s.y1) as i64;
    dx * dx + dy * dy
}

/// Stable sort by midpoint y, then midpoint x, then longest first.
pub fn sort_top_down(segs: &[Segment]) -> Vec<Segment> {
    let mut out = segs.to_vec();
    out.sort_by_key(|s| {
        let (mx, my) = s.mid2();
        (my, mx, std::cmp::Reverse(length2(s)))
    });
    out
}

/// Stable sort by midpoint x, then midpoint y, then longest first.
pub fn sort_left_right(segs: &[Segment]) -> Vec<Segment> {
    let mut out = segs.to_vec();
    out.sort_by_key(|s| {
        let (mx, my) = s.mid2();
        (mx, my, std::cmp::Reverse(length2(s)))
    });
    out
}

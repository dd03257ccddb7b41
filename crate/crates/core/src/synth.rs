//! Synthetic floor plans with exact ground truth.
//!
//! A plan is a grid of rooms. Every grid line is a wall band; the ink is the
//! outline of the union of all bands, so each wall shows as two parallel
//! 1-px lines. Doors cut a gap in a band and add a leaf and a quarter arc;
//! windows add two bars across the band joined by a glass line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::doors::Door;
use crate::error::{Error, Result};
use crate::lines::Segment;
use crate::model::{GroundTruth, Source};
use crate::raster::{BBox, GrayImage, Mask};
use crate::walls::{Orientation, Wall};
use crate::windows::Window;

pub const INK: u8 = 0;
pub const PAPER: u8 = 255;

pub const DOOR_GAP: (u32, u32) = (60, 80);
/// Door distance from the perpendicular walls at either end of its side.
pub const DOOR_CLEARANCE: i32 = 70;
pub const WINDOW_SPAN: (u32, u32) = (50, 80);
pub const WINDOW_CLEARANCE: i32 = 40;
/// Glyph sizes of the shipped door assets.
pub const ASSET_SIZES: [usize; 2] = [60, 80];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub rows: u32,
    pub cols: u32,
    pub width: u32,
    pub height: u32,
    /// Inclusive ranges.
    pub wall_thickness: (u32, u32),
    pub window_count: (u32, u32),
    pub door_count: (u32, u32),
    /// Cluster margin the layout must stay clear of.
    pub margin: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            rows: 2,
            cols: 2,
            width: 1024,
            height: 768,
            wall_thickness: (10, 14),
            window_count: (2, 4),
            door_count: (1, 3),
            margin: 50,
        }
    }
}

impl SynthConfig {
    /// Smallest room interior that fits a door with its swing and keeps
    /// parallel walls more than two margins apart.
    pub fn min_room(&self) -> i32 {
        let door = 2 * DOOR_CLEARANCE + DOOR_GAP.1 as i32;
        door.max(2 * self.margin as i32 + 1)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Unsatisfiable(m.to_string()));
        if self.rows == 0 || self.cols == 0 {
            return bad("room grid must be at least 1x1");
        }
        let (t0, t1) = self.wall_thickness;
        if t0 == 0 || t0 > t1 {
            return bad("wall thickness range must be positive and ordered");
        }
        if self.window_count.0 > self.window_count.1 || self.door_count.0 > self.door_count.1 {
            return bad("count ranges must be ordered");
        }
        if 2 * t1 > WINDOW_SPAN.0 {
            return bad("walls too thick for the window symbol");
        }
        let border = 2 * BORDER;
        let need_w = self.cols as i32 * self.min_room() + (self.cols as i32 + 1) * t1 as i32 + border;
        let need_h = self.rows as i32 * self.min_room() + (self.rows as i32 + 1) * t1 as i32 + border;
        if need_w > self.width as i32 || need_h > self.height as i32 {
            return bad(&format!(
                "{}x{} rooms need at least {need_w}x{need_h} px, image is {}x{}",
                self.rows, self.cols, self.width, self.height
            ));
        }
        let sides = self.rows * (self.cols + 1) + self.cols * (self.rows + 1);
        if self.window_count.0 + self.door_count.0 > sides {
            return bad("more features requested than wall sides");
        }
        Ok(())
    }
}

const BORDER: i32 = 30;

/// Positions of the grid lines along one axis: `(start, thickness)` per line.
fn layout_axis(rng: &mut ChaCha8Rng, cells: u32, extent: i32, cfg: &SynthConfig) -> Vec<(i32, i32)> {
    let (t0, t1) = cfg.wall_thickness;
    let thick: Vec<i32> = (0..=cells).map(|_| rng.random_range(t0..=t1) as i32).collect();
    let walls: i32 = thick.iter().sum();
    let avail = extent - 2 * BORDER - walls;
    let min = cfg.min_room();
    let spare = avail - cells as i32 * min;
    let used = spare * rng.random_range(60..=100) / 100;
    let weights: Vec<i32> = (0..cells).map(|_| rng.random_range(1..=4)).collect();
    let wsum: i32 = weights.iter().sum();
    let rooms: Vec<i32> = weights.iter().map(|w| min + used * w / wsum).collect();
    let total = walls + rooms.iter().sum::<i32>();
    let mut pos = BORDER + rng.random_range(0..=(extent - 2 * BORDER - total).max(0));
    let mut out = Vec::new();
    for i in 0..=cells as usize {
        out.push((pos, thick[i]));
        pos += thick[i];
        if i < cells as usize {
            pos += rooms[i];
        }
    }
    out
}

/// One wall side between two perpendicular bands.
#[derive(Clone, Copy, Debug)]
struct Side {
    orientation: Orientation,
    line: usize,
    /// Inner-edge interval along the wall.
    lo: i32,
    hi: i32,
    exterior: bool,
}

#[derive(Clone, Copy, Debug)]
struct DoorSpec {
    side: Side,
    g0: i32,
    g1: i32,
    /// +1: leaf swings towards increasing cross coordinate.
    swing: i32,
    hinge_low: bool,
}

#[derive(Clone, Copy, Debug)]
struct WindowSpec {
    side: Side,
    a: i32,
    b: i32,
}

/// Pixels of a door glyph: a leaf from the hinge into the room and a quarter
/// arc from the leaf tip back to the far end of the opening.
pub fn glyph_pixels(hinge: (i32, i32), along: (i32, i32), into: (i32, i32), r: i32) -> Vec<(i32, i32)> {
    let mut px = Vec::new();
    for t in 0..=r {
        px.push((hinge.0 + t * into.0, hinge.1 + t * into.1));
    }
    let steps = 8 * r.max(1);
    for k in 0..=steps {
        let th = std::f64::consts::FRAC_PI_2 * k as f64 / steps as f64;
        let (c, s) = (th.cos() * r as f64, th.sin() * r as f64);
        let x = hinge.0 as f64 + c * into.0 as f64 + s * along.0 as f64;
        let y = hinge.1 as f64 + c * into.1 as f64 + s * along.1 as f64;
        px.push((x.round() as i32, y.round() as i32));
    }
    px.sort_unstable();
    px.dedup();
    px
}

/// Square door glyph image of side `size`, hinge at the top-left corner,
/// leaf down the left edge; `quarter_turns` clockwise rotations.
pub fn door_glyph(size: usize, quarter_turns: u32) -> GrayImage {
    let mut img = GrayImage::filled(size, size, PAPER);
    for (x, y) in glyph_pixels((0, 0), (1, 0), (0, 1), size as i32 - 1) {
        img.set(x as usize, y as usize, INK);
    }
    (0..quarter_turns % 4).fold(img, |g, _| g.rotated_cw())
}

/// The shipped sample/template set: every asset size in four rotations,
/// with its file name.
pub fn door_asset_set() -> Vec<(String, GrayImage)> {
    let mut out = Vec::new();
    for size in ASSET_SIZES {
        for rot in 0..4 {
            out.push((format!("door_{size}_r{rot}.pgm"), door_glyph(size, rot)));
        }
    }
    out
}

/// Renders a plan and its truth. Deterministic in `cfg`.
pub fn generate_plan(cfg: &SynthConfig) -> Result<(GrayImage, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = (cfg.width as i32, cfg.height as i32);
    let vlines = layout_axis(&mut rng, cfg.cols, w, cfg);
    let hlines = layout_axis(&mut rng, cfg.rows, h, cfg);
    let x_lo = vlines[0].0;
    let x_hi = vlines.last().map(|&(p, t)| p + t - 1).unwrap();
    let y_lo = hlines[0].0;
    let y_hi = hlines.last().map(|&(p, t)| p + t - 1).unwrap();

    // Band of grid line `line` as a box.
    let band = |o: Orientation, line: usize| -> BBox {
        match o {
            Orientation::Horizontal => {
                let (p, t) = hlines[line];
                BBox::new(x_lo, p, x_hi, p + t - 1)
            }
            Orientation::Vertical => {
                let (p, t) = vlines[line];
                BBox::new(p, y_lo, p + t - 1, y_hi)
            }
        }
    };

    let mut sides = Vec::new();
    for (line, _) in hlines.iter().enumerate() {
        for c in 0..cfg.cols as usize {
            sides.push(Side {
                orientation: Orientation::Horizontal,
                line,
                lo: vlines[c].0 + vlines[c].1,
                hi: vlines[c + 1].0 - 1,
                exterior: line == 0 || line == cfg.rows as usize,
            });
        }
    }
    for (line, _) in vlines.iter().enumerate() {
        for r in 0..cfg.rows as usize {
            sides.push(Side {
                orientation: Orientation::Vertical,
                line,
                lo: hlines[r].0 + hlines[r].1,
                hi: hlines[r + 1].0 - 1,
                exterior: line == 0 || line == cfg.cols as usize,
            });
        }
    }

    let mut shuffled = sides.clone();
    shuffled.shuffle(&mut rng);
    let (interior, exterior): (Vec<Side>, Vec<Side>) = shuffled.iter().partition(|s| !s.exterior);
    let door_n = rng.random_range(cfg.door_count.0..=cfg.door_count.1) as usize;
    let win_n = rng.random_range(cfg.window_count.0..=cfg.window_count.1) as usize;
    let door_order: Vec<Side> = interior.iter().chain(&exterior).copied().collect();
    let door_sides: Vec<Side> = door_order.into_iter().take(door_n.min(sides.len())).collect();
    let used = |s: &Side| door_sides.iter().any(|d| d.orientation == s.orientation && d.line == s.line && d.lo == s.lo);
    let win_sides: Vec<Side> = exterior
        .iter()
        .chain(&interior)
        .filter(|s| !used(s))
        .take(win_n)
        .copied()
        .collect();
    if door_sides.len() < cfg.door_count.0 as usize || win_sides.len() < cfg.window_count.0 as usize {
        return Err(Error::Unsatisfiable("not enough wall sides for the requested features".into()));
    }

    let doors: Vec<DoorSpec> = door_sides
        .iter()
        .map(|&side| {
            let g = rng.random_range(DOOR_GAP.0..=DOOR_GAP.1) as i32;
            let g0 = rng.random_range(side.lo + DOOR_CLEARANCE..=side.hi - DOOR_CLEARANCE - g + 1);
            let swing = if side.exterior {
                if side.line == 0 { 1 } else { -1 }
            } else if rng.random_bool(0.5) {
                1
            } else {
                -1
            };
            DoorSpec {
                side,
                g0,
                g1: g0 + g - 1,
                swing,
                hinge_low: rng.random_bool(0.5),
            }
        })
        .collect();
    let windows: Vec<WindowSpec> = win_sides
        .iter()
        .map(|&side| {
            let d = rng.random_range(WINDOW_SPAN.0..=WINDOW_SPAN.1) as i32;
            let a = rng.random_range(side.lo + WINDOW_CLEARANCE..=side.hi - WINDOW_CLEARANCE - d);
            WindowSpec { side, a, b: a + d }
        })
        .collect();

    // Walls mask with door gaps cut out; ink is its 4-neighbor outline.
    let mut mask = Mask::blank(cfg.width as usize, cfg.height as usize);
    let fill = |m: &mut Mask, b: &BBox, v: bool| {
        for y in b.y_min..=b.y_max {
            for x in b.x_min..=b.x_max {
                m.set_signed(x, y, v);
            }
        }
    };
    for (i, _) in hlines.iter().enumerate() {
        fill(&mut mask, &band(Orientation::Horizontal, i), true);
    }
    for (i, _) in vlines.iter().enumerate() {
        fill(&mut mask, &band(Orientation::Vertical, i), true);
    }
    let gap_box = |d: &DoorSpec| -> BBox {
        let b = band(d.side.orientation, d.side.line);
        match d.side.orientation {
            Orientation::Horizontal => BBox::new(d.g0, b.y_min, d.g1, b.y_max),
            Orientation::Vertical => BBox::new(b.x_min, d.g0, b.x_max, d.g1),
        }
    };
    for d in &doors {
        fill(&mut mask, &gap_box(d), false);
    }
    let mut img = GrayImage::filled(cfg.width as usize, cfg.height as usize, PAPER);
    for y in 0..h {
        for x in 0..w {
            if mask.get_signed(x, y)
                && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|(dx, dy)| !mask.get_signed(x + dx, y + dy))
            {
                img.set(x as usize, y as usize, INK);
            }
        }
    }
    let mut ink = |x: i32, y: i32| {
        if x >= 0 && y >= 0 && x < w && y < h {
            img.set(x as usize, y as usize, INK);
        }
    };

    // Truth wall runs, split at door gaps.
    let mut runs: Vec<(BBox, Orientation)> = Vec::new();
    let lines: Vec<(Orientation, usize)> = (0..hlines.len())
        .map(|i| (Orientation::Horizontal, i))
        .chain((0..vlines.len()).map(|i| (Orientation::Vertical, i)))
        .collect();
    for &(o, line) in &lines {
        let b = band(o, line);
        let (start, end) = match o {
            Orientation::Horizontal => (b.x_min, b.x_max),
            Orientation::Vertical => (b.y_min, b.y_max),
        };
        let mut cuts: Vec<(i32, i32)> = doors
            .iter()
            .filter(|d| d.side.orientation == o && d.side.line == line)
            .map(|d| (d.g0, d.g1))
            .collect();
        cuts.sort_unstable();
        let mut from = start;
        let mut push = |a: i32, z: i32| {
            let r = match o {
                Orientation::Horizontal => BBox::new(a, b.y_min, z, b.y_max),
                Orientation::Vertical => BBox::new(b.x_min, a, b.x_max, z),
            };
            runs.push((r, o));
        };
        for (g0, g1) in cuts {
            push(from, g0 - 1);
            from = g1 + 1;
        }
        push(from, end);
    }
    runs.sort_by_key(|(b, o)| ((b.y_min, b.x_min, b.y_max, b.x_max), *o == Orientation::Vertical));
    let walls: Vec<Wall> = runs
        .iter()
        .enumerate()
        .map(|(i, (b, o))| Wall::from_box(i as u32, *o, *b))
        .collect();
    // Run of orientation `o` covering along-interval [a, z] at cross position `cross`.
    let run_at = |o: Orientation, cross: i32, a: i32, z: i32| -> &Wall {
        walls
            .iter()
            .find(|w| {
                w.orientation == o
                    && match o {
                        Orientation::Horizontal => {
                            w.bbox.y_min == cross && w.bbox.x_min <= a && w.bbox.x_max >= z
                        }
                        Orientation::Vertical => {
                            w.bbox.x_min == cross && w.bbox.y_min <= a && w.bbox.y_max >= z
                        }
                    }
            })
            .expect("feature lies on a wall run")
    };

    let mut truth_windows = Vec::new();
    for win in &windows {
        let o = win.side.orientation;
        let b = band(o, win.side.line);
        let (cross, cross_end) = match o {
            Orientation::Horizontal => (b.y_min, b.y_max),
            Orientation::Vertical => (b.x_min, b.x_max),
        };
        let wall = run_at(o, cross, win.a, win.b);
        let mid = (cross + cross_end) / 2;
        let at = |along: i32, across: i32| match o {
            Orientation::Horizontal => (along, across),
            Orientation::Vertical => (across, along),
        };
        for c in cross..=cross_end {
            for along in [win.a, win.b] {
                let (x, y) = at(along, c);
                ink(x, y);
            }
        }
        for along in win.a + 1..win.b {
            let (x, y) = at(along, mid);
            ink(x, y);
        }
        let (p0, p1) = (at(win.a, cross), at(win.b, cross_end));
        let bbox = BBox::new(p0.0, p0.1, p1.0, p1.1);
        let c = wall.centerline;
        let segment = match o {
            Orientation::Horizontal => Segment::new(win.a, c.y1, win.b, c.y1),
            Orientation::Vertical => Segment::new(c.x1, win.a, c.x1, win.b),
        };
        truth_windows.push(Window {
            wall_id: wall.id,
            segment,
            bbox,
        });
    }

    let mut truth_doors = Vec::new();
    for d in &doors {
        let o = d.side.orientation;
        let b = band(o, d.side.line);
        let (cross_lo, cross_hi) = match o {
            Orientation::Horizontal => (b.y_min, b.y_max),
            Orientation::Vertical => (b.x_min, b.x_max),
        };
        let before = run_at(o, cross_lo, d.g0 - 1, d.g0 - 1);
        let after = run_at(o, cross_lo, d.g1 + 1, d.g1 + 1);
        let inner = if d.swing > 0 { cross_hi } else { cross_lo };
        let (h_along, dir_along) = if d.hinge_low { (d.g0, 1) } else { (d.g1, -1) };
        let r = d.g1 - d.g0;
        let (hinge, along, into) = match o {
            Orientation::Horizontal => ((h_along, inner), (dir_along, 0), (0, d.swing)),
            Orientation::Vertical => ((inner, h_along), (0, dir_along), (d.swing, 0)),
        };
        let px = glyph_pixels(hinge, along, into, r);
        let mut bbox = BBox::point(px[0].0, px[0].1);
        for &(x, y) in &px {
            ink(x, y);
            bbox = bbox.union(&BBox::point(x, y));
        }
        let segment = match o {
            Orientation::Horizontal => {
                let y = before.centerline.y1;
                Segment::new(d.g0 - 1, y, d.g1 + 1, y)
            }
            Orientation::Vertical => {
                let x = before.centerline.x1;
                Segment::new(x, d.g0 - 1, x, d.g1 + 1)
            }
        };
        let mut ids = vec![before.id, after.id];
        ids.sort_unstable();
        truth_doors.push(Door {
            bbox,
            segment,
            aligned: true,
            wall_ids: ids,
        });
    }

    let truth = GroundTruth {
        walls,
        windows: truth_windows,
        doors: truth_doors,
        roof: None,
        source: Some(Source {
            width: cfg.width,
            height: cfg.height,
            fingerprint: String::new(),
        }),
    };
    Ok((img, truth))
}

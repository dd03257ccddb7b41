//! Extrusion of a floor-plan model into a polygon mesh, plus OBJ export.
//!
//! Image `(x, y)` maps to `(x * s, up, y * s)`. A wall is cut into spans at
//! every opening boundary; each span keeps the height intervals not removed
//! by an opening and emits four long faces per interval. End faces come from
//! the difference between neighboring spans, so a wall without openings is a
//! plain six-face cuboid.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{estimate_roof, FloorPlanModel, Roof};
use crate::walls::{average_wall_thickness, Orientation, Wall};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrudeConfig {
    pub wall_height: f64,
    pub door_height_fraction: f64,
    pub window_sill_fraction: f64,
    pub window_top_fraction: f64,
    pub unit_scale: f64,
}

impl Default for ExtrudeConfig {
    fn default() -> Self {
        ExtrudeConfig {
            wall_height: 280.0,
            door_height_fraction: 0.8,
            window_sill_fraction: 0.3,
            window_top_fraction: 0.75,
            unit_scale: 1.0,
        }
    }
}

impl ExtrudeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.wall_height > 0.0
            && self.wall_height.is_finite()
            && self.unit_scale > 0.0
            && self.unit_scale.is_finite()
            && 0.0 < self.window_sill_fraction
            && self.window_sill_fraction < self.window_top_fraction
            && self.window_top_fraction <= 1.0
            && 0.0 < self.door_height_fraction
            && self.door_height_fraction <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("extrusion settings out of range: {self:?}")))
        }
    }
}

/// Roof used when the model carries none.
pub const FALLBACK_OVERHANG_FACTOR: u32 = 2;
pub const FALLBACK_APEX_RATIO: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Walls,
    Doors,
    Windows,
    Roof,
    Floor,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Walls, Group::Doors, Group::Windows, Group::Roof, Group::Floor];

    pub fn name(self) -> &'static str {
        match self {
            Group::Walls => "walls",
            Group::Doors => "doors",
            Group::Windows => "windows",
            Group::Roof => "roof",
            Group::Floor => "floor",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub indices: Vec<usize>,
    pub group: Group,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Face>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct MeshStats {
    pub face_count: usize,
    pub triangle_count: usize,
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    MeshStats {
        face_count: mesh.faces.len(),
        triangle_count: mesh.faces.iter().map(|f| f.indices.len().saturating_sub(2)).sum(),
    }
}

impl Mesh {
    pub fn group_faces(&self, g: Group) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.group == g)
    }

    /// Newell normal of a face (not normalized).
    pub fn face_normal(&self, f: &Face) -> [f64; 3] {
        let pts: Vec<[f64; 3]> = f.indices.iter().map(|&i| self.vertices[i]).collect();
        newell(&pts)
    }
}

fn newell(pts: &[[f64; 3]]) -> [f64; 3] {
    let mut n = [0.0; 3];
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        n[0] += (a[1] - b[1]) * (a[2] + b[2]);
        n[1] += (a[2] - b[2]) * (a[0] + b[0]);
        n[2] += (a[0] - b[0]) * (a[1] + b[1]);
    }
    n
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm0(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

#[derive(Default)]
struct Builder {
    mesh: Mesh,
    index: HashMap<[u64; 3], usize>,
}

impl Builder {
    fn vertex(&mut self, p: [f64; 3]) -> usize {
        let p = [norm0(p[0]), norm0(p[1]), norm0(p[2])];
        let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
        *self.index.entry(key).or_insert_with(|| {
            self.mesh.vertices.push(p);
            self.mesh.vertices.len() - 1
        })
    }

    /// Adds a polygon wound so its normal points along `outward`.
    fn face(&mut self, group: Group, mut pts: Vec<[f64; 3]>, outward: [f64; 3]) {
        if dot(newell(&pts), outward) < 0.0 {
            pts.reverse();
        }
        let indices = pts.into_iter().map(|p| self.vertex(p)).collect();
        self.mesh.faces.push(Face { indices, group });
    }
}

/// A wall's local frame: position along the wall, offset across it, height.
#[derive(Clone, Copy)]
struct Frame {
    horizontal: bool,
    cross: f64,
    scale: f64,
}

impl Frame {
    fn of(orientation: Orientation, cross: f64, scale: f64) -> Frame {
        Frame {
            horizontal: orientation == Orientation::Horizontal,
            cross,
            scale,
        }
    }

    fn at(&self, along: f64, off: f64, z: f64) -> [f64; 3] {
        let c = self.cross + off;
        if self.horizontal {
            [along * self.scale, z, c * self.scale]
        } else {
            [c * self.scale, z, along * self.scale]
        }
    }

    fn along_dir(&self) -> [f64; 3] {
        if self.horizontal {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        }
    }

    fn cross_dir(&self) -> [f64; 3] {
        if self.horizontal {
            [0.0, 0.0, 1.0]
        } else {
            [1.0, 0.0, 0.0]
        }
    }
}

const UP: [f64; 3] = [0.0, 1.0, 0.0];
const EPS: f64 = 1e-9;

fn neg(v: [f64; 3]) -> [f64; 3] {
    [-v[0], -v[1], -v[2]]
}

type Intervals = Vec<(f64, f64)>;

fn subtract(set: &Intervals, (a, b): (f64, f64)) -> Intervals {
    let mut out = Vec::new();
    for &(lo, hi) in set {
        if b <= lo || a >= hi {
            out.push((lo, hi));
            continue;
        }
        if a > lo {
            out.push((lo, a));
        }
        if b < hi {
            out.push((b, hi));
        }
    }
    out.retain(|(lo, hi)| hi - lo > EPS);
    out
}

fn difference(a: &Intervals, b: &Intervals) -> Intervals {
    b.iter().fold(a.clone(), |acc, &iv| subtract(&acc, iv))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpeningKind {
    Door,
    Window,
}

/// A cut through one wall: along-wall interval in image units and the
/// removed height interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Opening {
    pub wall_id: u32,
    pub kind: OpeningKind,
    pub along: (f64, f64),
    pub z: (f64, f64),
}

fn wall_span(w: &Wall) -> (f64, f64) {
    let c = w.centerline;
    match w.orientation {
        Orientation::Horizontal => (c.x1.min(c.x2) as f64, c.x1.max(c.x2) as f64),
        Orientation::Vertical => (c.y1.min(c.y2) as f64, c.y1.max(c.y2) as f64),
    }
}

fn wall_cross(w: &Wall) -> f64 {
    match w.orientation {
        Orientation::Horizontal => w.centerline.y1 as f64,
        Orientation::Vertical => w.centerline.x1 as f64,
    }
}

fn half_thickness(w: &Wall) -> f64 {
    w.thickness.max(1) as f64 / 2.0
}

/// Along-interval of a segment for the given orientation, plus its cross
/// coordinate (mean of the endpoints).
fn segment_along(s: &crate::lines::Segment, o: Orientation) -> ((f64, f64), f64) {
    match o {
        Orientation::Horizontal => (
            (s.x1.min(s.x2) as f64, s.x1.max(s.x2) as f64),
            (s.y1 + s.y2) as f64 / 2.0,
        ),
        Orientation::Vertical => (
            (s.y1.min(s.y2) as f64, s.y1.max(s.y2) as f64),
            (s.x1 + s.x2) as f64 / 2.0,
        ),
    }
}

/// Shrinks `(a, b)` to lie strictly inside `(lo, hi)`; `None` if nothing is left.
fn clip_inside((a, b): (f64, f64), (lo, hi): (f64, f64)) -> Option<(f64, f64)> {
    let inset = (0.5f64).min((hi - lo) / 4.0);
    let (a, b) = (a.max(lo + inset), b.min(hi - inset));
    (b - a > EPS).then_some((a, b))
}

/// Where a door lies within the span of a wall it is collinear with.
fn door_in_wall(d: &crate::doors::Door, w: &Wall) -> Option<(f64, f64)> {
    if d.orientation() != w.orientation {
        return None;
    }
    let (iv, cross) = segment_along(&d.segment, w.orientation);
    if (cross - wall_cross(w)).abs() > half_thickness(w) {
        return None;
    }
    let span = wall_span(w);
    let (a, b) = (iv.0.max(span.0), iv.1.min(span.1));
    // A door bridging a gap may touch the wall ends; only a door mostly
    // inside the wall cuts it.
    if b - a <= EPS || 2.0 * (b - a) < iv.1 - iv.0 {
        return None;
    }
    clip_inside((a, b), span)
}

/// Every opening cut into the model's walls.
pub fn wall_openings(m: &FloorPlanModel, cfg: &ExtrudeConfig) -> Vec<Opening> {
    let h = cfg.wall_height;
    let mut out = Vec::new();
    for w in &m.walls {
        let span = wall_span(w);
        if span.1 - span.0 <= EPS {
            continue;
        }
        for d in &m.doors {
            if let Some(along) = door_in_wall(d, w) {
                out.push(Opening {
                    wall_id: w.id,
                    kind: OpeningKind::Door,
                    along,
                    z: (0.0, cfg.door_height_fraction * h),
                });
            }
        }
        for win in m.windows.iter().filter(|win| win.wall_id == w.id) {
            let (iv, _) = segment_along(&win.segment, w.orientation);
            if let Some(along) = clip_inside(iv, span) {
                out.push(Opening {
                    wall_id: w.id,
                    kind: OpeningKind::Window,
                    along,
                    z: (cfg.window_sill_fraction * h, cfg.window_top_fraction * h),
                });
            }
        }
    }
    out
}

/// Solid prism along `[lo, hi]` split at opening boundaries.
fn extrude_wall(b: &mut Builder, f: Frame, half: f64, span: (f64, f64), height: f64, cuts: &[Opening]) {
    let mut stops = vec![span.0, span.1];
    for c in cuts {
        stops.push(c.along.0);
        stops.push(c.along.1);
    }
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= EPS);

    let spans: Vec<(f64, f64, Intervals)> = stops
        .windows(2)
        .map(|p| {
            let mid = (p[0] + p[1]) / 2.0;
            let solid = cuts
                .iter()
                .filter(|c| c.along.0 <= mid && mid <= c.along.1)
                .fold(vec![(0.0, height)], |acc, c| subtract(&acc, c.z));
            (p[0], p[1], solid)
        })
        .collect();

    let (ad, cd) = (f.along_dir(), f.cross_dir());
    for (a, z, solid) in &spans {
        for &(z0, z1) in solid {
            b.face(Group::Walls, vec![f.at(*a, -half, z0), f.at(*z, -half, z0), f.at(*z, -half, z1), f.at(*a, -half, z1)], neg(cd));
            b.face(Group::Walls, vec![f.at(*a, half, z0), f.at(*z, half, z0), f.at(*z, half, z1), f.at(*a, half, z1)], cd);
            b.face(Group::Walls, vec![f.at(*a, -half, z1), f.at(*z, -half, z1), f.at(*z, half, z1), f.at(*a, half, z1)], UP);
            b.face(Group::Walls, vec![f.at(*a, -half, z0), f.at(*z, -half, z0), f.at(*z, half, z0), f.at(*a, half, z0)], neg(UP));
        }
    }
    let end = |b: &mut Builder, at: f64, set: &Intervals, outward: [f64; 3]| {
        for &(z0, z1) in set {
            b.face(Group::Walls, vec![f.at(at, -half, z0), f.at(at, half, z0), f.at(at, half, z1), f.at(at, -half, z1)], outward);
        }
    };
    let empty: Intervals = Vec::new();
    for k in 0..=spans.len() {
        let left = if k == 0 { &empty } else { &spans[k - 1].2 };
        let right = spans.get(k).map_or(&empty, |s| &s.2);
        let at = if k < spans.len() { spans[k].0 } else { spans[k - 1].1 };
        end(b, at, &difference(left, right), ad);
        end(b, at, &difference(right, left), neg(ad));
    }
}

fn panel(b: &mut Builder, group: Group, f: Frame, (a, z): (f64, f64), (z0, z1): (f64, f64)) {
    if z - a <= EPS || z1 - z0 <= EPS {
        return;
    }
    b.face(group, vec![f.at(a, 0.0, z0), f.at(z, 0.0, z0), f.at(z, 0.0, z1), f.at(a, 0.0, z1)], f.cross_dir());
}

fn hip_roof(b: &mut Builder, r: &Roof, base: f64, s: f64) {
    let fp = r.footprint;
    let (x0, x1, y0, y1) = (fp.x_min as f64, fp.x_max as f64, fp.y_min as f64, fp.y_max as f64);
    let (w, d) = (x1 - x0, y1 - y0);
    if w <= EPS || d <= EPS {
        return;
    }
    let top = base + r.apex_height.max(1) as f64;
    let p = |x: f64, y: f64, z: f64| [x * s, z, y * s];
    let (xc, yc) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let center = p(xc, yc, base);
    let corners = [p(x0, y0, base), p(x1, y0, base), p(x1, y1, base), p(x0, y1, base)];
    let mut add = |pts: Vec<[f64; 3]>| {
        let n = pts.len() as f64;
        let c = pts.iter().fold([0.0; 3], |acc, q| [acc[0] + q[0] / n, acc[1] + q[1] / n, acc[2] + q[2] / n]);
        let out = [c[0] - center[0], c[1] - center[1], c[2] - center[2]];
        b.face(Group::Roof, pts, out);
    };
    if (w - d).abs() <= EPS {
        let apex = p(xc, yc, top);
        for i in 0..4 {
            add(vec![corners[i], corners[(i + 1) % 4], apex]);
        }
    } else if w > d {
        let (r0, r1) = (p(x0 + d / 2.0, yc, top), p(x1 - d / 2.0, yc, top));
        add(vec![corners[0], corners[1], r1, r0]);
        add(vec![corners[1], corners[2], r1]);
        add(vec![corners[2], corners[3], r0, r1]);
        add(vec![corners[3], corners[0], r0]);
    } else {
        let (r0, r1) = (p(xc, y0 + w / 2.0, top), p(xc, y1 - w / 2.0, top));
        add(vec![corners[0], corners[1], r0]);
        add(vec![corners[1], corners[2], r1, r0]);
        add(vec![corners[2], corners[3], r1]);
        add(vec![corners[3], corners[0], r0, r1]);
    }
}

fn floor(b: &mut Builder, r: &Roof, s: f64) {
    let fp = r.footprint;
    let (x0, x1, y0, y1) = (fp.x_min as f64, fp.x_max as f64, fp.y_min as f64, fp.y_max as f64);
    if x1 - x0 <= EPS || y1 - y0 <= EPS {
        return;
    }
    let p = |x: f64, y: f64| [x * s, 0.0, y * s];
    b.face(Group::Floor, vec![p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)], UP);
}

pub fn extrude(m: &FloorPlanModel, cfg: &ExtrudeConfig) -> Result<Mesh> {
    if m.walls.is_empty() {
        return Err(Error::NothingToExtrude);
    }
    cfg.validate()?;
    let (h, s) = (cfg.wall_height, cfg.unit_scale);
    let openings = wall_openings(m, cfg);
    let mut b = Builder::default();

    for w in &m.walls {
        let span = wall_span(w);
        if span.1 - span.0 <= EPS {
            continue;
        }
        let f = Frame::of(w.orientation, wall_cross(w), s);
        let cuts: Vec<Opening> = openings.iter().filter(|o| o.wall_id == w.id).copied().collect();
        extrude_wall(&mut b, f, half_thickness(w), span, h, &cuts);
    }

    let avg = average_wall_thickness(&m.walls)?;
    for d in &m.doors {
        let o = d.orientation();
        let (iv, cross) = segment_along(&d.segment, o);
        let f = Frame::of(o, cross, s);
        let leaf_z = (0.0, cfg.door_height_fraction * h);
        let hosted: Vec<&Wall> = m.walls.iter().filter(|w| door_in_wall(d, w).is_some()).collect();
        if !hosted.is_empty() {
            for w in hosted {
                let along = door_in_wall(d, w).expect("hosted");
                panel(&mut b, Group::Doors, Frame::of(o, wall_cross(w), s), along, leaf_z);
            }
        } else if d.aligned {
            let t = d
                .wall_ids
                .iter()
                .filter_map(|id| m.wall(*id))
                .map(|w| w.thickness.max(1))
                .max()
                .unwrap_or(avg);
            if iv.1 - iv.0 > EPS {
                extrude_wall(&mut b, f, t as f64 / 2.0, iv, h, &[Opening {
                    wall_id: u32::MAX,
                    kind: OpeningKind::Door,
                    along: iv,
                    z: leaf_z,
                }]);
            }
            panel(&mut b, Group::Doors, f, iv, leaf_z);
        } else {
            panel(&mut b, Group::Doors, f, iv, leaf_z);
        }
    }

    for o in openings.iter().filter(|o| o.kind == OpeningKind::Window) {
        let w = m.wall(o.wall_id).expect("opening wall");
        let f = Frame::of(w.orientation, wall_cross(w), s);
        panel(&mut b, Group::Windows, f, o.along, o.z);
    }

    let roof = match m.roof {
        Some(r) => r,
        None => estimate_roof(&m.walls, FALLBACK_OVERHANG_FACTOR * avg, FALLBACK_APEX_RATIO)?,
    };
    hip_roof(&mut b, &roof, h, s);
    floor(&mut b, &roof, s);
    Ok(b.mesh)
}

fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Wavefront OBJ text: vertices, then faces grouped in the fixed group order.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut out = String::from("# planlift mesh\n");
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", fmt6(v[0]), fmt6(v[1]), fmt6(v[2]));
    }
    for g in Group::ALL {
        let mut faces = mesh.group_faces(g).peekable();
        if faces.peek().is_none() {
            continue;
        }
        let _ = writeln!(out, "g {}", g.name());
        for f in faces {
            let idx: Vec<String> = f.indices.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(out, "f {}", idx.join(" "));
        }
    }
    out
}

pub fn export_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_obj(mesh))?;
    Ok(())
}

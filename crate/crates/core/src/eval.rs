//! Scoring a recognized model against ground truth.

use std::fmt;
use std::time::Duration;

use crate::doors::Door;
use crate::error::{Error, Result};
use crate::mesh::MeshStats;
use crate::model::{FloorPlanModel, GroundTruth};
use crate::raster::BBox;
use crate::walls::{Orientation, Wall};
use crate::windows::Window;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchRule {
    /// Maximum endpoint (walls) or box-center (windows, doors) distance, px.
    pub tolerance: f64,
    pub one_to_one: bool,
}

impl Default for MatchRule {
    fn default() -> Self {
        MatchRule {
            tolerance: 5.0,
            one_to_one: true,
        }
    }
}

/// `matched` of `total` truth items recovered; `detected` items reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rate {
    pub matched: usize,
    pub total: usize,
    pub detected: usize,
}

impl Rate {
    pub fn ratio(&self) -> Option<f64> {
        (self.total > 0).then(|| self.matched as f64 / self.total as f64)
    }

    pub fn false_positives(&self) -> usize {
        self.detected - self.matched.min(self.detected)
    }

    pub fn add(&self, other: &Rate) -> Rate {
        Rate {
            matched: self.matched + other.matched,
            total: self.total + other.total,
            detected: self.detected + other.detected,
        }
    }
}

/// `m/n - p%`: whole percentages print bare, others with one decimal
/// rounded half up.
impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, n) = (self.matched as u64, self.total as u64);
        if n == 0 {
            return write!(f, "{m}/0 - n/a");
        }
        if (100 * m) % n == 0 {
            return write!(f, "{m}/{n} - {}%", 100 * m / n);
        }
        let tenths = (2000 * m + n) / (2 * n);
        write!(f, "{m}/{n} - {}.{}%", tenths / 10, tenths % 10)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Timings {
    pub recognize: Duration,
    pub extrude: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct EvalReport {
    pub walls: Rate,
    pub windows: Rate,
    pub doors: Rate,
    pub rule: MatchRule,
    pub timings: Option<Timings>,
    pub mesh: Option<MeshStats>,
}

impl EvalReport {
    pub fn door_false_positives(&self) -> usize {
        self.doors.false_positives()
    }

    pub fn add(&self, other: &EvalReport) -> EvalReport {
        EvalReport {
            walls: self.walls.add(&other.walls),
            windows: self.windows.add(&other.windows),
            doors: self.doors.add(&other.doors),
            rule: self.rule,
            timings: None,
            mesh: None,
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Worse endpoint distance, trying both endpoint pairings.
fn wall_distance(a: &Wall, b: &Wall) -> Option<f64> {
    if a.orientation != b.orientation {
        return None;
    }
    let [p1, p2] = a.endpoints();
    let [q1, q2] = b.endpoints();
    let f = |p: (i32, i32)| (p.0 as f64, p.1 as f64);
    let direct = dist(f(p1), f(q1)).max(dist(f(p2), f(q2)));
    let swapped = dist(f(p1), f(q2)).max(dist(f(p2), f(q1)));
    Some(direct.min(swapped))
}

fn long_axis(b: &BBox) -> Orientation {
    if b.width() >= b.height() {
        Orientation::Horizontal
    } else {
        Orientation::Vertical
    }
}

fn window_axis(w: &Window, m: &FloorPlanModel) -> Orientation {
    m.wall(w.wall_id).map_or_else(|| long_axis(&w.bbox), |h| h.orientation)
}

fn door_axis(d: &Door) -> Orientation {
    d.orientation()
}

/// Maximum matching over candidate pairs: edges are tried nearest first and
/// then improved by augmenting paths, so the count is optimal and ties
/// resolve deterministically.
fn match_count(n_det: usize, n_truth: usize, rule: &MatchRule, cost: impl Fn(usize, usize) -> Option<f64>) -> usize {
    let adj: Vec<Vec<(f64, usize)>> = (0..n_det)
        .map(|i| {
            let mut row: Vec<(f64, usize)> = (0..n_truth)
                .filter_map(|j| cost(i, j).filter(|c| *c <= rule.tolerance).map(|c| (c, j)))
                .collect();
            row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            row
        })
        .collect();

    if !rule.one_to_one {
        let mut hit = vec![false; n_truth];
        for row in &adj {
            for &(_, j) in row {
                hit[j] = true;
            }
        }
        return hit.iter().filter(|h| **h).count();
    }

    let mut owner: Vec<Option<usize>> = vec![None; n_truth];
    let mut edges: Vec<(f64, usize, usize)> =
        adj.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(c, j)| (c, i, j))).collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut taken = vec![false; n_det];
    for (_, i, j) in edges {
        if !taken[i] && owner[j].is_none() {
            taken[i] = true;
            owner[j] = Some(i);
        }
    }

    fn augment(i: usize, adj: &[Vec<(f64, usize)>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &(_, j) in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..n_det {
        if taken[i] {
            continue;
        }
        let mut seen = vec![false; n_truth];
        if augment(i, &adj, &mut owner, &mut seen) {
            taken[i] = true;
        }
    }
    owner.iter().filter(|o| o.is_some()).count()
}

fn rate(n_det: usize, n_truth: usize, rule: &MatchRule, cost: impl Fn(usize, usize) -> Option<f64>) -> Rate {
    Rate {
        matched: match_count(n_det, n_truth, rule, cost),
        total: n_truth,
        detected: n_det,
    }
}

pub fn evaluate(detected: &FloorPlanModel, truth: &GroundTruth, rule: &MatchRule) -> Result<EvalReport> {
    if let (Some(d), Some(t)) = (detected.dimensions(), truth.dimensions()) {
        if d != t {
            return Err(Error::DimensionMismatch { detected: d, truth: t });
        }
    }
    let walls = rate(detected.walls.len(), truth.walls.len(), rule, |i, j| {
        wall_distance(&detected.walls[i], &truth.walls[j])
    });
    let windows = rate(detected.windows.len(), truth.windows.len(), rule, |i, j| {
        let (a, b) = (&detected.windows[i], &truth.windows[j]);
        (window_axis(a, detected) == window_axis(b, truth)).then(|| dist(a.bbox.center(), b.bbox.center()))
    });
    let doors = rate(detected.doors.len(), truth.doors.len(), rule, |i, j| {
        let (a, b) = (&detected.doors[i], &truth.doors[j]);
        (door_axis(a) == door_axis(b)).then(|| dist(a.bbox.center(), b.bbox.center()))
    });
    Ok(EvalReport {
        walls,
        windows,
        doors,
        rule: *rule,
        timings: None,
        mesh: None,
    })
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

const LABEL: usize = 24;

/// Fixed-width text table. Timings and mesh rows appear only when present.
pub fn render_report(r: &EvalReport) -> String {
    let mut out = format!(
        "Matching: {}, tolerance {} px\n",
        if r.rule.one_to_one { "one-to-one" } else { "many-to-one" },
        r.rule.tolerance
    );
    let mut row = |label: &str, value: String| out += &format!("{label:<LABEL$}{value}\n");
    row("Wall detection", r.walls.to_string());
    row("Window detection", r.windows.to_string());
    row("Door detection", r.doors.to_string());
    row("Door false positives", r.door_false_positives().to_string());
    if let Some(t) = r.timings {
        row("Image Processing time", secs(t.recognize));
        if let Some(e) = t.extrude {
            row("Generation time", secs(e));
        }
    }
    if let Some(m) = r.mesh {
        out += &format!("Faces: {}, Triangles: {}\n", m.face_count, m.triangle_count);
    }
    out
}

/// Machine-readable `key=value` lines.
pub fn render_report_kv(r: &EvalReport) -> String {
    let mut out = String::new();
    for (k, v) in [("walls", r.walls), ("windows", r.windows), ("doors", r.doors)] {
        out += &format!("{k}.matched={}\n{k}.total={}\n{k}.detected={}\n", v.matched, v.total, v.detected);
    }
    out += &format!("doors.false_positives={}\n", r.door_false_positives());
    if let Some(t) = r.timings {
        out += &format!("time.image_processing_s={:.3}\n", t.recognize.as_secs_f64());
        if let Some(e) = t.extrude {
            out += &format!("time.generation_s={:.3}\n", e.as_secs_f64());
        }
    }
    if let Some(m) = r.mesh {
        out += &format!("mesh.faces={}\nmesh.triangles={}\n", m.face_count, m.triangle_count);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lines::Segment;
    use crate::model::Source;

    fn rate_str(m: usize, n: usize) -> String {
        Rate { matched: m, total: n, detected: m }.to_string()
    }

    #[test]
    fn rate_strings() {
        assert_eq!(rate_str(25, 25), "25/25 - 100%");
        assert_eq!(rate_str(8, 9), "8/9 - 88.9%");
        assert_eq!(rate_str(6, 7), "6/7 - 85.7%");
        assert_eq!(rate_str(1, 2), "1/2 - 50%");
        assert_eq!(rate_str(1, 8), "1/8 - 12.5%");
        assert_eq!(rate_str(0, 0), "0/0 - n/a");
        assert_eq!(rate_str(0, 3), "0/3 - 0%");
        assert_eq!(rate_str(4, 17), "4/17 - 23.5%");
        // 62.96 rounds half up to one decimal.
        assert_eq!(rate_str(34, 54), "34/54 - 63.0%");
    }

    fn hwall(id: u32, x1: i32, x2: i32, y: i32) -> Wall {
        Wall::from_centerline(id, Segment::new(x1, y, x2, y), 10)
    }

    fn model(walls: Vec<Wall>) -> FloorPlanModel {
        FloorPlanModel {
            walls,
            ..FloorPlanModel::default()
        }
    }

    #[test]
    fn endpoints_within_tolerance_match() {
        let truth = model(vec![hwall(0, 0, 100, 50), hwall(1, 0, 100, 200)]);
        let det = model(vec![hwall(0, 103, 2, 52), hwall(1, 0, 100, 210)]);
        let r = evaluate(&det, &truth, &MatchRule::default()).unwrap();
        assert_eq!(r.walls, Rate { matched: 1, total: 2, detected: 2 });
    }

    #[test]
    fn orientation_must_agree() {
        let truth = model(vec![hwall(0, 0, 100, 50)]);
        let det = model(vec![Wall::from_centerline(0, Segment::new(0, 50, 0, 150), 10)]);
        assert_eq!(evaluate(&det, &truth, &MatchRule::default()).unwrap().walls.matched, 0);
    }

    #[test]
    fn one_detection_cannot_match_twice() {
        let truth = model(vec![hwall(0, 0, 100, 50), hwall(1, 0, 100, 52)]);
        let det = model(vec![hwall(0, 0, 100, 51)]);
        let r = evaluate(&det, &truth, &MatchRule::default()).unwrap();
        assert_eq!(r.walls.matched, 1);
        let loose = MatchRule { one_to_one: false, ..MatchRule::default() };
        assert_eq!(evaluate(&det, &truth, &loose).unwrap().walls.matched, 2);
    }

    #[test]
    fn augmentation_beats_greedy() {
        // Greedy pairs d0 with t1 (closest); the optimum pairs d0-t0, d1-t1.
        let truth = model(vec![hwall(0, 0, 100, 50), hwall(1, 0, 100, 54)]);
        let det = model(vec![hwall(0, 0, 100, 53), hwall(1, 0, 100, 58)]);
        assert_eq!(evaluate(&det, &truth, &MatchRule::default()).unwrap().walls.matched, 2);
    }

    #[test]
    fn dimension_mismatch() {
        let src = |w, h| {
            Some(Source {
                width: w,
                height: h,
                fingerprint: String::new(),
            })
        };
        let mut a = model(vec![]);
        let mut b = model(vec![]);
        a.source = src(100, 100);
        b.source = src(100, 101);
        assert!(matches!(
            evaluate(&a, &b, &MatchRule::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn report_text() {
        let r = EvalReport {
            walls: Rate { matched: 8, total: 9, detected: 9 },
            doors: Rate { matched: 1, total: 1, detected: 2 },
            ..EvalReport::default()
        };
        let text = render_report(&r);
        assert!(text.starts_with("Matching: one-to-one, tolerance 5 px\n"));
        assert!(text.contains("Wall detection          8/9 - 88.9%\n"));
        assert!(text.contains("Window detection        0/0 - n/a\n"));
        assert!(text.contains("Door false positives    1\n"));
        assert!(!text.contains("time"));
        let timed = EvalReport {
            timings: Some(Timings {
                recognize: Duration::from_millis(2049),
                extrude: Some(Duration::from_millis(1300)),
            }),
            mesh: Some(MeshStats { face_count: 6, triangle_count: 12 }),
            ..r.clone()
        };
        let text = render_report(&timed);
        assert!(text.contains("Image Processing time   2.0 s\n"));
        assert!(text.contains("Generation time         1.3 s\n"));
        assert!(text.ends_with("Faces: 6, Triangles: 12\n"));
        assert!(render_report_kv(&r).contains("walls.matched=8\n"));
    }
}

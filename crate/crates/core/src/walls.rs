//! Wall recognition: cluster axis-filtered segments into boxes, merge
//! overlaps, close corners and derive centerlines.

use log::warn;

use crate::error::{Error, Result};
use crate::lines::{
    filter_horizontal, filter_vertical, probabilistic_hough, sort_left_right, sort_top_down,
    HoughParams, Segment,
};
use crate::raster::{BBox, EdgeImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

pub const DEFAULT_TEXTURE: &str = " ";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub id: u32,
    pub orientation: Orientation,
    pub centerline: Segment,
    pub thickness: u32,
    pub bbox: BBox,
    pub left_texture: String,
    pub right_texture: String,
}

fn half_up_mid(a: i32, b: i32) -> i32 {
    (a + b + 1).div_euclid(2)
}

impl Wall {
    /// Wall whose centerline is the box midline along `orientation`.
    pub fn from_box(id: u32, orientation: Orientation, b: BBox) -> Wall {
        let (centerline, thickness) = match orientation {
            Orientation::Horizontal => {
                let y = half_up_mid(b.y_min, b.y_max);
                (Segment::new(b.x_min, y, b.x_max, y), b.height() as u32)
            }
            Orientation::Vertical => {
                let x = half_up_mid(b.x_min, b.x_max);
                (Segment::new(x, b.y_min, x, b.y_max), b.width() as u32)
            }
        };
        Wall {
            id,
            orientation,
            centerline,
            thickness,
            bbox: b,
            left_texture: DEFAULT_TEXTURE.into(),
            right_texture: DEFAULT_TEXTURE.into(),
        }
    }

    /// Inverse of [`Wall::from_box`]: the box is rebuilt from the centerline.
    /// The centerline endpoints are normalized to increasing order.
    pub fn from_centerline(id: u32, centerline: Segment, thickness: u32) -> Wall {
        let t = thickness.max(1) as i32;
        let s = centerline;
        let orientation = if (s.x2 - s.x1).abs() >= (s.y2 - s.y1).abs() {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        };
        let b = match orientation {
            Orientation::Horizontal => {
                let y0 = s.y1 - t / 2;
                BBox::new(s.x1.min(s.x2), y0, s.x1.max(s.x2), y0 + t - 1)
            }
            Orientation::Vertical => {
                let x0 = s.x1 - t / 2;
                BBox::new(x0, s.y1.min(s.y2), x0 + t - 1, s.y1.max(s.y2))
            }
        };
        Wall {
            centerline: match orientation {
                Orientation::Horizontal => Segment::new(b.x_min, s.y1, b.x_max, s.y1),
                Orientation::Vertical => Segment::new(s.x1, b.y_min, s.x1, b.y_max),
            },
            ..Wall::from_box(id, orientation, b)
        }
    }

    /// The two centerline endpoints, start first.
    pub fn endpoints(&self) -> [(i32, i32); 2] {
        let c = self.centerline;
        [(c.x1, c.y1), (c.x2, c.y2)]
    }

    pub fn length(&self) -> u32 {
        match self.orientation {
            Orientation::Horizontal => self.bbox.width() as u32,
            Orientation::Vertical => self.bbox.height() as u32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterConfig {
    pub margin: u32,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { margin: 50 }
    }
}

/// Greedy region growing. The first remaining segment seeds a box; every
/// remaining segment touching the box enlarged by `margin` is absorbed and
/// the box grows to cover it. Sweeps repeat until nothing more is absorbed.
///
/// Returns each box with the indices of its member segments.
pub fn cluster_lines_with_members(segs: &[Segment], cfg: ClusterConfig) -> Vec<(BBox, Vec<usize>)> {
    let margin = cfg.margin as i32;
    let mut taken = vec![false; segs.len()];
    let mut out = Vec::new();
    for seed in 0..segs.len() {
        if taken[seed] {
            continue;
        }
        taken[seed] = true;
        let mut bbox = segs[seed].bbox();
        let mut members = vec![seed];
        loop {
            let mut grew = false;
            for (i, s) in segs.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let sb = s.bbox();
                if sb.intersects(&bbox.expand(margin)) {
                    taken[i] = true;
                    bbox = bbox.union(&sb);
                    members.push(i);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        members.sort_unstable();
        out.push((bbox, members));
    }
    out
}

pub fn cluster_lines(segs: &[Segment], cfg: ClusterConfig) -> Vec<BBox> {
    cluster_lines_with_members(segs, cfg)
        .into_iter()
        .map(|(b, _)| b)
        .collect()
}

fn box_order(b: &BBox) -> (i32, i32, i32, i32) {
    (b.y_min, b.x_min, b.y_max, b.x_max)
}

/// Unions every overlap-connected group of boxes into one box.
pub fn merge_overlapping(boxes: &[BBox]) -> Vec<BBox> {
    let mut cur: Vec<BBox> = boxes.to_vec();
    loop {
        let n = cur.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if cur[i].intersects(&cur[j]) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Option<BBox>> = vec![None; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            groups[r] = Some(match groups[r] {
                Some(b) => b.union(&cur[i]),
                None => cur[i],
            });
        }
        let next: Vec<BBox> = groups.into_iter().flatten().collect();
        let done = next.len() == n;
        cur = next;
        if done {
            break;
        }
    }
    cur.sort_by_key(box_order);
    cur
}

/// Along-axis end snapping, written for a horizontal `a` against a
/// perpendicular `b`; callers transpose for the vertical case.
fn snap_ends(a: &BBox, others: &[BBox], snap: i32) -> BBox {
    let mut out = *a;
    // (distance, new edge) of the closest candidate per end
    let mut right: Option<(i32, i32)> = None;
    let mut left: Option<(i32, i32)> = None;
    for b in others {
        if a.y_max < b.y_min - snap || a.y_min > b.y_max + snap {
            continue;
        }
        let reach = b.x_min - snap..=b.x_max + snap;
        if reach.contains(&a.x_max) && a.x_min < b.x_min {
            let cand = ((a.x_max - b.x_max).abs(), b.x_max);
            right = Some(right.map_or(cand, |r| r.min(cand)));
        }
        if reach.contains(&a.x_min) && a.x_max > b.x_max {
            let cand = ((a.x_min - b.x_min).abs(), b.x_min);
            left = Some(left.map_or(cand, |l| l.min(cand)));
        }
    }
    if let Some((_, x)) = right {
        out.x_max = x;
    }
    if let Some((_, x)) = left {
        out.x_min = x;
    }
    out
}

const ALIGN_ROUNDS: usize = 16;

/// Closes corners: a box end lying within `snap` px of a perpendicular box
/// is moved to that box's far edge, so L and T junctions meet flush.
pub fn align_intersections(hboxes: &[BBox], vboxes: &[BBox], snap: u32) -> (Vec<BBox>, Vec<BBox>) {
    let snap = snap as i32;
    let mut h = hboxes.to_vec();
    let mut v = vboxes.to_vec();
    for _ in 0..ALIGN_ROUNDS {
        let nh: Vec<BBox> = h.iter().map(|b| snap_ends(b, &v, snap)).collect();
        let vt: Vec<BBox> = nh.iter().map(BBox::transposed).collect();
        let nv: Vec<BBox> = v
            .iter()
            .map(|b| snap_ends(&b.transposed(), &vt, snap).transposed())
            .collect();
        let fixed = nh == h && nv == v;
        h = nh;
        v = nv;
        if fixed {
            break;
        }
    }
    (h, v)
}

/// Long side at least twice the short side, and the short side at least
/// `min_thickness`: thin single strokes (door leaves) are not walls.
pub fn is_wall_shaped(b: &BBox, min_thickness: u32) -> bool {
    let (w, h) = (b.width(), b.height());
    let (long, short) = (w.max(h), w.min(h));
    long >= 2 * short && short >= min_thickness as i32
}

/// Converts boxes to walls. Ids follow `(y_min, x_min)` order over both lists.
/// A box thicker than it is long is skipped with a warning.
pub fn walls_from_boxes(hboxes: &[BBox], vboxes: &[BBox]) -> Vec<Wall> {
    let mut tagged: Vec<(BBox, Orientation)> = Vec::new();
    for b in hboxes {
        if b.height() > b.width() {
            warn!("skipping horizontal box {b:?}: thicker than long");
        } else {
            tagged.push((*b, Orientation::Horizontal));
        }
    }
    for b in vboxes {
        if b.width() > b.height() {
            warn!("skipping vertical box {b:?}: thicker than long");
        } else {
            tagged.push((*b, Orientation::Vertical));
        }
    }
    tagged.sort_by_key(|(b, o)| (box_order(b), *o == Orientation::Vertical));
    tagged
        .into_iter()
        .enumerate()
        .map(|(i, (b, o))| Wall::from_box(i as u32, o, b))
        .collect()
}

pub fn average_wall_thickness(walls: &[Wall]) -> Result<u32> {
    if walls.is_empty() {
        return Err(Error::NoWalls);
    }
    let sum: u64 = walls.iter().map(|w| w.thickness as u64).sum();
    let n = walls.len() as u64;
    Ok((((2 * sum + n) / (2 * n)) as u32).max(1))
}

/// Tunables for the whole wall stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallConfig {
    pub cluster: ClusterConfig,
    pub axis_tolerance_deg: f64,
    pub snap: u32,
    pub min_thickness: u32,
}

impl Default for WallConfig {
    fn default() -> Self {
        WallConfig {
            cluster: ClusterConfig::default(),
            axis_tolerance_deg: 5.0,
            snap: 25,
            min_thickness: 6,
        }
    }
}

impl WallConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cluster.margin == 0 {
            return Err(Error::InvalidParameter(
                "cluster margin must be positive".into(),
            ));
        }
        if !(self.axis_tolerance_deg >= 0.0 && self.axis_tolerance_deg < 45.0) {
            return Err(Error::InvalidParameter(
                "axis tolerance must be in [0, 45) degrees".into(),
            ));
        }
        Ok(())
    }
}

/// Boxes of the horizontal and vertical walls found in an edge image.
pub fn detect_wall_boxes(
    img: &EdgeImage,
    hp: &HoughParams,
    wc: &WallConfig,
) -> (Vec<BBox>, Vec<BBox>) {
    let segs = probabilistic_hough(img, hp);
    let h = sort_top_down(&filter_horizontal(&segs, wc.axis_tolerance_deg));
    let v = sort_left_right(&filter_vertical(&segs, wc.axis_tolerance_deg));
    let keep = |boxes: Vec<BBox>| -> Vec<BBox> {
        boxes
            .into_iter()
            .filter(|b| is_wall_shaped(b, wc.min_thickness))
            .collect()
    };
    let hb = keep(merge_overlapping(&cluster_lines(&h, wc.cluster)));
    let vb = keep(merge_overlapping(&cluster_lines(&v, wc.cluster)));
    let (hb, vb) = align_intersections(&hb, &vb, wc.snap);
    let clamp = |bs: Vec<BBox>| -> Vec<BBox> {
        bs.iter()
            .filter_map(|b| b.clamp_to(img.width(), img.height()))
            .collect()
    };
    (clamp(hb), clamp(vb))
}

pub fn detect_walls(img: &EdgeImage, hp: &HoughParams, wc: &WallConfig) -> Vec<Wall> {
    let (h, v) = detect_wall_boxes(img, hp, wc);
    walls_from_boxes(&h, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hseg(y: i32, x1: i32, x2: i32) -> Segment {
        Segment::new(x1, y, x2, y)
    }

    #[test]
    fn cluster_examples() {
        let cfg = ClusterConfig::default();
        assert!(cluster_lines(&[], cfg).is_empty());
        let joined = cluster_lines(&[hseg(100, 0, 200), hseg(130, 190, 400)], cfg);
        assert_eq!(joined, vec![BBox::new(0, 100, 400, 130)]);
        let apart = cluster_lines(&[hseg(100, 0, 200), hseg(300, 0, 200)], cfg);
        assert_eq!(apart.len(), 2);
    }

    #[test]
    fn later_growth_pulls_in_skipped_segment() {
        // Segment 1 is out of reach of the seed until segment 2 grows the box.
        let segs = [hseg(0, 0, 10), hseg(0, 150, 200), hseg(0, 55, 100)];
        let out = cluster_lines(&segs, ClusterConfig::default());
        assert_eq!(out, vec![BBox::new(0, 0, 200, 0)]);
    }

    #[test]
    fn merge_examples() {
        let a = BBox::new(0, 0, 10, 10);
        let b = BBox::new(8, 8, 20, 20);
        let c = BBox::new(18, 18, 30, 30);
        assert_eq!(merge_overlapping(&[c, a, b]), vec![BBox::new(0, 0, 30, 30)]);
        assert_eq!(merge_overlapping(&[a, a]), vec![a]);
        let far = BBox::new(100, 0, 110, 5);
        assert_eq!(merge_overlapping(&[far, a]), vec![a, far]);
    }

    #[test]
    fn l_junction_closes() {
        let h = BBox::new(0, 0, 96, 10);
        let v = BBox::new(100, 0, 110, 200);
        let (nh, nv) = align_intersections(&[h], &[v], 10);
        assert_eq!(nh, vec![BBox::new(0, 0, 110, 10)]);
        assert_eq!(nv, vec![v]);
    }

    #[test]
    fn far_boxes_and_flush_t_are_untouched() {
        let h = BBox::new(0, 0, 100, 10);
        let v = BBox::new(200, 100, 210, 300);
        assert_eq!(align_intersections(&[h], &[v], 10), (vec![h], vec![v]));

        let top = BBox::new(0, 0, 300, 10);
        let stem = BBox::new(145, 0, 155, 200);
        assert_eq!(
            align_intersections(&[top], &[stem], 10),
            (vec![top], vec![stem])
        );
    }

    #[test]
    fn t_junction_stem_reaches_far_edge() {
        let top = BBox::new(0, 0, 300, 10);
        let stem = BBox::new(145, 11, 155, 200);
        let (_, nv) = align_intersections(&[top], &[stem], 25);
        assert_eq!(nv, vec![BBox::new(145, 0, 155, 200)]);
    }

    #[test]
    fn walls_from_boxes_midline() {
        let w = walls_from_boxes(&[BBox::new(0, 100, 400, 110)], &[]);
        assert_eq!(w[0].centerline, Segment::new(0, 105, 400, 105));
        assert_eq!(w[0].thickness, 11);
        assert!(walls_from_boxes(&[], &[]).is_empty());
        // Tall box in the horizontal list is skipped.
        assert!(walls_from_boxes(&[BBox::new(0, 0, 5, 50)], &[]).is_empty());
    }

    #[test]
    fn ids_follow_box_order() {
        let w = walls_from_boxes(
            &[BBox::new(0, 300, 400, 310), BBox::new(0, 0, 400, 10)],
            &[BBox::new(0, 0, 10, 310)],
        );
        let order: Vec<(u32, Orientation)> = w.iter().map(|w| (w.id, w.orientation)).collect();
        assert_eq!(
            order,
            vec![
                (0, Orientation::Horizontal),
                (1, Orientation::Vertical),
                (2, Orientation::Horizontal)
            ]
        );
        assert_eq!(w[2].bbox.y_min, 300);
    }

    #[test]
    fn centerline_roundtrip() {
        for (b, o) in [
            (BBox::new(0, 100, 400, 110), Orientation::Horizontal),
            (BBox::new(0, 100, 400, 111), Orientation::Horizontal),
            (BBox::new(-7, 3, -2, 90), Orientation::Vertical),
        ] {
            let w = Wall::from_box(4, o, b);
            assert_eq!(Wall::from_centerline(4, w.centerline, w.thickness), w);
        }
        let thin = Wall::from_centerline(0, Segment::new(1210, 37, 124, 37), 1);
        assert_eq!(thin.centerline, Segment::new(124, 37, 1210, 37));
        assert_eq!(thin.bbox, BBox::new(124, 37, 1210, 37));
    }

    #[test]
    fn average_thickness() {
        let w = |t: u32| Wall::from_centerline(0, Segment::new(0, 50, 100, 50), t);
        assert_eq!(average_wall_thickness(&[w(10)]).unwrap(), 10);
        assert_eq!(average_wall_thickness(&[w(8), w(12)]).unwrap(), 10);
        assert_eq!(average_wall_thickness(&[w(8), w(9)]).unwrap(), 9);
        assert!(matches!(average_wall_thickness(&[]), Err(Error::NoWalls)));
    }

    #[test]
    fn wall_shape_rule() {
        assert!(is_wall_shaped(&BBox::new(0, 0, 99, 9), 6));
        assert!(!is_wall_shaped(&BBox::new(0, 0, 99, 2), 6));
        assert!(!is_wall_shaped(&BBox::new(0, 0, 15, 9), 6));
    }
}

#![allow(dead_code)]

use std::collections::BTreeSet;

use planlift::doors::Door;
use planlift::lines::Segment;
use planlift::mesh::Mesh;
use planlift::model::{FloorPlanModel, Roof, Source};
use planlift::raster::{BBox, Mask};
use planlift::walls::Wall;
use planlift::windows::Window;
use proptest::prelude::*;

pub fn bbox() -> impl Strategy<Value = BBox> {
    (-50i32..900, -50i32..700, 0i32..200, 0i32..200).prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h))
}

fn texture() -> impl Strategy<Value = String> {
    prop_oneof![Just(" ".to_string()), "[a-zA-Z0-9 &<>\"'_\\-]{0,12}"]
}

fn wall(id: u32) -> impl Strategy<Value = Wall> {
    (any::<bool>(), 0i32..1000, 0i32..800, 1i32..600, 1u32..30, texture(), texture()).prop_map(
        move |(horizontal, a, b, len, t, l, r)| {
            let s = if horizontal {
                Segment::new(a, b, a + len, b)
            } else {
                Segment::new(a, b, a, b + len)
            };
            let mut w = Wall::from_centerline(id, s, t);
            w.left_texture = l;
            w.right_texture = r;
            w
        },
    )
}

fn segment() -> impl Strategy<Value = Segment> {
    (0i32..1000, 0i32..800, 0i32..1000, 0i32..800).prop_map(|(a, b, c, d)| Segment::new(a, b, c, d))
}

/// Structurally valid models: unique wall ids, every reference resolvable.
pub fn model() -> impl Strategy<Value = FloorPlanModel> {
    (0usize..8)
        .prop_flat_map(|n| {
            let walls: Vec<_> = (0..n as u32).map(|i| wall(i * 3 + 1)).collect();
            (walls, Just(n))
        })
        .prop_flat_map(|(walls, n)| {
            let ids: Vec<u32> = walls.iter().map(|w| w.id).collect();
            let pick = move || {
                let ids = ids.clone();
                (0..ids.len().max(1)).prop_map(move |i| ids.get(i).copied())
            };
            let windows = prop::collection::vec((pick(), segment(), bbox()), 0..if n > 0 { 5 } else { 1 });
            let ids2: Vec<u32> = walls.iter().map(|w| w.id).collect();
            let doors = prop::collection::vec(
                (bbox(), segment(), any::<bool>(), prop::sample::subsequence(ids2.clone(), 0..=ids2.len().min(2))),
                0..5,
            );
            let roof = prop::option::of((bbox(), 0u32..40, 1u32..200));
            let source = prop::option::of((1u32..4000, 1u32..4000, "[0-9a-f]{0,16}"));
            (Just(walls), windows, doors, roof, source)
        })
        .prop_map(|(walls, windows, doors, roof, source)| FloorPlanModel {
            windows: windows
                .into_iter()
                .filter_map(|(id, segment, bbox)| id.map(|wall_id| Window { wall_id, segment, bbox }))
                .collect(),
            doors: doors
                .into_iter()
                .map(|(bbox, segment, aligned, wall_ids)| Door { bbox, segment, aligned, wall_ids })
                .collect(),
            walls,
            roof: roof.map(|(footprint, overhang, apex_height)| Roof { footprint, overhang, apex_height }),
            source: source.map(|(width, height, fingerprint)| Source { width, height, fingerprint }),
        })
}

/// Minimal OBJ reader for round-trip checks: vertices and `(group, indices)`.
pub fn read_obj(text: &str) -> (Vec<[f64; 3]>, Vec<(String, Vec<usize>)>) {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut group = String::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|t| t.parse().unwrap()).collect();
                vertices.push([c[0], c[1], c[2]]);
            }
            Some("g") => group = it.next().unwrap_or("").to_string(),
            Some("f") => faces.push((group.clone(), it.map(|t| t.parse::<usize>().unwrap() - 1).collect())),
            _ => {}
        }
    }
    (vertices, faces)
}

/// Face multiset as sorted coordinate lists, rounded like the OBJ writer.
pub fn face_set(vertices: &[[f64; 3]], faces: &[(String, Vec<usize>)]) -> BTreeSet<(String, Vec<[i64; 3]>)> {
    let q = |v: [f64; 3]| [(v[0] * 1e6).round() as i64, (v[1] * 1e6).round() as i64, (v[2] * 1e6).round() as i64];
    faces
        .iter()
        .map(|(g, idx)| (g.clone(), idx.iter().map(|&i| q(vertices[i])).collect()))
        .collect()
}

pub fn mesh_faces(m: &Mesh) -> Vec<(String, Vec<usize>)> {
    m.faces.iter().map(|f| (f.group.name().to_string(), f.indices.clone())).collect()
}

/// Maximal horizontal and vertical runs of set pixels of at least `min_len`
/// pixels, found by scanning rows and columns directly.
pub fn axis_runs(img: &Mask, min_len: usize) -> Vec<Segment> {
    let mut runs = Vec::new();
    let (w, h) = (img.width(), img.height());
    for y in 0..h {
        let mut x = 0;
        while x < w {
            if img.get(x, y) {
                let start = x;
                while x < w && img.get(x, y) {
                    x += 1;
                }
                if x - start >= min_len {
                    runs.push(Segment::new(start as i32, y as i32, x as i32 - 1, y as i32));
                }
            } else {
                x += 1;
            }
        }
    }
    for x in 0..w {
        let mut y = 0;
        while y < h {
            if img.get(x, y) {
                let start = y;
                while y < h && img.get(x, y) {
                    y += 1;
                }
                if y - start >= min_len {
                    runs.push(Segment::new(x as i32, start as i32, x as i32, y as i32 - 1));
                }
            } else {
                y += 1;
            }
        }
    }
    runs
}

pub fn endpoint_error(a: &Segment, b: &Segment) -> f64 {
    let d = |p: (i32, i32), q: (i32, i32)| (((p.0 - q.0).pow(2) + (p.1 - q.1).pow(2)) as f64).sqrt();
    let (a1, a2, b1, b2) = ((a.x1, a.y1), (a.x2, a.y2), (b.x1, b.y1), (b.x2, b.y2));
    d(a1, b1).max(d(a2, b2)).min(d(a1, b2).max(d(a2, b1)))
}

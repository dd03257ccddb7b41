use std::path::PathBuf;

use planlift::doors::Door;
use planlift::eval::{evaluate, MatchRule};
use planlift::lines::Segment;
use planlift::mesh::{extrude, mesh_stats, write_obj, ExtrudeConfig, Group};
use planlift::model::{from_xml, to_xml, FloorPlanModel};
use planlift::synth::{generate_plan, SynthConfig};
use planlift::walls::{Orientation, Wall};
use planlift::{Pipeline, RunConfig};

const LONG_WALL: &str = r#"<?xml version="1.0" ?>
<building>
  <!-- objects and dimensions in one floor building -->
  <wall w_id="0" ltexture=" " rtexture=" ">
    <point>
      <x1>124</x1>
      <y1>37</y1>
      <x2>1210</x2>
      <y2>37</y2>
    </point>
  </wall>
</building>
"#;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden")).join(name)
}

/// Compares against the stored file; `PLANLIFT_BLESS=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("PLANLIFT_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden output");
}

fn door_in_wall() -> FloorPlanModel {
    let wall = Wall::from_centerline(0, Segment::new(0, 100, 400, 100), 10);
    let door_box = planlift::BBox::new(150, 95, 220, 105);
    FloorPlanModel {
        walls: vec![wall],
        doors: vec![Door {
            bbox: door_box,
            segment: Door::midline(&door_box),
            aligned: true,
            wall_ids: vec![0],
        }],
        ..FloorPlanModel::default()
    }
}

#[test]
fn synthetic_plans_recognized() {
    let p = Pipeline::new(RunConfig::default()).unwrap();
    for seed in [1, 2, 3] {
        let (img, truth) = generate_plan(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
        let m = p.recognize(&img).unwrap();
        let r = evaluate(&m, &truth, &MatchRule::default()).unwrap();
        assert_eq!(r.walls.matched, r.walls.total, "seed {seed} walls");
        assert_eq!(r.windows.matched, r.windows.total, "seed {seed} windows");
        assert_eq!(r.doors.matched, r.doors.total, "seed {seed} doors");
        assert!(r.door_false_positives() <= 1, "seed {seed}");

        // Truth and detection both survive the XML round trip.
        assert_eq!(from_xml(&to_xml(&m)).unwrap(), m);
        let mesh = p.extrude(&m).unwrap();
        assert!(mesh.group_faces(Group::Doors).count() >= truth.doors.len());
    }
}

#[test]
fn aligned_doors_join_wall_ends() {
    let p = Pipeline::new(RunConfig::default()).unwrap();
    let mut aligned = 0;
    for seed in 10..14 {
        let (img, _) = generate_plan(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
        let m = p.recognize(&img).unwrap();
        for d in m.doors.iter().filter(|d| d.aligned) {
            aligned += 1;
            assert_eq!(d.wall_ids.len(), 2);
            let ends: Vec<(i32, i32)> = d.wall_ids.iter().flat_map(|&id| m.wall(id).unwrap().endpoints()).collect();
            let s = d.segment;
            assert!(ends.contains(&(s.x1, s.y1)) && ends.contains(&(s.x2, s.y2)), "{d:?}");
            let o = m.wall(d.wall_ids[0]).unwrap().orientation;
            assert_eq!(d.orientation(), o);
            match o {
                Orientation::Horizontal => assert!((s.y1 - s.y2).abs() <= 1 + p.cfg.walls.min_thickness as i32 / 2),
                Orientation::Vertical => assert!((s.x1 - s.x2).abs() <= 1 + p.cfg.walls.min_thickness as i32 / 2),
            }
        }
    }
    assert!(aligned > 0);
}

#[test]
fn recognition_and_export_deterministic() {
    let (img, _) = generate_plan(&SynthConfig { seed: 7, ..SynthConfig::default() }).unwrap();
    let run = || {
        let p = Pipeline::new(RunConfig::default()).unwrap();
        let m = p.recognize(&img).unwrap();
        (to_xml(&m), write_obj(&p.extrude(&m).unwrap()))
    };
    assert_eq!(run(), run());
}

#[test]
fn golden_door_wall() {
    let mesh = extrude(&door_in_wall(), &ExtrudeConfig::default()).unwrap();
    let s = mesh_stats(&mesh);
    // Left span, lintel and right span: 4 long faces each, plus the two
    // outer ends and the two jambs.
    assert_eq!(mesh.group_faces(Group::Walls).count(), 16);
    assert_eq!(mesh.group_faces(Group::Doors).count(), 1);
    assert_eq!(s.triangle_count, mesh.faces.iter().map(|f| f.indices.len() - 2).sum::<usize>());
    check_golden("door_wall.obj", &write_obj(&mesh));
}

#[test]
fn golden_long_wall() {
    let m = from_xml(LONG_WALL.as_bytes()).unwrap();
    let mesh = extrude(&m, &ExtrudeConfig::default()).unwrap();
    assert_eq!(mesh.group_faces(Group::Walls).count(), 6);
    let xs: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
    assert!(xs.contains(&124.0) && xs.contains(&1210.0));
    check_golden("long_wall.obj", &write_obj(&mesh));
}

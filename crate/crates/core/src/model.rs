//! The recognized building and its XML form.
//!
//! The document shape is fixed: `<building>` holds a comment line, then one
//! element per wall, window and door, then an optional roof. Every object
//! carries a `<point>` block with `x1 y1 x2 y2`. Output bytes are
//! deterministic and parse back to an equal model.

use std::collections::HashSet;
use std::fmt::Write as _;

use roxmltree::{Document, Node};

use crate::doors::Door;
use crate::error::{Error, Result};
use crate::lines::Segment;
use crate::raster::BBox;
use crate::walls::Wall;
use crate::windows::Window;

pub const COMMENT: &str = "objects and dimensions in one floor building";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Roof {
    pub footprint: BBox,
    pub overhang: u32,
    pub apex_height: u32,
}

/// Where a model came from: source image size and run-config fingerprint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub width: u32,
    pub height: u32,
    pub fingerprint: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FloorPlanModel {
    pub walls: Vec<Wall>,
    pub windows: Vec<Window>,
    pub doors: Vec<Door>,
    pub roof: Option<Roof>,
    pub source: Option<Source>,
}

/// Annotated objects for a synthetic plan; same shape as a detection.
pub type GroundTruth = FloorPlanModel;

impl FloorPlanModel {
    pub fn dimensions(&self) -> Option<(u32, u32)> {
        self.source.as_ref().map(|s| (s.width, s.height))
    }

    pub fn wall(&self, id: u32) -> Option<&Wall> {
        self.walls.iter().find(|w| w.id == id)
    }

    /// Unique wall ids and no dangling references.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for w in &self.walls {
            if !ids.insert(w.id) {
                return Err(Error::SchemaViolation(format!("duplicate wall id {}", w.id)));
            }
        }
        let refs = self
            .windows
            .iter()
            .map(|w| w.wall_id)
            .chain(self.doors.iter().flat_map(|d| d.wall_ids.iter().copied()));
        for r in refs {
            if !ids.contains(&r) {
                return Err(Error::DanglingWallRef(r));
            }
        }
        Ok(())
    }
}

/// Bounding box of all wall boxes grown by `overhang`; the apex height is
/// `apex_ratio` times the shorter footprint side, rounded, at least 1.
pub fn estimate_roof(walls: &[Wall], overhang: u32, apex_ratio: f64) -> Result<Roof> {
    let first = walls.first().ok_or(Error::NoWalls)?;
    let hull = walls.iter().fold(first.bbox, |acc, w| acc.union(&w.bbox));
    let footprint = hull.expand(overhang as i32);
    let short = (footprint.x_max - footprint.x_min).min(footprint.y_max - footprint.y_min);
    let apex = (apex_ratio * short as f64 + 0.5).floor().max(1.0) as u32;
    Ok(Roof {
        footprint,
        overhang,
        apex_height: apex,
    })
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

fn write_fields(out: &mut String, indent: &str, tag: &str, fields: &[(&str, i64)]) {
    let _ = writeln!(out, "{indent}<{tag}>");
    for (k, v) in fields {
        let _ = writeln!(out, "{indent}  <{k}>{v}</{k}>");
    }
    let _ = writeln!(out, "{indent}</{tag}>");
}

fn write_point(out: &mut String, s: &Segment) {
    write_fields(
        out,
        "    ",
        "point",
        &[
            ("x1", s.x1 as i64),
            ("y1", s.y1 as i64),
            ("x2", s.x2 as i64),
            ("y2", s.y2 as i64),
        ],
    );
}

fn write_bbox(out: &mut String, b: &BBox) {
    write_fields(
        out,
        "    ",
        "bbox",
        &[
            ("x_min", b.x_min as i64),
            ("y_min", b.y_min as i64),
            ("x_max", b.x_max as i64),
            ("y_max", b.y_max as i64),
        ],
    );
}

pub fn to_xml(m: &FloorPlanModel) -> Vec<u8> {
    let mut out = String::from("<?xml version=\"1.0\" ?>\n");
    match &m.source {
        Some(s) => {
            let _ = writeln!(
                out,
                "<building width=\"{}\" height=\"{}\" config=\"{}\">",
                s.width,
                s.height,
                escape_attr(&s.fingerprint)
            );
        }
        None => out.push_str("<building>\n"),
    }
    let _ = writeln!(out, "  <!-- {COMMENT} -->");
    for w in &m.walls {
        let _ = writeln!(
            out,
            "  <wall w_id=\"{}\" ltexture=\"{}\" rtexture=\"{}\">",
            w.id,
            escape_attr(&w.left_texture),
            escape_attr(&w.right_texture)
        );
        write_point(&mut out, &w.centerline);
        if w.thickness != 1 {
            let _ = writeln!(out, "    <thickness>{}</thickness>", w.thickness);
        }
        out.push_str("  </wall>\n");
    }
    for (i, w) in m.windows.iter().enumerate() {
        let _ = writeln!(out, "  <window win_id=\"{i}\" w_id=\"{}\">", w.wall_id);
        write_point(&mut out, &w.segment);
        write_bbox(&mut out, &w.bbox);
        out.push_str("  </window>\n");
    }
    for (i, d) in m.doors.iter().enumerate() {
        let ids: Vec<String> = d.wall_ids.iter().map(|id| id.to_string()).collect();
        let _ = writeln!(
            out,
            "  <door d_id=\"{i}\" aligned=\"{}\" w_id=\"{}\">",
            d.aligned,
            ids.join(" ")
        );
        write_point(&mut out, &d.segment);
        write_bbox(&mut out, &d.bbox);
        out.push_str("  </door>\n");
    }
    if let Some(r) = &m.roof {
        out.push_str("  <roof>\n");
        let f = r.footprint;
        write_point(&mut out, &Segment::new(f.x_min, f.y_min, f.x_max, f.y_max));
        let _ = writeln!(out, "    <overhang>{}</overhang>", r.overhang);
        let _ = writeln!(out, "    <apex>{}</apex>", r.apex_height);
        out.push_str("  </roof>\n");
    }
    out.push_str("</building>\n");
    out.into_bytes()
}

fn violation(msg: impl Into<String>) -> Error {
    Error::SchemaViolation(msg.into())
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> Result<Vec<Node<'a, 'i>>> {
    let mut out = Vec::new();
    for c in node.children() {
        if c.is_element() {
            out.push(c);
        } else if c.is_text() && !c.text().unwrap_or("").trim().is_empty() {
            return Err(violation(format!(
                "unexpected text inside <{}>",
                node.tag_name().name()
            )));
        }
    }
    Ok(out)
}

fn check_attrs(node: Node, allowed: &[&str]) -> Result<()> {
    for a in node.attributes() {
        if !allowed.contains(&a.name()) {
            return Err(violation(format!(
                "unknown attribute {} on <{}>",
                a.name(),
                node.tag_name().name()
            )));
        }
    }
    Ok(())
}

fn attr<'a>(node: Node<'a, '_>, name: &str) -> Result<&'a str> {
    node.attribute(name).ok_or_else(|| {
        violation(format!(
            "<{}> missing attribute {name}",
            node.tag_name().name()
        ))
    })
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| violation(format!("{what}: not an integer: {text:?}")))
}

/// Integer children of `node`, each named in `names`, exactly once.
fn int_fields(node: Node, names: &[&str]) -> Result<Vec<i32>> {
    let tag = node.tag_name().name();
    check_attrs(node, &[])?;
    let mut vals: Vec<Option<i32>> = vec![None; names.len()];
    for c in elements(node)? {
        let name = c.tag_name().name();
        let i = names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| violation(format!("unknown element <{name}> in <{tag}>")))?;
        if vals[i].is_some() {
            return Err(violation(format!("duplicate <{name}> in <{tag}>")));
        }
        vals[i] = Some(parse_num(c.text().unwrap_or(""), name)?);
    }
    names
        .iter()
        .zip(vals)
        .map(|(n, v)| v.ok_or_else(|| violation(format!("<{tag}> missing <{n}>"))))
        .collect()
}

fn scalar(node: Node) -> Result<i64> {
    check_attrs(node, &[])?;
    if node.children().any(|c| c.is_element()) {
        return Err(violation(format!(
            "<{}> must hold a number",
            node.tag_name().name()
        )));
    }
    parse_num(node.text().unwrap_or(""), node.tag_name().name())
}

/// Child elements of an object, keyed by tag, each allowed at most once.
struct Parts<'a, 'i> {
    tag: &'static str,
    found: Vec<(&'static str, Node<'a, 'i>)>,
}

impl<'a, 'i> Parts<'a, 'i> {
    fn collect(node: Node<'a, 'i>, tag: &'static str, allowed: &[&'static str]) -> Result<Self> {
        let mut found: Vec<(&'static str, Node)> = Vec::new();
        for c in elements(node)? {
            let name = c.tag_name().name();
            let key = *allowed
                .iter()
                .find(|a| **a == name)
                .ok_or_else(|| violation(format!("unknown element <{name}> in <{tag}>")))?;
            if found.iter().any(|(k, _)| *k == key) {
                return Err(violation(format!("duplicate <{name}> in <{tag}>")));
            }
            found.push((key, c));
        }
        Ok(Parts { tag, found })
    }

    fn get(&self, key: &str) -> Option<Node<'a, 'i>> {
        self.found.iter().find(|(k, _)| *k == key).map(|(_, n)| *n)
    }

    fn need(&self, key: &str) -> Result<Node<'a, 'i>> {
        self.get(key)
            .ok_or_else(|| violation(format!("<{}> missing <{key}>", self.tag)))
    }
}

fn point(node: Node) -> Result<Segment> {
    let v = int_fields(node, &["x1", "y1", "x2", "y2"])?;
    Ok(Segment::new(v[0], v[1], v[2], v[3]))
}

fn bbox(node: Node) -> Result<BBox> {
    let v = int_fields(node, &["x_min", "y_min", "x_max", "y_max"])?;
    if v[0] > v[2] || v[1] > v[3] {
        return Err(violation("<bbox> min exceeds max"));
    }
    Ok(BBox {
        x_min: v[0],
        y_min: v[1],
        x_max: v[2],
        y_max: v[3],
    })
}

fn parse_wall(node: Node) -> Result<Wall> {
    check_attrs(node, &["w_id", "ltexture", "rtexture"])?;
    let id: u32 = parse_num(attr(node, "w_id")?, "w_id")?;
    let lt = node.attribute("ltexture").unwrap_or(" ");
    let rt = node.attribute("rtexture").unwrap_or(" ");
    let parts = Parts::collect(node, "wall", &["point", "thickness"])?;
    let line = point(parts.need("point")?)?;
    if line.x1 != line.x2 && line.y1 != line.y2 {
        return Err(violation(format!("wall {id} is not axis-aligned")));
    }
    let thickness = match parts.get("thickness") {
        Some(t) => {
            let t = scalar(t)?;
            if !(1..=u32::MAX as i64).contains(&t) {
                return Err(violation(format!("wall {id} thickness must be >= 1")));
            }
            t as u32
        }
        None => 1,
    };
    let mut w = Wall::from_centerline(id, line, thickness);
    w.left_texture = lt.to_string();
    w.right_texture = rt.to_string();
    Ok(w)
}

fn parse_window(node: Node) -> Result<Window> {
    check_attrs(node, &["win_id", "w_id"])?;
    parse_num::<u32>(attr(node, "win_id")?, "win_id")?;
    let wall_id = parse_num(attr(node, "w_id")?, "w_id")?;
    let parts = Parts::collect(node, "window", &["point", "bbox"])?;
    Ok(Window {
        wall_id,
        segment: point(parts.need("point")?)?,
        bbox: bbox(parts.need("bbox")?)?,
    })
}

fn parse_door(node: Node) -> Result<Door> {
    check_attrs(node, &["d_id", "aligned", "w_id"])?;
    parse_num::<u32>(attr(node, "d_id")?, "d_id")?;
    let aligned = match attr(node, "aligned")? {
        "true" => true,
        "false" => false,
        other => return Err(violation(format!("aligned must be true/false, got {other:?}"))),
    };
    let wall_ids = node
        .attribute("w_id")
        .unwrap_or("")
        .split_whitespace()
        .map(|t| parse_num(t, "w_id"))
        .collect::<Result<Vec<u32>>>()?;
    let parts = Parts::collect(node, "door", &["point", "bbox"])?;
    Ok(Door {
        segment: point(parts.need("point")?)?,
        bbox: bbox(parts.need("bbox")?)?,
        aligned,
        wall_ids,
    })
}

fn parse_roof(node: Node) -> Result<Roof> {
    check_attrs(node, &[])?;
    let parts = Parts::collect(node, "roof", &["point", "overhang", "apex"])?;
    let p = point(parts.need("point")?)?;
    if p.x1 > p.x2 || p.y1 > p.y2 {
        return Err(violation("roof corners out of order"));
    }
    let nonneg = |n: Node, what: &str| -> Result<u32> {
        u32::try_from(scalar(n)?).map_err(|_| violation(format!("{what} out of range")))
    };
    Ok(Roof {
        footprint: BBox {
            x_min: p.x1,
            y_min: p.y1,
            x_max: p.x2,
            y_max: p.y2,
        },
        overhang: nonneg(parts.need("overhang")?, "overhang")?,
        apex_height: nonneg(parts.need("apex")?, "apex")?,
    })
}

pub fn from_xml(bytes: &[u8]) -> Result<FloorPlanModel> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "building" {
        return Err(violation(format!(
            "root element must be <building>, got <{}>",
            root.tag_name().name()
        )));
    }
    check_attrs(root, &["width", "height", "config"])?;
    let source = match (root.attribute("width"), root.attribute("height")) {
        (Some(w), Some(h)) => Some(Source {
            width: parse_num(w, "width")?,
            height: parse_num(h, "height")?,
            fingerprint: root.attribute("config").unwrap_or("").to_string(),
        }),
        (None, None) => None,
        _ => return Err(violation("width and height must appear together")),
    };
    let mut m = FloorPlanModel {
        source,
        ..FloorPlanModel::default()
    };
    for node in elements(root)? {
        match node.tag_name().name() {
            "wall" => m.walls.push(parse_wall(node)?),
            "window" => m.windows.push(parse_window(node)?),
            "door" => m.doors.push(parse_door(node)?),
            "roof" => {
                if m.roof.is_some() {
                    return Err(violation("more than one <roof>"));
                }
                m.roof = Some(parse_roof(node)?);
            }
            other => return Err(violation(format!("unknown element <{other}>"))),
        }
    }

    let ids: HashSet<u32> = m.walls.iter().map(|w| w.id).collect();
    let referenced = !m.windows.is_empty() || m.doors.iter().any(|d| !d.wall_ids.is_empty());
    if ids.len() != m.walls.len() && !referenced {
        // Wall ids repeated (e.g. all "0") and nothing points at them:
        // number the walls in document order.
        for (i, w) in m.walls.iter_mut().enumerate() {
            w.id = i as u32;
        }
    }
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walls::Orientation;

    const FRAGMENT: &str = r#"<?xml version="1.0" ?>
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
  <wall w_id="0" ltexture=" " rtexture=" ">
    <point>
      <x1>124</x1>
      <y1>253</y1>
      <x2>200</x2>
      <y2>253</y2>
    </point>
  </wall>
  <wall w_id="0" ltexture=" " rtexture=" ">
    <point>
      <x1>404</x1>
      <y1>253</y1>
      <x2>583</x2>
      <y2>253</y2>
    </point>
  </wall>
</building>
"#;

    #[test]
    fn fragment_parses_and_reserializes() {
        let m = from_xml(FRAGMENT.as_bytes()).unwrap();
        let lines: Vec<Segment> = m.walls.iter().map(|w| w.centerline).collect();
        assert_eq!(
            lines,
            vec![
                Segment::new(124, 37, 1210, 37),
                Segment::new(124, 253, 200, 253),
                Segment::new(404, 253, 583, 253)
            ]
        );
        assert!(m.walls.iter().all(|w| w.orientation == Orientation::Horizontal));
        let ids: Vec<u32> = m.walls.iter().map(|w| w.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);

        // The first wall renders to the first block verbatim.
        let out = String::from_utf8(to_xml(&m)).unwrap();
        let first_block = &FRAGMENT[..FRAGMENT.find("  </wall>\n").unwrap() + 10];
        assert!(out.starts_with(first_block), "{out}");
    }

    #[test]
    fn empty_model() {
        let xml = String::from_utf8(to_xml(&FloorPlanModel::default())).unwrap();
        assert_eq!(
            xml,
            "<?xml version=\"1.0\" ?>\n<building>\n  <!-- objects and dimensions in one floor building -->\n</building>\n"
        );
        assert_eq!(from_xml(xml.as_bytes()).unwrap(), FloorPlanModel::default());
    }

    #[test]
    fn missing_coordinate_rejected() {
        let bad = FRAGMENT.replacen("      <x2>1210</x2>\n", "", 1);
        assert!(matches!(from_xml(bad.as_bytes()), Err(Error::SchemaViolation(_))));
        let nan = FRAGMENT.replacen("<x2>1210</x2>", "<x2>12.5</x2>", 1);
        assert!(matches!(from_xml(nan.as_bytes()), Err(Error::SchemaViolation(_))));
        let unknown = FRAGMENT.replacen("</building>", "<stairs/></building>", 1);
        assert!(matches!(from_xml(unknown.as_bytes()), Err(Error::SchemaViolation(_))));
        assert!(matches!(from_xml(b"<building>"), Err(Error::MalformedXml(_))));
    }

    #[test]
    fn dangling_reference_rejected() {
        let mut m = from_xml(FRAGMENT.as_bytes()).unwrap();
        m.windows.push(Window {
            wall_id: 9,
            segment: Segment::new(130, 37, 160, 37),
            bbox: BBox::new(130, 37, 160, 37),
        });
        assert!(matches!(from_xml(&to_xml(&m)), Err(Error::DanglingWallRef(9))));
    }

    #[test]
    fn full_model_roundtrip() {
        let walls = vec![
            Wall::from_box(0, Orientation::Horizontal, BBox::new(0, 0, 400, 11)),
            Wall::from_box(1, Orientation::Vertical, BBox::new(0, 0, 11, 300)),
            Wall {
                left_texture: "brick & \"tile\"\n".into(),
                ..Wall::from_box(2, Orientation::Horizontal, BBox::new(300, 289, 400, 300))
            },
        ];
        let roof = estimate_roof(&walls, 8, 0.3).unwrap();
        let m = FloorPlanModel {
            windows: vec![Window {
                wall_id: 0,
                segment: Segment::new(100, 6, 160, 6),
                bbox: BBox::new(100, 0, 160, 11),
            }],
            doors: vec![
                Door {
                    bbox: BBox::new(200, 12, 260, 72),
                    segment: Segment::new(199, 6, 261, 6),
                    aligned: true,
                    wall_ids: vec![0, 2],
                },
                Door {
                    bbox: BBox::new(50, 50, 90, 60),
                    segment: Segment::new(50, 55, 90, 55),
                    aligned: false,
                    wall_ids: vec![],
                },
            ],
            roof: Some(roof),
            source: Some(Source {
                width: 640,
                height: 480,
                fingerprint: "abc123".into(),
            }),
            walls,
        };
        let xml = to_xml(&m);
        assert_eq!(from_xml(&xml).unwrap(), m);
        assert_eq!(to_xml(&m), xml);
    }

    #[test]
    fn roof_examples() {
        let w = Wall::from_box(0, Orientation::Horizontal, BBox::new(0, 0, 100, 10));
        let r = estimate_roof(&[w], 8, 0.3).unwrap();
        assert_eq!(r.footprint, BBox::new(-8, -8, 108, 18));
        assert_eq!(r.apex_height, 8);
        assert!(matches!(estimate_roof(&[], 8, 0.3), Err(Error::NoWalls)));

        let m = from_xml(FRAGMENT.as_bytes()).unwrap();
        let r = estimate_roof(&m.walls, 0, 0.3).unwrap();
        assert_eq!(r.footprint, BBox::new(124, 37, 1210, 253));
    }
}

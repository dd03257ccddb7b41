use std::collections::VecDeque;

use super::{BBox, EdgeImage, Mask};

/// Outer boundary of one 8-connected component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    /// Moore boundary trace, starting at the component's first pixel in
    /// raster order and running clockwise.
    pub points: Vec<(i32, i32)>,
    pub bbox: BBox,
    /// Pixel count of the component.
    pub area: usize,
}

// Clockwise starting west, y pointing down.
const DIRS: [(i32, i32); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(dx: i32, dy: i32) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("neighbor offset")
}

fn trace_boundary(img: &Mask, start: (i32, i32), size: usize) -> Vec<(i32, i32)> {
    let mut chain = vec![start];
    let mut current = start;
    // The west neighbor of the raster-first pixel is always background.
    let mut back = 0usize;
    let mut first_step: Option<(i32, i32)> = None;
    let limit = 8 * size + 16;

    for _ in 0..limit {
        let mut next = None;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let p = (current.0 + DIRS[d].0, current.1 + DIRS[d].1);
            if img.get_signed(p.0, p.1) {
                let prev = (back + k - 1) % 8;
                let q = (current.0 + DIRS[prev].0, current.1 + DIRS[prev].1);
                back = dir_index(q.0 - p.0, q.1 - p.1);
                next = Some(p);
                break;
            }
        }
        let Some(p) = next else {
            break; // isolated pixel
        };
        match first_step {
            None => first_step = Some(p),
            Some(f) if current == start && p == f => break,
            _ => {}
        }
        chain.push(p);
        current = p;
    }
    if chain.len() > 1 && chain.last() == Some(&start) {
        chain.pop();
    }
    chain
}

/// Traces every 8-connected foreground component, ordered by the
/// `(y_min, x_min)` corner of its bounding box.
pub fn find_contours(img: &EdgeImage) -> Vec<Contour> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !img.data[i] || seen[i] {
                continue;
            }
            seen[i] = true;
            queue.push_back((x as i32, y as i32));
            let mut bbox = BBox::point(x as i32, y as i32);
            let mut size = 0usize;
            while let Some((cx, cy)) = queue.pop_front() {
                size += 1;
                bbox = bbox.union(&BBox::point(cx, cy));
                for (dx, dy) in DIRS {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if img.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            let points = trace_boundary(img, (x as i32, y as i32), size);
            out.push(Contour { points, bbox, area: size });
        }
    }
    out.sort_by_key(|c| (c.bbox.y_min, c.bbox.x_min));
    out
}

/// Paints each contour's filled interior onto a blank image of the given
/// size, then bridges one-pixel gaps so fragments of one symbol fuse into a
/// single blob.
pub fn redraw(img: &EdgeImage, contours: &[Contour]) -> EdgeImage {
    let (w, h) = (img.width(), img.height());
    let mut filled = Mask::blank(w, h);
    for c in contours {
        fill_contour(&mut filled, c);
    }
    bridge(&filled)
}

fn fill_contour(out: &mut Mask, contour: &Contour) {
    // Local grid with a one-pixel background frame around the box.
    let b = contour.bbox.expand(1);
    let (lw, lh) = (b.width() as usize, b.height() as usize);
    let mut wall = vec![false; lw * lh];
    for &(x, y) in &contour.points {
        wall[(y - b.y_min) as usize * lw + (x - b.x_min) as usize] = true;
    }
    let mut outside = vec![false; lw * lh];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    outside[0] = true;
    while let Some((x, y)) = queue.pop_front() {
        let mut visit = |nx: usize, ny: usize| {
            let j = ny * lw + nx;
            if !wall[j] && !outside[j] {
                outside[j] = true;
                queue.push_back((nx, ny));
            }
        };
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < lw {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < lh {
            visit(x, y + 1);
        }
    }
    for ly in 0..lh {
        for lx in 0..lw {
            if !outside[ly * lw + lx] {
                out.set_signed(lx as i32 + b.x_min, ly as i32 + b.y_min, true);
            }
        }
    }
}

/// Turns on every background pixel whose opposite neighbors (W/E, N/S or
/// either diagonal pair) are both set, joining strokes separated by a
/// single pixel without growing any component past their union.
fn bridge(m: &Mask) -> Mask {
    const PAIRS: [((i32, i32), (i32, i32)); 4] = [
        ((-1, 0), (1, 0)),
        ((0, -1), (0, 1)),
        ((-1, -1), (1, 1)),
        ((1, -1), (-1, 1)),
    ];
    Mask::from_fn(m.width(), m.height(), |x, y| {
        let (x, y) = (x as i32, y as i32);
        m.get_signed(x, y)
            || PAIRS
                .iter()
                .any(|(a, b)| m.get_signed(x + a.0, y + a.1) && m.get_signed(x + b.0, y + b.1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: i32, y0: i32, side: i32, w: usize, h: usize) -> Mask {
        Mask::from_fn(w, h, |x, y| {
            let (x, y) = (x as i32, y as i32);
            x >= x0 && x < x0 + side && y >= y0 && y < y0 + side
        })
    }

    #[test]
    fn blank_has_no_contours() {
        assert!(find_contours(&Mask::blank(10, 10)).is_empty());
    }

    #[test]
    fn filled_square_box_and_boundary() {
        let m = square(10, 10, 5, 30, 30);
        let cs = find_contours(&m);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].bbox, BBox::new(10, 10, 14, 14));
        // A 5x5 square has 16 boundary pixels.
        assert_eq!(cs[0].points.len(), 16);
        for &(x, y) in &cs[0].points {
            assert!(x == 10 || x == 14 || y == 10 || y == 14);
        }
    }

    #[test]
    fn separated_squares_are_two_components() {
        let mut m = square(2, 2, 4, 20, 10);
        for y in 2..6 {
            for x in 8..12 {
                m.set(x, y, true);
            }
        }
        assert_eq!(find_contours(&m).len(), 2);
    }

    #[test]
    fn single_pixel_and_diagonal_line() {
        let mut m = Mask::blank(8, 8);
        m.set(3, 3, true);
        let c = find_contours(&m);
        assert_eq!(c[0].points, vec![(3, 3)]);

        let diag = Mask::from_fn(8, 8, |x, y| x == y);
        let c = find_contours(&diag);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].bbox, BBox::new(0, 0, 7, 7));
        // Out and back along the line.
        assert_eq!(c[0].points.len(), 14);
    }

    #[test]
    fn redraw_of_closed_outline_fills_it() {
        let outline = Mask::from_fn(30, 30, |x, y| {
            (5..=20).contains(&x)
                && (5..=15).contains(&y)
                && (x == 5 || x == 20 || y == 5 || y == 15)
        });
        let cs = find_contours(&outline);
        assert_eq!(cs.len(), 1);
        let r = redraw(&outline, &cs);
        assert_eq!(r.count(), 16 * 11);
        let again = find_contours(&r);
        assert_eq!(again.len(), 1);
        assert_eq!(again[0].bbox, cs[0].bbox);
    }

    #[test]
    fn redraw_merges_halves_with_one_pixel_gap() {
        // Square outline x,y in 5..=25 cut by a one-column gap at x = 15.
        let m = Mask::from_fn(40, 40, |x, y| {
            let on = (5..=25).contains(&x)
                && (5..=25).contains(&y)
                && (x == 5 || x == 25 || y == 5 || y == 25);
            on && x != 15
        });
        let before = find_contours(&m);
        assert_eq!(before.len(), 2);
        let after = find_contours(&redraw(&m, &before));
        assert_eq!(after.len(), 1);
        assert_eq!(after[0].bbox, BBox::new(5, 5, 25, 25));
    }

    #[test]
    fn redraw_empty_is_blank() {
        let m = square(1, 1, 3, 10, 10);
        assert!(redraw(&m, &[]).is_blank());
    }

    #[test]
    fn blob_touching_border_keeps_its_box() {
        let m = square(0, 0, 4, 10, 10);
        let cs = find_contours(&m);
        let r = redraw(&m, &cs);
        assert_eq!(r, m);
    }
}

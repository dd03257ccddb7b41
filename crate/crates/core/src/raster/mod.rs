//! Raster types and the preprocessing stage.
//!
//! Images are plain row-major buffers. [`GrayImage`] holds luminance, while
//! [`Mask`] holds one boolean per pixel and serves both as the binarized plan
//! ([`BinaryImage`], `true` = ink) and as the edge map ([`EdgeImage`],
//! `true` = edge pixel).

mod canny;
mod contours;

use std::path::Path;

use crate::error::{Error, Result};

pub use canny::{canny, gradient_magnitude, CannyParams};
pub use contours::{find_contours, redraw, Contour};

/// Inclusive integer pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BBox {
    pub x_min: i32,
    pub y_min: i32,
    pub x_max: i32,
    pub y_max: i32,
}

impl BBox {
    /// Builds a box from two corners in any order.
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        BBox {
            x_min: x0.min(x1),
            y_min: y0.min(y1),
            x_max: x0.max(x1),
            y_max: y0.max(y1),
        }
    }

    pub fn point(x: i32, y: i32) -> Self {
        BBox::new(x, y, x, y)
    }

    /// Pixel count along x.
    pub fn width(&self) -> i32 {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> i32 {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> i64 {
        self.width() as i64 * self.height() as i64
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) as f64 / 2.0,
            (self.y_min + self.y_max) as f64 / 2.0,
        )
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.x_min <= other.x_max
            && other.x_min <= self.x_max
            && self.y_min <= other.y_max
            && other.y_min <= self.y_max
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Grows the box by `margin` pixels on every side.
    pub fn expand(&self, margin: i32) -> BBox {
        BBox {
            x_min: self.x_min - margin,
            y_min: self.y_min - margin,
            x_max: self.x_max + margin,
            y_max: self.y_max + margin,
        }
    }

    pub fn contains_point(&self, x: i32, y: i32) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.contains_point(other.x_min, other.y_min)
            && self.contains_point(other.x_max, other.y_max)
    }

    /// Intersection with the image rectangle, or `None` when nothing is left.
    pub fn clamp_to(&self, width: usize, height: usize) -> Option<BBox> {
        if width == 0 || height == 0 {
            return None;
        }
        let b = BBox {
            x_min: self.x_min.max(0),
            y_min: self.y_min.max(0),
            x_max: self.x_max.min(width as i32 - 1),
            y_max: self.y_max.min(height as i32 - 1),
        };
        (b.x_min <= b.x_max && b.y_min <= b.y_max).then_some(b)
    }

    /// Swaps the roles of x and y.
    pub fn transposed(&self) -> BBox {
        BBox {
            x_min: self.y_min,
            y_min: self.x_min,
            x_max: self.y_max,
            y_max: self.x_max,
        }
    }

    pub fn translate(&self, dx: i32, dy: i32) -> BBox {
        BBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }
}

/// Luminance raster, 0 = black, 255 = white.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer holds {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Uniform image. Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "zero-dimension image");
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image from a per-pixel function `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut img = GrayImage::filled(width, height, 0);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Copies the pixels under `bbox` (clamped to the image).
    pub fn crop(&self, bbox: &BBox) -> Option<GrayImage> {
        let b = bbox.clamp_to(self.width, self.height)?;
        let (w, h) = (b.width() as usize, b.height() as usize);
        let mut data = Vec::with_capacity(w * h);
        for y in b.y_min as usize..=b.y_max as usize {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + b.x_min as usize..=row + b.x_max as usize]);
        }
        Some(GrayImage {
            width: w,
            height: h,
            data,
        })
    }

    /// Quarter-turn clockwise rotation.
    pub fn rotated_cw(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        GrayImage::from_fn(h, w, |x, y| self.get(y, h - 1 - x))
    }
}

/// One boolean per pixel, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

/// Thresholded plan, `true` marks ink.
pub type BinaryImage = Mask;
/// Edge map, `true` marks an edge pixel.
pub type EdgeImage = Mask;

impl Mask {
    pub fn blank(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Mask::blank(width, height);
        for y in 0..height {
            for x in 0..width {
                m.data[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Bounds-checked read; outside pixels read as `false`.
    pub fn get_signed(&self, x: i32, y: i32) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    /// Bounds-checked write; outside coordinates are ignored.
    pub fn set_signed(&mut self, x: i32, y: i32, value: bool) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = value;
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Sub-mask under `bbox` (clamped). Coordinates restart at the box origin.
    pub fn crop(&self, bbox: &BBox) -> Option<Mask> {
        let b = bbox.clamp_to(self.width, self.height)?;
        Some(Mask::from_fn(
            b.width() as usize,
            b.height() as usize,
            |x, y| self.get(x + b.x_min as usize, y + b.y_min as usize),
        ))
    }

    pub fn transposed(&self) -> Mask {
        Mask::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Renders set pixels black on white.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v { 0 } else { 255 }).collect(),
        }
    }
}

/// How `binarize` picks its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Fixed(u8),
    Otsu,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Fixed(128)
    }
}

/// Reads a PNG or binary PGM file and converts it to luminance.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)
        .map_err(|e| Error::UnreadableFile(format!("{}: {e}", path.display())))?;
    decode_gray(&bytes).map_err(|e| match e {
        Error::UnreadableFile(msg) => Error::UnreadableFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Decodes an in-memory PNG or PGM.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage> {
    use image::{DynamicImage, ImageFormat};

    let format = image::guess_format(bytes)
        .map_err(|_| Error::UnsupportedFormat("unrecognized image signature".into()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
        return Err(Error::UnsupportedFormat(format!("{format:?}")));
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::UnreadableFile(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    let data = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLuma16(buf) => buf
            .into_raw()
            .into_iter()
            .map(|v| ((v as u32 * 255 + 32767) / 65535) as u8)
            .collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luma(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    GrayImage::new(width, height, data)
}

/// 0.299 R + 0.587 G + 0.114 B, rounded half-up.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Binary PGM (P5) encoding.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Foreground iff luminance is below the threshold.
pub fn binarize(img: &GrayImage, threshold: Threshold) -> BinaryImage {
    let t = match threshold {
        Threshold::Fixed(t) => t as u16,
        Threshold::Otsu => otsu_threshold(img),
    };
    Mask {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&v| (v as u16) < t).collect(),
    }
}

/// Otsu's method, returned as the exclusive upper bound of the dark class.
pub fn otsu_threshold(img: &GrayImage) -> u16 {
    let mut hist = [0u64; 256];
    for &v in &img.data {
        hist[v as usize] += 1;
    }
    let total = img.data.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();

    let (mut weight_bg, mut sum_bg) = (0.0, 0.0);
    let (mut best, mut best_var) = (0usize, -1.0);
    for (k, &count) in hist.iter().enumerate() {
        weight_bg += count as f64;
        if weight_bg == 0.0 {
            continue;
        }
        let weight_fg = total - weight_bg;
        if weight_fg == 0.0 {
            break;
        }
        sum_bg += k as f64 * count as f64;
        let mean_bg = sum_bg / weight_bg;
        let mean_fg = (sum_all - sum_bg) / weight_fg;
        let between = weight_bg * weight_fg * (mean_bg - mean_fg).powi(2);
        if between > best_var {
            best_var = between;
            best = k;
        }
    }
    best as u16 + 1
}

/// Clears every pixel inside `bbox`, leaving the rest untouched.
pub fn erase_region(img: &EdgeImage, bbox: &BBox) -> EdgeImage {
    let mut out = img.clone();
    erase_region_mut(&mut out, bbox);
    out
}

pub fn erase_region_mut(img: &mut EdgeImage, bbox: &BBox) {
    if let Some(b) = bbox.clamp_to(img.width, img.height) {
        for y in b.y_min as usize..=b.y_max as usize {
            let row = y * img.width;
            img.data[row + b.x_min as usize..=row + b.x_max as usize].fill(false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_of_pure_red_and_blue() {
        assert_eq!(luma(255, 0, 0), 76);
        assert_eq!(luma(0, 0, 255), 29);
        assert_eq!(luma(255, 255, 255), 255);
    }

    #[test]
    fn decode_png_color_and_white() {
        let mut buf = Vec::new();
        let rgb = image::RgbImage::from_raw(2, 1, vec![255, 0, 0, 0, 0, 255]).unwrap();
        rgb.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        let g = decode_gray(&buf).unwrap();
        assert_eq!(g.data(), &[76, 29]);

        let mut buf = Vec::new();
        image::GrayImage::from_raw(1, 1, vec![255])
            .unwrap()
            .write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        assert_eq!(decode_gray(&buf).unwrap(), GrayImage::filled(1, 1, 255));
    }

    #[test]
    fn truncated_png_is_unreadable() {
        let mut buf = Vec::new();
        image::GrayImage::from_raw(8, 8, vec![7; 64])
            .unwrap()
            .write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        buf.truncate(buf.len() / 2);
        assert!(matches!(decode_gray(&buf), Err(Error::UnreadableFile(_))));
    }

    #[test]
    fn unknown_signature_is_unsupported() {
        assert!(matches!(
            decode_gray(b"hello world, not an image"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn pgm_roundtrip() {
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 40 + y) as u8);
        assert_eq!(decode_gray(&encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            GrayImage::new(0, 4, vec![]),
            Err(Error::ZeroDimension)
        ));
    }

    #[test]
    fn binarize_fixed() {
        let white = GrayImage::filled(4, 4, 255);
        assert!(binarize(&white, Threshold::Fixed(128)).is_blank());
        let black = GrayImage::filled(4, 4, 0);
        assert_eq!(binarize(&black, Threshold::Fixed(128)).count(), 16);

        let row = GrayImage::new(5, 1, vec![0, 100, 127, 128, 200]).unwrap();
        let b = binarize(&row, Threshold::Fixed(128));
        assert_eq!(b.data(), &[true, true, true, false, false]);
    }

    #[test]
    fn otsu_splits_bimodal_image() {
        let img = GrayImage::from_fn(10, 10, |x, _| if x < 5 { 20 } else { 230 });
        let t = otsu_threshold(&img);
        assert!(t > 20 && t <= 230, "threshold {t}");
        let b = binarize(&img, Threshold::Otsu);
        assert_eq!(b.count(), 50);
    }

    #[test]
    fn erase_full_and_empty_boxes() {
        let m = Mask::from_fn(6, 6, |x, y| (x + y) % 2 == 0);
        assert!(erase_region(&m, &BBox::new(0, 0, 5, 5)).is_blank());
        assert_eq!(erase_region(&m, &BBox::new(10, 10, 20, 20)), m);
        assert_eq!(erase_region(&m, &BBox::new(-5, -5, -1, -1)), m);
    }

    #[test]
    fn erase_one_of_two_blobs() {
        let m = Mask::from_fn(40, 20, |x, y| {
            (2..12).contains(&y) && ((2..12).contains(&x) || (25..35).contains(&x))
        });
        assert_eq!(m.count(), 200);
        let e = erase_region(&m, &BBox::new(2, 2, 11, 11));
        assert_eq!(e.count(), 100);
        assert!(e.get(30, 5) && !e.get(5, 5));
    }

    #[test]
    fn bbox_clamp() {
        assert_eq!(
            BBox::new(-3, -3, 4, 100).clamp_to(10, 10),
            Some(BBox::new(0, 0, 4, 9))
        );
        assert_eq!(BBox::new(12, 0, 14, 3).clamp_to(10, 10), None);
    }
}

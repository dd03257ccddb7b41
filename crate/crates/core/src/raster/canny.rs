use std::collections::VecDeque;

use super::{EdgeImage, GrayImage, Mask};
use crate::error::{Error, Result};

/// Canny tunables. Thresholds are on raw 3x3 Sobel magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CannyParams {
    pub low: f32,
    pub high: f32,
    pub sigma: f32,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            low: 50.0,
            high: 150.0,
            sigma: 1.4,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.low >= 0.0 && self.low <= self.high) {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds must satisfy 0 <= low <= high (got {}, {})",
                self.low, self.high
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(
                "canny sigma must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, img: &GrayImage) -> Result<EdgeImage> {
        canny(img, self.low, self.high, self.sigma)
    }
}

fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as i32;
    let mut k: Vec<f32> = (-radius..=radius)
        .map(|i| (-(i * i) as f32 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f32 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn blur(img: &GrayImage, kernel: &[f32]) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    let r = (kernel.len() / 2) as i32;
    let src: Vec<f32> = img.data().iter().map(|&v| v as f32).collect();
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sx = (x as i32 + i as i32 - r).clamp(0, w as i32 - 1) as usize;
                acc += k * src[y * w + sx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sy = (y as i32 + i as i32 - r).clamp(0, h as i32 - 1) as usize;
                acc += k * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn sobel(buf: &[f32], w: usize, h: usize) -> (Vec<f32>, Vec<f32>) {
    let at = |x: i32, y: i32| {
        let x = x.clamp(0, w as i32 - 1) as usize;
        let y = y.clamp(0, h as i32 - 1) as usize;
        buf[y * w + x]
    };
    let mut gx = vec![0.0f32; w * h];
    let mut gy = vec![0.0f32; w * h];
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

fn check_size(img: &GrayImage, kernel: usize) -> Result<()> {
    if img.width() < kernel || img.height() < kernel {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            kernel,
        });
    }
    Ok(())
}

/// Sobel magnitude of the Gaussian-blurred image, row-major.
pub fn gradient_magnitude(img: &GrayImage, sigma: f32) -> Result<Vec<f32>> {
    let kernel = gaussian_kernel(sigma);
    check_size(img, kernel.len())?;
    let blurred = blur(img, &kernel);
    let (gx, gy) = sobel(&blurred, img.width(), img.height());
    Ok(gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect())
}

/// Gaussian blur, Sobel gradients, 4-bin non-maximum suppression and
/// hysteresis with 8-connected linking.
pub fn canny(img: &GrayImage, low: f32, high: f32, sigma: f32) -> Result<EdgeImage> {
    CannyParams { low, high, sigma }.validate()?;
    let kernel = gaussian_kernel(sigma);
    check_size(img, kernel.len())?;
    let (w, h) = (img.width(), img.height());
    let blurred = blur(img, &kernel);
    let (gx, gy) = sobel(&blurred, w, h);
    let mag: Vec<f32> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();

    // 0: weak/none, 1: weak candidate, 2: strong
    let mut class = vec![0u8; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m < low || m == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            // `before` lies against the gradient direction, `after` along it.
            let (before, after) = if !(22.5..157.5).contains(&angle) {
                (i - 1, i + 1)
            } else if angle < 67.5 {
                (i - w - 1, i + w + 1)
            } else if angle < 112.5 {
                (i - w, i + w)
            } else {
                (i - w + 1, i + w - 1)
            };
            if m > mag[before] && m >= mag[after] {
                class[i] = if m >= high { 2 } else { 1 };
            }
        }
    }

    let mut out = Mask::blank(w, h);
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &c) in class.iter().enumerate() {
        if c == 2 {
            out.data[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as i32, (i / w) as i32);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 && !out.data[j] {
                    out.data[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(out)
}

//! Image to model: binarize, edges, walls, windows, doors, roof.

use crate::config::RunConfig;
use crate::doors::{detect_doors, isolate_residual, DoorMatcherConfig};
use crate::error::Result;
use crate::mesh::{extrude, Mesh};
use crate::model::{estimate_roof, FloorPlanModel, Source};
use crate::raster::{binarize, GrayImage};
use crate::walls::{average_wall_thickness, detect_wall_boxes, walls_from_boxes};
use crate::windows::detect_windows;

/// A validated run configuration with its door matcher loaded once.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub cfg: RunConfig,
    pub matcher: DoorMatcherConfig,
    fingerprint: String,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Pipeline> {
        cfg.validate()?;
        let matcher = cfg.door_matcher()?;
        let fingerprint = cfg.fingerprint();
        Ok(Pipeline {
            cfg,
            matcher,
            fingerprint,
        })
    }

    pub fn recognize(&self, gray: &GrayImage) -> Result<FloorPlanModel> {
        let cfg = &self.cfg;
        let ink = binarize(gray, cfg.threshold);
        let clean = ink.to_gray();
        let edges = cfg.canny.apply(&clean)?;

        let (h, v) = detect_wall_boxes(&edges, &cfg.hough, &cfg.walls);
        let walls = walls_from_boxes(&h, &v);
        let windows = detect_windows(&edges, &walls, &cfg.hough, &cfg.windows);

        let wall_boxes: Vec<_> = walls.iter().map(|w| w.bbox).collect();
        let window_boxes: Vec<_> = windows.iter().map(|w| w.bbox).collect();
        let residual = isolate_residual(&edges, &wall_boxes, &window_boxes);
        let doors = detect_doors(&clean, &residual, &walls, &self.matcher);

        let roof = match average_wall_thickness(&walls) {
            Ok(avg) => Some(estimate_roof(&walls, cfg.roof_overhang_factor * avg, cfg.roof_apex_ratio)?),
            Err(_) => None,
        };
        let m = FloorPlanModel {
            walls,
            windows,
            doors,
            roof,
            source: Some(Source {
                width: gray.width() as u32,
                height: gray.height() as u32,
                fingerprint: self.fingerprint.clone(),
            }),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn extrude(&self, m: &FloorPlanModel) -> Result<Mesh> {
        extrude(m, &self.cfg.extrude)
    }
}

pub fn recognize(gray: &GrayImage, cfg: &RunConfig) -> Result<FloorPlanModel> {
    Pipeline::new(cfg.clone())?.recognize(gray)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_page_gives_empty_model() {
        let m = recognize(&GrayImage::filled(200, 150, 255), &RunConfig::default()).unwrap();
        assert!(m.walls.is_empty() && m.windows.is_empty() && m.doors.is_empty());
        assert!(m.roof.is_none());
        assert_eq!(m.dimensions(), Some((200, 150)));
    }

    #[test]
    fn tiny_image_rejected() {
        assert!(recognize(&GrayImage::filled(4, 4, 255), &RunConfig::default()).is_err());
    }
}

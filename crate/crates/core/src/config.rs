//! Every tunable of a run, loadable from flat `key=value` text.
//!
//! Lines are `key = value`; blank lines and `#` comments are skipped.
//! Unknown keys are errors so typos never pass silently.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::doors::DoorMatcherConfig;
use crate::error::{Error, Result};
use crate::eval::MatchRule;
use crate::lines::HoughParams;
use crate::mesh::ExtrudeConfig;
use crate::raster::{CannyParams, Threshold};
use crate::walls::WallConfig;
use crate::windows::WindowConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub threshold: Threshold,
    pub canny: CannyParams,
    /// Also carries the run seed.
    pub hough: HoughParams,
    pub walls: WallConfig,
    pub windows: WindowConfig,
    pub door_hist_threshold: f64,
    pub door_template_threshold: f64,
    /// `None` uses the built-in glyph set.
    pub door_assets: Option<PathBuf>,
    /// Roof overhang in multiples of the average wall thickness.
    pub roof_overhang_factor: u32,
    pub roof_apex_ratio: f64,
    pub extrude: ExtrudeConfig,
    pub matching: MatchRule,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            threshold: Threshold::default(),
            canny: CannyParams::default(),
            hough: HoughParams::default(),
            walls: WallConfig::default(),
            windows: WindowConfig::default(),
            door_hist_threshold: 0.2,
            door_template_threshold: 0.9,
            door_assets: None,
            roof_overhang_factor: 2,
            roof_apex_ratio: 0.3,
            extrude: ExtrudeConfig::default(),
            matching: MatchRule::default(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("{key}: expected true/false, got {v:?}"))),
    }
}

pub fn parse_threshold(v: &str) -> Result<Threshold> {
    if v.eq_ignore_ascii_case("otsu") {
        Ok(Threshold::Otsu)
    } else {
        Ok(Threshold::Fixed(num("threshold", v)?))
    }
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.hough.seed
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.hough.seed = num(key, v)?,
            "threshold" => self.threshold = parse_threshold(v)?,
            "canny.low" => self.canny.low = num(key, v)?,
            "canny.high" => self.canny.high = num(key, v)?,
            "canny.sigma" => self.canny.sigma = num(key, v)?,
            "hough.rho" => self.hough.rho_step = num(key, v)?,
            "hough.theta" => self.hough.theta_step = num(key, v)?,
            "hough.votes" => self.hough.vote_threshold = num(key, v)?,
            "hough.min_len" => self.hough.min_line_length = num(key, v)?,
            "hough.max_gap" => self.hough.max_line_gap = num(key, v)?,
            "cluster.margin" => self.walls.cluster.margin = num(key, v)?,
            "walls.axis_tolerance" => self.walls.axis_tolerance_deg = num(key, v)?,
            "walls.snap" => self.walls.snap = num(key, v)?,
            "walls.min_thickness" => self.walls.min_thickness = num(key, v)?,
            "windows.min_line_fraction" => self.windows.min_line_fraction = num(key, v)?,
            "windows.min_height_factor" => self.windows.min_height_factor = num(key, v)?,
            "windows.max_height_fraction" => self.windows.max_height_fraction = num(key, v)?,
            "windows.corner_margin" => {
                self.windows.corner_margin = if v == "auto" { None } else { Some(num(key, v)?) }
            }
            "windows.axis_tolerance" => self.windows.axis_tolerance_deg = num(key, v)?,
            "doors.hist_threshold" => self.door_hist_threshold = num(key, v)?,
            "doors.template_threshold" => self.door_template_threshold = num(key, v)?,
            "doors.assets" => {
                self.door_assets = if v.is_empty() { None } else { Some(PathBuf::from(v)) }
            }
            "roof.overhang_factor" => self.roof_overhang_factor = num(key, v)?,
            "roof.apex_ratio" => self.roof_apex_ratio = num(key, v)?,
            "mesh.wall_height" => self.extrude.wall_height = num(key, v)?,
            "mesh.door_height_fraction" => self.extrude.door_height_fraction = num(key, v)?,
            "mesh.window_sill_fraction" => self.extrude.window_sill_fraction = num(key, v)?,
            "mesh.window_top_fraction" => self.extrude.window_top_fraction = num(key, v)?,
            "mesh.unit_scale" => self.extrude.unit_scale = num(key, v)?,
            "match.tolerance" => self.matching.tolerance = num(key, v)?,
            "match.one_to_one" => self.matching.one_to_one = flag(key, v)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key=value", n + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Canonical dump; `from_text(to_text())` restores the config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries(true) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    fn entries(&self, with_paths: bool) -> Vec<(&'static str, String)> {
        let threshold = match self.threshold {
            Threshold::Fixed(t) => t.to_string(),
            Threshold::Otsu => "otsu".into(),
        };
        let mut e = vec![
            ("seed", self.hough.seed.to_string()),
            ("threshold", threshold),
            ("canny.low", self.canny.low.to_string()),
            ("canny.high", self.canny.high.to_string()),
            ("canny.sigma", self.canny.sigma.to_string()),
            ("hough.rho", self.hough.rho_step.to_string()),
            ("hough.theta", self.hough.theta_step.to_string()),
            ("hough.votes", self.hough.vote_threshold.to_string()),
            ("hough.min_len", self.hough.min_line_length.to_string()),
            ("hough.max_gap", self.hough.max_line_gap.to_string()),
            ("cluster.margin", self.walls.cluster.margin.to_string()),
            ("walls.axis_tolerance", self.walls.axis_tolerance_deg.to_string()),
            ("walls.snap", self.walls.snap.to_string()),
            ("walls.min_thickness", self.walls.min_thickness.to_string()),
            ("windows.min_line_fraction", self.windows.min_line_fraction.to_string()),
            ("windows.min_height_factor", self.windows.min_height_factor.to_string()),
            ("windows.max_height_fraction", self.windows.max_height_fraction.to_string()),
            (
                "windows.corner_margin",
                self.windows.corner_margin.map_or("auto".into(), |m| m.to_string()),
            ),
            ("windows.axis_tolerance", self.windows.axis_tolerance_deg.to_string()),
            ("doors.hist_threshold", self.door_hist_threshold.to_string()),
            ("doors.template_threshold", self.door_template_threshold.to_string()),
        ];
        if with_paths {
            let assets = self.door_assets.as_ref().map_or(String::new(), |p| p.display().to_string());
            e.push(("doors.assets", assets));
        }
        e.extend([
            ("roof.overhang_factor", self.roof_overhang_factor.to_string()),
            ("roof.apex_ratio", self.roof_apex_ratio.to_string()),
            ("mesh.wall_height", self.extrude.wall_height.to_string()),
            ("mesh.door_height_fraction", self.extrude.door_height_fraction.to_string()),
            ("mesh.window_sill_fraction", self.extrude.window_sill_fraction.to_string()),
            ("mesh.window_top_fraction", self.extrude.window_top_fraction.to_string()),
            ("mesh.unit_scale", self.extrude.unit_scale.to_string()),
            ("match.tolerance", self.matching.tolerance.to_string()),
            ("match.one_to_one", self.matching.one_to_one.to_string()),
        ]);
        e
    }

    /// First 16 hex digits of the SHA-256 of the canonical dump. The asset
    /// path is left out so the same assets in another directory agree.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries(false) {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.canny.validate()?;
        self.hough.validate()?;
        self.walls.validate()?;
        self.windows.validate()?;
        self.extrude.validate()?;
        let in_unit = |t: f64| t > 0.0 && t <= 1.0;
        if !in_unit(self.door_hist_threshold) || !in_unit(self.door_template_threshold) {
            return Err(Error::InvalidParameter("door thresholds must lie in (0, 1]".into()));
        }
        if !(self.roof_apex_ratio >= 0.0 && self.roof_apex_ratio.is_finite()) {
            return Err(Error::InvalidParameter("roof apex ratio must be non-negative".into()));
        }
        if !(self.matching.tolerance >= 0.0 && self.matching.tolerance.is_finite()) {
            return Err(Error::InvalidParameter("match tolerance must be non-negative".into()));
        }
        Ok(())
    }

    /// Door matcher from the asset directory, or the built-in glyphs.
    pub fn door_matcher(&self) -> Result<DoorMatcherConfig> {
        let mut m = match &self.door_assets {
            Some(dir) => DoorMatcherConfig::load_dir(dir)?,
            None => DoorMatcherConfig::builtin(),
        };
        m.hist_threshold = self.door_hist_threshold;
        m.template_threshold = self.door_template_threshold;
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::default().fingerprint().len(), 16);
    }

    #[test]
    fn text_roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.threshold = Threshold::Otsu;
        cfg.hough.seed = 42;
        cfg.windows.corner_margin = Some(7);
        cfg.door_assets = Some(PathBuf::from("/tmp/doors"));
        cfg.extrude.wall_height = 310.5;
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_overrides() {
        let cfg = RunConfig::from_text("# plan settings\nseed = 9\n\ncluster.margin=40 # tighter\n").unwrap();
        assert_eq!(cfg.seed(), 9);
        assert_eq!(cfg.walls.cluster.margin, 40);
        assert_eq!(cfg.hough.min_line_length, 20);
    }

    #[test]
    fn bad_lines_rejected() {
        assert!(RunConfig::from_text("nope=1").is_err());
        assert!(RunConfig::from_text("seed").is_err());
        assert!(RunConfig::from_text("seed=x").is_err());
        let mut cfg = RunConfig::from_text("hough.min_len=0").unwrap();
        assert!(cfg.validate().is_err());
        cfg.hough.min_line_length = 20;
        cfg.door_hist_threshold = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fingerprint_tracks_settings_not_asset_path() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.door_assets = Some(PathBuf::from("elsewhere"));
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.hough.seed = 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}

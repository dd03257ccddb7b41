use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use log::info;
use rayon::prelude::*;

use planlift::eval::{evaluate, render_report, render_report_kv, EvalReport, Timings};
use planlift::mesh::{export_obj, mesh_stats, ExtrudeConfig, MeshStats};
use planlift::model::{from_xml, to_xml, FloorPlanModel};
use planlift::raster::{load_gray, save_pgm};
use planlift::synth::{door_asset_set, generate_plan, SynthConfig};
use planlift::{config, Pipeline, RunConfig};

use crate::Tunables;

pub const ASSETS_ENV: &str = "PLANLIFT_ASSETS";

/// Defaults, then the config file, then flags; the asset directory falls
/// back to `PLANLIFT_ASSETS` when neither names one.
pub fn resolve_config(t: &Tunables) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &t.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in config {}", path.display()))?;
    }
    if let Some(s) = t.seed {
        cfg.hough.seed = s;
    }
    if let Some(v) = &t.threshold {
        cfg.threshold = config::parse_threshold(v)?;
    }
    if let Some(v) = t.cluster_margin {
        cfg.walls.cluster.margin = v;
    }
    if let Some(v) = t.hough_min_len {
        cfg.hough.min_line_length = v;
    }
    if let Some(v) = t.hough_max_gap {
        cfg.hough.max_line_gap = v;
    }
    if let Some(v) = t.wall_height {
        cfg.extrude.wall_height = v;
    }
    if let Some(dir) = &t.door_assets {
        cfg.door_assets = Some(dir.clone());
    } else if cfg.door_assets.is_none() {
        if let Some(dir) = std::env::var_os(ASSETS_ENV).filter(|v| !v.is_empty()) {
            cfg.door_assets = Some(PathBuf::from(dir));
        }
    }
    if t.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_model(path: &Path) -> Result<FloorPlanModel> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    from_xml(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn counts(m: &FloorPlanModel) -> String {
    format!("Walls: {}, Windows: {}, Doors: {}", m.walls.len(), m.windows.len(), m.doors.len())
}

fn stats_line(s: MeshStats) -> String {
    format!("Faces: {}, Triangles: {}", s.face_count, s.triangle_count)
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

pub fn recognize(image: &Path, out: &Path, cfg: RunConfig) -> Result<()> {
    let p = Pipeline::new(cfg)?;
    let gray = load_gray(image).with_context(|| format!("loading {}", image.display()))?;
    let t = Instant::now();
    let m = p.recognize(&gray)?;
    let elapsed = t.elapsed();
    write(out, to_xml(&m))?;
    println!("{}", counts(&m));
    println!("Elapsed: {}", secs(elapsed));
    Ok(())
}

pub fn extrude(xml: &Path, out: &Path, cfg: RunConfig) -> Result<()> {
    let m = read_model(xml)?;
    let mesh = planlift::mesh::extrude(&m, &cfg.extrude)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    export_obj(&mesh, out).with_context(|| format!("writing {}", out.display()))?;
    println!("{}", stats_line(mesh_stats(&mesh)));
    Ok(())
}

fn sidecar_truth(image: &Path) -> Option<PathBuf> {
    let stem = image.file_stem()?.to_str()?;
    let p = image.with_file_name(format!("{stem}.truth.xml"));
    p.is_file().then_some(p)
}

/// Recognize + extrude one image into `dir`; returns the console text.
fn pipeline_one(p: &Pipeline, image: &Path, dir: &Path, truth: Option<&Path>, extrude_cfg: &ExtrudeConfig) -> Result<String> {
    let gray = load_gray(image).with_context(|| format!("loading {}", image.display()))?;
    let t = Instant::now();
    let m = p.recognize(&gray)?;
    let recognize_time = t.elapsed();
    write(&dir.join("image.xml"), to_xml(&m))?;

    let t = Instant::now();
    let mesh = planlift::mesh::extrude(&m, extrude_cfg)
        .with_context(|| format!("extruding {}", image.display()))?;
    let extrude_time = t.elapsed();
    export_obj(&mesh, dir.join("model.obj"))?;
    let stats = mesh_stats(&mesh);

    // The report file leaves out wall-clock times so reruns are byte-identical.
    let name = image.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let mut report = format!("Image: {name}\n{}\n", counts(&m));
    match truth {
        Some(tp) => {
            let truth = read_model(tp)?;
            let mut r: EvalReport = evaluate(&m, &truth, &p.cfg.matching)?;
            r.mesh = Some(stats);
            report += &render_report(&r);
        }
        None => report += &format!("{}\n", stats_line(stats)),
    }
    write(&dir.join("report.txt"), &report)?;
    let timings = Timings {
        recognize: recognize_time,
        extrude: Some(extrude_time),
    };
    info!("{}: {:?}", image.display(), timings);
    Ok(format!(
        "{report}Image Processing time {}\nGeneration time {}\nOutput: {}\n",
        secs(recognize_time),
        secs(extrude_time),
        dir.display()
    ))
}

pub fn pipeline(images: &[PathBuf], out: &Path, truth: Option<&Path>, cfg: RunConfig, jobs: usize) -> Result<()> {
    if truth.is_some() && images.len() != 1 {
        bail!("--truth needs exactly one input image");
    }
    let extrude_cfg = cfg.extrude;
    let p = Pipeline::new(cfg)?;
    let single = images.len() == 1;
    let job = |image: &PathBuf| -> Result<String> {
        let dir = if single {
            out.to_path_buf()
        } else {
            let stem = image.file_stem().context("input without a file name")?;
            out.join(stem)
        };
        let truth = truth.map(Path::to_path_buf).or_else(|| sidecar_truth(image));
        pipeline_one(&p, image, &dir, truth.as_deref(), &extrude_cfg)
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<Result<String>> = pool.install(|| images.par_iter().map(job).collect());

    let mut failed = 0;
    for (image, r) in images.iter().zip(results) {
        match r {
            Ok(text) => print!("{text}"),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e:#}", image.display());
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} images failed", images.len());
    }
    Ok(())
}

pub struct Layout {
    pub rows: u32,
    pub cols: u32,
    pub width: u32,
    pub height: u32,
    pub doors: Option<u32>,
    pub windows: Option<u32>,
}

pub fn synth(out: &Path, count: u64, layout: Layout, cfg: RunConfig) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let base = SynthConfig::default();
    for seed in cfg.seed()..cfg.seed() + count {
        let sc = SynthConfig {
            seed,
            rows: layout.rows,
            cols: layout.cols,
            width: layout.width,
            height: layout.height,
            door_count: layout.doors.map_or(base.door_count, |n| (n, n)),
            window_count: layout.windows.map_or(base.window_count, |n| (n, n)),
            ..base
        };
        let (img, truth) = generate_plan(&sc)?;
        let stem = format!("plan_{seed:04}");
        save_pgm(&img, out.join(format!("{stem}.pgm")))?;
        write(&out.join(format!("{stem}.truth.xml")), to_xml(&truth))?;
        println!("{stem}: {}", counts(&truth));
    }
    Ok(())
}

pub fn eval(predicted: &Path, truth: &Path, kv: Option<&Path>, cfg: RunConfig) -> Result<()> {
    let r = evaluate(&read_model(predicted)?, &read_model(truth)?, &cfg.matching)?;
    print!("{}", render_report(&r));
    if let Some(path) = kv {
        write(path, render_report_kv(&r))?;
    }
    Ok(())
}

pub fn assets(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, img) in door_asset_set() {
        save_pgm(&img, out.join(&name))?;
        println!("{name}");
    }
    Ok(())
}

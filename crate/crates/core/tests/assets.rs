use std::path::Path;

use planlift::doors::DoorMatcherConfig;
use planlift::raster::load_gray;
use planlift::synth::door_asset_set;

fn asset_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/doors"))
}

#[test]
fn shipped_assets_match_generator() {
    let set = door_asset_set();
    let mut names: Vec<String> = std::fs::read_dir(asset_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut expected: Vec<String> = set.iter().map(|(n, _)| n.clone()).collect();
    expected.sort();
    assert_eq!(names, expected);
    for (name, img) in &set {
        assert_eq!(&load_gray(asset_dir().join(name)).unwrap(), img, "{name}");
    }
}

#[test]
fn loaded_matcher_equals_builtin() {
    assert_eq!(DoorMatcherConfig::load_dir(asset_dir()).unwrap(), DoorMatcherConfig::builtin());
}

#[test]
fn empty_asset_dir_rejected() {
    let dir = std::env::temp_dir().join(format!("planlift-empty-assets-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    assert!(DoorMatcherConfig::load_dir(&dir).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

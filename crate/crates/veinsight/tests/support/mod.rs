//! Golden-file cases shared by the regression and acceptance targets.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use veinsight::bench::synthetic_frame;
use veinsight::cli::dispatch_with;
use veinsight::core::grayscale::{rgb_to_gray_with, GrayOptions};
use veinsight::pnm;

pub const RGB_INPUT: &str = "input_rgb.ppm";
pub const GRAY_INPUT: &str = "input_gray.pgm";

/// Golden output file, input file and extra CLI flags.
pub const CASES: [(&str, &str, &[&str]); 5] = [
    ("gray", RGB_INPUT, &[]),
    ("clahe", GRAY_INPUT, &["--grid", "4x4"]),
    ("median", GRAY_INPUT, &["--median-window", "5"]),
    ("frangi", GRAY_INPUT, &["--scales", "1,2,3"]),
    ("enhance", RGB_INPUT, &[]),
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn output_name(case: &str) -> String {
    format!("{case}.pgm")
}

/// Regenerates the committed inputs.
pub fn write_inputs(dir: &Path) {
    let rgb = synthetic_frame(96, 72, 0, 2024);
    pnm::write_image(&rgb, dir.join(RGB_INPUT)).unwrap();
    let opts = GrayOptions { rescale: true, ..GrayOptions::default() };
    let gray = rgb_to_gray_with(&synthetic_frame(96, 72, 5, 77), opts).unwrap();
    pnm::write_image(&gray, dir.join(GRAY_INPUT)).unwrap();
}

/// Runs one case through the CLI and returns the bytes it wrote.
pub fn render(case: &str, input: &str, flags: &[&str], scratch: &Path) -> Vec<u8> {
    let input = golden_dir().join(input);
    let output = scratch.join(output_name(case));
    let mut args = vec!["veinsight".to_string(), case.to_string()];
    args.push(input.to_string_lossy().into_owned());
    args.push(output.to_string_lossy().into_owned());
    args.extend(flags.iter().map(|f| f.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dispatch_with(args, &mut out, &mut err);
    assert_eq!(code, 0, "{case}: {}", String::from_utf8_lossy(&err));
    std::fs::read(output).unwrap()
}

/// Case names whose rendering differs from the committed golden file.
pub fn mismatches() -> Vec<String> {
    let scratch = tempfile::tempdir().unwrap();
    CASES
        .iter()
        .filter(|(case, input, flags)| {
            let expected = std::fs::read(golden_dir().join(output_name(case)));
            expected.map_or(true, |e| e != render(case, input, flags, scratch.path()))
        })
        .map(|(case, _, _)| case.to_string())
        .collect()
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;
mod support;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veinsight::bench::{synthetic_frame, synthetic_stream};
use veinsight::cli::dispatch_with;
use veinsight::core::clahe::{apply_clahe, ClaheConfig};
use veinsight::core::frangi::{
    frangi_multiscale, hessian_of_plane, kernels, BackgroundScale, FrangiConfig, VesselnessMap,
};
use veinsight::core::grayscale::{rgb_to_gray, rgb_to_gray_pixel};
use veinsight::core::median::{median_filter, MedianConfig};
use veinsight::core::pipeline::canonical_pipeline;
use veinsight::core::ImageBuffer;
use veinsight::y4m;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64, what: &str) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_secs, || {
        format!("{what} took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn random_gray(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<u8> {
    (0..w * h).map(|_| rng.gen()).collect()
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("veinsight").chain(args.iter().copied());
    match dispatch_with(argv, &mut out, &mut err) {
        0 => Ok(String::from_utf8_lossy(&out).into_owned()),
        code => Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err))),
    }
}

fn grayscale_reference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut triples: Vec<[u8; 3]> = (0..10_000).map(|_| rng.gen()).collect();
    for corner in 0..8u8 {
        let bit = |b: u8| if corner & b != 0 { 255 } else { 0 };
        triples.push([bit(4), bit(2), bit(1)]);
    }
    let data: Vec<u8> = triples.iter().flatten().copied().collect();
    let img = ImageBuffer::rgb(triples.len(), 1, data).unwrap();

    let start = Instant::now();
    let gray = rgb_to_gray(&img).map_err(|e| e.to_string())?;
    let per_pixel: Vec<u8> = triples.iter().map(|&[r, g, b]| rgb_to_gray_pixel(r, g, b)).collect();
    let elapsed = start.elapsed();

    for (i, &[r, g, b]) in triples.iter().enumerate() {
        let want = oracle::gray_pixel(r, g, b, false);
        check(gray.as_u8().unwrap()[i] == want && per_pixel[i] == want, || {
            format!("({r},{g},{b}): got {} / {}, reference {want}", gray.as_u8().unwrap()[i], per_pixel[i])
        })?;
    }
    within(elapsed, 1.0, "conversion")?;
    Ok(format!("{} triples exact, {:.1} ms", triples.len(), elapsed.as_secs_f64() * 1e3))
}

fn clahe_reference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut elapsed = Duration::ZERO;
    for k in 0..20 {
        let data = random_gray(&mut rng, 64, 64);
        let img = ImageBuffer::gray(64, 64, data.clone()).unwrap();
        for grid in [4, 8] {
            let start = Instant::now();
            let out = apply_clahe(&img, &ClaheConfig::with_grid(grid, grid)).map_err(|e| e.to_string())?;
            elapsed += start.elapsed();
            let want = oracle::clahe(&data, 64, 64, grid, grid, 2.0, 256);
            check(out.as_u8().unwrap() == want.as_slice(), || format!("image {k}, grid {grid}"))?;
        }
    }
    for _ in 0..10 {
        let v: u8 = rng.gen();
        let img = ImageBuffer::filled(64, 64, v).unwrap();
        for grid in [4, 8] {
            let start = Instant::now();
            let out = apply_clahe(&img, &ClaheConfig::with_grid(grid, grid)).map_err(|e| e.to_string())?;
            elapsed += start.elapsed();
            let px = out.as_u8().unwrap();
            check(px.iter().all(|&p| p == px[0]), || format!("constant {v} grid {grid} not constant"))?;
        }
    }
    within(elapsed, 10.0, "clahe")?;
    Ok(format!("40 random runs exact, 20 constant runs constant, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn median_reference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut elapsed = Duration::ZERO;
    for k in 0..20 {
        let data = random_gray(&mut rng, 64, 64);
        let img = ImageBuffer::gray(64, 64, data.clone()).unwrap();
        for window in [3, 5] {
            let start = Instant::now();
            let out = median_filter(&img, &MedianConfig::new(window)).map_err(|e| e.to_string())?;
            elapsed += start.elapsed();
            let want = oracle::median(&data, 64, 64, window);
            check(out.as_u8().unwrap() == want.as_slice(), || format!("image {k}, k={window}"))?;
        }
    }
    within(elapsed, 5.0, "median")?;
    Ok(format!("40 runs exact, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn unit_image(w: usize, h: usize, plane: &[f64]) -> ImageBuffer {
    ImageBuffer::from_f32(w, h, 1, plane.iter().map(|&v| v as f32).collect()).unwrap()
}

fn in_unit(map: &VesselnessMap) -> bool {
    map.values.iter().all(|v| (0.0..=1.0).contains(v))
}

fn frangi_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = FrangiConfig::default();

    for k in 0..5 {
        let img = ImageBuffer::gray(48, 40, random_gray(&mut rng, 48, 40)).unwrap();
        let map = frangi_multiscale(&img, &cfg).map_err(|e| e.to_string())?;
        check(in_unit(&map), || format!("random image {k} left [0,1]"))?;
    }
    let synthetic = rgb_to_gray(&synthetic_frame(96, 72, 0, 9)).unwrap();
    check(in_unit(&frangi_multiscale(&synthetic, &cfg).unwrap()), || "synthetic frame left [0,1]".into())?;

    for v in [0u8, 77, 255] {
        let map = frangi_multiscale(&ImageBuffer::filled(40, 30, v).unwrap(), &cfg).unwrap();
        let max = map.values.iter().fold(0f32, |m, &x| m.max(x.abs()));
        check((max as f64) < 1e-9, || format!("constant {v}: max |V| = {max}"))?;
    }

    let ridge_cfg = FrangiConfig {
        scales: (1..=6).map(f64::from).collect(),
        c: BackgroundScale::Fixed(0.15),
        ..FrangiConfig::default()
    };
    let (w, h) = (96, 64);
    let plane = oracle::vertical_ridge(w, h, 48.0, 3.0, 200.0, 120.0);
    let map = frangi_multiscale(&unit_image(w, h, &plane), &ridge_cfg).unwrap();
    let hits = (0..h).filter(|&y| (1..=3).contains(&map.scale_index[y * w + 48])).count();
    let hit_rate = hits as f64 / h as f64;
    check(hit_rate >= 0.95, || format!("argmax scale in 2..=4 on {hits}/{h} centerline pixels"))?;

    let n = 128;
    let c = (n - 1) as f64 / 2.0;
    let upright = oracle::vertical_ridge(n, n, c, 3.0, 200.0, 120.0);
    let rotated = oracle::rotate(&upright, n, n, 30.0);
    let as_f64 = |m: &VesselnessMap| m.values.iter().map(|&v| v as f64).collect::<Vec<_>>();
    let pa = as_f64(&frangi_multiscale(&unit_image(n, n, &upright), &ridge_cfg).unwrap());
    let pb = as_f64(&frangi_multiscale(&unit_image(n, n, &rotated), &ridge_cfg).unwrap());
    let (s, co) = 30f64.to_radians().sin_cos();
    let (mut sa, mut sb) = (0.0, 0.0);
    for t in -30..=30 {
        let t = t as f64;
        sa += oracle::bilinear(&pa, n, n, c, c + t);
        sb += oracle::bilinear(&pb, n, n, c + t * s, c - t * co);
    }
    let rotation_rel = (sb - sa).abs() / sa;
    check(sa > 0.0 && rotation_rel < 0.10, || format!("rotated response differs by {rotation_rel:.4}"))?;

    let (w, h) = (100, 100);
    let surface: Vec<f64> = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let bump =
                |bx: f64, by: f64, s: f64| (-((x - bx).powi(2) + (y - by).powi(2)) / (2.0 * s * s)).exp();
            0.3 + 0.5 * bump(30.0, 25.0, 10.0) - 0.4 * bump(70.0, 60.0, 14.0) + 0.3 * bump(45.0, 75.0, 9.0)
        })
        .collect();
    let mut worst = 0f64;
    for sigma in [1.5, 2.0, 3.0] {
        let hf = hessian_of_plane(&surface, w, h, sigma).map_err(|e| e.to_string())?;
        let smoothed = oracle::gaussian_smooth(&surface, w, h, sigma);
        let m = kernels::radius(sigma) + 2;
        let (mut err, mut scale) = (0f64, 0f64);
        for y in m..h - m {
            for x in m..w - m {
                let (a, b, cc) = hf.at(x, y);
                let (fa, fb, fc) = oracle::fd_hessian(&smoothed, w, x, y, sigma);
                err = err.max((a - fa).abs()).max((b - fb).abs()).max((cc - fc).abs());
                scale = scale.max(fa.abs()).max(fb.abs()).max(fc.abs());
            }
        }
        worst = worst.max(err / scale);
    }
    check(worst < 1e-2, || format!("Hessian relative error {worst:.2e}"))?;

    Ok(format!(
        "range ok, constant ok, argmax hit rate {:.0}%, rotation diff {:.2}%, Hessian rel err {worst:.1e}",
        hit_rate * 100.0,
        rotation_rel * 100.0
    ))
}

fn pipeline_determinism(dir: &Path) -> Outcome {
    let input = dir.join("det_in.y4m");
    y4m::write_y4m(&synthetic_stream(320, 240, 100, 5), &input).map_err(|e| e.to_string())?;
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let mut sums = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.join(format!("det_out_{jobs}.y4m"));
        let report = run_cli(&["video", &s(&input), &s(&out), "--jobs", jobs])?;
        let sum = report.lines().find_map(|l| l.strip_prefix("checksum: ")).unwrap_or("").to_owned();
        sums.push((sum, std::fs::read(&out).map_err(|e| e.to_string())?));
    }
    check(sums[0] == sums[1], || format!("checksums {} vs {}", sums[0].0, sums[1].0))?;

    let decoded = y4m::read_y4m_frames(&input).map_err(|e| e.to_string())?;
    let produced = y4m::read_y4m_frames(dir.join("det_out_4.y4m")).map_err(|e| e.to_string())?;
    let spec = canonical_pipeline();
    check(produced.len() == 100, || format!("{} output frames", produced.len()))?;
    for (i, (a, b)) in decoded.frames().iter().zip(produced.frames()).enumerate() {
        check(&spec.process_frame(a).unwrap() == b, || format!("frame {i} out of order or altered"))?;
    }
    Ok(format!("100 frames, checksum {}", &sums[0].0[..16]))
}

fn realtime_throughput() -> Outcome {
    let out = run_cli(&["bench", "--synthetic", "640x480", "--frames", "100", "--jobs", "1"])?;
    let summary: serde_json::Value =
        serde_json::from_str(out.lines().next().unwrap_or("")).map_err(|e| e.to_string())?;
    let fps = summary["fps"].as_f64().unwrap_or(0.0);
    let frames = summary["frames"].as_u64().unwrap_or(0);
    check(frames >= 100 && fps >= 10.0, || format!("{fps:.2} fps over {frames} frames"))?;
    Ok(format!("{fps:.1} fps over {frames} frames at 640x480, 1 job"))
}

fn frangi_runtime() -> Outcome {
    let frame = synthetic_frame(1280, 960, 0, 11);
    let gray = rgb_to_gray(&frame).unwrap();
    let cfg = FrangiConfig::default();
    check(cfg.scales.len() == 8, || "default scale count is not 8".into())?;
    let start = Instant::now();
    let map = frangi_multiscale(&gray, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(in_unit(&map), || "vesselness left [0,1]".into())?;
    within(elapsed, 120.0, "frangi 1280x960")?;
    Ok(format!("8 scales at 1280x960 in {:.2} s", elapsed.as_secs_f64()))
}

fn golden_regression() -> Outcome {
    let bad = support::mismatches();
    check(bad.is_empty(), || format!("mismatched: {}", bad.join(", ")))?;
    Ok(format!("{} cases byte-identical", support::CASES.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("grayscale reference", Box::new(grayscale_reference)),
        ("clahe reference", Box::new(clahe_reference)),
        ("median reference", Box::new(median_reference)),
        ("frangi properties", Box::new(frangi_properties)),
        ("pipeline determinism", Box::new(|| pipeline_determinism(dir.path()))),
        ("real-time throughput", Box::new(realtime_throughput)),
        ("frangi runtime", Box::new(frangi_runtime)),
        ("golden regression", Box::new(golden_regression)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL - {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

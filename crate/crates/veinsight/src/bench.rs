//! Benchmark harness and synthetic vein-like video.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use veinsight_core::pipeline::PipelineSpec;
use veinsight_core::{FrameRate, ImageBuffer, VideoStream};

use crate::executor::{run_pipeline, stream_checksum, PipelineRun};
use crate::Result;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One RGB frame: lit skin with a radial falloff, a few dark wandering
/// vessels and per-pixel noise. Depends only on the arguments.
pub fn synthetic_frame(width: usize, height: usize, index: usize, seed: u64) -> ImageBuffer {
    let mut rng = seed ^ (index as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
    let phase = index as f64 * 0.05;
    let (w, h) = (width as f64, height as f64);
    let vessels: [(f64, f64, f64, f64); 4] =
        [(0.30, 0.08, 2.0, 3.0), (0.55, 0.05, 3.0, 2.0), (0.75, 0.10, 1.5, 4.0), (0.45, 0.12, 2.5, 1.5)];
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        let fy = y as f64 / h;
        for x in 0..width {
            let fx = x as f64 / w;
            let r2 = (fx - 0.5).powi(2) + (fy - 0.5).powi(2);
            let mut level = 200.0 * (1.0 - 1.6 * r2).max(0.15);
            for (k, &(base, amp, freq, radius)) in vessels.iter().enumerate() {
                let center = base + amp * (std::f64::consts::TAU * freq * fy + phase + k as f64).sin();
                let d = (fx - center) * w;
                let depth = 0.45 * (-(d * d) / (2.0 * radius * radius)).exp();
                level *= 1.0 - depth;
            }
            let noise = (splitmix64(&mut rng) % 17) as f64 - 8.0;
            let v = level + noise;
            data.push((v * 1.05).round().clamp(0.0, 255.0) as u8);
            data.push((v * 0.85).round().clamp(0.0, 255.0) as u8);
            data.push((v * 0.75).round().clamp(0.0, 255.0) as u8);
        }
    }
    ImageBuffer::rgb(width, height, data).expect("dimensions are consistent")
}

pub fn synthetic_stream(width: usize, height: usize, frames: usize, seed: u64) -> VideoStream {
    let mut s = VideoStream::new(width, height, FrameRate::default());
    for i in 0..frames {
        s.push(synthetic_frame(width, height, i, seed)).expect("homogeneous frames");
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub pipeline: String,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub jobs: usize,
    pub queue_depth: usize,
    pub wall_seconds: f64,
    pub fps: f64,
    pub mean_latency_micros: f64,
    pub max_latency_micros: u64,
    /// Mean time per frame in each stage, keyed `"<position>:<stage>"`.
    pub mean_stage_micros: BTreeMap<String, f64>,
    pub max_in_flight: usize,
    pub checksum: String,
}

/// Runs `spec` over `input` and summarizes timing and output.
pub fn run_bench(spec: &PipelineSpec, input: &VideoStream) -> Result<(BenchSummary, PipelineRun)> {
    let start = Instant::now();
    let run = run_pipeline(spec, input)?;
    let wall = start.elapsed().as_secs_f64();
    let n = run.stats.len();
    let mut stage_sums: BTreeMap<String, f64> = BTreeMap::new();
    for s in &run.stats {
        for (i, t) in s.stages.iter().enumerate() {
            *stage_sums.entry(format!("{i}:{}", t.stage)).or_default() += t.micros as f64;
        }
    }
    let denom = n.max(1) as f64;
    let summary = BenchSummary {
        pipeline: spec.name.clone(),
        frames: n,
        width: input.width(),
        height: input.height(),
        jobs: spec.parallelism,
        queue_depth: spec.queue_depth,
        wall_seconds: wall,
        fps: if wall > 0.0 { n as f64 / wall } else { 0.0 },
        mean_latency_micros: run.stats.iter().map(|s| s.latency_micros as f64).sum::<f64>() / denom,
        max_latency_micros: run.stats.iter().map(|s| s.latency_micros).max().unwrap_or(0),
        mean_stage_micros: stage_sums.into_iter().map(|(k, v)| (k, v / denom)).collect(),
        max_in_flight: run.report.max_in_flight,
        checksum: stream_checksum(&run.output),
    };
    Ok((summary, run))
}

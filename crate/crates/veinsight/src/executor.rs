//! Ordered, bounded, frame-parallel execution of a [`PipelineSpec`].
//!
//! Each frame runs through every stage on one worker. At most
//! `queue_depth` frames are in flight, counted from the moment a worker
//! takes a frame until the sink emits it, and the sink releases frames
//! strictly in input order.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use veinsight_core::pipeline::{FrameShape, PipelineSpec};
use veinsight_core::{ImageBuffer, VideoStream};

use crate::Result;

/// Frames over which [`FrameStats::throughput_fps`] is averaged.
pub const THROUGHPUT_WINDOW: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub micros: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub index: usize,
    pub stages: Vec<StageTiming>,
    /// From the start of the frame's first stage until it leaves the sink.
    pub latency_micros: u64,
    /// Emission rate over the last [`THROUGHPUT_WINDOW`] frames.
    pub throughput_fps: f64,
}

impl FrameStats {
    pub fn stage_total_micros(&self) -> u64 {
        self.stages.iter().map(|s| s.micros).sum()
    }
}

/// Instrumentation gathered during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub frames: usize,
    /// Largest number of frames simultaneously in flight.
    pub max_in_flight: usize,
}

struct Processed {
    index: usize,
    started: Instant,
    durations: Vec<Duration>,
    output: Result<ImageBuffer>,
}

fn process(spec: &PipelineSpec, index: usize, frame: ImageBuffer) -> Processed {
    let started = Instant::now();
    let mut durations = Vec::with_capacity(spec.stages.len());
    let mut img = frame;
    for stage in &spec.stages {
        let t = Instant::now();
        match stage.apply(&img) {
            Ok(next) => img = next,
            Err(e) => return Processed { index, started, durations, output: Err(e.into()) },
        }
        durations.push(t.elapsed());
    }
    Processed { index, started, durations, output: Ok(img) }
}

/// Counting semaphore that can be closed to wake all waiters.
struct Tokens {
    state: Mutex<(usize, bool)>,
    cv: Condvar,
}

impl Tokens {
    fn new(n: usize) -> Self {
        Self { state: Mutex::new((n, false)), cv: Condvar::new() }
    }

    /// Returns false once closed.
    fn acquire(&self) -> bool {
        let mut s = self.state.lock().unwrap();
        while s.0 == 0 && !s.1 {
            s = self.cv.wait(s).unwrap();
        }
        if s.1 {
            return false;
        }
        s.0 -= 1;
        true
    }

    fn release(&self) {
        self.state.lock().unwrap().0 += 1;
        self.cv.notify_one();
    }

    fn close(&self) {
        self.state.lock().unwrap().1 = true;
        self.cv.notify_all();
    }
}

struct Sink<F> {
    spec_names: Vec<&'static str>,
    emit: F,
    recent: VecDeque<Instant>,
    emitted: usize,
}

impl<F: FnMut(ImageBuffer, FrameStats) -> Result<()>> Sink<F> {
    fn emit(&mut self, p: Processed) -> Result<()> {
        let img = p.output?;
        let now = Instant::now();
        self.recent.push_back(now);
        if self.recent.len() > THROUGHPUT_WINDOW + 1 {
            self.recent.pop_front();
        }
        let throughput_fps = match (self.recent.front(), self.recent.len()) {
            (Some(&first), n) if n > 1 => {
                let span = now.duration_since(first).as_secs_f64();
                if span > 0.0 {
                    (n - 1) as f64 / span
                } else {
                    0.0
                }
            }
            _ => {
                let lat = now.duration_since(p.started).as_secs_f64();
                if lat > 0.0 {
                    1.0 / lat
                } else {
                    0.0
                }
            }
        };
        let stats = FrameStats {
            index: p.index,
            stages: self
                .spec_names
                .iter()
                .zip(&p.durations)
                .map(|(n, d)| StageTiming { stage: (*n).to_string(), micros: d.as_micros() as u64 })
                .collect(),
            latency_micros: now.duration_since(p.started).as_micros() as u64,
            throughput_fps,
        };
        self.emitted += 1;
        (self.emit)(img, stats)
    }
}

/// Runs `spec` over `frames`, handing each output to `emit` in input
/// order. The spec must already be validated for the frames' shape.
pub fn run_frames<I, F>(spec: &PipelineSpec, frames: I, emit: F) -> Result<RunReport>
where
    I: Iterator<Item = ImageBuffer> + Send,
    F: FnMut(ImageBuffer, FrameStats) -> Result<()>,
{
    spec.validate_structure()?;
    let mut sink = Sink {
        spec_names: spec.stages.iter().map(|s| s.kind().name()).collect(),
        emit,
        recent: VecDeque::new(),
        emitted: 0,
    };

    if spec.parallelism == 1 {
        for (i, frame) in frames.enumerate() {
            sink.emit(process(spec, i, frame))?;
        }
        return Ok(RunReport { frames: sink.emitted, max_in_flight: sink.emitted.min(1) });
    }

    let source = Mutex::new(frames.enumerate());
    let tokens = Tokens::new(spec.queue_depth);
    let in_flight = AtomicUsize::new(0);
    let max_in_flight = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Processed>();

    let result = thread::scope(|scope| {
        for _ in 0..spec.parallelism {
            let tx = tx.clone();
            let (source, tokens, in_flight, max_in_flight, abort) =
                (&source, &tokens, &in_flight, &max_in_flight, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::Acquire) || !tokens.acquire() {
                    break;
                }
                let next = source.lock().unwrap().next();
                let Some((index, frame)) = next else {
                    tokens.release();
                    break;
                };
                let now = in_flight.fetch_add(1, Ordering::AcqRel) + 1;
                max_in_flight.fetch_max(now, Ordering::AcqRel);
                if tx.send(process(spec, index, frame)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut next = 0usize;
        let outcome: Result<()> = (|| {
            for p in rx.iter() {
                pending.insert(p.index, p);
                while let Some(p) = pending.remove(&next) {
                    let r = sink.emit(p);
                    in_flight.fetch_sub(1, Ordering::AcqRel);
                    tokens.release();
                    r?;
                    next += 1;
                }
            }
            Ok(())
        })();
        if outcome.is_err() {
            abort.store(true, Ordering::Release);
            tokens.close();
        }
        outcome
    });
    result?;
    Ok(RunReport { frames: sink.emitted, max_in_flight: max_in_flight.into_inner() })
}

/// Output stream, per-frame stats and instrumentation of one run.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub output: VideoStream,
    pub stats: Vec<FrameStats>,
    pub report: RunReport,
}

/// Validates `spec` against the stream and runs it.
pub fn run_pipeline(spec: &PipelineSpec, frames: &VideoStream) -> Result<PipelineRun> {
    let out_shape = match frames.frames().first() {
        Some(f) => spec.validate(FrameShape::of(f))?,
        None => {
            spec.validate_structure()?;
            FrameShape { width: frames.width(), height: frames.height(), channels: 1 }
        }
    };
    if let Some(f) = frames.frames().first() {
        if f.depth() != veinsight_core::Depth::U8 {
            return Err(veinsight_core::Error::Depth { expected: veinsight_core::Depth::U8 }.into());
        }
    }
    let mut output = VideoStream::new(out_shape.width, out_shape.height, frames.rate());
    let mut stats = Vec::with_capacity(frames.len());
    let report = run_frames(spec, frames.frames().iter().cloned(), |img, s| {
        stats.push(s);
        Ok(output.push(img)?)
    })?;
    Ok(PipelineRun { output, stats, report })
}

/// Hex SHA-256 over every frame's dimensions and samples, in order.
pub fn stream_checksum(stream: &VideoStream) -> String {
    let mut h = Sha256::new();
    for f in stream.frames() {
        for d in [f.width(), f.height(), f.channels()] {
            h.update((d as u64).to_le_bytes());
        }
        match f.as_u8() {
            Some(data) => h.update(data),
            None => {
                for v in f.as_f32().unwrap_or_default() {
                    h.update(v.to_le_bytes());
                }
            }
        }
    }
    format!("{:x}", h.finalize())
}

/// Writes `stats` as JSON lines.
pub fn write_stats_jsonl(stats: &[FrameStats], mut out: impl std::io::Write) -> std::io::Result<()> {
    for s in stats {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

//! Square-window median filter with replicated borders.
//!
//! Each output row is produced by sliding a 256-bin histogram across the
//! row, updating the running median in place instead of rescanning.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, ImageBuffer, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MedianConfig {
    /// Odd side length of the window.
    pub window: usize,
}

impl Default for MedianConfig {
    fn default() -> Self {
        Self { window: 5 }
    }
}

impl MedianConfig {
    pub fn new(window: usize) -> Self {
        Self { window }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Config(format!("median window {} must be odd", self.window)));
        }
        Ok(())
    }
}

/// Histogram with a tracked median: `below` counts samples `< median`.
struct RunningMedian {
    hist: [u32; 256],
    median: usize,
    below: u32,
    /// Zero-based rank of the median among the window samples.
    rank: u32,
}

impl RunningMedian {
    fn new(rank: u32) -> Self {
        Self { hist: [0; 256], median: 0, below: 0, rank }
    }

    fn reset(&mut self) {
        self.hist = [0; 256];
        self.median = 0;
        self.below = 0;
    }

    #[inline]
    fn add(&mut self, v: u8) {
        self.hist[v as usize] += 1;
        if (v as usize) < self.median {
            self.below += 1;
        }
    }

    #[inline]
    fn remove(&mut self, v: u8) {
        self.hist[v as usize] -= 1;
        if (v as usize) < self.median {
            self.below -= 1;
        }
    }

    fn settle(&mut self) -> u8 {
        while self.below > self.rank {
            self.median -= 1;
            self.below -= self.hist[self.median];
        }
        while self.below + self.hist[self.median] <= self.rank {
            self.below += self.hist[self.median];
            self.median += 1;
        }
        self.median as u8
    }
}

pub fn median_filter(img: &ImageBuffer, cfg: &MedianConfig) -> Result<ImageBuffer> {
    cfg.validate()?;
    let data = img.gray_u8()?;
    let (w, h) = (img.width(), img.height());
    if cfg.window == 1 {
        return Ok(img.clone());
    }
    let radius = cfg.window / 2;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    // Replicated column index for padded column p (window offset included).
    let cols: Vec<usize> = (0..w + 2 * radius).map(|p| clamp(p as isize - radius as isize, w)).collect();
    let rank = (cfg.window * cfg.window / 2) as u32;
    let mut state = RunningMedian::new(rank);
    let mut out = vec![0u8; w * h];
    let mut rows: Vec<&[u8]> = Vec::with_capacity(cfg.window);
    for y in 0..h {
        rows.clear();
        rows.extend((0..cfg.window).map(|dy| {
            let sy = clamp(y as isize + dy as isize - radius as isize, h);
            &data[sy * w..(sy + 1) * w]
        }));
        state.reset();
        for &c in &cols[..cfg.window] {
            for row in &rows {
                state.add(row[c]);
            }
        }
        let dst = &mut out[y * w..(y + 1) * w];
        dst[0] = state.settle();
        for x in 1..w {
            let (old, new) = (cols[x - 1], cols[x + 2 * radius]);
            if old != new {
                for row in &rows {
                    state.remove(row[old]);
                    state.add(row[new]);
                }
            }
            dst[x] = state.settle();
        }
    }
    ImageBuffer::gray(w, h, out)
}

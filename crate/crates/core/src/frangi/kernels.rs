//! Sampled Gaussian derivative kernels and separable convolution.
//!
//! Kernels span `[-ceil(4 sigma), ceil(4 sigma)]`. After sampling, each is
//! corrected so its low-order moments match the continuous operator:
//!
//! - smoothing: `sum g = 1`;
//! - first derivative: `sum t g' = -1`;
//! - second derivative: `sum g'' = 0`, `sum t^2 g'' = 2`.
//!
//! With those moments, convolution differentiates polynomials up to second
//! order exactly, independent of `sigma`.

use alloc::vec;
use alloc::vec::Vec;

pub fn radius(sigma: f64) -> usize {
    libm::ceil(4.0 * sigma) as usize
}

fn taps(sigma: f64) -> impl Iterator<Item = (f64, f64)> {
    let r = radius(sigma) as isize;
    let two_var = 2.0 * sigma * sigma;
    (-r..=r).map(move |t| {
        let t = t as f64;
        (t, libm::exp(-t * t / two_var))
    })
}

pub fn gaussian(sigma: f64) -> Vec<f64> {
    let mut k: Vec<f64> = taps(sigma).map(|(_, g)| g).collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

pub fn gaussian_d1(sigma: f64) -> Vec<f64> {
    let var = sigma * sigma;
    let mut k: Vec<f64> = taps(sigma).map(|(t, g)| -t / var * g).collect();
    let moment: f64 = taps(sigma).zip(&k).map(|((t, _), v)| t * v).sum();
    k.iter_mut().for_each(|v| *v /= -moment);
    k
}

pub fn gaussian_d2(sigma: f64) -> Vec<f64> {
    let var = sigma * sigma;
    let g = gaussian(sigma);
    let mut k: Vec<f64> = taps(sigma).map(|(t, g)| (t * t / (var * var) - 1.0 / var) * g).collect();
    // Remove the DC leak along the Gaussian itself so the tails stay smooth.
    let dc: f64 = k.iter().sum();
    k.iter_mut().zip(&g).for_each(|(v, g)| *v -= dc * g);
    let moment: f64 = taps(sigma).zip(&k).map(|((t, _), v)| t * t * v).sum();
    k.iter_mut().for_each(|v| *v *= 2.0 / moment);
    k
}

/// `out[x] = sum_t src[clamp(x - t)] * k[t]` along each row.
pub fn convolve_rows(src: &[f64], width: usize, kernel: &[f64]) -> Vec<f64> {
    let r = kernel.len() / 2;
    let mut out = vec![0.0; src.len()];
    let mut padded = vec![0.0; width + 2 * r];
    for (row, dst) in src.chunks_exact(width).zip(out.chunks_exact_mut(width)) {
        padded[..r].fill(row[0]);
        padded[r..r + width].copy_from_slice(row);
        padded[r + width..].fill(row[width - 1]);
        for (x, o) in dst.iter_mut().enumerate() {
            // src[x - t] = padded[x - t + r]; t runs -r..=r as kernel index j = t + r.
            let window = &padded[x..x + 2 * r + 1];
            *o = window.iter().rev().zip(kernel).map(|(s, k)| s * k).sum();
        }
    }
    out
}

/// Same as [`convolve_rows`] along columns.
pub fn convolve_cols(src: &[f64], width: usize, kernel: &[f64]) -> Vec<f64> {
    let height = src.len() / width;
    let r = kernel.len() as isize / 2;
    let mut out = vec![0.0; src.len()];
    for (y, dst) in out.chunks_exact_mut(width).enumerate() {
        for (j, &k) in kernel.iter().enumerate() {
            let sy = (y as isize - (j as isize - r)).clamp(0, height as isize - 1) as usize;
            let row = &src[sy * width..(sy + 1) * width];
            dst.iter_mut().zip(row).for_each(|(o, s)| *o += k * s);
        }
    }
    out
}

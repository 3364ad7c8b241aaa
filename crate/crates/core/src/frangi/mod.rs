//! Multiscale Hessian vesselness for 2-D images.
//!
//! At each scale the image Hessian is taken from Gaussian second
//! derivatives, normalized by `sigma^2` so responses compare across scales.
//! Its eigenvalues `|l1| <= |l2|` give the blob ratio `R_B = |l1| / |l2|`
//! and structure strength `S = sqrt(l1^2 + l2^2)`, and
//!
//! ```text
//! V = 0                                              if l2 >= 0
//! V = exp(-R_B^2 / (2 beta^2)) * (1 - exp(-S^2 / (2 c^2)))  otherwise
//! ```
//!
//! which responds to bright ridges. Dark vessels (the default) are handled
//! by negating the Hessian first. The multiscale map is the per-pixel
//! maximum over the configured scales.

pub mod kernels;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::image::quantize_unit;
use crate::{Depth, Error, ImageBuffer, Result};

/// Eigenvalues with `|l2|` below this are treated as flat background.
const FLAT_EPS: f64 = 1e-12;

/// Background sensitivity `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BackgroundScale {
    /// Half the largest Hessian Frobenius norm in the image at each scale.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrangiConfig {
    /// Strictly increasing Gaussian widths in pixels.
    pub scales: Vec<f64>,
    /// Plate/tube sensitivity. Only meaningful for volumes; unused in 2-D.
    pub alpha: f64,
    /// Blob sensitivity.
    pub beta: f64,
    pub c: BackgroundScale,
    /// Vessels darker than their surroundings.
    pub dark_vessels: bool,
}

impl Default for FrangiConfig {
    fn default() -> Self {
        Self {
            scales: (1..=8).map(f64::from).collect(),
            alpha: 0.5,
            beta: 0.5,
            c: BackgroundScale::Auto,
            dark_vessels: true,
        }
    }
}

impl FrangiConfig {
    pub fn with_scales(scales: Vec<f64>) -> Self {
        Self { scales, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::Config("frangi scale list is empty".into()));
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config(format!("frangi scales {:?} must be > 0", self.scales)));
        }
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "frangi scales {:?} must be strictly increasing",
                self.scales
            )));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::Config("frangi alpha and beta must be > 0".into()));
        }
        if let BackgroundScale::Fixed(c) = self.c {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Config(format!("frangi c {c} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Scale-normalized Hessian planes of an image at one `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianField {
    pub sigma: f64,
    pub width: usize,
    pub height: usize,
    pub hxx: Vec<f32>,
    /// Shared by both off-diagonal entries.
    pub hxy: Vec<f32>,
    pub hyy: Vec<f32>,
}

impl HessianField {
    pub fn at(&self, x: usize, y: usize) -> (f64, f64, f64) {
        let i = y * self.width + x;
        (self.hxx[i] as f64, self.hxy[i] as f64, self.hyy[i] as f64)
    }

    /// Largest `sqrt(hxx^2 + 2 hxy^2 + hyy^2)` over the field.
    pub fn max_frobenius(&self) -> f64 {
        (0..self.hxx.len())
            .map(|i| {
                let (a, b, d) = (self.hxx[i] as f64, self.hxy[i] as f64, self.hyy[i] as f64);
                libm::sqrt(a * a + 2.0 * b * b + d * d)
            })
            .fold(0.0, f64::max)
    }
}

/// Gray samples as reals in `[0, 1]`.
fn unit_plane(img: &ImageBuffer) -> Result<Vec<f64>> {
    if img.channels() != 1 {
        return Err(Error::Channels { expected: 1, found: img.channels() });
    }
    Ok(match img.depth() {
        Depth::U8 => img.u8_samples()?.iter().map(|&v| v as f64 / 255.0).collect(),
        Depth::F32 => img.as_f32().unwrap_or_default().iter().map(|&v| v as f64).collect(),
    })
}

pub fn hessian_at_scale(img: &ImageBuffer, sigma: f64) -> Result<HessianField> {
    let plane = unit_plane(img)?;
    hessian_of_plane(&plane, img.width(), img.height(), sigma)
}

/// Hessian of an arbitrary real plane (not restricted to `[0, 1]`).
pub fn hessian_of_plane(plane: &[f64], width: usize, height: usize, sigma: f64) -> Result<HessianField> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Config(format!("sigma {sigma} must be > 0")));
    }
    if width == 0 || plane.len() != width * height {
        return Err(Error::Geometry(format!("plane of {} for {width}x{height}", plane.len())));
    }
    let g = kernels::gaussian(sigma);
    let d1 = kernels::gaussian_d1(sigma);
    let d2 = kernels::gaussian_d2(sigma);
    let smooth_x = kernels::convolve_rows(plane, width, &g);
    let dx = kernels::convolve_rows(plane, width, &d1);
    let dxx = kernels::convolve_rows(plane, width, &d2);
    let norm = sigma * sigma;
    let finish = |v: Vec<f64>| v.into_iter().map(|h| (h * norm) as f32).collect::<Vec<f32>>();
    Ok(HessianField {
        sigma,
        width,
        height,
        hxx: finish(kernels::convolve_cols(&dxx, width, &g)),
        hxy: finish(kernels::convolve_cols(&dx, width, &d1)),
        hyy: finish(kernels::convolve_cols(&smooth_x, width, &d2)),
    })
}

/// Gaussian-smoothed copy of a plane.
pub fn smooth_plane(plane: &[f64], width: usize, sigma: f64) -> Vec<f64> {
    let g = kernels::gaussian(sigma);
    kernels::convolve_cols(&kernels::convolve_rows(plane, width, &g), width, &g)
}

/// Eigenvalues ordered by magnitude, `|l1| <= |l2|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    pub l1: f64,
    pub l2: f64,
}

/// Closed form `m +- sqrt(d^2 + hxy^2)`. On a magnitude tie the positive
/// eigenvalue is `l1`.
pub fn eigen2x2(hxx: f64, hxy: f64, hyy: f64) -> EigenPair {
    let m = (hxx + hyy) / 2.0;
    let d = (hxx - hyy) / 2.0;
    let q = libm::hypot(d, hxy);
    let (a, b) = (m + q, m - q);
    match libm::fabs(a).partial_cmp(&libm::fabs(b)) {
        Some(core::cmp::Ordering::Less) => EigenPair { l1: a, l2: b },
        Some(core::cmp::Ordering::Greater) => EigenPair { l1: b, l2: a },
        _ => EigenPair { l1: a.max(b), l2: a.min(b) },
    }
}

/// Vesselness of one eigenpair; `l2 >= 0` (or flat) gives 0.
pub fn vesselness_of(e: EigenPair, beta: f64, c: f64) -> f64 {
    if e.l2 >= 0.0 || libm::fabs(e.l2) < FLAT_EPS || c.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater)
    {
        return 0.0;
    }
    let rb = e.l1 / e.l2;
    let s2 = e.l1 * e.l1 + e.l2 * e.l2;
    libm::exp(-rb * rb / (2.0 * beta * beta)) * (1.0 - libm::exp(-s2 / (2.0 * c * c)))
}

/// Per-pixel vesselness in `[0, 1]` with the winning scale index.
#[derive(Clone, Debug, PartialEq)]
pub struct VesselnessMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
    /// Index into the configured scale list of the maximal response.
    pub scale_index: Vec<u16>,
}

impl VesselnessMap {
    pub fn value(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    /// Linear `[0, 1] -> [0, 255]` quantization.
    pub fn to_u8_image(&self) -> ImageBuffer {
        let data = self.values.iter().map(|&v| quantize_unit(v as f64)).collect();
        ImageBuffer::gray(self.width, self.height, data).expect("map geometry is valid")
    }

    pub fn to_f32_image(&self) -> Result<ImageBuffer> {
        ImageBuffer::from_f32(self.width, self.height, 1, self.values.clone())
    }
}

/// Vesselness from a precomputed Hessian field.
pub fn vesselness_from_hessian(h: &HessianField, cfg: &FrangiConfig) -> VesselnessMap {
    let c = match cfg.c {
        BackgroundScale::Fixed(c) => c,
        BackgroundScale::Auto => h.max_frobenius() / 2.0,
    };
    let sign = if cfg.dark_vessels { -1.0 } else { 1.0 };
    let values = (0..h.hxx.len())
        .map(|i| {
            let e = eigen2x2(sign * h.hxx[i] as f64, sign * h.hxy[i] as f64, sign * h.hyy[i] as f64);
            vesselness_of(e, cfg.beta, c) as f32
        })
        .collect();
    VesselnessMap { width: h.width, height: h.height, values, scale_index: vec![0; h.hxx.len()] }
}

pub fn vesselness_at_scale(img: &ImageBuffer, sigma: f64, cfg: &FrangiConfig) -> Result<VesselnessMap> {
    cfg.validate()?;
    Ok(vesselness_from_hessian(&hessian_at_scale(img, sigma)?, cfg))
}

/// Per-pixel maximum of [`vesselness_at_scale`] over `cfg.scales`; ties
/// keep the smaller scale.
pub fn frangi_multiscale(img: &ImageBuffer, cfg: &FrangiConfig) -> Result<VesselnessMap> {
    cfg.validate()?;
    let plane = unit_plane(img)?;
    let (w, h) = (img.width(), img.height());
    let mut best: Option<VesselnessMap> = None;
    for (si, &sigma) in cfg.scales.iter().enumerate() {
        let map = vesselness_from_hessian(&hessian_of_plane(&plane, w, h, sigma)?, cfg);
        match best.as_mut() {
            None => best = Some(map),
            Some(acc) => {
                for ((v, idx), &nv) in acc.values.iter_mut().zip(acc.scale_index.iter_mut()).zip(&map.values)
                {
                    if nv > *v {
                        *v = nv;
                        *idx = si as u16;
                    }
                }
            }
        }
    }
    Ok(best.expect("scale list validated non-empty"))
}

#![cfg_attr(not(test), no_std)]
//! Vessel-enhancement kernels for near-infrared imagery.
//!
//! Everything in this crate is pure computation over [`ImageBuffer`]s and
//! needs only `alloc`. File formats, threading and the command line live in
//! the `veinsight` companion crate.
//!
//! - [`grayscale`] – chrominance-aware RGB to gray conversion.
//! - [`clahe`] – tiled contrast-limited histogram equalization with
//!   corner/border/inner interpolation.
//! - [`median`] – sliding-histogram median filter.
//! - [`frangi`] – multiscale Hessian vesselness.
//! - [`threshold`] – brightness thresholding and Otsu background removal.
//! - [`pipeline`] – stage descriptions, validation and per-frame composition.

extern crate alloc;

pub mod clahe;
mod error;
pub mod frangi;
pub mod grayscale;
pub mod image;
pub mod median;
pub mod pipeline;
pub mod threshold;

pub use error::{Error, Result};
pub use image::{extract_roi, Depth, FrameRate, ImageBuffer, Roi, VideoStream};

//! Stage descriptions and per-frame composition.
//!
//! A [`PipelineSpec`] is validated once against the incoming frame shape;
//! afterwards every stage is a pure `ImageBuffer -> ImageBuffer` function
//! and a frame's output is the left fold of the stages over it. Scheduling
//! frames across threads is left to the caller.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clahe::{apply_clahe, ClaheConfig};
use crate::frangi::{frangi_multiscale, FrangiConfig};
use crate::grayscale::{rgb_to_gray_with, GrayOptions};
use crate::median::{median_filter, MedianConfig};
use crate::threshold::{remove_background, Threshold};
use crate::{extract_roi, Depth, Error, ImageBuffer, Result, Roi};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StageKind {
    Roi,
    BackgroundRemoval,
    Grayscale,
    Median,
    Clahe,
    Frangi,
    Invert,
}

impl StageKind {
    pub fn name(self) -> &'static str {
        match self {
            StageKind::Roi => "roi",
            StageKind::BackgroundRemoval => "background_removal",
            StageKind::Grayscale => "grayscale",
            StageKind::Median => "median",
            StageKind::Clahe => "clahe",
            StageKind::Frangi => "frangi",
            StageKind::Invert => "invert",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    /// Crop to a target region; `None` keeps the full frame.
    Roi(Option<Roi>),
    BackgroundRemoval(Threshold),
    /// RGB to gray. Frames that are already gray pass through.
    Grayscale(GrayOptions),
    Median(MedianConfig),
    Clahe(ClaheConfig),
    /// Multiscale vesselness, quantized to U8.
    Frangi(FrangiConfig),
    /// `255 - v`.
    Invert,
}

/// Geometry of a U8 frame as it flows between stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrameShape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl FrameShape {
    pub fn of(img: &ImageBuffer) -> Self {
        Self { width: img.width(), height: img.height(), channels: img.channels() }
    }
}

impl Stage {
    pub fn kind(&self) -> StageKind {
        match self {
            Stage::Roi(_) => StageKind::Roi,
            Stage::BackgroundRemoval(_) => StageKind::BackgroundRemoval,
            Stage::Grayscale(_) => StageKind::Grayscale,
            Stage::Median(_) => StageKind::Median,
            Stage::Clahe(_) => StageKind::Clahe,
            Stage::Frangi(_) => StageKind::Frangi,
            Stage::Invert => StageKind::Invert,
        }
    }

    /// Shape produced from `input`, or why the stage cannot accept it.
    pub fn output_shape(&self, input: FrameShape) -> Result<FrameShape> {
        let need_gray = |what: &str| {
            if input.channels == 1 {
                Ok(input)
            } else {
                Err(Error::Pipeline(format!(
                    "{what} needs a 1-channel frame but receives {} channels; add a grayscale stage first",
                    input.channels
                )))
            }
        };
        match self {
            Stage::Roi(None) | Stage::BackgroundRemoval(_) | Stage::Invert => Ok(input),
            Stage::Roi(Some(roi)) => {
                roi.check(input.width, input.height)?;
                Ok(FrameShape { width: roi.w, height: roi.h, ..input })
            }
            Stage::Grayscale(_) => Ok(FrameShape { channels: 1, ..input }),
            Stage::Median(cfg) => {
                cfg.validate()?;
                need_gray("median")
            }
            Stage::Clahe(cfg) => {
                cfg.check_image(input.width, input.height)?;
                need_gray("clahe")
            }
            Stage::Frangi(cfg) => {
                cfg.validate()?;
                need_gray("frangi")
            }
        }
    }

    pub fn apply(&self, img: &ImageBuffer) -> Result<ImageBuffer> {
        match self {
            Stage::Roi(None) => Ok(img.clone()),
            Stage::Roi(Some(roi)) => extract_roi(img, *roi),
            Stage::BackgroundRemoval(t) => remove_background(img, *t),
            Stage::Grayscale(opts) => {
                if img.channels() == 1 {
                    Ok(img.clone())
                } else {
                    rgb_to_gray_with(img, *opts)
                }
            }
            Stage::Median(cfg) => median_filter(img, cfg),
            Stage::Clahe(cfg) => apply_clahe(img, cfg),
            Stage::Frangi(cfg) => Ok(frangi_multiscale(img, cfg)?.to_u8_image()),
            Stage::Invert => {
                let data = img.u8_samples()?.iter().map(|&v| 255 - v).collect();
                ImageBuffer::from_u8(img.width(), img.height(), img.channels(), data)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSpec {
    pub name: String,
    pub stages: Vec<Stage>,
    /// Worker threads; 1 runs frames sequentially.
    pub parallelism: usize,
    /// Maximum frames dispatched but not yet emitted.
    pub queue_depth: usize,
}

/// Grid sizes of the three stacked CLAHE passes.
pub const CANONICAL_CLAHE_GRIDS: [usize; 3] = [4, 10, 16];

/// Crop, background removal, grayscale, median and three CLAHE passes on
/// 4x4, 10x10 and 16x16 grids.
pub fn canonical_pipeline() -> PipelineSpec {
    let mut stages = Vec::with_capacity(7);
    stages.push(Stage::Roi(None));
    stages.push(Stage::BackgroundRemoval(Threshold::default()));
    stages.push(Stage::Grayscale(GrayOptions::default()));
    stages.push(Stage::Median(MedianConfig::default()));
    stages.extend(CANONICAL_CLAHE_GRIDS.iter().map(|&g| Stage::Clahe(ClaheConfig::with_grid(g, g))));
    PipelineSpec { name: "canonical".into(), stages, parallelism: 1, queue_depth: 8 }
}

impl PipelineSpec {
    /// Checks the spec against frames of shape `input`, returning the
    /// output shape.
    pub fn validate(&self, input: FrameShape) -> Result<FrameShape> {
        self.validate_structure()?;
        self.stages.iter().enumerate().try_fold(input, |shape, (i, stage)| {
            stage
                .output_shape(shape)
                .map_err(|e| Error::Pipeline(format!("stage {i} ({}): {e}", stage.kind().name())))
        })
    }

    /// Shape-independent checks.
    pub fn validate_structure(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Pipeline("no stages".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Pipeline("parallelism must be >= 1".into()));
        }
        if self.queue_depth == 0 {
            return Err(Error::Pipeline("queue depth must be >= 1".into()));
        }
        Ok(())
    }

    /// Validates against the frame, then folds every stage over it.
    pub fn process_frame(&self, frame: &ImageBuffer) -> Result<ImageBuffer> {
        if frame.depth() != Depth::U8 {
            return Err(Error::Depth { expected: Depth::U8 });
        }
        self.validate(FrameShape::of(frame))?;
        self.apply_validated(frame)
    }

    /// Folds the stages over a frame already known to be compatible.
    pub fn apply_validated(&self, frame: &ImageBuffer) -> Result<ImageBuffer> {
        let mut stages = self.stages.iter();
        let first = stages.next().ok_or_else(|| Error::Pipeline("no stages".into()))?;
        stages.try_fold(first.apply(frame)?, |img, s| s.apply(&img))
    }
}

use alloc::string::String;

/// Contract violations raised by the kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid image geometry: {0}")]
    Geometry(String),
    #[error("expected {expected}-channel image, got {found}")]
    Channels { expected: usize, found: usize },
    #[error("expected {expected:?} samples")]
    Depth { expected: crate::Depth },
    #[error("sample value {0} outside [0, 1]")]
    SampleRange(f32),
    #[error("roi {roi:?} exceeds {width}x{height} image")]
    RoiOutOfBounds { roi: crate::Roi, width: usize, height: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("image {width}x{height} smaller than {cols}x{rows} tile grid")]
    ImageSmallerThanGrid { width: usize, height: usize, cols: usize, rows: usize },
    #[error("invalid pipeline: {0}")]
    Pipeline(String),
}

pub type Result<T> = core::result::Result<T, Error>;

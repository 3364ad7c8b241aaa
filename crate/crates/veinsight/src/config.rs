//! JSON configuration.
//!
//! A config file is one JSON object. It may hold a full pipeline
//! (`name`, `stages`, `parallelism`, `queue_depth`) and any of the flat
//! parameter keys used by the single-operation commands. Unknown keys are
//! rejected.
//!
//! ```json
//! {"stages": [{"kind": "clahe", "grid": "4x4", "clip_limit": 2.0}],
//!  "parallelism": 1, "queue_depth": 8}
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use veinsight_core::clahe::ClaheConfig;
use veinsight_core::frangi::{BackgroundScale, FrangiConfig};
use veinsight_core::grayscale::{GrayMethod, GrayOptions};
use veinsight_core::median::MedianConfig;
use veinsight_core::pipeline::{canonical_pipeline, PipelineSpec, Stage};
use veinsight_core::threshold::Threshold;
use veinsight_core::Roi;

use crate::{Error, Result};

/// A `COLSxROWS` tile grid, written as a string such as `"8x8"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub cols: usize,
    pub rows: usize,
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("grid {s:?} is not of the form COLSxROWS");
        let (c, r) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let cols = c.trim().parse().map_err(|_| bad())?;
        let rows = r.trim().parse().map_err(|_| bad())?;
        Ok(Grid { cols, rows })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.cols, self.rows)
    }
}

/// A fixed level or the string `"otsu"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub struct ThresholdSetting(pub Threshold);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Level(u8),
    Named(String),
}

impl TryFrom<ThresholdRepr> for ThresholdSetting {
    type Error = String;

    fn try_from(r: ThresholdRepr) -> std::result::Result<Self, String> {
        match r {
            ThresholdRepr::Level(t) => Ok(Self(Threshold::Fixed(t))),
            ThresholdRepr::Named(s) => s.parse(),
        }
    }
}

impl From<ThresholdSetting> for ThresholdRepr {
    fn from(t: ThresholdSetting) -> Self {
        match t.0 {
            Threshold::Fixed(v) => ThresholdRepr::Level(v),
            Threshold::Otsu => ThresholdRepr::Named("otsu".into()),
        }
    }
}

impl std::str::FromStr for ThresholdSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("otsu") {
            return Ok(Self(Threshold::Otsu));
        }
        s.parse()
            .map(|t| Self(Threshold::Fixed(t)))
            .map_err(|_| format!("threshold {s:?} must be 0..=255 or \"otsu\""))
    }
}

/// Frangi `c`: a positive number or `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CRepr", into = "CRepr")]
pub struct CSetting(pub BackgroundScale);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CRepr {
    Value(f64),
    Named(String),
}

impl TryFrom<CRepr> for CSetting {
    type Error = String;

    fn try_from(r: CRepr) -> std::result::Result<Self, String> {
        match r {
            CRepr::Value(c) => Ok(Self(BackgroundScale::Fixed(c))),
            CRepr::Named(s) => s.parse(),
        }
    }
}

impl From<CSetting> for CRepr {
    fn from(c: CSetting) -> Self {
        match c.0 {
            BackgroundScale::Auto => CRepr::Named("auto".into()),
            BackgroundScale::Fixed(v) => CRepr::Value(v),
        }
    }
}

impl std::str::FromStr for CSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self(BackgroundScale::Auto));
        }
        s.parse()
            .map(|c| Self(BackgroundScale::Fixed(c)))
            .map_err(|_| format!("c {s:?} must be a number or \"auto\""))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSetting {
    #[default]
    Chrominance,
    Luma,
}

impl From<MethodSetting> for GrayMethod {
    fn from(m: MethodSetting) -> Self {
        match m {
            MethodSetting::Chrominance => GrayMethod::Chrominance,
            MethodSetting::Luma => GrayMethod::Luma,
        }
    }
}

impl From<GrayMethod> for MethodSetting {
    fn from(m: GrayMethod) -> Self {
        match m {
            GrayMethod::Chrominance => MethodSetting::Chrominance,
            GrayMethod::Luma => MethodSetting::Luma,
        }
    }
}

/// One stage as it appears in JSON. Omitted parameters take the owning
/// module's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageConfig {
    Roi {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y0: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<usize>,
    },
    BackgroundRemoval {
        #[serde(default)]
        threshold: Option<ThresholdSetting>,
    },
    Grayscale {
        #[serde(default)]
        method: MethodSetting,
        #[serde(default)]
        rescale: bool,
        #[serde(default)]
        eq6_verbatim: bool,
    },
    Median {
        #[serde(default)]
        window: Option<usize>,
    },
    Clahe {
        #[serde(default)]
        grid: Option<Grid>,
        #[serde(default)]
        clip_limit: Option<f64>,
        #[serde(default)]
        bins: Option<usize>,
    },
    Frangi {
        #[serde(default)]
        scales: Option<Vec<f64>>,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        c: Option<CSetting>,
        #[serde(default)]
        dark_vessels: Option<bool>,
    },
    Invert,
}

impl StageConfig {
    pub fn to_stage(&self) -> Result<Stage> {
        Ok(match self {
            StageConfig::Roi { x0, y0, w, h } => match (w, h) {
                (None, None) if x0.is_none() && y0.is_none() => Stage::Roi(None),
                (Some(w), Some(h)) => Stage::Roi(Some(Roi::new(x0.unwrap_or(0), y0.unwrap_or(0), *w, *h))),
                _ => return Err(Error::Usage("roi stage needs both w and h, or neither".into())),
            },
            StageConfig::BackgroundRemoval { threshold } => {
                Stage::BackgroundRemoval(threshold.map_or_else(Threshold::default, |t| t.0))
            }
            StageConfig::Grayscale { method, rescale, eq6_verbatim } => Stage::Grayscale(GrayOptions {
                method: (*method).into(),
                rescale: *rescale,
                eq6_verbatim: *eq6_verbatim,
            }),
            StageConfig::Median { window } => {
                Stage::Median(window.map_or_else(MedianConfig::default, MedianConfig::new))
            }
            StageConfig::Clahe { grid, clip_limit, bins } => {
                let d = ClaheConfig::default();
                Stage::Clahe(ClaheConfig {
                    grid_cols: grid.map_or(d.grid_cols, |g| g.cols),
                    grid_rows: grid.map_or(d.grid_rows, |g| g.rows),
                    clip_limit: clip_limit.unwrap_or(d.clip_limit),
                    n_bins: bins.unwrap_or(d.n_bins),
                })
            }
            StageConfig::Frangi { scales, alpha, beta, c, dark_vessels } => {
                let d = FrangiConfig::default();
                Stage::Frangi(FrangiConfig {
                    scales: scales.clone().unwrap_or(d.scales),
                    alpha: alpha.unwrap_or(d.alpha),
                    beta: beta.unwrap_or(d.beta),
                    c: c.map_or(d.c, |c| c.0),
                    dark_vessels: dark_vessels.unwrap_or(d.dark_vessels),
                })
            }
            StageConfig::Invert => Stage::Invert,
        })
    }

    /// Fully explicit form of `stage`.
    pub fn from_stage(stage: &Stage) -> Self {
        match stage {
            Stage::Roi(None) => StageConfig::Roi { x0: None, y0: None, w: None, h: None },
            Stage::Roi(Some(r)) => {
                StageConfig::Roi { x0: Some(r.x0), y0: Some(r.y0), w: Some(r.w), h: Some(r.h) }
            }
            Stage::BackgroundRemoval(t) => {
                StageConfig::BackgroundRemoval { threshold: Some(ThresholdSetting(*t)) }
            }
            Stage::Grayscale(o) => StageConfig::Grayscale {
                method: o.method.into(),
                rescale: o.rescale,
                eq6_verbatim: o.eq6_verbatim,
            },
            Stage::Median(m) => StageConfig::Median { window: Some(m.window) },
            Stage::Clahe(c) => StageConfig::Clahe {
                grid: Some(Grid { cols: c.grid_cols, rows: c.grid_rows }),
                clip_limit: Some(c.clip_limit),
                bins: Some(c.n_bins),
            },
            Stage::Frangi(f) => StageConfig::Frangi {
                scales: Some(f.scales.clone()),
                alpha: Some(f.alpha),
                beta: Some(f.beta),
                c: Some(CSetting(f.c)),
                dark_vessels: Some(f.dark_vessels),
            },
            Stage::Invert => StageConfig::Invert,
        }
    }
}

/// Contents of a config file. Every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_limit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dark_vessels: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gray_method: Option<MethodSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gray_rescale: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq6_verbatim: Option<bool>,
}

impl FileConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Layers `over` on top of `self`, key by key.
    pub fn merged(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            name,
            stages,
            parallelism,
            queue_depth,
            grid,
            clip_limit,
            bins,
            median_window,
            scales,
            alpha,
            beta,
            c,
            dark_vessels,
            threshold,
            gray_method,
            gray_rescale,
            eq6_verbatim
        )
    }
}

/// Fully resolved parameters for every operation.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub name: String,
    pub stages: Option<Vec<Stage>>,
    pub parallelism: usize,
    pub queue_depth: usize,
    pub clahe: ClaheConfig,
    pub median: MedianConfig,
    pub frangi: FrangiConfig,
    pub threshold: Threshold,
    pub gray: GrayOptions,
}

impl Default for Settings {
    fn default() -> Self {
        let canonical = canonical_pipeline();
        Self {
            name: canonical.name,
            stages: None,
            parallelism: canonical.parallelism,
            queue_depth: canonical.queue_depth,
            clahe: ClaheConfig::default(),
            median: MedianConfig::default(),
            frangi: FrangiConfig::default(),
            threshold: Threshold::default(),
            gray: GrayOptions::default(),
        }
    }
}

impl Settings {
    /// Built-in defaults overridden by every key present in `cfg`.
    pub fn resolve(cfg: &FileConfig) -> Result<Self> {
        let d = Settings::default();
        let stages = match &cfg.stages {
            Some(list) => Some(list.iter().map(StageConfig::to_stage).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok(Settings {
            name: cfg.name.clone().unwrap_or(d.name),
            stages,
            parallelism: cfg.parallelism.unwrap_or(d.parallelism),
            queue_depth: cfg.queue_depth.unwrap_or(d.queue_depth),
            clahe: ClaheConfig {
                grid_cols: cfg.grid.map_or(d.clahe.grid_cols, |g| g.cols),
                grid_rows: cfg.grid.map_or(d.clahe.grid_rows, |g| g.rows),
                clip_limit: cfg.clip_limit.unwrap_or(d.clahe.clip_limit),
                n_bins: cfg.bins.unwrap_or(d.clahe.n_bins),
            },
            median: cfg.median_window.map_or(d.median, MedianConfig::new),
            frangi: FrangiConfig {
                scales: cfg.scales.clone().unwrap_or(d.frangi.scales),
                alpha: cfg.alpha.unwrap_or(d.frangi.alpha),
                beta: cfg.beta.unwrap_or(d.frangi.beta),
                c: cfg.c.map_or(d.frangi.c, |c| c.0),
                dark_vessels: cfg.dark_vessels.unwrap_or(d.frangi.dark_vessels),
            },
            threshold: cfg.threshold.map_or(d.threshold, |t| t.0),
            gray: GrayOptions {
                method: cfg.gray_method.map_or(d.gray.method, Into::into),
                rescale: cfg.gray_rescale.unwrap_or(d.gray.rescale),
                eq6_verbatim: cfg.eq6_verbatim.unwrap_or(d.gray.eq6_verbatim),
            },
        })
    }

    /// The configured stage list, or the canonical recipe with this
    /// configuration's background, grayscale, median and CLAHE clip/bin
    /// parameters substituted.
    pub fn pipeline(&self) -> PipelineSpec {
        let stages = self.stages.clone().unwrap_or_else(|| {
            canonical_pipeline()
                .stages
                .into_iter()
                .map(|s| match s {
                    Stage::BackgroundRemoval(_) => Stage::BackgroundRemoval(self.threshold),
                    Stage::Grayscale(_) => Stage::Grayscale(self.gray),
                    Stage::Median(_) => Stage::Median(self.median),
                    Stage::Clahe(c) => Stage::Clahe(ClaheConfig {
                        clip_limit: self.clahe.clip_limit,
                        n_bins: self.clahe.n_bins,
                        ..c
                    }),
                    other => other,
                })
                .collect()
        });
        PipelineSpec {
            name: self.name.clone(),
            stages,
            parallelism: self.parallelism,
            queue_depth: self.queue_depth,
        }
    }
}

/// Serializes a pipeline with every stage parameter explicit.
pub fn spec_to_json(spec: &PipelineSpec) -> Result<String> {
    let cfg = FileConfig {
        name: Some(spec.name.clone()),
        stages: Some(spec.stages.iter().map(StageConfig::from_stage).collect()),
        parallelism: Some(spec.parallelism),
        queue_depth: Some(spec.queue_depth),
        ..FileConfig::default()
    };
    Ok(serde_json::to_string_pretty(&cfg)?)
}

/// Parses a pipeline; missing top-level keys take the canonical values.
pub fn spec_from_json(text: &str) -> Result<PipelineSpec> {
    let settings = Settings::resolve(&FileConfig::from_json(text)?)?;
    Ok(settings.pipeline())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let spec = canonical_pipeline();
        let json = spec_to_json(&spec).unwrap();
        assert_eq!(spec_from_json(&json).unwrap(), spec);
    }

    #[test]
    fn exotic_round_trip() {
        let spec = PipelineSpec {
            name: "custom".into(),
            stages: vec![
                Stage::Roi(Some(Roi::new(1, 2, 30, 40))),
                Stage::BackgroundRemoval(Threshold::Otsu),
                Stage::Grayscale(GrayOptions { method: GrayMethod::Luma, rescale: true, eq6_verbatim: true }),
                Stage::Clahe(ClaheConfig { grid_cols: 3, grid_rows: 5, clip_limit: 0.1 + 0.2, n_bins: 64 }),
                Stage::Frangi(FrangiConfig {
                    scales: vec![0.7, 1.3, 2.9],
                    c: BackgroundScale::Fixed(0.15),
                    dark_vessels: false,
                    ..FrangiConfig::default()
                }),
                Stage::Invert,
            ],
            parallelism: 3,
            queue_depth: 5,
        };
        assert_eq!(spec_from_json(&spec_to_json(&spec).unwrap()).unwrap(), spec);
    }

    #[test]
    fn documented_example_parses() {
        let spec = spec_from_json(
            r#"{"stages":[{"kind":"clahe","grid":"4x4","clip_limit":2.0}],"parallelism":1,"queue_depth":8}"#,
        )
        .unwrap();
        assert_eq!(spec.stages, vec![Stage::Clahe(ClaheConfig::with_grid(4, 4))]);
    }

    #[test]
    fn scalar_forms() {
        let cfg = FileConfig::from_json(r#"{"threshold":"otsu","c":"auto","grid":"3x7"}"#).unwrap();
        assert_eq!(cfg.threshold, Some(ThresholdSetting(Threshold::Otsu)));
        assert_eq!(cfg.c, Some(CSetting(BackgroundScale::Auto)));
        assert_eq!(cfg.grid, Some(Grid { cols: 3, rows: 7 }));
        let cfg = FileConfig::from_json(r#"{"threshold":35,"c":0.5}"#).unwrap();
        assert_eq!(cfg.threshold, Some(ThresholdSetting(Threshold::Fixed(35))));
        assert_eq!(cfg.c, Some(CSetting(BackgroundScale::Fixed(0.5))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FileConfig::from_json(r#"{"gird":"4x4"}"#).is_err());
        assert!(FileConfig::from_json(r#"{"grid":"4by4"}"#).is_err());
        assert!(FileConfig::from_json(r#"{"threshold":"mean"}"#).is_err());
        assert!(FileConfig::from_json(r#"{"threshold":300}"#).is_err());
        assert!(FileConfig::from_json(r#"{"stages":[{"kind":"blur"}]}"#).is_err());
        assert!(FileConfig::from_json(r#"{"stages":[{"kind":"median","grid":"4x4"}]}"#).is_err());
    }

    #[test]
    fn later_layer_wins() {
        let file = FileConfig::from_json(r#"{"clip_limit":3.0,"bins":128}"#).unwrap();
        let flags = FileConfig { clip_limit: Some(4.0), ..FileConfig::default() };
        let s = Settings::resolve(&file.merged(flags)).unwrap();
        assert_eq!(s.clahe.clip_limit, 4.0);
        assert_eq!(s.clahe.n_bins, 128);
        assert_eq!(s.clahe.grid_cols, 8);
    }

    #[test]
    fn default_settings_give_canonical_pipeline() {
        assert_eq!(Settings::default().pipeline(), canonical_pipeline());
    }
}

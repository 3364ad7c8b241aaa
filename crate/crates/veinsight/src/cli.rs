//! Command-line front end.
//!
//! Parameters are layered: built-in defaults, then the `--config` JSON
//! file, then explicit flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use veinsight_core::clahe::apply_clahe;
use veinsight_core::frangi::frangi_multiscale;
use veinsight_core::median::median_filter;
use veinsight_core::pipeline::Stage;
use veinsight_core::threshold::Threshold;
use veinsight_core::ImageBuffer;

use crate::bench::{run_bench, synthetic_stream};
use crate::config::{CSetting, FileConfig, Grid, MethodSetting, Settings, ThresholdSetting};
use crate::executor::{run_pipeline, stream_checksum, write_stats_jsonl, FrameStats};
use crate::{pnm, y4m, Error, Result};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for processing failures.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for bad arguments, configs or missing inputs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "veinsight", version, about = "Vessel enhancement for near-infrared images and video")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert an RGB image to gray.
    Gray(ImageArgs),
    /// Contrast-limited adaptive histogram equalization of a gray image.
    Clahe(ImageArgs),
    /// Square-window median filter of a gray image.
    Median(ImageArgs),
    /// Multiscale vesselness of a gray image, quantized to 0..=255.
    Frangi(ImageArgs),
    /// Run the enhancement pipeline on one image.
    Enhance(ImageArgs),
    /// Run a pipeline over a Y4M video.
    Video(VideoArgs),
    /// Time a pipeline over a Y4M video or a synthetic stream.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct ImageArgs {
    /// Input PGM/PPM.
    pub input: PathBuf,
    /// Output PGM/PPM.
    pub output: PathBuf,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Args, Debug)]
pub struct VideoArgs {
    /// Input Y4M.
    pub input: PathBuf,
    /// Output Y4M.
    pub output: PathBuf,
    /// Write per-frame stats as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub stats_out: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Input Y4M; omit to use a synthetic stream.
    #[arg(conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Synthetic frame size.
    #[arg(long, value_name = "WxH")]
    pub synthetic: Option<Grid>,
    /// Synthetic frame count.
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    /// Synthetic stream seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the processed stream as Y4M.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Write per-frame stats as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub stats_out: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

/// Parameter flags shared by every command.
#[derive(Args, Debug, Default, Clone)]
pub struct Params {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// CLAHE tile grid, e.g. 8x8.
    #[arg(long, value_name = "COLSxROWS")]
    pub grid: Option<Grid>,
    #[arg(long)]
    pub clip_limit: Option<f64>,
    /// CLAHE histogram bins.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_name = "K")]
    pub median_window: Option<usize>,
    /// Comma-separated Frangi scales.
    #[arg(long, value_delimiter = ',', value_name = "S1,S2,..")]
    pub scales: Option<Vec<f64>>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Frangi background scale: a number or "auto".
    #[arg(long, value_name = "C|auto")]
    pub c: Option<CSetting>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub dark_vessels: Option<bool>,
    /// Background threshold: 0..=255 or "otsu".
    #[arg(long, value_name = "T|otsu", conflicts_with = "otsu")]
    pub threshold: Option<ThresholdSetting>,
    /// Shorthand for --threshold otsu.
    #[arg(long)]
    pub otsu: bool,
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long, value_name = "N")]
    pub queue_depth: Option<usize>,
    /// chrominance or luma.
    #[arg(long, value_parser = parse_method)]
    pub gray_method: Option<MethodSetting>,
    /// Scale the gray value by 4 before clamping.
    #[arg(long)]
    pub gray_rescale: bool,
    /// Use green-channel blue terms in the gray conversion.
    #[arg(long)]
    pub eq6_verbatim: bool,
}

fn parse_method(s: &str) -> std::result::Result<MethodSetting, String> {
    match s {
        "chrominance" => Ok(MethodSetting::Chrominance),
        "luma" => Ok(MethodSetting::Luma),
        _ => Err(format!("{s:?} is not chrominance or luma")),
    }
}

impl Params {
    fn as_layer(&self) -> FileConfig {
        FileConfig {
            grid: self.grid,
            clip_limit: self.clip_limit,
            bins: self.bins,
            median_window: self.median_window,
            scales: self.scales.clone(),
            beta: self.beta,
            c: self.c,
            dark_vessels: self.dark_vessels,
            threshold: if self.otsu { Some(ThresholdSetting(Threshold::Otsu)) } else { self.threshold },
            parallelism: self.jobs,
            queue_depth: self.queue_depth,
            gray_method: self.gray_method,
            gray_rescale: self.gray_rescale.then_some(true),
            eq6_verbatim: self.eq6_verbatim.then_some(true),
            ..FileConfig::default()
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => {
                require_input(p)?;
                FileConfig::load(p)?
            }
            None => FileConfig::default(),
        };
        Settings::resolve(&file.merged(self.as_layer()))
    }
}

fn require_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Usage(format!("input {} does not exist", path.display())))
    }
}

fn read_input(path: &Path) -> Result<ImageBuffer> {
    require_input(path)?;
    pnm::read_image(path)
}

fn write_stats(path: &Path, stats: &[FrameStats]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_stats_jsonl(stats, &mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

/// Runs a parsed command, writing reports to `out`.
pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Gray(a) => {
            let s = a.params.settings()?;
            let img = Stage::Grayscale(s.gray).apply(&read_input(&a.input)?)?;
            pnm::write_image(&img, &a.output)
        }
        Command::Clahe(a) => {
            let s = a.params.settings()?;
            pnm::write_image(&apply_clahe(&read_input(&a.input)?, &s.clahe)?, &a.output)
        }
        Command::Median(a) => {
            let s = a.params.settings()?;
            pnm::write_image(&median_filter(&read_input(&a.input)?, &s.median)?, &a.output)
        }
        Command::Frangi(a) => {
            let s = a.params.settings()?;
            let map = frangi_multiscale(&read_input(&a.input)?, &s.frangi)?;
            pnm::write_image(&map.to_u8_image(), &a.output)
        }
        Command::Enhance(a) => {
            let s = a.params.settings()?;
            let img = s.pipeline().process_frame(&read_input(&a.input)?)?;
            pnm::write_image(&img, &a.output)
        }
        Command::Video(a) => {
            let s = a.params.settings()?;
            require_input(&a.input)?;
            let input = y4m::read_y4m_frames(&a.input)?;
            let run = run_pipeline(&s.pipeline(), &input)?;
            y4m::write_y4m(&run.output, &a.output)?;
            if let Some(p) = &a.stats_out {
                write_stats(p, &run.stats)?;
            }
            writeln!(out, "frames: {}", run.output.len()).map_err(io_out)?;
            writeln!(out, "checksum: {}", stream_checksum(&run.output)).map_err(io_out)
        }
        Command::Bench(a) => {
            let s = a.params.settings()?;
            let input = match &a.input {
                Some(p) => {
                    require_input(p)?;
                    y4m::read_y4m_frames(p)?
                }
                None => {
                    let size = a.synthetic.unwrap_or(Grid { cols: 640, rows: 480 });
                    if size.cols == 0 || size.rows == 0 {
                        return Err(Error::Usage(format!("synthetic size {size} is empty")));
                    }
                    synthetic_stream(size.cols, size.rows, a.frames, a.seed)
                }
            };
            let (summary, run) = run_bench(&s.pipeline(), &input)?;
            if let Some(p) = &a.output {
                y4m::write_y4m(&run.output, p)?;
            }
            if let Some(p) = &a.stats_out {
                write_stats(p, &run.stats)?;
            }
            writeln!(out, "{}", serde_json::to_string(&summary)?).map_err(io_out)?;
            writeln!(out, "fps: {:.2}", summary.fps).map_err(io_out)
        }
    }
}

/// Exit status for an error raised while running a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Json(_) => EXIT_USAGE,
        Error::Core(veinsight_core::Error::Config(_)) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn dispatch_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ =
                if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`dispatch_with`] on the process's standard streams.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    dispatch_with(args, &mut stdout.lock(), &mut stderr.lock())
}

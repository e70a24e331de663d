//! `strokeflow` command-line front end.

use std::fmt::Display;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use strokeflow::pipeline::GlobalSequence;
use strokeflow::raster::RasterError;
use strokeflow::vectorize::{vectorize_paint, vectorize_sketch};
use strokeflow::{
    emit_animated_svg, emit_static_svg, extract_sketch, render_frames_with, resolve_dist_prox, run,
    Canvas, DistProx, EdgeParams, FitParams, GrayImage, PipelineConfig, PipelineError,
    PipelineInput, RasterImage, Stream, Stroke, StrokeSet, SvgError,
};

#[derive(Parser, Debug)]
#[command(
    name = "strokeflow",
    version,
    about = "Sketch-then-paint stroke sequences from images and SVG drawings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract a line drawing from a PNG; writes sketch.png.
    Sketch(Io),
    /// Trace a PNG into strokes; writes sketch.svg, plus paint.svg when painting.
    Vectorize(Io),
    /// Order the strokes of an SVG drawing; writes manifest.json.
    Sequence(Io),
    /// Render the strokes of an SVG in document order; writes frames/ and final.png.
    Render(Io),
    /// Full pipeline on a PNG or SVG; writes manifest.json, animated.svg and frames/.
    Run(Io),
}

#[derive(Args, Debug)]
struct Io {
    /// Input file, .png or .svg.
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(short, long, value_name = "DIR")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct Options {
    /// Cluster cut distance in pixels, or "auto" for max(width, height)/8.
    #[arg(long, global = true, value_name = "FLOAT|auto", default_value = "auto", allow_hyphen_values = true, value_parser = parse_dist_prox)]
    dist_prox: DistProx,
    /// Build the paint stream [default: true for PNG input, false for SVG input without --paint-svg].
    #[arg(long, global = true, value_name = "BOOL")]
    painting: Option<bool>,
    /// SVG drawing used as the paint stream for SVG input.
    #[arg(long, global = true, value_name = "PATH")]
    paint_svg: Option<PathBuf>,
    /// Grayscale PNG used as the line drawing instead of edge extraction.
    #[arg(long, global = true, value_name = "PATH")]
    sketch_png: Option<PathBuf>,
    /// Color levels per channel for the paint stream.
    #[arg(long, global = true, default_value_t = 8)]
    posterize_levels: u32,
    /// Largest contour-to-curve distance, in pixels.
    #[arg(long, global = true, default_value_t = 1.0)]
    max_fit_error: f64,
    /// Largest cluster count solved exactly.
    #[arg(long, global = true, default_value_t = 15)]
    exact_max: usize,
    /// Strokes drawn between saved frames.
    #[arg(long, global = true, default_value_t = 25)]
    frames_every: usize,
    /// Reveal time per stroke in the animated SVG.
    #[arg(long, global = true, default_value_t = 0.05)]
    seconds_per_stroke: f64,
    /// Render frames without anti-aliasing (default).
    #[arg(long, global = true, overrides_with = "aa")]
    no_aa: bool,
    /// Render frames with anti-aliasing.
    #[arg(long, global = true, overrides_with = "no_aa")]
    aa: bool,
    /// Inner Gaussian sigma of edge extraction.
    #[arg(long, global = true, default_value_t = EdgeParams::default().sigma)]
    sigma: f64,
    /// Ratio of outer to inner Gaussian sigma.
    #[arg(long, global = true, default_value_t = EdgeParams::default().k)]
    dog_k: f64,
    /// Edge response threshold, relative to the strongest response.
    #[arg(long, global = true, default_value_t = EdgeParams::default().threshold)]
    threshold: f64,
}

fn parse_dist_prox(s: &str) -> Result<DistProx, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(DistProx::Auto);
    }
    match s.parse::<f64>() {
        Ok(d) if d.is_finite() => Ok(DistProx::Fixed(d)),
        _ => Err(format!("expected a number or \"auto\", got {s:?}")),
    }
}

impl Options {
    fn config(&self, painting: bool) -> PipelineConfig {
        PipelineConfig {
            dist_prox: self.dist_prox,
            painting,
            fit: FitParams {
                max_error: self.max_fit_error,
                posterize_levels: self.posterize_levels,
                ..FitParams::default()
            },
            edge: EdgeParams {
                sigma: self.sigma,
                k: self.dog_k,
                threshold: self.threshold,
            },
            exact_max: self.exact_max,
            seconds_per_stroke: self.seconds_per_stroke,
            frames_every: self.frames_every,
        }
    }

    fn antialias(&self) -> bool {
        self.aa && !self.no_aa
    }
}

/// A reportable failure: stable code, message and exit status.
#[derive(Debug)]
struct Failure {
    code: &'static str,
    message: String,
    status: u8,
}

impl Failure {
    fn input(code: &'static str, message: impl Display) -> Failure {
        Failure {
            code,
            message: message.to_string(),
            status: 1,
        }
    }

    fn internal(message: impl Display) -> Failure {
        Failure {
            code: "InvariantViolation",
            message: message.to_string(),
            status: 2,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::input(e.code(), e)
    }
}

impl From<SvgError> for Failure {
    fn from(e: SvgError) -> Self {
        Failure::input(e.code(), e)
    }
}

fn read_png(path: &Path) -> Result<RasterImage, Failure> {
    RasterImage::load_png(path)
        .map_err(|e| Failure::input("ImageDecode", format!("{}: {e}", path.display())))
}

fn read_gray_png(path: &Path) -> Result<GrayImage, Failure> {
    GrayImage::load_png(path)
        .map_err(|e| Failure::input("ImageDecode", format!("{}: {e}", path.display())))
}

fn read_svg(path: &Path) -> Result<StrokeSet, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::input("InputNotFound", format!("{}: {e}", path.display())))?;
    Ok(strokeflow::svg::parse_svg_bytes(&bytes)?)
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Png,
    Svg,
}

fn input_format(path: &Path) -> Result<Format, Failure> {
    if !path.is_file() {
        return Err(Failure::input(
            "InputNotFound",
            format!("{} is not a readable file", path.display()),
        ));
    }
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => Ok(Format::Png),
        Some("svg") => Ok(Format::Svg),
        _ => Err(Failure::input(
            "UnsupportedInput",
            format!("{}: expected a .png or .svg file", path.display()),
        )),
    }
}

fn require(path: &Path, wanted: Format) -> Result<(), Failure> {
    if input_format(path)? != wanted {
        let ext = if wanted == Format::Png {
            ".png"
        } else {
            ".svg"
        };
        return Err(Failure::input(
            "UnsupportedInput",
            format!("{}: this subcommand takes a {ext} file", path.display()),
        ));
    }
    Ok(())
}

fn out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::input("OutputError", format!("{}: {e}", dir.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::input("OutputError", format!("{}: {e}", path.display())))
}

fn save_failure(path: &Path, e: RasterError) -> Failure {
    Failure::input("OutputError", format!("{}: {e}", path.display()))
}

fn info_dist_prox(options: &Options, width: u32, height: u32) {
    if options.dist_prox == DistProx::Auto {
        if let Ok(d) = resolve_dist_prox(DistProx::Auto, width, height) {
            eprintln!("info: dist_prox auto = {d} (max({width}, {height}) / 8); pass --dist-prox {d} to reproduce");
        }
    }
}

/// Line drawing for a raster input: `--sketch-png` if given, else edges.
fn line_drawing(
    image: &RasterImage,
    options: &Options,
    config: &PipelineConfig,
) -> Result<GrayImage, Failure> {
    match &options.sketch_png {
        Some(path) => {
            let sketch = read_gray_png(path)?;
            if (sketch.width(), sketch.height()) != (image.width(), image.height()) {
                return Err(PipelineError::DimensionMismatch {
                    sketch: (sketch.width(), sketch.height()),
                    image: (image.width(), image.height()),
                }
                .into());
            }
            Ok(sketch)
        }
        None => {
            if image.is_empty() {
                return Err(PipelineError::from(strokeflow::SketchError::EmptyImage).into());
            }
            extract_sketch(image, &config.edge).map_err(|e| PipelineError::from(e).into())
        }
    }
}

fn cmd_sketch(io: &Io, options: &Options) -> Result<(), Failure> {
    require(&io.input, Format::Png)?;
    let image = read_png(&io.input)?;
    let config = options.config(false);
    config.validate()?;
    let sketch = line_drawing(&image, options, &config)?;
    out_dir(&io.output)?;
    let path = io.output.join("sketch.png");
    sketch.save_png(&path).map_err(|e| save_failure(&path, e))
}

fn cmd_vectorize(io: &Io, options: &Options) -> Result<(), Failure> {
    require(&io.input, Format::Png)?;
    let image = read_png(&io.input)?;
    let config = options.config(options.painting.unwrap_or(true));
    config.validate()?;
    let drawing = line_drawing(&image, options, &config)?;
    let (sketch, paint) = rayon::join(
        || vectorize_sketch(&drawing, &config.fit),
        || {
            config
                .painting
                .then(|| vectorize_paint(&image, &config.fit, 0))
                .transpose()
        },
    );
    let sketch = sketch.map_err(PipelineError::from)?;
    let paint = paint.map_err(PipelineError::from)?;
    out_dir(&io.output)?;
    write(&io.output.join("sketch.svg"), &emit_static_svg(&sketch))?;
    let paint_strokes = paint.as_ref().map_or(0, StrokeSet::len);
    if let Some(paint) = paint {
        write(&io.output.join("paint.svg"), &emit_static_svg(&paint))?;
    }
    eprintln!(
        "info: {} sketch strokes, {paint_strokes} paint strokes",
        sketch.len()
    );
    Ok(())
}

/// Pipeline input and config for `sequence` and `run`.
fn pipeline_input(
    io: &Io,
    options: &Options,
    allow_png: bool,
) -> Result<(PipelineInput, PipelineConfig), Failure> {
    let format = input_format(&io.input)?;
    if format == Format::Png && !allow_png {
        return Err(Failure::input(
            "UnsupportedInput",
            format!("{}: this subcommand takes a .svg file", io.input.display()),
        ));
    }
    match format {
        Format::Png => {
            let config = options.config(options.painting.unwrap_or(true));
            config.validate()?;
            let image = read_png(&io.input)?;
            let sketch = options
                .sketch_png
                .as_deref()
                .map(read_gray_png)
                .transpose()?;
            Ok((PipelineInput::Raster { image, sketch }, config))
        }
        Format::Svg => {
            let config = options.config(options.painting.unwrap_or(options.paint_svg.is_some()));
            config.validate()?;
            let sketch = read_svg(&io.input)?;
            let paint = match (&options.paint_svg, config.painting) {
                (Some(path), true) => Some(read_svg(path)?),
                _ => None,
            };
            Ok((PipelineInput::Vector { sketch, paint }, config))
        }
    }
}

/// Re-checks the output structure before anything is written.
fn check_sequence(seq: &GlobalSequence) -> Result<(), Failure> {
    let n = seq.strokes().len();
    let mut seen = vec![false; n];
    let mut by_id: Vec<u32> = seq.strokes().strokes().iter().map(|s| s.id().0).collect();
    by_id.sort_unstable();
    let mut last_cluster = None;
    let mut closed = std::collections::HashSet::new();
    for (rank, e) in seq.entries().enumerate() {
        let slot = by_id.binary_search(&e.stroke.0).map_err(|_| {
            Failure::internal(format!("rank {rank} names unknown stroke {}", e.stroke))
        })?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Failure::internal(format!(
                "stroke {} sequenced twice",
                e.stroke
            )));
        }
        if e.rank != rank {
            return Err(Failure::internal(format!(
                "rank {} stored at position {rank}",
                e.rank
            )));
        }
        if last_cluster != Some(e.cluster) {
            if !closed.insert(e.cluster) {
                return Err(Failure::internal(format!(
                    "cluster {} is not contiguous",
                    e.cluster
                )));
            }
            last_cluster = Some(e.cluster);
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Failure::internal("some strokes were never sequenced"));
    }
    let ordered = seq.ordered_strokes();
    let split = seq.sketch().len();
    if ordered[..split]
        .iter()
        .any(|s| s.stream() != Stream::Sketch)
        || ordered[split..].iter().any(|s| s.stream() != Stream::Paint)
    {
        return Err(Failure::internal("a paint stroke precedes a sketch stroke"));
    }
    Ok(())
}

fn sequence(
    io: &Io,
    options: &Options,
    allow_png: bool,
) -> Result<(GlobalSequence, PipelineConfig), Failure> {
    let (input, config) = pipeline_input(io, options, allow_png)?;
    let (w, h) = match &input {
        PipelineInput::Raster { image, .. } => (image.width(), image.height()),
        PipelineInput::Vector { sketch, .. } => (sketch.width(), sketch.height()),
    };
    info_dist_prox(options, w, h);
    let seq = run(&input, &config)?;
    check_sequence(&seq)?;
    Ok((seq, config))
}

fn cmd_sequence(io: &Io, options: &Options) -> Result<(), Failure> {
    let (seq, _) = sequence(io, options, false)?;
    out_dir(&io.output)?;
    write(&io.output.join("manifest.json"), &seq.manifest().to_json())
}

/// Frames go to `dir/frame_000001.png`, ... PNG encoding runs in parallel
/// batches while drawing stays sequential.
fn write_frames(
    dir: &Path,
    width: u32,
    height: u32,
    strokes: &[&Stroke],
    every: usize,
    aa: bool,
) -> Result<(), Failure> {
    out_dir(dir)?;
    let batch = rayon::current_num_threads().max(1) * 2;
    let mut pending: Vec<(PathBuf, RasterImage)> = Vec::with_capacity(batch);
    let flush = |pending: &mut Vec<(PathBuf, RasterImage)>| -> Result<(), Failure> {
        pending
            .par_iter()
            .map(|(path, image)| image.save_png(path).map_err(|e| save_failure(path, e)))
            .collect::<Result<Vec<()>, Failure>>()?;
        pending.clear();
        Ok(())
    };
    let mut index = 0;
    render_frames_with::<Failure>(width, height, strokes, every, aa, |_, canvas: &Canvas| {
        index += 1;
        pending.push((
            dir.join(format!("frame_{index:06}.png")),
            canvas.image().clone(),
        ));
        if pending.len() >= batch {
            flush(&mut pending)?;
        }
        Ok(())
    })?;
    flush(&mut pending)
}

fn cmd_render(io: &Io, options: &Options) -> Result<(), Failure> {
    require(&io.input, Format::Svg)?;
    if options.frames_every == 0 {
        return Err(PipelineError::InvalidConfig("frames_every must be >= 1".into()).into());
    }
    let set = read_svg(&io.input)?;
    let strokes: Vec<&Stroke> = set.strokes().iter().collect();
    out_dir(&io.output)?;
    let aa = options.antialias();
    write_frames(
        &io.output.join("frames"),
        set.width(),
        set.height(),
        &strokes,
        options.frames_every,
        aa,
    )?;
    let path = io.output.join("final.png");
    strokeflow::render_all(set.width(), set.height(), strokes.iter().copied(), aa)
        .save_png(&path)
        .map_err(|e| save_failure(&path, e))
}

fn cmd_run(io: &Io, options: &Options) -> Result<(), Failure> {
    let (seq, config) = sequence(io, options, true)?;
    let (w, h) = (seq.strokes().width(), seq.strokes().height());
    let ordered = seq.ordered_strokes();
    out_dir(&io.output)?;
    write(&io.output.join("manifest.json"), &seq.manifest().to_json())?;
    write(
        &io.output.join("animated.svg"),
        &emit_animated_svg(w, h, &ordered, config.seconds_per_stroke),
    )?;
    write_frames(
        &io.output.join("frames"),
        w,
        h,
        &ordered,
        config.frames_every,
        options.antialias(),
    )?;
    eprintln!(
        "info: {} strokes ({} sketch, {} paint)",
        seq.len(),
        seq.sketch().len(),
        seq.paint().len()
    );
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("STROKEFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::input(
            "InvalidEnvironment",
            format!("STROKEFLOW_THREADS={raw:?} is not a count"),
        )
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::internal)?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Sketch(io) => cmd_sketch(io, &cli.options),
        Command::Vectorize(io) => cmd_vectorize(io, &cli.options),
        Command::Sequence(io) => cmd_sequence(io, &cli.options),
        Command::Render(io) => cmd_render(io, &cli.options),
        Command::Run(io) => cmd_run(io, &cli.options),
    }
}

fn report(f: &Failure) {
    let prefix = format!("{}: ", f.code);
    let message = f.message.strip_prefix(&prefix).unwrap_or(&f.message);
    eprintln!("error [{}]: {message}", f.code);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(status);
        }
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| dispatch(&cli)));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            report(&f);
            ExitCode::from(f.status)
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".into());
            report(&Failure::internal(message));
            ExitCode::from(2)
        }
    }
}

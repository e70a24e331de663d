//! End-to-end sequence construction: sketch stream first, then the optional
//! paint stream drawn over it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{build_dendrogram, cut, intra_order, ClusterError};
use crate::raster::{GrayImage, RasterImage};
use crate::sequence::{
    assemble, linearize, solve_tsp, StrokeSequence, DEFAULT_EXACT_MAX, HELD_KARP_LIMIT,
};
use crate::sketch::{extract_sketch, EdgeParams, SketchError};
use crate::stroke::{Point, Stream, Stroke, StrokeError, StrokeId, StrokeSet};
use crate::vectorize::{vectorize_paint, vectorize_sketch, FitParams, VectorizeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("NegativeDistance: dist_prox must be >= 0, got {0}")]
    NegativeDistance(f64),
    #[error("NoStrokes: the input produced no strokes")]
    NoStrokes,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("sketch is {sketch:?} but the image is {image:?}")]
    DimensionMismatch {
        sketch: (u32, u32),
        image: (u32, u32),
    },
    #[error("painting was requested without a paint input")]
    MissingPaintInput,
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Vectorize(#[from] VectorizeError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Stroke(#[from] StrokeError),
}

impl PipelineError {
    /// Stable short name, for messages and scripting.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::NegativeDistance(_) => "NegativeDistance",
            PipelineError::NoStrokes => "NoStrokes",
            PipelineError::InvalidConfig(_) => "InvalidConfig",
            PipelineError::DimensionMismatch { .. } => "DimensionMismatch",
            PipelineError::MissingPaintInput => "MissingPaintInput",
            PipelineError::Sketch(SketchError::EmptyImage) => "EmptyImage",
            PipelineError::Sketch(_) => "InvalidEdgeParams",
            PipelineError::Vectorize(VectorizeError::TooManyColors(_)) => "TooManyColors",
            PipelineError::Vectorize(VectorizeError::DegenerateContour) => "DegenerateContour",
            PipelineError::Vectorize(_) => "InvalidFitParams",
            PipelineError::Cluster(_) => "EmptySet",
            PipelineError::Stroke(_) => "InvalidStroke",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DistProx {
    /// `max(width, height) / 8`.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dist_prox: DistProx,
    pub painting: bool,
    pub fit: FitParams,
    pub edge: EdgeParams,
    pub exact_max: usize,
    pub seconds_per_stroke: f64,
    pub frames_every: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dist_prox: DistProx::Auto,
            painting: true,
            fit: FitParams::default(),
            edge: EdgeParams::default(),
            exact_max: DEFAULT_EXACT_MAX,
            seconds_per_stroke: 0.05,
            frames_every: 25,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if let DistProx::Fixed(d) = self.dist_prox {
            if d.is_nan() || d < 0.0 {
                return Err(PipelineError::NegativeDistance(d));
            }
        }
        if !(3..=HELD_KARP_LIMIT).contains(&self.exact_max) {
            return Err(PipelineError::InvalidConfig(format!(
                "exact_max must be in [3, {HELD_KARP_LIMIT}], got {}",
                self.exact_max
            )));
        }
        if !(self.seconds_per_stroke.is_finite() && self.seconds_per_stroke > 0.0) {
            return Err(PipelineError::InvalidConfig(
                "seconds_per_stroke must be > 0".into(),
            ));
        }
        if self.frames_every == 0 {
            return Err(PipelineError::InvalidConfig(
                "frames_every must be >= 1".into(),
            ));
        }
        self.fit.validate()?;
        self.edge.validate()?;
        Ok(())
    }
}

/// Resolves the cut height for a canvas.
pub fn resolve_dist_prox(
    dist_prox: DistProx,
    width: u32,
    height: u32,
) -> Result<f64, PipelineError> {
    match dist_prox {
        DistProx::Auto => Ok(f64::from(width.max(height)) / 8.0),
        DistProx::Fixed(d) if d >= 0.0 => Ok(d),
        DistProx::Fixed(d) => Err(PipelineError::NegativeDistance(d)),
    }
}

#[derive(Debug, Clone)]
pub enum PipelineInput {
    /// An RGB image, optionally with a ready-made line drawing that replaces
    /// edge extraction.
    Raster {
        image: RasterImage,
        sketch: Option<GrayImage>,
    },
    /// Already vectorized strokes for the sketch and, optionally, paint
    /// streams.
    Vector {
        sketch: StrokeSet,
        paint: Option<StrokeSet>,
    },
}

/// Both streams and the strokes they order. Stroke ids are unique across
/// streams; paint ids and cluster indices continue after the sketch ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSequence {
    strokes: StrokeSet,
    dist_prox: f64,
    sketch: StrokeSequence,
    paint: StrokeSequence,
}

impl GlobalSequence {
    pub fn strokes(&self) -> &StrokeSet {
        &self.strokes
    }

    pub fn dist_prox(&self) -> f64 {
        self.dist_prox
    }

    pub fn sketch(&self) -> &StrokeSequence {
        &self.sketch
    }

    pub fn paint(&self) -> &StrokeSequence {
        &self.paint
    }

    pub fn len(&self) -> usize {
        self.sketch.len() + self.paint.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in global rank order: sketch then paint.
    pub fn entries(&self) -> impl Iterator<Item = &crate::sequence::SequenceEntry> + '_ {
        self.sketch.entries().iter().chain(self.paint.entries())
    }

    /// Strokes in drawing order.
    pub fn ordered_strokes(&self) -> Vec<&Stroke> {
        let mut by_id: Vec<&Stroke> = self.strokes.strokes().iter().collect();
        by_id.sort_by_key(|s| s.id());
        self.entries()
            .map(|e| {
                let i = by_id
                    .binary_search_by_key(&e.stroke, |s| s.id())
                    .expect("sequenced stroke exists");
                by_id[i]
            })
            .collect()
    }

    pub fn manifest(&self) -> Manifest {
        let ordered = self.ordered_strokes();
        let strokes = self
            .entries()
            .zip(ordered)
            .map(|(e, s)| ManifestStroke {
                id: s.id().0,
                rank: e.rank,
                stream: s.stream().as_str().to_string(),
                cluster: e.cluster,
                kind: s.kind().tag().to_string(),
                points: s.points().iter().map(|p| [p.x, p.y]).collect(),
                color: s.color().to_hex(),
                width: s.width(),
                filled: s.filled(),
            })
            .collect();
        Manifest {
            canvas: CanvasSize {
                width: self.strokes.width(),
                height: self.strokes.height(),
            },
            dist_prox: self.dist_prox,
            strokes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanvasSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStroke {
    pub id: u32,
    pub rank: usize,
    pub stream: String,
    pub cluster: usize,
    pub kind: String,
    pub points: Vec<[f64; 2]>,
    pub color: String,
    pub width: f64,
    pub filled: bool,
}

/// JSON record of a sequence; strokes sorted by rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub canvas: CanvasSize,
    pub dist_prox: f64,
    pub strokes: Vec<ManifestStroke>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Manifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Clusters one stream and orders it. An empty set gives an empty sequence.
pub fn sequence_stream(
    set: &StrokeSet,
    dist_prox: f64,
    exact_max: usize,
    stream: Stream,
) -> Result<(StrokeSequence, usize), PipelineError> {
    if set.is_empty() {
        return Ok((StrokeSequence::empty(stream), 0));
    }
    if dist_prox.is_nan() || dist_prox < 0.0 {
        return Err(PipelineError::NegativeDistance(dist_prox));
    }
    let dendrogram = build_dendrogram(set)?;
    let partition = intra_order(&dendrogram, &cut(&dendrogram, dist_prox));
    let tour = solve_tsp(partition.centroids(), exact_max);
    let order = linearize(&tour, partition.centroids());
    Ok((assemble(&order, &partition, stream), partition.len()))
}

fn retag(
    set: StrokeSet,
    stream: Stream,
    first_id: u32,
    grayscale: bool,
) -> Result<StrokeSet, PipelineError> {
    let (w, h) = (set.width(), set.height());
    let mut strokes = set.into_strokes();
    strokes.sort_by_key(|s| s.id());
    let strokes = strokes
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let color = if grayscale {
                s.color().to_grayscale()
            } else {
                s.color()
            };
            s.with_id(StrokeId(first_id + i as u32))
                .with_stream(stream)
                .with_color(color)
        })
        .collect();
    Ok(StrokeSet::new(strokes, w, h)?)
}

/// Builds the stroke sets of both streams. Paint ids follow the sketch ids.
fn construct(
    input: &PipelineInput,
    config: &PipelineConfig,
) -> Result<(StrokeSet, Option<StrokeSet>), PipelineError> {
    match input {
        PipelineInput::Raster { image, sketch } => {
            if image.is_empty() {
                return Err(SketchError::EmptyImage.into());
            }
            let dims = (image.width(), image.height());
            let line_drawing = match sketch {
                Some(s) if (s.width(), s.height()) != dims => {
                    return Err(PipelineError::DimensionMismatch {
                        sketch: (s.width(), s.height()),
                        image: dims,
                    })
                }
                Some(s) => s.clone(),
                None => extract_sketch(image, &config.edge)?,
            };
            let (sketch_set, paint_set) = rayon::join(
                || vectorize_sketch(&line_drawing, &config.fit),
                || {
                    config
                        .painting
                        .then(|| vectorize_paint(image, &config.fit, 0))
                        .transpose()
                },
            );
            let sketch_set = sketch_set?;
            let offset = sketch_set.len() as u32;
            let paint_set = paint_set?
                .map(|p| retag(p, Stream::Paint, offset, false))
                .transpose()?;
            Ok((sketch_set, paint_set))
        }
        PipelineInput::Vector { sketch, paint } => {
            let sketch_set = retag(sketch.clone(), Stream::Sketch, 0, true)?;
            let paint_set = match (config.painting, paint) {
                (false, _) => None,
                (true, None) => return Err(PipelineError::MissingPaintInput),
                (true, Some(p)) => {
                    if (p.width(), p.height()) != (sketch.width(), sketch.height()) {
                        return Err(PipelineError::DimensionMismatch {
                            sketch: (sketch.width(), sketch.height()),
                            image: (p.width(), p.height()),
                        });
                    }
                    Some(retag(
                        p.clone(),
                        Stream::Paint,
                        sketch_set.len() as u32,
                        false,
                    )?)
                }
            };
            Ok((sketch_set, paint_set))
        }
    }
}

/// Runs both streams: construction, clustering, cluster tour and assembly.
/// Fails with [`PipelineError::NoStrokes`] when neither stream has strokes.
pub fn run(
    input: &PipelineInput,
    config: &PipelineConfig,
) -> Result<GlobalSequence, PipelineError> {
    config.validate()?;
    let (sketch_set, paint_set) = construct(input, config)?;
    let (w, h) = (sketch_set.width(), sketch_set.height());
    let dist_prox = resolve_dist_prox(config.dist_prox, w, h)?;
    let empty = StrokeSet::empty(w, h)?;
    let paint_ref = paint_set.as_ref().unwrap_or(&empty);
    if sketch_set.is_empty() && paint_ref.is_empty() {
        return Err(PipelineError::NoStrokes);
    }

    let (sketch_seq, paint_seq) = rayon::join(
        || sequence_stream(&sketch_set, dist_prox, config.exact_max, Stream::Sketch),
        || sequence_stream(paint_ref, dist_prox, config.exact_max, Stream::Paint),
    );
    let (sketch_seq, sketch_clusters) = sketch_seq?;
    let (paint_seq, _) = paint_seq?;
    let paint_seq = paint_seq.offset(sketch_seq.len(), sketch_clusters);

    let mut all = sketch_set.into_strokes();
    if let Some(p) = paint_set {
        all.extend(p.into_strokes());
    }
    Ok(GlobalSequence {
        strokes: StrokeSet::new(all, w, h)?,
        dist_prox,
        sketch: sketch_seq,
        paint: paint_seq,
    })
}

/// Anchor points of `set`, in id order.
pub fn anchors(set: &StrokeSet) -> Vec<Point> {
    let mut strokes: Vec<_> = set.strokes().iter().collect();
    strokes.sort_by_key(|s| s.id());
    strokes.iter().map(|s| s.anchor()).collect()
}

//! Stroke-by-stroke drawing sequences for images and vector art.
//!
//! An input is turned into strokes (lines, Bézier curves, arcs), the strokes
//! are grouped by Ward clustering of their anchor points, clusters are
//! visited along a short closed tour over their centroids, and each cluster
//! is drawn in dendrogram leaf order. Sketch strokes come first, paint
//! strokes after.

pub mod cluster;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod sequence;
pub mod sketch;
pub mod stroke;
pub mod svg;
pub mod vectorize;

pub use cluster::{
    build_dendrogram, cut, intra_order, ClusterError, ClusterPartition, Dendrogram, Merge,
};
pub use pipeline::{
    resolve_dist_prox, run, DistProx, GlobalSequence, Manifest, PipelineConfig, PipelineError,
    PipelineInput,
};
pub use raster::{GrayImage, RasterError, RasterImage};
pub use render::{render_all, render_frames, render_frames_with, Canvas};
pub use sequence::{assemble, linearize, solve_tsp, SequenceEntry, StrokeSequence, Tour};
pub use sketch::{extract_sketch, EdgeParams, SketchError};
pub use stroke::{
    ArcParams, Color, Geometry, Point, Stream, Stroke, StrokeError, StrokeId, StrokeKind, StrokeSet,
};
pub use svg::{emit_animated_svg, emit_static_svg, parse_svg, SvgError};
pub use vectorize::{fit_curves, posterize, trace_contours, Contour, FitParams, VectorizeError};

//! geofig — reverse-engineering executable geometric programs from raster
//! figures.
//!
//! The pipeline has two stages. Stage one grounds the figure in pixel space:
//! gradient operators propose anchor candidates, verification filters them,
//! stroke fitting and relation mining assemble a geometric skeleton. Stage
//! two turns the skeleton into a program and evolves it through a
//! generate–render–inspect–correct loop, scored by Chamfer/Hausdorff edge
//! metrics and guided by a classified visual difference map.

pub mod agent;
pub mod anchor;
pub mod corpus;
pub mod dataset;
pub mod dt;
pub mod edge;
pub mod evolve;
pub mod fit;
pub mod metrics;
pub mod morph;
pub mod program;
pub mod raster;
pub mod render;
pub mod skeleton;
pub mod vep;

pub use agent::{AgentError, AgentGateway, AgentRequest, AgentResponse, AgentRole};
pub use anchor::{Anchor, AnchorConfig, AnchorKind, AnchorSource};
pub use dataset::{
    build_quadruplet, filter_manifest, review_mark, EntryStatus, Manifest, Quadruplet, Verdict,
};
pub use evolve::{
    reconstruct, run_loop, run_loop_seeded, run_loop_with_agent, synthesize_initial, LoopConfig,
    LoopState, PipelineConfig, RefinerMode,
};
pub use edge::{extract_edge_map, EdgeMap, DEFAULT_EDGE_THRESHOLD};
pub use metrics::{
    chamfer_distance, hausdorff_distance, measure, objective, ssim, MetricBundle, MetricError,
    ObjectiveBreakdown, ObjectiveConfig,
};
pub use program::{parse_program, ParseError, Point2D, Primitive, Program, Shape, Style, Violation};
pub use raster::{Raster, RasterError};
pub use render::{render, RenderError};
pub use skeleton::{build_skeleton, GeoSkeleton, Relation, RelationKind, SkeletonConfig};
pub use vep::{attribute_regions, project_errors, DiffRegion, DiffReport, RegionClass, VepConfig};

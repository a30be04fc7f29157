//! Phase-one logic: verify anchor candidates against the image, fit stroke
//! hypotheses (segments and circles), mine pairwise relations, and assemble
//! the resulting geometric skeleton.

use crate::anchor::{
    extract_raw_anchors, merge_anchors, sort_anchors, Anchor, AnchorConfig, AnchorKind,
};
use crate::dt::squared_edt;
use crate::edge::{extract_edge_map, EdgeMap};
use crate::fit::{fit_circle, fit_line, point_line_distance, point_segment_distance};
use crate::morph::{connected_components, thin};
use crate::program::Point2D;
use crate::raster::Raster;
use serde::{Deserialize, Serialize};

pub const SKELETON_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationKind {
    Parallel,
    Perpendicular,
    Midpoint,
    Incidence,
    Collinear,
    Tangent,
    EqualLength,
}

/// A mined relation: operand ids reference skeleton anchors/segments/circles.
/// The residual is guaranteed to be within the tolerance it was mined at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub operands: Vec<String>,
    /// Degrees for angular kinds, pixels for metric kinds, relative fraction
    /// for EqualLength.
    pub residual: f64,
    pub tolerance: f64,
}

/// A verified anchor with its skeleton-scoped id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonAnchor {
    pub id: String,
    #[serde(flatten)]
    pub anchor: Anchor,
}

/// A fitted straight-stroke hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentHypothesis {
    pub id: String,
    pub p1: Point2D,
    pub p2: Point2D,
    pub inliers: usize,
    /// Estimated stroke width of the supporting ink, in pixels.
    pub width: f64,
}

impl SegmentHypothesis {
    pub fn length(&self) -> f64 {
        self.p1.dist(&self.p2)
    }

    pub fn midpoint(&self) -> Point2D {
        Point2D::new((self.p1.x + self.p2.x) / 2.0, (self.p1.y + self.p2.y) / 2.0)
    }

    /// Direction angle in degrees, folded to [0, 180).
    pub fn angle_deg(&self) -> f64 {
        let a = (self.p2.y - self.p1.y)
            .atan2(self.p2.x - self.p1.x)
            .to_degrees();
        a.rem_euclid(180.0)
    }
}

/// A fitted circular-stroke hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleHypothesis {
    pub id: String,
    pub center: Point2D,
    pub radius: f64,
    pub inliers: usize,
    pub width: f64,
}

/// The grounded output of phase one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoSkeleton {
    pub schema_version: u32,
    pub anchors: Vec<SkeletonAnchor>,
    pub segments: Vec<SegmentHypothesis>,
    pub circles: Vec<CircleHypothesis>,
    pub relations: Vec<Relation>,
    /// Optional semantic constraint text accompanying the figure.
    pub source_text: Option<String>,
}

impl GeoSkeleton {
    pub fn empty() -> Self {
        Self {
            schema_version: SKELETON_SCHEMA_VERSION,
            anchors: Vec::new(),
            segments: Vec::new(),
            circles: Vec::new(),
            relations: Vec::new(),
            source_text: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty() && self.segments.is_empty() && self.circles.is_empty()
    }

    pub fn segment(&self, id: &str) -> Option<&SegmentHypothesis> {
        self.segments.iter().find(|s| s.id == id)
    }

    pub fn circle(&self, id: &str) -> Option<&CircleHypothesis> {
        self.circles.iter().find(|c| c.id == id)
    }

    pub fn anchor(&self, id: &str) -> Option<&SkeletonAnchor> {
        self.anchors.iter().find(|a| a.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("skeleton serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Relation-mining tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationTolerances {
    pub parallel_deg: f64,
    pub perpendicular_deg: f64,
    pub midpoint_px: f64,
    pub incidence_px: f64,
    pub collinear_px: f64,
    pub tangent_px: f64,
    pub equal_length_rel: f64,
}

impl Default for RelationTolerances {
    fn default() -> Self {
        Self {
            parallel_deg: 2.0,
            perpendicular_deg: 2.0,
            midpoint_px: 3.0,
            incidence_px: 3.0,
            collinear_px: 1.5,
            tangent_px: 3.0,
            equal_length_rel: 0.02,
        }
    }
}

/// All phase-one tunables in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonConfig {
    pub anchors: AnchorConfig,
    /// An anchor must have an edge pixel within this radius to survive.
    pub on_stroke_radius: f64,
    /// Skeleton pixels within this radius of a corner/junction anchor are
    /// removed before branch fitting.
    pub split_radius: f64,
    /// Acceptance bound on the max orthogonal/radial deviation of a fit.
    pub fit_max_deviation: f64,
    /// Branches smaller than this are ignored.
    pub min_branch_pixels: usize,
    /// Endpoints are extended to a split anchor within this radius.
    pub snap_radius: f64,
    /// Minimum pixels supporting a circle hypothesis.
    pub min_circle_inliers: usize,
    pub tolerances: RelationTolerances,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        Self {
            anchors: AnchorConfig::default(),
            on_stroke_radius: 2.0,
            split_radius: 2.0,
            fit_max_deviation: 1.5,
            min_branch_pixels: 5,
            snap_radius: 5.0,
            min_circle_inliers: 12,
            tolerances: RelationTolerances::default(),
        }
    }
}

/// Keep a candidate iff the image supports it: an edge pixel lies within the
/// on-stroke radius, and nearby candidates collapse to their centroid.
pub fn verify_anchors(raw: &[Anchor], img: &Raster, cfg: &SkeletonConfig) -> Vec<Anchor> {
    let edges = extract_edge_map(img, cfg.anchors.edge_threshold);
    let on_stroke: Vec<Anchor> = raw
        .iter()
        .filter(|a| edges.any_within(a.x, a.y, cfg.on_stroke_radius))
        .cloned()
        .collect();
    let mut merged = merge_anchors(&on_stroke, cfg.anchors.merge_radius);
    sort_anchors(&mut merged);
    merged
}

/// Median of a slice (not averaged for even lengths; deterministic).
fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    values[values.len() / 2]
}

/// Estimated stroke width at the given skeleton pixels: twice the median
/// depth inside the ink, minus one.
fn estimate_width(pixels: &[(u32, u32)], ink_depth: &[f64], width: u32) -> f64 {
    let mut depths: Vec<f64> = pixels
        .iter()
        .map(|&(x, y)| ink_depth[y as usize * width as usize + x as usize].sqrt())
        .collect();
    let m = median(&mut depths);
    (2.0 * m - 1.0).max(1.0)
}

/// Split the thinned stroke skeleton at corner/junction anchors and fit each
/// branch with a line first, then a circle. Hypotheses carry inlier counts
/// and an estimated stroke width.
pub fn fit_primitives(
    edges: &EdgeMap,
    anchors: &[Anchor],
    cfg: &SkeletonConfig,
) -> (Vec<SegmentHypothesis>, Vec<CircleHypothesis>) {
    let skel = thin(edges);
    let (w, h) = skel.dimensions();

    // Depth of every pixel inside the ink (distance to background).
    let mut background = EdgeMap::empty(w, h, edges.threshold());
    for y in 0..h {
        for x in 0..w {
            if !edges.get(x, y) {
                background.set(x, y, true);
            }
        }
    }
    let ink_depth = squared_edt(&background);

    // Remove split discs around structural anchors. The disc is centered on
    // the skeleton pixel nearest the anchor so a slightly biased anchor
    // still cuts the stroke.
    let mut cut = skel.clone();
    let split_points: Vec<&Anchor> = anchors
        .iter()
        .filter(|a| matches!(a.kind, AnchorKind::Corner | AnchorKind::Junction))
        .collect();
    let r = cfg.split_radius.ceil() as i64;
    let r2 = cfg.split_radius * cfg.split_radius + 1e-9;
    for a in &split_points {
        let Some((cx, cy)) = nearest_mask_pixel(&skel, a.x, a.y, cfg.snap_radius) else {
            continue;
        };
        let (cx, cy) = (cx as i64, cy as i64);
        for dy in -r..=r {
            for dx in -r..=r {
                if ((dx * dx + dy * dy) as f64) <= r2 && cut.contains(cx + dx, cy + dy) {
                    cut.set((cx + dx) as u32, (cy + dy) as u32, false);
                }
            }
        }
    }

    let mut segments = Vec::new();
    let mut circles: Vec<CircleHypothesis> = Vec::new();
    for comp in connected_components(&cut) {
        if comp.len() < cfg.min_branch_pixels {
            continue;
        }
        let width_est = estimate_width(&comp.pixels, &ink_depth, w);
        if let Some(line) = fit_line(&comp.pixels) {
            if std::env::var("GEOFIG_DBG").is_ok() {
                eprintln!(
                    "DBG branch {} px: line dev {:.2} ({:.1},{:.1})-({:.1},{:.1})",
                    comp.len(),
                    line.max_deviation,
                    line.p1.x,
                    line.p1.y,
                    line.p2.x,
                    line.p2.y
                );
            }
            if line.max_deviation <= cfg.fit_max_deviation {
                let (p1, p2) = extend_to_anchors(line.p1, line.p2, &split_points, cfg.snap_radius);
                segments.push(SegmentHypothesis {
                    id: String::new(),
                    p1,
                    p2,
                    inliers: comp.len(),
                    width: width_est,
                });
                continue;
            }
        }
        if let Some(circle) = fit_circle(&comp.pixels) {
            if circle.max_deviation <= cfg.fit_max_deviation
                && comp.len() >= cfg.min_circle_inliers
                && circle.radius <= 2.0 * w.max(h) as f64
            {
                circles.push(CircleHypothesis {
                    id: String::new(),
                    center: circle.center,
                    radius: circle.radius,
                    inliers: comp.len(),
                    width: width_est,
                });
            }
        }
    }

    let circles = dedup_circles(circles, &skel, cfg);
    let segments = dedup_segments(segments);

    let mut segments = segments;
    let mut circles = circles;
    sort_segments(&mut segments);
    circles.sort_by(|a, b| {
        (a.center.y, a.center.x, a.radius)
            .partial_cmp(&(b.center.y, b.center.x, b.radius))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (i, s) in segments.iter_mut().enumerate() {
        s.id = format!("s{i}");
    }
    for (i, c) in circles.iter_mut().enumerate() {
        c.id = format!("c{i}");
    }
    (segments, circles)
}

fn sort_segments(segments: &mut [SegmentHypothesis]) {
    // Canonical endpoint order inside each hypothesis, then global order.
    for s in segments.iter_mut() {
        if (s.p1.y, s.p1.x) > (s.p2.y, s.p2.x) {
            std::mem::swap(&mut s.p1, &mut s.p2);
        }
    }
    segments.sort_by(|a, b| {
        (a.p1.y, a.p1.x, a.p2.y, a.p2.x)
            .partial_cmp(&(b.p1.y, b.p1.x, b.p2.y, b.p2.x))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn nearest_mask_pixel(mask: &EdgeMap, x: f64, y: f64, radius: f64) -> Option<(u32, u32)> {
    let r = radius.ceil() as i64;
    let (cx, cy) = (x.round() as i64, y.round() as i64);
    let mut best: Option<(f64, (u32, u32))> = None;
    for dy in -r..=r {
        for dx in -r..=r {
            if mask.contains(cx + dx, cy + dy) {
                let d = (cx as f64 + dx as f64 - x).hypot(cy as f64 + dy as f64 - y);
                if d <= radius && best.map(|(bd, _)| d < bd).unwrap_or(true) {
                    best = Some((d, ((cx + dx) as u32, (cy + dy) as u32)));
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Branch fits stop short where split discs removed pixels; pull each
/// endpoint out to the anchor that caused the cut.
fn extend_to_anchors(
    p1: Point2D,
    p2: Point2D,
    split_points: &[&Anchor],
    snap_radius: f64,
) -> (Point2D, Point2D) {
    let extend = |end: Point2D, other: Point2D| -> Point2D {
        let banned = other;
        let mut best: Option<(f64, Point2D)> = None;
        for a in split_points {
            let ap = a.pos();
            let d = ap.dist(&end);
            if d <= snap_radius && ap.dist(&banned) > d {
                if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                    best = Some((d, ap));
                }
            }
        }
        best.map(|(_, p)| p).unwrap_or(end)
    };
    (extend(p1, p2), extend(p2, p1))
}

/// Collapse near-identical circle hypotheses (arc fragments of one ring) and
/// recount inliers over the full skeleton.
fn dedup_circles(
    mut circles: Vec<CircleHypothesis>,
    skel: &EdgeMap,
    cfg: &SkeletonConfig,
) -> Vec<CircleHypothesis> {
    circles.sort_by(|a, b| b.inliers.cmp(&a.inliers));
    let mut kept: Vec<CircleHypothesis> = Vec::new();
    for c in circles {
        let dup = kept.iter().any(|k| {
            k.center.dist(&c.center) <= 3.0 && (k.radius - c.radius).abs() <= 3.0
        });
        if !dup {
            kept.push(c);
        }
    }
    // Recount support over the whole skeleton so fragments all count.
    let pts = skel.points();
    for c in &mut kept {
        c.inliers = pts
            .iter()
            .filter(|&&(x, y)| {
                let d = (x as f64 - c.center.x).hypot(y as f64 - c.center.y);
                (d - c.radius).abs() <= cfg.fit_max_deviation
            })
            .count();
    }
    kept.retain(|c| c.inliers >= cfg.min_circle_inliers);
    kept
}

/// Drop a segment hypothesis that duplicates a kept one (same endpoints
/// within a few pixels). Ties keep the higher inlier count.
fn dedup_segments(mut segments: Vec<SegmentHypothesis>) -> Vec<SegmentHypothesis> {
    segments.sort_by(|a, b| b.inliers.cmp(&a.inliers));
    let mut kept: Vec<SegmentHypothesis> = Vec::new();
    for s in segments {
        let dup = kept.iter().any(|k| {
            (k.p1.dist(&s.p1) <= 3.0 && k.p2.dist(&s.p2) <= 3.0)
                || (k.p1.dist(&s.p2) <= 3.0 && k.p2.dist(&s.p1) <= 3.0)
        });
        if !dup {
            kept.push(s);
        }
    }
    kept
}

/// Exhaustive tolerance-based relation mining over the fitted primitives.
pub fn discover_relations(
    segments: &[SegmentHypothesis],
    circles: &[CircleHypothesis],
    anchors: &[SkeletonAnchor],
    cfg: &SkeletonConfig,
) -> Vec<Relation> {
    let tol = &cfg.tolerances;
    let mut out = Vec::new();

    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            let a = &segments[i];
            let b = &segments[j];
            let mut diff = (a.angle_deg() - b.angle_deg()).abs();
            if diff > 90.0 {
                diff = 180.0 - diff;
            }
            if diff <= tol.parallel_deg {
                out.push(Relation {
                    kind: RelationKind::Parallel,
                    operands: vec![a.id.clone(), b.id.clone()],
                    residual: diff,
                    tolerance: tol.parallel_deg,
                });
            }
            if (diff - 90.0).abs() <= tol.perpendicular_deg {
                out.push(Relation {
                    kind: RelationKind::Perpendicular,
                    operands: vec![a.id.clone(), b.id.clone()],
                    residual: (diff - 90.0).abs(),
                    tolerance: tol.perpendicular_deg,
                });
            }
            let rel_len = (a.length() - b.length()).abs() / a.length().max(b.length()).max(1e-9);
            if rel_len <= tol.equal_length_rel {
                out.push(Relation {
                    kind: RelationKind::EqualLength,
                    operands: vec![a.id.clone(), b.id.clone()],
                    residual: rel_len,
                    tolerance: tol.equal_length_rel,
                });
            }
        }
    }

    for a in anchors {
        for s in segments {
            let p = a.anchor.pos();
            let dm = p.dist(&s.midpoint());
            if dm <= tol.midpoint_px {
                out.push(Relation {
                    kind: RelationKind::Midpoint,
                    operands: vec![a.id.clone(), s.id.clone()],
                    residual: dm,
                    tolerance: tol.midpoint_px,
                });
            } else {
                // Midpoint implies incidence; only report the weaker fact
                // when the stronger one does not hold.
                let di = point_segment_distance(p, s.p1, s.p2);
                let at_end = p.dist(&s.p1).min(p.dist(&s.p2)) <= tol.incidence_px;
                if di <= tol.incidence_px && !at_end {
                    out.push(Relation {
                        kind: RelationKind::Incidence,
                        operands: vec![a.id.clone(), s.id.clone()],
                        residual: di,
                        tolerance: tol.incidence_px,
                    });
                }
            }
        }
        for c in circles {
            let d = (a.anchor.pos().dist(&c.center) - c.radius).abs();
            if d <= tol.incidence_px {
                out.push(Relation {
                    kind: RelationKind::Incidence,
                    operands: vec![a.id.clone(), c.id.clone()],
                    residual: d,
                    tolerance: tol.incidence_px,
                });
            }
        }
    }

    for s in segments {
        for c in circles {
            let d = (point_line_distance(c.center, s.p1, s.p2) - c.radius).abs();
            if d <= tol.tangent_px {
                // Require the tangency point to sit near the segment span.
                let foot = point_segment_distance(c.center, s.p1, s.p2);
                if (foot - c.radius).abs() <= tol.tangent_px {
                    out.push(Relation {
                        kind: RelationKind::Tangent,
                        operands: vec![s.id.clone(), c.id.clone()],
                        residual: d,
                        tolerance: tol.tangent_px,
                    });
                }
            }
        }
    }

    out.extend(collinear_groups(anchors, tol.collinear_px));
    out
}

/// Maximal groups of >= 3 anchors within the collinearity tolerance.
fn collinear_groups(anchors: &[SkeletonAnchor], tol_px: f64) -> Vec<Relation> {
    let mut out: Vec<Relation> = Vec::new();
    let n = anchors.len();
    for i in 0..n {
        for j in i + 1..n {
            let p1 = anchors[i].anchor.pos();
            let p2 = anchors[j].anchor.pos();
            if p1.dist(&p2) < 1.0 {
                continue;
            }
            let mut group = Vec::new();
            let mut residual = 0.0f64;
            for (k, a) in anchors.iter().enumerate() {
                let d = point_line_distance(a.anchor.pos(), p1, p2);
                if d <= tol_px {
                    group.push(k);
                    residual = residual.max(d);
                }
            }
            if group.len() >= 3 {
                let mut ids: Vec<String> =
                    group.iter().map(|&k| anchors[k].id.clone()).collect();
                ids.sort();
                if !out
                    .iter()
                    .any(|r| r.kind == RelationKind::Collinear && subset(&ids, &r.operands))
                {
                    out.retain(|r| {
                        !(r.kind == RelationKind::Collinear && subset(&r.operands, &ids))
                    });
                    out.push(Relation {
                        kind: RelationKind::Collinear,
                        operands: ids,
                        residual,
                        tolerance: tol_px,
                    });
                }
            }
        }
    }
    out
}

fn subset(a: &[String], b: &[String]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Full phase-one composition: raw anchors, verification, fitting, relation
/// mining.
pub fn build_skeleton(img: &Raster, text: Option<&str>, cfg: &SkeletonConfig) -> GeoSkeleton {
    let raw = extract_raw_anchors(img, &cfg.anchors);
    let verified = verify_anchors(&raw, img, cfg);
    let edges = extract_edge_map(img, cfg.anchors.edge_threshold);
    let (segments, circles) = fit_primitives(&edges, &verified, cfg);
    let anchors: Vec<SkeletonAnchor> = verified
        .into_iter()
        .enumerate()
        .map(|(i, anchor)| SkeletonAnchor {
            id: format!("a{i}"),
            anchor,
        })
        .collect();
    let relations = discover_relations(&segments, &circles, &anchors, cfg);
    GeoSkeleton {
        schema_version: SKELETON_SCHEMA_VERSION,
        anchors,
        segments,
        circles,
        relations,
        source_text: text.map(str::to_string),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchor::AnchorSource;
    use crate::program::parse_program;
    use crate::render::render;

    fn raster_of(src: &str) -> Raster {
        render(&parse_program(src).unwrap()).unwrap()
    }

    fn anchor_at(x: f64, y: f64) -> Anchor {
        Anchor {
            x,
            y,
            score: 1.0,
            kind: AnchorKind::Corner,
            source: AnchorSource::GradientOperator,
        }
    }

    #[test]
    fn off_stroke_anchor_is_dropped() {
        let img = raster_of(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment s (100,100) (400,100)\n",
        );
        let cfg = SkeletonConfig::default();
        let kept = verify_anchors(&[anchor_at(500.0, 500.0)], &img, &cfg);
        assert!(kept.is_empty());
    }

    #[test]
    fn near_stroke_anchor_is_kept() {
        let img = raster_of(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment s (100,100) (400,100)\n",
        );
        let cfg = SkeletonConfig::default();
        let kept = verify_anchors(&[anchor_at(200.0, 102.0)], &img, &cfg);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn close_anchors_merge_to_centroid() {
        let img = raster_of(
            "canvas 1000 1000\nstyle width 4 color 0 0 0 dash solid\nsegment s (100,100) (400,100)\n",
        );
        let cfg = SkeletonConfig::default();
        let kept = verify_anchors(&[anchor_at(199.0, 100.0), anchor_at(201.0, 100.0)], &img, &cfg);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].x, 200.0);
        assert_eq!(kept[0].y, 100.0);
    }

    fn triangle_src() -> (&'static str, [(f64, f64); 3]) {
        (
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment a (200,650) (700,650)\nsegment b (700,650) (420,200)\nsegment c (420,200) (200,650)\n",
            [(200.0, 650.0), (700.0, 650.0), (420.0, 200.0)],
        )
    }

    #[test]
    fn triangle_fits_three_segments_near_vertices() {
        let (src, verts) = triangle_src();
        let img = raster_of(src);
        let skel = build_skeleton(&img, None, &SkeletonConfig::default());
        assert_eq!(skel.segments.len(), 3, "segments: {:?}", skel.segments);
        for (vx, vy) in verts {
            let v = Point2D::new(vx, vy);
            let found = skel
                .segments
                .iter()
                .any(|s| s.p1.dist(&v) <= 3.0 || s.p2.dist(&v) <= 3.0);
            assert!(found, "no fitted endpoint within 3px of ({vx},{vy})");
        }
        assert!(skel.circles.is_empty());
    }

    #[test]
    fn circle_fixture_fits_one_circle() {
        let img = raster_of(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\ncircle c (500,500) 200\n",
        );
        let skel = build_skeleton(&img, None, &SkeletonConfig::default());
        assert_eq!(skel.circles.len(), 1, "circles: {:?}", skel.circles);
        let c = &skel.circles[0];
        assert!(c.center.dist(&Point2D::new(500.0, 500.0)) <= 3.0);
        assert!((c.radius - 200.0).abs() <= 3.0);
        assert!(skel.segments.is_empty(), "segments: {:?}", skel.segments);
    }

    #[test]
    fn blank_image_gives_empty_skeleton() {
        let skel = build_skeleton(&Raster::white(400, 400), None, &SkeletonConfig::default());
        assert!(skel.is_empty());
        assert!(skel.relations.is_empty());
    }

    #[test]
    fn square_has_expected_relations() {
        let img = raster_of(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment a (250,250) (750,250)\nsegment b (750,250) (750,750)\nsegment c (750,750) (250,750)\nsegment d (250,750) (250,250)\n",
        );
        let skel = build_skeleton(&img, None, &SkeletonConfig::default());
        assert_eq!(skel.segments.len(), 4);
        assert_eq!(skel.anchors.iter().filter(|a| a.anchor.kind == AnchorKind::Corner).count(), 4);
        let parallels = skel
            .relations
            .iter()
            .filter(|r| r.kind == RelationKind::Parallel)
            .count();
        let perps = skel
            .relations
            .iter()
            .filter(|r| r.kind == RelationKind::Perpendicular)
            .count();
        assert!(parallels >= 2, "relations: {:?}", skel.relations);
        assert!(perps >= 4, "relations: {:?}", skel.relations);
    }

    #[test]
    fn relation_residuals_respect_tolerances() {
        let (src, _) = triangle_src();
        let img = raster_of(src);
        let skel = build_skeleton(&img, None, &SkeletonConfig::default());
        for r in &skel.relations {
            assert!(
                r.residual <= r.tolerance,
                "relation {:?} exceeds tolerance",
                r
            );
        }
    }

    #[test]
    fn angle_arithmetic_drives_parallel_and_perpendicular() {
        let mk = |id: &str, p1: (f64, f64), p2: (f64, f64)| SegmentHypothesis {
            id: id.into(),
            p1: Point2D::new(p1.0, p1.1),
            p2: Point2D::new(p2.0, p2.1),
            inliers: 10,
            width: 2.0,
        };
        let cfg = SkeletonConfig::default();
        // 0 deg vs 0.5 deg.
        let s0 = mk("s0", (0.0, 0.0), (200.0, 0.0));
        let s1 = mk("s1", (0.0, 50.0), (200.0, 50.0 + 200.0 * 0.5f64.to_radians().tan()));
        let rels = discover_relations(&[s0.clone(), s1], &[], &[], &cfg);
        let par = rels
            .iter()
            .find(|r| r.kind == RelationKind::Parallel)
            .expect("parallel relation");
        assert!((par.residual - 0.5).abs() < 0.05, "residual {}", par.residual);

        // Exact right angle.
        let s2 = mk("s2", (0.0, 0.0), (0.0, 150.0));
        let rels = discover_relations(&[s0, s2], &[], &[], &cfg);
        let perp = rels
            .iter()
            .find(|r| r.kind == RelationKind::Perpendicular)
            .expect("perpendicular relation");
        assert_eq!(perp.residual, 0.0);
    }

    #[test]
    fn exact_midpoint_has_zero_residual() {
        let s = SegmentHypothesis {
            id: "s0".into(),
            p1: Point2D::new(100.0, 100.0),
            p2: Point2D::new(300.0, 100.0),
            inliers: 10,
            width: 2.0,
        };
        let a = SkeletonAnchor {
            id: "a0".into(),
            anchor: anchor_at(200.0, 100.0),
        };
        let rels = discover_relations(&[s], &[], &[a], &SkeletonConfig::default());
        let mid = rels
            .iter()
            .find(|r| r.kind == RelationKind::Midpoint)
            .expect("midpoint relation");
        assert_eq!(mid.residual, 0.0);
        assert_eq!(mid.operands, vec!["a0".to_string(), "s0".to_string()]);
    }

    #[test]
    fn skeleton_json_round_trips() {
        let (src, _) = triangle_src();
        let img = raster_of(src);
        let skel = build_skeleton(&img, Some("a triangle"), &SkeletonConfig::default());
        let json = skel.to_json();
        assert!(json.contains("\"schema_version\""));
        let back = GeoSkeleton::from_json(&json).unwrap();
        assert_eq!(skel, back);
    }

    #[test]
    fn verified_anchors_are_subset_of_merged_raw() {
        let (src, _) = triangle_src();
        let img = raster_of(src);
        let cfg = SkeletonConfig::default();
        let raw = extract_raw_anchors(&img, &cfg.anchors);
        let verified = verify_anchors(&raw, &img, &cfg);
        let merged_raw = merge_anchors(&raw, cfg.anchors.merge_radius);
        for v in &verified {
            assert!(
                merged_raw.iter().any(|m| m.dist(v) <= 1e-9),
                "verified anchor {v:?} not in merged raw set"
            );
        }
    }
}

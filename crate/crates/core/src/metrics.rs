//! Quantitative inspection: Chamfer and Hausdorff distances between edge
//! sets, windowed SSIM, and the weighted objective combining geometric
//! fidelity, program validity and relation satisfaction.

use crate::dt::squared_edt;
use crate::edge::{extract_edge_map, EdgeMap, DEFAULT_EDGE_THRESHOLD};
use crate::fit::{point_line_distance, point_segment_distance};
use crate::program::{Program, Shape};
use crate::raster::Raster;
use crate::skeleton::{GeoSkeleton, Relation, RelationKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("empty edge set on the {0:?} side")]
    EmptyEdgeSet(Side),
    #[error("dimension mismatch: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
}

/// Edge-metric bundle for one rendered/observed pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub cd: f64,
    pub hd: f64,
    pub ssim: f64,
    /// (rendered, observed) edge pixel counts.
    pub edge_counts: (usize, usize),
}

const BRUTE_FORCE_CUTOFF: usize = 64;

/// Mean and max nearest-neighbor distances from `from` into the distance
/// field of the other set.
fn directed_stats_field(from: &EdgeMap, field: &[f64], field_w: u32) -> (f64, f64) {
    let mut sum = 0.0f64;
    let mut max = 0.0f64;
    let mut n = 0usize;
    for (x, y) in from.points() {
        let d = field[y as usize * field_w as usize + x as usize].sqrt();
        sum += d;
        if d > max {
            max = d;
        }
        n += 1;
    }
    (sum / n as f64, max)
}

fn directed_stats_brute(from: &[(u32, u32)], to: &[(u32, u32)]) -> (f64, f64) {
    let mut sum = 0.0f64;
    let mut max = 0.0f64;
    for &(ax, ay) in from {
        let mut best = f64::INFINITY;
        for &(bx, by) in to {
            let dx = ax as f64 - bx as f64;
            let dy = ay as f64 - by as f64;
            let d2 = dx * dx + dy * dy;
            if d2 < best {
                best = d2;
            }
        }
        let d = best.sqrt();
        sum += d;
        if d > max {
            max = d;
        }
    }
    (sum / from.len() as f64, max)
}

/// Both symmetric edge metrics in one pass: (chamfer, hausdorff).
pub fn edge_distances(a: &EdgeMap, b: &EdgeMap) -> Result<(f64, f64), MetricError> {
    if a.is_empty() {
        return Err(MetricError::EmptyEdgeSet(Side::Left));
    }
    if b.is_empty() {
        return Err(MetricError::EmptyEdgeSet(Side::Right));
    }
    let na = a.count();
    let nb = b.count();
    let use_brute = na.min(nb) < BRUTE_FORCE_CUTOFF || a.dimensions() != b.dimensions();
    let ((mean_ab, max_ab), (mean_ba, max_ba)) = if use_brute {
        let pa = a.points();
        let pb = b.points();
        (directed_stats_brute(&pa, &pb), directed_stats_brute(&pb, &pa))
    } else {
        let dt_b = squared_edt(b);
        let dt_a = squared_edt(a);
        (
            directed_stats_field(a, &dt_b, b.width()),
            directed_stats_field(b, &dt_a, a.width()),
        )
    };
    Ok((0.5 * (mean_ab + mean_ba), max_ab.max(max_ba)))
}

/// Symmetric mean nearest-neighbor distance between two edge sets, in
/// pixels.
pub fn chamfer_distance(a: &EdgeMap, b: &EdgeMap) -> Result<f64, MetricError> {
    edge_distances(a, b).map(|(cd, _)| cd)
}

/// Worst-case nearest-neighbor distance between two edge sets, in pixels.
pub fn hausdorff_distance(a: &EdgeMap, b: &EdgeMap) -> Result<f64, MetricError> {
    edge_distances(a, b).map(|(_, hd)| hd)
}

const SSIM_WINDOW: usize = 8;
const SSIM_STRIDE: usize = 4;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Mean local SSIM over 8x8 windows at stride 4 on the grayscale
/// conversions. Exact integer window sums via integral images.
pub fn ssim(a: &Raster, b: &Raster) -> Result<f64, MetricError> {
    if a.dimensions() != b.dimensions() {
        return Err(MetricError::DimensionMismatch {
            a: a.dimensions(),
            b: b.dimensions(),
        });
    }
    let (w, h) = (a.width() as usize, a.height() as usize);
    let ga = a.to_luma();
    let gb = b.to_luma();

    // Whole image as a single window when it is smaller than the kernel.
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Ok(ssim_window_direct(&ga, &gb, w, 0, 0, w, h));
    }

    let sums = IntegralSums::build(&ga, &gb, w, h);
    let mut total = 0.0f64;
    let mut count = 0usize;
    let mut y = 0;
    while y + SSIM_WINDOW <= h {
        let mut x = 0;
        while x + SSIM_WINDOW <= w {
            total += sums.window_ssim(x, y, SSIM_WINDOW);
            count += 1;
            x += SSIM_STRIDE;
        }
        y += SSIM_STRIDE;
    }
    Ok(total / count as f64)
}

struct IntegralSums {
    w: usize,
    s1: Vec<u64>,
    s2: Vec<u64>,
    q1: Vec<u64>,
    q2: Vec<u64>,
    cross: Vec<u64>,
}

impl IntegralSums {
    fn build(ga: &[u8], gb: &[u8], w: usize, h: usize) -> Self {
        let stride = w + 1;
        let mut s1 = vec![0u64; stride * (h + 1)];
        let mut s2 = vec![0u64; stride * (h + 1)];
        let mut q1 = vec![0u64; stride * (h + 1)];
        let mut q2 = vec![0u64; stride * (h + 1)];
        let mut cross = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                let va = ga[y * w + x] as u64;
                let vb = gb[y * w + x] as u64;
                let i = (y + 1) * stride + (x + 1);
                let up = y * stride + (x + 1);
                let left = (y + 1) * stride + x;
                let diag = y * stride + x;
                s1[i] = va + s1[up] + s1[left] - s1[diag];
                s2[i] = vb + s2[up] + s2[left] - s2[diag];
                q1[i] = va * va + q1[up] + q1[left] - q1[diag];
                q2[i] = vb * vb + q2[up] + q2[left] - q2[diag];
                cross[i] = va * vb + cross[up] + cross[left] - cross[diag];
            }
        }
        Self {
            w,
            s1,
            s2,
            q1,
            q2,
            cross,
        }
    }

    fn rect(&self, table: &[u64], x: usize, y: usize, k: usize) -> u64 {
        let stride = self.w + 1;
        table[(y + k) * stride + (x + k)] + table[y * stride + x]
            - table[y * stride + (x + k)]
            - table[(y + k) * stride + x]
    }

    fn window_ssim(&self, x: usize, y: usize, k: usize) -> f64 {
        let n = (k * k) as f64;
        let sum1 = self.rect(&self.s1, x, y, k) as f64;
        let sum2 = self.rect(&self.s2, x, y, k) as f64;
        let sq1 = self.rect(&self.q1, x, y, k) as f64;
        let sq2 = self.rect(&self.q2, x, y, k) as f64;
        let cr = self.rect(&self.cross, x, y, k) as f64;
        let mu1 = sum1 / n;
        let mu2 = sum2 / n;
        let var1 = sq1 / n - mu1 * mu1;
        let var2 = sq2 / n - mu2 * mu2;
        let cov = cr / n - mu1 * mu2;
        ((2.0 * mu1 * mu2 + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((mu1 * mu1 + mu2 * mu2 + SSIM_C1) * (var1 + var2 + SSIM_C2))
    }
}

fn ssim_window_direct(
    ga: &[u8],
    gb: &[u8],
    stride: usize,
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
) -> f64 {
    let n = (w * h) as f64;
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut sq1 = 0.0;
    let mut sq2 = 0.0;
    let mut cr = 0.0;
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            let va = ga[y * stride + x] as f64;
            let vb = gb[y * stride + x] as f64;
            sum1 += va;
            sum2 += vb;
            sq1 += va * va;
            sq2 += vb * vb;
            cr += va * vb;
        }
    }
    let mu1 = sum1 / n;
    let mu2 = sum2 / n;
    let var1 = sq1 / n - mu1 * mu1;
    let var2 = sq2 / n - mu2 * mu2;
    let cov = cr / n - mu1 * mu2;
    ((2.0 * mu1 * mu2 + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((mu1 * mu1 + mu2 * mu2 + SSIM_C1) * (var1 + var2 + SSIM_C2))
}

/// The standardized canvas edge for pixel metrics.
pub const STANDARD_CANVAS: u32 = 1000;

/// Nearest-neighbor resample to the standardized square canvas, unless the
/// raster already matches it.
pub fn standardize(r: &Raster) -> Raster {
    if r.dimensions() == (STANDARD_CANVAS, STANDARD_CANVAS) {
        r.clone()
    } else {
        r.resize_nearest(STANDARD_CANVAS, STANDARD_CANVAS)
    }
}

/// Full metric bundle for a rendered/observed pair of equal dimensions. An
/// empty edge set on either side degrades cd/hd to the canvas diagonal.
pub fn measure(rec: &Raster, obs: &Raster, threshold: u8) -> Result<MetricBundle, MetricError> {
    if rec.dimensions() != obs.dimensions() {
        return Err(MetricError::DimensionMismatch {
            a: rec.dimensions(),
            b: obs.dimensions(),
        });
    }
    let er = extract_edge_map(rec, threshold);
    let eo = extract_edge_map(obs, threshold);
    let diag = (rec.width() as f64).hypot(rec.height() as f64);
    let (cd, hd) = match edge_distances(&er, &eo) {
        Ok(v) => v,
        Err(MetricError::EmptyEdgeSet(_)) => (diag, diag),
        Err(e) => return Err(e),
    };
    Ok(MetricBundle {
        cd,
        hd,
        ssim: ssim(rec, obs)?,
        edge_counts: (er.count(), eo.count()),
    })
}

/// Weights of the global objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Pixel normalizer for the geometric term.
    pub cd_scale: f64,
    pub edge_threshold: u8,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.5,
            cd_scale: 100.0,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
        }
    }
}

/// Share of the worst-case (Hausdorff) error mixed into the geometric term.
const HD_MIX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub d_geo: f64,
    pub d_consist: f64,
    pub d_sem: f64,
    pub q: f64,
}

/// Evaluate the weighted objective of a candidate program against an
/// observation and skeleton. Renders the candidate internally; rendering
/// failures and blank edge sets score the maximal geometric error.
pub fn objective(
    p: &Program,
    obs: &Raster,
    skel: &GeoSkeleton,
    cfg: &ObjectiveConfig,
) -> ObjectiveBreakdown {
    let eval = ObjectiveEval::new(obs, skel, *cfg);
    eval.evaluate(p)
}

/// Cached observation side of the objective, for repeated probing of
/// candidate programs against one observation.
pub struct ObjectiveEval<'a> {
    obs: &'a Raster,
    obs_edges: EdgeMap,
    skel: &'a GeoSkeleton,
    pub cfg: ObjectiveConfig,
}

impl<'a> ObjectiveEval<'a> {
    pub fn new(obs: &'a Raster, skel: &'a GeoSkeleton, cfg: ObjectiveConfig) -> Self {
        Self {
            obs,
            obs_edges: extract_edge_map(obs, cfg.edge_threshold),
            skel,
            cfg,
        }
    }

    pub fn evaluate(&self, p: &Program) -> ObjectiveBreakdown {
        let diag = (self.obs.width() as f64).hypot(self.obs.height() as f64);
        let violations = p.validate_consistency();
        let d_consist = violations.len() as f64;
        let d_geo = if violations.is_empty() {
            match crate::render::render(p) {
                Ok(rec) => {
                    let er = extract_edge_map(&rec, self.cfg.edge_threshold);
                    match edge_distances(&er, &self.obs_edges) {
                        Ok((cd, hd)) => (cd + HD_MIX * hd) / self.cfg.cd_scale,
                        Err(_) => diag / self.cfg.cd_scale,
                    }
                }
                Err(_) => diag / self.cfg.cd_scale,
            }
        } else {
            diag / self.cfg.cd_scale
        };
        let d_sem = semantic_distance(p, self.skel);
        let q = self.cfg.alpha * d_geo + self.cfg.beta * d_consist + self.cfg.gamma * d_sem;
        ObjectiveBreakdown {
            d_geo,
            d_consist,
            d_sem,
            q,
        }
    }
}

/// Radius within which a skeleton hypothesis is matched to a program
/// primitive when re-scoring relations.
const MATCH_RADIUS: f64 = 25.0;
/// Ratio charged for a relation whose operands no longer exist in the
/// program.
const UNMATCHED_RATIO: f64 = 2.0;

/// Mean relation-residual ratio of the program against the skeleton's mined
/// relations; 0 when the skeleton has none.
pub fn semantic_distance(p: &Program, skel: &GeoSkeleton) -> f64 {
    if skel.relations.is_empty() {
        return 0.0;
    }
    let total: f64 = skel
        .relations
        .iter()
        .map(|r| relation_ratio(r, p, skel))
        .sum();
    total / skel.relations.len() as f64
}

fn find_program_segment<'a>(
    p: &'a Program,
    hyp: &crate::skeleton::SegmentHypothesis,
) -> Option<(&'a crate::program::Point2D, &'a crate::program::Point2D)> {
    let mut best: Option<(f64, (&crate::program::Point2D, &crate::program::Point2D))> = None;
    for prim in &p.primitives {
        if let Shape::Segment { p1, p2 } = &prim.shape {
            let direct = hyp.p1.dist(p1).max(hyp.p2.dist(p2));
            let swapped = hyp.p1.dist(p2).max(hyp.p2.dist(p1));
            let (d, pair) = if direct <= swapped {
                (direct, (p1, p2))
            } else {
                (swapped, (p2, p1))
            };
            if d <= MATCH_RADIUS && best.map(|(bd, _)| d < bd).unwrap_or(true) {
                best = Some((d, pair));
            }
        }
    }
    best.map(|(_, pair)| pair)
}

fn find_program_circle<'a>(
    p: &'a Program,
    hyp: &crate::skeleton::CircleHypothesis,
) -> Option<(&'a crate::program::Point2D, f64)> {
    let mut best: Option<(f64, (&crate::program::Point2D, f64))> = None;
    for prim in &p.primitives {
        if let Shape::Circle { center, radius } = &prim.shape {
            let d = hyp.center.dist(center) + (hyp.radius - radius).abs();
            if hyp.center.dist(center) <= MATCH_RADIUS
                && (hyp.radius - radius).abs() <= MATCH_RADIUS
                && best.map(|(bd, _)| d < bd).unwrap_or(true)
            {
                best = Some((d, (center, *radius)));
            }
        }
    }
    best.map(|(_, v)| v)
}

fn fold_angle(p1: &crate::program::Point2D, p2: &crate::program::Point2D) -> f64 {
    (p2.y - p1.y).atan2(p2.x - p1.x).to_degrees().rem_euclid(180.0)
}

fn relation_ratio(rel: &Relation, p: &Program, skel: &GeoSkeleton) -> f64 {
    let seg = |id: &str| skel.segment(id).and_then(|h| find_program_segment(p, h));
    let circ = |id: &str| skel.circle(id).and_then(|h| find_program_circle(p, h));
    let anchor_pos = |id: &str| skel.anchor(id).map(|a| a.anchor.pos());

    let residual = match rel.kind {
        RelationKind::Parallel | RelationKind::Perpendicular => {
            match (seg(&rel.operands[0]), seg(&rel.operands[1])) {
                (Some((a1, a2)), Some((b1, b2))) => {
                    let mut diff = (fold_angle(a1, a2) - fold_angle(b1, b2)).abs();
                    if diff > 90.0 {
                        diff = 180.0 - diff;
                    }
                    if rel.kind == RelationKind::Perpendicular {
                        (diff - 90.0).abs()
                    } else {
                        diff
                    }
                }
                _ => return UNMATCHED_RATIO,
            }
        }
        RelationKind::EqualLength => {
            match (seg(&rel.operands[0]), seg(&rel.operands[1])) {
                (Some((a1, a2)), Some((b1, b2))) => {
                    let la = a1.dist(a2);
                    let lb = b1.dist(b2);
                    (la - lb).abs() / la.max(lb).max(1e-9)
                }
                _ => return UNMATCHED_RATIO,
            }
        }
        RelationKind::Midpoint => {
            match (anchor_pos(&rel.operands[0]), seg(&rel.operands[1])) {
                (Some(a), Some((p1, p2))) => {
                    let mid =
                        crate::program::Point2D::new((p1.x + p2.x) / 2.0, (p1.y + p2.y) / 2.0);
                    a.dist(&mid)
                }
                _ => return UNMATCHED_RATIO,
            }
        }
        RelationKind::Incidence => match anchor_pos(&rel.operands[0]) {
            Some(a) => {
                if let Some((p1, p2)) = seg(&rel.operands[1]) {
                    point_segment_distance(a, *p1, *p2)
                } else if let Some((center, radius)) = circ(&rel.operands[1]) {
                    (a.dist(center) - radius).abs()
                } else {
                    return UNMATCHED_RATIO;
                }
            }
            None => return UNMATCHED_RATIO,
        },
        RelationKind::Tangent => {
            match (seg(&rel.operands[0]), circ(&rel.operands[1])) {
                (Some((p1, p2)), Some((center, radius))) => {
                    (point_line_distance(*center, *p1, *p2) - radius).abs()
                }
                _ => return UNMATCHED_RATIO,
            }
        }
        // Anchors do not move with the program; the mined residual stands.
        RelationKind::Collinear => rel.residual,
    };
    residual / rel.tolerance.max(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::render::render;
    use crate::skeleton::{build_skeleton, SkeletonConfig};

    /// Independent brute-force oracle used throughout the tests.
    fn oracle(a: &[(u32, u32)], b: &[(u32, u32)]) -> (f64, f64) {
        let dir = |from: &[(u32, u32)], to: &[(u32, u32)]| -> (f64, f64) {
            let mut sum = 0.0;
            let mut max = 0.0f64;
            for &(x1, y1) in from {
                let mut best = f64::INFINITY;
                for &(x2, y2) in to {
                    let d = ((x1 as f64 - x2 as f64).powi(2) + (y1 as f64 - y2 as f64).powi(2))
                        .sqrt();
                    best = best.min(d);
                }
                sum += best;
                max = max.max(best);
            }
            (sum / from.len() as f64, max)
        };
        let (m1, x1) = dir(a, b);
        let (m2, x2) = dir(b, a);
        (0.5 * (m1 + m2), x1.max(x2))
    }

    fn map_of(pts: &[(u32, u32)]) -> EdgeMap {
        EdgeMap::from_points(256, 256, pts.iter().copied())
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let m = map_of(&[(3, 4), (10, 10), (200, 100)]);
        assert_eq!(chamfer_distance(&m, &m).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn single_point_pair_is_euclidean() {
        let a = map_of(&[(0, 0)]);
        let b = map_of(&[(3, 4)]);
        assert_eq!(chamfer_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn frozen_two_against_one() {
        // Expected values computed with the brute-force oracle:
        // directed means 5/2=2.5 and 0, so cd = 0.5*(5+0)=2.5; hd = 10.
        let a = map_of(&[(0, 0), (10, 0)]);
        let b = map_of(&[(0, 0)]);
        assert_eq!(chamfer_distance(&a, &b).unwrap(), 2.5);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 10.0);
        let (ocd, ohd) = oracle(&[(0, 0), (10, 0)], &[(0, 0)]);
        assert_eq!(ocd, 2.5);
        assert_eq!(ohd, 10.0);
    }

    #[test]
    fn empty_side_is_reported() {
        let a = map_of(&[(0, 0)]);
        let e = EdgeMap::empty(256, 256, 200);
        assert_eq!(
            chamfer_distance(&e, &a).unwrap_err(),
            MetricError::EmptyEdgeSet(Side::Left)
        );
        assert_eq!(
            chamfer_distance(&a, &e).unwrap_err(),
            MetricError::EmptyEdgeSet(Side::Right)
        );
    }

    #[test]
    fn fast_path_matches_oracle_on_random_sets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.gen_range(1..=200usize);
            let m = rng.gen_range(1..=200usize);
            let pa: Vec<(u32, u32)> = (0..n)
                .map(|_| (rng.gen_range(0..256), rng.gen_range(0..256)))
                .collect();
            let pb: Vec<(u32, u32)> = (0..m)
                .map(|_| (rng.gen_range(0..256), rng.gen_range(0..256)))
                .collect();
            let (cd, hd) = edge_distances(&map_of(&pa), &map_of(&pb)).unwrap();
            let (ocd, ohd) = oracle(&map_of(&pa).points(), &map_of(&pb).points());
            assert!((cd - ocd).abs() < 1e-9, "cd {cd} vs oracle {ocd}");
            assert!((hd - ohd).abs() < 1e-9, "hd {hd} vs oracle {ohd}");
            assert!(cd <= hd + 1e-12);
            // Symmetry.
            let (cd2, hd2) = edge_distances(&map_of(&pb), &map_of(&pa)).unwrap();
            assert!((cd - cd2).abs() < 1e-9);
            assert!((hd - hd2).abs() < 1e-9);
        }
    }

    #[test]
    fn ssim_identity_is_one() {
        let p = parse_program(
            "canvas 200 200\nstyle width 2 color 0 0 0 dash solid\nsegment s (20,20) (180,120)\ncircle c (100,100) 40\n",
        )
        .unwrap();
        let r = render(&p).unwrap();
        let v = ssim(&r, &r).unwrap();
        assert!((v - 1.0).abs() <= 1e-12, "ssim(a,a) = {v}");
    }

    #[test]
    fn ssim_dimension_mismatch() {
        let a = Raster::white(100, 100);
        let b = Raster::white(99, 100);
        assert!(matches!(
            ssim(&a, &b).unwrap_err(),
            MetricError::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn ssim_matches_naive_reference_on_checkerboard() {
        let mut b = Raster::white(64, 64);
        for y in 0..64 {
            for x in 0..64 {
                if (x / 4 + y / 4) % 2 == 0 {
                    b.put(x, y, [0, 0, 0]);
                }
            }
        }
        let a = Raster::white(64, 64);
        let got = ssim(&a, &b).unwrap();

        // Naive scalar reference: direct two-pass statistics per window.
        let ga = a.to_luma();
        let gb = b.to_luma();
        let mut total = 0.0;
        let mut count = 0;
        let mut y = 0;
        while y + 8 <= 64 {
            let mut x = 0;
            while x + 8 <= 64 {
                let mut va = Vec::new();
                let mut vb = Vec::new();
                for yy in y..y + 8 {
                    for xx in x..x + 8 {
                        va.push(ga[yy * 64 + xx] as f64);
                        vb.push(gb[yy * 64 + xx] as f64);
                    }
                }
                let n = 64.0;
                let mu1: f64 = va.iter().sum::<f64>() / n;
                let mu2: f64 = vb.iter().sum::<f64>() / n;
                let var1: f64 = va.iter().map(|v| (v - mu1) * (v - mu1)).sum::<f64>() / n;
                let var2: f64 = vb.iter().map(|v| (v - mu2) * (v - mu2)).sum::<f64>() / n;
                let cov: f64 = va
                    .iter()
                    .zip(&vb)
                    .map(|(x1, x2)| (x1 - mu1) * (x2 - mu2))
                    .sum::<f64>()
                    / n;
                total += ((2.0 * mu1 * mu2 + SSIM_C1) * (2.0 * cov + SSIM_C2))
                    / ((mu1 * mu1 + mu2 * mu2 + SSIM_C1) * (var1 + var2 + SSIM_C2));
                count += 1;
                x += 4;
            }
            y += 4;
        }
        let reference = total / count as f64;
        assert!(
            (got - reference).abs() < 1e-6,
            "ssim {got} vs reference {reference}"
        );
    }

    #[test]
    fn measure_degrades_blank_sides_to_diagonal() {
        let blank = Raster::white(100, 100);
        let m = measure(&blank, &blank, DEFAULT_EDGE_THRESHOLD).unwrap();
        let diag = 100.0f64.hypot(100.0);
        assert_eq!(m.cd, diag);
        assert_eq!(m.hd, diag);
        assert_eq!(m.edge_counts, (0, 0));
    }

    fn square_program(shift: f64) -> Program {
        let src = format!(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment a ({x0},250) ({x1},250)\nsegment b ({x1},250) ({x1},750)\nsegment c ({x1},750) ({x0},750)\nsegment d ({x0},750) ({x0},250)\n",
            x0 = 250.0 + shift,
            x1 = 750.0 + shift,
        );
        parse_program(&src).unwrap()
    }

    #[test]
    fn identity_objective_is_zero_under_alpha_only() {
        let p = square_program(0.0);
        let obs = render(&p).unwrap();
        let skel = GeoSkeleton::empty();
        let cfg = ObjectiveConfig {
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            ..ObjectiveConfig::default()
        };
        let b = objective(&p, &obs, &skel, &cfg);
        assert_eq!(b.q, 0.0);
        assert_eq!(b.d_geo, 0.0);
    }

    #[test]
    fn clean_program_without_relations_has_zero_consist_and_sem() {
        let p = square_program(0.0);
        let obs = render(&p).unwrap();
        let b = objective(&p, &obs, &GeoSkeleton::empty(), &ObjectiveConfig::default());
        assert_eq!(b.d_consist, 0.0);
        assert_eq!(b.d_sem, 0.0);
    }

    #[test]
    fn shifted_square_objective_composes_from_oracle_metrics() {
        let p = square_program(0.0);
        let obs = render(&square_program(5.0)).unwrap();
        let cfg = ObjectiveConfig {
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            ..ObjectiveConfig::default()
        };
        let b = objective(&p, &obs, &GeoSkeleton::empty(), &cfg);
        let rec = render(&p).unwrap();
        let er = extract_edge_map(&rec, cfg.edge_threshold);
        let eo = extract_edge_map(&obs, cfg.edge_threshold);
        let (ocd, ohd) = oracle(&er.points(), &eo.points());
        let expect = (ocd + 0.1 * ohd) / cfg.cd_scale;
        assert!(
            (b.q - expect).abs() < 1e-9,
            "q {} vs composed {}",
            b.q,
            expect
        );
        assert!(b.q > 0.0);
    }

    #[test]
    fn objective_is_linear_in_weights() {
        let p = square_program(0.0);
        let obs = render(&square_program(5.0)).unwrap();
        let img = render(&p).unwrap();
        let skel = build_skeleton(&img, None, &SkeletonConfig::default());
        let base = ObjectiveConfig::default();
        let doubled = ObjectiveConfig {
            alpha: base.alpha * 2.0,
            beta: base.beta * 2.0,
            gamma: base.gamma * 2.0,
            ..base
        };
        let q1 = objective(&p, &obs, &skel, &base).q;
        let q2 = objective(&p, &obs, &skel, &doubled).q;
        assert!((q2 - 2.0 * q1).abs() < 1e-9, "q2 {q2} != 2*q1 {q1}");
    }

    #[test]
    fn invalid_program_pays_consistency_and_max_geo() {
        let mut p = square_program(0.0);
        p.primitives[0].shape = Shape::Circle {
            center: crate::program::Point2D::new(500.0, 500.0),
            radius: -2.0,
        };
        let obs = render(&square_program(0.0)).unwrap();
        let b = objective(&p, &obs, &GeoSkeleton::empty(), &ObjectiveConfig::default());
        assert_eq!(b.d_consist, 1.0);
        let diag = 1000.0f64.hypot(1000.0);
        assert_eq!(b.d_geo, diag / 100.0);
    }

    #[test]
    fn standardize_resizes_only_nonstandard() {
        let small = Raster::white(500, 400);
        assert_eq!(standardize(&small).dimensions(), (1000, 1000));
        let exact = Raster::white(1000, 1000);
        assert_eq!(standardize(&exact), exact);
    }
}

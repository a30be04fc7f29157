//! Pixel-wise anchoring: extract keypoint candidates (corners, junctions,
//! stroke endpoints) directly from image gradients so downstream synthesis
//! works from concrete pixel coordinates. The candidate set is deliberately
//! high-recall; verification happens later.

use crate::edge::{extract_edge_map, EdgeMap, DEFAULT_EDGE_THRESHOLD};
use crate::morph::{crossing_number, thin};
use crate::program::Point2D;
use crate::raster::Raster;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorKind {
    Corner,
    Junction,
    Endpoint,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorSource {
    GradientOperator,
    AgentProposal,
}

/// A keypoint candidate with a normalized response score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub x: f64,
    pub y: f64,
    pub score: f64,
    pub kind: AnchorKind,
    pub source: AnchorSource,
}

impl Anchor {
    pub fn pos(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }

    pub fn dist(&self, other: &Anchor) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Tunables for the gradient operators. Defaults are standard Harris-style
/// parameters; all of them are surfaced here rather than buried in code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorConfig {
    /// Binarization threshold for ink-on-white figures.
    pub edge_threshold: u8,
    /// Gaussian presmoothing applied before gradients, in pixels. Washes out
    /// the rasterization staircase of steep strokes.
    pub smoothing_sigma: f64,
    /// Structure-tensor sensitivity constant.
    pub harris_k: f64,
    /// Non-maximum-suppression radius in pixels.
    pub nms_radius: f64,
    /// Keep responses at least this fraction of the image maximum.
    pub response_rel_threshold: f64,
    /// Candidates closer than this are merged into one anchor.
    pub merge_radius: f64,
    /// Minimum separation of junction/endpoint anchors.
    pub junction_separation: f64,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
            smoothing_sigma: 1.5,
            harris_k: 0.04,
            nms_radius: 5.0,
            response_rel_threshold: 0.01,
            merge_radius: 4.0,
            junction_separation: 5.0,
        }
    }
}

/// Harris corner response: the mask is thinned to its centerline first so
/// corners localize at true vertices instead of the inner rim of a thick
/// stroke. Over the skeleton: Sobel gradients, 3x3 structure-tensor window,
/// R = det - k * trace^2, relative thresholding and non-maximum suppression.
/// Scores are normalized by the maximum response.
pub fn detect_corners(edges: &EdgeMap, cfg: &AnchorConfig) -> Vec<Anchor> {
    corners_of_skeleton(&thin(edges), cfg)
}

fn corners_of_skeleton(skel: &EdgeMap, cfg: &AnchorConfig) -> Vec<Anchor> {
    let (w, h) = skel.dimensions();
    if w < 3 || h < 3 || skel.is_empty() {
        return Vec::new();
    }
    let (wu, hu) = (w as usize, h as usize);
    let smooth = gaussian_blur(skel, cfg.smoothing_sigma);
    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            smooth[y as usize * wu + x as usize]
        }
    };

    // Sobel gradient products.
    let mut ixx = vec![0.0f64; wu * hu];
    let mut iyy = vec![0.0f64; wu * hu];
    let mut ixy = vec![0.0f64; wu * hu];
    for y in 1..h as i64 - 1 {
        for x in 1..w as i64 - 1 {
            let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1);
            let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1);
            let i = y as usize * wu + x as usize;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }

    // 3x3 box window over the tensor, then the corner response.
    let mut resp = vec![0.0f64; wu * hu];
    let mut max_resp = 0.0f64;
    for y in 1..hu - 1 {
        for x in 1..wu - 1 {
            let mut sxx = 0.0;
            let mut syy = 0.0;
            let mut sxy = 0.0;
            for dy in 0..3 {
                for dx in 0..3 {
                    let i = (y + dy - 1) * wu + (x + dx - 1);
                    sxx += ixx[i];
                    syy += iyy[i];
                    sxy += ixy[i];
                }
            }
            let det = sxx * syy - sxy * sxy;
            let tr = sxx + syy;
            let r = det - cfg.harris_k * tr * tr;
            resp[y * wu + x] = r;
            if r > max_resp {
                max_resp = r;
            }
        }
    }
    if max_resp <= 0.0 {
        return Vec::new();
    }

    let floor = cfg.response_rel_threshold * max_resp;
    let nr = cfg.nms_radius.ceil() as i64;
    let nr2 = cfg.nms_radius * cfg.nms_radius + 1e-9;
    let mut out = Vec::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let r = resp[y as usize * wu + x as usize];
            if r < floor || r <= 0.0 {
                continue;
            }
            // Strict local maximum within the NMS disc; ties go to the
            // earlier pixel in (y, x) order.
            let mut is_max = true;
            'nms: for dy in -nr..=nr {
                for dx in -nr..=nr {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    if ((dx * dx + dy * dy) as f64) > nr2 {
                        continue;
                    }
                    let (ox, oy) = (x + dx, y + dy);
                    if ox < 0 || oy < 0 || ox >= w as i64 || oy >= h as i64 {
                        continue;
                    }
                    let other = resp[oy as usize * wu + ox as usize];
                    if other > r || (other == r && (oy, ox) < (y, x)) {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if is_max && cloud_anisotropy(skel, x, y) >= ANISOTROPY_GATE {
                let refined = refine_corner(skel, x as f64, y as f64);
                out.push(Anchor {
                    x: refined.0,
                    y: refined.1,
                    score: r / max_resp,
                    kind: AnchorKind::Corner,
                    source: AnchorSource::GradientOperator,
                });
            }
        }
    }
    out
}

/// Rasterization staircases on steep strokes produce periodic gradient
/// responses that survive smoothing. A real corner also bends the local
/// skeleton point cloud; a staircase does not. Gate candidates on the
/// eigenvalue ratio of the local cloud covariance.
const ANISOTROPY_GATE: f64 = 0.02;
const CLOUD_RADIUS: i64 = 7;

fn cloud_anisotropy(skel: &EdgeMap, cx: i64, cy: i64) -> f64 {
    let r2 = (CLOUD_RADIUS * CLOUD_RADIUS) as f64;
    let mut pts = Vec::new();
    for dy in -CLOUD_RADIUS..=CLOUD_RADIUS {
        for dx in -CLOUD_RADIUS..=CLOUD_RADIUS {
            if ((dx * dx + dy * dy) as f64) <= r2 && skel.contains(cx + dx, cy + dy) {
                pts.push(((cx + dx) as u32, (cy + dy) as u32));
            }
        }
    }
    if pts.len() < 6 {
        return 0.0;
    }
    match crate::fit::principal_axes(&pts) {
        Some(axes) => {
            let (l1, l2) = axes.lambda;
            if l1 <= 1e-9 {
                0.0
            } else {
                (l2 / l1).max(0.0)
            }
        }
        None => 0.0,
    }
}

/// Separable Gaussian blur of the binary mask as f64, truncated at 2 sigma.
fn gaussian_blur(mask: &EdgeMap, sigma: f64) -> Vec<f64> {
    let (w, h) = mask.dimensions();
    let (wu, hu) = (w as usize, h as usize);
    let mut img: Vec<f64> = mask.mask().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    if sigma <= 0.0 {
        return img;
    }
    let radius = (2.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for d in -radius..=radius {
        kernel.push((-(d * d) as f64 / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }
    let mut tmp = vec![0.0f64; wu * hu];
    for y in 0..hu {
        for x in 0..wu {
            let mut acc = 0.0;
            for (ki, d) in (-radius..=radius).enumerate() {
                let sx = x as i64 + d;
                if sx >= 0 && sx < w as i64 {
                    acc += kernel[ki] * img[y * wu + sx as usize];
                }
            }
            tmp[y * wu + x] = acc;
        }
    }
    for y in 0..hu {
        for x in 0..wu {
            let mut acc = 0.0;
            for (ki, d) in (-radius..=radius).enumerate() {
                let sy = y as i64 + d;
                if sy >= 0 && sy < h as i64 {
                    acc += kernel[ki] * tmp[sy as usize * wu + x];
                }
            }
            img[y * wu + x] = acc;
        }
    }
    img
}

/// Thinning chamfers sharp corners and smoothing drags the response peak
/// into the wedge. Recover the true vertex by clustering the surrounding
/// skeleton annulus into arms by angle, fitting a line per arm, and
/// intersecting the two fits.
fn refine_corner(skel: &EdgeMap, px: f64, py: f64) -> (f64, f64) {
    const RING_INNER: f64 = 6.0;
    const OUTER: f64 = 10.0;
    const MAX_SHIFT: f64 = 8.0;
    const BEARING_GAP_DEG: f64 = 20.0;
    const GROW_BAND: f64 = 1.3;
    let r = OUTER.ceil() as i64;
    let (cx, cy) = (px.round() as i64, py.round() as i64);
    let mut disc: Vec<(u32, u32)> = Vec::new();
    let mut ring: Vec<(f64, u32, u32)> = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let d = ((dx * dx + dy * dy) as f64).sqrt();
            if d <= OUTER && skel.contains(cx + dx, cy + dy) {
                let p = ((cx + dx) as u32, (cy + dy) as u32);
                disc.push(p);
                if d >= RING_INNER {
                    let bearing =
                        (dy as f64).atan2(dx as f64).to_degrees().rem_euclid(360.0);
                    ring.push((bearing, p.0, p.1));
                }
            }
        }
    }
    if ring.len() < 4 {
        return (px, py);
    }
    // Far from the peak, arms separate cleanly by bearing. Staircase
    // fragments of one arm share a bearing band.
    ring.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut clusters: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
    for (i, &(ang, x, y)) in ring.iter().enumerate() {
        if i > 0 && ang - ring[i - 1].0 > BEARING_GAP_DEG {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push((x, y));
    }
    // Circular wrap: merge last into first when no gap at 360/0.
    if clusters.len() > 1 {
        let wrap_gap = ring[0].0 + 360.0 - ring.last().unwrap().0;
        if wrap_gap <= BEARING_GAP_DEG {
            let last = clusters.pop().unwrap();
            clusters[0].extend(last);
        }
    }
    clusters.retain(|c| c.len() >= 2);
    if clusters.len() < 2 {
        return (px, py);
    }
    clusters.sort_by_key(|c| std::cmp::Reverse(c.len()));

    // Seed a line per arm, then grow each over the whole disc; pixels close
    // to both lines (the corner itself) stay unassigned.
    let seed_a = crate::fit::fit_line(&clusters[0]);
    let seed_b = crate::fit::fit_line(&clusters[1]);
    let (seed_a, seed_b) = match (seed_a, seed_b) {
        (Some(a), Some(b)) => (a, b),
        _ => return (px, py),
    };
    let dist_to = |fit: &crate::fit::LineFit, x: u32, y: u32| {
        crate::fit::point_line_distance(
            crate::program::Point2D::new(x as f64, y as f64),
            fit.p1,
            fit.p2,
        )
    };
    let mut arm_a = Vec::new();
    let mut arm_b = Vec::new();
    for &(x, y) in &disc {
        let da = dist_to(&seed_a, x, y);
        let db = dist_to(&seed_b, x, y);
        match (da <= GROW_BAND, db <= GROW_BAND) {
            (true, false) => arm_a.push((x, y)),
            (false, true) => arm_b.push((x, y)),
            _ => {}
        }
    }
    if arm_a.len() < 4 || arm_b.len() < 4 {
        return (px, py);
    }
    let fit_a = crate::fit::fit_line(&arm_a);
    let fit_b = crate::fit::fit_line(&arm_b);
    if let (Some(a), Some(b)) = (fit_a, fit_b) {
        if a.max_deviation <= 1.6 && b.max_deviation <= 1.6 {
            if let Some(ix) = crate::fit::line_intersection(a.p1, a.p2, b.p1, b.p2) {
                // Thinning erodes sharp tips, so the skeleton may sit a few
                // pixels from the true vertex; 4 px still rejects wild
                // intersections.
                if (ix.x - px).hypot(ix.y - py) <= MAX_SHIFT && skel.any_within(ix.x, ix.y, 4.0)
                {
                    return (ix.x, ix.y);
                }
            }
        }
    }
    (px, py)
}

/// Junction and endpoint detection: thin the mask to a unit-width skeleton
/// and classify each skeleton pixel by its crossing number (>= 3 junction,
/// 1 endpoint). At most one junction anchor survives per separation
/// neighborhood.
pub fn detect_junctions(edges: &EdgeMap, cfg: &AnchorConfig) -> Vec<Anchor> {
    junctions_of_skeleton(&thin(edges), cfg)
}

fn junctions_of_skeleton(skel: &EdgeMap, cfg: &AnchorConfig) -> Vec<Anchor> {
    let (w, h) = skel.dimensions();
    let mut junctions = Vec::new();
    let mut endpoints = Vec::new();
    for y in 0..h {
        for x in 0..w {
            match crossing_number(&skel, x, y) {
                n if n >= 3 => junctions.push((x as f64, y as f64)),
                1 => endpoints.push((x as f64, y as f64)),
                _ => {}
            }
        }
    }
    let mut out = Vec::new();
    for (pts, kind, score) in [
        (junctions, AnchorKind::Junction, 1.0),
        (endpoints, AnchorKind::Endpoint, 0.5),
    ] {
        for c in cluster_points(&pts, cfg.junction_separation) {
            out.push(Anchor {
                x: c.0,
                y: c.1,
                score,
                kind,
                source: AnchorSource::GradientOperator,
            });
        }
    }
    sort_anchors(&mut out);
    out
}

/// Union of the corner, junction and endpoint detectors, deduplicated within
/// the merge radius. High recall by construction. The skeleton is computed
/// once and shared by both detectors.
pub fn extract_raw_anchors(img: &Raster, cfg: &AnchorConfig) -> Vec<Anchor> {
    let edges = extract_edge_map(img, cfg.edge_threshold);
    let skel = thin(&edges);
    let mut all = corners_of_skeleton(&skel, cfg);
    all.extend(junctions_of_skeleton(&skel, cfg));
    let mut merged = merge_anchors(&all, cfg.merge_radius);
    sort_anchors(&mut merged);
    merged
}

/// Stable ordering by (y, x).
pub fn sort_anchors(anchors: &mut [Anchor]) {
    anchors.sort_by(|a, b| {
        (a.y, a.x)
            .partial_cmp(&(b.y, b.x))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Greedy centroid clustering of bare points within `radius`.
fn cluster_points(pts: &[(f64, f64)], radius: f64) -> Vec<(f64, f64)> {
    let mut taken = vec![false; pts.len()];
    let mut out = Vec::new();
    for i in 0..pts.len() {
        if taken[i] {
            continue;
        }
        let mut members = vec![pts[i]];
        taken[i] = true;
        for j in i + 1..pts.len() {
            if taken[j] {
                continue;
            }
            if (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1) <= radius {
                taken[j] = true;
                members.push(pts[j]);
            }
        }
        let n = members.len() as f64;
        out.push((
            members.iter().map(|p| p.0).sum::<f64>() / n,
            members.iter().map(|p| p.1).sum::<f64>() / n,
        ));
    }
    out
}

fn kind_rank(k: AnchorKind) -> u8 {
    match k {
        AnchorKind::Junction => 3,
        AnchorKind::Corner => 2,
        AnchorKind::Endpoint => 1,
        AnchorKind::Unknown => 0,
    }
}

/// Merge anchors lying within `radius` of each other; the merged anchor sits
/// at the cluster centroid, keeps the highest-priority kind and the maximum
/// score.
pub fn merge_anchors(anchors: &[Anchor], radius: f64) -> Vec<Anchor> {
    let mut order: Vec<usize> = (0..anchors.len()).collect();
    order.sort_by(|&i, &j| {
        (anchors[i].y, anchors[i].x)
            .partial_cmp(&(anchors[j].y, anchors[j].x))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut taken = vec![false; anchors.len()];
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let mut members = vec![i];
        for &j in &order[pos + 1..] {
            if taken[j] {
                continue;
            }
            if anchors[i].dist(&anchors[j]) <= radius {
                taken[j] = true;
                members.push(j);
            }
        }
        let n = members.len() as f64;
        let x = members.iter().map(|&m| anchors[m].x).sum::<f64>() / n;
        let y = members.iter().map(|&m| anchors[m].y).sum::<f64>() / n;
        let score = members
            .iter()
            .map(|&m| anchors[m].score)
            .fold(0.0f64, f64::max);
        let kind = members
            .iter()
            .map(|&m| anchors[m].kind)
            .max_by_key(|&k| kind_rank(k))
            .unwrap_or(AnchorKind::Unknown);
        let source = if members
            .iter()
            .all(|&m| anchors[m].source == AnchorSource::AgentProposal)
        {
            AnchorSource::AgentProposal
        } else {
            AnchorSource::GradientOperator
        };
        out.push(Anchor {
            x,
            y,
            score,
            kind,
            source,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::render::render;

    fn edges_of(src: &str) -> EdgeMap {
        let p = parse_program(src).unwrap();
        let r = render(&p).unwrap();
        extract_edge_map(&r, DEFAULT_EDGE_THRESHOLD)
    }

    #[test]
    fn blank_image_has_no_corners_or_junctions() {
        let e = EdgeMap::empty(64, 64, 200);
        let cfg = AnchorConfig::default();
        assert!(detect_corners(&e, &cfg).is_empty());
        assert!(detect_junctions(&e, &cfg).is_empty());
        assert!(extract_raw_anchors(&Raster::white(64, 64), &cfg).is_empty());
    }

    #[test]
    fn l_shape_vertex_yields_one_nearby_corner() {
        let e = edges_of(
            "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment a (200,300) (420,300)\nsegment b (200,300) (200,90)\n",
        );
        let corners = detect_corners(&e, &AnchorConfig::default());
        let near: Vec<_> = corners
            .iter()
            .filter(|c| (c.x - 200.0).hypot(c.y - 300.0) <= 2.0)
            .collect();
        assert_eq!(near.len(), 1, "corners: {corners:?}");
        assert!(near[0].score > 0.0 && near[0].score <= 1.0);
    }

    #[test]
    fn straight_segment_interior_has_no_corner() {
        let e = edges_of(
            "canvas 300 300\nstyle width 2 color 0 0 0 dash solid\nsegment a (50,150) (150,150)\n",
        );
        let corners = detect_corners(&e, &AnchorConfig::default());
        for c in &corners {
            let interior = c.x > 60.0 && c.x < 140.0;
            assert!(!interior, "unexpected interior corner at ({}, {})", c.x, c.y);
        }
    }

    #[test]
    fn crossing_yields_one_junction() {
        let e = edges_of(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment a (300,500) (700,500)\nsegment b (500,300) (500,700)\n",
        );
        let anchors = detect_junctions(&e, &AnchorConfig::default());
        let junctions: Vec<_> = anchors
            .iter()
            .filter(|a| a.kind == AnchorKind::Junction)
            .collect();
        assert_eq!(junctions.len(), 1, "junctions: {junctions:?}");
        assert!((junctions[0].x - 500.0).hypot(junctions[0].y - 500.0) <= 2.0);
    }

    #[test]
    fn single_segment_yields_two_endpoints() {
        let e = edges_of(
            "canvas 400 400\nstyle width 2 color 0 0 0 dash solid\nsegment a (100,200) (300,200)\n",
        );
        let anchors = detect_junctions(&e, &AnchorConfig::default());
        let ends: Vec<_> = anchors
            .iter()
            .filter(|a| a.kind == AnchorKind::Endpoint)
            .collect();
        assert_eq!(ends.len(), 2, "endpoints: {ends:?}");
        for (ex, ey) in [(100.0, 200.0), (300.0, 200.0)] {
            assert!(
                ends.iter().any(|a| (a.x - ex).hypot(a.y - ey) <= 2.0),
                "no endpoint near ({ex},{ey}): {ends:?}"
            );
        }
    }

    fn triangle_raster(noise: bool) -> (Raster, [(f64, f64); 3]) {
        let verts = [(200.0, 650.0), (700.0, 650.0), (420.0, 200.0)];
        let src = format!(
            "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment a ({},{}) ({},{})\nsegment b ({},{}) ({},{})\nsegment c ({},{}) ({},{})\n",
            verts[0].0, verts[0].1, verts[1].0, verts[1].1,
            verts[1].0, verts[1].1, verts[2].0, verts[2].1,
            verts[2].0, verts[2].1, verts[0].0, verts[0].1,
        );
        let p = parse_program(&src).unwrap();
        let mut r = render(&p).unwrap();
        if noise {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
            for _ in 0..50 {
                let x = rng.gen_range(0..1000u32);
                let y = rng.gen_range(0..1000u32);
                r.put(x, y, [20, 20, 20]);
            }
        }
        (r, verts)
    }

    #[test]
    fn triangle_vertices_are_recalled() {
        let (r, verts) = triangle_raster(false);
        let anchors = extract_raw_anchors(&r, &AnchorConfig::default());
        assert!(anchors.len() >= 3);
        for (vx, vy) in verts {
            assert!(
                anchors.iter().any(|a| (a.x - vx).hypot(a.y - vy) <= 3.0),
                "no anchor within 3px of ({vx},{vy})"
            );
        }
    }

    #[test]
    fn salt_noise_does_not_break_vertex_recall() {
        let (r, verts) = triangle_raster(true);
        let anchors = extract_raw_anchors(&r, &AnchorConfig::default());
        for (vx, vy) in verts {
            assert!(
                anchors.iter().any(|a| (a.x - vx).hypot(a.y - vy) <= 3.0),
                "no anchor within 3px of ({vx},{vy}) under noise"
            );
        }
    }

    #[test]
    fn extraction_is_deterministic_and_ordered() {
        let (r, _) = triangle_raster(true);
        let cfg = AnchorConfig::default();
        let a = extract_raw_anchors(&r, &cfg);
        let b = extract_raw_anchors(&r, &cfg);
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!((w[0].y, w[0].x) <= (w[1].y, w[1].x));
        }
    }

    #[test]
    fn nms_enforces_separation_between_same_kind_anchors() {
        let (r, _) = triangle_raster(false);
        let cfg = AnchorConfig::default();
        let anchors = extract_raw_anchors(&r, &cfg);
        for i in 0..anchors.len() {
            for j in i + 1..anchors.len() {
                if anchors[i].kind == anchors[j].kind {
                    assert!(
                        anchors[i].dist(&anchors[j]) > cfg.merge_radius,
                        "anchors too close: {:?} {:?}",
                        anchors[i],
                        anchors[j]
                    );
                }
            }
        }
    }
}

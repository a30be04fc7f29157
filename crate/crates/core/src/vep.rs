//! Visual error projection: turn the raw numeric discrepancy between a
//! rendered and an observed figure into a classified difference map the
//! refiner can act on.
//!
//! Edge pixels of one side that have no counterpart within the match radius
//! of the other become miss/hallucination pixels; their connected components
//! become regions. A miss region paired with a similarly sized hallucination
//! region nearby is fused into a single Drift region; regions hugging a
//! matched stroke whose local widths disagree are style mismatches.

use crate::dt::squared_edt;
use crate::edge::{extract_edge_map, EdgeMap};
use crate::metrics::{MetricBundle, MetricError};
use crate::morph::{connected_components, dilate_square, Component};
use crate::program::{Point2D, Program};
use crate::raster::Raster;
use crate::render::primitive_coverage;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionClass {
    /// Structure present in the observation but absent from the rendering.
    Missing,
    /// Structure rendered where the observation is blank.
    Hallucination,
    /// A fused miss/hallucination pair: same structure, displaced.
    Drift,
    /// Matched structure drawn with the wrong stroke attributes.
    StyleMismatch,
}

/// One classified discrepancy region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffRegion {
    pub classification: RegionClass,
    /// Inclusive pixel bbox [x0, y0, x1, y1].
    pub bbox: [u32; 4],
    pub centroid: Point2D,
    pub pixel_count: usize,
    /// Mean distance of the region's pixels to the other side's edges.
    pub local_cd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_primitive_id: Option<String>,
    /// (rendered, observed) local stroke widths, when measured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stroke_widths: Option<(f64, f64)>,
    /// Region pixels; for Drift both halves. Not serialized.
    #[serde(skip, default)]
    pub pixels: Vec<(u32, u32)>,
    /// The miss-side pixels (subset of `pixels`). Not serialized.
    #[serde(skip, default)]
    pub miss_pixels: Vec<(u32, u32)>,
}

/// The projected error map for one loop iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub iteration: u32,
    pub metrics: MetricBundle,
    /// Regions sorted by pixel count, largest first.
    pub regions: Vec<DiffRegion>,
    #[serde(skip, default = "empty_raster")]
    pub diff_image: Raster,
}

fn empty_raster() -> Raster {
    Raster::white(1, 1)
}

impl DiffReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VepConfig {
    /// Chebyshev match radius absorbing rasterization jitter.
    pub match_radius: u32,
    /// Max centroid separation for drift fusion.
    pub drift_radius: f64,
    /// Max relative size difference for drift fusion.
    pub drift_size_ratio: f64,
    /// Width difference that flags a style mismatch.
    pub style_width_delta: f64,
    /// A region "hugs" matched ink when this fraction of its pixels lie
    /// within `style_hug_radius` of matched pixels.
    pub style_hug_fraction: f64,
    pub style_hug_radius: f64,
    pub edge_threshold: u8,
    /// Max centroid-to-stroke distance for primitive attribution.
    pub attribution_radius: f64,
}

impl Default for VepConfig {
    fn default() -> Self {
        Self {
            match_radius: 2,
            drift_radius: 15.0,
            drift_size_ratio: 0.5,
            style_width_delta: 1.5,
            style_hug_fraction: 0.8,
            style_hug_radius: 3.0,
            edge_threshold: crate::edge::DEFAULT_EDGE_THRESHOLD,
            attribution_radius: 25.0,
        }
    }
}

const COLOR_MATCHED: [u8; 3] = [170, 170, 170];
const COLOR_MISSING: [u8; 3] = [220, 40, 40];
const COLOR_HALLUCINATION: [u8; 3] = [40, 70, 220];
const COLOR_DRIFT: [u8; 3] = [200, 40, 200];
const COLOR_STYLE: [u8; 3] = [230, 150, 30];

/// Project the discrepancy between a rendering and an observation into a
/// classified region report plus a color-coded difference image.
pub fn project_errors(
    rec: &Raster,
    obs: &Raster,
    metrics: MetricBundle,
    iteration: u32,
    cfg: &VepConfig,
) -> Result<DiffReport, MetricError> {
    if rec.dimensions() != obs.dimensions() {
        return Err(MetricError::DimensionMismatch {
            a: rec.dimensions(),
            b: obs.dimensions(),
        });
    }
    let (w, h) = rec.dimensions();
    let e_rec = extract_edge_map(rec, cfg.edge_threshold);
    let e_obs = extract_edge_map(obs, cfg.edge_threshold);
    let rec_dilated = dilate_square(&e_rec, cfg.match_radius);
    let obs_dilated = dilate_square(&e_obs, cfg.match_radius);

    let mut miss = EdgeMap::empty(w, h, cfg.edge_threshold);
    let mut hallu = EdgeMap::empty(w, h, cfg.edge_threshold);
    for y in 0..h {
        for x in 0..w {
            if e_obs.get(x, y) && !rec_dilated.get(x, y) {
                miss.set(x, y, true);
            }
            if e_rec.get(x, y) && !obs_dilated.get(x, y) {
                hallu.set(x, y, true);
            }
        }
    }

    // Distance fields for local stats: to fill local_cd we need distances
    // from miss pixels to rec edges and from hallucination pixels to obs
    // edges.
    let dt_rec = if e_rec.is_empty() { None } else { Some(squared_edt(&e_rec)) };
    let dt_obs = if e_obs.is_empty() { None } else { Some(squared_edt(&e_obs)) };
    let diag = (w as f64).hypot(h as f64);
    let local_mean = |pixels: &[(u32, u32)], dt: &Option<Vec<f64>>| -> f64 {
        match dt {
            Some(field) => {
                let s: f64 = pixels
                    .iter()
                    .map(|&(x, y)| field[y as usize * w as usize + x as usize].sqrt())
                    .sum();
                s / pixels.len().max(1) as f64
            }
            None => diag,
        }
    };

    let miss_comps = connected_components(&miss);
    let hallu_comps = connected_components(&hallu);

    // Greedy one-to-one drift fusion, largest miss regions first.
    let mut miss_order: Vec<usize> = (0..miss_comps.len()).collect();
    miss_order.sort_by_key(|&i| std::cmp::Reverse(miss_comps[i].len()));
    let mut hallu_used = vec![false; hallu_comps.len()];
    let mut fused: Vec<(usize, usize)> = Vec::new();
    for &mi in &miss_order {
        let mc = &miss_comps[mi];
        let (mcx, mcy) = mc.centroid();
        let mut best: Option<(f64, usize)> = None;
        for (hi, hc) in hallu_comps.iter().enumerate() {
            if hallu_used[hi] {
                continue;
            }
            let (hcx, hcy) = hc.centroid();
            let d = (mcx - hcx).hypot(mcy - hcy);
            if d > cfg.drift_radius {
                continue;
            }
            let (a, b) = (mc.len() as f64, hc.len() as f64);
            if (a - b).abs() / a.max(b) > cfg.drift_size_ratio {
                continue;
            }
            if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                best = Some((d, hi));
            }
        }
        if let Some((_, hi)) = best {
            hallu_used[hi] = true;
            fused.push((mi, hi));
        }
    }
    let fused_miss: std::collections::HashSet<usize> =
        fused.iter().map(|&(mi, _)| mi).collect();

    let mut regions: Vec<DiffRegion> = Vec::new();
    for &(mi, hi) in &fused {
        let mc = &miss_comps[mi];
        let hc = &hallu_comps[hi];
        let mut pixels = mc.pixels.clone();
        pixels.extend(&hc.pixels);
        let all = Component { pixels };
        let (cx, cy) = all.centroid();
        let (x0, y0, x1, y1) = all.bbox();
        let local_cd = (local_mean(&mc.pixels, &dt_rec) * mc.len() as f64
            + local_mean(&hc.pixels, &dt_obs) * hc.len() as f64)
            / all.len() as f64;
        regions.push(DiffRegion {
            classification: RegionClass::Drift,
            bbox: [x0, y0, x1, y1],
            centroid: Point2D::new(cx, cy),
            pixel_count: all.len(),
            local_cd,
            nearest_primitive_id: None,
            stroke_widths: None,
            pixels: all.pixels,
            miss_pixels: mc.pixels.clone(),
        });
    }

    // Ink depth fields for width estimates at style checks.
    let ink_depth = |edges: &EdgeMap| -> Vec<f64> {
        let mut bg = EdgeMap::empty(w, h, cfg.edge_threshold);
        for y in 0..h {
            for x in 0..w {
                if !edges.get(x, y) {
                    bg.set(x, y, true);
                }
            }
        }
        squared_edt(&bg)
    };
    let depth_rec = ink_depth(&e_rec);
    let depth_obs = ink_depth(&e_obs);

    let classify_leftover = |comp: &Component,
                                 base: RegionClass,
                                 dt_other: &Option<Vec<f64>>,
                                 regions: &mut Vec<DiffRegion>| {
        let (cx, cy) = comp.centroid();
        let (x0, y0, x1, y1) = comp.bbox();
        let style = style_mismatch(
            comp, &e_rec, &e_obs, &rec_dilated, &obs_dilated, &depth_rec, &depth_obs, cfg, w,
        );
        let classification = if style.is_some() {
            RegionClass::StyleMismatch
        } else {
            base
        };
        regions.push(DiffRegion {
            classification,
            bbox: [x0, y0, x1, y1],
            centroid: Point2D::new(cx, cy),
            pixel_count: comp.len(),
            local_cd: local_mean(&comp.pixels, dt_other),
            nearest_primitive_id: None,
            stroke_widths: style,
            pixels: comp.pixels.clone(),
            miss_pixels: if base == RegionClass::Missing {
                comp.pixels.clone()
            } else {
                Vec::new()
            },
        });
    };

    for (mi, comp) in miss_comps.iter().enumerate() {
        if !fused_miss.contains(&mi) {
            classify_leftover(comp, RegionClass::Missing, &dt_rec, &mut regions);
        }
    }
    for (hi, comp) in hallu_comps.iter().enumerate() {
        if !hallu_used[hi] {
            classify_leftover(comp, RegionClass::Hallucination, &dt_obs, &mut regions);
        }
    }

    regions.sort_by(|a, b| {
        b.pixel_count.cmp(&a.pixel_count).then_with(|| {
            (a.bbox[1], a.bbox[0])
                .cmp(&(b.bbox[1], b.bbox[0]))
        })
    });

    // Color-coded overlay: matched ink gray, discrepancies by class.
    let mut diff_image = Raster::white(w, h);
    for y in 0..h {
        for x in 0..w {
            if (e_obs.get(x, y) && rec_dilated.get(x, y))
                || (e_rec.get(x, y) && obs_dilated.get(x, y))
            {
                diff_image.put(x, y, COLOR_MATCHED);
            }
        }
    }
    for region in &regions {
        let color = match region.classification {
            RegionClass::Missing => COLOR_MISSING,
            RegionClass::Hallucination => COLOR_HALLUCINATION,
            RegionClass::Drift => COLOR_DRIFT,
            RegionClass::StyleMismatch => COLOR_STYLE,
        };
        for &(x, y) in &region.pixels {
            diff_image.put(x, y, color);
        }
    }

    Ok(DiffReport {
        iteration,
        metrics,
        regions,
        diff_image,
    })
}

/// Style test: the region hugs matched ink and the local stroke widths of
/// the two sides disagree by more than the configured delta. Returns the
/// measured (rendered, observed) widths when it fires.
#[allow(clippy::too_many_arguments)]
fn style_mismatch(
    comp: &Component,
    e_rec: &EdgeMap,
    e_obs: &EdgeMap,
    rec_dilated: &EdgeMap,
    obs_dilated: &EdgeMap,
    depth_rec: &[f64],
    depth_obs: &[f64],
    cfg: &VepConfig,
    w: u32,
) -> Option<(f64, f64)> {
    let hug_r = cfg.style_hug_radius.ceil() as i64;
    let hug_r2 = cfg.style_hug_radius * cfg.style_hug_radius + 1e-9;
    let matched = |x: i64, y: i64| -> bool {
        (e_obs.contains(x, y) && rec_dilated.contains(x, y))
            || (e_rec.contains(x, y) && obs_dilated.contains(x, y))
    };
    let mut hugging = 0usize;
    for &(x, y) in &comp.pixels {
        'scan: for dy in -hug_r..=hug_r {
            for dx in -hug_r..=hug_r {
                if ((dx * dx + dy * dy) as f64) <= hug_r2
                    && matched(x as i64 + dx, y as i64 + dy)
                {
                    hugging += 1;
                    break 'scan;
                }
            }
        }
    }
    if (hugging as f64) < cfg.style_hug_fraction * comp.len() as f64 {
        return None;
    }
    // Compare stroke widths measured at matched pixels adjacent to the
    // region: depth inside each side's ink.
    let mut rec_widths = Vec::new();
    let mut obs_widths = Vec::new();
    for &(x, y) in &comp.pixels {
        for dy in -hug_r..=hug_r {
            for dx in -hug_r..=hug_r {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if ((dx * dx + dy * dy) as f64) > hug_r2 || !matched(nx, ny) {
                    continue;
                }
                let i = ny as usize * w as usize + nx as usize;
                if e_rec.contains(nx, ny) {
                    rec_widths.push(2.0 * depth_rec[i].sqrt() - 1.0);
                }
                if e_obs.contains(nx, ny) {
                    obs_widths.push(2.0 * depth_obs[i].sqrt() - 1.0);
                }
            }
        }
    }
    if rec_widths.is_empty() || obs_widths.is_empty() {
        return None;
    }
    let max_of = |v: &[f64]| v.iter().cloned().fold(0.0f64, f64::max);
    let rec_w = max_of(&rec_widths);
    let obs_w = max_of(&obs_widths);
    if (rec_w - obs_w).abs() > cfg.style_width_delta {
        Some((rec_w, obs_w))
    } else {
        None
    }
}

/// Attach each region to the program primitive whose rendered stroke it
/// hugs: at least half the region's pixels must lie within the attribution
/// radius of the stroke, ties resolved by mean distance. Fraction-based
/// attribution keeps a missing stroke that merely touches a neighbor at a
/// shared vertex unattributed, while a drifted or hallucinated copy of a
/// primitive attributes cleanly.
pub fn attribute_regions(mut report: DiffReport, p: &Program, cfg: &VepConfig) -> DiffReport {
    if report.regions.is_empty() {
        return report;
    }
    const ATTRIBUTION_FRACTION: f64 = 0.5;
    const SAMPLE_CAP: usize = 256;
    let (w, h) = report.diff_image.dimensions();
    let indices: Vec<(String, StrokeIndex)> = p
        .primitives
        .iter()
        .map(|prim| {
            (
                prim.id.clone(),
                StrokeIndex::new(primitive_coverage(prim, w, h), cfg.attribution_radius),
            )
        })
        .collect();
    for region in &mut report.regions {
        let stride = (region.pixels.len() / SAMPLE_CAP).max(1);
        let sample: Vec<(u32, u32)> = region.pixels.iter().copied().step_by(stride).collect();
        let mut best: Option<(f64, &str)> = None;
        for (id, index) in &indices {
            let mut near = 0usize;
            let mut dist_sum = 0.0f64;
            for &(x, y) in &sample {
                if let Some(d) = index.nearest_within(x as f64, y as f64) {
                    near += 1;
                    dist_sum += d;
                }
            }
            if near == 0 || (near as f64) < ATTRIBUTION_FRACTION * sample.len() as f64 {
                continue;
            }
            let mean = dist_sum / near as f64;
            if best.map(|(bd, _)| mean < bd).unwrap_or(true) {
                best = Some((mean, id));
            }
        }
        region.nearest_primitive_id = best.map(|(_, id)| id.to_string());
    }
    report
}

/// Bucket grid over a stroke's pixels for radius-bounded nearest queries.
struct StrokeIndex {
    cells: std::collections::HashMap<(i64, i64), Vec<(u32, u32)>>,
    cell: f64,
    radius: f64,
}

impl StrokeIndex {
    fn new(pixels: Vec<(u32, u32)>, radius: f64) -> Self {
        let cell = radius.max(1.0);
        let mut cells: std::collections::HashMap<(i64, i64), Vec<(u32, u32)>> =
            std::collections::HashMap::new();
        for &(x, y) in &pixels {
            cells
                .entry(((x as f64 / cell) as i64, (y as f64 / cell) as i64))
                .or_default()
                .push((x, y));
        }
        Self {
            cells,
            cell,
            radius,
        }
    }

    fn nearest_within(&self, x: f64, y: f64) -> Option<f64> {
        let cx = (x / self.cell) as i64;
        let cy = (y / self.cell) as i64;
        let mut best = f64::INFINITY;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(pts) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &(px, py) in pts {
                        let d = (px as f64 - x).hypot(py as f64 - y);
                        if d < best {
                            best = d;
                        }
                    }
                }
            }
        }
        (best <= self.radius).then_some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::measure;
    use crate::program::parse_program;
    use crate::render::render;

    fn project(rec: &Raster, obs: &Raster) -> DiffReport {
        let cfg = VepConfig::default();
        let m = measure(rec, obs, cfg.edge_threshold).unwrap();
        project_errors(rec, obs, m, 0, &cfg).unwrap()
    }

    #[test]
    fn identical_images_produce_no_regions() {
        let p = parse_program(
            "canvas 400 400\nstyle width 2 color 0 0 0 dash solid\nsegment s (50,50) (350,200)\n",
        )
        .unwrap();
        let r = render(&p).unwrap();
        let report = project(&r, &r);
        assert!(report.regions.is_empty());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Raster::white(10, 10);
        let b = Raster::white(11, 10);
        let m = MetricBundle {
            cd: 0.0,
            hd: 0.0,
            ssim: 1.0,
            edge_counts: (0, 0),
        };
        assert!(matches!(
            project_errors(&a, &b, m, 0, &VepConfig::default()),
            Err(MetricError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn omitted_segment_is_one_missing_region() {
        let obs = render(
            &parse_program(
                "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment ab (100,100) (500,100)\nsegment ef (100,400) (500,400)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let rec = render(
            &parse_program(
                "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment ab (100,100) (500,100)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let report = project(&rec, &obs);
        assert_eq!(report.regions.len(), 1, "regions: {:?}", report.regions);
        let r = &report.regions[0];
        assert_eq!(r.classification, RegionClass::Missing);
        // The region covers the omitted stroke.
        assert!(r.bbox[0] <= 101 && r.bbox[2] >= 499);
        assert!((r.centroid.y - 400.0).abs() <= 2.0);
    }

    #[test]
    fn translated_segment_fuses_into_drift() {
        let obs = render(
            &parse_program(
                "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment s (100,300) (500,300)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let rec = render(
            &parse_program(
                "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment s (100,308) (500,308)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let report = project(&rec, &obs);
        assert_eq!(report.regions.len(), 1, "regions: {:?}", report.regions);
        assert_eq!(report.regions[0].classification, RegionClass::Drift);
        // Fused centroid sits between the two strokes.
        assert!((report.regions[0].centroid.y - 304.0).abs() <= 2.0);
    }

    #[test]
    fn zero_diff_iff_hd_within_match_tolerance() {
        // Chebyshev distance 2 on the integer grid: hd = sqrt(8) <= tau*sqrt(2).
        let mut a = Raster::white(50, 50);
        a.put(10, 10, [0, 0, 0]);
        let mut b = Raster::white(50, 50);
        b.put(12, 12, [0, 0, 0]);
        let report = project(&a, &b);
        assert!(report.regions.is_empty());
        assert!(report.metrics.hd <= 2.0f64 * std::f64::consts::SQRT_2 + 1e-12);

        // One pixel further: regions must appear.
        let mut c = Raster::white(50, 50);
        c.put(13, 12, [0, 0, 0]);
        let report = project(&a, &c);
        assert!(!report.regions.is_empty());
        assert!(report.metrics.hd > 2.0f64 * std::f64::consts::SQRT_2);
    }

    #[test]
    fn every_unmatched_pixel_lands_in_exactly_one_region() {
        let obs = render(
            &parse_program(
                "canvas 300 300\nstyle width 2 color 0 0 0 dash solid\nsegment a (40,40) (260,40)\ncircle c (150,170) 60\n",
            )
            .unwrap(),
        )
        .unwrap();
        let rec = render(
            &parse_program(
                "canvas 300 300\nstyle width 2 color 0 0 0 dash solid\nsegment a (40,60) (260,60)\nsegment b (40,260) (260,250)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let cfg = VepConfig::default();
        let m = measure(&rec, &obs, cfg.edge_threshold).unwrap();
        let report = project_errors(&rec, &obs, m, 0, &cfg).unwrap();

        let e_rec = extract_edge_map(&rec, cfg.edge_threshold);
        let e_obs = extract_edge_map(&obs, cfg.edge_threshold);
        let rec_d = dilate_square(&e_rec, cfg.match_radius);
        let obs_d = dilate_square(&e_obs, cfg.match_radius);
        let mut expected = std::collections::HashSet::new();
        for y in 0..300u32 {
            for x in 0..300u32 {
                if (e_obs.get(x, y) && !rec_d.get(x, y)) || (e_rec.get(x, y) && !obs_d.get(x, y)) {
                    expected.insert((x, y));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for r in &report.regions {
            for &px in &r.pixels {
                assert!(seen.insert(px), "pixel {px:?} in two regions");
            }
        }
        assert_eq!(seen, expected);
    }

    #[test]
    fn reports_are_deterministic() {
        let obs = render(
            &parse_program(
                "canvas 300 300\nstyle width 2 color 0 0 0 dash solid\nsegment a (40,40) (260,40)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let rec = Raster::white(300, 300);
        let a = project(&rec, &obs);
        let b = project(&rec, &obs);
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn attribution_names_nearest_primitive() {
        let program = parse_program(
            "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment s1 (100,100) (500,100)\nsegment s3 (100,300) (500,300)\n",
        )
        .unwrap();
        let obs = render(
            &parse_program(
                "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment s1 (100,100) (500,100)\nsegment s3 (100,308) (500,308)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let rec = render(&program).unwrap();
        let cfg = VepConfig::default();
        let report = project(&rec, &obs);
        let report = attribute_regions(report, &program, &cfg);
        assert_eq!(report.regions.len(), 1);
        assert_eq!(
            report.regions[0].nearest_primitive_id.as_deref(),
            Some("s3")
        );
    }

    #[test]
    fn far_region_gets_no_attribution() {
        let program = parse_program(
            "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment s1 (20,20) (80,20)\n",
        )
        .unwrap();
        let rec = render(&program).unwrap();
        let obs = render(
            &parse_program(
                "canvas 600 600\nstyle width 2 color 0 0 0 dash solid\nsegment s1 (20,20) (80,20)\nsegment far (400,500) (560,500)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let cfg = VepConfig::default();
        let report = attribute_regions(project(&rec, &obs), &program, &cfg);
        assert_eq!(report.regions.len(), 1);
        assert_eq!(report.regions[0].nearest_primitive_id, None);
    }

    #[test]
    fn empty_report_attribution_is_identity() {
        let program = Program::default();
        let blank = Raster::white(100, 100);
        let report = project(&blank, &blank);
        let before = report.clone();
        let after = attribute_regions(report, &program, &VepConfig::default());
        assert_eq!(before, after);
    }

    #[test]
    fn doubled_stroke_width_is_style_mismatch() {
        let obs = render(
            &parse_program(
                "canvas 600 600\nstyle width 6 color 0 0 0 dash solid\nsegment s (100,300) (500,300)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let rec = render(
            &parse_program(
                "canvas 600 600\nstyle width 12 color 0 0 0 dash solid\nsegment s (100,300) (500,300)\n",
            )
            .unwrap(),
        )
        .unwrap();
        let report = project(&rec, &obs);
        assert!(!report.regions.is_empty());
        assert_eq!(
            report.regions[0].classification,
            RegionClass::StyleMismatch,
            "regions: {:?}",
            report
                .regions
                .iter()
                .map(|r| (r.classification, r.pixel_count))
                .collect::<Vec<_>>()
        );
        let (rw, ow) = report.regions[0].stroke_widths.unwrap();
        assert!(rw > ow);
    }
}

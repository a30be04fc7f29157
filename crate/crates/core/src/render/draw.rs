//! Low-level hard-rasterization primitives: midpoint line/circle walks with
//! disc-stamped stroke width. No anti-aliasing anywhere; every drawing
//! routine emits pixels through a [`PixelSink`] so callers can either paint a
//! raster or just collect coverage.

use crate::program::Point2D;

pub trait PixelSink {
    fn stamp(&mut self, x: i32, y: i32);
}

/// Stamps a solid color into a raster, counting in-bounds pixels touched.
pub struct RasterSink<'a> {
    pub raster: &'a mut crate::raster::Raster,
    pub color: [u8; 3],
    pub touched: usize,
}

impl PixelSink for RasterSink<'_> {
    fn stamp(&mut self, x: i32, y: i32) {
        if x >= 0 && y >= 0 && (x as u32) < self.raster.width() && (y as u32) < self.raster.height()
        {
            self.raster.put(x as u32, y as u32, self.color);
            self.touched += 1;
        }
    }
}

/// Records the set of in-bounds pixels a primitive covers.
pub struct CoverageSink {
    width: u32,
    height: u32,
    seen: Vec<bool>,
    pub points: Vec<(u32, u32)>,
}

impl CoverageSink {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            seen: vec![false; width as usize * height as usize],
            points: Vec::new(),
        }
    }
}

impl PixelSink for CoverageSink {
    fn stamp(&mut self, x: i32, y: i32) {
        if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
            let i = y as usize * self.width as usize + x as usize;
            if !self.seen[i] {
                self.seen[i] = true;
                self.points.push((x as u32, y as u32));
            }
        }
    }
}

/// Disc footprint for a stroke width: offsets with 4*(dx^2+dy^2) <= w^2.
/// Width 1 is a single pixel.
pub fn disc_offsets(width: f64) -> Vec<(i32, i32)> {
    let r = (width / 2.0).max(0.0);
    let ri = r.ceil() as i32;
    let r2 = r * r + 1e-9;
    let mut out = Vec::new();
    for dy in -ri..=ri {
        for dx in -ri..=ri {
            if (dx * dx + dy * dy) as f64 <= r2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

const DASH_ON: f64 = 6.0;
const DASH_PERIOD: f64 = 10.0;

/// Dash gate: a path position is inked while its arc length phase lies in
/// the first `DASH_ON` of every `DASH_PERIOD`.
#[inline]
fn dash_on(phase: f64) -> bool {
    phase.rem_euclid(DASH_PERIOD) < DASH_ON
}

fn stamp_disc(sink: &mut dyn PixelSink, x: i32, y: i32, disc: &[(i32, i32)]) {
    for &(dx, dy) in disc {
        sink.stamp(x + dx, y + dy);
    }
}

/// Midpoint (Bresenham) line walk from p1 to p2 with stroke width and
/// optional dashing.
pub fn stroke_segment(
    sink: &mut dyn PixelSink,
    p1: Point2D,
    p2: Point2D,
    width: f64,
    dashed: bool,
) {
    let disc = disc_offsets(width);
    let (x0, y0) = (p1.x.round() as i64, p1.y.round() as i64);
    let (x1, y1) = (p2.x.round() as i64, p2.y.round() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    let mut phase = 0.0f64;
    loop {
        if !dashed || dash_on(phase) {
            stamp_disc(sink, x as i32, y as i32, &disc);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        let mut stepped_diag = 0u8;
        if e2 >= dy {
            err += dy;
            x += sx;
            stepped_diag += 1;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
            stepped_diag += 1;
        }
        phase += if stepped_diag == 2 {
            std::f64::consts::SQRT_2
        } else {
            1.0
        };
    }
}

/// Midpoint circle walk; stamps all eight octants. The dash phase and the
/// optional angular sector test are driven by each point's angle, measured
/// from +x toward +y in degrees.
pub fn stroke_circle_arc(
    sink: &mut dyn PixelSink,
    center: Point2D,
    radius: f64,
    sector: Option<(f64, f64)>,
    width: f64,
    dashed: bool,
) {
    let disc = disc_offsets(width);
    let cx = center.x.round() as i32;
    let cy = center.y.round() as i32;
    let r = radius.round().max(1.0) as i32;

    let mut visit = |px: i32, py: i32| {
        if dashed || sector.is_some() {
            let ang = ((py - cy) as f64)
                .atan2((px - cx) as f64)
                .to_degrees()
                .rem_euclid(360.0);
            if let Some((start, end)) = sector {
                let inside = if start <= end {
                    ang >= start && ang <= end
                } else {
                    ang >= start || ang <= end
                };
                if !inside {
                    return;
                }
                if dashed {
                    let sweep = (ang - start).rem_euclid(360.0);
                    if !dash_on(sweep.to_radians() * radius) {
                        return;
                    }
                }
            } else if dashed && !dash_on(ang.to_radians() * radius) {
                return;
            }
        }
        stamp_disc(sink, px, py, &disc);
    };

    let mut x = r;
    let mut y = 0;
    let mut err = 1 - r;
    while x >= y {
        visit(cx + x, cy + y);
        visit(cx + y, cy + x);
        visit(cx - y, cy + x);
        visit(cx - x, cy + y);
        visit(cx - x, cy - y);
        visit(cx - y, cy - x);
        visit(cx + y, cy - x);
        visit(cx + x, cy - y);
        y += 1;
        if err < 0 {
            err += 2 * y + 1;
        } else {
            x -= 1;
            err += 2 * (y - x) + 1;
        }
    }
}

/// Filled disc of the given radius (independent of stroke width).
pub fn fill_disc(sink: &mut dyn PixelSink, center: Point2D, radius: f64) {
    let cx = center.x.round() as i32;
    let cy = center.y.round() as i32;
    let ri = radius.ceil() as i32;
    let r2 = radius * radius + 1e-9;
    for dy in -ri..=ri {
        for dx in -ri..=ri {
            if (dx * dx + dy * dy) as f64 <= r2 {
                sink.stamp(cx + dx, cy + dy);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(f: impl FnOnce(&mut CoverageSink)) -> Vec<(u32, u32)> {
        let mut sink = CoverageSink::new(64, 64);
        f(&mut sink);
        let mut pts = sink.points;
        pts.sort_unstable();
        pts
    }

    #[test]
    fn width_one_horizontal_line_is_exact() {
        let pts = collect(|s| {
            stroke_segment(s, Point2D::new(0.0, 0.0), Point2D::new(10.0, 0.0), 1.0, false)
        });
        let expect: Vec<(u32, u32)> = (0..=10).map(|x| (x, 0)).collect();
        assert_eq!(pts, expect);
    }

    #[test]
    fn width_one_diagonal_touches_endpoints() {
        let pts = collect(|s| {
            stroke_segment(s, Point2D::new(2.0, 3.0), Point2D::new(9.0, 11.0), 1.0, false)
        });
        assert!(pts.contains(&(2, 3)));
        assert!(pts.contains(&(9, 11)));
    }

    #[test]
    fn disc_offsets_width_one_is_single_pixel() {
        assert_eq!(disc_offsets(1.0), vec![(0, 0)]);
        assert!(disc_offsets(3.0).len() > 1);
    }

    #[test]
    fn circle_walk_is_thin_and_closed() {
        let pts = collect(|s| {
            stroke_circle_arc(s, Point2D::new(32.0, 32.0), 20.0, None, 1.0, false)
        });
        for &(x, y) in &pts {
            let d = ((x as f64 - 32.0).powi(2) + (y as f64 - 32.0).powi(2)).sqrt();
            assert!((d - 20.0).abs() < 1.0, "pixel ({x},{y}) off-circle: {d}");
        }
        assert!(pts.len() > 80);
    }

    #[test]
    fn arc_sector_filters_points() {
        let pts = collect(|s| {
            stroke_circle_arc(
                s,
                Point2D::new(32.0, 32.0),
                20.0,
                Some((0.0, 90.0)),
                1.0,
                false,
            )
        });
        // First quadrant in raster coords: x >= cx, y >= cy.
        for &(x, y) in &pts {
            assert!(x >= 32 && y >= 32, "pixel ({x},{y}) outside sector");
        }
        assert!(!pts.is_empty());
    }

    #[test]
    fn dashed_line_has_gaps() {
        let solid = collect(|s| {
            stroke_segment(s, Point2D::new(0.0, 5.0), Point2D::new(60.0, 5.0), 1.0, false)
        });
        let dashed = collect(|s| {
            stroke_segment(s, Point2D::new(0.0, 5.0), Point2D::new(60.0, 5.0), 1.0, true)
        });
        assert!(dashed.len() < solid.len());
        assert!(!dashed.is_empty());
    }
}

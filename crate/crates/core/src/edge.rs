//! Binarized edge-pixel sets extracted from rasters.
//!
//! Figures in this domain are dark ink on a light background, so an "edge
//! pixel" is simply one whose luma falls below a threshold. The mask keeps
//! the threshold it was extracted with.

use crate::raster::Raster;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EDGE_THRESHOLD: u8 = 200;

/// Binary ink mask over a raster, same dimensions as its source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    threshold: u8,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: u32, height: u32, threshold: u8) -> Self {
        Self {
            width,
            height,
            threshold,
            mask: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_points<I: IntoIterator<Item = (u32, u32)>>(
        width: u32,
        height: u32,
        points: I,
    ) -> Self {
        let mut m = Self::empty(width, height, DEFAULT_EDGE_THRESHOLD);
        for (x, y) in points {
            m.set(x, y, true);
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.mask[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.mask[y as usize * self.width as usize + x as usize] = v;
    }

    /// True when (x, y) is in bounds and an edge pixel.
    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u32) < self.width
            && (y as u32) < self.height
            && self.get(x as u32, y as u32)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Edge pixels in row-major (y, x) scan order.
    pub fn points(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Is there an edge pixel within Euclidean `radius` of (x, y)?
    pub fn any_within(&self, x: f64, y: f64, radius: f64) -> bool {
        let r = radius.ceil() as i64;
        let cx = x.round() as i64;
        let cy = y.round() as i64;
        let r2 = radius * radius + 1e-9;
        for dy in -r..=r {
            for dx in -r..=r {
                if ((dx * dx + dy * dy) as f64) <= r2 && self.contains(cx + dx, cy + dy) {
                    return true;
                }
            }
        }
        false
    }
}

/// Binarize a raster: pixel (x, y) is an edge pixel iff luma(x, y) < threshold.
pub fn extract_edge_map(r: &Raster, threshold: u8) -> EdgeMap {
    let luma = r.to_luma();
    let mask = luma.iter().map(|&l| l < threshold).collect();
    EdgeMap {
        width: r.width(),
        height: r.height(),
        threshold,
        mask,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::render::render;

    #[test]
    fn all_white_has_no_edges() {
        let e = extract_edge_map(&Raster::white(50, 40), DEFAULT_EDGE_THRESHOLD);
        assert!(e.is_empty());
        assert_eq!(e.dimensions(), (50, 40));
    }

    #[test]
    fn threshold_zero_is_always_empty() {
        let r = Raster::filled(10, 10, [0, 0, 0]);
        assert!(extract_edge_map(&r, 0).is_empty());
    }

    #[test]
    fn rendered_thin_segment_yields_exact_edge_set() {
        let p = parse_program("canvas 32 32\nstyle width 1 color 0 0 0 dash solid\nsegment s1 (0,0) (10,0)\n").unwrap();
        let r = render(&p).unwrap();
        let e = extract_edge_map(&r, DEFAULT_EDGE_THRESHOLD);
        let expect: Vec<(u32, u32)> = (0..=10).map(|x| (x, 0)).collect();
        assert_eq!(e.points(), expect);
    }

    #[test]
    fn any_within_uses_euclidean_radius() {
        let e = EdgeMap::from_points(20, 20, [(10, 10)]);
        assert!(e.any_within(12.0, 10.0, 2.0));
        assert!(!e.any_within(13.0, 10.0, 2.0));
        assert!(!e.any_within(12.0, 12.0, 2.0)); // sqrt(8) > 2
    }
}

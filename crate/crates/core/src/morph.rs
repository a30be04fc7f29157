//! Binary-mask morphology shared by the vision operators: Zhang–Suen
//! thinning, square dilation, 8-connected component labeling and the
//! Rutovitz crossing number.

use crate::edge::EdgeMap;

/// Iterative Zhang–Suen thinning down to a unit-width skeleton.
pub fn thin(edges: &EdgeMap) -> EdgeMap {
    let (w, h) = edges.dimensions();
    let mut cur = edges.clone();
    if w < 3 || h < 3 {
        return cur;
    }
    let mut to_clear: Vec<(u32, u32)> = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_clear.clear();
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    if !cur.get(x, y) {
                        continue;
                    }
                    // Neighbors p2..p9 clockwise from north.
                    let p = [
                        cur.get(x, y - 1),
                        cur.get(x + 1, y - 1),
                        cur.get(x + 1, y),
                        cur.get(x + 1, y + 1),
                        cur.get(x, y + 1),
                        cur.get(x - 1, y + 1),
                        cur.get(x - 1, y),
                        cur.get(x - 1, y - 1),
                    ];
                    let b: u32 = p.iter().map(|&v| v as u32).sum();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = transitions(&p);
                    if a != 1 {
                        continue;
                    }
                    let cond = if pass == 0 {
                        (!p[0] || !p[2] || !p[4]) && (!p[2] || !p[4] || !p[6])
                    } else {
                        (!p[0] || !p[2] || !p[6]) && (!p[0] || !p[4] || !p[6])
                    };
                    if cond {
                        to_clear.push((x, y));
                    }
                }
            }
            if !to_clear.is_empty() {
                changed = true;
                for &(x, y) in &to_clear {
                    cur.set(x, y, false);
                }
            }
        }
        if !changed {
            return cur;
        }
    }
}

/// Number of 0->1 transitions around the 8-neighborhood ring.
fn transitions(p: &[bool; 8]) -> u32 {
    let mut a = 0;
    for i in 0..8 {
        if !p[i] && p[(i + 1) % 8] {
            a += 1;
        }
    }
    a
}

/// Crossing number of a skeleton pixel: 1 for a stroke end, 2 inside a
/// stroke, >= 3 at a junction. Returns 0 for background or isolated pixels.
pub fn crossing_number(skel: &EdgeMap, x: u32, y: u32) -> u32 {
    if !skel.get(x, y) {
        return 0;
    }
    let (xi, yi) = (x as i64, y as i64);
    let p = [
        skel.contains(xi, yi - 1),
        skel.contains(xi + 1, yi - 1),
        skel.contains(xi + 1, yi),
        skel.contains(xi + 1, yi + 1),
        skel.contains(xi, yi + 1),
        skel.contains(xi - 1, yi + 1),
        skel.contains(xi - 1, yi),
        skel.contains(xi - 1, yi - 1),
    ];
    transitions(&p)
}

/// Chebyshev (square structuring element) dilation by `radius` pixels.
pub fn dilate_square(edges: &EdgeMap, radius: u32) -> EdgeMap {
    if radius == 0 {
        return edges.clone();
    }
    let (w, h) = edges.dimensions();
    let r = radius as i64;
    // Horizontal then vertical max-run, both O(w*h*r).
    let mut horiz = EdgeMap::empty(w, h, edges.threshold());
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            for dx in -r..=r {
                if edges.contains(x as i64 + dx, y as i64) {
                    any = true;
                    break;
                }
            }
            if any {
                horiz.set(x, y, true);
            }
        }
    }
    let mut out = EdgeMap::empty(w, h, edges.threshold());
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            for dy in -r..=r {
                if horiz.contains(x as i64, y as i64 + dy) {
                    any = true;
                    break;
                }
            }
            if any {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// One 8-connected component, pixels in discovery order (deterministic:
/// row-major seed, fixed neighbor order).
#[derive(Debug, Clone)]
pub struct Component {
    pub pixels: Vec<(u32, u32)>,
}

impl Component {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len().max(1) as f64;
        let sx: f64 = self.pixels.iter().map(|&(x, _)| x as f64).sum();
        let sy: f64 = self.pixels.iter().map(|&(_, y)| y as f64).sum();
        (sx / n, sy / n)
    }

    /// Inclusive bounding box (x0, y0, x1, y1).
    pub fn bbox(&self) -> (u32, u32, u32, u32) {
        let mut x0 = u32::MAX;
        let mut y0 = u32::MAX;
        let mut x1 = 0;
        let mut y1 = 0;
        for &(x, y) in &self.pixels {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        (x0, y0, x1, y1)
    }
}

const NEIGHBORS_8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// 8-connected components of the mask, ordered by their first (row-major)
/// pixel.
pub fn connected_components(edges: &EdgeMap) -> Vec<Component> {
    let (w, h) = edges.dimensions();
    let mut visited = vec![false; w as usize * h as usize];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = y as usize * w as usize + x as usize;
            if visited[idx] || !edges.get(x, y) {
                continue;
            }
            let mut pixels = Vec::new();
            visited[idx] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                pixels.push((cx, cy));
                for (dx, dy) in NEIGHBORS_8 {
                    let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                    if edges.contains(nx, ny) {
                        let nidx = ny as usize * w as usize + nx as usize;
                        if !visited[nidx] {
                            visited[nidx] = true;
                            stack.push((nx as u32, ny as u32));
                        }
                    }
                }
            }
            out.push(Component { pixels });
        }
    }
    out
}

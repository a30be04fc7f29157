//! Least-squares fits over pixel clouds: total-least-squares lines, algebraic
//! (Kåsa) circles and principal-axis statistics.

use crate::program::Point2D;

/// Principal-axis decomposition of a point cloud.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalAxes {
    pub centroid: Point2D,
    /// Unit direction of the major axis.
    pub dir: Point2D,
    /// Eigenvalues of the covariance matrix, major then minor.
    pub lambda: (f64, f64),
}

impl PrincipalAxes {
    /// Ratio of major to minor spread; large for line-like clouds.
    pub fn elongation(&self) -> f64 {
        (self.lambda.0.max(0.0).sqrt()) / (self.lambda.1.max(0.0).sqrt() + 1e-9)
    }
}

pub fn principal_axes(pts: &[(u32, u32)]) -> Option<PrincipalAxes> {
    if pts.is_empty() {
        return None;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|&(x, _)| x as f64).sum::<f64>() / n;
    let cy = pts.iter().map(|&(_, y)| y as f64).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pts {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxx /= n;
    syy /= n;
    sxy /= n;
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    // Eigenvector for the major eigenvalue.
    let dir = if sxy.abs() > 1e-12 {
        let v = Point2D::new(l1 - syy, sxy);
        let norm = v.x.hypot(v.y);
        Point2D::new(v.x / norm, v.y / norm)
    } else if sxx >= syy {
        Point2D::new(1.0, 0.0)
    } else {
        Point2D::new(0.0, 1.0)
    };
    Some(PrincipalAxes {
        centroid: Point2D::new(cx, cy),
        dir,
        lambda: (l1, l2),
    })
}

/// A total-least-squares line fit with the extreme projections of the cloud
/// as endpoints.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub p1: Point2D,
    pub p2: Point2D,
    /// Maximum orthogonal deviation of any point from the line.
    pub max_deviation: f64,
}

pub fn fit_line(pts: &[(u32, u32)]) -> Option<LineFit> {
    let axes = principal_axes(pts)?;
    let d = axes.dir;
    let c = axes.centroid;
    let normal = Point2D::new(-d.y, d.x);
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut max_dev = 0.0f64;
    for &(x, y) in pts {
        let vx = x as f64 - c.x;
        let vy = y as f64 - c.y;
        let t = vx * d.x + vy * d.y;
        let dev = (vx * normal.x + vy * normal.y).abs();
        t_min = t_min.min(t);
        t_max = t_max.max(t);
        max_dev = max_dev.max(dev);
    }
    Some(LineFit {
        p1: Point2D::new(c.x + t_min * d.x, c.y + t_min * d.y),
        p2: Point2D::new(c.x + t_max * d.x, c.y + t_max * d.y),
        max_deviation: max_dev,
    })
}

/// Kåsa algebraic circle fit.
#[derive(Debug, Clone, Copy)]
pub struct CircleFit {
    pub center: Point2D,
    pub radius: f64,
    /// Maximum absolute radial deviation of any point.
    pub max_deviation: f64,
}

pub fn fit_circle(pts: &[(u32, u32)]) -> Option<CircleFit> {
    if pts.len() < 3 {
        return None;
    }
    // Solve [x y 1] . [a b c]^T = x^2 + y^2 in least squares via the normal
    // equations; center = (a/2, b/2), r^2 = c + center.center.
    let n = pts.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    let mut sxz = 0.0;
    let mut syz = 0.0;
    let mut sz = 0.0;
    for &(xi, yi) in pts {
        let x = xi as f64;
        let y = yi as f64;
        let z = x * x + y * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    let m = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, n]];
    let rhs = [sxz, syz, sz];
    let sol = solve3(m, rhs)?;
    let center = Point2D::new(sol[0] / 2.0, sol[1] / 2.0);
    let r2 = sol[2] + center.x * center.x + center.y * center.y;
    if !(r2.is_finite() && r2 > 0.0) {
        return None;
    }
    let radius = r2.sqrt();
    let mut max_dev = 0.0f64;
    for &(x, y) in pts {
        let d = (x as f64 - center.x).hypot(y as f64 - center.y);
        max_dev = max_dev.max((d - radius).abs());
    }
    Some(CircleFit {
        center,
        radius,
        max_deviation: max_dev,
    })
}

/// Gaussian elimination with partial pivoting for a 3x3 system.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Intersection of the infinite lines a1..a2 and b1..b2; None when nearly
/// parallel.
pub fn line_intersection(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> Option<Point2D> {
    let d1 = Point2D::new(a2.x - a1.x, a2.y - a1.y);
    let d2 = Point2D::new(b2.x - b1.x, b2.y - b1.y);
    let den = d1.x * d2.y - d1.y * d2.x;
    if den.abs() < 1e-9 {
        return None;
    }
    let t = ((b1.x - a1.x) * d2.y - (b1.y - a1.y) * d2.x) / den;
    Some(Point2D::new(a1.x + t * d1.x, a1.y + t * d1.y))
}

/// Orthogonal distance from a point to the segment p1..p2 (not the infinite
/// line).
pub fn point_segment_distance(p: Point2D, p1: Point2D, p2: Point2D) -> f64 {
    let vx = p2.x - p1.x;
    let vy = p2.y - p1.y;
    let len2 = vx * vx + vy * vy;
    if len2 <= f64::EPSILON {
        return p.dist(&p1);
    }
    let t = (((p.x - p1.x) * vx + (p.y - p1.y) * vy) / len2).clamp(0.0, 1.0);
    let proj = Point2D::new(p1.x + t * vx, p1.y + t * vy);
    p.dist(&proj)
}

/// Distance from a point to the infinite line through p1..p2.
pub fn point_line_distance(p: Point2D, p1: Point2D, p2: Point2D) -> f64 {
    let vx = p2.x - p1.x;
    let vy = p2.y - p1.y;
    let len = vx.hypot(vy);
    if len <= f64::EPSILON {
        return p.dist(&p1);
    }
    ((p.x - p1.x) * vy - (p.y - p1.y) * vx).abs() / len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_a_diagonal() {
        let pts: Vec<(u32, u32)> = (0..50).map(|i| (10 + i, 20 + i)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!(fit.max_deviation < 1e-6);
        let ends = [(fit.p1.x, fit.p1.y), (fit.p2.x, fit.p2.y)];
        assert!(ends
            .iter()
            .any(|&(x, y)| (x - 10.0).abs() < 0.5 && (y - 20.0).abs() < 0.5));
        assert!(ends
            .iter()
            .any(|&(x, y)| (x - 59.0).abs() < 0.5 && (y - 69.0).abs() < 0.5));
    }

    #[test]
    fn circle_fit_recovers_center_and_radius() {
        let mut pts = Vec::new();
        for i in 0..120 {
            let a = i as f64 * std::f64::consts::TAU / 120.0;
            pts.push((
                (100.0 + 40.0 * a.cos()).round() as u32,
                (100.0 + 40.0 * a.sin()).round() as u32,
            ));
        }
        let fit = fit_circle(&pts).unwrap();
        assert!((fit.center.x - 100.0).abs() < 1.0);
        assert!((fit.center.y - 100.0).abs() < 1.0);
        assert!((fit.radius - 40.0).abs() < 1.0);
        assert!(fit.max_deviation < 1.0);
    }

    #[test]
    fn bent_cloud_fits_neither_tightly() {
        let mut pts: Vec<(u32, u32)> = (0..30).map(|i| (i, 0)).collect();
        pts.extend((0..30).map(|i| (29, i)));
        let line = fit_line(&pts).unwrap();
        assert!(line.max_deviation > 5.0);
        if let Some(c) = fit_circle(&pts) {
            assert!(c.max_deviation > 1.5);
        }
    }

    #[test]
    fn elongation_separates_lines_from_blobs() {
        let line: Vec<(u32, u32)> = (0..40).map(|i| (i, 5)).collect();
        let blob: Vec<(u32, u32)> = (0..6).flat_map(|y| (0..6).map(move |x| (x, y))).collect();
        assert!(principal_axes(&line).unwrap().elongation() > 3.0);
        assert!(principal_axes(&blob).unwrap().elongation() < 3.0);
    }

    #[test]
    fn segment_distance_clamps_to_endpoints() {
        let p1 = Point2D::new(0.0, 0.0);
        let p2 = Point2D::new(10.0, 0.0);
        assert_eq!(point_segment_distance(Point2D::new(5.0, 3.0), p1, p2), 3.0);
        assert_eq!(point_segment_distance(Point2D::new(14.0, 0.0), p1, p2), 4.0);
        assert_eq!(point_line_distance(Point2D::new(14.0, 0.0), p1, p2), 0.0);
    }
}

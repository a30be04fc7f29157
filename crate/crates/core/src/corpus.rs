//! Seeded synthetic figure generator: triangles, convex quadrilaterals,
//! crossed segment pairs and circles, placed without overlap on the
//! standard canvas. Used by the verification suites and the selftest
//! command; identical seeds produce identical programs.

use crate::program::{Point2D, Primitive, Program, Shape, Style};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CANVAS: f64 = 1000.0;
const MARGIN: f64 = 90.0;
const SHAPE_GAP: f64 = 30.0;
const MIN_ANGLE_DEG: f64 = 28.0;
const MIN_EDGE: f64 = 90.0;

/// Deterministic program for a seed: 1-3 disjoint shapes, 2-8 primitives.
pub fn generate_program(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Program::default();
    let mut boxes: Vec<[f64; 4]> = Vec::new();
    let mut next_id = 0usize;
    let target_shapes = rng.gen_range(1..=3);

    let mut shapes_placed = 0;
    let mut attempts = 0;
    while attempts < 400 {
        attempts += 1;
        let done_enough = shapes_placed >= target_shapes && p.primitives.len() >= 2;
        if done_enough || p.primitives.len() >= 8 {
            break;
        }
        let kind = rng.gen_range(0..4u32);
        let budget = 8 - p.primitives.len();
        let candidate = match kind {
            0 if budget >= 3 => triangle(&mut rng),
            1 if budget >= 4 => quadrilateral(&mut rng),
            2 if budget >= 2 => crossed_segments(&mut rng),
            3 => circle(&mut rng),
            _ => continue,
        };
        let Some((prims, bbox)) = candidate else {
            continue;
        };
        let inflated = [
            bbox[0] - SHAPE_GAP,
            bbox[1] - SHAPE_GAP,
            bbox[2] + SHAPE_GAP,
            bbox[3] + SHAPE_GAP,
        ];
        if boxes.iter().any(|b| rects_overlap(b, &inflated)) {
            continue;
        }
        boxes.push(inflated);
        shapes_placed += 1;
        let width = *[2.0, 3.0, 4.0]
            .get(rng.gen_range(0..3usize))
            .expect("width choice");
        let style = Style {
            stroke_width: width,
            ..Style::default()
        };
        for shape in prims {
            p.primitives.push(Primitive {
                id: format!("e{next_id}"),
                shape,
                style,
            });
            next_id += 1;
        }
    }
    // A lone circle is a one-primitive program; pad with a crossed pair so
    // every corpus program has at least two statements.
    while p.primitives.len() < 2 {
        if let Some((prims, bbox)) = crossed_segments(&mut rng) {
            let inflated = [
                bbox[0] - SHAPE_GAP,
                bbox[1] - SHAPE_GAP,
                bbox[2] + SHAPE_GAP,
                bbox[3] + SHAPE_GAP,
            ];
            if boxes.iter().any(|b| rects_overlap(b, &inflated)) {
                continue;
            }
            boxes.push(inflated);
            for shape in prims {
                p.primitives.push(Primitive {
                    id: format!("e{next_id}"),
                    shape,
                    style: Style {
                        stroke_width: 2.0,
                        ..Style::default()
                    },
                });
                next_id += 1;
            }
        }
    }
    debug_assert!(p.validate_consistency().is_empty());
    p
}

/// Coordinates quantized to the serializer's two decimals so programs
/// round-trip exactly.
fn q2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn rects_overlap(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

fn bbox_of(pts: &[Point2D]) -> [f64; 4] {
    let mut r = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in pts {
        r[0] = r[0].min(p.x);
        r[1] = r[1].min(p.y);
        r[2] = r[2].max(p.x);
        r[3] = r[3].max(p.y);
    }
    r
}

fn rand_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point2D {
    Point2D::new(
        q2(rng.gen_range(lo..hi)),
        q2(rng.gen_range(lo..hi)),
    )
}

fn angle_at(v: Point2D, a: Point2D, b: Point2D) -> f64 {
    let u1 = Point2D::new(a.x - v.x, a.y - v.y);
    let u2 = Point2D::new(b.x - v.x, b.y - v.y);
    let dot = u1.x * u2.x + u1.y * u2.y;
    let n = (u1.x.hypot(u1.y) * u2.x.hypot(u2.y)).max(1e-9);
    (dot / n).clamp(-1.0, 1.0).acos().to_degrees()
}

fn polygon_sides(pts: &[Point2D]) -> Vec<Shape> {
    let mut out = Vec::new();
    for i in 0..pts.len() {
        out.push(Shape::Segment {
            p1: pts[i],
            p2: pts[(i + 1) % pts.len()],
        });
    }
    out
}

fn triangle(rng: &mut ChaCha8Rng) -> Option<(Vec<Shape>, [f64; 4])> {
    for _ in 0..60 {
        let pts = [
            rand_point(rng, MARGIN, CANVAS - MARGIN),
            rand_point(rng, MARGIN, CANVAS - MARGIN),
            rand_point(rng, MARGIN, CANVAS - MARGIN),
        ];
        let ok_edges = (0..3).all(|i| pts[i].dist(&pts[(i + 1) % 3]) >= MIN_EDGE);
        let ok_angles = (0..3).all(|i| {
            angle_at(pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3]) >= MIN_ANGLE_DEG
        });
        if ok_edges && ok_angles {
            return Some((polygon_sides(&pts), bbox_of(&pts)));
        }
    }
    None
}

fn quadrilateral(rng: &mut ChaCha8Rng) -> Option<(Vec<Shape>, [f64; 4])> {
    for _ in 0..60 {
        // Convex by construction: points on a jittered ellipse, in angular
        // order.
        let cx = rng.gen_range(MARGIN + 180.0..CANVAS - MARGIN - 180.0);
        let cy = rng.gen_range(MARGIN + 180.0..CANVAS - MARGIN - 180.0);
        let rx = rng.gen_range(100.0..180.0);
        let ry = rng.gen_range(100.0..180.0);
        let base = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut angles: Vec<f64> = (0..4)
            .map(|i| {
                base + i as f64 * std::f64::consts::FRAC_PI_2
                    + rng.gen_range(-0.35..0.35)
            })
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let pts: Vec<Point2D> = angles
            .iter()
            .map(|a| Point2D::new(q2(cx + rx * a.cos()), q2(cy + ry * a.sin())))
            .collect();
        let ok_edges = (0..4).all(|i| pts[i].dist(&pts[(i + 1) % 4]) >= MIN_EDGE);
        let ok_angles = (0..4).all(|i| {
            let prev = pts[(i + 3) % 4];
            let next = pts[(i + 1) % 4];
            let a = angle_at(pts[i], prev, next);
            (MIN_ANGLE_DEG..=180.0 - MIN_ANGLE_DEG).contains(&a)
        });
        if ok_edges && ok_angles {
            let bbox = bbox_of(&pts);
            return Some((polygon_sides(&pts), bbox));
        }
    }
    None
}

fn crossed_segments(rng: &mut ChaCha8Rng) -> Option<(Vec<Shape>, [f64; 4])> {
    for _ in 0..60 {
        let a1 = rand_point(rng, MARGIN, CANVAS - MARGIN);
        let a2 = rand_point(rng, MARGIN, CANVAS - MARGIN);
        if a1.dist(&a2) < 150.0 {
            continue;
        }
        // Second segment through an interior point of the first, rotated by
        // a healthy angle.
        let t = rng.gen_range(0.3..0.7);
        let mid = Point2D::new(a1.x + t * (a2.x - a1.x), a1.y + t * (a2.y - a1.y));
        let base = (a2.y - a1.y).atan2(a2.x - a1.x);
        let rot = base
            + rng.gen_range(MIN_ANGLE_DEG.to_radians()..std::f64::consts::PI - MIN_ANGLE_DEG.to_radians());
        let half = rng.gen_range(80.0..200.0);
        let b1 = Point2D::new(q2(mid.x - half * rot.cos()), q2(mid.y - half * rot.sin()));
        let b2 = Point2D::new(q2(mid.x + half * rot.cos()), q2(mid.y + half * rot.sin()));
        let all = [a1, a2, b1, b2];
        if all
            .iter()
            .any(|p| p.x < MARGIN || p.x > CANVAS - MARGIN || p.y < MARGIN || p.y > CANVAS - MARGIN)
        {
            continue;
        }
        let shapes = vec![
            Shape::Segment { p1: a1, p2: a2 },
            Shape::Segment { p1: b1, p2: b2 },
        ];
        return Some((shapes, bbox_of(&all)));
    }
    None
}

fn circle(rng: &mut ChaCha8Rng) -> Option<(Vec<Shape>, [f64; 4])> {
    let radius = q2(rng.gen_range(60.0..200.0));
    let lo = MARGIN + radius;
    let hi = CANVAS - MARGIN - radius;
    if lo >= hi {
        return None;
    }
    let center = Point2D::new(q2(rng.gen_range(lo..hi)), q2(rng.gen_range(lo..hi)));
    let bbox = [
        center.x - radius,
        center.y - radius,
        center.x + radius,
        center.y + radius,
    ];
    Some((vec![Shape::Circle { center, radius }], bbox))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    #[test]
    fn generation_is_deterministic() {
        for seed in 0..10 {
            let a = generate_program(seed);
            let b = generate_program(seed);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn generated_programs_are_valid_and_sized() {
        for seed in 0..50 {
            let p = generate_program(seed);
            assert!(
                p.validate_consistency().is_empty(),
                "seed {seed}: {:?}",
                p.validate_consistency()
            );
            assert!(
                (2..=8).contains(&p.primitives.len()),
                "seed {seed}: {} primitives",
                p.primitives.len()
            );
        }
    }

    #[test]
    fn generated_programs_round_trip() {
        for seed in 0..20 {
            let p = generate_program(seed);
            let q = parse_program(&p.to_source()).unwrap();
            assert_eq!(p, q, "seed {seed}");
        }
    }
}

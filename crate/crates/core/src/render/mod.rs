//! Deterministic program execution: `Program -> Raster`.
//!
//! Rasterization is hard (no anti-aliasing), so identical inputs produce
//! bit-identical outputs. Strokes are clipped silently at the canvas border;
//! a primitive whose every pixel misses the canvas is an error unless it is
//! a label.

mod draw;
mod font;

pub use draw::{disc_offsets, CoverageSink, PixelSink, RasterSink};

use crate::program::{Dash, Point2D, Primitive, Program, Shape, Violation};
use crate::raster::Raster;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("program failed validation: {}", summarize(.0))]
    InvalidProgram(Vec<Violation>),
    #[error("primitive `{id}` touches no canvas pixel: {reason}")]
    RenderFailure { id: String, reason: String },
}

fn summarize(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Render a validated program onto a white canvas, primitives in statement
/// order.
pub fn render(p: &Program) -> Result<Raster, RenderError> {
    let violations = p.validate_consistency();
    if !violations.is_empty() {
        return Err(RenderError::InvalidProgram(violations));
    }
    let mut raster = Raster::white(p.canvas_width, p.canvas_height);
    for prim in &p.primitives {
        let mut sink = RasterSink {
            raster: &mut raster,
            color: prim.style.color,
            touched: 0,
        };
        stamp_primitive(&mut sink, prim);
        if sink.touched == 0 && !matches!(prim.shape, Shape::Label { .. }) {
            return Err(RenderError::RenderFailure {
                id: prim.id.clone(),
                reason: "all coordinates fall outside the canvas".into(),
            });
        }
    }
    Ok(raster)
}

/// The set of canvas pixels a single primitive covers (its stroke envelope).
pub fn primitive_coverage(prim: &Primitive, width: u32, height: u32) -> Vec<(u32, u32)> {
    let mut sink = CoverageSink::new(width, height);
    stamp_primitive(&mut sink, prim);
    sink.points
}

/// Radius of the dot drawn for a point mark, derived from its stroke width.
pub fn point_mark_radius(stroke_width: f64) -> f64 {
    (stroke_width / 2.0 + 1.0).clamp(1.5, 3.0)
}

fn stamp_primitive(sink: &mut dyn PixelSink, prim: &Primitive) {
    let w = prim.style.stroke_width;
    let dashed = prim.style.dash == Dash::Dashed;
    match &prim.shape {
        Shape::PointMark { pos } => draw::fill_disc(sink, *pos, point_mark_radius(w)),
        Shape::Segment { p1, p2 } => draw::stroke_segment(sink, *p1, *p2, w, dashed),
        Shape::Circle { center, radius } => {
            draw::stroke_circle_arc(sink, *center, *radius, None, w, dashed)
        }
        Shape::Arc {
            center,
            radius,
            start_deg,
            end_deg,
        } => draw::stroke_circle_arc(sink, *center, *radius, Some((*start_deg, *end_deg)), w, dashed),
        Shape::Polyline { points } => {
            for pair in points.windows(2) {
                draw::stroke_segment(sink, pair[0], pair[1], w, dashed);
            }
        }
        Shape::Label {
            text,
            anchor,
            offset,
        } => stamp_text(sink, text, anchor.x + offset.x, anchor.y + offset.y),
        Shape::RightAngleMark {
            vertex,
            arm1,
            arm2,
            size,
        } => {
            let u1 = normalize(*arm1);
            let u2 = normalize(*arm2);
            let a = Point2D::new(vertex.x + size * u1.x, vertex.y + size * u1.y);
            let b = Point2D::new(vertex.x + size * u2.x, vertex.y + size * u2.y);
            let c = Point2D::new(
                vertex.x + size * (u1.x + u2.x),
                vertex.y + size * (u1.y + u2.y),
            );
            draw::stroke_segment(sink, a, c, w, false);
            draw::stroke_segment(sink, b, c, w, false);
        }
        Shape::TickMark {
            midpoint,
            direction,
        } => {
            let u = normalize(*direction);
            let n = Point2D::new(-u.y, u.x);
            let half = TICK_HALF_LEN;
            let a = Point2D::new(midpoint.x - half * n.x, midpoint.y - half * n.y);
            let b = Point2D::new(midpoint.x + half * n.x, midpoint.y + half * n.y);
            draw::stroke_segment(sink, a, b, w, false);
        }
    }
}

const TICK_HALF_LEN: f64 = 5.0;
/// Pixel scale of one font unit for regular label glyphs.
const FONT_SCALE: i32 = 2;

fn normalize(v: Point2D) -> Point2D {
    let n = v.x.hypot(v.y);
    if n <= f64::EPSILON {
        Point2D::new(1.0, 0.0)
    } else {
        Point2D::new(v.x / n, v.y / n)
    }
}

fn stamp_text(sink: &mut dyn PixelSink, text: &str, x0: f64, y0: f64) {
    let mut pen_x = x0.round() as i32;
    let pen_y = y0.round() as i32;
    for c in text.chars() {
        let (rows, subscript) = font::glyph(c);
        let scale = if subscript {
            (FONT_SCALE - 1).max(1)
        } else {
            FONT_SCALE
        };
        let y_off = if subscript { 3 * FONT_SCALE } else { 0 };
        for (ry, row) in rows.iter().enumerate() {
            for rx in 0..font::GLYPH_W {
                if row & (1 << (font::GLYPH_W - 1 - rx)) != 0 {
                    for sy in 0..scale {
                        for sx in 0..scale {
                            sink.stamp(
                                pen_x + rx as i32 * scale + sx,
                                pen_y + y_off + ry as i32 * scale + sy,
                            );
                        }
                    }
                }
            }
        }
        pen_x += font::ADVANCE as i32 * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{Style, Violation};

    fn prog_with(shapes: Vec<(&str, Shape, Style)>) -> Program {
        let mut p = Program::default();
        for (id, shape, style) in shapes {
            p.primitives.push(Primitive {
                id: id.into(),
                shape,
                style,
            });
        }
        p
    }

    fn thin() -> Style {
        Style {
            stroke_width: 1.0,
            ..Style::default()
        }
    }

    #[test]
    fn width_one_segment_hits_exact_pixels() {
        let p = prog_with(vec![(
            "s1",
            Shape::Segment {
                p1: Point2D::new(0.0, 0.0),
                p2: Point2D::new(10.0, 0.0),
            },
            thin(),
        )]);
        let r = render(&p).unwrap();
        for y in 0..20 {
            for x in 0..20 {
                let expect_ink = y == 0 && x <= 10;
                assert_eq!(
                    r.get(x, y) == [0, 0, 0],
                    expect_ink,
                    "pixel ({x},{y}) mismatch"
                );
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let src = "canvas 400 400\nstyle width 3 color 0 0 0 dash solid\nsegment s1 (20,20) (380,120)\ncircle c1 (200,250) 90\nlabel t1 \"A₁\" (40,300)\n";
        let p = crate::program::parse_program(src).unwrap();
        let a = render(&p).unwrap();
        let b = render(&p).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn empty_program_is_all_white() {
        let r = render(&Program::default()).unwrap();
        assert_eq!(r.dimensions(), (1000, 1000));
        assert!(r.data().iter().all(|&b| b == 255));
    }

    #[test]
    fn offscreen_segment_is_a_render_failure() {
        // Fully inside the validator slack but entirely off-canvas.
        let p = prog_with(vec![(
            "s1",
            Shape::Segment {
                p1: Point2D::new(-90.0, -90.0),
                p2: Point2D::new(-20.0, -90.0),
            },
            thin(),
        )]);
        match render(&p).unwrap_err() {
            RenderError::RenderFailure { id, .. } => assert_eq!(id, "s1"),
            other => panic!("expected render failure, got {other:?}"),
        }
    }

    #[test]
    fn offscreen_label_is_silent() {
        let p = prog_with(vec![(
            "t1",
            Shape::Label {
                text: "X".into(),
                anchor: Point2D::new(-80.0, -80.0),
                offset: Point2D::new(0.0, 0.0),
            },
            thin(),
        )]);
        assert!(render(&p).is_ok());
    }

    #[test]
    fn clipping_is_silent_when_one_pixel_lands() {
        let p = prog_with(vec![(
            "s1",
            Shape::Segment {
                p1: Point2D::new(-50.0, 10.0),
                p2: Point2D::new(30.0, 10.0),
            },
            thin(),
        )]);
        let r = render(&p).unwrap();
        assert_eq!(r.get(0, 10), [0, 0, 0]);
    }

    #[test]
    fn invalid_program_is_rejected() {
        let p = prog_with(vec![(
            "c1",
            Shape::Circle {
                center: Point2D::new(100.0, 100.0),
                radius: -1.0,
            },
            thin(),
        )]);
        match render(&p).unwrap_err() {
            RenderError::InvalidProgram(v) => {
                assert!(matches!(v[0], Violation::InvariantBreach { .. }))
            }
            other => panic!("expected invalid program, got {other:?}"),
        }
    }

    #[test]
    fn appending_ink_never_decreases_coverage() {
        let base = prog_with(vec![(
            "s1",
            Shape::Segment {
                p1: Point2D::new(10.0, 10.0),
                p2: Point2D::new(200.0, 150.0),
            },
            Style::default(),
        )]);
        let mut bigger = base.clone();
        bigger.primitives.push(Primitive {
            id: "c1".into(),
            shape: Shape::Circle {
                center: Point2D::new(500.0, 500.0),
                radius: 80.0,
            },
            style: Style::default(),
        });
        let count = |r: &Raster| r.data().chunks_exact(3).filter(|c| *c != [255u8; 3]).count();
        let a = render(&base).unwrap();
        let b = render(&bigger).unwrap();
        assert!(count(&b) >= count(&a));
    }

    #[test]
    fn extra_primitive_only_touches_its_envelope() {
        let base = prog_with(vec![(
            "s1",
            Shape::Segment {
                p1: Point2D::new(10.0, 10.0),
                p2: Point2D::new(200.0, 150.0),
            },
            Style::default(),
        )]);
        let extra = Primitive {
            id: "s2".into(),
            shape: Shape::Segment {
                p1: Point2D::new(600.0, 600.0),
                p2: Point2D::new(700.0, 640.0),
            },
            style: Style {
                stroke_width: 4.0,
                ..Style::default()
            },
        };
        let mut bigger = base.clone();
        bigger.primitives.push(extra.clone());
        let a = render(&base).unwrap();
        let b = render(&bigger).unwrap();
        let pad = extra.style.stroke_width + 1.0;
        let (min_x, max_x) = (600.0 - pad, 700.0 + pad);
        let (min_y, max_y) = (600.0 - pad, 640.0 + pad);
        for y in 0..1000u32 {
            for x in 0..1000u32 {
                if a.get(x, y) != b.get(x, y) {
                    let (fx, fy) = (x as f64, y as f64);
                    assert!(
                        fx >= min_x && fx <= max_x && fy >= min_y && fy <= max_y,
                        "pixel ({x},{y}) changed outside the new stroke envelope"
                    );
                }
            }
        }
    }

    #[test]
    fn point_mark_radius_tracks_width() {
        assert_eq!(point_mark_radius(1.0), 1.5);
        assert_eq!(point_mark_radius(4.0), 3.0);
        assert_eq!(point_mark_radius(20.0), 3.0);
    }
}

//! Canonical serializer: one statement per line, coordinates at two decimal
//! places, byte-stable across runs.

use super::{Dash, Point2D, Primitive, Program, Shape, Style};
use std::fmt::Write;

fn fmt_real(v: f64) -> String {
    // Avoid "-0.00" so output depends only on the printed value.
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn fmt_vec(p: &Point2D) -> String {
    format!("({},{})", fmt_real(p.x), fmt_real(p.y))
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out
}

fn style_line(s: &Style) -> String {
    format!(
        "style width {} color {} {} {} dash {}",
        fmt_real(s.stroke_width),
        s.color[0],
        s.color[1],
        s.color[2],
        match s.dash {
            Dash::Solid => "solid",
            Dash::Dashed => "dashed",
        }
    )
}

pub fn serialize_program(p: &Program) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "canvas {} {}", p.canvas_width, p.canvas_height);
    let mut state = p.defaults;
    if p.defaults != Style::default() {
        let _ = writeln!(out, "{}", style_line(&p.defaults));
    }
    for prim in &p.primitives {
        if prim.style != state {
            let _ = writeln!(out, "{}", style_line(&prim.style));
            state = prim.style;
        }
        let _ = writeln!(out, "{}", statement(prim));
    }
    out
}

fn statement(prim: &Primitive) -> String {
    let id = &prim.id;
    match &prim.shape {
        Shape::PointMark { pos } => {
            format!("point {id} {} {}", fmt_real(pos.x), fmt_real(pos.y))
        }
        Shape::Segment { p1, p2 } => {
            format!("segment {id} {} {}", fmt_vec(p1), fmt_vec(p2))
        }
        Shape::Circle { center, radius } => {
            format!("circle {id} {} {}", fmt_vec(center), fmt_real(*radius))
        }
        Shape::Arc {
            center,
            radius,
            start_deg,
            end_deg,
        } => format!(
            "arc {id} {} {} {} {}",
            fmt_vec(center),
            fmt_real(*radius),
            fmt_real(*start_deg),
            fmt_real(*end_deg)
        ),
        Shape::Polyline { points } => {
            let mut s = format!("polyline {id}");
            for p in points {
                s.push(' ');
                s.push_str(&fmt_vec(p));
            }
            s
        }
        Shape::Label {
            text,
            anchor,
            offset,
        } => format!(
            "label {id} \"{}\" {} offset {}",
            escape(text),
            fmt_vec(anchor),
            fmt_vec(offset)
        ),
        Shape::RightAngleMark {
            vertex,
            arm1,
            arm2,
            size,
        } => format!(
            "rightangle {id} {} {} {} {}",
            fmt_vec(vertex),
            fmt_vec(arm1),
            fmt_vec(arm2),
            fmt_real(*size)
        ),
        Shape::TickMark {
            midpoint,
            direction,
        } => format!("tick {id} {} {}", fmt_vec(midpoint), fmt_vec(direction)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;

    #[test]
    fn canonical_segment_form() {
        let mut p = Program::default();
        p.primitives.push(Primitive {
            id: "s1".into(),
            shape: Shape::Segment {
                p1: Point2D::new(0.0, 0.0),
                p2: Point2D::new(10.0, 0.0),
            },
            style: Style::default(),
        });
        assert_eq!(
            p.to_source(),
            "canvas 1000 1000\nsegment s1 (0.00,0.00) (10.00,0.00)\n"
        );
    }

    #[test]
    fn empty_program_is_just_the_canvas() {
        assert_eq!(Program::default().to_source(), "canvas 1000 1000\n");
    }

    #[test]
    fn serialization_is_idempotent() {
        let src = "canvas 1000 1000\nstyle width 3 color 10 20 30 dash dashed\npoint A 1.5 2.25\nsegment s1 A (400.125,200)\nlabel t1 \"hi \\\"x\\\"\" (5,5)\n";
        let once = parse_program(src).unwrap().to_source();
        let twice = parse_program(&once).unwrap().to_source();
        assert_eq!(once, twice);
    }

    #[test]
    fn round_trip_preserves_structure() {
        let src = "canvas 800 600\nstyle width 1 color 0 0 0 dash solid\npoint A 10 20\nstyle width 4 color 9 9 9 dash dashed\nsegment s1 A (30.25,40.5)\ncircle c1 (100,100) 55.75\narc a1 (200,200) 50 0 90\npolyline pl (1,1) (2,2) (3,1)\nrightangle ra (10,10) (1,0) (0,1) 12\ntick tk (50,50) (0.5,0.5)\nlabel t1 \"B₂\" (70,70) offset (2,-2)\n";
        let p = parse_program(src).unwrap();
        let q = parse_program(&p.to_source()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn negative_zero_is_not_emitted() {
        assert_eq!(fmt_real(-0.0001), "0.00");
        assert_eq!(fmt_real(-0.004), "0.00");
    }
}

//! The geometry DSL: program model, parser, canonical serializer and
//! structural validator.
//!
//! A program is a canvas declaration followed by an ordered list of drawing
//! statements. Statement order is draw order (later statements paint over
//! earlier ones). Named points may be declared once and referenced by name in
//! later statements; references are resolved to concrete coordinates at parse
//! time, so a parsed [`Program`] is fully grounded.

mod parser;
mod serializer;

pub use parser::{parse_program, ParseError};

use serde::{Deserialize, Serialize};

/// A point on the canvas in pixel coordinates. Origin is the top-left corner,
/// y grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Line style: dash pattern on/off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dash {
    Solid,
    Dashed,
}

/// Stroke attributes attached to every primitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Style {
    /// Stroke width in pixels; valid range 0.5..=20.
    pub stroke_width: f64,
    /// 8-bit RGB stroke color.
    pub color: [u8; 3],
    pub dash: Dash,
}

impl Default for Style {
    fn default() -> Self {
        Self {
            stroke_width: 2.0,
            color: [0, 0, 0],
            dash: Dash::Solid,
        }
    }
}

/// Geometric payload of a primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    PointMark {
        pos: Point2D,
    },
    Segment {
        p1: Point2D,
        p2: Point2D,
    },
    Circle {
        center: Point2D,
        radius: f64,
    },
    /// Circular arc from `start_deg` to `end_deg`, sweeping in the direction
    /// of increasing angle. Angles are measured from the +x axis toward +y
    /// (downward on screen) and normalized to [0, 360).
    Arc {
        center: Point2D,
        radius: f64,
        start_deg: f64,
        end_deg: f64,
    },
    Polyline {
        points: Vec<Point2D>,
    },
    Label {
        text: String,
        anchor: Point2D,
        offset: Point2D,
    },
    /// Small square marking a right angle at `vertex`, opening along the two
    /// arm directions. `size` is the side length in pixels.
    RightAngleMark {
        vertex: Point2D,
        arm1: Point2D,
        arm2: Point2D,
        size: f64,
    },
    /// Short stroke crossing a segment at `midpoint`, perpendicular to
    /// `direction` (an equal-length mark).
    TickMark {
        midpoint: Point2D,
        direction: Point2D,
    },
}

impl Shape {
    /// Human-readable statement keyword for diagnostics.
    pub fn keyword(&self) -> &'static str {
        match self {
            Shape::PointMark { .. } => "point",
            Shape::Segment { .. } => "segment",
            Shape::Circle { .. } => "circle",
            Shape::Arc { .. } => "arc",
            Shape::Polyline { .. } => "polyline",
            Shape::Label { .. } => "label",
            Shape::RightAngleMark { .. } => "rightangle",
            Shape::TickMark { .. } => "tick",
        }
    }

    /// Every coordinate the shape references, in statement order.
    pub fn coords(&self) -> Vec<Point2D> {
        match self {
            Shape::PointMark { pos } => vec![*pos],
            Shape::Segment { p1, p2 } => vec![*p1, *p2],
            Shape::Circle { center, .. } => vec![*center],
            Shape::Arc { center, .. } => vec![*center],
            Shape::Polyline { points } => points.clone(),
            Shape::Label { anchor, .. } => vec![*anchor],
            Shape::RightAngleMark { vertex, .. } => vec![*vertex],
            Shape::TickMark { midpoint, .. } => vec![*midpoint],
        }
    }
}

/// One drawing statement: a unique id, a shape and the style it is drawn with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub id: String,
    pub shape: Shape,
    pub style: Style,
}

/// An executable geometric program: canvas size plus ordered primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub canvas_width: u32,
    pub canvas_height: u32,
    /// Style in effect before the first `style` statement.
    pub defaults: Style,
    pub primitives: Vec<Primitive>,
}

impl Default for Program {
    fn default() -> Self {
        Self::new(1000, 1000)
    }
}

impl Program {
    pub fn new(canvas_width: u32, canvas_height: u32) -> Self {
        Self {
            canvas_width,
            canvas_height,
            defaults: Style::default(),
            primitives: Vec::new(),
        }
    }

    pub fn find(&self, id: &str) -> Option<&Primitive> {
        self.primitives.iter().find(|p| p.id == id)
    }

    pub fn canvas_diagonal(&self) -> f64 {
        (self.canvas_width as f64).hypot(self.canvas_height as f64)
    }

    /// Canonical textual form; see [`parse_program`] for the grammar.
    pub fn to_source(&self) -> String {
        serializer::serialize_program(self)
    }

    /// Structural validation. Returns an empty list iff every type invariant
    /// holds and no primitive is fully degenerate.
    pub fn validate_consistency(&self) -> Vec<Violation> {
        validate_consistency(self)
    }
}

/// A single validation finding; violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// The primitive draws nothing by construction (zero-length segment,
    /// zero-span arc, ...).
    Degenerate { id: String, detail: String },
    /// A field is outside its allowed range or an id rule is broken.
    InvariantBreach { id: String, detail: String },
}

impl Violation {
    pub fn id(&self) -> &str {
        match self {
            Violation::Degenerate { id, .. } | Violation::InvariantBreach { id, .. } => id,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Degenerate { id, detail } => write!(f, "{id}: degenerate: {detail}"),
            Violation::InvariantBreach { id, detail } => write!(f, "{id}: {detail}"),
        }
    }
}

const DEGENERATE_EPS: f64 = 1e-6;

fn breach(id: &str, detail: impl Into<String>) -> Violation {
    Violation::InvariantBreach {
        id: id.to_string(),
        detail: detail.into(),
    }
}

fn degenerate(id: &str, detail: impl Into<String>) -> Violation {
    Violation::Degenerate {
        id: id.to_string(),
        detail: detail.into(),
    }
}

fn validate_style(id: &str, style: &Style, out: &mut Vec<Violation>) {
    if !(0.5..=20.0).contains(&style.stroke_width) || !style.stroke_width.is_finite() {
        out.push(breach(
            id,
            format!("stroke_width {} outside [0.5, 20]", style.stroke_width),
        ));
    }
}

fn validate_consistency(p: &Program) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.canvas_width == 0 || p.canvas_height == 0 {
        out.push(breach("canvas", "canvas dimensions must be >= 1"));
    }
    validate_style("defaults", &p.defaults, &mut out);

    let (lo_x, hi_x) = (-0.1 * p.canvas_width as f64, 1.1 * p.canvas_width as f64);
    let (lo_y, hi_y) = (-0.1 * p.canvas_height as f64, 1.1 * p.canvas_height as f64);
    let radius_cap = 8.0 * p.canvas_width.max(p.canvas_height) as f64;

    let mut seen = std::collections::HashSet::new();
    for prim in &p.primitives {
        let id = prim.id.as_str();
        if !seen.insert(id) {
            out.push(breach(id, "duplicate primitive id"));
        }
        validate_style(id, &prim.style, &mut out);
        for c in prim.shape.coords() {
            if !c.is_finite() {
                out.push(breach(id, "non-finite coordinate"));
            } else if c.x < lo_x || c.x > hi_x || c.y < lo_y || c.y > hi_y {
                out.push(breach(
                    id,
                    format!("coordinate ({:.2},{:.2}) outside canvas slack", c.x, c.y),
                ));
            }
        }
        match &prim.shape {
            Shape::Segment { p1, p2 } => {
                if p1.dist(p2) <= DEGENERATE_EPS {
                    out.push(degenerate(id, "zero length"));
                }
            }
            Shape::Circle { radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    out.push(breach(id, "radius > 0"));
                } else if *radius <= DEGENERATE_EPS {
                    out.push(degenerate(id, "zero radius"));
                } else if *radius > radius_cap {
                    out.push(breach(id, "radius exceeds canvas scale"));
                }
            }
            Shape::Arc {
                radius,
                start_deg,
                end_deg,
                ..
            } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    out.push(breach(id, "radius > 0"));
                } else if *radius > radius_cap {
                    out.push(breach(id, "radius exceeds canvas scale"));
                }
                for a in [start_deg, end_deg] {
                    if !(0.0..360.0).contains(a) {
                        out.push(breach(id, format!("angle {a} not normalized to [0, 360)")));
                    }
                }
                if (start_deg - end_deg).abs() <= DEGENERATE_EPS {
                    out.push(degenerate(id, "zero angular span"));
                }
            }
            Shape::Polyline { points } => {
                if points.len() < 2 {
                    out.push(breach(id, "polyline needs >= 2 points"));
                } else if points.windows(2).all(|w| w[0].dist(&w[1]) <= DEGENERATE_EPS) {
                    out.push(degenerate(id, "zero length"));
                }
            }
            Shape::Label { text, .. } => {
                if text.is_empty() {
                    out.push(degenerate(id, "empty label text"));
                }
            }
            Shape::RightAngleMark {
                arm1, arm2, size, ..
            } => {
                if *size <= 0.0 || !size.is_finite() {
                    out.push(breach(id, "size > 0"));
                }
                if arm1.x.hypot(arm1.y) <= DEGENERATE_EPS || arm2.x.hypot(arm2.y) <= DEGENERATE_EPS
                {
                    out.push(breach(id, "arm direction must be nonzero"));
                }
            }
            Shape::TickMark { direction, .. } => {
                if direction.x.hypot(direction.y) <= DEGENERATE_EPS {
                    out.push(breach(id, "direction must be nonzero"));
                }
            }
            Shape::PointMark { .. } => {}
        }
    }
    out
}

/// Normalize an angle in degrees to [0, 360).
pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: &str, p1: (f64, f64), p2: (f64, f64)) -> Primitive {
        Primitive {
            id: id.to_string(),
            shape: Shape::Segment {
                p1: Point2D::new(p1.0, p1.1),
                p2: Point2D::new(p2.0, p2.1),
            },
            style: Style::default(),
        }
    }

    #[test]
    fn zero_length_segment_is_degenerate() {
        let mut p = Program::default();
        p.primitives.push(seg("s1", (5.0, 5.0), (5.0, 5.0)));
        let v = p.validate_consistency();
        assert_eq!(
            v,
            vec![Violation::Degenerate {
                id: "s1".into(),
                detail: "zero length".into()
            }]
        );
    }

    #[test]
    fn negative_radius_is_a_breach() {
        let mut p = Program::default();
        p.primitives.push(Primitive {
            id: "c1".into(),
            shape: Shape::Circle {
                center: Point2D::new(500.0, 500.0),
                radius: -3.0,
            },
            style: Style::default(),
        });
        let v = p.validate_consistency();
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::InvariantBreach { id, detail }
            if id == "c1" && detail.contains("radius > 0")));
    }

    #[test]
    fn valid_square_has_no_violations() {
        let mut p = Program::default();
        p.primitives.push(seg("s1", (200.0, 200.0), (800.0, 200.0)));
        p.primitives.push(seg("s2", (800.0, 200.0), (800.0, 800.0)));
        p.primitives.push(seg("s3", (800.0, 800.0), (200.0, 800.0)));
        p.primitives.push(seg("s4", (200.0, 800.0), (200.0, 200.0)));
        assert!(p.validate_consistency().is_empty());
    }

    #[test]
    fn coordinates_beyond_slack_are_flagged() {
        let mut p = Program::default();
        p.primitives.push(seg("s1", (-200.0, 0.0), (10.0, 10.0)));
        let v = p.validate_consistency();
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::InvariantBreach { .. }));
        // -100 is exactly on the -0.1*W slack boundary and allowed.
        let mut q = Program::default();
        q.primitives.push(seg("s1", (-100.0, 0.0), (10.0, 10.0)));
        assert!(q.validate_consistency().is_empty());
    }

    #[test]
    fn duplicate_ids_are_flagged() {
        let mut p = Program::default();
        p.primitives.push(seg("s1", (0.0, 0.0), (10.0, 0.0)));
        p.primitives.push(seg("s1", (0.0, 5.0), (10.0, 5.0)));
        let v = p.validate_consistency();
        assert!(v.iter().any(|x| matches!(x, Violation::InvariantBreach { detail, .. }
            if detail.contains("duplicate"))));
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_deg(370.0), 10.0);
        assert_eq!(normalize_deg(-10.0), 350.0);
        assert_eq!(normalize_deg(360.0), 0.0);
        assert_eq!(normalize_deg(0.0), 0.0);
    }
}

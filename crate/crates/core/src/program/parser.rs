//! Line-oriented parser for the `.geo` dialect.
//!
//! ```text
//! program    := canvas_stmt stmt*
//! canvas     := "canvas" INT INT
//! stmt       := point | segment | circle | arc | polyline | label
//!             | rightangle | tick | style
//! style      := "style" ("width" REAL | "color" INT INT INT
//!             | "dash" ("solid"|"dashed"))+
//! point      := "point" ID REAL REAL
//! segment    := "segment" ID endpoint endpoint
//! circle     := "circle" ID endpoint REAL
//! arc        := "arc" ID endpoint REAL REAL REAL        # radius start end
//! polyline   := "polyline" ID endpoint endpoint+
//! label      := "label" ID STRING endpoint ["offset" vec]
//! rightangle := "rightangle" ID endpoint vec vec REAL   # vertex arms size
//! tick       := "tick" ID endpoint vec                  # midpoint direction
//! endpoint   := ID | vec | ID ":" vec                   # one token, no spaces
//! vec        := "(" REAL "," REAL ")"
//! ```
//!
//! `#` starts a comment; blank lines are ignored. An endpoint written as a
//! bare `ID` must reference an earlier `point` declaration; the `NAME:(x,y)`
//! form is an annotated literal whose name is not required to resolve.
//! A `style` statement applies to all subsequent statements.

use super::{normalize_deg, Dash, Point2D, Primitive, Program, Shape, Style};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate id `{id}` at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("dangling reference `{id}` at line {line}")]
    DanglingReference { id: String, line: usize },
}

struct Token {
    text: String,
    column: usize, // 1-based character column of the token start
}

/// Split a line into whitespace-delimited tokens, keeping quoted strings
/// intact and stripping `#` comments.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        if chars[i] == '#' {
            break;
        }
        let start = i;
        if chars[i] == '"' {
            let mut text = String::from("\"");
            i += 1;
            let mut closed = false;
            while i < chars.len() {
                let c = chars[i];
                if c == '\\' && i + 1 < chars.len() {
                    text.push(c);
                    text.push(chars[i + 1]);
                    i += 2;
                    continue;
                }
                text.push(c);
                i += 1;
                if c == '"' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(ParseError::Syntax {
                    line: line_no,
                    column: start + 1,
                    message: "unterminated string".into(),
                });
            }
            tokens.push(Token {
                text,
                column: start + 1,
            });
        } else {
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '#' {
                i += 1;
            }
            tokens.push(Token {
                text: chars[start..i].iter().collect(),
                column: start + 1,
            });
        }
    }
    Ok(tokens)
}

struct LineCursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    len_cols: usize,
}

impl<'a> LineCursor<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err(self.len_cols + 1, format!("expected {what}"))),
        }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if let Some(t) = self.peek() {
            return Err(self.err(t.column, format!("unexpected trailing token `{}`", t.text)));
        }
        Ok(())
    }

    fn real(&mut self, what: &str) -> Result<f64, ParseError> {
        let t = self.next(what)?;
        t.text
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(t.column, format!("expected {what}, got `{}`", t.text)))
    }

    fn int(&mut self, what: &str) -> Result<i64, ParseError> {
        let t = self.next(what)?;
        t.text
            .parse::<i64>()
            .map_err(|_| self.err(t.column, format!("expected {what}, got `{}`", t.text)))
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, ParseError> {
        let t = self.next(what)?;
        if t.text.starts_with('(') || t.text.starts_with('"') {
            return Err(self.err(t.column, format!("expected {what}, got `{}`", t.text)));
        }
        Ok(&t.text)
    }
}

fn parse_vec_literal(text: &str) -> Option<Point2D> {
    let inner = text.strip_prefix('(')?.strip_suffix(')')?;
    let (xs, ys) = inner.split_once(',')?;
    let x = xs.trim().parse::<f64>().ok()?;
    let y = ys.trim().parse::<f64>().ok()?;
    if x.is_finite() && y.is_finite() {
        Some(Point2D::new(x, y))
    } else {
        None
    }
}

fn unquote(text: &str) -> Option<String> {
    let inner = text.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

struct ParserState {
    points: std::collections::HashMap<String, Point2D>,
    ids: std::collections::HashSet<String>,
}

impl ParserState {
    /// Resolve an endpoint token: `(x,y)`, `NAME` or `NAME:(x,y)`.
    fn endpoint(&self, cur: &LineCursor, t: &Token) -> Result<Point2D, ParseError> {
        if t.text.starts_with('(') {
            return parse_vec_literal(&t.text)
                .ok_or_else(|| cur.err(t.column, format!("malformed coordinate `{}`", t.text)));
        }
        if let Some((_name, lit)) = t.text.split_once(':') {
            return parse_vec_literal(lit).ok_or_else(|| {
                cur.err(t.column, format!("malformed annotated coordinate `{}`", t.text))
            });
        }
        match self.points.get(&t.text) {
            Some(p) => Ok(*p),
            None => Err(ParseError::DanglingReference {
                id: t.text.clone(),
                line: cur.line,
            }),
        }
    }

    fn claim_id(&mut self, id: &str, line: usize) -> Result<(), ParseError> {
        if !self.ids.insert(id.to_string()) {
            return Err(ParseError::DuplicateId {
                id: id.to_string(),
                line,
            });
        }
        Ok(())
    }
}

/// Parse DSL source into a grounded [`Program`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut program: Option<Program> = None;
    let mut state = ParserState {
        points: std::collections::HashMap::new(),
        ids: std::collections::HashSet::new(),
    };
    let mut style = Style::default();
    let mut saw_primitive = false;
    let mut saw_style = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(raw, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let mut cur = LineCursor {
            tokens: &tokens,
            pos: 0,
            line: line_no,
            len_cols: raw.chars().count(),
        };
        let kw = cur.next("statement")?;

        let program = match (&mut program, kw.text.as_str()) {
            (None, "canvas") => {
                let w = cur.int("canvas width")?;
                let h = cur.int("canvas height")?;
                cur.finish()?;
                if w < 1 || h < 1 {
                    return Err(cur.err(kw.column, "canvas dimensions must be >= 1"));
                }
                program = Some(Program::new(w as u32, h as u32));
                continue;
            }
            (None, _) => {
                return Err(cur.err(kw.column, "first statement must be `canvas W H`"));
            }
            (Some(_), "canvas") => {
                return Err(cur.err(kw.column, "duplicate canvas statement"));
            }
            (Some(p), _) => p,
        };

        match kw.text.as_str() {
            "style" => {
                if cur.peek().is_none() {
                    return Err(cur.err(kw.column, "style statement needs at least one clause"));
                }
                while let Some(t) = cur.peek() {
                    match t.text.as_str() {
                        "width" => {
                            cur.next("width")?;
                            style.stroke_width = cur.real("stroke width")?;
                        }
                        "color" => {
                            cur.next("color")?;
                            let mut rgb = [0u8; 3];
                            for c in &mut rgb {
                                let v = cur.int("color channel")?;
                                if !(0..=255).contains(&v) {
                                    return Err(
                                        cur.err(t.column, "color channel outside [0, 255]")
                                    );
                                }
                                *c = v as u8;
                            }
                            style.color = rgb;
                        }
                        "dash" => {
                            cur.next("dash")?;
                            let d = cur.ident("dash kind")?;
                            style.dash = match d {
                                "solid" => Dash::Solid,
                                "dashed" => Dash::Dashed,
                                other => {
                                    return Err(cur.err(
                                        t.column,
                                        format!("unknown dash kind `{other}`"),
                                    ))
                                }
                            };
                        }
                        other => {
                            return Err(
                                cur.err(t.column, format!("unknown style clause `{other}`"))
                            )
                        }
                    }
                }
                // A style line that precedes every primitive redefines the
                // program defaults, so canonical output round-trips.
                if !saw_primitive && !saw_style {
                    program.defaults = style;
                }
                saw_style = true;
                continue;
            }
            "point" => {
                let id = cur.ident("point id")?.to_string();
                let x = cur.real("x")?;
                let y = cur.real("y")?;
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                state.points.insert(id.clone(), Point2D::new(x, y));
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::PointMark {
                        pos: Point2D::new(x, y),
                    },
                    style,
                });
            }
            "segment" => {
                let id = cur.ident("segment id")?.to_string();
                let t1 = cur.next("endpoint")?;
                let p1 = state.endpoint(&cur, t1)?;
                let t2 = cur.next("endpoint")?;
                let p2 = state.endpoint(&cur, t2)?;
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::Segment { p1, p2 },
                    style,
                });
            }
            "circle" => {
                let id = cur.ident("circle id")?.to_string();
                let t = cur.next("center")?;
                let center = state.endpoint(&cur, t)?;
                let radius = cur.real("radius")?;
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::Circle { center, radius },
                    style,
                });
            }
            "arc" => {
                let id = cur.ident("arc id")?.to_string();
                let t = cur.next("center")?;
                let center = state.endpoint(&cur, t)?;
                let radius = cur.real("radius")?;
                let start_deg = normalize_deg(cur.real("start angle")?);
                let end_deg = normalize_deg(cur.real("end angle")?);
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::Arc {
                        center,
                        radius,
                        start_deg,
                        end_deg,
                    },
                    style,
                });
            }
            "polyline" => {
                let id = cur.ident("polyline id")?.to_string();
                let mut points = Vec::new();
                while let Some(t) = cur.peek() {
                    let t = t;
                    cur.next("point")?;
                    points.push(state.endpoint(&cur, t)?);
                }
                if points.len() < 2 {
                    return Err(cur.err(kw.column, "polyline needs >= 2 points"));
                }
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::Polyline { points },
                    style,
                });
            }
            "label" => {
                let id = cur.ident("label id")?.to_string();
                let t = cur.next("label text")?;
                let text_s = unquote(&t.text)
                    .ok_or_else(|| cur.err(t.column, "label text must be double-quoted"))?;
                let ta = cur.next("anchor")?;
                let anchor = state.endpoint(&cur, ta)?;
                let mut offset = Point2D::new(0.0, 0.0);
                if let Some(t) = cur.peek() {
                    if t.text == "offset" {
                        cur.next("offset")?;
                        let tv = cur.next("offset vector")?;
                        offset = parse_vec_literal(&tv.text).ok_or_else(|| {
                            cur.err(tv.column, format!("malformed offset `{}`", tv.text))
                        })?;
                    }
                }
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::Label {
                        text: text_s,
                        anchor,
                        offset,
                    },
                    style,
                });
            }
            "rightangle" => {
                let id = cur.ident("rightangle id")?.to_string();
                let tv = cur.next("vertex")?;
                let vertex = state.endpoint(&cur, tv)?;
                let t1 = cur.next("arm direction")?;
                let arm1 = parse_vec_literal(&t1.text)
                    .ok_or_else(|| cur.err(t1.column, "malformed arm direction"))?;
                let t2 = cur.next("arm direction")?;
                let arm2 = parse_vec_literal(&t2.text)
                    .ok_or_else(|| cur.err(t2.column, "malformed arm direction"))?;
                let size = cur.real("size")?;
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::RightAngleMark {
                        vertex,
                        arm1,
                        arm2,
                        size,
                    },
                    style,
                });
            }
            "tick" => {
                let id = cur.ident("tick id")?.to_string();
                let tm = cur.next("midpoint")?;
                let midpoint = state.endpoint(&cur, tm)?;
                let td = cur.next("direction")?;
                let direction = parse_vec_literal(&td.text)
                    .ok_or_else(|| cur.err(td.column, "malformed direction"))?;
                cur.finish()?;
                state.claim_id(&id, line_no)?;
                program.primitives.push(Primitive {
                    id,
                    shape: Shape::TickMark {
                        midpoint,
                        direction,
                    },
                    style,
                });
            }
            other => {
                return Err(cur.err(kw.column, format!("unknown statement `{other}`")));
            }
        }
        saw_primitive = true;
    }

    program.ok_or_else(|| ParseError::Syntax {
        line: 1,
        column: 1,
        message: "empty input: expected `canvas W H`".into(),
    })
}

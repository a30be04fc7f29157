//! The generate–render–inspect–correct loop: synthesize an initial program
//! from the skeleton, then iteratively repair it. Correction is gradient
//! free: structural edits (append missing structure, prune hallucinated
//! statements) plus axis-aligned pattern search on drifted coordinates,
//! each candidate scored by the weighted objective.

use crate::agent::{parse_agent_program, render_prompt, AgentGateway, AgentRequest, AgentRole};
use crate::edge::extract_edge_map;
use crate::fit::{fit_circle, principal_axes};
use crate::metrics::{measure, standardize, MetricBundle, ObjectiveConfig, ObjectiveEval};
use crate::morph::dilate_square;
use crate::program::{Point2D, Primitive, Program, Shape, Style};
use crate::raster::Raster;
use crate::render::render;
use crate::skeleton::GeoSkeleton;
use crate::vep::{attribute_regions, project_errors, DiffReport, RegionClass, VepConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefinerMode {
    Deterministic,
    Agent,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Convergence threshold on the Hausdorff distance, in pixels.
    pub epsilon_hd: f64,
    pub max_iterations: u32,
    pub refiner_mode: RefinerMode,
    pub objective: ObjectiveConfig,
    /// Initial pattern-search step, in pixels.
    pub step_init: f64,
    /// The search stops once the step falls below this.
    pub step_min: f64,
    /// Two consecutive objective improvements below this end the loop.
    pub stall_epsilon: f64,
    pub vep: VepConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            epsilon_hd: 5.0,
            max_iterations: 10,
            refiner_mode: RefinerMode::Deterministic,
            objective: ObjectiveConfig::default(),
            step_init: 8.0,
            step_min: 0.5,
            stall_epsilon: 1e-6,
            vep: VepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: u32,
    pub cd: f64,
    pub hd: f64,
    pub q: f64,
}

/// Loop state after the final iteration.
#[derive(Debug, Clone)]
pub struct LoopState {
    pub iteration: u32,
    pub program: Program,
    pub metrics: MetricBundle,
    pub report: DiffReport,
    pub best_program: Program,
    pub best_q: f64,
    pub history: Vec<IterationRecord>,
    /// Objective evaluations spent inside pattern search.
    pub probe_evals: usize,
    pub events: Vec<String>,
    /// Diff overlays per iteration, for archiving.
    pub diff_images: Vec<Raster>,
}

/// Everything the end-to-end reconstruction needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub skeleton: crate::skeleton::SkeletonConfig,
    pub loop_cfg: LoopConfig,
}

/// Full reconstruction of one observation: build the skeleton, run the
/// loop, return the winning program with its loop state and the skeleton.
pub fn reconstruct(
    obs: &Raster,
    text: Option<&str>,
    cfg: &PipelineConfig,
    agent: Option<&AgentGateway>,
) -> (Program, LoopState, GeoSkeleton) {
    let obs = standardize(obs);
    let skel = crate::skeleton::build_skeleton(&obs, text, &cfg.skeleton);
    let (best, state) = run_loop_with_agent(&obs, text, &skel, &cfg.loop_cfg, agent);
    (best, state, skel)
}

/// Deterministic initial synthesis: one segment per fitted line hypothesis
/// with endpoints snapped to nearby verified anchors, one circle per circle
/// hypothesis, and a point mark per structural anchor.
pub fn synthesize_initial(skel: &GeoSkeleton, _text: Option<&str>) -> Program {
    let mut p = Program::default();
    let style_for = |width: f64| Style {
        stroke_width: width.clamp(1.0, 20.0),
        ..Style::default()
    };
    let snap = |pt: Point2D| -> Point2D {
        let mut best: Option<(f64, Point2D)> = None;
        for a in &skel.anchors {
            let ap = a.anchor.pos();
            let d = ap.dist(&pt);
            if d <= SNAP_RADIUS && best.map(|(bd, _)| d < bd).unwrap_or(true) {
                best = Some((d, ap));
            }
        }
        best.map(|(_, p)| p).unwrap_or(pt)
    };
    for seg in &skel.segments {
        p.primitives.push(Primitive {
            id: seg.id.clone(),
            shape: Shape::Segment {
                p1: snap(seg.p1),
                p2: snap(seg.p2),
            },
            style: style_for(seg.width),
        });
    }
    for c in &skel.circles {
        p.primitives.push(Primitive {
            id: c.id.clone(),
            shape: Shape::Circle {
                center: c.center,
                radius: c.radius,
            },
            style: style_for(c.width),
        });
    }
    for a in &skel.anchors {
        if matches!(
            a.anchor.kind,
            crate::anchor::AnchorKind::Corner | crate::anchor::AnchorKind::Junction
        ) {
            p.primitives.push(Primitive {
                id: format!("p_{}", a.id),
                shape: Shape::PointMark {
                    pos: a.anchor.pos(),
                },
                style: Style::default(),
            });
        }
    }
    p
}

const SNAP_RADIUS: f64 = 5.0;
/// A hallucinated region must cover this share of a primitive's stroke
/// before the primitive is pruned.
const PRUNE_COVERAGE: f64 = 0.6;
/// Minimum cloud elongation for a missing region to be completed with a
/// segment.
const COMPLETION_ELONGATION: f64 = 3.0;
/// Probe ceiling per refine call.
const PROBE_BUDGET: usize = 150;

/// Run the full loop: synthesize, then refine until the Hausdorff distance
/// drops below epsilon, the iteration limit is hit, or progress stalls.
/// Returns the best program encountered (by objective), never a worse final
/// iterate.
pub fn run_loop(
    obs: &Raster,
    text: Option<&str>,
    skel: &GeoSkeleton,
    cfg: &LoopConfig,
) -> (Program, LoopState) {
    run_loop_with_agent(obs, text, skel, cfg, None)
}

pub fn run_loop_with_agent(
    obs: &Raster,
    text: Option<&str>,
    skel: &GeoSkeleton,
    cfg: &LoopConfig,
    agent: Option<&AgentGateway>,
) -> (Program, LoopState) {
    let obs = standardize(obs);
    let mut events = Vec::new();
    let initial = initial_program(&obs, text, skel, cfg, agent, &mut events);
    let (program, mut state) = drive_loop(initial, &obs, skel, cfg, agent);
    let mut all_events = events;
    all_events.append(&mut state.events);
    state.events = all_events;
    (program, state)
}

/// Run the loop from a caller-supplied starting program (skipping
/// synthesis).
pub fn run_loop_seeded(
    initial: Program,
    obs: &Raster,
    skel: &GeoSkeleton,
    cfg: &LoopConfig,
) -> (Program, LoopState) {
    let obs = standardize(obs);
    drive_loop(initial, &obs, skel, cfg, None)
}

fn initial_program(
    obs: &Raster,
    text: Option<&str>,
    skel: &GeoSkeleton,
    cfg: &LoopConfig,
    agent: Option<&AgentGateway>,
    events: &mut Vec<String>,
) -> Program {
    if matches!(cfg.refiner_mode, RefinerMode::Agent | RefinerMode::Hybrid) {
        if let Some(gw) = agent {
            match agent_generate(gw, obs, text, skel) {
                Ok(p) => {
                    events.push("initial synthesis from agent".into());
                    return p;
                }
                Err(e) => {
                    events.push(format!("agent synthesis failed, deterministic fallback: {e}"));
                }
            }
        } else {
            events.push("agent mode without gateway, deterministic synthesis".into());
        }
    }
    synthesize_initial(skel, text)
}

fn agent_generate(
    gw: &AgentGateway,
    obs: &Raster,
    text: Option<&str>,
    skel: &GeoSkeleton,
) -> Result<Program, String> {
    let prompt = render_prompt(
        AgentRole::Generate,
        &[
            ("TEXT", text.unwrap_or("(none)")),
            ("SKELETON_JSON", &skel.to_json()),
        ],
    );
    let mut req = AgentRequest::new(AgentRole::Generate, prompt);
    if let Ok(png) = png_bytes(obs) {
        req = req.with_image(png);
    }
    let resp = gw.complete(&req).map_err(|e| e.to_string())?;
    accept_candidate(&resp.text)
}

/// An agent reply enters the loop only if it parses, validates, and renders.
fn accept_candidate(reply: &str) -> Result<Program, String> {
    let program = parse_agent_program(reply).map_err(|e| e.to_string())?;
    let violations = program.validate_consistency();
    if !violations.is_empty() {
        return Err(format!("candidate failed validation: {} violations", violations.len()));
    }
    render(&program).map_err(|e| e.to_string())?;
    Ok(program)
}

fn png_bytes(r: &Raster) -> Result<Vec<u8>, String> {
    let dir = std::env::temp_dir().join(format!("geofig-{}.png", std::process::id()));
    r.save_png(&dir).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&dir).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&dir);
    Ok(bytes)
}

fn drive_loop(
    initial: Program,
    obs: &Raster,
    skel: &GeoSkeleton,
    cfg: &LoopConfig,
    agent: Option<&AgentGateway>,
) -> (Program, LoopState) {
    assert!(cfg.epsilon_hd > 0.0, "epsilon_hd must be positive");
    assert!(cfg.max_iterations >= 1, "max_iterations must be >= 1");
    assert!(cfg.step_min <= cfg.step_init, "step_min must be <= step_init");

    let eval = ObjectiveEval::new(obs, skel, cfg.objective);
    let mut vep_cfg = cfg.vep;
    vep_cfg.edge_threshold = cfg.objective.edge_threshold;

    let mut program = initial;
    let mut state = LoopState {
        iteration: 0,
        program: program.clone(),
        metrics: MetricBundle {
            cd: 0.0,
            hd: 0.0,
            ssim: 0.0,
            edge_counts: (0, 0),
        },
        report: DiffReport {
            iteration: 0,
            metrics: MetricBundle {
                cd: 0.0,
                hd: 0.0,
                ssim: 0.0,
                edge_counts: (0, 0),
            },
            regions: Vec::new(),
            diff_image: Raster::white(1, 1),
        },
        best_program: program.clone(),
        best_q: f64::INFINITY,
        history: Vec::new(),
        probe_evals: 0,
        events: Vec::new(),
        diff_images: Vec::new(),
    };

    for t in 0..=cfg.max_iterations {
        let rec = match render(&program) {
            Ok(r) => r,
            Err(e) => {
                state.events.push(format!("render failed at t={t}: {e}"));
                break;
            }
        };
        let metrics = match measure(&rec, obs, cfg.objective.edge_threshold) {
            Ok(m) => m,
            Err(e) => {
                state.events.push(format!("metrics failed at t={t}: {e}"));
                break;
            }
        };
        let report = match project_errors(&rec, obs, metrics, t, &vep_cfg) {
            Ok(r) => attribute_regions(r, &program, &vep_cfg),
            Err(e) => {
                state.events.push(format!("projection failed at t={t}: {e}"));
                break;
            }
        };
        let q = eval.evaluate(&program).q;
        state.history.push(IterationRecord {
            t,
            cd: metrics.cd,
            hd: metrics.hd,
            q,
        });
        if q < state.best_q {
            state.best_q = q;
            state.best_program = program.clone();
        }
        state.iteration = t;
        state.metrics = metrics;
        state.diff_images.push(report.diff_image.clone());
        state.report = report;
        state.program = program.clone();

        if metrics.hd <= cfg.epsilon_hd {
            state.events.push(format!("converged at t={t}: hd {:.2}", metrics.hd));
            break;
        }
        if t == cfg.max_iterations {
            state.events.push("iteration limit reached".into());
            break;
        }
        if stalled(&state.history, cfg.stall_epsilon) {
            state.events.push(format!("stalled at t={t}"));
            break;
        }
        program = refine_step(&mut state, obs, skel, cfg, agent, &eval);
    }

    (state.best_program.clone(), state)
}

/// Two consecutive improvements below the stall threshold.
fn stalled(history: &[IterationRecord], eps: f64) -> bool {
    if history.len() < 3 {
        return false;
    }
    let n = history.len();
    let imp1 = history[n - 2].q - history[n - 1].q;
    let imp2 = history[n - 3].q - history[n - 2].q;
    imp1 < eps && imp2 < eps
}

/// One correction step. At most one structural edit (completion or pruning)
/// per call; coordinate fine-tuning may touch every drifted primitive; style
/// fixes follow. In agent or hybrid mode the agent proposes first and the
/// deterministic actions are the fallback.
pub fn refine_step(
    state: &mut LoopState,
    obs: &Raster,
    skel: &GeoSkeleton,
    cfg: &LoopConfig,
    agent: Option<&AgentGateway>,
    eval: &ObjectiveEval,
) -> Program {
    if matches!(cfg.refiner_mode, RefinerMode::Agent | RefinerMode::Hybrid) {
        if let Some(gw) = agent {
            match agent_refine(gw, state, obs, skel) {
                Ok(p) => {
                    state.events.push(format!("t={}: agent correction", state.iteration));
                    return p;
                }
                Err(e) => state.events.push(format!(
                    "t={}: agent correction failed, deterministic fallback: {e}",
                    state.iteration
                )),
            }
        }
    }
    deterministic_refine(state, obs, cfg, eval)
}

fn agent_refine(
    gw: &AgentGateway,
    state: &LoopState,
    obs: &Raster,
    skel: &GeoSkeleton,
) -> Result<Program, String> {
    let prompt = render_prompt(
        AgentRole::Refine,
        &[
            ("DSL", &state.program.to_source()),
            ("DIFF_JSON", &state.report.to_json()),
            ("SKELETON_JSON", &skel.to_json()),
        ],
    );
    let mut req = AgentRequest::new(AgentRole::Refine, prompt);
    if let Ok(png) = png_bytes(&state.report.diff_image) {
        req = req.with_image(png);
    }
    if let Ok(png) = png_bytes(obs) {
        req = req.with_image(png);
    }
    let resp = gw.complete(&req).map_err(|e| e.to_string())?;
    accept_candidate(&resp.text)
}

fn deterministic_refine(
    state: &mut LoopState,
    obs: &Raster,
    cfg: &LoopConfig,
    eval: &ObjectiveEval,
) -> Program {
    let mut program = state.program.clone();
    let t = state.iteration;

    // One structural action per iteration: completion first, else pruning.
    let mut structurally_edited = false;
    if let Some(new_prim) = completion_candidate(state, &program) {
        let mut candidate = program.clone();
        candidate.primitives.push(new_prim.clone());
        if candidate.validate_consistency().is_empty() {
            state
                .events
                .push(format!("t={t}: completion appended {}", new_prim.id));
            program = candidate;
            structurally_edited = true;
        }
    }
    if !structurally_edited {
        if let Some(victim) = pruning_candidate(state, &program) {
            let mut candidate = program.clone();
            candidate.primitives.retain(|p| p.id != victim);
            // Pruning must not increase the missing pixel count.
            let before = missing_count(&state.program, obs, &cfg.vep);
            let after = missing_count(&candidate, obs, &cfg.vep);
            if after <= before {
                state.events.push(format!("t={t}: pruned {victim}"));
                program = candidate;
            } else {
                state
                    .events
                    .push(format!("t={t}: prune of {victim} reverted (uncovers structure)"));
            }
        }
    }

    // Coordinate fine-tuning on every primitive implicated by a drift-like
    // region, largest region first.
    let mut tuned: Vec<String> = Vec::new();
    let drift_targets: Vec<(String, Point2D)> = state
        .report
        .regions
        .iter()
        .filter(|r| {
            matches!(
                r.classification,
                RegionClass::Drift | RegionClass::Missing | RegionClass::Hallucination
            )
        })
        .filter_map(|r| {
            r.nearest_primitive_id
                .as_ref()
                .map(|id| (id.clone(), r.centroid))
        })
        .collect();
    for (prim_id, centroid) in drift_targets {
        if tuned.contains(&prim_id) || program.find(&prim_id).is_none() {
            continue;
        }
        let improved = pattern_search(&mut program, &prim_id, centroid, cfg, eval, state);
        if improved {
            state.events.push(format!("t={t}: fine-tuned {prim_id}"));
        }
        tuned.push(prim_id);
    }

    // Style correction: adopt the observed stroke width.
    for region in &state.report.regions {
        if region.classification != RegionClass::StyleMismatch {
            continue;
        }
        let (Some(id), Some((_, obs_width))) =
            (region.nearest_primitive_id.as_ref(), region.stroke_widths)
        else {
            continue;
        };
        if let Some(prim) = program.primitives.iter_mut().find(|p| &p.id == id) {
            let new_width = obs_width.clamp(0.5, 20.0);
            if (prim.style.stroke_width - new_width).abs() > 1e-9 {
                prim.style.stroke_width = new_width;
                state
                    .events
                    .push(format!("t={t}: stroke width of {id} set to {new_width:.1}"));
            }
        }
    }

    if program.validate_consistency().is_empty() {
        program
    } else {
        state.events.push(format!("t={t}: refine produced invalid program, reverted"));
        state.program.clone()
    }
}

/// Missing structure with no nearby primitive becomes a new statement:
/// a segment along the region's principal axis, or a circle when the region
/// is ring-shaped.
fn completion_candidate(state: &LoopState, program: &Program) -> Option<Primitive> {
    let region = state
        .report
        .regions
        .iter()
        .filter(|r| r.classification == RegionClass::Missing)
        .filter(|r| r.nearest_primitive_id.is_none())
        .max_by_key(|r| r.pixel_count)?;
    let fresh_id = |prefix: &str| -> String {
        let mut n = 0;
        loop {
            let id = format!("{prefix}{n}");
            if program.find(&id).is_none() {
                return id;
            }
            n += 1;
        }
    };
    let axes = principal_axes(&region.miss_pixels)?;
    if axes.elongation() >= COMPLETION_ELONGATION {
        let c = axes.centroid;
        let d = axes.dir;
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        for &(x, y) in &region.miss_pixels {
            let t = (x as f64 - c.x) * d.x + (y as f64 - c.y) * d.y;
            t_min = t_min.min(t);
            t_max = t_max.max(t);
        }
        let width = (12.0 * axes.lambda.1).sqrt().clamp(1.0, 6.0);
        return Some(Primitive {
            id: fresh_id("g"),
            shape: Shape::Segment {
                p1: Point2D::new(c.x + t_min * d.x, c.y + t_min * d.y),
                p2: Point2D::new(c.x + t_max * d.x, c.y + t_max * d.y),
            },
            style: Style {
                stroke_width: width,
                ..Style::default()
            },
        });
    }
    if let Some(circle) = fit_circle(&region.miss_pixels) {
        if circle.max_deviation <= 3.0 && circle.radius >= 5.0 {
            return Some(Primitive {
                id: fresh_id("g"),
                shape: Shape::Circle {
                    center: circle.center,
                    radius: circle.radius,
                },
                style: Style::default(),
            });
        }
    }
    None
}

/// A hallucination region covering most of a primitive's stroke names that
/// primitive for removal.
fn pruning_candidate(state: &LoopState, program: &Program) -> Option<String> {
    let (w, h) = state.report.diff_image.dimensions();
    let mut best: Option<(usize, String)> = None;
    for region in &state.report.regions {
        if region.classification != RegionClass::Hallucination {
            continue;
        }
        let Some(id) = region.nearest_primitive_id.as_ref() else {
            continue;
        };
        let Some(prim) = program.find(id) else { continue };
        let stroke = crate::render::primitive_coverage(prim, w, h);
        if stroke.is_empty() {
            continue;
        }
        let stroke_set: std::collections::HashSet<(u32, u32)> = stroke.iter().copied().collect();
        let overlap = region
            .pixels
            .iter()
            .filter(|p| stroke_set.contains(p))
            .count();
        if overlap as f64 >= PRUNE_COVERAGE * stroke_set.len() as f64 {
            let key = region.pixel_count;
            if best.as_ref().map(|(bk, _)| key > *bk).unwrap_or(true) {
                best = Some((key, id.clone()));
            }
        }
    }
    best.map(|(_, id)| id)
}

/// Count observed edge pixels not explained by the rendering.
fn missing_count(program: &Program, obs: &Raster, vep: &VepConfig) -> usize {
    let Ok(rec) = render(program) else {
        return usize::MAX;
    };
    let e_rec = extract_edge_map(&rec, vep.edge_threshold);
    let e_obs = extract_edge_map(obs, vep.edge_threshold);
    let rec_d = dilate_square(&e_rec, vep.match_radius);
    let mut n = 0;
    for (x, y) in e_obs.points() {
        if !rec_d.get(x, y) {
            n += 1;
        }
    }
    n
}

/// The tunable coordinates of one primitive, chosen by proximity to the
/// discrepancy.
enum ParamTarget {
    SegmentEnd(bool),
    CircleParams,
    ArcParams,
    PolyVertex(usize),
    Position,
}

fn choose_target(shape: &Shape, near: Point2D) -> Option<ParamTarget> {
    match shape {
        Shape::Segment { p1, p2 } => Some(ParamTarget::SegmentEnd(near.dist(p2) < near.dist(p1))),
        Shape::Circle { .. } => Some(ParamTarget::CircleParams),
        Shape::Arc { .. } => Some(ParamTarget::ArcParams),
        Shape::Polyline { points } => {
            let idx = points
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    near.dist(a)
                        .partial_cmp(&near.dist(b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .map(|(i, _)| i)?;
            Some(ParamTarget::PolyVertex(idx))
        }
        Shape::PointMark { .. }
        | Shape::Label { .. }
        | Shape::RightAngleMark { .. }
        | Shape::TickMark { .. } => Some(ParamTarget::Position),
    }
}

fn nudge(shape: &mut Shape, target: &ParamTarget, axis: usize, delta: f64) {
    let bump = |p: &mut Point2D, axis: usize, delta: f64| {
        if axis == 0 {
            p.x += delta;
        } else {
            p.y += delta;
        }
    };
    match (shape, target) {
        (Shape::Segment { p1, p2 }, ParamTarget::SegmentEnd(second)) => {
            bump(if *second { p2 } else { p1 }, axis, delta)
        }
        (Shape::Circle { center, radius }, ParamTarget::CircleParams)
        | (Shape::Arc { center, radius, .. }, ParamTarget::ArcParams) => match axis {
            0 | 1 => bump(center, axis, delta),
            _ => *radius += delta,
        },
        (Shape::Polyline { points }, ParamTarget::PolyVertex(i)) => {
            if let Some(p) = points.get_mut(*i) {
                bump(p, axis, delta)
            }
        }
        (Shape::PointMark { pos }, ParamTarget::Position) => bump(pos, axis, delta),
        (Shape::Label { anchor, .. }, ParamTarget::Position) => bump(anchor, axis, delta),
        (Shape::RightAngleMark { vertex, .. }, ParamTarget::Position) => bump(vertex, axis, delta),
        (Shape::TickMark { midpoint, .. }, ParamTarget::Position) => bump(midpoint, axis, delta),
        _ => {}
    }
}

fn axis_count(target: &ParamTarget) -> usize {
    match target {
        ParamTarget::CircleParams | ParamTarget::ArcParams => 3,
        _ => 2,
    }
}

/// Axis-aligned pattern search on one primitive's coordinates: probe +/- the
/// current step on each axis, accept the best strictly improving candidate,
/// halve the step when none improves.
fn pattern_search(
    program: &mut Program,
    prim_id: &str,
    region_centroid: Point2D,
    cfg: &LoopConfig,
    eval: &ObjectiveEval,
    state: &mut LoopState,
) -> bool {
    let Some(idx) = program.primitives.iter().position(|p| p.id == prim_id) else {
        return false;
    };
    let Some(target) = choose_target(&program.primitives[idx].shape, region_centroid) else {
        return false;
    };
    let axes = axis_count(&target);
    let mut current_q = eval.evaluate(program).q;
    state.probe_evals += 1;
    let mut step = cfg.step_init;
    let mut improved_any = false;
    let mut probes_here = 0usize;
    while step >= cfg.step_min && probes_here < PROBE_BUDGET {
        let mut best: Option<(f64, usize, f64)> = None; // (q, axis, delta)
        for axis in 0..axes {
            for sign in [1.0, -1.0] {
                let mut candidate = program.clone();
                nudge(&mut candidate.primitives[idx].shape, &target, axis, sign * step);
                if !candidate.validate_consistency().is_empty() {
                    continue;
                }
                let q = eval.evaluate(&candidate).q;
                state.probe_evals += 1;
                probes_here += 1;
                if q < current_q && best.map(|(bq, _, _)| q < bq).unwrap_or(true) {
                    best = Some((q, axis, sign * step));
                }
            }
        }
        match best {
            Some((q, axis, delta)) => {
                nudge(&mut program.primitives[idx].shape, &target, axis, delta);
                current_q = q;
                improved_any = true;
            }
            None => step /= 2.0,
        }
    }
    improved_any
}

use geofig::anchor::{detect_corners, AnchorConfig};
use geofig::edge::extract_edge_map;
use geofig::skeleton::{build_skeleton, SkeletonConfig};
use geofig::{parse_program, render};

#[test]
#[ignore]
fn dump_triangle_anchors() {
    let src = "canvas 1000 1000\nstyle width 2 color 0 0 0 dash solid\nsegment a (200,650) (700,650)\nsegment b (700,650) (420,200)\nsegment c (420,200) (200,650)\n";
    let p = parse_program(src).unwrap();
    let r = render(&p).unwrap();
    let e = extract_edge_map(&r, 200);
    let cfg = AnchorConfig::default();
    let corners = detect_corners(&e, &cfg);
    println!("corners ({}):", corners.len());
    for c in &corners {
        println!("  ({:.2},{:.2}) score {:.3} {:?}", c.x, c.y, c.score, c.kind);
    }
    let skel = build_skeleton(&r, None, &SkeletonConfig::default());
    println!("skeleton anchors:");
    for a in &skel.anchors {
        println!("  {} ({:.2},{:.2}) {:?}", a.id, a.anchor.x, a.anchor.y, a.anchor.kind);
    }
    println!("segments:");
    for s in &skel.segments {
        println!(
            "  {} ({:.1},{:.1})-({:.1},{:.1}) inliers {} width {:.1}",
            s.id, s.p1.x, s.p1.y, s.p2.x, s.p2.y, s.inliers, s.width
        );
    }
}

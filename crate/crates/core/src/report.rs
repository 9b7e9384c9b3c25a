//! GeoJSON and SVG renderings of a design.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::Result;
use crate::fitness::union_for;
use crate::instance::Instance;
use crate::model::{NodeKind, Point, RouteKind};
use crate::solution::Solution;

fn coord(p: Point) -> Value {
    json!([p.x, p.y])
}

/// FeatureCollection in the map's planar coordinates. Every feature carries a
/// `layer` property: olt, pdo, client, drop or distribution.
pub fn to_geojson(solution: &Solution, inst: &Instance) -> Result<Value> {
    let map = &inst.map;
    let mut features = Vec::new();
    let point = |p: Point, props: Value| json!({"type": "Feature", "geometry": {"type": "Point", "coordinates": coord(p)}, "properties": props});
    let line = |a: Point, b: Point, props: Value| json!({"type": "Feature", "geometry": {"type": "LineString", "coordinates": [coord(a), coord(b)]}, "properties": props});

    for e in union_for(inst, &solution.pdos)?.edges {
        let edge = &map.edges()[e];
        let (a, b) = (map.node(edge.a).expect("edge endpoint"), map.node(edge.b).expect("edge endpoint"));
        features.push(line(
            a.position,
            b.position,
            json!({"layer": "distribution", "a": edge.a, "b": edge.b, "length_m": edge.length_m, "route": edge.route}),
        ));
    }
    for (c, a) in solution.assignment.iter().enumerate() {
        let client = map.client(c);
        if let Some(s) = *a {
            let pdo = map.candidate(s);
            features.push(line(
                client.position,
                pdo.position,
                json!({"layer": "drop", "client": client.id, "pdo": pdo.id, "length_m": client.position.distance(&pdo.position)}),
            ));
        }
        features.push(point(
            client.position,
            json!({"layer": "client", "id": client.id, "kind": client.kind, "demand": client.demand, "served": a.is_some()}),
        ));
    }
    let loads = solution.loads(map);
    for &s in &solution.pdos {
        let pdo = map.candidate(s);
        features.push(point(pdo.position, json!({"layer": "pdo", "id": pdo.id, "ports_used": loads[s]})));
    }
    let root = map.root();
    features.push(point(root.position, json!({"layer": "olt", "id": root.id})));
    Ok(json!({"type": "FeatureCollection", "features": features}))
}

/// Standalone SVG drawing: unused routes grey, distribution blue (buried
/// dashed), drops green, PDOs orange squares, unserved clients red.
pub fn to_svg(solution: &Solution, inst: &Instance) -> Result<String> {
    let map = &inst.map;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for n in map.nodes() {
        x0 = x0.min(n.position.x);
        y0 = y0.min(n.position.y);
        x1 = x1.max(n.position.x);
        y1 = y1.max(n.position.y);
    }
    let pad = 10.0;
    let (w, h) = ((x1 - x0).max(1.0) + 2.0 * pad, (y1 - y0).max(1.0) + 2.0 * pad);
    // Flip y so north is up.
    let tx = |p: Point| (p.x - x0 + pad, y1 - p.y + pad);
    let stroke = (w.max(h) / 400.0).max(0.2);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.2} {h:.2}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let used = union_for(inst, &solution.pdos)?.edges;
    for (i, e) in map.edges().iter().enumerate() {
        let ((ax, ay), (bx, by)) =
            (tx(map.node(e.a).expect("edge").position), tx(map.node(e.b).expect("edge").position));
        let (colour, width) =
            if used.binary_search(&i).is_ok() { ("#1f5fbf", 2.0 * stroke) } else { ("#bbbbbb", stroke) };
        let dash = if e.route == RouteKind::Buried {
            format!(r#" stroke-dasharray="{:.2}""#, 3.0 * stroke)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="{colour}" stroke-width="{width:.2}"{dash}/>"#
        );
    }
    for (c, a) in solution.assignment.iter().enumerate() {
        let client = map.client(c);
        let (cx, cy) = tx(client.position);
        if let Some(s) = *a {
            let (px, py) = tx(map.candidate(s).position);
            let _ = writeln!(
                out,
                r##"<line x1="{cx:.2}" y1="{cy:.2}" x2="{px:.2}" y2="{py:.2}" stroke="#2e9e44" stroke-width="{stroke:.2}"/>"##
            );
        }
        let fill = if a.is_some() { "#333333" } else { "#d62728" };
        let r = if client.kind == NodeKind::ClientMdu { 3.0 * stroke } else { 1.5 * stroke };
        let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}"/>"#);
    }
    let side = 5.0 * stroke;
    for &s in &solution.pdos {
        let (px, py) = tx(map.candidate(s).position);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{side:.2}" height="{side:.2}" fill="#ff7f0e"/>"##,
            px - side / 2.0,
            py - side / 2.0
        );
    }
    let (rx, ry) = tx(map.root().position);
    let _ = writeln!(out, r#"<circle cx="{rx:.2}" cy="{ry:.2}" r="{:.2}" fill="black"/>"#, 4.0 * stroke);
    out.push_str("</svg>\n");
    Ok(out)
}

use std::fmt::Write;

use fel_core::{FractalError, FractalSystem, Result, VertexFunction};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const LEGEND: f64 = 60.0;

/// SVG 1.1 drawing of the `m`-symplices of a planar system, one polygon each.
///
/// Polygon corners are the images of `V_0`, ordered by angle about their centroid.
/// With `values`, vertices of `V_m` are drawn as dots on a blue-to-red ramp.
pub fn svg(system: &FractalSystem, level: usize, values: Option<&VertexFunction>) -> Result<String> {
    if system.dim() != 2 {
        return Err(FractalError::UnsupportedDimension(system.dim()));
    }
    system.check_level(level)?;
    let points = system.level_points(level);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points.chunks_exact(2) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let unit = (SIZE - 2.0 * MARGIN) / span;
    let project = |p: &[f64]| (MARGIN + (p[0] - lo[0]) * unit, SIZE - MARGIN - (p[1] - lo[1]) * unit);
    let height = if values.is_some() { SIZE + LEGEND } else { SIZE };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{height}" viewBox="0 0 {SIZE} {height}">"#
    );
    let _ = writeln!(out, r#"<title>{} level {level}</title>"#, escape(system.name()));
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="1">"#);
    for symplex in system.symplices(level) {
        let corners: Vec<&[f64]> = symplex.vertices.iter().map(|&v| system.point(v as usize)).collect();
        let n = corners.len() as f64;
        let cx = corners.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = corners.iter().map(|p| p[1]).sum::<f64>() / n;
        let mut ordered = corners.clone();
        ordered.sort_by(|a, b| {
            let ta = (a[1] - cy).atan2(a[0] - cx);
            let tb = (b[1] - cy).atan2(b[0] - cx);
            ta.total_cmp(&tb)
        });
        let list: Vec<String> = ordered
            .iter()
            .map(|p| {
                let (x, y) = project(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon points="{}"/>"#, list.join(" "));
    }
    let _ = writeln!(out, "</g>");

    if let Some(f) = values {
        let values = f.values();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let radius = (0.3 * unit * system.c0() / system.scale().powi(level as i32)).clamp(1.0, 6.0);
        let _ = writeln!(out, r#"<g stroke="none">"#);
        for (id, &v) in values.iter().enumerate().take(system.vertex_count(level)) {
            let (x, y) = project(system.point(id));
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="{radius:.2}" fill="{}"/>"#,
                ramp(position(v, min, max))
            );
        }
        let _ = writeln!(out, "</g>");
        legend(&mut out, min, max);
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn position(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (v - min) / (max - min)
    } else {
        0.5
    }
}

/// Linear ramp from blue (0) to red (1).
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}30{b:02x}")
}

fn legend(out: &mut String, min: f64, max: f64) {
    let top = SIZE + 10.0;
    let width = SIZE - 2.0 * MARGIN;
    let steps = 32;
    let _ = writeln!(out, r#"<g stroke="none">"#);
    for i in 0..steps {
        let x = MARGIN + width * i as f64 / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.3}" y="{top}" width="{:.3}" height="16" fill="{}"/>"#,
            width / steps as f64 + 0.5,
            ramp((i as f64 + 0.5) / steps as f64)
        );
    }
    let _ = writeln!(out, "</g>");
    let text_y = top + 34.0;
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{text_y}" font-size="14">min {min:.6e}</text>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{text_y}" font-size="14" text-anchor="end">max {max:.6e}</text>"#,
        SIZE - MARGIN
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

//! SVG plots: one chart per context showing the posterior mean as a step
//! line over its credible band, with the raw evidence rate overlaid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::chronology::ContextId;
use crate::error::{Error, Result};
use crate::io::report::ResultRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const Y_TICKS: usize = 5;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Fixed two-decimal coordinates.
fn c(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_owned()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

struct Frame {
    n: usize,
    y_max: f64,
}

impl Frame {
    fn x(&self, j: usize) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * j as f64 / self.n as f64
    }

    fn y(&self, v: f64) -> f64 {
        let plot_h = HEIGHT - TOP - BOTTOM;
        HEIGHT - BOTTOM - plot_h * (v / self.y_max)
    }
}

fn step_path(frame: &Frame, values: impl Iterator<Item = f64>) -> String {
    let mut d = String::new();
    for (j, v) in values.enumerate() {
        let y = c(frame.y(v));
        if j == 0 {
            let _ = write!(d, "M {} {}", c(frame.x(0)), y);
        } else {
            let _ = write!(d, " V {y}");
        }
        let _ = write!(d, " H {}", c(frame.x(j + 1)));
    }
    d
}

/// Renders one context's rows (sorted by interval) as an SVG 1.1 document.
pub fn render_context_svg(rows: &[&ResultRow]) -> String {
    let n = rows.len();
    let peak = rows
        .iter()
        .flat_map(|r| [r.ci_high, r.posterior_mean, r.evidence_rate])
        .fold(0.0_f64, f64::max);
    let y_max = if peak > 0.0 { peak * 1.1 } else { 1.0 };
    let frame = Frame { n, y_max };
    let context = rows.first().map(|r| r.context_id.0.as_str()).unwrap_or("");

    let mut band = String::new();
    for (j, r) in rows.iter().enumerate() {
        let y = c(frame.y(r.ci_high));
        if j == 0 {
            let _ = write!(band, "M {} {}", c(frame.x(0)), y);
        } else {
            let _ = write!(band, " V {y}");
        }
        let _ = write!(band, " H {}", c(frame.x(j + 1)));
    }
    for (j, r) in rows.iter().enumerate().rev() {
        let _ = write!(band, " V {} H {}", c(frame.y(r.ci_low)), c(frame.x(j)));
    }
    band.push_str(" Z");

    let mean_path = step_path(&frame, rows.iter().map(|r| r.posterior_mean));
    let evidence_path = step_path(&frame, rows.iter().map(|r| r.evidence_rate));

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let deficit = rows.first().map(|r| r.deficit).unwrap_or(0.0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14">{} (deficit {})</text>"#,
        c(LEFT),
        escape(context),
        tick_label(deficit)
    );

    // Axes.
    let x0 = c(frame.x(0));
    let x1 = c(frame.x(n));
    let y_base = c(frame.y(0.0));
    let _ = writeln!(
        svg,
        r#"<path class="axis" d="M {x0} {} V {y_base} H {x1}" fill="none" stroke="black" stroke-width="1"/>"#,
        c(TOP)
    );
    for k in 0..=Y_TICKS {
        let v = y_max * k as f64 / Y_TICKS as f64;
        let y = c(frame.y(v));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            c(LEFT - 6.0),
            tick_label(v)
        );
    }
    for (j, r) in rows.iter().enumerate() {
        let mid = 0.5 * (frame.x(j) + frame.x(j + 1));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            c(mid),
            c(HEIGHT - BOTTOM + 16.0),
            escape(&r.interval_label)
        );
    }

    let _ = writeln!(svg, r##"<path class="band" d="{band}" fill="#4878cf" fill-opacity="0.25" stroke="none"/>"##);
    let _ = writeln!(
        svg,
        r##"<path class="posterior-mean" d="{mean_path}" fill="none" stroke="#1f3f8f" stroke-width="2"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<path class="evidence" d="{evidence_path}" fill="none" stroke="#c03030" stroke-width="1.5" stroke-dasharray="4 3"/>"##
    );
    let _ = writeln!(svg, "</svg>");
    svg
}

/// Groups rows by context, each sorted by interval index.
pub fn rows_by_context(rows: &[ResultRow]) -> BTreeMap<&ContextId, Vec<&ResultRow>> {
    let mut map: BTreeMap<&ContextId, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        map.entry(&r.context_id).or_default().push(r);
    }
    for v in map.values_mut() {
        v.sort_by_key(|r| r.interval_index);
    }
    map
}

/// File name for a context's plot; characters outside `[A-Za-z0-9._-]`
/// become `_`.
pub fn plot_file_name(id: &ContextId) -> String {
    let stem: String = id
        .0
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    format!("{stem}.svg")
}

/// Writes one SVG per context into `dir`, returning the paths written.
pub fn emit_plot(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Config("cannot plot an empty result set".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (id, ctx_rows) in rows_by_context(rows) {
        let path = dir.join(plot_file_name(id));
        fs::write(&path, render_context_svg(&ctx_rows)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

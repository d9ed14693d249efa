use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub tool_version: String,
    pub seed: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serialisable"),
        );
        self
    }

    /// Writes the manifest next to the first output as `<output>.manifest.json`.
    pub fn write(&self) -> Result<Option<PathBuf>, CliError> {
        let Some(first) = self.outputs.first() else {
            return Ok(None);
        };
        let path = PathBuf::from(format!("{first}.manifest.json"));
        write_text(&path, &to_pretty(self))?;
        Ok(Some(path))
    }
}

pub fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// `x` with nine significant digits in plain decimal notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn sweep_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("eta,t_post,t_nonpost\n");
    for (eta, post, nonpost) in rows {
        let _ = writeln!(out, "{},{},{}", sig9(*eta), sig9(*post), sig9(*nonpost));
    }
    out
}

/// Two curves over `eta` as a standalone SVG line chart.
pub fn sweep_svg(rows: &[(f64, f64, f64)]) -> String {
    let (w, h, m) = (640.0, 420.0, 56.0);
    let x_min = rows.first().map_or(0.0, |r| r.0);
    let x_max = rows.last().map_or(1.0, |r| r.0);
    let y_max = rows
        .iter()
        .map(|r| r.1.max(r.2))
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.05;
    let sx = |x: f64| m + (x - x_min) / (x_max - x_min).max(1e-12) * (w - 2.0 * m);
    let sy = |y: f64| h - m - y / y_max * (h - 2.0 * m);
    let line = |pick: fn(&(f64, f64, f64)) -> f64| {
        rows.iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.0), sy(pick(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{m},{m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    for k in 0..=4 {
        let fx = x_min + (x_max - x_min) * k as f64 / 4.0;
        let fy = y_max * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.2}</text>"#,
            sx(fx),
            h - m + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.3}</text>"#,
            m - 6.0,
            sy(fy) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">eta</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
        line(|r| r.1)
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#2c7fb8" stroke-width="2" stroke-dasharray="6 4"/>"##,
        line(|r| r.2)
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" fill="#c0392b">t_post</text>"##,
        m + 10.0,
        m + 4.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" fill="#2c7fb8">t_nonpost</text>"##,
        m + 10.0,
        m + 20.0
    );
    svg.push_str("</svg>\n");
    svg
}

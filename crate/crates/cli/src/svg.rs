//! Minimal SVG rendering of CSV tables: line plots and heatmaps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 120.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    /// Color value for a heatmap.
    pub z: Option<String>,
    /// Column splitting a line plot into series.
    pub group: Option<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: Option<String>,
}

struct Csv {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>>>()?;
        if rows.is_empty() {
            bail!("the table has no data rows");
        }
        Ok(Self { headers, rows })
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("no column {name:?}; available: {}", self.headers.join(", ")))
    }

    fn number(&self, row: usize, col: usize) -> Option<f64> {
        self.rows[row][col].parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

#[derive(Clone, Copy)]
struct AxisMap {
    lo: f64,
    hi: f64,
    log: bool,
    px0: f64,
    px1: f64,
}

impl AxisMap {
    fn new(values: impl Iterator<Item = f64>, log: bool, px0: f64, px1: f64) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            bail!(
                "no plottable values{}",
                if log { " (log axes need positive data)" } else { "" }
            );
        }
        if hi == lo {
            lo -= 0.5;
            hi += 0.5;
        }
        Ok(Self { lo, hi, log, px0, px1 })
    }

    fn map(&self, v: f64) -> Option<f64> {
        let v = if self.log { v.log10() } else { v };
        v.is_finite()
            .then(|| self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        let n = 5;
        (0..=n)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / n as f64;
                let label = if self.log {
                    format!("1e{t:.1}")
                } else {
                    format!("{t:.3e}")
                };
                (
                    self.px0 + (t - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0),
                    label,
                )
            })
            .collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn frame(out: &mut String, spec: &PlotSpec, xa: &AxisMap, ya: &AxisMap) {
    let (x0, x1, y0, y1) = (MARGIN_L, WIDTH - MARGIN_R, HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (px, label) in xa.ticks() {
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            escape(&label)
        );
    }
    for (py, label) in ya.ticks() {
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 3.0,
            escape(&label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x)
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&spec.y)
    );
    if let Some(t) = &spec.title {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            escape(t)
        );
    }
}

fn open() -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// One polyline per group value, in order of first appearance.
pub fn line_plot(csv_bytes: &[u8], spec: &PlotSpec) -> Result<String> {
    let t = Csv::parse(csv_bytes)?;
    let (xi, yi) = (t.index(&spec.x)?, t.index(&spec.y)?);
    let gi = spec.group.as_deref().map(|g| t.index(g)).transpose()?;
    let mut order = Vec::new();
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in 0..t.rows.len() {
        let (Some(x), Some(y)) = (t.number(row, xi), t.number(row, yi)) else {
            continue;
        };
        let key = gi.map_or_else(String::new, |g| t.rows[row][g].clone());
        if !series.contains_key(&key) {
            order.push(key.clone());
        }
        series.entry(key).or_default().push((x, y));
    }
    let all = || series.values().flatten();
    let xa = AxisMap::new(all().map(|p| p.0), spec.log_x, MARGIN_L, WIDTH - MARGIN_R)
        .with_context(|| format!("column {:?}", spec.x))?;
    let ya = AxisMap::new(all().map(|p| p.1), spec.log_y, HEIGHT - MARGIN_B, MARGIN_T)
        .with_context(|| format!("column {:?}", spec.y))?;

    let mut out = open();
    frame(&mut out, spec, &xa, &ya);
    for (k, key) in order.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = series[key]
            .iter()
            .filter_map(|&(x, y)| Some(format!("{:.2},{:.2}", xa.map(x)?, ya.map(y)?)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        if gi.is_some() {
            let y = MARGIN_T + 15.0 * k as f64 + 10.0;
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{y}" font-size="10" fill="{color}">{}</text>"#,
                WIDTH - MARGIN_R + 10.0,
                escape(key)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Viridis-like ramp from dark blue to yellow.
fn ramp(f: f64) -> String {
    let stops = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let f = f.clamp(0.0, 1.0) * (stops.len() - 1) as f64;
    let i = (f.floor() as usize).min(stops.len() - 2);
    let t = f - i as f64;
    let (a, b) = (stops[i], stops[i + 1]);
    let c = |u: f64, v: f64| (u + (v - u) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

fn cell_edges(centers: &[f64], axis: &AxisMap) -> Vec<(f64, f64)> {
    let px: Vec<f64> = centers.iter().map(|&c| axis.map(c).unwrap_or(f64::NAN)).collect();
    let n = px.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 {
                (px[i - 1] + px[i]) / 2.0
            } else if n > 1 {
                px[0] - (px[1] - px[0]) / 2.0
            } else {
                px[0] - 20.0
            };
            let right = if i + 1 < n {
                (px[i] + px[i + 1]) / 2.0
            } else if n > 1 {
                px[n - 1] + (px[n - 1] - px[n - 2]) / 2.0
            } else {
                px[0] + 20.0
            };
            (left.min(right), (right - left).abs())
        })
        .collect()
}

/// One `<rect>` per table row on the `(x, y)` grid, colored by `z`.
/// Rows with a missing `z` are drawn grey.
pub fn heatmap(csv_bytes: &[u8], spec: &PlotSpec) -> Result<String> {
    let t = Csv::parse(csv_bytes)?;
    let z_name = spec.z.as_deref().ok_or_else(|| anyhow!("a heatmap needs a z column"))?;
    let (xi, yi, zi) = (t.index(&spec.x)?, t.index(&spec.y)?, t.index(z_name)?);
    let mut cells = Vec::with_capacity(t.rows.len());
    for row in 0..t.rows.len() {
        let x = t
            .number(row, xi)
            .ok_or_else(|| anyhow!("row {}: {:?} is not a number", row + 1, spec.x))?;
        let y = t
            .number(row, yi)
            .ok_or_else(|| anyhow!("row {}: {:?} is not a number", row + 1, spec.y))?;
        cells.push((x, y, t.number(row, zi)));
    }
    let uniq = |sel: fn(&(f64, f64, Option<f64>)) -> f64| {
        let mut v: Vec<f64> = cells.iter().map(sel).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (xs, ys) = (uniq(|c| c.0), uniq(|c| c.1));
    let xa = AxisMap::new(xs.iter().copied(), spec.log_x, MARGIN_L, WIDTH - MARGIN_R)?;
    let ya = AxisMap::new(ys.iter().copied(), spec.log_y, HEIGHT - MARGIN_B, MARGIN_T)?;
    // Shrink so the outer half cells stay inside the frame.
    let shrink = |a: AxisMap, n: usize| {
        if n < 2 {
            return a;
        }
        let half = (a.px1 - a.px0) / (2.0 * n as f64);
        AxisMap {
            px0: a.px0 + half,
            px1: a.px1 - half,
            ..a
        }
    };
    let (xa, ya) = (shrink(xa, xs.len()), shrink(ya, ys.len()));
    let (xe, ye) = (cell_edges(&xs, &xa), cell_edges(&ys, &ya));
    let (zlo, zhi) = cells
        .iter()
        .filter_map(|c| c.2)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z), hi.max(z)));

    let mut out = open();
    for &(x, y, z) in &cells {
        let (ix, iy) = (
            xs.iter().position(|&v| v == x).expect("x in axis"),
            ys.iter().position(|&v| v == y).expect("y in axis"),
        );
        let fill = match z {
            Some(z) if zhi > zlo => ramp((z - zlo) / (zhi - zlo)),
            Some(_) => ramp(0.5),
            None => "#bbbbbb".to_string(),
        };
        let _ = writeln!(
            out,
            r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            xe[ix].0, ye[iy].0, xe[ix].1, ye[iy].1
        );
    }
    frame(&mut out, spec, &xa, &ya);
    if zlo.is_finite() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10">{}: {} to {}</text>"#,
            WIDTH - MARGIN_R + 5.0,
            MARGIN_T + 10.0,
            escape(z_name),
            escape(&format!("{zlo:.3e}")),
            escape(&format!("{zhi:.3e}"))
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

//! Static SVG line plots.
//!
//! Output depends only on the input numbers: coordinates are printed with a
//! fixed precision and series keep their given order.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

/// Data range padded when degenerate.
fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return None;
    }
    if hi > lo {
        Some((lo, hi))
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        Some((lo - pad, hi + pad))
    }
}

fn label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn transform(&self, y: f64) -> Option<f64> {
        let t = match self.y_scale {
            Scale::Linear => y,
            Scale::Log10 if y > 0.0 => y.log10(),
            Scale::Log10 => return None,
        };
        t.is_finite().then_some(t)
    }

    /// Points that survive the axis transform, per series.
    fn visible(&self) -> Vec<Vec<(f64, f64)>> {
        self.series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter(|(x, _)| x.is_finite())
                    .filter_map(|&(x, y)| self.transform(y).map(|t| (x, t)))
                    .collect()
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let data = self.visible();
        let xr = range(data.iter().flatten().map(|p| p.0)).unwrap_or((0.0, 1.0));
        let mut yr = range(data.iter().flatten().map(|p| p.1)).unwrap_or((0.0, 1.0));
        if self.y_scale == Scale::Log10 {
            yr = (yr.0.floor(), yr.1.ceil());
            if yr.0 == yr.1 {
                yr.1 += 1.0;
            }
            // stretch the top so that both ends fall on a labelled decade
            let decades = (yr.1 - yr.0) as usize;
            let step = decades.div_ceil(TICKS - 1);
            yr.1 = yr.0 + (decades.div_ceil(step) * step) as f64;
        }
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - xr.0) / (xr.1 - xr.0) * pw;
        let sy = |y: f64| TOP + ph - (y - yr.0) / (yr.1 - yr.0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
        );

        for i in 0..TICKS {
            let f = i as f64 / (TICKS - 1) as f64;
            let xv = xr.0 + f * (xr.1 - xr.0);
            let px = sx(xv);
            let _ = writeln!(
                s,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                TOP + ph,
                TOP + ph + 5.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                TOP + ph + 18.0,
                label(xv)
            );
        }
        let y_ticks: Vec<f64> = match self.y_scale {
            Scale::Linear => (0..TICKS)
                .map(|i| yr.0 + i as f64 / (TICKS - 1) as f64 * (yr.1 - yr.0))
                .collect(),
            Scale::Log10 => {
                let decades = (yr.1 - yr.0) as usize;
                let step = decades.div_ceil(TICKS - 1);
                (0..=decades).step_by(step).map(|k| yr.0 + k as f64).collect()
            }
        };
        for yv in y_ticks {
            let py = sy(yv);
            let text = match self.y_scale {
                Scale::Linear => label(yv),
                Scale::Log10 => format!("1e{}", yv as i64),
            };
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/>",
                LEFT - 5.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{text}</text>",
                LEFT - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let y_label = match self.y_scale {
            Scale::Linear => self.y_label.clone(),
            Scale::Log10 => format!("log10 {}", self.y_label),
        };
        let _ = writeln!(
            s,
            "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&y_label)
        );

        for (k, (series, pts)) in self.series.iter().zip(&data).enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            if pts.len() > 1 {
                let path: Vec<String> = pts
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let _ = writeln!(
                    s,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                    path.join(" ")
                );
            }
            for &(x, y) in pts {
                let _ = writeln!(
                    s,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                    sx(x),
                    sy(y)
                );
            }
            let ly = TOP + 12.0 + 18.0 * k as f64;
            let lx = WIDTH - RIGHT + 12.0;
            let _ = writeln!(
                s,
                "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
                lx + 18.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
                lx + 24.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

use super::{HistogramRow, ResultRow};
use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1.0);
        MARGIN + (v - self.x_min) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - v / self.y_max.max(f64::MIN_POSITIVE) * (HEIGHT - 2.0 * MARGIN)
    }

    fn open(&self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>
<line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>
"#,
            WIDTH / 2.0,
            escape(title),
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(x_label),
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label),
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN,
        );
        for i in 0..=4 {
            let v = self.y_max * i as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                self.y(v) + 4.0,
                trim(v)
            );
        }
        s
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// TPR against attack count, one colour per attack series. Solid lines are
/// with SRM, dashed without.
pub fn tpr_chart(rows: &[ResultRow]) -> String {
    let mut series: BTreeMap<String, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let mut key = r.attack.clone();
        match r.experiment.as_str() {
            "capacity" => key += &format!(" k={}", r.capacity),
            "steps" => key += &format!(" T={}", r.steps),
            _ => {}
        }
        series.entry(key).or_default().push(r);
    }
    let counts = rows.iter().map(|r| r.count as f64);
    let frame = Frame {
        x_min: counts.clone().fold(f64::INFINITY, f64::min).min(0.0),
        x_max: counts.fold(1.0, f64::max),
        y_max: 1.0,
    };
    let backend = rows.first().map(|r| r.backend.as_str()).unwrap_or("none");
    let mut s = frame.open(
        &format!("Detection rate ({backend} reference backend)"),
        "attack count",
        "TPR",
    );
    for c in 0..=frame.x_max as usize {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{c}</text>"#,
            frame.x(c as f64),
            HEIGHT - MARGIN + 14.0
        );
    }
    for (i, (name, mut pts)) in series.into_iter().enumerate() {
        pts.sort_by_key(|r| r.count);
        let colour = PALETTE[i % PALETTE.len()];
        for (dash, pick) in [("", false), (r#" stroke-dasharray="4 3""#, true)] {
            let path: Vec<String> = pts
                .iter()
                .map(|r| {
                    let y = if pick { r.tpr_no_srm } else { r.tpr };
                    format!("{:.1},{:.1}", frame.x(r.count as f64), frame.y(y))
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#,
                path.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN + 4.0 - 120.0,
            MARGIN + 14.0 * i as f64,
            escape(&name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Side-by-side bars of the two correct-bit-count populations.
pub fn histogram_chart(rows: &[HistogramRow]) -> String {
    let y_max = rows
        .iter()
        .map(|r| r.watermarked.max(r.unwatermarked))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let k = rows.iter().map(|r| r.correct_bits).max().unwrap_or(1) as f64;
    let frame = Frame {
        x_min: -0.5,
        x_max: k + 0.5,
        y_max,
    };
    let mut s = frame.open("Correct-bit counts", "correct bits", "circuits");
    let bar = (frame.x(1.0) - frame.x(0.0)) * 0.4;
    for r in rows {
        let x = frame.x(r.correct_bits as f64);
        for (offset, value, colour) in [
            (-bar, r.unwatermarked, PALETTE[0]),
            (0.0, r.watermarked, PALETTE[1]),
        ] {
            if value == 0 {
                continue;
            }
            let top = frame.y(value as f64);
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{top:.1}" width="{bar:.1}" height="{:.1}" fill="{colour}"/>"#,
                x + offset,
                HEIGHT - MARGIN - top
            );
        }
        if r.correct_bits % 4 == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
                HEIGHT - MARGIN + 14.0,
                r.correct_bits
            );
        }
    }
    for (i, (label, colour)) in [("unwatermarked", PALETTE[0]), ("watermarked", PALETTE[1])]
        .into_iter()
        .enumerate()
    {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{colour}">{label}</text>"#,
            MARGIN + 10.0,
            MARGIN + 14.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed() {
        let hist: Vec<HistogramRow> = (0..=24)
            .map(|c| HistogramRow {
                correct_bits: c,
                watermarked: (c == 24) as usize * 10,
                unwatermarked: 12 - (c as i64 - 12).unsigned_abs() as usize,
            })
            .collect();
        let svg = histogram_chart(&hist);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect ").count(), 1 + 1 + 23);

        let rows: Vec<ResultRow> = (1..=3)
            .map(|count| ResultRow {
                experiment: "robustness".into(),
                backend: "zero".into(),
                steps: 50,
                attack: "replace".into(),
                count,
                capacity: 24,
                tau_bits: 19,
                srm: "off".into(),
                trials: 1,
                detections: 1,
                tpr: 1.0,
                detections_no_srm: 0,
                tpr_no_srm: 0.0,
                mean_bit_accuracy: 1.0,
                mean_candidates: 1.0,
                mean_gate_count: 1.0,
                mean_sign_agreement: 1.0,
                wall_time_s: 0.0,
            })
            .collect();
        let svg = tpr_chart(&rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("zero reference backend"));
    }
}

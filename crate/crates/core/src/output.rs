//! CSV emitters with versioned column contracts, and minimal SVG plots.
//!
//! Every CSV starts with a `# schema: <name>/v<version>` line followed by
//! the header row. Rows are written in a fixed order so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::circuit::ImpedanceSet;
use crate::experiments::{CdfRow, CorrRow, SnrRow, SteeringRow};
use crate::Result;

/// Column contract of one CSV artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub file: &'static str,
    pub columns: &'static [&'static str],
}

pub const SNR_SCHEMA: Schema = Schema {
    name: "snr_vs_freq",
    version: 1,
    file: "snr_vs_freq.csv",
    columns: &["freq_Hz", "trial", "snr_dB"],
};

pub const POWER_CDF_SCHEMA: Schema = Schema {
    name: "power_cdf",
    version: 1,
    file: "power_cdf.csv",
    columns: &["freq_label", "value", "prob"],
};

pub const STEERING_SCHEMA: Schema = Schema {
    name: "steering_profile",
    version: 1,
    file: "steering_profile.csv",
    columns: &["rank", "magnitude", "regime", "end"],
};

pub const CORR_ROW_SCHEMA: Schema = Schema {
    name: "corr_row",
    version: 1,
    file: "corr_row.csv",
    columns: &["element_index", "magnitude", "regime", "freq_label"],
};

pub const CIRCUIT_DUMP_SCHEMA: Schema = Schema {
    name: "circuit_dump",
    version: 1,
    file: "circuit_dump.csv",
    columns: &["freq_Hz", "matrix", "row", "col", "re", "im"],
};

pub const ALL_SCHEMAS: [Schema; 5] = [SNR_SCHEMA, POWER_CDF_SCHEMA, STEERING_SCHEMA, CORR_ROW_SCHEMA, CIRCUIT_DUMP_SCHEMA];

impl Schema {
    pub fn tag(&self) -> String {
        format!("# schema: {}/v{}", self.name, self.version)
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.tag())?;
        writeln!(f, "file: {}", self.file)?;
        write!(f, "columns: {}", self.columns.join(","))
    }
}

fn write_csv<W: Write>(out: W, schema: &Schema, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = out;
    writeln!(out, "{}", schema.tag())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schema.columns)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snr<W: Write>(out: W, rows: &[SnrRow]) -> Result<()> {
    write_csv(
        out,
        &SNR_SCHEMA,
        rows.iter()
            .map(|r| vec![r.freq_hz.to_string(), r.trial.to_string(), r.snr_db.to_string()]),
    )
}

pub fn write_power_cdf<W: Write>(out: W, rows: &[CdfRow]) -> Result<()> {
    write_csv(
        out,
        &POWER_CDF_SCHEMA,
        rows.iter()
            .map(|r| vec![r.freq_label.clone(), r.value.to_string(), r.prob.to_string()]),
    )
}

pub fn write_steering<W: Write>(out: W, rows: &[SteeringRow]) -> Result<()> {
    write_csv(
        out,
        &STEERING_SCHEMA,
        rows.iter().map(|r| {
            vec![
                r.rank.to_string(),
                r.magnitude.to_string(),
                r.regime.to_string(),
                r.end.to_string(),
            ]
        }),
    )
}

pub fn write_corr_row<W: Write>(out: W, rows: &[CorrRow]) -> Result<()> {
    write_csv(
        out,
        &CORR_ROW_SCHEMA,
        rows.iter().map(|r| {
            vec![
                r.element_index.to_string(),
                r.magnitude.to_string(),
                r.regime.to_string(),
                r.freq_label.clone(),
            ]
        }),
    )
}

/// Every entry of `Z_R`, `Z_T`, `P` and `Q` at each frequency.
pub fn write_circuit_dump<W: Write>(out: W, sets: &[ImpedanceSet]) -> Result<()> {
    let rows = sets.iter().flat_map(|s| {
        [("Z_R", &s.z_r), ("Z_T", &s.z_t), ("P", &s.p), ("Q", &s.q)]
            .into_iter()
            .flat_map(move |(name, m)| {
                (0..m.nrows()).flat_map(move |i| {
                    (0..m.ncols()).map(move |j| {
                        vec![
                            s.freq_hz.to_string(),
                            name.to_string(),
                            i.to_string(),
                            j.to_string(),
                            m[(i, j)].re.to_string(),
                            m[(i, j)].im.to_string(),
                        ]
                    })
                })
            })
    });
    write_csv(out, &CIRCUIT_DUMP_SCHEMA, rows)
}

/// Opens `dir/name` for writing, creating `dir` if needed.
pub fn create_in(dir: &Path, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::create_dir_all(dir)?;
    Ok(std::io::BufWriter::new(std::fs::File::create(dir.join(name))?))
}

/// One named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Axis scaling of an SVG plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn transform(v: f64, scale: Scale) -> Option<f64> {
    match scale {
        Scale::Linear => v.is_finite().then_some(v),
        Scale::Log10 => (v > 0.0 && v.is_finite()).then(|| v.log10()),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    /// Self-contained SVG document.
    pub fn to_svg(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter_map(|&(x, y)| Some((transform(x, self.x_scale)?, transform(y, self.y_scale)?)))
                    .collect()
            })
            .collect();
        let all = pts.iter().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let fmt = |v: f64, scale: Scale| match scale {
                Scale::Linear => format!("{v:.3}"),
                Scale::Log10 => format!("{:.2e}", 10f64.powf(v)),
            };
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(xv),
                HEIGHT - MARGIN_B + 18.0,
                fmt(xv, self.x_scale)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                sy(yv) + 4.0,
                fmt(yv, self.y_scale)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_L + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, (series, p)) in self.series.iter().zip(&pts).enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                path.join(" ")
            );
            let ly = MARGIN_T + 16.0 * (k as f64 + 1.0);
            let lx = WIDTH - MARGIN_R + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

//! Run reports and their on-disk artifacts: a versioned JSON manifest with the
//! certificates, one CSV per series (`t,value,shell,tag`) and one SVG per figure.
//! Files are written under temporary names and renamed; on failure every file written
//! so far is removed.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::integrals::Accumulator;
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::estimates::BoundCertificate;

/// Version of the manifest layout.
pub const MANIFEST_SCHEMA: u32 = 1;

/// Exit codes of the command-line interface.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const CERTIFICATE_FAILURE: i32 = 1;
    pub const CONFIGURATION_ERROR: i32 = 2;
    pub const NUMERICAL_FAILURE: i32 = 3;
}

/// A figure: curves drawn from named series, with horizontal envelope lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub name: String,
    pub title: String,
    /// Indices into [`RunReport::series`].
    pub curves: Vec<usize>,
    /// Indices of series drawn dashed as certified envelopes.
    pub envelopes: Vec<usize>,
    /// Horizontal reference levels `(label, value)`.
    pub levels: Vec<(String, f64)>,
    pub log_y: bool,
}

/// Everything one experiment produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub config: Option<ExperimentConfig>,
    pub versions: BTreeMap<String, String>,
    /// Backend and filter diagnostics, `(name, value)`.
    pub diagnostics: BTreeMap<String, String>,
    pub boundary_mass_max: f64,
    /// True when the run left its numerical validity regime (boundary breach).
    pub flagged: bool,
    pub series: Vec<TimeSeries>,
    pub certificates: Vec<BoundCertificate>,
    pub integrals: Vec<Accumulator>,
    pub figures: Vec<Figure>,
}

impl RunReport {
    pub fn new(experiment: impl Into<String>, config: Option<&ExperimentConfig>) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("halfwave".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("manifest-schema".to_string(), MANIFEST_SCHEMA.to_string());
        Self {
            experiment: experiment.into(),
            config: config.cloned(),
            versions,
            diagnostics: BTreeMap::new(),
            boundary_mass_max: 0.0,
            flagged: false,
            series: Vec::new(),
            certificates: Vec::new(),
            integrals: Vec::new(),
            figures: Vec::new(),
        }
    }

    /// Appends a series and returns its index.
    pub fn push_series(&mut self, s: TimeSeries) -> usize {
        self.series.push(s);
        self.series.len() - 1
    }

    /// Appends an accumulator together with its cumulative curve as a series.
    pub fn push_integral(&mut self, acc: Accumulator) -> usize {
        let idx = self.push_series(TimeSeries::new(
            format!("{} cumulative", acc.tag),
            acc.shell,
            acc.times.clone(),
            acc.cumulative.clone(),
        ));
        self.integrals.push(acc);
        idx
    }

    pub fn diagnostic(&mut self, key: &str, value: impl ToString) {
        self.diagnostics.insert(key.to_string(), value.to_string());
    }

    pub fn find_series(&self, tag: &str, shell: Option<u32>) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.tag == tag && s.shell == shell)
    }

    pub fn certificate(&self, id: &str) -> Option<&BoundCertificate> {
        self.certificates.iter().find(|c| c.id == id)
    }

    pub fn integral(&self, tag: &str, shell: Option<u32>) -> Option<&Accumulator> {
        self.integrals.iter().find(|a| a.tag == tag && a.shell == shell)
    }

    pub fn passed(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }
}

/// Exit code of a set of reports: 3 if any run is flagged, 1 if any certificate
/// fails, 0 otherwise (including the empty set).
pub fn exit_code_for(reports: &[RunReport]) -> i32 {
    if reports.iter().any(|r| r.flagged) {
        exit_code::NUMERICAL_FAILURE
    } else if reports.iter().all(RunReport::passed) {
        exit_code::SUCCESS
    } else {
        exit_code::CERTIFICATE_FAILURE
    }
}

/// Artifact kinds written by [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
            svg: true,
        }
    }
}

/// The manifest document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub exit_code: i32,
    pub runs: Vec<RunReport>,
    /// CSV file for each series, `[run][series]`, relative to the output directory.
    pub series_files: Vec<Vec<String>>,
    pub figure_files: Vec<Vec<String>>,
}

/// Files written and the resulting exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Writes `contents` to `path` through a temporary file.
fn write_atomic(path: &Path, contents: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    let tmp = path.with_extension("partial");
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    match res {
        Ok(()) => {
            written.push(path.to_path_buf());
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(Error::Io(e))
        }
    }
}

/// Writes the artifacts of `reports` into `dir`. The report is written even when
/// certificates fail; the exit code reflects the verdicts.
pub fn emit_report(reports: &[RunReport], dir: &Path, formats: Formats) -> Result<Emitted> {
    let mut written = Vec::new();
    let res = emit_inner(reports, dir, formats, &mut written);
    match res {
        Ok(code) => Ok(Emitted {
            files: written,
            exit_code: code,
        }),
        Err(e) => {
            for f in &written {
                let _ = fs::remove_file(f);
            }
            Err(e)
        }
    }
}

fn emit_inner(reports: &[RunReport], dir: &Path, formats: Formats, written: &mut Vec<PathBuf>) -> Result<i32> {
    fs::create_dir_all(dir)?;
    let code = exit_code_for(reports);
    let mut series_files = Vec::new();
    let mut figure_files = Vec::new();
    for (i, run) in reports.iter().enumerate() {
        let stem = format!("{:02}-{}", i, slug(&run.experiment));
        let mut names = Vec::new();
        for (k, s) in run.series.iter().enumerate() {
            let name = format!("{stem}-{k:03}.csv");
            if formats.csv {
                write_atomic(&dir.join(&name), series_to_csv(std::slice::from_ref(s))?.as_bytes(), written)?;
            }
            names.push(name);
        }
        series_files.push(names);
        let mut figs = Vec::new();
        for fig in &run.figures {
            let name = format!("{stem}-{}.svg", slug(&fig.name));
            if formats.svg {
                write_atomic(&dir.join(&name), render_svg(run, fig).as_bytes(), written)?;
            }
            figs.push(name);
        }
        figure_files.push(figs);
    }
    if formats.json {
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA,
            exit_code: code,
            runs: reports.to_vec(),
            series_files,
            figure_files,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        write_atomic(&dir.join("manifest.json"), text.as_bytes(), written)?;
    }
    Ok(code)
}

/// Reads a manifest written by [`emit_report`].
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    let m: Manifest = serde_json::from_str(&text)?;
    if m.schema != MANIFEST_SCHEMA {
        return Err(Error::Config(format!("unsupported manifest schema {}", m.schema)));
    }
    Ok(m)
}

/// CSV text with columns `t,value,shell,tag`; floats use the shortest representation
/// that round-trips exactly.
pub fn series_to_csv(series: &[TimeSeries]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "value", "shell", "tag"]).map_err(csv_error)?;
    for s in series {
        let shell = s.shell.map(|n| n.to_string()).unwrap_or_default();
        for (t, v) in s.times.iter().zip(&s.values) {
            w.write_record([format!("{t:?}"), format!("{v:?}"), shell.clone(), s.tag.clone()])
                .map_err(csv_error)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

/// Parses CSV text back into series, grouping consecutive rows by `(tag, shell)`.
pub fn series_from_csv(text: &str) -> Result<Vec<TimeSeries>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "value", "shell", "tag"] {
        return Err(Error::Config(format!("unexpected CSV header {headers:?}")));
    }
    let mut out: Vec<TimeSeries> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| Error::Config(format!("bad number {:?}: {e}", &rec[i])))
        };
        let (t, v) = (parse(0)?, parse(1)?);
        let shell = if rec[2].is_empty() {
            None
        } else {
            Some(rec[2].parse::<u32>().map_err(|e| Error::Config(e.to_string()))?)
        };
        let tag = rec[3].to_string();
        match out.last_mut() {
            Some(s) if s.tag == tag && s.shell == shell => {
                s.times.push(t);
                s.values.push(v);
            }
            _ => out.push(TimeSeries::new(tag, shell, vec![t], vec![v])),
        }
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A log–log (or log–linear) line plot of the figure's curves and envelopes.
pub fn render_svg(run: &RunReport, fig: &Figure) -> String {
    let (w, h, m) = (720.0, 440.0, 60.0);
    let ty = |v: f64| if fig.log_y { v.max(1e-300).log10() } else { v };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &i in fig.curves.iter().chain(&fig.envelopes) {
        if let Some(s) = run.series.get(i) {
            for (t, v) in s.times.iter().zip(&s.values) {
                if *t > 0.0 && v.is_finite() && (!fig.log_y || *v > 0.0) {
                    pts.push((t.log10(), ty(*v)));
                }
            }
        }
    }
    for (_, v) in &fig.levels {
        if !fig.log_y || *v > 0.0 {
            pts.push((f64::NAN, ty(*v)));
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).filter(|x| x.is_finite()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n\
         <rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        w / 2.0,
        escape(&fig.title),
        w - 2.0 * m,
        h - 2.0 * m
    );
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log10 t  [{x0:.2}, {x1:.2}]</text>\n",
        w / 2.0,
        h - 20.0
    ));
    let ylabel = if fig.log_y { "log10 value" } else { "value" };
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">{ylabel}  [{y0:.3}, {y1:.3}]</text>\n",
        h / 2.0,
        h / 2.0
    ));
    let mut legend = 0usize;
    let mut draw = |svg: &mut String, i: usize, dashed: bool| {
        let Some(s) = run.series.get(i) else { return };
        let path: Vec<String> = s
            .times
            .iter()
            .zip(&s.values)
            .filter(|(t, v)| **t > 0.0 && v.is_finite() && (!fig.log_y || **v > 0.0))
            .map(|(t, v)| format!("{:.2},{:.2}", px(t.log10()), py(ty(*v))))
            .collect();
        if path.is_empty() {
            return;
        }
        let color = PALETTE[legend % PALETTE.len()];
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>\n",
            path.join(" ")
        ));
        let label = match s.shell {
            Some(n) => format!("{} (n={n})", s.tag),
            None => s.tag.clone(),
        };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            m + 8.0,
            m + 16.0 + 14.0 * legend as f64,
            escape(&label)
        ));
        legend += 1;
    };
    for &i in &fig.curves {
        draw(&mut svg, i, false);
    }
    for &i in &fig.envelopes {
        draw(&mut svg, i, true);
    }
    for (label, v) in &fig.levels {
        if fig.log_y && *v <= 0.0 {
            continue;
        }
        let y = py(ty(*v));
        svg.push_str(&format!(
            "<line x1=\"{m}\" x2=\"{}\" y1=\"{y:.2}\" y2=\"{y:.2}\" stroke=\"gray\" stroke-dasharray=\"2 3\"/>\n\
             <text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"gray\" text-anchor=\"end\">{}</text>\n",
            w - m,
            w - m - 4.0,
            y - 4.0,
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(pass: bool) -> RunReport {
        let mut r = RunReport::new("demo run", None);
        let i = r.push_series(TimeSeries::new("P(t)", None, vec![1.0, 2.0, 4.0], vec![0.5, 0.25, 0.125]));
        r.push_series(TimeSeries::new("tail, with comma", Some(2), vec![1.0, 2.0], vec![1e-300, 0.1 + 0.2]));
        let mut c = BoundCertificate::new("demo", "≤ 1");
        c.check("x", 0.5, "≤ 1", pass);
        r.certificates.push(c);
        r.figures.push(Figure {
            name: "decay".into(),
            title: "P(t) <decay>".into(),
            curves: vec![i],
            envelopes: vec![],
            levels: vec![("level".into(), 1e-3)],
            log_y: true,
        });
        r
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let r = sample_report(true);
        let text = series_to_csv(&r.series).unwrap();
        let back = series_from_csv(&text).unwrap();
        assert_eq!(back, r.series);
    }

    #[test]
    fn exit_codes_follow_contract() {
        assert_eq!(exit_code_for(&[]), exit_code::SUCCESS);
        assert_eq!(exit_code_for(&[sample_report(true)]), exit_code::SUCCESS);
        assert_eq!(exit_code_for(&[sample_report(true), sample_report(false)]), exit_code::CERTIFICATE_FAILURE);
        let mut flagged = sample_report(true);
        flagged.flagged = true;
        assert_eq!(exit_code_for(&[flagged, sample_report(false)]), exit_code::NUMERICAL_FAILURE);
    }

    #[test]
    fn svg_is_well_formed_text() {
        let r = sample_report(true);
        let svg = render_svg(&r, &r.figures[0]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("&lt;decay&gt;"));
        assert!(svg.contains("polyline"));
    }
}

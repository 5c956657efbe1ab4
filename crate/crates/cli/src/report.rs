//! Output records: JSON compile results, CSV rows and the plain-text table.

use std::fmt::Write;

use anyhow::Result;
use nacc_core::{FidelityReport, GridArch, Schedule};
use serde::Serialize;

/// Everything `compile -o` writes for one circuit.
#[derive(Debug, Serialize)]
pub struct CompileOutput {
    pub circuit: String,
    pub arch: GridArch,
    pub report: FidelityReport,
    pub schedule: Schedule,
    /// Wall-clock seconds spent in the compiler.
    pub rt_s: f64,
}

/// One CSV/table row. `h` is the compiled CZ depth, `D_um` the summed
/// per-stage maximum movement distance.
#[derive(Debug, Serialize)]
pub struct Row {
    pub circuit: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "T_us")]
    pub t_us: f64,
    #[serde(rename = "T_idle_us")]
    pub t_idle_us: f64,
    pub h: usize,
    pub s: usize,
    #[serde(rename = "D_um")]
    pub d_um: f64,
    #[serde(rename = "M")]
    pub move_stages: usize,
    #[serde(rename = "P")]
    pub parts: usize,
    #[serde(rename = "RT_s")]
    pub rt_s: f64,
}

impl From<&CompileOutput> for Row {
    fn from(o: &CompileOutput) -> Self {
        let k = &o.report.counters;
        Row {
            circuit: o.circuit.clone(),
            n: k.n,
            m: k.m,
            f: o.report.f,
            t_us: o.report.t.as_us(),
            t_idle_us: o.report.t_idle.as_us(),
            h: k.h,
            s: k.s,
            d_um: k.d_um,
            move_stages: k.move_stages,
            parts: k.parts,
            rt_s: o.rt_s,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub value: String,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "T_idle")]
    pub t_idle: f64,
    pub s: usize,
    #[serde(rename = "D")]
    pub d_um: f64,
}

impl SweepRow {
    pub fn new(value: &str, r: &FidelityReport) -> Self {
        SweepRow {
            value: value.to_string(),
            f: r.f,
            t: r.t.as_us(),
            t_idle: r.t_idle.as_us(),
            s: r.counters.s,
            d_um: r.counters.d_um,
        }
    }
}

pub fn csv_text<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn table(rows: &[Row]) -> String {
    let width = rows.iter().map(|r| r.circuit.len()).max().unwrap_or(0).max(7);
    let mut out = format!(
        "{:<width$} {:>4} {:>6} {:>10} {:>5} {:>6} {:>4} {:>9}\n",
        "circuit", "n", "#CZ", "F", "M", "D", "P", "RT(s)"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$} {:>4} {:>6} {:>10.4} {:>5} {:>6} {:>4} {:>9.3}",
            r.circuit, r.n, r.m, r.f, r.move_stages, r.h, r.parts, r.rt_s
        );
    }
    out
}

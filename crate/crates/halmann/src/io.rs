//! Trace CSV, constants sidecar and JSON report files.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use halmann_core::{Nat, TraceSeries, Variant};
use serde::{Deserialize, Serialize};

pub const TRACE_HEADER: [&str; 10] = [
    "n", "d_xx", "d_yy", "d_xy", "d_Tx", "d_Ux", "d_Ty", "d_Uy", "d_xp", "d_yp",
];

/// Constants of a run, stored next to its trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConstants {
    #[serde(rename = "M_p")]
    pub m_p: f64,
    #[serde(rename = "K")]
    pub k: Nat,
    pub n_max: u64,
    pub variant: Variant,
}

fn columns(s: &TraceSeries) -> [&[f64]; 9] {
    [
        &s.d_xx, &s.d_yy, &s.d_xy, &s.d_tx, &s.d_ux, &s.d_ty, &s.d_uy, &s.d_xp, &s.d_yp,
    ]
}

/// 17 significant digits: every double survives a round trip.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace_csv(writer: impl Write, series: &TraceSeries) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    let cols = columns(series);
    for n in 0..series.n_max as usize {
        let mut row = Vec::with_capacity(10);
        row.push(n.to_string());
        row.extend(cols.iter().map(|c| fmt_f64(c[n])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(
    reader: impl std::io::Read,
    constants: &TraceConstants,
) -> anyhow::Result<TraceSeries> {
    let mut r = csv::ReaderBuilder::new().from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    anyhow::ensure!(header == TRACE_HEADER, "unexpected trace header {header:?}");
    let mut s = TraceSeries {
        n_max: 0,
        m_p: constants.m_p,
        k: constants.k,
        ..TraceSeries::default()
    };
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let n: usize = record[0]
            .parse()
            .with_context(|| format!("row {i}: bad index"))?;
        anyhow::ensure!(n == i, "row {i} has index {n}");
        let mut values = [0.0; 9];
        for (j, v) in values.iter_mut().enumerate() {
            *v = record[j + 1]
                .parse()
                .with_context(|| format!("row {i}, column {}", TRACE_HEADER[j + 1]))?;
        }
        let cols: [&mut Vec<f64>; 9] = [
            &mut s.d_xx,
            &mut s.d_yy,
            &mut s.d_xy,
            &mut s.d_tx,
            &mut s.d_ux,
            &mut s.d_ty,
            &mut s.d_uy,
            &mut s.d_xp,
            &mut s.d_yp,
        ];
        for (c, v) in cols.into_iter().zip(values) {
            c.push(v);
        }
    }
    s.n_max = s.d_xx.len() as u64;
    anyhow::ensure!(
        s.n_max == constants.n_max,
        "trace has {} rows, constants say {}",
        s.n_max,
        constants.n_max
    );
    Ok(s)
}

pub fn save_trace(dir: &Path, series: &TraceSeries, variant: Variant) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let file = fs::File::create(dir.join("trace.csv"))?;
    write_trace_csv(std::io::BufWriter::new(file), series)?;
    let constants = TraceConstants {
        m_p: series.m_p,
        k: series.k,
        n_max: series.n_max,
        variant,
    };
    write_json(&dir.join("constants.json"), &constants)
}

pub fn load_trace(dir: &Path) -> anyhow::Result<TraceSeries> {
    let text = fs::read_to_string(dir.join("constants.json"))?;
    let constants: TraceConstants = serde_json::from_str(&text)?;
    let file = fs::File::open(dir.join("trace.csv"))?;
    read_trace_csv(std::io::BufReader::new(file), &constants)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use halmann_core::benchmarks::real_line;
    use halmann_core::iterate::run_hm;

    #[test]
    fn csv_round_trip_is_lossless() {
        let series = run_hm(&real_line().unwrap(), 50).unwrap().series;
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,d_xx,d_yy,d_xy,d_Tx,d_Ux,d_Ty,d_Uy,d_xp,d_yp\n"));
        assert!(!text.contains('\r'));
        let row1 = text.lines().nth(2).unwrap();
        // d(x_1, x_2) = 1 - 1/3 in double precision
        assert!(row1.starts_with("1,6.6666666666666674e-1,"), "{row1}");
        let constants = TraceConstants {
            m_p: series.m_p,
            k: series.k,
            n_max: series.n_max,
            variant: Variant::HalpernMann,
        };
        let back = read_trace_csv(buf.as_slice(), &constants).unwrap();
        assert_eq!(back, series);
    }
}

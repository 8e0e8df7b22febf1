//! CSV and gnuplot output. Floats are written with Rust's shortest
//! round-trip representation, so parsing a file back is exact.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::diagnostics::{CellStatus, ErrorRecord};
use crate::ensemble::CouplingReport;
use crate::error::{Error, Result};
use crate::schemes::SchemeId;

use super::run::sort_records;

pub const SWEEP_HEADER: [&str; 11] =
    ["scheme", "eps", "dt", "horizon", "n_steps", "err_y", "err_y_gc", "err_v", "err_v_gc", "gc_proxy", "status"];

pub const COUPLING_HEADER: [&str; 9] =
    ["pairing", "n", "eps", "dt", "n_steps", "mean_gap", "max_gap", "first_moment", "exact_distance"];

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Parse { path: path.to_path_buf(), message: e.to_string() }
}

/// Write records (sorted by scheme, `ε`, `Δt`) as CSV.
pub fn write_records<W: Write>(records: &[ErrorRecord], out: W) -> csv::Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in &sorted {
        w.write_record([
            r.scheme.tag().to_string(),
            num(r.eps),
            num(r.dt),
            num(r.horizon),
            r.n_steps.to_string(),
            num(r.err_y),
            num(r.err_y_gc),
            opt(r.err_v),
            num(r.err_v_gc),
            r.gc_proxy.to_string(),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ErrorRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_records(records, BufWriter::new(file)).map_err(csv_err(path))
}

fn parse_f64(field: &str, what: &str) -> std::result::Result<f64, String> {
    field.parse().map_err(|_| format!("bad {what} `{field}`"))
}

/// Parse a sweep CSV written by [`write_records`].
pub fn read_records<R: Read>(input: R) -> std::result::Result<Vec<ErrorRecord>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| e.to_string())?;
        let scheme: SchemeId = row[0].parse().map_err(|e: Error| e.to_string())?;
        let status = match &row[10] {
            "ok" => CellStatus::Ok,
            s => CellStatus::Failed(s.strip_prefix("failed: ").ok_or_else(|| format!("bad status `{s}`"))?.to_string()),
        };
        out.push(ErrorRecord {
            scheme,
            eps: parse_f64(&row[1], "eps")?,
            dt: parse_f64(&row[2], "dt")?,
            horizon: parse_f64(&row[3], "horizon")?,
            n_steps: row[4].parse().map_err(|_| format!("bad n_steps `{}`", &row[4]))?,
            err_y: parse_f64(&row[5], "err_y")?,
            err_y_gc: parse_f64(&row[6], "err_y_gc")?,
            err_v: if row[7].is_empty() { None } else { Some(parse_f64(&row[7], "err_v")?) },
            err_v_gc: parse_f64(&row[8], "err_v_gc")?,
            gc_proxy: row[9].parse().map_err(|_| format!("bad gc_proxy `{}`", &row[9]))?,
            status,
        });
    }
    Ok(out)
}

pub fn load_csv(path: &Path) -> Result<Vec<ErrorRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    read_records(file).map_err(|message| Error::Parse { path: path.to_path_buf(), message })
}

/// Gnuplot data: one block per `(scheme, Δt)`, rows `eps err_y err_y_gc
/// err_v err_v_gc` in increasing `ε`, blocks separated by two blank lines
/// (select with `index`). Missing values are written as `NaN`.
pub fn write_plot_data<W: Write>(records: &[ErrorRecord], mut out: W) -> std::io::Result<()> {
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.scheme.tag().cmp(b.scheme.tag()).then(b.dt.total_cmp(&a.dt)).then(a.eps.total_cmp(&b.eps)));
    let mut first = true;
    let mut i = 0;
    while i < sorted.len() {
        let (scheme, dt) = (sorted[i].scheme, sorted[i].dt);
        if !first {
            writeln!(out, "\n")?;
        }
        first = false;
        writeln!(out, "# scheme={scheme} dt={}", num(dt))?;
        writeln!(out, "# eps err_y err_y_gc err_v err_v_gc")?;
        while i < sorted.len() && sorted[i].scheme == scheme && sorted[i].dt == dt {
            let r = &sorted[i];
            writeln!(
                out,
                "{} {} {} {} {}",
                num(r.eps),
                num(r.err_y),
                num(r.err_y_gc),
                num(r.err_v.unwrap_or(f64::NAN)),
                num(r.err_v_gc)
            )?;
            i += 1;
        }
    }
    Ok(())
}

pub fn emit_plot_data(records: &[ErrorRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_plot_data(records, &mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn write_coupling<W: Write>(reports: &[CouplingReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COUPLING_HEADER)?;
    for r in reports {
        w.write_record([
            r.pairing.clone(),
            r.n.to_string(),
            num(r.eps),
            num(r.dt),
            r.n_steps.to_string(),
            num(r.mean_gap),
            num(r.max_gap),
            num(r.first_moment),
            opt(r.exact_distance),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_coupling_csv(reports: &[CouplingReport], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_coupling(reports, BufWriter::new(file)).map_err(csv_err(path))
}

//! The trace CSV schema.
//!
//! One header row, then one row per trace record:
//!
//! ```text
//! epoch,inner_step,global_step,loss,grad_norm_sq,fwd_queries,bwd_queries,total_queries,wall_ms
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back gives the recorded values bit for bit.

use std::io;

use vamo::optim::TraceRecord;

pub const TRACE_COLUMNS: [&str; 9] = [
    "epoch",
    "inner_step",
    "global_step",
    "loss",
    "grad_norm_sq",
    "fwd_queries",
    "bwd_queries",
    "total_queries",
    "wall_ms",
];

/// Writes `records`; with `timing` off the `wall_ms` column is all zeros.
pub fn write_trace<W: io::Write>(records: &[TraceRecord], timing: bool, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        let wall = if timing { r.wall_ms } else { 0.0 };
        w.write_record([
            r.epoch.to_string(),
            r.inner_step.to_string(),
            r.global_step.to_string(),
            r.loss.to_string(),
            r.grad_norm_sq.to_string(),
            r.fwd_queries.to_string(),
            r.bwd_queries.to_string(),
            r.total_queries().to_string(),
            wall.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_trace<R: io::Read>(input: R) -> io::Result<Vec<TraceRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_COLUMNS {
        return Err(bad(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for (k, row) in r.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).ok_or_else(|| bad(format!("row {}: missing {}", k + 1, TRACE_COLUMNS[i])));
        let int =
            |i: usize| field(i)?.parse::<u64>().map_err(|e| bad(format!("row {}, {}: {e}", k + 1, TRACE_COLUMNS[i])));
        let float =
            |i: usize| field(i)?.parse::<f64>().map_err(|e| bad(format!("row {}, {}: {e}", k + 1, TRACE_COLUMNS[i])));
        let rec = TraceRecord {
            epoch: int(0)? as usize,
            inner_step: int(1)? as usize,
            global_step: int(2)? as usize,
            loss: float(3)?,
            grad_norm_sq: float(4)?,
            fwd_queries: int(5)?,
            bwd_queries: int(6)?,
            wall_ms: float(8)?,
        };
        if rec.total_queries() != int(7)? {
            return Err(bad(format!("row {}: total_queries is not fwd + bwd", k + 1)));
        }
        out.push(rec);
    }
    Ok(out)
}

fn bad(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

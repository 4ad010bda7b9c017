use std::fmt;
use std::io;

/// Outcome of one verification check.
///
/// `pass` holds exactly when the check's stated inequality holds:
/// `measured ≤ bound_or_target` for bounds, or within the stated tolerance
/// for equalities.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub measured: f64,
    pub bound_or_target: f64,
    /// Zero for exact checks.
    pub std_error: f64,
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
}

pub const REPORT_COLUMNS: [&str; 7] =
    ["check_name", "measured", "bound_or_target", "std_error", "pass", "trials", "seed"];

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} measured={:.6e} bound={:.6e} se={:.3e} trials={} seed={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound_or_target,
            self.std_error,
            self.trials,
            self.seed
        )
    }
}

/// Writes reports as CSV with a [`REPORT_COLUMNS`] header.
pub fn write_reports_csv<W: io::Write>(reports: &[CheckReport], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            format!("{:e}", r.measured),
            format!("{:e}", r.bound_or_target),
            format!("{:e}", r.std_error),
            r.pass.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()
}

/// Reads reports written by [`write_reports_csv`].
pub fn read_reports_csv<R: io::Read>(input: R) -> io::Result<Vec<CheckReport>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_COLUMNS {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", REPORT_COLUMNS[i])));
        out.push(CheckReport {
            name: rec[0].to_string(),
            measured: num(1)?,
            bound_or_target: num(2)?,
            std_error: num(3)?,
            pass: rec[4].parse().map_err(|e| bad(format!("pass: {e}")))?,
            trials: rec[5].parse().map_err(|e| bad(format!("trials: {e}")))?,
            seed: rec[6].parse().map_err(|e| bad(format!("seed: {e}")))?,
        });
    }
    Ok(out)
}

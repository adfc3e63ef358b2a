use std::io::{self, Write};

use serde::Serialize;

use super::Phase;

/// Column header of the trace CSV.
pub const TRACE_CSV_HEADER: &str = "trial,t,eta,subspace_dist,w_norm,good_event,phase";

/// One traced iterate. `w_norm` is `+∞` when `VᵀZ_t` is numerically singular.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub trial: usize,
    pub t: usize,
    pub eta: f64,
    pub subspace_dist: f64,
    pub w_norm: f64,
    pub good_event: bool,
    pub phase: Phase,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn write_csv_header<W: Write>(w: &mut W) -> io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")
    }

    /// Rows without the header, LF-terminated.
    pub fn write_csv_rows<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.trial,
                r.t,
                r.eta,
                r.subspace_dist,
                r.w_norm,
                u8::from(r.good_event),
                r.phase.as_str()
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        Self::write_csv_header(&mut buf).expect("write to Vec");
        self.write_csv_rows(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let trace = RunTrace {
            rows: vec![TraceRow {
                trial: 3,
                t: 0,
                eta: 0.0,
                subspace_dist: 0.25,
                w_norm: f64::INFINITY,
                good_event: false,
                phase: Phase::II,
            }],
        };
        assert_eq!(trace.to_csv(), format!("{TRACE_CSV_HEADER}\n3,0,0,0.25,inf,0,II\n"));
    }
}

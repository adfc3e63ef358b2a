//! File output. Every file is written to a sibling temporary and renamed into
//! place, so a failed command never leaves a truncated artifact behind.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ojak::oja::RunTrace;

use crate::runner::TrialOutcome;
use crate::BenchError;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const VERIFY_FILE: &str = "verify.json";
pub const SWEEP_JSON_FILE: &str = "sweep.json";
pub const SWEEP_CSV_FILE: &str = "sweep.csv";

fn io_err(path: &Path, e: std::io::Error) -> BenchError {
    BenchError::Runtime(format!("{}: {e}", path.display()))
}

/// Write through `fill` into `dir/name`.
pub fn write_atomic<F>(dir: &Path, name: &str, fill: F) -> Result<PathBuf, BenchError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let result = File::create(&tmp).and_then(|f| {
        let mut w = BufWriter::new(f);
        fill(&mut w)?;
        w.flush()
    });
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(&tmp, e));
    }
    fs::rename(&tmp, &target).map_err(|e| io_err(&target, e))?;
    Ok(target)
}

/// The concatenated trace of all trials in trial order.
pub fn write_trace(dir: &Path, outcomes: &[TrialOutcome]) -> Result<PathBuf, BenchError> {
    write_atomic(dir, TRACE_FILE, |w| {
        RunTrace::write_csv_header(w)?;
        for o in outcomes {
            RunTrace { rows: o.rows.clone() }.write_csv_rows(w)?;
        }
        Ok(())
    })
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, BenchError> {
    write_atomic(dir, name, |w| w.write_all(text.as_bytes()))
}

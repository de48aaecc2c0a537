//! Report serialization.

use std::time::{SystemTime, UNIX_EPOCH};

use crate::checks::CheckReport;
use crate::error::{Error, Result};

/// Pretty-printed JSON with a trailing newline. With `timestamp` the current
/// Unix time is recorded in `generated_at`; without it the output depends on
/// the configuration alone.
pub fn to_json(report: &CheckReport, timestamp: bool) -> Result<String> {
    let mut r = report.clone();
    r.generated_at = if timestamp {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    } else {
        None
    };
    let mut s = serde_json::to_string_pretty(&r).map_err(|e| Error::Usage(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// One line per suite plus a total, for the terminal.
pub fn summary_text(report: &CheckReport) -> String {
    let mut out = String::new();
    for (name, s) in &report.summary.by_suite {
        let worst = s.worst_residual.map(|w| format!("{w:.2e}")).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{name:<22} {:>5} records  {:>5} pass  {:>5} fail  {:>3} findings  worst residual {worst}\n",
            s.records, s.passed, s.failed, s.findings
        ));
    }
    let s = &report.summary;
    out.push_str(&format!(
        "total {} records, {} pass, {} fail, {} findings\n",
        s.records, s.passed, s.failed, s.findings
    ));
    out
}

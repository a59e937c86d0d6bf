use std::io::{BufRead, Write};

use super::SteadyStateTable;
use crate::error::{Error, Result};

/// Writes `phase,count,prob` rows with round-trip precision.
pub fn write_table_csv(table: &SteadyStateTable, mut w: impl Write) -> Result<()> {
    writeln!(w, "phase,count,prob")?;
    for (s, p) in table.states() {
        if table.params.is_valid_state(s) {
            writeln!(w, "{},{},{:e}", s.phase, s.count, p)?;
        }
    }
    Ok(())
}

/// Reads rows written by [`write_table_csv`] as `(phase, count, prob)`.
pub fn read_table_csv(r: impl BufRead) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for (line_no, line) in r.lines().enumerate() {
        let line = line?;
        if line_no == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::InvalidConfig(format!("golden csv line {}: '{line}'", line_no + 1));
        let mut parts = line.split(',');
        let mut next = || parts.next().map(str::trim).ok_or_else(bad);
        let phase = next()?.parse().map_err(|_| bad())?;
        let count = next()?.parse().map_err(|_| bad())?;
        let prob = next()?.parse().map_err(|_| bad())?;
        out.push((phase, count, prob));
    }
    Ok(out)
}

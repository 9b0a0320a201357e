//! The CSV record schema shared by every subcommand, plus readers and
//! writers that carry a `#`-prefixed metadata preamble.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::BenchResult;

/// One estimation trial. Column order is the schema; it never changes
/// between runs, which is what makes output diffs meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    /// Instance label, the input file stem.
    pub hamiltonian: String,
    /// Free-form curve tag (interatomic distance or similar); empty when a
    /// run has no curve dimension.
    pub distance: String,
    pub estimator: String,
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub trial: u64,
    pub seed: u64,
    pub samples_used: u64,
    pub rounds_used: u64,
    pub terminated_by: String,
    pub estimate: f64,
    pub exact_energy: f64,
    pub abs_error: f64,
}

/// Writes `# key: value` preamble lines followed by the CSV table.
pub fn write_records<W: Write>(
    mut out: W,
    preamble: &[(String, String)],
    records: &[BenchRecord],
) -> BenchResult<()> {
    for (key, value) in preamble {
        writeln!(out, "# {key}: {value}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads records back, skipping any `#` preamble and blank lines before the
/// header row.
pub fn read_records<R: Read>(input: R) -> BenchResult<Vec<BenchRecord>> {
    let mut table = String::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if line.starts_with('#') || (table.is_empty() && line.trim().is_empty()) {
            continue;
        }
        table.push_str(&line);
        table.push('\n');
    }
    let mut reader = csv::Reader::from_reader(table.as_bytes());
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row?);
    }
    Ok(records)
}

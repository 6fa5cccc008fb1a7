//! CSV in and out.

use std::path::Path;

use gelkde::simulation::Obs;

use crate::error::{CliError, CliResult};

/// Observations from a CSV with a header row naming `y` and `x` (any order, any case).
pub fn read_obs(path: &Path) -> CliResult<Vec<Obs>> {
    let shown = path.display();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{shown}: header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::Input(format!("{shown}: header has no '{name}' column")))
    };
    let (iy, ix) = (column("y")?, column("x")?);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| CliError::Input(format!("{shown}: row {row}: {e}")))?;
        let line = rec.position().map_or(row as u64 + 1, |p| p.line());
        let field = |i: usize, name: &str| -> CliResult<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Input(format!(
                        "{shown}: row {row} (line {line}): {name} = '{s}' is not a finite number"
                    ))
                })
        };
        out.push(Obs {
            y: field(iy, "y")?,
            x: field(ix, "x")?,
        });
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{shown}: no data rows")));
    }
    Ok(out)
}

/// Columns of equal length as CSV bytes.
pub fn columns_csv(header: &[&str], columns: &[&[f64]]) -> CliResult<Vec<u8>> {
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows) && header.len() == columns.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Input(e.to_string()))
}

use std::fs;
use std::path::Path;

use wigf_core::{Sample, SampleSource};

use crate::CliError;

/// Reads one value per row (commas also separate values). A leading
/// `value` header is skipped.
pub fn ingest_csv(path: &Path) -> Result<Sample, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let values = parse_values(&text).map_err(|m| CliError::Io(format!("{}: {m}", path.display())))?;
    Sample::from_parts(
        values,
        SampleSource::File {
            path: path.display().to_string(),
        },
    )
    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        for field in line.split(',') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            if row == 1 && out.is_empty() && field.eq_ignore_ascii_case("value") {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| format!("row {row}: `{field}` is not a number"))?;
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("no values".into());
    }
    Ok(out)
}

//! CSV formatting and plain parsing for the experiment outputs. Fields never
//! contain commas, reals are written with six decimals, and undefined
//! statistics are written as `NA`.

use std::path::Path;

use crate::CliError;

/// Fixed six-decimal formatting; normalizes negative zero.
pub fn fixed6(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

/// Six-decimal formatting with trailing zeros (and a bare point) removed:
/// `6.0 -> "6"`, `6.6000000000000005 -> "6.6"`.
pub fn trimmed(x: f64) -> String {
    let s = fixed6(x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Reads one of our own CSV files back, checking the expected header.
pub fn read_csv(path: &Path, expected_header: &str) -> Result<Vec<Vec<String>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Data(format!(
            "missing input {} (run the producing command first): {e}",
            path.display()
        ))
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == expected_header => {}
        Some(header) => {
            return Err(CliError::Data(format!(
                "{}: unexpected header '{header}'",
                path.display()
            )))
        }
        None => return Err(CliError::Data(format!("{}: empty file", path.display()))),
    }
    Ok(lines
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect())
}

pub fn parse_field<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    field: &str,
    value: &str,
) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Data(format!(
            "{} row {}: cannot parse {field} from '{value}'",
            path.display(),
            row + 2
        ))
    })
}

//! CSV and sidecar metadata writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::sweep::SweepResult;
use crate::CliError;

/// Twelve significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// `path` with its extension replaced by `meta.json`.
pub fn metadata_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Header, then one row per result in grid order. Without `reproducible` a
/// leading `#` comment records the generation time.
pub fn write_csv(result: &SweepResult, path: &Path, reproducible: bool) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    if !reproducible {
        writeln!(out, "# generated {}", chrono::Utc::now().to_rfc3339())?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = result.columns.clone();
    header.extend(["observable", "feedback", "value", "error"].map(String::from));
    w.write_record(&header)?;
    for row in &result.rows {
        let mut rec: Vec<String> = row.params.iter().map(|&x| format_float(x)).collect();
        rec.push(row.observable.clone());
        rec.push(if row.feedback { "on" } else { "off" }.into());
        rec.push(row.value.map(format_float).unwrap_or_default());
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metadata(result: &SweepResult, path: &Path, reproducible: bool) -> Result<(), CliError> {
    let mut value = serde_json::to_value(&result.metadata)?;
    if !reproducible {
        value["generated"] = chrono::Utc::now().to_rfc3339().into();
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(0.1), "1.00000000000e-1");
        assert_eq!(format_float(-123.456), "-1.23456000000e2");
        let x = 0.123456789012345;
        let back: f64 = format_float(x).parse().unwrap();
        // half a unit in the twelfth digit
        assert!((back - x).abs() <= 5e-12 * x.abs());
        assert_eq!(format_float(back), format_float(x));
    }

    #[test]
    fn sidecar_path() {
        assert_eq!(metadata_path(Path::new("out/fig2a.csv")), PathBuf::from("out/fig2a.meta.json"));
    }
}

//! CSV and JSON serialisation of sweep results.
//!
//! CSV files start with `#` comment lines carrying the tool version and the
//! resolved configuration as one line of JSON, followed by the header
//! `sweep_value,layer,basis,mean,stderr,n`. JSON files hold `{metadata, rows}`.

use std::io::Write;
use std::path::Path;

use super::config::OutputFormat;
use super::sweeps::{SweepMetadata, SweepResult, SweepRow};
use crate::error::{Error, Result};

const CONFIG_PREFIX: &str = "# config: ";
const FAILURE_PREFIX: &str = "# failed: ";

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

pub fn to_csv_string(result: &SweepResult) -> Result<String> {
    let mut out = Vec::new();
    writeln!(out, "# {} {}", result.metadata.tool, result.metadata.version).map_err(parse_err)?;
    writeln!(out, "{CONFIG_PREFIX}{}", serde_json::to_string(&result.metadata.config).map_err(parse_err)?)
        .map_err(parse_err)?;
    for f in &result.metadata.failures {
        writeln!(out, "{FAILURE_PREFIX}{}", serde_json::to_string(f).map_err(parse_err)?).map_err(parse_err)?;
    }
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        w.write_record(["sweep_value", "layer", "basis", "mean", "stderr", "n"]).map_err(parse_err)?;
        for row in &result.rows {
            w.serialize(row).map_err(parse_err)?;
        }
        w.flush().map_err(parse_err)?;
    }
    String::from_utf8(out).map_err(parse_err)
}

pub fn from_csv_str(text: &str) -> Result<SweepResult> {
    let mut config = None;
    let mut failures = Vec::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(js) = line.strip_prefix(CONFIG_PREFIX) {
            config = Some(serde_json::from_str(js).map_err(parse_err)?);
        } else if let Some(js) = line.strip_prefix(FAILURE_PREFIX) {
            failures.push(serde_json::from_str(js).map_err(parse_err)?);
        }
    }
    let config = config.ok_or_else(|| Error::Parse("missing configuration comment".into()))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = reader.deserialize::<SweepRow>().collect::<std::result::Result<Vec<_>, _>>().map_err(parse_err)?;
    let mut metadata = SweepMetadata::new(&config);
    metadata.failures = failures;
    if let Some(first) = text.lines().next().and_then(|l| l.strip_prefix("# ")) {
        if let Some((tool, version)) = first.split_once(' ') {
            metadata.tool = tool.to_string();
            metadata.version = version.to_string();
        }
    }
    Ok(SweepResult { metadata, rows })
}

pub fn to_json_string(result: &SweepResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(result).map_err(parse_err)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json_str(text: &str) -> Result<SweepResult> {
    serde_json::from_str(text).map_err(parse_err)
}

pub fn render(result: &SweepResult, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv_string(result),
        OutputFormat::Json => to_json_string(result),
    }
}

/// Writes `result` to `path`.
pub fn emit_results(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(result, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reads a file written by [`emit_results`]; JSON is recognised by a leading `{`.
pub fn read_results(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    if text.trim_start().starts_with('{') {
        from_json_str(&text)
    } else {
        from_csv_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentConfig, Mode};
    use crate::harness::sweeps::{PointFailure, ReadoutBasis};

    fn sample() -> SweepResult {
        let mut metadata = SweepMetadata::new(&ExperimentConfig::defaults(Mode::NoiseSweep));
        metadata.failures.push(PointFailure { sweep_value: 0.3, error: "did not converge".into() });
        SweepResult {
            metadata,
            rows: vec![
                SweepRow { sweep_value: 0.1, layer: 0, basis: ReadoutBasis::X, mean: 0.123456789, stderr: 1e-3, n: 20 },
                SweepRow { sweep_value: 0.1, layer: 1, basis: ReadoutBasis::XZ, mean: -1.0, stderr: 0.0, n: 20 },
                SweepRow { sweep_value: 0.02, layer: 1, basis: ReadoutBasis::Z, mean: 11.0 / 12.0, stderr: 0.1f64.sqrt(), n: 20 },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let text = to_csv_string(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# qcnn-toric "));
        assert!(lines[1].starts_with(CONFIG_PREFIX));
        assert!(lines[2].starts_with(FAILURE_PREFIX));
        assert_eq!(lines[3], "sweep_value,layer,basis,mean,stderr,n");
        assert_eq!(lines[4], "0.1,0,X,0.123456789,0.001,20");
        assert_eq!(lines[5], "0.1,1,XZ,-1.0,0.0,20");
    }

    #[test]
    fn round_trips() {
        let r = sample();
        assert_eq!(from_csv_str(&to_csv_string(&r).unwrap()).unwrap(), r);
        assert_eq!(from_json_str(&to_json_string(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn empty_result_is_header_only() {
        let r = SweepResult { rows: vec![], ..sample() };
        let text = to_csv_string(&r).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), vec!["sweep_value,layer,basis,mean,stderr,n"]);
        assert!(from_csv_str(&text).unwrap().rows.is_empty());
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = emit_results(&sample(), OutputFormat::Csv, Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for (fmt, name) in [(OutputFormat::Csv, "r.csv"), (OutputFormat::Json, "r.json")] {
            let p = dir.path().join(name);
            emit_results(&sample(), fmt, &p).unwrap();
            assert_eq!(read_results(&p).unwrap(), sample());
        }
    }
}
